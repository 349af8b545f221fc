"""Gaze-trial data model, CSV I/O, validity filtering and a synthetic cohort generator.

A trial is one subject looking at one stimulus.  Points are kept in stimulus
pixel space; nothing is normalised on the way in.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MIN_POINTS = 10

CSV_COLUMNS = (
    "subject_id",
    "group",
    "stimulus_id",
    "stimulus_w",
    "stimulus_h",
    "t_ms",
    "x_px",
    "y_px",
    "valid",
)


class DataError(ValueError):
    """Raised for malformed or inconsistent gaze data."""


class Group(str, Enum):
    ASD = "ASD"
    TD = "TD"

    @property
    def label(self) -> int:
        return 1 if self is Group.ASD else 0


@dataclass(frozen=True)
class GazePoint:
    t: float
    x: float
    y: float
    valid: bool = True


@dataclass(eq=False)
class Trial:
    """One subject viewing one stimulus; points stored column-wise."""

    subject_id: str
    group: Group
    stimulus_id: str
    stimulus_width: float
    stimulus_height: float
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    valid: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self):
        self.group = Group(self.group)
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.valid) == n):
            raise DataError("trial point columns have unequal lengths")
        if self.stimulus_width <= 0 or self.stimulus_height <= 0:
            raise DataError("stimulus dimensions must be positive")
        if n > 1 and np.any(np.diff(self.t) < 0):
            raise DataError(f"timestamps decrease within trial {self.key}")

    @classmethod
    def from_points(cls, subject_id, group, stimulus_id, width, height, points: Iterable[GazePoint]):
        pts = list(points)
        return cls(
            subject_id,
            group,
            stimulus_id,
            width,
            height,
            t=[p.t for p in pts],
            x=[p.x for p in pts],
            y=[p.y for p in pts],
            valid=[p.valid for p in pts],
        )

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject_id, self.stimulus_id)

    @property
    def points(self) -> list[GazePoint]:
        return [
            GazePoint(float(t), float(x), float(y), bool(v))
            for t, x, y, v in zip(self.t, self.x, self.y, self.valid)
        ]

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    @property
    def n_points(self) -> int:
        return len(self.t)

    @property
    def degenerate(self) -> bool:
        return self.n_points < MIN_POINTS

    def __eq__(self, other):
        if not isinstance(other, Trial):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.group == other.group
            and self.stimulus_id == other.stimulus_id
            and self.stimulus_width == other.stimulus_width
            and self.stimulus_height == other.stimulus_height
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.valid, other.valid)
        )

    def __repr__(self):
        return (
            f"Trial({self.subject_id!r}, {self.group.value}, {self.stimulus_id!r}, "
            f"{self.stimulus_width}x{self.stimulus_height}, n={self.n_points})"
        )


@dataclass(frozen=True)
class SynthConfig:
    n_subjects_per_group: int = 20
    n_stimuli: int = 10
    hotspot_count: int = 3
    dispersion_asd: float = 60.0
    dispersion_td: float = 30.0
    noise_fraction_asd: float = 0.3
    noise_fraction_td: float = 0.1
    points_per_trial: int = 100
    seed: int = 0
    width: float = 1024.0
    height: float = 768.0
    sample_rate_hz: float = 60.0

    def __post_init__(self):
        for name in ("n_subjects_per_group", "n_stimuli", "hotspot_count", "points_per_trial"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.dispersion_asd <= 0 or self.dispersion_td <= 0:
            raise ValueError("dispersions must be > 0")
        for name in ("noise_fraction_asd", "noise_fraction_td"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _parse_valid(value: str) -> bool:
    if value not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {value!r}")
    return value == "1"


_PARSERS = {
    "stimulus_w": float,
    "stimulus_h": float,
    "t_ms": float,
    "x_px": float,
    "y_px": float,
    "valid": _parse_valid,
}


def load_trials(path, schema: Mapping[str, str] | None = None) -> list[Trial]:
    """Read a gaze CSV into trials, one per (subject_id, stimulus_id).

    ``schema`` maps canonical column names to the header names used in the
    file, for files that use different headers.  Row numbers in error
    messages count the header as row 1.
    """
    schema = {c: c for c in CSV_COLUMNS} | dict(schema or {})
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    rows: dict[tuple[str, str], dict] = {}
    seen_t: set[tuple[str, str, float]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if schema[c] not in header]
        if missing:
            raise DataError(f"missing columns: {', '.join(missing)}")
        for rownum, raw in enumerate(reader, start=2):
            rec = {}
            for col in CSV_COLUMNS:
                value = raw[schema[col]]
                if value is None:
                    raise DataError(f"row {rownum}, column {col}: missing value")
                value = value.strip()
                try:
                    rec[col] = _PARSERS[col](value) if col in _PARSERS else value
                except ValueError as exc:
                    raise DataError(f"row {rownum}, column {col}: {exc}") from None
            try:
                group = Group(rec["group"])
            except ValueError:
                raise DataError(f"row {rownum}, column group: unknown group {rec['group']!r}") from None
            key = (rec["subject_id"], rec["stimulus_id"])
            tkey = key + (rec["t_ms"],)
            if tkey in seen_t:
                raise DataError(f"row {rownum}: duplicate sample for {key} at t={rec['t_ms']}")
            seen_t.add(tkey)

            entry = rows.get(key)
            if entry is None:
                entry = rows[key] = {
                    "group": group,
                    "w": rec["stimulus_w"],
                    "h": rec["stimulus_h"],
                    "cols": ([], [], [], []),
                }
            elif entry["group"] is not group or entry["w"] != rec["stimulus_w"] or entry["h"] != rec["stimulus_h"]:
                raise DataError(f"row {rownum}: inconsistent trial metadata for {key}")
            for col, value in zip(entry["cols"], (rec["t_ms"], rec["x_px"], rec["y_px"], rec["valid"])):
                col.append(value)

    trials = []
    for (subject, stimulus), entry in rows.items():
        t, x, y, v = entry["cols"]
        trials.append(Trial(subject, entry["group"], stimulus, entry["w"], entry["h"], t, x, y, v))
    return trials


def save_trials(trials: Sequence[Trial], path) -> None:
    """Write trials in the canonical CSV schema (floats via repr, so lossless)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for tr in trials:
            for t, x, y, v in zip(tr.t, tr.x, tr.y, tr.valid):
                writer.writerow(
                    [
                        tr.subject_id,
                        tr.group.value,
                        tr.stimulus_id,
                        repr(float(tr.stimulus_width)),
                        repr(float(tr.stimulus_height)),
                        repr(float(t)),
                        repr(float(x)),
                        repr(float(y)),
                        "1" if v else "0",
                    ]
                )


def filter_valid(trial: Trial) -> Trial:
    """Keep flagged-valid, finite, in-bounds points; order is preserved."""
    x, y = trial.x, trial.y
    with np.errstate(invalid="ignore"):
        keep = (
            trial.valid
            & np.isfinite(x)
            & np.isfinite(y)
            & (x >= 0)
            & (x < trial.stimulus_width)
            & (y >= 0)
            & (y < trial.stimulus_height)
        )
    return Trial(
        trial.subject_id,
        trial.group,
        trial.stimulus_id,
        trial.stimulus_width,
        trial.stimulus_height,
        trial.t[keep],
        x[keep],
        y[keep],
        trial.valid[keep],
    )


def generate_synthetic(config: SynthConfig) -> list[Trial]:
    """Seeded cohort: per-stimulus Gaussian hotspots plus uniform background.

    Hotspot centres are drawn once per stimulus and shared by both groups;
    each group has its own dispersion and background fraction.  Gaussian
    draws falling outside the canvas are redrawn, so every point is valid.
    """
    rng = np.random.default_rng(config.seed)
    w, h = config.width, config.height
    centers = _draw_centers(rng, config)
    dt = 1000.0 / config.sample_rate_hz
    n = config.points_per_trial
    trials = []
    for group in (Group.ASD, Group.TD):
        sigma = config.dispersion_asd if group is Group.ASD else config.dispersion_td
        noise = config.noise_fraction_asd if group is Group.ASD else config.noise_fraction_td
        for s in range(config.n_subjects_per_group):
            subject = f"{group.value.lower()}{s:03d}"
            for j in range(config.n_stimuli):
                is_noise = rng.random(n) < noise
                which = rng.integers(config.hotspot_count, size=n)
                xy = np.empty((n, 2))
                n_bg = int(is_noise.sum())
                xy[is_noise] = rng.uniform([0.0, 0.0], [w, h], size=(n_bg, 2))
                todo = np.flatnonzero(~is_noise)
                while todo.size:
                    draw = centers[j, which[todo]] + rng.normal(0.0, sigma, size=(todo.size, 2))
                    ok = (draw[:, 0] >= 0) & (draw[:, 0] < w) & (draw[:, 1] >= 0) & (draw[:, 1] < h)
                    xy[todo[ok]] = draw[ok]
                    todo = todo[~ok]
                trials.append(
                    Trial(
                        subject,
                        group,
                        f"stim{j:02d}",
                        w,
                        h,
                        t=np.arange(n) * dt,
                        x=xy[:, 0],
                        y=xy[:, 1],
                        valid=np.ones(n, dtype=bool),
                    )
                )
    return trials


def _draw_centers(rng, config: SynthConfig) -> np.ndarray:
    w, h = config.width, config.height
    margin = 0.15
    return rng.uniform(
        [margin * w, margin * h],
        [(1 - margin) * w, (1 - margin) * h],
        size=(config.n_stimuli, config.hotspot_count, 2),
    )


def hotspot_centers(config: SynthConfig) -> np.ndarray:
    """The hotspot centres ``generate_synthetic`` uses, shape (n_stimuli, hotspot_count, 2)."""
    return _draw_centers(np.random.default_rng(config.seed), config)


def check_unique_keys(trials: Iterable[Trial]) -> None:
    seen = set()
    for tr in trials:
        if tr.key in seen:
            raise DataError(f"duplicate trial key {tr.key}")
        seen.add(tr.key)

