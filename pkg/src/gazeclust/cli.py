"""Command-line pipeline: cluster, features, stats, train, visualize, all, synth.

Every stage reads and writes files under ``--out`` so stages can be rerun
independently.  Exit codes: 0 success, 2 config error, 3 data error.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering.base import ALGORITHMS, NOISE, Algorithm
from .features import load_feature_matrix, save_feature_matrix
from .gaze_io import DataError, SynthConfig, Trial, generate_synthetic, load_trials, save_trials
from .indices import IndexVector
from .models import FAMILIES, ModelSpec, cross_validate, reports_json, reports_markdown
from .pipeline import cluster_trials, default_jobs, features_from_results, prepare
from .selection import SelectionResult
from .stats import EmptySampleError, significance_json, significance_markdown, significance_table
from .viz import build_scene, render_overlay, svg_filename

log = logging.getLogger("gazeclust")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3
# files whose content carries wall-clock measurements
VOLATILE = ("models.json", "models.md")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".svg")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    dataset: str | None = None
    synthetic: dict | None = None
    grids: dict = field(default_factory=dict)
    models: list | None = None
    out: str = "out"
    seed: int = 0
    jobs: int | None = None
    stimulus_dir: str | None = None
    visualize: list | None = None
    n_folds: int = 5
    n_runs: int = 5

    # fields that change where or how fast outputs are made, not what they contain
    _NOT_HASHED = ("out", "jobs")

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        unknown = set(self.grids) - {a.value for a in ALGORITHMS}
        if unknown:
            raise ConfigError(f"unknown algorithms in grids: {sorted(unknown)}")
        try:
            self.synth_config()
            self.model_specs()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def config_hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in self._NOT_HASHED}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def synth_config(self) -> SynthConfig:
        d = {"seed": self.seed} | dict(self.synthetic or {})
        return SynthConfig(**d)

    def model_specs(self) -> list[ModelSpec]:
        if self.models is None:
            return [ModelSpec(f, seed=self.seed) for f in FAMILIES]
        specs = []
        for m in self.models:
            m = {"family": m} if isinstance(m, str) else dict(m)
            specs.append(ModelSpec(m["family"], dict(m.get("params", {})), int(m.get("seed", self.seed))))
        return specs

    @property
    def provenance(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.seed}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def input_trials(cfg: PipelineConfig) -> list[Trial]:
    if cfg.dataset:
        return load_trials(cfg.dataset)
    return generate_synthetic(cfg.synth_config())


def _selection_path(out: Path, key, algo: Algorithm) -> Path:
    return out / "selection" / f"{key[0]}_{key[1]}_{algo.value}.json"


def cmd_synth(cfg: PipelineConfig) -> list[Path]:
    path = Path(cfg.out) / "trials.csv"
    save_trials(generate_synthetic(cfg.synth_config()), path)
    return [path]


def cmd_cluster(cfg: PipelineConfig) -> list[Path]:
    out = Path(cfg.out)
    usable, degenerate = prepare(input_trials(cfg))
    jobs = default_jobs() if cfg.jobs is None else cfg.jobs
    results = cluster_trials(usable, cfg.grids, cfg.seed, jobs)
    written = []
    for tr in usable:
        for algo, (res, vec) in results[tr.key].items():
            doc = {
                **cfg.provenance,
                "subject_id": tr.subject_id,
                "stimulus_id": tr.stimulus_id,
                "group": tr.group.value,
                "selection": res.to_dict(),
                "indices": vec.to_dict(),
            }
            path = _selection_path(out, tr.key, algo)
            _write(path, _dump(doc))
            written.append(path)
    skipped = out / "skipped_trials.json"
    _write(skipped, _dump({**cfg.provenance, "degenerate_trials": [list(t.key) for t in degenerate]}))
    return written + [skipped]


def _load_results(cfg: PipelineConfig, trials) -> dict:
    out = Path(cfg.out)
    results = {}
    for tr in trials:
        per = {}
        for algo in ALGORITHMS:
            path = _selection_path(out, tr.key, algo)
            if not path.exists():
                raise DataError(f"missing clustering output {path}; run 'cluster' first")
            doc = json.loads(path.read_text(encoding="utf-8"))
            per[algo] = (SelectionResult.from_dict(doc["selection"]), IndexVector.from_dict(doc["indices"]))
        results[tr.key] = per
    return results


def cmd_features(cfg: PipelineConfig) -> list[Path]:
    usable, _ = prepare(input_trials(cfg))
    matrix = features_from_results(usable, _load_results(cfg, usable))
    path = Path(cfg.out) / "features.csv"
    save_feature_matrix(matrix, path)
    return [path]


def _features(cfg: PipelineConfig):
    path = Path(cfg.out) / "features.csv"
    if not path.exists():
        raise DataError(f"missing {path}; run 'features' first")
    return load_feature_matrix(path)


def _header(cfg: PipelineConfig, title: str) -> str:
    return f"<!-- config_hash={cfg.config_hash} seed={cfg.seed} -->\n# {title}"


def cmd_stats(cfg: PipelineConfig) -> list[Path]:
    out = Path(cfg.out)
    cells = significance_table(_features(cfg))
    md, js = out / "significance.md", out / "significance.json"
    _write(md, significance_markdown(cells, header=_header(cfg, "Mann-Whitney U significance")))
    _write(js, significance_json(cells, **cfg.provenance) + "\n")
    return [md, js]


def cmd_train(cfg: PipelineConfig) -> list[Path]:
    out = Path(cfg.out)
    matrix = _features(cfg)
    reports = []
    for spec in cfg.model_specs():
        log.info("cross-validating %s", spec.family.value)
        reports.append(cross_validate(spec, matrix, n_folds=cfg.n_folds, n_runs=cfg.n_runs))
    md, js = out / "models.md", out / "models.json"
    _write(md, reports_markdown(reports, header=_header(cfg, "Cross-validated prediction")))
    _write(js, reports_json(reports, **cfg.provenance) + "\n")
    return [md, js]


def _background(cfg: PipelineConfig, stimulus_id: str) -> str | None:
    if not cfg.stimulus_dir:
        return None
    for suffix in IMAGE_SUFFIXES:
        p = Path(cfg.stimulus_dir) / f"{stimulus_id}{suffix}"
        if p.exists():
            return p.as_posix()
    return None


def cmd_visualize(cfg: PipelineConfig, keys=None) -> list[Path]:
    out = Path(cfg.out)
    usable, _ = prepare(input_trials(cfg))
    by_key = {tr.key: tr for tr in usable}
    wanted = keys if keys is not None else cfg.visualize
    if wanted is None:
        chosen = usable
    else:
        chosen = []
        for k in wanted:
            key = tuple(k.split("/", 1)) if isinstance(k, str) else tuple(k)
            if key not in by_key:
                raise DataError(f"unknown trial key {'/'.join(key)}")
            chosen.append(by_key[key])
    results = _load_results(cfg, chosen)
    written = []
    for tr in chosen:
        for algo in ALGORITHMS:
            res, _ = results[tr.key][algo]
            labels = res.best.labels if res.best is not None else np.full(tr.n_points, NOISE)
            scene = build_scene(
                tr.xy, labels, tr.stimulus_width, tr.stimulus_height,
                background=_background(cfg, tr.stimulus_id),
                title=f"{tr.subject_id} {tr.stimulus_id} {algo.value}",
                metadata=cfg.provenance,
            )
            path = out / "svg" / svg_filename(tr.subject_id, tr.stimulus_id, algo)
            _write(path, render_overlay(scene))
            written.append(path)
    return written


def write_manifest(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    entries = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            rel = p.relative_to(out).as_posix()
            entries.append({
                "path": rel,
                "sha256": hashlib.sha256(p.read_bytes()).hexdigest(),
                "volatile": rel in VOLATILE,
            })
    path = out / "manifest.json"
    _write(path, _dump({**cfg.provenance, "config": cfg.to_dict() | {"out": None, "jobs": None}, "files": entries}))
    return path


def cmd_all(cfg: PipelineConfig) -> list[Path]:
    written = []
    if not cfg.dataset:
        written += cmd_synth(cfg)
    written += cmd_cluster(cfg)
    written += cmd_features(cfg)
    written += cmd_stats(cfg)
    written += cmd_train(cfg)
    written += cmd_visualize(cfg)
    return written


COMMANDS = {
    "synth": cmd_synth,
    "cluster": cmd_cluster,
    "features": cmd_features,
    "stats": cmd_stats,
    "train": cmd_train,
    "visualize": cmd_visualize,
    "all": cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazeclust", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON pipeline config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--stimulus-dir")
        if name == "visualize":
            p.add_argument("trials", nargs="*", help="trial keys as subject/stimulus")
    return parser


def resolve_config(args) -> PipelineConfig:
    d = PipelineConfig.load(args.config).to_dict() if args.config else {}
    for name in ("out", "seed", "jobs", "stimulus_dir"):
        value = getattr(args, name)
        if value is not None:
            d[name] = value
    try:
        return PipelineConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
        if cfg.dataset and not Path(cfg.dataset).exists():
            raise DataError(f"dataset not found: {cfg.dataset}")
        if args.command == "visualize":
            cmd_visualize(cfg, args.trials or None)
        else:
            COMMANDS[args.command](cfg)
        write_manifest(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, EmptySampleError, FileNotFoundError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
