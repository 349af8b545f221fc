"""Mann-Whitney U tests of ASD vs TD feature columns."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

EXACT_MAX_N = 20


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True)
class UTestResult:
    u: float
    p: float
    n1: int
    n2: int
    method: str  # "exact" or "normal_approx"


def midranks(values) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    ranks = np.empty(len(v))
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sorted_v[1:] != sorted_v[:-1]])
    ends = np.r_[starts[1:], len(v)]
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + 1 + e) / 2.0
    return ranks


def _clean(sample) -> np.ndarray:
    out = []
    for x in sample:
        if x is None:
            continue
        x = float(x)
        if math.isnan(x):
            continue
        out.append(x)
    return np.asarray(out, dtype=float)


def u_statistic(a, b) -> float:
    """U of the first sample: pairs a_i > b_j, ties counting one half."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    r = midranks(np.concatenate([a, b]))
    n1 = len(a)
    return float(r[:n1].sum() - n1 * (n1 + 1) / 2.0)


@lru_cache(maxsize=None)
def u_distribution(n1: int, n2: int) -> np.ndarray:
    """Number of rank arrangements giving each U value 0..n1*n2 (no ties).

    Uses f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1): the largest
    observation either belongs to the first sample (beating all n of the
    second) or to the second.
    """
    # table[m][n] as arrays, built up over n for each m
    prev = [np.ones(1, dtype=np.int64) for _ in range(n2 + 1)]  # m = 0
    for m in range(1, n1 + 1):
        cur = [np.ones(1, dtype=np.int64)]  # n = 0: one arrangement, U = 0
        for n in range(1, n2 + 1):
            f = np.zeros(m * n + 1, dtype=np.int64)
            left = prev[n]  # m-1, n: shifted by n
            f[n : n + len(left)] += left
            right = cur[n - 1]  # m, n-1
            f[: len(right)] += right
            cur.append(f)
        prev = cur
    return prev[n2]


def _exact_p(u: float, n1: int, n2: int) -> float:
    counts = u_distribution(n1, n2)
    total = counts.sum()
    ui = int(round(u))
    lower = counts[: ui + 1].sum() / total
    upper = counts[ui:].sum() / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_p(u: float, ranks: np.ndarray, n1: int, n2: int) -> float:
    n = n1 + n2
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = (abs(u - n1 * n2 / 2.0) - 0.5) / math.sqrt(var)
    if z <= 0:
        return 1.0
    return float(min(1.0, math.erfc(z / math.sqrt(2.0))))


def mann_whitney_u(a: Sequence, b: Sequence, method: str = "auto") -> UTestResult:
    """Two-sided Mann-Whitney U test; None/NaN entries are dropped first.

    ``method="auto"`` uses the exact null distribution when the pooled size
    is at most 20 and there are no ties, otherwise the normal approximation
    with tie-corrected variance and a 0.5 continuity correction.
    """
    a, b = _clean(a), _clean(b)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise EmptySampleError("empty sample")
    ranks = midranks(np.concatenate([a, b]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    has_ties = len(np.unique(ranks)) < n1 + n2
    if method == "auto":
        method = "exact" if n1 + n2 <= EXACT_MAX_N and not has_ties else "normal_approx"
    if method == "exact":
        if has_ties:
            raise ValueError("exact test needs tie-free samples")
        p = _exact_p(u, n1, n2)
    elif method == "normal_approx":
        p = _normal_p(u, ranks, n1, n2)
    else:
        raise ValueError(f"unknown method {method!r}")
    return UTestResult(u, p, n1, n2, method)


# ------------------------------------------------------------ significance table


def stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    return "*"


@dataclass(frozen=True)
class SignificanceCell:
    algorithm: str
    index: str
    p: float
    stars: str
    u: float | None = None
    n1: int | None = None
    n2: int | None = None
    method: str | None = None


def significance_table(matrix) -> list[SignificanceCell]:
    """One U test per feature column, ASD rows (label 1) against TD rows (label 0)."""
    labels = np.asarray(matrix.labels)
    if not (labels == 1).any() or not (labels == 0).any():
        raise EmptySampleError("both groups must be non-empty")
    cells = []
    for j, (algo, index) in enumerate(matrix.column_pairs):
        col = matrix.values[:, j]
        try:
            res = mann_whitney_u(col[labels == 1], col[labels == 0])
        except EmptySampleError as exc:
            raise EmptySampleError(f"column {matrix.columns[j]}: {exc}") from None
        cells.append(SignificanceCell(algo, index, res.p, stars(res.p), res.u, res.n1, res.n2, res.method))
    return cells


def significant_fraction(cells: Sequence[SignificanceCell], alpha: float = 0.05) -> float:
    return sum(c.p < alpha for c in cells) / len(cells)


def significance_markdown(cells: Sequence[SignificanceCell], dataset: str = "synthetic", header: str = "") -> str:
    from .clustering.base import ALGORITHMS
    from .indices import INDEX_LABELS, INDEX_NAMES

    by_key = {(c.algorithm, c.index): c for c in cells}
    lines = []
    if header:
        lines += [header, ""]
    lines.append("| Algorithm | Dataset | " + " | ".join(INDEX_LABELS[i] for i in INDEX_NAMES) + " |")
    lines.append("|" + "---|" * (2 + len(INDEX_NAMES)))
    names = {"kmeans": "KMeans", "kmedoids": "KMedoids", "ac": "AC", "birch": "BIRCH",
             "dbscan": "DBSCAN", "optics": "OPTICS", "gmm": "GMM"}
    for algo in ALGORITHMS:
        row = [names[algo.value], dataset]
        for idx in INDEX_NAMES:
            cell = by_key.get((algo.value, idx))
            row.append(cell.stars if cell else "")
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    lines.append("`***`: p < 0.01, `**`: 0.01 <= p < 0.05, `*`: p >= 0.05")
    return "\n".join(lines) + "\n"


def significance_json(cells: Sequence[SignificanceCell], **extra) -> str:
    doc = dict(extra)
    doc["cells"] = [asdict(c) for c in cells]
    doc["significant_fraction"] = significant_fraction(cells) if cells else None
    return json.dumps(doc, indent=2, sort_keys=True)
