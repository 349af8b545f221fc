from __future__ import annotations

import numpy as np

from ._base import ModelError


def roc_auc(scores, labels) -> float:
    """Rank-based AUC; tied scores share midranks, so ties count one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(int)
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ModelError("AUC needs both classes")
    uniq, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    mid = upper - (counts - 1) / 2.0  # midrank of each distinct score
    ranks = mid[inverse]
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion(pred, labels):
    pred = np.asarray(pred).astype(int)
    y = np.asarray(labels).astype(int)
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    tn = int(np.sum((pred == 0) & (y == 0)))
    return tp, fp, fn, tn


def _div(a, b):
    return a / b if b else 0.0


def compute_metrics(predictions, scores, labels) -> dict:
    """Accuracy, macro precision/recall/F1 over both classes, and AUC."""
    tp, fp, fn, tn = confusion(predictions, labels)
    n = tp + fp + fn + tn
    # per class: positive class uses (tp, fp, fn); negative class mirrors it
    prec = (_div(tp, tp + fp), _div(tn, tn + fn))
    rec = (_div(tp, tp + fn), _div(tn, tn + fp))
    f1 = tuple(_div(2 * p * r, p + r) for p, r in zip(prec, rec))
    return {
        "accuracy": (tp + tn) / n,
        "precision": sum(prec) / 2,
        "recall": sum(rec) / 2,
        "f1": sum(f1) / 2,
        "auc": roc_auc(scores, labels),
    }
