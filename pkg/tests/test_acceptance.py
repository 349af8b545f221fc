"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""
import copy
import itertools
import json
import math
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from oracles import INDEX_ORACLES, dbscan as dbscan_oracle, hull_vertices, ward_cut, ward_merges

from gazeclust.cli import VOLATILE, PipelineConfig, cmd_all, write_manifest
from gazeclust.clustering import agglomerative, dbscan, gmm, kmeans, same_partition
from gazeclust.clustering.hierarchical import ward
from gazeclust.gaze_io import SynthConfig, generate_synthetic
from gazeclust.indices import INDEX_FUNCTIONS, INDEX_NAMES, compute_all
from gazeclust.models import FAMILIES, ModelSpec, cross_validate, reports_markdown, roc_auc, train
from gazeclust.models.mlp import init_params, loss_and_grad
from gazeclust.features import Standardizer
from gazeclust.models.evaluation import SCALED
from gazeclust.pipeline import cluster_trials, features_from_results, prepare
from gazeclust.stats import mann_whitney_u, significance_table, significant_fraction, stars, u_statistic
from gazeclust.viz import build_scene, convex_hull, polygon_area, render_overlay

pytestmark = pytest.mark.slow


@pytest.fixture
def gate(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report


@pytest.fixture(scope="session")
def cohort():
    """20+20 subjects, 10 stimuli; ASD dispersion 2x and noise fraction +0.2 over TD."""
    cfg = SynthConfig()
    assert cfg.dispersion_asd == 2 * cfg.dispersion_td
    assert math.isclose(cfg.noise_fraction_asd, cfg.noise_fraction_td + 0.2)
    t0 = time.perf_counter()
    usable, _ = prepare(generate_synthetic(cfg))
    results = cluster_trials(usable, {}, seed=0, jobs=1)
    matrix = features_from_results(usable, results)
    return matrix, time.perf_counter() - t0


def test_criterion_01_index_oracles(gate):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 41))
        k = int(rng.integers(2, 6))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        rng.shuffle(labels)
        pts = rng.normal(size=(n, 2)) * rng.uniform(1, 50) + rng.normal(size=(k, 2))[labels] * 30
        for name in INDEX_NAMES:
            got = INDEX_FUNCTIONS[name](pts, labels)
            want = INDEX_ORACLES[name](pts.tolist(), labels.tolist())
            if (got is None) != (want is None):
                worst = math.inf
            elif got is not None:
                worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    v = compute_all(np.array([[0.0, 0], [0, 1], [10, 0], [10, 1]]), [0, 0, 1, 1])
    d1 = {"sc": 0.90025, "ch": 200, "db": 0.1, "db_star": 0.1, "di": 10, "csl": 0.1,
          "gd33": 10.0249, "pbm": 2525.0, "str": 10.0499}
    d1_ok = all(math.isclose(getattr(v, k), want, rel_tol=1e-5) for k, want in d1.items())
    elapsed = time.perf_counter() - t0
    gate(1, worst < 1e-9 and d1_ok and elapsed < 10,
         f"max rel err {worst:.2e}, D1 values {'match' if d1_ok else 'differ'}, {elapsed:.1f}s")


def test_criterion_02_clustering_oracles(gate):
    t0 = time.perf_counter()
    db_ok = True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 100, size=(int(rng.integers(20, 150)), 2))
        eps, m = float(rng.uniform(3, 15)), int(rng.integers(2, 10))
        db_ok &= dbscan(pts, eps, m).labels.tolist() == dbscan_oracle(pts.tolist(), eps, m).tolist()
    ward_ok = True
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        pts = rng.uniform(0, 10, size=(int(rng.integers(3, 9)), 2))
        _, merges = ward(pts)
        ward_ok &= np.allclose([mg.height for mg in merges], ward_merges(pts)[0], rtol=1e-9)
        ward_ok &= all(same_partition(agglomerative(pts, k).labels, ward_cut(pts, k)) for k in range(2, len(pts) + 1))
    mono_ok = True
    for seed in range(50):
        pts = np.random.default_rng(seed).normal(size=(60, 2)) * 10
        for k in (2, 3, 4, 5):
            tr = kmeans(pts, k, seed=seed).trace
            mono_ok &= all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(tr, tr[1:]))
            tr = gmm(pts, k, seed=seed).trace
            mono_ok &= all(b >= a - 1e-8 for a, b in zip(tr, tr[1:]))
    elapsed = time.perf_counter() - t0
    gate(2, db_ok and ward_ok and mono_ok and elapsed < 60,
         f"dbscan {db_ok}, ward {ward_ok}, kmeans/gmm monotone {mono_ok}, {elapsed:.1f}s")


def test_criterion_03_mann_whitney(gate):
    worst, where = 0.0, None
    for n in range(2, 13):
        for n1 in range(1, n):
            for pick in itertools.combinations(range(n), n1):
                a = list(pick)
                b = [i for i in range(n) if i not in pick]
                gap = abs(mann_whitney_u(a, b, "exact").p - mann_whitney_u(a, b, "normal_approx").p)
                if gap > worst:
                    worst, where = gap, (n1, n - n1)
    worked = mann_whitney_u([1, 2, 3], [4, 5, 6])
    worked_ok = worked.method == "exact" and math.isclose(worked.p, 0.1, rel_tol=1e-12)
    star_ok = (stars(0.005), stars(0.0099999), stars(0.01), stars(0.049), stars(0.05)) == ("***", "***", "**", "**", "*")
    gate(3, worst <= 0.03 and worked_ok and star_ok,
         f"max exact/normal gap {worst:.4f} at sizes {where} (tolerance 0.03), "
         f"[1,2,3]/[4,5,6] p={worked.p:.4f}, stars {'ok' if star_ok else 'wrong'}")


def test_criterion_04_auc_identity(gate):
    exact = True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 80))
        y = np.r_[[0, 1], rng.integers(0, 2, size=n - 2)]
        s = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
        pos, neg = s[y == 1], s[y == 0]
        exact &= roc_auc(s, y) == u_statistic(pos, neg) / (len(pos) * len(neg))
    example = roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    gate(4, exact and example == 0.75, f"identity exact on 100 sets: {exact}, example AUC {example}")


def test_criterion_05_mlp_gradient(gate):
    t0 = time.perf_counter()
    worst = 0.0
    eps = 1e-6
    for seed in range(20):
        rng = np.random.default_rng(seed)
        d = 63 if seed % 2 else int(rng.integers(2, 10))
        X = rng.normal(size=(int(rng.integers(3, 16)), d))
        y = rng.integers(0, 2, size=len(X)).astype(float)
        params = [p + rng.normal(scale=0.1, size=p.shape) for p in init_params((d, 128, 32, 1), rng)]
        _, grads = loss_and_grad(params, X, y)
        for p, g in zip(params, grads):
            flat = p.reshape(-1)
            picks = rng.choice(flat.size, min(flat.size, 100), replace=False)
            num = np.empty(len(picks))
            for j, i in enumerate(picks):
                old = flat[i]
                flat[i] = old + eps
                up = loss_and_grad(params, X, y)[0]
                flat[i] = old - eps
                down = loss_and_grad(params, X, y)[0]
                flat[i] = old
                num[j] = (up - down) / (2 * eps)
            ana = g.reshape(-1)[picks]
            worst = max(worst, np.linalg.norm(ana - num) / max(np.linalg.norm(ana) + np.linalg.norm(num), 1e-12))
    elapsed = time.perf_counter() - t0
    gate(5, worst < 1e-4 and elapsed < 30, f"max relative error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_06_synthetic_significance(gate, cohort):
    matrix, build_time = cohort
    t0 = time.perf_counter()
    frac = significant_fraction(significance_table(matrix))
    elapsed = build_time + time.perf_counter() - t0
    gate(6, frac >= 0.6 and elapsed < 300,
         f"{frac:.1%} of 63 columns at p < 0.05 (need 60%), {elapsed:.0f}s")


def test_criterion_07_synthetic_prediction(gate, cohort):
    matrix, build_time = cohort
    t0 = time.perf_counter()
    reports = [cross_validate(ModelSpec(f), matrix) for f in FAMILIES]
    elapsed = build_time + time.perf_counter() - t0
    md = reports_markdown(reports)
    rows = [l for l in md.splitlines() if l.startswith("| synthetic")]
    shape_ok = len(rows) == 7 and all(len(r.split("|")) == 10 for r in rows)
    best = {r.family.value: r.auc for r in reports}
    top = max(best[f] for f in ("RandomForest", "GradBoost", "MLP"))
    gate(7, top >= 0.9 and shape_ok and elapsed < 600,
         f"best RF/GB/MLP AUC {top:.3f}; " + ", ".join(f"{k} {v:.3f}" for k, v in best.items())
         + f"; {elapsed:.0f}s")


def test_criterion_08_inference_latency(gate, cohort):
    matrix, _ = cohort
    X, y = matrix.values, matrix.labels
    worst, who = 0.0, None
    for f in FAMILIES:
        spec = ModelSpec(f)
        std = Standardizer(scale=spec.family in SCALED).fit(X)
        model = train(spec, std.transform(X), y)
        one = X[:1]
        t0 = time.perf_counter()
        model.decision(std.transform(one))
        dt = time.perf_counter() - t0
        if dt > worst:
            worst, who = dt, f.value
    gate(8, worst < 0.1, f"slowest single-vector inference {worst * 1e3:.2f} ms ({who})")


def _inside(poly, p, tol=1e-9):
    return all((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -tol
               for a, b in zip(poly, np.roll(poly, -1, axis=0)))


def test_criterion_09_geometry(gate):
    ok = True
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 60))
        pts = rng.integers(-30, 30, size=(n, 2)).astype(float) if seed % 2 else rng.normal(size=(n, 2)) * 100
        h = convex_hull(pts)
        verts = set(map(tuple, h.tolist()))
        ok &= verts <= set(map(tuple, pts.tolist())) and verts == hull_vertices(pts)
        if len(h) >= 3:
            ok &= polygon_area(h) > 0 and all(_inside(h, p) for p in pts)
    rng = np.random.default_rng(0)
    pts = np.r_[rng.normal([200, 200], 20, (30, 2)), rng.normal([600, 400], 20, (20, 2)), [[10, 10]]]
    labels = np.r_[np.zeros(30, int), np.ones(20, int), [-1]]
    svgs = [render_overlay(build_scene(pts, labels, 800, 600, smooth=1, metadata={"seed": 0})) for _ in range(2)]
    det = svgs[0].encode() == svgs[1].encode()
    try:
        ET.fromstring(svgs[0])
        wf = True
    except ET.ParseError:
        wf = False
    gate(9, ok and det and wf, f"hull properties on 200 sets {ok}, byte-deterministic {det}, well-formed {wf}")


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "inference_time_per_sample"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def test_criterion_10_determinism(gate, tmp_path):
    base = {
        "synthetic": {"n_subjects_per_group": 3, "n_stimuli": 2, "points_per_trial": 60},
        "seed": 11,
        "n_runs": 2,
        "models": ["LR", "SVM", "KNN", "DecisionTree", {"family": "RandomForest", "params": {"n_trees": 10}},
                   {"family": "GradBoost", "params": {"n_rounds": 10}}, {"family": "MLP", "params": {"epochs": 5}}],
    }
    manifests, models = [], []
    for run in ("a", "b"):
        cfg = PipelineConfig.from_dict(copy.deepcopy(base) | {"out": str(tmp_path / run), "jobs": 1})
        cmd_all(cfg)
        write_manifest(cfg)
        manifests.append(json.loads((tmp_path / run / "manifest.json").read_text()))
        models.append(_strip_timing(json.loads((tmp_path / run / "models.json").read_text())))
    stable = [{e["path"]: e["sha256"] for e in m["files"] if e["path"] not in VOLATILE} for m in manifests]
    same = stable[0] == stable[1] and models[0] == models[1]
    gate(10, same and len(stable[0]) > 0,
         f"{len(stable[0])} non-volatile artifacts identical {stable[0] == stable[1]}, "
         f"models.json modulo timing identical {models[0] == models[1]}")
