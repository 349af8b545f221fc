import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import silhouette as sc_oracle

from conftest import blobs
from gazeclust.clustering import Algorithm, ClusterAssignment, kmeans, same_partition
from gazeclust.selection import (
    DEFAULT_K,
    GridSpec,
    SelectionResult,
    admissible,
    default_grid,
    grid_search,
    select_all,
)


def test_two_blobs_pick_k2(rng):
    pts, truth = blobs(rng, [[0, 0], [80, 0]], 30, 3.0)
    res = grid_search(pts, GridSpec("kmeans", k=[2, 3, 4, 5]))
    assert res.best.k == 2 and not res.degenerate
    scores = [sc_oracle(pts.tolist(), kmeans(pts, k).labels.tolist()) for k in (2, 3, 4, 5)]
    assert res.best_sc == pytest.approx(max(scores), rel=1e-9)
    assert int(np.argmax(scores)) == 0
    assert same_partition(res.best.labels, truth)


def test_dbscan_single_cluster_grid_is_degenerate(rng):
    pts = rng.normal(size=(40, 2))
    res = grid_search(pts, GridSpec("dbscan", eps=[50.0, 100.0], min_pts=[4]))
    assert res.degenerate and res.best is None and res.best_sc is None
    assert res.n_candidates_evaluated == 2


def test_single_candidate(rng):
    pts, _ = blobs(rng, [[0, 0], [50, 50], [0, 50]], 15, 2.0)
    res = grid_search(pts, GridSpec("ac", k=[3]))
    assert res.best.k == 3
    assert res.best_sc == pytest.approx(sc_oracle(pts.tolist(), res.best.labels.tolist()), rel=1e-9)


def test_empty_grid():
    with pytest.raises(ValueError, match="empty grid"):
        grid_search(np.zeros((12, 2)), GridSpec("kmeans", k=[]))


def test_invalid_grid_values():
    with pytest.raises(ValueError):
        GridSpec("kmeans", k=[1, 2])
    with pytest.raises(ValueError):
        GridSpec("optics", min_pts=[4], xi=[1.2])


def test_noise_rule():
    assert admissible(ClusterAssignment([0, 0, 1, 1, -1, -1], "dbscan"))
    assert not admissible(ClusterAssignment([0, 1, -1, -1, -1], "dbscan"))
    assert not admissible(ClusterAssignment([0, 0, 0, -1], "dbscan"))


def test_noise_excluded_from_score(rng):
    pts = np.concatenate([rng.normal(size=(20, 2)), rng.normal(size=(20, 2)) + 30, [[15, 15], [100, 100]]])
    res = grid_search(pts, GridSpec("dbscan", eps=[3.0], min_pts=[4]))
    keep = res.best.labels != -1
    assert res.best.n_noise == 2
    assert res.best_sc == pytest.approx(sc_oracle(pts[keep].tolist(), res.best.labels[keep].tolist()), rel=1e-9)


def test_ties_go_to_earlier_candidate(rng):
    pts, _ = blobs(rng, [[0, 0], [60, 0]], 20, 2.0)
    # two eps values far apart that give the same 2-cluster partition
    res = grid_search(pts, GridSpec("dbscan", eps=[10.0, 20.0], min_pts=[4]))
    assert res.best.params["eps"] == 10.0


def test_birch_too_few_subclusters_is_skipped(rng):
    pts, _ = blobs(rng, [[0, 0], [60, 0]], 20, 2.0)
    res = grid_search(pts, GridSpec("birch", threshold=[1e6, 5.0], k=[2]))
    assert res.best.params["threshold"] == 5.0


def test_default_grids(rng):
    pts = rng.uniform(0, 500, size=(60, 2))
    for algo in Algorithm:
        g = default_grid(algo, pts)
        assert g.candidates()
    assert default_grid("kmeans", pts).k == list(DEFAULT_K) == list(range(2, 11))
    d = default_grid("dbscan", pts)
    assert len(d.eps) == 9 and d.min_pts == [4, 8, 12] and d.eps == sorted(d.eps)
    b = default_grid("birch", pts)
    assert len(b.threshold) == 3
    o = default_grid("optics", pts)
    assert o.xi == [0.02, 0.05, 0.1]


@given(st.integers(0, 10_000))
def test_best_dominates_every_admissible_candidate(seed):
    rng = np.random.default_rng(seed)
    pts, _ = blobs(rng, rng.uniform(0, 100, size=(3, 2)), 12, 4.0)
    spec = GridSpec("dbscan", eps=[2.0, 4.0, 6.0, 9.0], min_pts=[3, 5])
    res = grid_search(pts, spec)
    from gazeclust.clustering import dbscan

    for c in spec.candidates():
        a = dbscan(pts, **c)
        if admissible(a):
            keep = a.labels != -1
            assert res.best_sc >= sc_oracle(pts[keep].tolist(), a.labels[keep].tolist()) - 1e-12


@given(st.integers(0, 10_000), st.permutations([2, 3, 4, 5, 6]))
def test_grid_order_irrelevant_without_ties(seed, order):
    rng = np.random.default_rng(seed)
    pts, _ = blobs(rng, rng.uniform(0, 100, size=(3, 2)), 12, 6.0)
    a = grid_search(pts, GridSpec("ac", k=[2, 3, 4, 5, 6]))
    b = grid_search(pts, GridSpec("ac", k=list(order)))
    assert a.best.k == b.best.k and a.best_sc == b.best_sc


def test_selection_result_roundtrip(rng):
    pts, _ = blobs(rng, [[0, 0], [80, 0]], 15, 3.0)
    res = grid_search(pts, GridSpec("kmeans", k=[2, 3]))
    back = SelectionResult.from_dict(res.to_dict())
    assert back.to_dict() == res.to_dict()


def test_select_all_covers_roster(rng):
    pts, _ = blobs(rng, [[100, 100], [300, 120], [200, 300]], 20, 10.0)
    out = select_all(pts, seed=0)
    assert set(out) == set(Algorithm)
    assert all(not r.degenerate for r in out.values())
