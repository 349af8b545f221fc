import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazeclust.clustering import ALGORITHMS, Algorithm
from gazeclust.features import (
    COLUMNS,
    FeatureMatrix,
    Standardizer,
    algorithm_columns,
    build_feature_matrix,
    load_feature_matrix,
    save_feature_matrix,
)
from gazeclust.gaze_io import Group, Trial
from gazeclust.indices import IndexVector
from gazeclust.selection import SelectionResult


def _trials(n):
    return [Trial(f"s{i}", Group.ASD if i % 2 else Group.TD, "m", 10, 10) for i in range(n)]


def _inputs(trials, degenerate=()):
    sel, vec = {}, {}
    for t, tr in enumerate(trials):
        for a, algo in enumerate(ALGORITHMS):
            bad = (tr.key, algo) in degenerate
            sel[(tr.key, algo)] = SelectionResult(None, None, 1, bad, algo)
            vec[(tr.key, algo)] = IndexVector() if bad else IndexVector(*[t * 100 + a * 10 + i for i in range(9)])
    return sel, vec


def test_shape_and_order():
    trials = _trials(5)
    m = build_feature_matrix(trials, *_inputs(trials))
    assert m.values.shape == (5, 63)
    assert COLUMNS[0] == "kmeans_sc" and m.columns[-1] == "gmm_str"
    assert m.labels.tolist() == [0, 1, 0, 1, 0]
    # IndexVector positional order differs from column order; columns follow INDEX_NAMES
    v = IndexVector(*range(9))
    assert m.values[0, :9].tolist() == [float(x) for x in v.as_tuple()]


def test_degenerate_propagates_missing():
    trials = _trials(3)
    m = build_feature_matrix(trials, *_inputs(trials, {(trials[1].key, Algorithm.DBSCAN)}))
    cols = algorithm_columns("dbscan")
    assert np.isnan(m.values[1, cols]).all()
    assert np.isnan(m.values).sum() == 9


def test_missing_pair_named():
    trials = _trials(2)
    sel, vec = _inputs(trials)
    del vec[(trials[1].key, Algorithm.GMM)]
    with pytest.raises(KeyError, match="gmm"):
        build_feature_matrix(trials, sel, vec)


def test_order_independent_up_to_keys():
    trials = _trials(6)
    inputs = _inputs(trials)
    a = build_feature_matrix(trials, *inputs).sorted()
    b = build_feature_matrix(trials[::-1], *inputs).sorted()
    assert a.keys == b.keys and np.array_equal(a.values, b.values) and np.array_equal(a.labels, b.labels)


def test_csv_roundtrip(tmp_path):
    trials = _trials(4)
    m = build_feature_matrix(trials, *_inputs(trials, {(trials[0].key, Algorithm.OPTICS)}))
    save_feature_matrix(m, tmp_path / "f.csv")
    back = load_feature_matrix(tmp_path / "f.csv")
    assert back.keys == m.keys and back.columns == m.columns
    assert np.array_equal(back.values, m.values, equal_nan=True)
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header.startswith("subject_id,stimulus_id,label,kmeans_sc,")


def test_column_pairs_split_on_first_underscore():
    m = FeatureMatrix(np.zeros((0, 63)), [], [])
    assert ("dbscan", "db_star") in m.column_pairs


def test_standardizer_examples():
    s = Standardizer().fit(np.array([[1.0], [2.0], [3.0]]))
    out = s.transform(np.array([[1.0], [2.0], [3.0]]))
    assert out.mean() == pytest.approx(0) and out.std() == pytest.approx(1)
    const = Standardizer().fit_transform(np.full((4, 1), 7.0))
    assert np.all(const == 0)


def test_standardizer_imputes_with_training_median():
    train = np.array([[1.0], [2.0], [10.0]])
    s = Standardizer(scale=False).fit(train)
    assert s.transform(np.array([[np.nan], [np.nan]])).ravel().tolist() == [2.0, 2.0]


@given(st.integers(0, 10_000))
def test_standardizer_no_leakage(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 5))
    X[rng.random(X.shape) < 0.1] = np.nan
    train, test = X[:20], X[20:]
    a = Standardizer().fit(train)
    tampered = test * 1000 + 5
    b = Standardizer().fit(train)
    b.transform(tampered)
    assert np.array_equal(a.median, b.median) and np.array_equal(a.mean, b.mean) and np.array_equal(a.std, b.std)
    out = a.transform(train)
    assert np.allclose(out.mean(axis=0), 0) and np.all(np.isfinite(a.transform(tampered)))
