import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazeclust.gaze_io import (
    CSV_COLUMNS,
    DataError,
    GazePoint,
    Group,
    SynthConfig,
    Trial,
    filter_valid,
    generate_synthetic,
    hotspot_centers,
    load_trials,
    save_trials,
)

HEADER = ",".join(CSV_COLUMNS)


def write(tmp_path, rows, header=HEADER):
    p = tmp_path / "gaze.csv"
    p.write_text("\n".join([header, *rows]) + "\n")
    return p


def test_single_trial(tmp_path):
    rows = [f"s1,ASD,img1,100,100,{t},{t + 1},{t + 2},1" for t in range(4)]
    (tr,) = load_trials(write(tmp_path, rows))
    assert tr.key == ("s1", "img1")
    assert tr.group is Group.ASD
    assert tr.n_points == 4
    assert np.array_equal(tr.x, [1, 2, 3, 4])


def test_trial_cardinality(tmp_path):
    rows = [f"s{s},TD,img{m},100,100,0,5,5,1" for s in range(2) for m in range(3)]
    assert len(load_trials(write(tmp_path, rows))) == 6


def test_unknown_group(tmp_path):
    with pytest.raises(DataError, match="unknown group"):
        load_trials(write(tmp_path, ["s1,XYZ,img1,100,100,0,1,1,1"]))


def test_malformed_row_names_row_and_column(tmp_path):
    rows = ["s1,TD,img1,100,100,0,1,1,1", "s1,TD,img1,100,100,1,abc,1,1"]
    with pytest.raises(DataError, match=r"row 3, column x_px"):
        load_trials(write(tmp_path, rows))


def test_duplicate_timestamp(tmp_path):
    rows = ["s1,TD,img1,100,100,0,1,1,1", "s1,TD,img1,100,100,0,2,2,1"]
    with pytest.raises(DataError, match="duplicate"):
        load_trials(write(tmp_path, rows))


def test_missing_column(tmp_path):
    with pytest.raises(DataError, match="missing columns"):
        load_trials(write(tmp_path, ["s1,TD"], header="subject_id,group"))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_trials(tmp_path / "nope.csv")


def test_schema_mapping(tmp_path):
    header = HEADER.replace("x_px", "gx").replace("y_px", "gy")
    (tr,) = load_trials(write(tmp_path, ["s1,TD,img1,100,100,0,3,4,1"], header), {"x_px": "gx", "y_px": "gy"})
    assert tr.xy.tolist() == [[3, 4]]


def test_filter_valid_example():
    pts = [GazePoint(0, 10, 10, True), GazePoint(1, -5, 10, True), GazePoint(2, 10, 10, False)]
    tr = Trial.from_points("s", "TD", "m", 100, 100, pts)
    assert filter_valid(tr).n_points == 1


def test_filter_valid_bounds_are_half_open():
    pts = [GazePoint(0, 0, 0, True), GazePoint(1, 100, 50, True), GazePoint(2, 99.9, 99.9, True)]
    tr = Trial.from_points("s", "TD", "m", 100, 100, pts)
    assert filter_valid(tr).xy.tolist() == [[0, 0], [99.9, 99.9]]


def test_filter_all_invalid():
    tr = Trial.from_points("s", "TD", "m", 10, 10, [GazePoint(0, 1, 1, False)])
    out = filter_valid(tr)
    assert out.n_points == 0 and out.degenerate


coords = st.one_of(st.floats(-20, 120), st.sampled_from([np.nan, np.inf, -np.inf]))
points = st.lists(st.tuples(coords, coords, st.booleans()), max_size=30)


@given(points)
def test_filter_idempotent(raw):
    tr = Trial.from_points("s", "TD", "m", 100, 100, [GazePoint(i, x, y, v) for i, (x, y, v) in enumerate(raw)])
    once = filter_valid(tr)
    assert filter_valid(once) == once
    assert np.all((once.x >= 0) & (once.x < 100) & (once.y >= 0) & (once.y < 100))


@given(
    st.lists(
        st.tuples(st.floats(0, 1e6, allow_nan=False), st.floats(-1e3, 1e3, allow_nan=False),
                  st.floats(-1e3, 1e3, allow_nan=False), st.booleans()),
        min_size=1, max_size=20, unique_by=lambda r: r[0],
    ),
    st.sampled_from(list(Group)),
)
def test_save_load_roundtrip(tmp_path_factory, raw, group):
    raw = sorted(raw)
    tr = Trial.from_points("subj", group, "stim", 640.5, 480, [GazePoint(*r) for r in raw])
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    save_trials([tr], path)
    assert load_trials(path) == [tr]


def test_synthetic_cardinality_and_determinism():
    cfg = SynthConfig(n_subjects_per_group=5, n_stimuli=4, points_per_trial=30, seed=3)
    a, b = generate_synthetic(cfg), generate_synthetic(cfg)
    assert len(a) == 40
    assert a == b
    assert sum(t.group is Group.ASD for t in a) == 20


def test_synthetic_byte_identical(tmp_path):
    cfg = SynthConfig(n_subjects_per_group=2, n_stimuli=2, points_per_trial=20, seed=1)
    save_trials(generate_synthetic(cfg), tmp_path / "a.csv")
    save_trials(generate_synthetic(cfg), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_synthetic_passes_filter():
    for tr in generate_synthetic(SynthConfig(n_subjects_per_group=3, n_stimuli=3, points_per_trial=50)):
        assert filter_valid(tr) == tr


def test_synthetic_points_near_hotspots():
    # Monte-Carlo against the Gaussian tail: each coordinate stays within 3 sigma with
    # probability 0.9973, so both do with probability 0.9946 >= 0.99
    sigma = 5.0
    cfg = SynthConfig(n_subjects_per_group=5, n_stimuli=3, dispersion_asd=sigma, dispersion_td=sigma,
                      noise_fraction_asd=0.0, noise_fraction_td=0.0, points_per_trial=200, seed=11)
    centers = hotspot_centers(cfg)
    inside = total = 0
    for tr in generate_synthetic(cfg):
        c = centers[int(tr.stimulus_id[4:])]
        d = np.min(np.abs(tr.xy[:, None, :] - c[None]).max(axis=2), axis=1)
        inside += int(np.sum(d <= 3 * sigma))
        total += len(d)
    assert inside / total >= 0.99


def test_synth_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(noise_fraction_asd=1.5)
    with pytest.raises(ValueError):
        SynthConfig(n_stimuli=0)


def test_trial_rejects_decreasing_time():
    with pytest.raises(ValueError):
        Trial("s", Group.TD, "m", 10, 10, [1.0, 0.0], [1, 1], [1, 1], [True, True])
