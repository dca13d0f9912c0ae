import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vppdispatch.domain import TimeGrid
from vppdispatch.forecast import (
    InsufficientHistoryError,
    build_features,
    calendar_encoding,
    recurrent_sequence,
    window_dataset_linear,
    window_dataset_recurrent,
)


def test_hour_zero_encoding():
    grid = TimeGrid(0, 48)
    fv = build_features(np.ones(30), grid, t=24, K=3)
    # step 24 is hour 0: sin 0, cos 1
    assert fv.time_features[0] == pytest.approx(0.0, abs=1e-12)
    assert fv.time_features[1] == pytest.approx(1.0)


def test_hour_six_is_quarter_cycle():
    grid = TimeGrid(0, 48)
    fv = build_features(np.ones(30), grid, t=6, K=3)
    assert fv.time_features[0] == pytest.approx(1.0)
    assert fv.time_features[1] == pytest.approx(0.0, abs=1e-12)


def test_constant_history_lags():
    grid = TimeGrid(0, 48)
    fv = build_features(np.full(20, 5.0), grid, t=10, K=3)
    assert np.array_equal(fv.lag_features, [5.0, 5.0, 5.0])


def test_lags_are_the_values_immediately_before_t():
    grid = TimeGrid(0, 48)
    history = np.arange(20.0)
    fv = build_features(history, grid, t=10, K=4)
    assert np.array_equal(fv.lag_features, [6.0, 7.0, 8.0, 9.0])


def test_insufficient_history_names_requirement():
    grid = TimeGrid(0, 48)
    with pytest.raises(InsufficientHistoryError, match="need 5"):
        build_features(np.ones(10), grid, t=3, K=5)


@settings(max_examples=40, deadline=None)
@given(t=st.integers(min_value=0, max_value=2000), start=st.integers(min_value=0, max_value=500))
def test_cyclic_encodings_bounded(t, start):
    enc = calendar_encoding(TimeGrid(start, 3000), t)
    assert enc.shape == (6,)
    assert np.all(enc >= -1.0) and np.all(enc <= 1.0)


def test_recurrent_sequence_shape_and_content():
    grid = TimeGrid(0, 48)
    history = np.arange(30.0)
    seq = recurrent_sequence(history, grid, t=10, K=4)
    assert seq.shape == (4, 7)
    # value column holds the observations before each step
    assert np.array_equal(seq[:, 0], [6.0, 7.0, 8.0, 9.0])


def test_window_datasets_align():
    grid = TimeGrid(0, 72)
    history = np.sin(np.arange(72.0))
    X, y = window_dataset_linear(history, grid, K=4, t_start=0, t_end=40)
    assert X.shape == (36, 10) and y.shape == (36,)
    assert y[0] == history[4]
    Xr, Yr = window_dataset_recurrent(history, grid, K=4, horizon=6, t_start=0, t_end=40)
    assert Xr.shape == (31, 4, 7) and Yr.shape == (31, 6)
    assert np.array_equal(Yr[0], history[4:10])
