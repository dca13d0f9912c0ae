import numpy as np
import pytest

from vppdispatch.domain import TimeGrid
from vppdispatch.evaluate import wmape
from vppdispatch.forecast import (
    DivergenceError,
    ModelSpec,
    Normalization,
    OnlineData,
    TrainConfig,
    UpdateScheme,
    UpdateSchemeError,
    apply_update,
    estimate_variance,
    load_model,
    make_dataset,
    predict,
    save_model,
    train,
)
from vppdispatch.forecast.models import CELL_PARAMS


GRID = TimeGrid(0, 24 * 30)


def _linear_spec(target="load", K=24):
    return ModelSpec(kind="linear", target=target, lag_K=K, horizon=24)


def _recurrent_spec(target="load", hidden=8, horizon=24):
    return ModelSpec(kind="recurrent", target=target, lag_K=24, horizon=horizon, hidden_dim=hidden)


def _sinusoid(T=24 * 30, amp=3.0, base=5.0):
    t = np.arange(T)
    return base + amp * np.sin(2 * np.pi * t / 24)


class TestTrainLinear:
    def test_exactly_linear_data_fit_below_one_percent(self):
        rng = np.random.default_rng(0)
        series = _sinusoid() + 0.5 * np.cos(2 * np.pi * np.arange(24 * 30) / 168)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 24 * 20)
        model = train(spec, (X, y), TrainConfig(seed=0))
        preds = np.array([
            predict(model, series, GRID, t, 1)[0] for t in range(24 * 20, 24 * 25)
        ])
        acts = series[24 * 20 : 24 * 25]
        assert wmape(acts, preds) < 0.01

    def test_constant_series_prediction(self):
        series = np.full(24 * 10, 7.5)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 24 * 8)
        model = train(spec, (X, y), TrainConfig(seed=0))
        out = predict(model, series, GRID, 24 * 8, 24)
        assert np.all(np.abs(out - 7.5) < 1e-6)

    def test_constant_feature_gets_unit_scale(self):
        X = np.ones((10, 3))
        y = np.arange(10.0)
        norm = Normalization.fit(X, y)
        assert np.all(norm.feat_scale == 1.0)
        model = train(_linear_spec(K=3), (X, y), TrainConfig(seed=0))
        assert model.norm.feat_scale.tolist() == [1.0, 1.0, 1.0]


class TestTrainRecurrent:
    def test_sinusoid_benchmark_under_ten_percent(self):
        series = _sinusoid()
        spec = _recurrent_spec(hidden=16)
        X, Y = make_dataset(spec, series, GRID, 0, 24 * 20)
        model = train(spec, (X, Y), TrainConfig(epochs=150, learning_rate=0.15, batch_size=64, seed=0))
        preds, acts = [], []
        for t in range(24 * 20, 24 * 28, 12):
            preds.append(predict(model, series, GRID, t, 24))
            acts.append(series[t : t + 24])
        assert wmape(np.concatenate(acts), np.concatenate(preds)) < 0.10

    def test_loss_not_worse_than_initial(self):
        series = _sinusoid()
        spec = _recurrent_spec()
        X, Y = make_dataset(spec, series, GRID, 0, 24 * 10)
        model = train(spec, (X, Y), TrainConfig(epochs=30, learning_rate=0.1, batch_size=32, seed=3))
        assert model.train_losses[-1] <= model.train_losses[0]

    def test_seed_determinism_is_bitwise(self):
        series = _sinusoid() + np.random.default_rng(5).normal(0, 0.3, 24 * 30)
        spec = _recurrent_spec()
        X, Y = make_dataset(spec, series, GRID, 0, 24 * 10)
        hyper = TrainConfig(epochs=10, learning_rate=0.1, batch_size=16, seed=11)
        m1 = train(spec, (X, Y), hyper)
        m2 = train(spec, (X, Y), hyper)
        for name in m1.net.params:
            assert np.array_equal(m1.net.params[name], m2.net.params[name])

    def test_divergent_learning_rate_reports_epoch(self):
        series = _sinusoid()
        spec = _recurrent_spec()
        X, Y = make_dataset(spec, series, GRID, 0, 24 * 10)
        with pytest.raises(DivergenceError):
            train(spec, (X, Y), TrainConfig(epochs=200, learning_rate=1e4, batch_size=32, seed=0))

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train(_recurrent_spec(), (np.zeros((0, 24, 7)), np.zeros((0, 24))), TrainConfig())


class TestPredict:
    def test_solar_floored_at_zero(self):
        series = np.full(24 * 10, 0.05)
        spec = ModelSpec(kind="linear", target="solar_capacity", lag_K=24, horizon=24)
        X, y = make_dataset(spec, series, GRID, 0, 24 * 8)
        model = train(spec, (X, y), TrainConfig(seed=0))
        model.correction = (1.0, -1.0)  # push raw output negative
        out = predict(model, series, GRID, 24 * 8, 24)
        assert np.all(out == 0.0)

    def test_horizon_one_matches_head_of_longer_forecast(self):
        series = _sinusoid()
        spec = _recurrent_spec(hidden=8)
        X, Y = make_dataset(spec, series, GRID, 0, 24 * 10)
        model = train(spec, (X, Y), TrainConfig(epochs=20, learning_rate=0.1, batch_size=32, seed=0))
        one = predict(model, series, GRID, 24 * 10, 1)
        full = predict(model, series, GRID, 24 * 10, 24)
        assert one.shape == (1,)
        assert one[0] == full[0]


class TestEstimateVariance:
    def test_perfect_predictions_zero_sigma(self):
        series = np.full(24 * 10, 4.0)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 24 * 6)
        model = train(spec, (X, y), TrainConfig(seed=0))
        est = estimate_variance(model, series, GRID, 24 * 6, 24 * 10)
        assert np.all(est.sigma < 1e-6)

    def test_alternating_unit_residuals(self):
        # piecewise-constant series the linear model fits exactly, then
        # perturbed actuals alternate +1/-1 around the prediction
        series = np.full(24 * 12, 4.0)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 24 * 6)
        model = train(spec, (X, y), TrainConfig(seed=0))
        noisy = series.copy()
        idx = np.arange(24 * 6, 24 * 12)
        noisy[idx] += np.where(idx % 2 == 0, 1.0, -1.0)
        est = estimate_variance(model, noisy, GRID, 24 * 6, 24 * 12)
        # residual at each horizon offset alternates +-1 across windows
        assert np.all(np.abs(est.sigma - 1.0) < 0.35)

    def test_growing_noise_gives_nondecreasing_sigma(self):
        rng = np.random.default_rng(0)
        T = 24 * 16
        base = np.full(T, 10.0)
        spec = _linear_spec()
        X, y = make_dataset(spec, base, GRID, 0, 24 * 8)
        model = train(spec, (X, y), TrainConfig(seed=0))
        # noise grows with time so longer horizons see more spread
        drifty = base + rng.normal(0, 0.02, T) * np.arange(T)
        est = estimate_variance(model, drifty, GRID, 24 * 8, T)
        smooth = np.convolve(est.sigma, np.ones(6) / 6, mode="valid")
        assert smooth[-1] > smooth[0]

    def test_too_few_windows_rejected(self):
        series = np.full(24 * 3, 4.0)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 48)
        model = train(spec, (X, y), TrainConfig(seed=0))
        with pytest.raises(ValueError, match="windows"):
            estimate_variance(model, series, GRID, 48, 72)


def _trained_recurrent(series, seed=0, epochs=25):
    spec = _recurrent_spec(hidden=8)
    X, Y = make_dataset(spec, series, GRID, 0, 24 * 10)
    return train(spec, (X, Y), TrainConfig(epochs=epochs, learning_rate=0.1, batch_size=32, seed=seed))


class TestApplyUpdate:
    def setup_method(self):
        self.series = _sinusoid(24 * 20)
        self.model = _trained_recurrent(self.series)
        self.online = OnlineData(
            history=self.series, calendar=GRID, now=24 * 16,
            predicted=self.series[24 * 12 : 24 * 16], actual=self.series[24 * 12 : 24 * 16],
        )
        self.hyper = TrainConfig(epochs=3, learning_rate=0.05, batch_size=32, seed=5)

    def test_noft_returns_parameters_bitwise_unchanged(self):
        before = {k: v.copy() for k, v in self.model.net.params.items()}
        out = apply_update(self.model, UpdateScheme("noft"), self.online, self.hyper)
        for name, arr in out.net.params.items():
            assert np.array_equal(arr, before[name])

    def test_selfadapt_identity_when_predictions_perfect(self):
        out = apply_update(
            self.model, UpdateScheme("selfadapt", correction_window=48), self.online, self.hyper
        )
        a, b = out.correction
        assert abs(a - 1.0) < 1e-8 and abs(b) < 1e-8

    def test_selfadapt_recovers_doubling(self):
        online = OnlineData(
            history=self.series, calendar=GRID, now=24 * 16,
            predicted=self.series[24 * 12 : 24 * 16],
            actual=2.0 * self.series[24 * 12 : 24 * 16],
        )
        out = apply_update(self.model, UpdateScheme("selfadapt", correction_window=48), online, self.hyper)
        a, b = out.correction
        assert abs(a - 2.0) < 1e-6 and abs(b) < 1e-6

    def test_selfadapt_window_exceeding_data_rejected(self):
        online = OnlineData(
            history=self.series, calendar=GRID, now=24 * 16,
            predicted=np.ones(10), actual=np.ones(10),
        )
        with pytest.raises(UpdateSchemeError, match="window"):
            apply_update(self.model, UpdateScheme("selfadapt", correction_window=72), online, self.hyper)

    def test_freeze_keeps_cell_parameters_bitwise(self):
        before = {k: v.copy() for k, v in self.model.net.params.items()}
        out = apply_update(self.model, UpdateScheme("freeze"), self.online, self.hyper)
        for name in CELL_PARAMS:
            assert np.array_equal(out.net.params[name], before[name])
        assert not np.array_equal(out.net.params["Wo"], before["Wo"])

    def test_smalllr_moves_all_parameters(self):
        out = apply_update(self.model, UpdateScheme("smalllr"), self.online, self.hyper)
        changed = [
            name for name in out.net.params
            if not np.array_equal(out.net.params[name], self.model.net.params[name])
        ]
        assert "Wz" in changed and "Wo" in changed

    def test_gradient_scheme_rejected_for_linear_model(self):
        spec = _linear_spec()
        X, y = make_dataset(spec, self.series, GRID, 0, 24 * 10)
        linear = train(spec, (X, y), TrainConfig(seed=0))
        with pytest.raises(UpdateSchemeError):
            apply_update(linear, UpdateScheme("smalllr"), self.online, self.hyper)

    def test_scratch_retrains_from_fresh_state(self):
        out = apply_update(self.model, UpdateScheme("scratch"), self.online, self.hyper)
        assert out.net is not self.model.net
        assert out.train_losses[-1] <= out.train_losses[0]


class TestNormalizationRoundTrip:
    def test_round_trip_within_tolerance(self):
        rng = np.random.default_rng(0)
        X = rng.normal(3.0, 2.0, size=(50, 7))
        y = rng.normal(-1.0, 4.0, size=50)
        norm = Normalization.fit(X, y)
        assert np.all(np.abs(norm.denorm_y(norm.norm_y(y)) - y) < 1e-12)
        back = norm.norm_x(X) * norm.feat_scale + norm.feat_mean
        assert np.all(np.abs(back - X) < 1e-12)


class TestCheckpoints:
    def test_recurrent_round_trip(self, tmp_path):
        model = _trained_recurrent(_sinusoid(24 * 20), epochs=5)
        model.correction = (1.25, -0.5)
        path = tmp_path / "model.fcst"
        save_model(model, str(path))
        back = load_model(str(path))
        assert back.spec == model.spec
        assert back.correction == model.correction
        for name, arr in model.net.params.items():
            assert np.array_equal(back.net.params[name], arr)
        series = _sinusoid(24 * 20)
        assert np.array_equal(
            predict(model, series, GRID, 24 * 12, 24), predict(back, series, GRID, 24 * 12, 24)
        )

    def test_linear_round_trip(self, tmp_path):
        series = _sinusoid(24 * 20)
        spec = _linear_spec()
        X, y = make_dataset(spec, series, GRID, 0, 24 * 10)
        model = train(spec, (X, y), TrainConfig(seed=0))
        path = tmp_path / "linear.fcst"
        save_model(model, str(path))
        back = load_model(str(path))
        assert np.array_equal(back.linear.coef, model.linear.coef)
        assert back.linear.intercept == model.linear.intercept

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.fcst"
        path.write_bytes(b"NOTAMODELxxxx")
        with pytest.raises(ValueError, match="checkpoint"):
            load_model(str(path))
