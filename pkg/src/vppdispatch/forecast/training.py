"""Training, inference, uncertainty estimation and online updating.

One ForecastModel predicts one target series (a building's load, the solar
capacity, or the market price) over a fixed horizon.  Linear models are fit
by least squares and predict recursively one step at a time; recurrent
models train by plain mini-batch gradient descent with a fixed learning
rate (deliberately no adaptive optimizer: it would only add nondeterminism
surface at this scale) and predict the whole horizon directly.

Five online update schemes are supported: no update, a self-adaptive
affine correction fitted to recent prediction errors, retraining from
scratch, continued training at a reduced learning rate, and continued
training with the recurrent cell frozen so only the readout adapts.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..domain import TimeGrid
from .features import (
    build_features,
    recurrent_sequence,
    window_dataset_linear,
    window_dataset_recurrent,
)
from .models import CELL_PARAMS, PARAM_NAMES, LinearAR, RecurrentNet

TARGETS = ("solar_capacity", "load", "price")
FLOORED_TARGETS = ("solar_capacity", "load")
SCHEME_KINDS = ("noft", "selfadapt", "scratch", "smalllr", "freeze")


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class UpdateSchemeError(ValueError):
    pass


@dataclass(frozen=True)
class Normalization:
    feat_mean: np.ndarray
    feat_scale: np.ndarray
    target_mean: float
    target_scale: float

    @staticmethod
    def fit(X: np.ndarray, y: np.ndarray) -> "Normalization":
        """Per-feature z-scoring stats; constant features get scale 1."""
        axes = tuple(range(X.ndim - 1))
        mean = X.mean(axis=axes)
        scale = X.std(axis=axes)
        scale = np.where(scale < 1e-12, 1.0, scale)
        t_scale = float(y.std())
        return Normalization(mean, scale, float(y.mean()), t_scale if t_scale >= 1e-12 else 1.0)

    def norm_x(self, X: np.ndarray) -> np.ndarray:
        return (X - self.feat_mean) / self.feat_scale

    def norm_y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.target_mean) / self.target_scale

    def denorm_y(self, y: np.ndarray) -> np.ndarray:
        return y * self.target_scale + self.target_mean


@dataclass(frozen=True)
class UncertaintyEstimate:
    """Per-horizon-step standard deviation of validation residuals."""

    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=np.float64))
        if np.any(self.sigma < 0):
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class UpdateScheme:
    kind: str = "noft"
    lr_multiplier: float = 0.1
    freeze_layers: tuple[str, ...] = ("cell",)
    correction_window: int = 72

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme {self.kind!r}, expected one of {SCHEME_KINDS}")
        if not (0 < self.lr_multiplier <= 1):
            raise ValueError("lr_multiplier must be in (0, 1]")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 150
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "linear" | "recurrent"
    target: str
    lag_K: int = 24
    horizon: int = 24
    hidden_dim: int = 32

    def __post_init__(self):
        if self.kind not in ("linear", "recurrent"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.lag_K < 1 or self.horizon < 1:
            raise ValueError("lag_K and horizon must be >= 1")


@dataclass
class ForecastModel:
    spec: ModelSpec
    norm: Normalization
    linear: LinearAR | None = None
    net: RecurrentNet | None = None
    correction: tuple[float, float] = (1.0, 0.0)  # prediction -> a*pred + b
    train_losses: list[float] = field(default_factory=list)

    def copy(self) -> "ForecastModel":
        return ForecastModel(
            spec=self.spec,
            norm=self.norm,
            linear=self.linear.copy() if self.linear is not None else None,
            net=self.net.copy() if self.net is not None else None,
            correction=self.correction,
            train_losses=list(self.train_losses),
        )


# ----------------------------------------------------------------------
# training
# ----------------------------------------------------------------------

def _gd_train(
    net: RecurrentNet,
    X: np.ndarray,
    Y: np.ndarray,
    hyper: TrainConfig,
    learning_rate: float,
    trainable: tuple[str, ...] = PARAM_NAMES,
) -> list[float]:
    """Mini-batch gradient descent on normalized data; returns loss per epoch
    (index 0 is the pre-update loss)."""
    rng = np.random.default_rng(hyper.seed)
    n = X.shape[0]
    batch = min(hyper.batch_size, n)
    losses = [net.loss_and_grads(X, Y)[0]]
    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            loss, grads = net.loss_and_grads(X[idx], Y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            for name in trainable:
                net.params[name] -= learning_rate * grads[name]
        losses.append(net.loss_and_grads(X, Y)[0])
        if not np.isfinite(losses[-1]):
            raise DivergenceError(epoch)
    return losses


def make_dataset(
    spec: ModelSpec, history: np.ndarray, calendar: TimeGrid, t_start: int, t_end: int
) -> tuple[np.ndarray, np.ndarray]:
    """Raw (unnormalized) training pairs for a model spec over a step range."""
    if spec.kind == "linear":
        return window_dataset_linear(history, calendar, spec.lag_K, t_start, t_end)
    return window_dataset_recurrent(history, calendar, spec.lag_K, spec.horizon, t_start, t_end)


def train(spec: ModelSpec, dataset: tuple[np.ndarray, np.ndarray], hyper: TrainConfig) -> ForecastModel:
    """Fit a model on (features, targets) pairs.

    Normalization statistics come from this dataset only.  Deterministic
    given ``hyper.seed``.
    """
    X, Y = dataset
    if X.shape[0] == 0:
        raise ValueError("dataset is empty")
    norm = Normalization.fit(X, Y)
    Xn, Yn = norm.norm_x(X), norm.norm_y(Y)
    if spec.kind == "linear":
        model = ForecastModel(spec=spec, norm=norm, linear=LinearAR.fit(Xn, Yn))
        resid = Xn @ model.linear.coef + model.linear.intercept - Yn
        model.train_losses = [float(np.mean(Yn * Yn)), float(np.mean(resid * resid))]
        return model
    net = RecurrentNet(input_dim=X.shape[2], hidden_dim=spec.hidden_dim, output_horizon=spec.horizon, seed=hyper.seed)
    losses = _gd_train(net, Xn, Yn, hyper, hyper.learning_rate)
    return ForecastModel(spec=spec, norm=norm, net=net, train_losses=losses)


# ----------------------------------------------------------------------
# inference
# ----------------------------------------------------------------------

def predict(model: ForecastModel, history: np.ndarray, calendar: TimeGrid, t: int, horizon_T: int) -> np.ndarray:
    """Point forecasts for steps [t, t+horizon_T) given history up to t.

    Applies the model's affine correction, then floors solar and load
    forecasts at zero.
    """
    spec = model.spec
    history = np.asarray(history, dtype=np.float64)
    if spec.kind == "linear":
        work = history[:t].copy()
        out = np.empty(horizon_T)
        for h in range(horizon_T):
            fv = build_features(work, calendar, t + h, spec.lag_K).concat()
            yn = model.linear.predict(model.norm.norm_x(fv))
            value = float(model.norm.denorm_y(np.array(yn)))
            out[h] = value
            work = np.append(work, value)  # recursive: feed the prediction back
    else:
        if horizon_T > spec.horizon:
            raise ValueError(f"model horizon {spec.horizon} cannot cover {horizon_T} steps")
        seq = recurrent_sequence(history, calendar, t, spec.lag_K)
        yn, _ = model.net.forward(model.norm.norm_x(seq)[None, :, :])
        out = np.asarray(model.norm.denorm_y(yn[0][:horizon_T]))

    a, b = model.correction
    out = a * out + b
    if spec.target in FLOORED_TARGETS:
        out = np.maximum(out, 0.0)
    return out


def estimate_variance(
    model: ForecastModel, history: np.ndarray, calendar: TimeGrid, t_start: int, t_end: int
) -> UncertaintyEstimate:
    """Empirical residual spread per horizon step over validation windows.

    Windows start at every step in [t_start, t_end - horizon]; at least two
    are required for the spread to be defined.
    """
    H = model.spec.horizon
    starts = range(max(t_start, model.spec.lag_K), t_end - H + 1)
    residuals = []
    for t in starts:
        pred = predict(model, history, calendar, t, H)
        residuals.append(np.asarray(history[t : t + H]) - pred)
    if len(residuals) < 2:
        raise ValueError(f"need at least 2 validation windows, got {len(residuals)}")
    R = np.stack(residuals)
    return UncertaintyEstimate(np.std(R, axis=0))


# ----------------------------------------------------------------------
# online updates
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OnlineData:
    """What an online update may look at: the realized series so far, the
    window of fresh observations, and the logged (predicted, actual) pairs."""

    history: np.ndarray
    calendar: TimeGrid
    now: int
    online_window: int = 336
    predicted: np.ndarray = field(default_factory=lambda: np.zeros(0))
    actual: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _fit_affine_correction(predicted: np.ndarray, actual: np.ndarray) -> tuple[float, float]:
    var = float(np.var(predicted))
    if var < 1e-12:
        a = 1.0
    else:
        a = float(np.cov(predicted, actual, ddof=0)[0, 1]) / var
    b = float(np.mean(actual) - a * np.mean(predicted))
    return a, b


def apply_update(
    model: ForecastModel, scheme: UpdateScheme, online: OnlineData, hyper: TrainConfig
) -> ForecastModel:
    """Produce the updated model for one fine-tuning event (the input model
    is never mutated)."""
    if scheme.kind == "noft":
        return model

    if scheme.kind == "selfadapt":
        w = scheme.correction_window
        if online.predicted.shape[0] < 2:
            raise UpdateSchemeError("selfadapt needs at least 2 (predicted, actual) pairs")
        if w > online.predicted.shape[0]:
            raise UpdateSchemeError(
                f"correction window {w} larger than available data {online.predicted.shape[0]}"
            )
        a, b = _fit_affine_correction(online.predicted[-w:], online.actual[-w:])
        a0, b0 = model.correction
        out = model.copy()
        out.correction = (a * a0, a * b0 + b)  # compose onto the existing correction
        return out

    if scheme.kind == "scratch":
        dataset = make_dataset(model.spec, online.history, online.calendar, 0, online.now)
        return train(model.spec, dataset, hyper)

    # gradient-based continual schemes
    if model.net is None:
        raise UpdateSchemeError(f"scheme {scheme.kind!r} requires a recurrent model")
    start = max(0, online.now - online.online_window)
    X, Y = make_dataset(model.spec, online.history, online.calendar, start, online.now)
    out = model.copy()
    Xn, Yn = out.norm.norm_x(X), out.norm.norm_y(Y)
    if scheme.kind == "smalllr":
        losses = _gd_train(out.net, Xn, Yn, hyper, hyper.learning_rate * scheme.lr_multiplier)
    else:  # freeze: only the readout moves
        trainable = tuple(n for n in PARAM_NAMES if n not in CELL_PARAMS)
        losses = _gd_train(out.net, Xn, Yn, hyper, hyper.learning_rate, trainable)
    out.train_losses = out.train_losses + losses[1:]
    return out


# ----------------------------------------------------------------------
# checkpoints
# ----------------------------------------------------------------------

_MAGIC = b"VPPFCST1"
_VERSION = 1


def _model_arrays(model: ForecastModel) -> dict[str, np.ndarray]:
    arrays = {
        "norm.feat_mean": model.norm.feat_mean,
        "norm.feat_scale": model.norm.feat_scale,
        "norm.target": np.array([model.norm.target_mean, model.norm.target_scale]),
        "correction": np.array(model.correction),
    }
    if model.linear is not None:
        arrays["linear.coef"] = model.linear.coef
        arrays["linear.intercept"] = np.array([model.linear.intercept])
    if model.net is not None:
        for name in PARAM_NAMES:
            arrays[f"net.{name}"] = model.net.params[name]
    return arrays


def save_model(model: ForecastModel, path: str) -> None:
    """Checkpoint layout: magic, version, JSON header with the shape table,
    then raw float64 arrays row-major in header order."""
    arrays = _model_arrays(model)
    header = {
        "kind": model.spec.kind,
        "target": model.spec.target,
        "lag_K": model.spec.lag_K,
        "horizon": model.spec.horizon,
        "hidden_dim": model.spec.hidden_dim,
        "input_dim": model.net.input_dim if model.net is not None else None,
        "shapes": [[name, list(arr.shape)] for name, arr in arrays.items()],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for _, arr in arrays.items():
            fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def load_model(path: str) -> ForecastModel:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path}: not a forecast checkpoint")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(fh.read(hlen))
        arrays = {}
        for name, shape in header["shapes"]:
            count = int(np.prod(shape)) if shape else 1
            arrays[name] = np.frombuffer(fh.read(count * 8), dtype=np.float64).reshape(shape).copy()

    spec = ModelSpec(
        kind=header["kind"],
        target=header["target"],
        lag_K=header["lag_K"],
        horizon=header["horizon"],
        hidden_dim=header["hidden_dim"],
    )
    norm = Normalization(
        feat_mean=arrays["norm.feat_mean"],
        feat_scale=arrays["norm.feat_scale"],
        target_mean=float(arrays["norm.target"][0]),
        target_scale=float(arrays["norm.target"][1]),
    )
    model = ForecastModel(spec=spec, norm=norm, correction=tuple(arrays["correction"]))
    if spec.kind == "linear":
        model.linear = LinearAR(arrays["linear.coef"], float(arrays["linear.intercept"][0]))
    else:
        net = RecurrentNet.__new__(RecurrentNet)
        net.input_dim = int(header["input_dim"])
        net.hidden_dim = spec.hidden_dim
        net.output_horizon = spec.horizon
        net.params = {name: arrays[f"net.{name}"] for name in PARAM_NAMES}
        model.net = net
    return model
