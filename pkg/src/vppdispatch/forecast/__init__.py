"""Point forecasting with uncertainty estimation and online updating."""

from .features import (
    FeatureVector,
    InsufficientHistoryError,
    build_features,
    calendar_encoding,
    recurrent_sequence,
    window_dataset_linear,
    window_dataset_recurrent,
)
from .models import LinearAR, RecurrentNet, forward_recurrent
from .training import (
    DivergenceError,
    ForecastModel,
    ModelSpec,
    Normalization,
    OnlineData,
    TrainConfig,
    UncertaintyEstimate,
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

__all__ = [
    "FeatureVector",
    "InsufficientHistoryError",
    "build_features",
    "calendar_encoding",
    "recurrent_sequence",
    "window_dataset_linear",
    "window_dataset_recurrent",
    "LinearAR",
    "RecurrentNet",
    "forward_recurrent",
    "DivergenceError",
    "ForecastModel",
    "ModelSpec",
    "Normalization",
    "OnlineData",
    "TrainConfig",
    "UncertaintyEstimate",
    "UpdateScheme",
    "UpdateSchemeError",
    "apply_update",
    "estimate_variance",
    "load_model",
    "make_dataset",
    "predict",
    "save_model",
    "train",
]
