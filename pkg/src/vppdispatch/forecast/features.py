"""Feature construction for the forecasting models.

A feature vector for step t combines cyclic calendar encodings of t with
the last K observed values of the target series (strictly before t) and an
optional aligned exogenous series.  The recurrent models consume sequences
of single-lag feature vectors instead of one wide vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..domain import TimeGrid


class InsufficientHistoryError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    time_features: np.ndarray
    lag_features: np.ndarray
    exogenous: np.ndarray

    def concat(self) -> np.ndarray:
        return np.concatenate([self.time_features, self.lag_features, self.exogenous])

    @property
    def dim(self) -> int:
        return self.time_features.shape[0] + self.lag_features.shape[0] + self.exogenous.shape[0]


def calendar_encoding(grid: TimeGrid, t: int) -> np.ndarray:
    """Sin/cos pairs for hour of day, day of week and month of year at step t."""
    idx = grid.start_index + t
    hour = idx % 24
    dow = (idx // 24) % 7
    month = (idx // 720) % 12
    angles = np.array([2 * np.pi * hour / 24.0, 2 * np.pi * dow / 7.0, 2 * np.pi * month / 12.0])
    return np.concatenate([np.sin(angles), np.cos(angles)])[[0, 3, 1, 4, 2, 5]]


def build_features(
    history: np.ndarray,
    calendar: TimeGrid,
    t: int,
    K: int,
    exogenous: np.ndarray | None = None,
) -> FeatureVector:
    """Features for predicting from step ``t``: calendar of t plus the K
    values of ``history`` immediately before t (most recent last)."""
    history = np.asarray(history, dtype=np.float64)
    if K < 1:
        raise ValueError("lag count K must be >= 1")
    if t - K < 0 or t > history.shape[0]:
        raise InsufficientHistoryError(
            f"need {K} observations before step {t}, history covers [0, {history.shape[0]})"
        )
    lags = history[t - K : t]
    exo = np.asarray(exogenous, dtype=np.float64) if exogenous is not None else np.zeros(0)
    return FeatureVector(calendar_encoding(calendar, t), lags.copy(), exo)


def recurrent_sequence(history: np.ndarray, calendar: TimeGrid, t: int, K: int) -> np.ndarray:
    """Input sequence for the recurrent models, shape (K, 7).

    Element k holds the observed value at step t-K+k followed by the
    calendar encoding of step t-K+k+1, so the last element carries the
    calendar of the first step to be predicted.
    """
    history = np.asarray(history, dtype=np.float64)
    if t - K < 0:
        raise InsufficientHistoryError(f"need {K} observations before step {t}")
    rows = []
    for s in range(t - K + 1, t + 1):
        fv = build_features(history, calendar, s, 1)
        rows.append(np.concatenate([fv.lag_features, fv.time_features]))
    return np.stack(rows, axis=0)


def window_dataset_linear(
    history: np.ndarray, calendar: TimeGrid, K: int, t_start: int, t_end: int
) -> tuple[np.ndarray, np.ndarray]:
    """One-step-ahead training pairs for the linear model over [t_start, t_end)."""
    xs, ys = [], []
    for t in range(max(t_start, K), t_end):
        xs.append(build_features(history, calendar, t, K).concat())
        ys.append(history[t])
    if not xs:
        raise InsufficientHistoryError("window range produced no training pairs")
    return np.stack(xs), np.asarray(ys)


def window_dataset_recurrent(
    history: np.ndarray, calendar: TimeGrid, K: int, horizon: int, t_start: int, t_end: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sequence/horizon training pairs: X (n, K, 7), Y (n, horizon)."""
    xs, ys = [], []
    for t in range(max(t_start, K), t_end - horizon + 1):
        xs.append(recurrent_sequence(history, calendar, t, K))
        ys.append(history[t : t + horizon])
    if not xs:
        raise InsufficientHistoryError("window range produced no training pairs")
    return np.stack(xs), np.stack(ys)
