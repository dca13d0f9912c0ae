"""Seeded synthetic district generator for desk-scale experiments.

Loads are a diurnal sinusoid with optional weekly modulation and Gaussian
noise; an optional drift multiplies load from a given day onward, emulating
a lasting change in the data distribution.  Solar is a clipped midday bell,
price a two-tier time-of-use pattern and carbon intensity a smooth diurnal
curve peaking in the evening.  Everything is a deterministic function of
the spec, including its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    BuildingSeries,
    GenerationDevice,
    MarketSeries,
    ProblemInstance,
    StorageDevice,
    TimeGrid,
)


@dataclass(frozen=True)
class DriftSpec:
    """Multiply load by ``load_scale`` from day ``day`` (1-based) onward."""

    day: int
    load_scale: float


@dataclass(frozen=True)
class SyntheticSpec:
    days: int = 14
    n_buildings: int = 2
    drift: DriftSpec | None = None
    noise_load: float = 0.08
    noise_solar: float = 0.15
    noise_price: float = 0.0
    weekly_amplitude: float = 0.0
    base_load_kw: float = 1.0
    pv_scale: float = 2.0
    price_offpeak: float = 0.08
    price_peak: float = 0.24
    price_tilt: float = 0.05
    peak_tilt: float = 0.12
    peak_hours: tuple[int, ...] = (16, 17, 18, 19, 20)
    battery_hours: float = 5.0
    battery_c_rate: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.days < 2:
            raise ValueError("days must be >= 2")
        if self.n_buildings < 1:
            raise ValueError("n_buildings must be >= 1")
        if self.noise_load < 0 or self.noise_solar < 0 or self.noise_price < 0:
            raise ValueError("noise levels must be >= 0")
        if self.drift is not None and not (1 <= self.drift.day <= self.days):
            raise ValueError("drift day must fall inside the generated range")


def _diurnal_load(hours: np.ndarray) -> np.ndarray:
    # evening-peaked profile, strictly positive
    return 0.8 + 0.5 * np.sin(2 * np.pi * (hours - 13) / 24.0)


def _solar_bell(hours: np.ndarray) -> np.ndarray:
    # daylight 6h-18h, peak at noon, exactly zero at night
    up = np.sin(np.pi * (hours - 6) / 12.0)
    return np.where((hours > 6) & (hours < 18), np.maximum(up, 0.0) ** 2, 0.0)


def generate_synthetic(spec: SyntheticSpec) -> ProblemInstance:
    T = spec.days * 24
    grid = TimeGrid(start_index=0, horizon_T=T, step_hours=1.0)
    hours = grid.hour_of_day.astype(np.float64)
    t_abs = np.arange(T, dtype=np.float64)
    rng = np.random.default_rng(spec.seed)

    weekly = 1.0 + spec.weekly_amplitude * np.sin(2 * np.pi * t_abs / 168.0)
    drift_factor = np.ones(T)
    if spec.drift is not None:
        drift_factor[(spec.drift.day - 1) * 24 :] = spec.drift.load_scale

    buildings = []
    generators = []
    storages = []
    for u in range(spec.n_buildings):
        base = spec.base_load_kw * float(rng.uniform(0.8, 1.2))
        load_det = base * _diurnal_load(hours) * weekly
        load = np.maximum(0.0, load_det + spec.noise_load * base * rng.standard_normal(T))
        load *= drift_factor

        pv_size = spec.pv_scale * base
        solar_det = pv_size * _solar_bell(hours)
        solar = np.maximum(0.0, solar_det * (1.0 + spec.noise_solar * rng.standard_normal(T)))

        bid = f"b{u}"
        buildings.append(BuildingSeries(bid, load, solar))
        generators.append(GenerationDevice(f"pv_{bid}", np.zeros(T), pv_size * 1.1))
        # power-limited battery: full-power action stays comparable to the
        # natural load swing, so dispatch spreads over several hours
        e_max = spec.battery_hours * base
        p_max = e_max * spec.battery_c_rate
        storages.append(
            StorageDevice(
                id=f"bat_{bid}",
                e_min=0.0,
                e_max=e_max,
                p_charge_max=p_max,
                p_discharge_max=p_max,
                e_initial=0.0,
            )
        )

    # Two-tier time-of-use with small deterministic tilts inside each tier.
    # Off-peak prices fall from 21:00 to a minimum at noon then rise into
    # the peak; the peak tier is tent-shaped around its apex.  Perfectly
    # flat tiers would leave the optimizer indifferent between hours
    # (re-planned schedules then jitter arbitrarily), while a tilt that
    # rises anywhere overnight would invite pure overnight cycling at unit
    # model efficiency.
    u = (hours - 21) % 24  # 0 at 21:00, 15 at noon, 18 at 15:00
    factor = np.where(u <= 15, 1.0 - u / 15.0, (u - 15) / 6.0)
    is_peak = np.isin(hours, spec.peak_hours)
    apex = spec.peak_hours[len(spec.peak_hours) // 2]
    tent = 1.0 - np.abs(hours - apex) / max(len(spec.peak_hours) - 1, 1)
    tent = tent + 0.08 * (hours - apex) / max(len(spec.peak_hours), 1)  # breaks mirror-hour ties
    price = np.where(
        is_peak,
        spec.price_peak * (1.0 + spec.peak_tilt * (tent - 0.5)),
        spec.price_offpeak * (1.0 + spec.price_tilt * (factor - 0.5)),
    )
    if spec.noise_price > 0:
        price = np.maximum(0.0, price * (1.0 + spec.noise_price * rng.standard_normal(T)))
    carbon = 0.40 + 0.15 * np.sin(2 * np.pi * (hours - 15) / 24.0)

    return ProblemInstance(
        grid=grid,
        buildings=tuple(buildings),
        generators=tuple(generators),
        storages=tuple(storages),
        market=MarketSeries(price.astype(np.float64), carbon),
    )
