import numpy as np
import pytest

from vppdispatch.domain import validate_instance
from vppdispatch.synthetic import DriftSpec, SyntheticSpec, generate_synthetic


def test_noiseless_load_is_24_periodic():
    spec = SyntheticSpec(days=6, n_buildings=2, noise_load=0.0, noise_solar=0.0, seed=1)
    inst = generate_synthetic(spec)
    for b in inst.buildings:
        assert np.allclose(b.load[:24], b.load[24:48], atol=1e-12)
        assert np.allclose(b.load[:24], b.load[96:120], atol=1e-12)


def test_drift_scales_mean_load():
    spec = SyntheticSpec(
        days=30, n_buildings=1, noise_load=0.0, noise_solar=0.0,
        drift=DriftSpec(day=15, load_scale=1.2), seed=2,
    )
    inst = generate_synthetic(spec)
    load = inst.buildings[0].load
    before = load[: 14 * 24].mean()
    after = load[15 * 24 :].mean()
    assert after / before == pytest.approx(1.2, rel=0.01)


def test_solar_is_zero_at_midnight_every_day():
    spec = SyntheticSpec(days=10, n_buildings=3, noise_solar=0.4, seed=3)
    inst = generate_synthetic(spec)
    hours = inst.grid.hour_of_day
    for b in inst.buildings:
        assert np.all(b.solar_capacity[hours == 0] == 0.0)
        assert np.all(b.solar_capacity[hours == 3] == 0.0)
        assert np.all(b.solar_capacity[hours == 12] > 0.0)


def test_price_is_two_tier_with_peak_hours():
    spec = SyntheticSpec(days=4, seed=0)
    inst = generate_synthetic(spec)
    hours = inst.grid.hour_of_day
    price = inst.market.price
    peak = np.isin(hours, spec.peak_hours)
    assert price[peak].min() > price[~peak].max() * 2
    # within the cheap tier, prices never rise overnight (no free arbitrage
    # pair at unit model efficiency before the next solar valley)
    one_night = price[21 : 24 + 13]  # 21:00 through noon next day
    assert np.all(np.diff(one_night) < 0)


def test_determinism_and_seed_sensitivity():
    spec = SyntheticSpec(days=5, n_buildings=2, seed=9)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert np.array_equal(a.buildings[0].load, b.buildings[0].load)
    c = generate_synthetic(SyntheticSpec(days=5, n_buildings=2, seed=10))
    assert not np.array_equal(a.buildings[0].load, c.buildings[0].load)


def test_generated_instances_validate():
    spec = SyntheticSpec(days=8, n_buildings=4, drift=DriftSpec(day=4, load_scale=0.8), seed=4)
    inst = generate_synthetic(spec)
    assert validate_instance(inst) == []
    assert len(inst.buildings) == len(inst.generators) == len(inst.storages) == 4


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(days=1)
    with pytest.raises(ValueError):
        SyntheticSpec(days=10, drift=DriftSpec(day=11, load_scale=1.1))
    with pytest.raises(ValueError):
        SyntheticSpec(days=10, noise_load=-0.1)
