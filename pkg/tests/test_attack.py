import numpy as np
import pytest

from conftest import random_dc_system
from fdia_lab.attack import (AttackKind, AttackScenario, SensorSelection,
                             attacked_residual_bound, build_stealthy, inject,
                             labels_for, load_scenario, save_scenario,
                             scenario_from_json, scenario_to_json)
from fdia_lab.dc_estimation import bad_data_check, objective, wls_estimate
from fdia_lab.errors import ConfigError, DimensionError


def fraction_scenario(onset=10, duration=5, fraction=0.05, sensors=(True,)):
    return AttackScenario(selection=SensorSelection(tuple(sensors)),
                          kind=AttackKind.FRACTION_SCALE,
                          onset=onset, duration=duration, fraction=fraction)


def test_inject_empty_selection_is_identity():
    scen = fraction_scenario(sensors=(False, False))
    z = np.array([1.0, 2.0])
    np.testing.assert_array_equal(inject(z, scen, 12), z)


def test_inject_outside_window_is_identity():
    scen = fraction_scenario(onset=10, duration=5)
    z = np.array([100.0])
    np.testing.assert_array_equal(inject(z, scen, 9), z)
    np.testing.assert_array_equal(inject(z, scen, 15), z)


def test_inject_five_percent():
    # +5% of the original measurement inside the window
    scen = fraction_scenario(onset=0, duration=1, fraction=0.05)
    np.testing.assert_allclose(inject(np.array([100.0]), scen, 0), [105.0])


def test_inject_dimension_mismatch():
    scen = fraction_scenario(sensors=(True, False))
    with pytest.raises(DimensionError):
        inject(np.array([1.0]), scen, 10)


def test_inject_duty_cycle():
    scen = AttackScenario(selection=SensorSelection((True,)),
                          kind=AttackKind.FRACTION_SCALE, onset=0, duration=10,
                          fraction=1.0, period=4, duty=2)
    z = np.array([1.0])
    touched = [inject(z, scen, t)[0] != 1.0 for t in range(10)]
    assert touched == [True, True, False, False] * 2 + [True, True]


def test_labels_match_active_window():
    scen = fraction_scenario(onset=3, duration=4)
    np.testing.assert_array_equal(labels_for(scen, 10),
                                  [0, 0, 0, 1, 1, 1, 1, 0, 0, 0])


def test_random_sinusoid_requires_params():
    with pytest.raises(ConfigError):
        AttackScenario(selection=SensorSelection((True,)),
                       kind=AttackKind.RANDOM_SINUSOID, onset=0, duration=1)


def test_build_stealthy_zero_and_identity():
    h = np.eye(3)
    np.testing.assert_array_equal(build_stealthy(h, np.zeros(3)), np.zeros(3))
    v = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(build_stealthy(h, v), v)


def test_stealthy_bias_preserves_objective(rng):
    for _ in range(50):
        sys = random_dc_system(rng, m=6, n=3)
        z = rng.normal(size=6)
        d = rng.normal(size=3)
        ac = build_stealthy(sys.jacobian, d)
        x_hat = wls_estimate(sys, z)
        clean = objective(sys, z, x_hat)
        attacked = objective(sys, z + ac, x_hat + d)
        assert attacked == pytest.approx(clean, rel=1e-9, abs=1e-12)


def test_stealth_invisible_to_bad_data_check(rng):
    for _ in range(100):
        sys = random_dc_system(rng, m=8, n=4, threshold=5.0)
        z = sys.jacobian @ rng.normal(size=4) + rng.normal(0, 0.3, size=8)
        d = rng.normal(size=4)
        ac = build_stealthy(sys.jacobian, d)
        x_hat = wls_estimate(sys, z)
        clean_flag = bad_data_check(objective(sys, z, x_hat), sys.threshold)
        attacked_flag = bad_data_check(objective(sys, z + ac, x_hat + d), sys.threshold)
        assert attacked_flag == clean_flag


def test_attacked_residual_stealth_cancellation(rng):
    sys = random_dc_system(rng, m=6, n=3)
    z = rng.normal(size=6)
    d = rng.normal(size=3)
    x_hat = wls_estimate(sys, z)
    ac = build_stealthy(sys.jacobian, d)
    e_ac, _ = attacked_residual_bound(z, ac, sys.jacobian, x_hat, d)
    clean = np.linalg.norm(z - sys.jacobian @ x_hat)
    assert e_ac == pytest.approx(clean, rel=1e-9)


def test_attacked_residual_no_attack_case(rng):
    sys = random_dc_system(rng, m=6, n=3)
    z = rng.normal(size=6)
    x_hat = wls_estimate(sys, z)
    e_ac, _ = attacked_residual_bound(z, np.zeros(6), sys.jacobian, x_hat, np.zeros(3))
    assert e_ac == pytest.approx(np.linalg.norm(z - sys.jacobian @ x_hat))


def test_attacked_residual_triangle_bound(rng):
    for _ in range(1000):
        m, n = 5, 3
        h = rng.normal(size=(m, n))
        z = rng.normal(size=m)
        ac = rng.normal(size=m)
        x_hat = rng.normal(size=n)
        d = rng.normal(size=n)
        e_ac, bound = attacked_residual_bound(z, ac, h, x_hat, d)
        assert e_ac <= bound + 1e-12


def test_injection_locality_bit_identical():
    scen = fraction_scenario(onset=50, duration=10)
    rng = np.random.default_rng(0)
    zs = rng.normal(size=(100, 1))
    for t, z in enumerate(zs):
        out = inject(z, scen, t)
        if not 50 <= t < 60:
            assert out[0] == z[0]  # bitwise identical outside the window


def test_scenario_json_roundtrip(tmp_path):
    scen = AttackScenario(selection=SensorSelection((True, False, True)),
                          kind=AttackKind.STEALTHY, onset=7, duration=3,
                          bias=np.array([0.1, 0.0, -0.2]))
    path = tmp_path / "scenario.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert back.kind == scen.kind
    assert back.selection == scen.selection
    assert back.onset == scen.onset and back.duration == scen.duration
    np.testing.assert_array_equal(back.bias, scen.bias)


def test_scenario_json_matches_declared_schema():
    scen = fraction_scenario(onset=2310, duration=944, fraction=0.05)
    obj = scenario_to_json(scen)
    assert obj == {"kind": "fraction_scale", "onset": 2310, "duration": 944,
                   "fraction": 0.05, "sensors": [True]}
    assert scenario_from_json(obj) == scen
