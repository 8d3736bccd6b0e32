import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risbackhaul.errors import InvalidInput
from risbackhaul.numerics import make_rng
from risbackhaul.scenario import (ScenarioConfig, SystemParams, build_channels,
                                  build_scenario, build_topology, pathloss_db,
                                  pathloss_gain, traffic_profile)


def test_topology_seven_survivors():
    topo = build_topology(SystemParams(L=7, d_0=100.0))
    d = np.sort(topo.d)
    np.testing.assert_allclose(d[:6], 100.0, rtol=1e-12)
    assert d[6] == pytest.approx(100 * math.sqrt(3), rel=1e-12)
    assert topo.d_min == pytest.approx(100.0) and topo.d_max == pytest.approx(173.205, abs=1e-3)


def test_topology_single_survivor_and_ris_offset():
    topo = build_topology(SystemParams(L=1, d_0=100.0))
    np.testing.assert_allclose(topo.survivor_positions[0], [100.0, 0.0], atol=1e-12)
    assert topo.d_ris == pytest.approx(25.0)


def test_topology_ring_order_is_counterclockwise():
    topo = build_topology(SystemParams(L=6))
    ang = np.arctan2(topo.survivor_positions[:, 1], topo.survivor_positions[:, 0]) % (2 * np.pi)
    ang[np.isclose(ang, 2 * np.pi)] = 0.0
    assert np.all(np.diff(ang) > 0)


def test_topology_too_many_sites():
    with pytest.raises(InvalidInput):
        build_topology(SystemParams(L=37))


def test_pathloss_reference_values():
    assert pathloss_db(28e9, 1.0) == pytest.approx(61.38, abs=0.01)
    fspl = 20 * math.log10(4 * math.pi * 28e9 / 3e8)
    assert pathloss_db(28e9, 1.0, 'LOS', n_los=2.0) == fspl
    assert pathloss_db(28e9, 100.0, 'NLOS', n_nlos=3.19) == pytest.approx(125.18, abs=0.01)
    with pytest.raises(InvalidInput):
        pathloss_db(28e9, 0.5)


@given(st.floats(1, 1e4), st.floats(1, 1e4), st.sampled_from(['LOS', 'NLOS']))
def test_pathloss_monotone(d1, d2, kind):
    if d1 < d2:
        assert pathloss_db(28e9, d1, kind) < pathloss_db(28e9, d2, kind)


def test_pure_los_limit_unit_magnitude():
    p = SystemParams(N=4, M=64, L=2, kappa=1e9)
    topo = build_topology(p)
    ch = build_channels(p, topo, make_rng(1))
    small = ch.G_tilde / math.sqrt(pathloss_gain(p.f_c, topo.d_ris, 'LOS'))
    np.testing.assert_allclose(np.abs(small), 1.0, atol=1e-4)


def test_rayleigh_limit_moments():
    p = SystemParams(N=4, M=256, L=1, kappa=1e-12)
    topo = build_topology(p)
    vals = []
    for seed in range(40):
        ch = build_channels(p, topo, make_rng(seed))
        vals.append(ch.G_tilde.ravel() / math.sqrt(pathloss_gain(p.f_c, topo.d_ris, 'LOS')))
    z = np.concatenate(vals)
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) <= 0.02
    assert abs(z.real.mean()) <= 0.01 and abs(z.imag.mean()) <= 0.01


def test_direct_channel_power_matches_pathloss():
    p = SystemParams(N=4, M=0, L=2)
    topo = build_topology(p)
    beta = pathloss_gain(p.f_c, topo.d, 'NLOS')
    acc = np.zeros(p.L)
    draws = 10_000
    g = make_rng(123)
    for _ in range(draws):
        ch = build_channels(p, topo, g)
        acc += np.sum(np.abs(ch.H) ** 2, axis=(1, 2)) / p.N ** 2
    np.testing.assert_allclose(acc / draws, beta, rtol=0.03)


def test_traffic_uniform():
    p = SystemParams()
    t = traffic_profile(p, build_topology(p), 0.6, alpha=0.0, sigma_chi=0.0)
    np.testing.assert_allclose(t.eta_l, 0.6)
    assert t.C_d == pytest.approx(0.6 * p.C_0)


def test_traffic_hotspot_extremes():
    p = SystemParams()
    topo = build_topology(p)
    t = traffic_profile(p, topo, 0.8, alpha=0.7, gamma=2.0, sigma_chi=0.0)
    far = np.argmax(topo.d)
    near = np.argmin(topo.d)
    assert t.eta_l[far] == pytest.approx(0.3 * 0.8)
    assert t.eta_l[near] == pytest.approx(0.8)
    np.testing.assert_allclose(t.spare, p.C_0 - t.C_l)


@pytest.mark.parametrize('kw', [dict(eta=1.2), dict(eta=0.5, alpha=-0.1),
                                dict(eta=0.5, gamma=0.0), dict(eta=0.5, sigma_chi=-1.0)])
def test_traffic_range_errors(kw):
    p = SystemParams()
    with pytest.raises(InvalidInput):
        traffic_profile(p, build_topology(p), rng=make_rng(0), **kw)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 5), st.floats(0, 2),
       st.integers(0, 2 ** 32))
def test_traffic_clamped(eta, alpha, gamma, sigma_chi, seed):
    p = SystemParams()
    t = traffic_profile(p, build_topology(p), eta, alpha, gamma, sigma_chi, make_rng(seed))
    assert np.all((t.eta_l >= 0) & (t.eta_l <= 1))
    assert np.all(t.spare >= 0)
    np.testing.assert_array_equal(t.C_l, t.eta_l * p.C_0)
    np.testing.assert_array_equal(t.spare, p.C_0 - t.C_l)


def test_build_scenario_table_defaults():
    sc = build_scenario(ScenarioConfig(), seed=0)
    assert (sc.N, sc.M, sc.L) == (4, 512, 7)
    assert sc.channels.H.shape == (7, 4, 4)
    assert sc.channels.G.shape == (7, 4, 512)
    assert sc.channels.G_tilde.shape == (512, 4)
    assert sc.params.kappa == pytest.approx(7.943, abs=1e-3)
    assert np.all(np.isfinite(sc.channels.G))


def test_build_scenario_no_ris():
    sc = build_scenario(ScenarioConfig().with_system(M=0), seed=0)
    assert sc.channels.G.shape == (7, 4, 0) and sc.channels.G_tilde.shape == (0, 4)


def test_build_scenario_deterministic_and_paired():
    cfg = ScenarioConfig(eta=0.7, alpha=0.7, sigma_chi=0.05)
    a = build_scenario(cfg, seed=42)
    b = build_scenario(cfg, seed=42)
    for x, y in [(a.channels.H, b.channels.H), (a.channels.G, b.channels.G),
                 (a.channels.G_tilde, b.channels.G_tilde), (a.traffic.eta_l, b.traffic.eta_l)]:
        np.testing.assert_array_equal(x, y)
    off = build_scenario(cfg.with_system(M=0), seed=42)
    np.testing.assert_array_equal(a.channels.H, off.channels.H)
    np.testing.assert_array_equal(a.traffic.eta_l, off.traffic.eta_l)


def test_scenario_is_immutable():
    sc = build_scenario(ScenarioConfig().with_system(M=4), seed=0)
    with pytest.raises(ValueError):
        sc.channels.H[0, 0, 0] = 1.0
    with pytest.raises(AttributeError):
        sc.seed = 3


def test_system_params_validation():
    with pytest.raises(InvalidInput):
        SystemParams(sigma2=0.0)
    with pytest.raises(InvalidInput):
        SystemParams(big_M=1.0)
    assert SystemParams(N=4).regularization == pytest.approx(5e-7)
