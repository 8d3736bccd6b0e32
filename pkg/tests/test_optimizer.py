import math

import numpy as np
import pytest

from risbackhaul.model import (effective_channel, surrogate_value, survivability,
                               total_redistributed)
from risbackhaul.numerics import make_rng, sample_cn
from risbackhaul.optimizer import (SolverConfig, Strategy, enumerate_selections,
                                   random_phases, run_algorithm, solve_fixed_selection,
                                   solve_phase_subproblem, solve_precoder_subproblem,
                                   update_auxiliary)
from risbackhaul.scenario import ScenarioConfig, build_scenario
from risbackhaul.validation import brute_force_tiny, random_scenario

FAST = SolverConfig(E=15, max_inner=200)


def test_enumerate_selections_counts():
    assert len(enumerate_selections(4, 2)) == 10
    assert enumerate_selections(3, 2) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
    assert len(enumerate_selections(7, 4)) == 98
    assert enumerate_selections(1, 4) == [(0,)]


def test_random_phases_unit_modulus(rng):
    phi = random_phases(rng, 64)
    np.testing.assert_allclose(np.abs(phi), 1, atol=1e-15)


def test_update_auxiliary_single_bs(rng):
    sc = random_scenario(rng, N=2, L=2, M=3)
    phi = random_phases(rng, 3)
    W = np.zeros((2, 2), dtype=complex)
    W[0] = sample_cn(rng, 2)
    aux = update_auxiliary(sc, phi, W, (0,), eps_reg=0.0)
    np.testing.assert_allclose(aux.y[0], effective_channel(sc, 0, phi) @ W[0], rtol=1e-12)
    np.testing.assert_array_equal(aux.y[1], 0)
    aux0 = update_auxiliary(sc, phi, np.zeros((2, 2)), (0,), eps_reg=0.0)
    assert not np.any(aux0.y) and aux0.R == 0


def test_update_auxiliary_regulariser(rng):
    sc = random_scenario(rng, N=3, L=2, M=2)
    aux = update_auxiliary(sc, random_phases(rng, 2), np.zeros((2, 3)), (0, 1))
    np.testing.assert_allclose(aux.y, 1e-6 / math.sqrt(3))


def test_precoder_closed_form_single_bs(rng):
    sc = random_scenario(rng, N=3, L=2, M=2, channel_scale=0.2, ris_scale=0.2, P_max=2.0)
    phi = random_phases(rng, 2)
    W0 = np.zeros((2, 3), dtype=complex)
    W0[1] = sample_cn(rng, 3) * 0.5
    y = update_auxiliary(sc, phi, W0, (1,), eps_reg=0.0).y[1]
    res = solve_precoder_subproblem(sc, phi, y, (1,), W0)
    g = effective_channel(sc, 1, phi).conj().T @ y
    expected = math.sqrt(2.0) * g / np.linalg.norm(g)
    np.testing.assert_allclose(res.value[1], expected, atol=1e-6)
    assert not np.any(res.value[0])


def test_precoder_scalar_grid(rng):
    sc = random_scenario(rng, N=1, L=1, M=0, channel_scale=0.3, P_max=1.5)
    W0 = np.array([[0.3 - 0.2j]])
    y = update_auxiliary(sc, [], W0, (0,), eps_reg=0.0).y[0]
    res = solve_precoder_subproblem(sc, [], y, (0,), W0)
    mags = np.linspace(0, math.sqrt(1.5), 301)
    angs = np.exp(2j * np.pi * np.arange(360) / 360)
    best = max(surrogate_value(sc, 0, y, [], np.array([[m * a]]), (0,))
               for m in mags[::10] for a in angs)
    q = surrogate_value(sc, 0, y, [], res.value, (0,))
    assert q >= best - 1e-9
    assert abs(res.value[0, 0]) == pytest.approx(math.sqrt(1.5), rel=1e-9)


def test_phase_alignment_single_element(rng):
    sc = random_scenario(rng, N=1, L=1, M=1, channel_scale=0.3, ris_scale=0.3)
    W = np.array([[1.0 + 0j]])
    c = sc.channels.G[0, 0, 0] * sc.channels.G_tilde[0, 0]
    aux = update_auxiliary(sc, np.array([1.0 + 0j]), W, (0,), eps_reg=0.0)
    res = solve_phase_subproblem(sc, W, aux.y[0:1], (0,), np.array([1.0 + 0j]))
    # linear surrogate in phi: optimum aligns c phi with the auxiliary direction
    target = np.angle(aux.y[0, 0]) - np.angle(c)
    assert abs(np.angle(res.value[0] * np.exp(-1j * target))) < 1e-4
    assert abs(res.value[0]) == pytest.approx(1.0)
    assert res.objective >= res.initial_objective - 1e-12


def test_phase_ris_off_passthrough(rng):
    sc = random_scenario(rng, N=2, L=1, M=3)
    sc = sc.with_channels(G=np.zeros_like(sc.channels.G))
    phi0 = random_phases(rng, 3)
    W = np.array([[1.0, 0.5j]])
    aux = update_auxiliary(sc, phi0, W, (0,))
    res = solve_phase_subproblem(sc, W, aux.y, (0,), phi0)
    assert res.objective == pytest.approx(res.initial_objective, rel=1e-12)


def test_phase_two_elements_grid(rng):
    sc = random_scenario(rng, N=1, L=1, M=2, channel_scale=0.3, ris_scale=0.5)
    W = np.array([[1.0 + 0j]])
    phi0 = random_phases(rng, 2)
    aux = update_auxiliary(sc, phi0, W, (0,), eps_reg=0.0)
    res = solve_phase_subproblem(sc, W, aux.y, (0,), phi0)
    a = np.exp(2j * np.pi * np.arange(360) / 360)
    best = max(surrogate_value(sc, 0, aux.y[0], np.array([p1, p2]), W, (0,))
               for p1 in a for p2 in a[::4])
    assert surrogate_value(sc, 0, aux.y[0], res.value, W, (0,)) >= best - 1e-6


def test_fixed_selection_zero_spare(rng):
    sc = random_scenario(rng, N=2, L=2, M=2, spare=[0.0, 0.0])
    res = solve_fixed_selection(sc, (0, 1), FAST, rng)
    assert res.R == 0 and res.psi == 0


def test_fixed_selection_without_ris(rng):
    sc = random_scenario(rng, N=2, L=3, M=0, channel_scale=0.5)
    res = solve_fixed_selection(sc, (0, 2), FAST, rng)
    assert res.phi.shape == (0,)
    R, _ = total_redistributed(sc, res.phi, res.W, (0, 2))
    assert res.R == pytest.approx(R, rel=1e-12)


def _check_feasible(sc, res):
    p = sc.params
    assert len(res.selection) <= p.N
    assert np.linalg.norm(res.W) ** 2 <= p.P_max * (1 + 1e-9)
    np.testing.assert_allclose(np.abs(res.phi), 1, atol=1e-12)
    off = np.ones(p.L, dtype=bool)
    off[list(res.selection)] = False
    assert not np.any(res.W[off])
    R, f = total_redistributed(sc, res.phi, res.W, res.selection)
    assert abs(R - res.R) <= 1e-6 * max(R, 1e-300)
    assert np.all(f <= sc.traffic.spare * (1 + 1e-12))
    assert res.psi == pytest.approx(survivability(res.R, sc.traffic.C_d))


@pytest.mark.parametrize('seed', range(5))
def test_tiny_oracle(seed):
    rng = make_rng(seed, 3)
    sc = random_scenario(rng, N=1, L=2, M=2, spare=rng.uniform(1.0, 4.0, 2), ris_scale=0.7)
    opt, _, _ = brute_force_tiny(sc, grid=360)
    res = run_algorithm(sc, SolverConfig(), rng)
    _check_feasible(sc, res)
    assert res.R >= 0.98 * opt
    assert res.R <= opt * (1 + 1e-3)


def test_feasibility_default_scenario():
    cfg = ScenarioConfig(eta=0.8).with_system(M=32)
    sc = build_scenario(cfg, seed=4)
    res = run_algorithm(sc, FAST, make_rng(4, 7))
    _check_feasible(sc, res)


def test_best_trace_nondecreasing(rng):
    sc = random_scenario(rng, N=2, L=3, M=4, channel_scale=0.4, ris_scale=0.4)
    res = run_algorithm(sc, SolverConfig(E=10, early_stop=False), rng)
    assert np.all(np.diff(res.best_trace) >= -1e-12 * max(res.best_trace.max(), 1))
    assert res.R == pytest.approx(res.best_trace[-1], rel=1e-9)


def test_greedy_not_better_than_enumeration(rng):
    for _ in range(3):
        sc = random_scenario(rng, N=2, L=4, M=3, channel_scale=0.5, ris_scale=0.5,
                             spare=rng.uniform(0.5, 3, 4))
        seed = int(rng.integers(1 << 30))
        outer = run_algorithm(sc, FAST, make_rng(seed))
        greedy = run_algorithm(sc, SolverConfig(E=15, max_inner=200, strategy=Strategy.GREEDY),
                               make_rng(seed))
        _check_feasible(sc, greedy)
        assert greedy.R <= outer.R * (1 + 1e-9) + 1e-12


def test_per_iteration_strategy_runs(rng):
    sc = random_scenario(rng, N=2, L=3, M=3, channel_scale=0.5)
    res = run_algorithm(sc, SolverConfig(E=8, strategy=Strategy.PER_ITERATION_ENUMERATION), rng)
    assert res.strategy is Strategy.PER_ITERATION_ENUMERATION
    _check_feasible(sc, res)


def test_two_survivors_one_without_spare(rng):
    sc = random_scenario(rng, N=2, L=2, M=2, spare=[0.0, 2.0])
    res = run_algorithm(sc, FAST, rng)
    assert res.f[0] == 0
    assert res.R <= 2.0 + 1e-12
    assert res.R > 0


def test_seeded_reproducibility():
    sc = build_scenario(ScenarioConfig().with_system(M=16), seed=2)
    a = run_algorithm(sc, FAST, make_rng(2, 7))
    b = run_algorithm(sc, FAST, make_rng(2, 7))
    assert a.R == b.R and a.selection == b.selection
    np.testing.assert_array_equal(a.phi, b.phi)
