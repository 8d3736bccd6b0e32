"""Fast invariant checks and brute-force oracles.

The oracles here deliberately avoid the optimiser's code path: rates are
recomputed from scalar formulas and phases are searched on a grid.
"""

import itertools
import math

import numpy as np

from .model import (achievable_rates, cascade_coefficients, effective_channel,
                    interference_covariance, surrogate_gradients, surrogate_value)
from .numerics import make_rng, sample_cn
from .optimizer import SolverConfig, run_algorithm
from .scenario import (ChannelSet, Scenario, SystemParams, Topology, TrafficProfile,
                       build_scenario)

__all__ = ['random_scenario', 'sinr', 'brute_force_tiny', 'check_tightness',
           'check_gradients', 'check_cascade', 'check_tiny_oracle', 'run_suite']


def random_scenario(rng, N=2, L=2, M=3, spare=None, P_max=1.0, channel_scale=1.0,
                    ris_scale=1.0):
    """Unit-scale random instance (noise 1, bandwidth 1, capacity 4).

    Useful for checks that should not depend on path-loss magnitudes.
    """
    params = SystemParams(N=N, M=M, L=L, P_max=P_max, B=1.0, sigma2=1.0, C_0=4.0,
                          big_M=40.0)
    H = channel_scale * np.stack([sample_cn(rng, N, N) for _ in range(L)])
    G = ris_scale * np.stack([sample_cn(rng, N, M) for _ in range(L)]).reshape(L, N, M)
    G_tilde = ris_scale * sample_cn(rng, M, N).reshape(M, N)
    spare = np.full(L, 4.0) if spare is None else np.asarray(spare, dtype=float)
    C_l = params.C_0 - spare
    angles = 2 * np.pi * np.arange(L) / L
    topo = Topology(bs_position=np.zeros(2),
                    survivor_positions=np.column_stack([np.cos(angles), np.sin(angles)]) * 100,
                    ris_position=np.array([25.0, 0.0]))
    traffic = TrafficProfile(eta=0.5, eta_l=C_l / params.C_0, C_d=0.5 * params.C_0,
                             C_l=C_l, spare=spare, alpha=0.0, gamma=2.0, sigma_chi=0.0)
    return Scenario(params=params, topology=topo,
                    channels=ChannelSet(H=H, G=G, G_tilde=G_tilde), traffic=traffic)


def sinr(scenario, l, phi, W, selection=None):
    """SINR inside the MMSE rate formula, via an explicit inverse."""
    Heff = effective_channel(scenario, l, phi)
    R = interference_covariance(scenario, l, phi, W, selection)
    s = Heff @ W[l]
    return float(np.real(s.conj() @ np.linalg.inv(R) @ s))


def brute_force_tiny(scenario, grid=360):
    """Exhaustive optimum for ``N = 1`` instances.

    With one antenna only single-survivor selections are allowed, full power
    is optimal, and the best phases are found on a ``grid``-point lattice per
    RIS element.  Returns ``(R, selection, phi)``.
    """
    p = scenario.params
    if p.N != 1:
        raise ValueError('brute_force_tiny handles N = 1 only')
    ch = scenario.channels
    best = (-1.0, None, None)
    angles = np.exp(2j * np.pi * np.arange(grid) / grid)
    phis = np.array(list(itertools.product(angles, repeat=p.M))) if p.M else np.zeros((1, 0))
    for l in range(p.L):
        h = ch.H[l, 0, 0]
        cascade = ch.G[l, 0, :] * ch.G_tilde[:, 0]
        gain = np.abs(h + phis @ cascade) ** 2
        rate = p.B * np.log2(1 + p.P_max * gain / p.sigma2)
        f = np.minimum(rate, scenario.traffic.spare[l])
        k = int(np.argmax(f))
        if f[k] > best[0]:
            best = (float(f[k]), (l,), phis[k])
    return best


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _random_point(rng, scenario, selection):
    p = scenario.params
    W = np.zeros((p.L, p.N), dtype=complex)
    for l in selection:
        W[l] = sample_cn(rng, p.N)
    W *= math.sqrt(p.P_max) / np.linalg.norm(W)
    phi = np.exp(2j * np.pi * rng.random(p.M))
    return W, phi


def check_tightness(scenario, rng, draws=20):
    """Surrogate at the MMSE auxiliary equals the SINR (no regulariser)."""
    p = scenario.params
    worst = 0.0
    for _ in range(draws):
        k = int(rng.integers(1, min(p.N, p.L) + 1))
        sel = tuple(sorted(rng.choice(p.L, size=k, replace=False)))
        W, phi = _random_point(rng, scenario, sel)
        for l in sel:
            R = interference_covariance(scenario, l, phi, W, sel)
            y = np.linalg.solve(R, effective_channel(scenario, l, phi) @ W[l])
            worst = max(worst, _rel(surrogate_value(scenario, l, y, phi, W, sel),
                                    sinr(scenario, l, phi, W, sel)))
    return worst <= 1e-9, worst


def _fd_gradient(f, x, h):
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        for unit, part in ((1.0, 'real'), (1j, 'imag')):
            e = np.zeros_like(flat)
            e[i] = unit * h
            d = (f((flat + e).reshape(x.shape)) - f((flat - e).reshape(x.shape))) / (2 * h)
            gflat[i] += d if part == 'real' else 1j * d
    return g


def check_gradients(scenario, rng, draws=5):
    """Analytic surrogate gradients against central finite differences."""
    p = scenario.params
    worst = 0.0
    for _ in range(draws):
        k = int(rng.integers(1, min(p.N, p.L) + 1))
        sel = tuple(sorted(rng.choice(p.L, size=k, replace=False)))
        W, phi = _random_point(rng, scenario, sel)
        l = sel[int(rng.integers(len(sel)))]
        R = interference_covariance(scenario, l, phi, W, sel)
        y = np.linalg.solve(R, effective_channel(scenario, l, phi) @ W[l])
        y = y + 0.1 * np.linalg.norm(y) * sample_cn(rng, p.N)
        gW, gphi = surrogate_gradients(scenario, l, y, phi, W, sel)

        def f_w(Wx):
            return surrogate_value(scenario, l, y, phi, Wx, sel)

        fdW = _fd_gradient(f_w, W, 1e-6 * max(np.linalg.norm(W), 1e-300))
        mask = np.zeros(p.L, dtype=bool)
        mask[list(sel)] = True
        worst = max(worst, np.linalg.norm(fdW[mask] - gW[mask]) /
                    max(np.linalg.norm(gW[mask]), 1e-300))
        if p.M:
            fdphi = _fd_gradient(lambda ph: surrogate_value(scenario, l, y, ph, W, sel),
                                 phi, 1e-6)
            worst = max(worst, np.linalg.norm(fdphi - gphi) /
                        max(np.linalg.norm(gphi), 1e-300))
    return worst <= 1e-5, worst


def check_cascade(scenario, rng, draws=50):
    """``a + b^H phi`` reproduces ``y^H H_eff w`` for random triples."""
    p = scenario.params
    worst = 0.0
    for _ in range(draws):
        l = int(rng.integers(p.L))
        y, w = sample_cn(rng, p.N), sample_cn(rng, p.N)
        phi = sample_cn(rng, p.M) if p.M else np.zeros(0, dtype=complex)
        a, b = cascade_coefficients(scenario, l, y, w)
        direct = np.vdot(y, effective_channel(scenario, l, phi) @ w)
        scale = (np.linalg.norm(y) * np.linalg.norm(w) *
                 (np.linalg.norm(scenario.channels.H[l]) +
                  np.linalg.norm(scenario.channels.G[l]) *
                  np.linalg.norm(scenario.channels.G_tilde) * max(np.abs(phi).max(initial=0), 1)))
        worst = max(worst, abs(a + np.vdot(b, phi) - direct) / scale)
    return worst <= 1e-12, worst


def check_tiny_oracle(rng, instances=3, grid=90, config=None):
    """Solver reaches 98% of the brute-force optimum on N=1, L=2, M=2."""
    worst = 1.0
    for _ in range(instances):
        sc = random_scenario(rng, N=1, L=2, M=2, spare=rng.uniform(1.0, 4.0, 2),
                             ris_scale=0.7)
        opt, _, _ = brute_force_tiny(sc, grid)
        res = run_algorithm(sc, config or SolverConfig(), rng)
        worst = min(worst, res.R / opt if opt > 0 else 1.0)
    return worst >= 0.98, worst


def run_suite(run_config, seed=0):
    """Run every fast check; returns ``[(name, passed, detail), ...]``."""
    rng = make_rng(seed, 11)
    scfg = run_config.scenario_config()
    scenario = build_scenario(scfg, seed)
    small = build_scenario(scfg.with_system(M=min(scfg.system.M, 8)), seed)
    checks = [
        ('quadratic-transform tightness', check_tightness(scenario, rng)),
        ('surrogate gradients', check_gradients(small, rng)),
        ('cascade identity', check_cascade(scenario, rng)),
        ('tiny-instance oracle', check_tiny_oracle(rng, config=run_config.solver_config())),
    ]
    return [(name, bool(ok), float(detail)) for name, (ok, detail) in checks]
