"""Alternating precoder / RIS-phase optimisation with BS selection.

The continuous part alternates two concave subproblems built from the
quadratic transform of each survivor's SINR:

* precoder step: maximise ``sum_l min(B log2(1 + q_l(w)), spare_l)`` over the
  total-power ball, phases and auxiliaries fixed;
* phase step: the same objective over ``|phi_m| <= 1`` with precoders fixed,
  followed by projection of every element back onto the unit circle.

Both are solved by projected (sub)gradient ascent with backtracking.  The
binary selection is handled by enumerating every subset of at most ``N``
survivors; all subsets are optimised together as one batch, which is what
keeps the full enumeration affordable.

Everything in this module works in normalised rate units (bits/s/Hz, i.e.
rates divided by the bandwidth) internally; results are reported in bits/s.
"""

from dataclasses import dataclass, field, replace
import enum
import itertools
import logging
import math
import time

import numpy as np

from .errors import InvalidInput
from .model import (as_mask, credited_traffic, effective_channels, rates_batch,
                    survivability, _interference_batch)
from .numerics import hermitian_solve

__all__ = ['Strategy', 'SolverConfig', 'AuxiliarySet', 'SubproblemResult',
           'SolveResult', 'enumerate_selections', 'update_auxiliary',
           'solve_precoder_subproblem', 'solve_phase_subproblem',
           'solve_fixed_selection', 'run_algorithm', 'random_phases']

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)


class Strategy(str, enum.Enum):
    OUTER_ENUMERATION = 'outer'
    PER_ITERATION_ENUMERATION = 'per-iter'
    GREEDY = 'greedy'


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the alternating solver.

    ``E`` and ``eps_reg`` default to the scenario's system parameters when
    left as ``None``.  ``early_stop=False`` always runs ``E`` iterations.
    """
    E: int | None = None
    tol_outer: float = 1e-4
    max_inner: int = 500
    gtol: float = 1e-6
    ftol: float = 1e-10
    backtrack: float = 0.5
    max_backtracks: int = 40
    power_iterations: int = 20
    strategy: Strategy = Strategy.OUTER_ENUMERATION
    eps_reg: float | None = None
    early_stop: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'strategy', Strategy(self.strategy))
        if self.E is not None and self.E < 1:
            raise InvalidInput('E must be >= 1')
        if not (self.tol_outer > 0 and self.gtol > 0 and self.ftol >= 0):
            raise InvalidInput('tolerances must be positive')
        if not 0 < self.backtrack < 1:
            raise InvalidInput('backtrack factor must lie in (0, 1)')
        if self.max_inner < 1:
            raise InvalidInput('max_inner must be >= 1')


@dataclass
class AuxiliarySet:
    """Quadratic-transform auxiliaries at a given operating point.

    ``y`` holds one vector per survivor, ``t`` the surrogate value each
    auxiliary certifies, ``rates``/``f``/``R`` the exact rates, credited
    traffic and their total (bits/s).
    """
    y: np.ndarray
    t: np.ndarray
    rates: np.ndarray
    f: np.ndarray
    R: float


@dataclass
class SubproblemResult:
    value: np.ndarray
    objective: float
    initial_objective: float
    iterations: int
    converged: bool
    relaxed: np.ndarray | None = None
    relaxed_objective: float | None = None


@dataclass
class SolveResult:
    """Best operating point found and the trace of the run that produced it.

    ``selection`` holds 0-based survivor indices.  ``objective_trace`` is the
    exact total traffic after each outer iteration (bits/s); the delta traces
    are zero in the first row.
    """
    selection: tuple
    phi: np.ndarray
    W: np.ndarray
    R: float
    psi: float
    rates: np.ndarray
    f: np.ndarray
    objective_trace: np.ndarray
    phase_change_trace: np.ndarray
    precoder_change_trace: np.ndarray
    best_trace: np.ndarray
    iterations: int
    wall_time: float
    strategy: Strategy
    converged: bool = True
    inner_unconverged: int = 0
    candidates: dict = field(default_factory=dict, repr=False)

    @property
    def mask(self):
        m = np.zeros(self.W.shape[0], dtype=bool)
        m[list(self.selection)] = True
        return m


def enumerate_selections(L, N):
    """All non-empty subsets of ``range(L)`` with at most ``N`` members.

    Ordered by size, then lexicographically.
    """
    if L < 1 or N < 1:
        raise InvalidInput('L and N must be >= 1')
    return [c for k in range(1, min(L, N) + 1)
            for c in itertools.combinations(range(L), k)]


def random_phases(rng, M):
    """Unit-modulus phases drawn uniformly on the circle."""
    return np.exp(2j * np.pi * rng.random(M))


# ---------------------------------------------------------------------------
# batched kernels; leading axis K indexes candidate selections

def _auxiliary_batch(Heff, W, masks, sigma2, eps):
    S, R = _interference_batch(Heff, W, masks, sigma2)
    L = Heff.shape[-3]
    sig = S[..., np.arange(L), np.arange(L), :]
    return hermitian_solve(R, sig) + eps


def _true_objective(Heff, W, masks, p, spare):
    rates = rates_batch(Heff, W, masks, p.sigma2, p.B)
    f = credited_traffic(rates, masks, spare)
    return f.sum(axis=-1), rates, f


def _capped(q, cap, masks):
    # normalised capped rate; -inf outside the log domain
    with np.errstate(invalid='ignore', divide='ignore'):
        rate = np.log1p(q) / _LN2
    rate = np.where(q > -1.0, rate, -np.inf)
    return np.where(masks, np.minimum(rate, cap), 0.0).sum(axis=-1)


def _weights(q, cap, masks):
    # d/dq of the capped log, with the rate branch kept at the kink
    with np.errstate(invalid='ignore', divide='ignore'):
        rate = np.log1p(q) / _LN2
        c = 1.0 / (_LN2 * (1.0 + q))
    return np.where(masks & (rate <= cap) & (q > -1.0), c, 0.0)


class _PrecoderProblem:
    """Precoder-step surrogate for a batch of selections at fixed phases."""

    def __init__(self, Heff, y, masks, cap, sigma2, P):
        # g_l = H_eff,l^H y_l
        self.g = np.einsum('...lnp,...ln->...lp', Heff.conj(), y)
        self.const = sigma2 * np.sum(np.abs(y) ** 2, axis=-1)
        self.masks = masks
        self.cap = cap
        self.radius = math.sqrt(P)
        L = masks.shape[-1]
        self.off = masks[:, None, :] & ~np.eye(L, dtype=bool)

    def _q(self, W, idx):
        Z = np.matmul(self.g[idx].conj(), np.swapaxes(W, -1, -2))  # Z[l, j] = g_l^H w_j
        L = Z.shape[-1]
        sig = np.real(Z[:, np.arange(L), np.arange(L)])
        interf = np.sum(np.where(self.off[idx], np.abs(Z) ** 2, 0.0), axis=-1)
        return 2 * sig - self.const[idx] - interf, Z

    def value(self, W, idx):
        q, _ = self._q(W, idx)
        return _capped(q, self.cap[idx], self.masks[idx])

    def gradient(self, W, idx):
        q, Z = self._q(W, idx)
        c = _weights(q, self.cap[idx], self.masks[idx])
        g = self.g[idx]
        # d/dw_j: 2 c_j g_j - 2 sum_{l != j} c_l g_l (g_l^H w_j)
        coef = -np.where(self.off[idx], c[..., None] * Z, 0.0)
        grad = 2 * (c[..., None] * g + np.einsum('klj,kln->kjn', coef, g))
        return np.where(self.masks[idx][..., None], grad, 0.0)

    def lipschitz(self, W, idx, iters):
        q, _ = self._q(W, idx)
        c = _weights(q, self.cap[idx], self.masks[idx])
        # Hessian block for w_j is 2 sum_{l != j} c_l g_l g_l^H; bound it by the
        # full sum and take its largest eigenvalue by power iteration
        g = self.g[idx]
        A = 2 * np.einsum('kl,kln,klm->knm', c, g, g.conj())
        return _power_iteration(lambda v: np.einsum('knm,km->kn', A, v),
                                g.shape[0], g.shape[-1], iters)

    def project(self, W):
        nrm = np.sqrt(np.sum(np.abs(W) ** 2, axis=(-2, -1)))
        scale = np.where(nrm > self.radius, self.radius / np.where(nrm > 0, nrm, 1), 1.0)
        return W * scale[:, None, None]


class _PhaseProblem:
    """Phase-step surrogate for a batch of selections at fixed precoders.

    With ``u_l = G_l^H y_l`` and ``t_j = G_tilde w_j`` the cascaded term is
    ``y_l^H H_eff,l w_j = a_lj + sum_m conj(u_lm) t_jm phi_m``.
    """

    def __init__(self, scenario, W, y, masks, cap):
        ch = scenario.channels
        self.a = np.einsum('kln,lnp,kjp->klj', y.conj(), ch.H, W)
        self.u = np.einsum('lnm,kln->klm', ch.G.conj(), y)
        self.t = np.matmul(W, ch.G_tilde.T)
        self.const = scenario.params.sigma2 * np.sum(np.abs(y) ** 2, axis=-1)
        self.masks = masks
        self.cap = cap
        self.radius = math.sqrt(scenario.M)
        L = masks.shape[-1]
        self.off = masks[:, None, :] & ~np.eye(L, dtype=bool)

    def _z(self, phi, idx):
        X = self.u[idx].conj() * phi[:, None, :]
        return self.a[idx] + np.matmul(X, np.swapaxes(self.t[idx], -1, -2))

    def _q(self, phi, idx):
        z = self._z(phi, idx)
        L = z.shape[-1]
        sig = np.real(z[:, np.arange(L), np.arange(L)])
        interf = np.sum(np.where(self.off[idx], np.abs(z) ** 2, 0.0), axis=-1)
        return 2 * sig - self.const[idx] - interf, z

    def value(self, phi, idx):
        q, _ = self._q(phi, idx)
        return _capped(q, self.cap[idx], self.masks[idx])

    def _apply(self, C, idx):
        # sum_l sum_j C_lj u_l * conj(t_j)
        return np.sum(self.u[idx] * np.matmul(C, self.t[idx].conj()), axis=-2)

    def gradient(self, phi, idx):
        q, z = self._q(phi, idx)
        c = _weights(q, self.cap[idx], self.masks[idx])
        L = z.shape[-1]
        C = -np.where(self.off[idx], c[..., None] * z, 0.0)
        C[:, np.arange(L), np.arange(L)] = c
        return 2 * self._apply(C, idx)

    def lipschitz(self, phi, idx, iters):
        q, _ = self._q(phi, idx)
        c = _weights(q, self.cap[idx], self.masks[idx])
        u, t = self.u[idx], self.t[idx]
        D = np.where(self.off[idx], c[..., None], 0.0)

        def hess(v):
            # 2 sum_l c_l sum_{j != l} b_lj b_lj^H v
            bv = np.matmul(u.conj() * v[:, None, :], np.swapaxes(t, -1, -2))
            return 2 * np.sum(u * np.matmul(D * bv, t.conj()), axis=-2)

        return _power_iteration(hess, u.shape[0], u.shape[-1], iters)

    def project(self, phi):
        mag = np.abs(phi)
        return np.where(mag > 1.0, phi / np.where(mag > 1.0, mag, 1.0), phi)


def _power_iteration(apply, K, n, iters):
    v = np.ones((K, n), dtype=complex) / math.sqrt(max(n, 1))
    lam = np.zeros(K)
    for _ in range(iters):
        Av = apply(v)
        lam = np.sqrt(np.sum(np.abs(Av) ** 2, axis=-1))
        v = Av / np.where(lam > 0, lam, 1.0)[:, None]
    return lam


def _inner_product(g, d):
    axes = tuple(range(1, g.ndim))
    return np.sum(np.real(g.conj() * d), axis=axes)


def _sqnorm(x):
    return np.sum(np.abs(x) ** 2, axis=tuple(range(1, x.ndim)))


def _projected_ascent(problem, x0, cfg):
    """Batched projected gradient ascent with backtracking.

    Each batch row keeps its own step size, doubled after an accepted step and
    multiplied by ``cfg.backtrack`` on rejection.  A step is accepted when it
    does not decrease the objective and satisfies the usual sufficient-ascent
    bound for step size ``t``.

    Returns ``(x, F, F0, iterations, converged)`` with per-row arrays.
    """
    K = x0.shape[0]
    every = np.arange(K)
    x = problem.project(x0)
    F0 = problem.value(x, every)
    F = F0.copy()
    g = problem.gradient(x, every)
    gnorm = np.sqrt(_sqnorm(g))
    lip = problem.lipschitz(x, every, cfg.power_iterations)
    denom = np.maximum(lip, gnorm / (10 * max(problem.radius, 1e-300)))
    t = np.where(denom > 0, 1.0 / np.where(denom > 0, denom, 1.0), 0.0)

    active = (gnorm > 0) & np.isfinite(F)
    converged = ~active | ~np.isfinite(F)
    iterations = np.zeros(K, dtype=int)
    for _ in range(cfg.max_inner):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, ga, Fa = x[idx], g[idx], F[idx]
        ta = t[idx]
        x_new, F_new = xa.copy(), Fa.copy()
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(cfg.max_backtracks):
            p = np.flatnonzero(pending)
            step = ta[p].reshape((-1,) + (1,) * (xa.ndim - 1))
            cand = problem.project(xa[p] + step * ga[p])
            Fc = problem.value(cand, idx[p])
            d = cand - xa[p]
            bound = Fa[p] + _inner_product(ga[p], d) - _sqnorm(d) / (2 * ta[p])
            slack = 1e-12 * np.abs(Fa[p])
            ok = np.isfinite(Fc) & (Fc >= Fa[p]) & (Fc >= bound - slack)
            x_new[p[ok]] = cand[ok]
            F_new[p[ok]] = Fc[ok]
            pending[p[ok]] = False
            ta[p[~ok]] *= cfg.backtrack
            if not pending.any():
                break

        acc = ~pending
        iterations[idx[acc]] += 1
        dx = np.sqrt(_sqnorm(x_new - xa))
        small = (dx <= cfg.gtol * problem.radius) | (
            F_new - Fa <= cfg.ftol * np.maximum(np.abs(F_new), 1e-300))
        done = pending | (acc & small)
        converged[idx[acc & small]] = True
        x[idx] = x_new
        F[idx] = F_new
        t[idx] = np.where(acc, ta * 2.0, ta)
        active[idx[done]] = False
        upd = idx[acc & ~small]
        if upd.size:
            g[upd] = problem.gradient(x[upd], upd)
    return x, F, F0, iterations, converged


def _precoder_step(Heff, y, masks, cap, p, W0, cfg):
    prob = _PrecoderProblem(Heff, y, masks, cap, p.sigma2, p.P_max)
    return _projected_ascent(prob, np.where(masks[..., None], W0, 0.0), cfg)


def _normalize_phases(phi):
    mag = np.abs(phi)
    tiny = mag < 1e-12
    return np.where(tiny, 1.0 + 0j, phi / np.where(tiny, 1.0, mag))


def _phase_step(scenario, W, y, masks, cap, phi0, cfg):
    prob = _PhaseProblem(scenario, W, y, masks, cap)
    return _projected_ascent(prob, phi0, cfg), prob


def _matched_filter(Heff, masks, P):
    # principal right singular vector of every effective channel, equal power
    _, _, Vh = np.linalg.svd(Heff)
    v = Vh[..., 0, :].conj()
    count = masks.sum(axis=-1, keepdims=True)
    amp = np.sqrt(P / np.maximum(count, 1))
    return np.where(masks[..., None], v * amp[..., None], 0.0)


# ---------------------------------------------------------------------------
# public single-instance wrappers

def update_auxiliary(scenario, phi, W, selection=None, eps_reg=None):
    """Closed-form auxiliaries ``y_l = R_l^{-1} H_eff,l w_l + eps 1``.

    Computed for every survivor, selected or not; the ``eps`` offset keeps
    unselected survivors visible to the next precoder step.
    """
    p = scenario.params
    eps = p.regularization if eps_reg is None else eps_reg
    mask = as_mask(selection, p.L)
    W = np.asarray(W, dtype=complex)
    Heff = effective_channels(scenario, phi)
    y = _auxiliary_batch(Heff, W, mask, p.sigma2, eps)
    prob = _PrecoderProblem(Heff[None], y[None], mask[None],
                            scenario.traffic.spare[None] / p.B, p.sigma2, p.P_max)
    t, _ = prob._q(W[None], np.arange(1))
    R, rates, f = _true_objective(Heff, W, mask, p, scenario.traffic.spare)
    return AuxiliarySet(y=y, t=t[0], rates=rates, f=f, R=float(R))


def solve_precoder_subproblem(scenario, phi, y, selection, W0, config=None):
    """Maximise the capped surrogate over the precoders for fixed phases.

    Returns a :class:`SubproblemResult` whose ``value`` is the ``(L, N)``
    precoder array and whose objectives are in bits/s.
    """
    cfg = config or SolverConfig()
    p = scenario.params
    mask = as_mask(selection, p.L)
    Heff = effective_channels(scenario, phi)[None]
    cap = (scenario.traffic.spare / p.B)[None]
    W, F, F0, it, conv = _precoder_step(Heff, np.asarray(y, dtype=complex)[None],
                                       mask[None], cap, p,
                                       np.asarray(W0, dtype=complex)[None], cfg)
    return SubproblemResult(value=W[0], objective=p.B * F[0],
                            initial_objective=p.B * F0[0], iterations=int(it[0]),
                            converged=bool(conv[0]))


def solve_phase_subproblem(scenario, W, y, selection, phi0, config=None):
    """Maximise the capped surrogate over relaxed phases, then normalise.

    ``relaxed``/``relaxed_objective`` describe the point before the
    unit-modulus normalisation, ``value``/``objective`` the point after it.
    """
    cfg = config or SolverConfig()
    p = scenario.params
    mask = as_mask(selection, p.L)
    phi0 = np.asarray(phi0, dtype=complex)
    if scenario.M == 0:
        return SubproblemResult(value=phi0.copy(), objective=0.0, initial_objective=0.0,
                                iterations=0, converged=True, relaxed=phi0.copy(),
                                relaxed_objective=0.0)
    cap = (scenario.traffic.spare / p.B)[None]
    (phi, F, F0, it, conv), prob = _phase_step(
        scenario, np.asarray(W, dtype=complex)[None], np.asarray(y, dtype=complex)[None],
        mask[None], cap, phi0[None], cfg)
    normed = _normalize_phases(phi)
    F_norm = prob.value(normed, np.arange(1))
    return SubproblemResult(value=normed[0], objective=p.B * F_norm[0],
                            initial_objective=p.B * F0[0], iterations=int(it[0]),
                            converged=bool(conv[0]), relaxed=phi[0],
                            relaxed_objective=p.B * F[0])


# ---------------------------------------------------------------------------
# alternating loop

@dataclass
class _BatchOutcome:
    best_R: np.ndarray
    best_W: np.ndarray
    best_phi: np.ndarray
    traces: list
    dphi: list
    dw: list
    best_traces: list
    iterations: np.ndarray
    converged: np.ndarray
    inner_unconverged: int


def _run_batch(scenario, masks, phi0, cfg, W0=None):
    """Alternate precoder and phase steps for every row of ``masks``."""
    p = scenario.params
    K, L = masks.shape
    E = cfg.E or p.E
    eps = p.regularization if cfg.eps_reg is None else cfg.eps_reg
    spare = scenario.traffic.spare
    cap = np.broadcast_to(spare / p.B, (K, L))

    phi = np.broadcast_to(phi0, (K, scenario.M)).astype(complex)
    Heff = effective_channels(scenario, phi)
    W = _matched_filter(Heff, masks, p.P_max) if W0 is None else W0.copy()
    y_phi = _auxiliary_batch(Heff, W, masks, p.sigma2, eps)

    best_R, _, _ = _true_objective(Heff, W, masks, p, spare)
    best_W, best_phi = W.copy(), phi.copy()
    traces = [[] for _ in range(K)]
    dphi = [[] for _ in range(K)]
    dw = [[] for _ in range(K)]
    best_traces = [[] for _ in range(K)]
    prev_R = best_R.copy()
    iterations = np.zeros(K, dtype=int)
    converged = np.zeros(K, dtype=bool)
    active = np.ones(K, dtype=bool)
    unconverged_inner = 0

    def keep_best(rows, R, Wc, phic):
        better = R > best_R[rows]
        sel = rows[better]
        best_R[sel] = R[better]
        best_W[sel] = Wc[better]
        best_phi[sel] = phic[better]

    for it in range(E):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        m, c = masks[rows], cap[rows]
        W_prev, phi_prev = W[rows], phi[rows]

        W_new, _, _, _, conv1 = _precoder_step(Heff[rows], y_phi[rows], m, c, p,
                                               W_prev, cfg)
        R_mid, _, _ = _true_objective(Heff[rows], W_new, m, p, spare)
        keep_best(rows, R_mid, W_new, phi_prev)

        y_w = _auxiliary_batch(Heff[rows], W_new, m, p.sigma2, eps)
        if scenario.M:
            (phi_rel, _, _, _, conv2), _ = _phase_step(scenario, W_new, y_w, m, c,
                                                        phi_prev, cfg)
            phi_new = _normalize_phases(phi_rel)
        else:
            phi_new, conv2 = phi_prev, np.ones(rows.size, dtype=bool)
        unconverged_inner += int((~conv1).sum() + (~conv2).sum())

        Heff_new = effective_channels(scenario, phi_new)
        y_phi[rows] = _auxiliary_batch(Heff_new, W_new, m, p.sigma2, eps)
        R_end, _, _ = _true_objective(Heff_new, W_new, m, p, spare)
        keep_best(rows, R_end, W_new, phi_new)

        if it == 0:
            d_phi = np.zeros(rows.size)
            d_w = np.zeros(rows.size)
        else:
            d_phi = np.sqrt(_sqnorm(phi_new - phi_prev))
            d_w = np.sum(np.sqrt(np.sum(np.abs(W_new - W_prev) ** 2, axis=-1)), axis=-1)
        for i, k in enumerate(rows):
            traces[k].append(R_end[i])
            dphi[k].append(d_phi[i])
            dw[k].append(d_w[i])
            best_traces[k].append(best_R[k])

        W[rows] = W_new
        phi[rows] = phi_new
        Heff[rows] = Heff_new
        iterations[rows] += 1
        change = np.abs(R_end - prev_R[rows])
        prev_R[rows] = R_end
        if cfg.early_stop and it > 0:
            done = change <= cfg.tol_outer * np.maximum(np.abs(R_end), 1e-300)
            done |= R_end <= 0
            converged[rows[done]] = True
            active[rows[done]] = False
    if not cfg.early_stop:
        converged[:] = True

    return _BatchOutcome(best_R=best_R, best_W=best_W, best_phi=best_phi,
                         traces=traces, dphi=dphi, dw=dw, best_traces=best_traces,
                         iterations=iterations, converged=converged,
                         inner_unconverged=unconverged_inner)


def _result_from(scenario, outcome, k, selection, strategy, start, candidates=None):
    p = scenario.params
    mask = as_mask(selection, p.L)
    phi = outcome.best_phi[k].copy()
    W = outcome.best_W[k].copy()
    Heff = effective_channels(scenario, phi)
    R, rates, f = _true_objective(Heff, W, mask, p, scenario.traffic.spare)
    return SolveResult(selection=tuple(int(i) for i in selection), phi=phi, W=W,
                       R=float(R), psi=survivability(float(R), scenario.traffic.C_d),
                       rates=rates, f=f,
                       objective_trace=np.array(outcome.traces[k]),
                       phase_change_trace=np.array(outcome.dphi[k]),
                       precoder_change_trace=np.array(outcome.dw[k]),
                       best_trace=np.array(outcome.best_traces[k]),
                       iterations=int(outcome.iterations[k]),
                       wall_time=time.perf_counter() - start, strategy=strategy,
                       converged=bool(outcome.converged[k]),
                       inner_unconverged=outcome.inner_unconverged,
                       candidates=candidates or {})


def _degenerate(scenario):
    return not np.any(scenario.traffic.spare > 0) or scenario.params.P_max <= 0


def _degenerate_result(scenario, selection, phi0, strategy, start):
    p = scenario.params
    empty = np.zeros(0)
    return SolveResult(selection=tuple(selection), phi=phi0.copy(),
                       W=np.zeros((p.L, p.N), dtype=complex), R=0.0,
                       psi=survivability(0.0, scenario.traffic.C_d),
                       rates=np.zeros(p.L), f=np.zeros(p.L), objective_trace=empty,
                       phase_change_trace=empty, precoder_change_trace=empty,
                       best_trace=empty, iterations=0,
                       wall_time=time.perf_counter() - start, strategy=strategy)


def _masks_for(selections, L):
    masks = np.zeros((len(selections), L), dtype=bool)
    for k, s in enumerate(selections):
        masks[k, list(s)] = True
    return masks


def solve_fixed_selection(scenario, selection, config=None, rng=None, phi0=None):
    """Run the alternating loop for one fixed selection.

    Phases start from ``phi0`` if given, otherwise uniformly random
    unit-modulus values drawn from ``rng``.
    """
    cfg = config or SolverConfig()
    start = time.perf_counter()
    p = scenario.params
    selection = tuple(sorted(int(i) for i in np.flatnonzero(as_mask(selection, p.L))))
    if not selection or len(selection) > p.N:
        raise InvalidInput(f'selection must have between 1 and N={p.N} members')
    if phi0 is None:
        phi0 = random_phases(rng if rng is not None else np.random.default_rng(0), p.M)
    if _degenerate(scenario):
        return _degenerate_result(scenario, selection, phi0, cfg.strategy, start)
    outcome = _run_batch(scenario, _masks_for([selection], p.L), phi0, cfg)
    return _result_from(scenario, outcome, 0, selection, cfg.strategy, start)


def _run_selections(scenario, selections, phi0, cfg):
    return _run_batch(scenario, _masks_for(selections, scenario.L), phi0, cfg)


def _outer_enumeration(scenario, phi0, cfg, start):
    selections = enumerate_selections(scenario.L, scenario.N)
    outcome = _run_selections(scenario, selections, phi0, cfg)
    # first maximiser in canonical order
    k = int(np.argmax(outcome.best_R))
    cands = {s: float(r) for s, r in zip(selections, outcome.best_R)}
    return _result_from(scenario, outcome, k, selections[k], cfg.strategy, start, cands)


def _greedy(scenario, phi0, cfg, start):
    L, N = scenario.L, scenario.N
    current, current_R, best = (), 0.0, None
    cands = {}
    while len(current) < N:
        trial = [tuple(sorted(current + (l,))) for l in range(L) if l not in current]
        outcome = _run_selections(scenario, trial, phi0, cfg)
        cands.update({s: float(r) for s, r in zip(trial, outcome.best_R)})
        k = int(np.argmax(outcome.best_R))
        if best is not None and outcome.best_R[k] <= current_R:
            break
        current, current_R = trial[k], float(outcome.best_R[k])
        best = (outcome, k, current)
    outcome, k, sel = best
    return _result_from(scenario, outcome, k, sel, cfg.strategy, start, cands)


def _per_iteration(scenario, phi0, cfg, start):
    """Re-pick the selection by enumeration inside every subproblem."""
    p = scenario.params
    spare = scenario.traffic.spare
    eps = p.regularization if cfg.eps_reg is None else cfg.eps_reg
    selections = enumerate_selections(p.L, p.N)
    masks = _masks_for(selections, p.L)
    K = len(selections)
    cap = np.broadcast_to(spare / p.B, (K, p.L))
    inner = replace(cfg, strategy=Strategy.PER_ITERATION_ENUMERATION)

    phi = phi0.astype(complex)
    Heff1 = effective_channels(scenario, phi)
    Heff = np.broadcast_to(Heff1, (K,) + Heff1.shape).copy()
    W_all = _matched_filter(Heff, masks, p.P_max)
    R_all, _, _ = _true_objective(Heff, W_all, masks, p, spare)
    k = int(np.argmax(R_all))
    W, mask = W_all[k], masks[k]
    best = (float(R_all[k]), k, W.copy(), phi.copy())
    traces, dphi, dw, best_traces = [], [], [], []
    prev_R = best[0]
    converged = False
    E = cfg.E or p.E

    def warm_starts(W, phi_heff):
        # keep current precoders; newcomers get an equal-power matched filter
        mf = _matched_filter(phi_heff, masks, p.P_max)
        Wk = np.where(masks[..., None] & (np.abs(W) > 0).any(-1)[None, :, None],
                      W[None], mf)
        Wk = np.where(masks[..., None], Wk, 0.0)
        nrm = np.sqrt(_sqnorm(Wk))
        scale = np.where(nrm > math.sqrt(p.P_max), math.sqrt(p.P_max) / nrm, 1.0)
        return Wk * scale[:, None, None]

    it = 0
    for it in range(E):
        W_prev, phi_prev = W, phi
        Wk = warm_starts(W, Heff)
        y = _auxiliary_batch(Heff, Wk, masks, p.sigma2, eps)
        Wk, _, _, _, _ = _precoder_step(Heff, y, masks, cap, p, Wk, inner)
        R_k, _, _ = _true_objective(Heff, Wk, masks, p, spare)
        k = int(np.argmax(R_k))
        W, mask = Wk[k], masks[k]
        if R_k[k] > best[0]:
            best = (float(R_k[k]), k, W.copy(), phi.copy())

        if scenario.M:
            Wm = np.where(masks[..., None], W[None], 0.0)
            y_w = _auxiliary_batch(Heff, Wm, masks, p.sigma2, eps)
            phis = np.broadcast_to(phi, (K, p.M)).copy()
            (phi_rel, _, _, _, _), _ = _phase_step(scenario, Wm, y_w, masks, cap, phis, inner)
            phi_k = _normalize_phases(phi_rel)
            Heff_k = effective_channels(scenario, phi_k)
            R_k, _, _ = _true_objective(Heff_k, Wm, masks, p, spare)
            k = int(np.argmax(R_k))
            W, mask, phi = Wm[k], masks[k], phi_k[k]
            Heff = np.broadcast_to(Heff_k[k], Heff.shape).copy()
        R_end, _, _ = _true_objective(Heff[0], W, mask, p, spare)
        R_end = float(R_end)
        if R_end > best[0]:
            best = (R_end, k, W.copy(), phi.copy())
        traces.append(R_end)
        best_traces.append(best[0])
        dphi.append(0.0 if it == 0 else float(np.sqrt(_sqnorm(phi[None] - phi_prev[None]))[0]))
        dw.append(0.0 if it == 0 else float(np.sum(np.linalg.norm(W - W_prev, axis=-1))))
        if cfg.early_stop and it > 0 and (
                abs(R_end - prev_R) <= cfg.tol_outer * max(abs(R_end), 1e-300)):
            converged = True
            break
        prev_R = R_end

    R_best, k_best, W_best, phi_best = best
    sel = tuple(int(i) for i in np.flatnonzero(np.abs(W_best).sum(-1) > 0)) or selections[k_best]
    outcome = _BatchOutcome(best_R=np.array([R_best]), best_W=W_best[None],
                            best_phi=phi_best[None], traces=[traces], dphi=[dphi],
                            dw=[dw], best_traces=[best_traces],
                            iterations=np.array([len(traces)]),
                            converged=np.array([converged or not cfg.early_stop]),
                            inner_unconverged=0)
    return _result_from(scenario, outcome, 0, sel, cfg.strategy, start)


def run_algorithm(scenario, config=None, rng=None, phi0=None):
    """Jointly choose receiving survivors, precoders and RIS phases.

    Parameters
    ----------
    scenario : Scenario
    config : SolverConfig, optional
        ``config.strategy`` picks how the binary selection is handled.
    rng : numpy.random.Generator, optional
        Source of the random initial phases (ignored when ``phi0`` is given).

    Returns
    -------
    SolveResult
    """
    cfg = config or SolverConfig()
    start = time.perf_counter()
    p = scenario.params
    if phi0 is None:
        phi0 = random_phases(rng if rng is not None else np.random.default_rng(0), p.M)
    phi0 = np.asarray(phi0, dtype=complex)
    if _degenerate(scenario):
        return _degenerate_result(scenario, (0,), phi0, cfg.strategy, start)
    if cfg.strategy is Strategy.OUTER_ENUMERATION:
        result = _outer_enumeration(scenario, phi0, cfg, start)
    elif cfg.strategy is Strategy.GREEDY:
        result = _greedy(scenario, phi0, cfg, start)
    else:
        result = _per_iteration(scenario, phi0, cfg, start)
    log.debug('strategy=%s selection=%s R=%.6g psi=%.4f iters=%d (%.2fs)',
              cfg.strategy.value, result.selection, result.R, result.psi,
              result.iterations, result.wall_time)
    return result
