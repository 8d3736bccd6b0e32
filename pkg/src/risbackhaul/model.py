"""Rates, survivability and the quadratic-transform surrogate.

Conventions
-----------
* Precoders are stored as an ``(L, N)`` array ``W`` whose row ``l`` is the
  vector sent towards survivor ``l``; rows of unselected survivors are zero.
* Phase configurations are length-``M`` complex vectors ``phi``, i.e. the
  diagonal of the RIS reflection matrix.
* A selection is a boolean mask of length ``L`` (index iterables are accepted
  wherever a selection is expected).
* Gradients of real functions of complex variables are returned as
  ``df/dRe(x) + 1j * df/dIm(x)``, so a gradient step is ``x + t * grad``.

The ``*_batch`` kernels accept arbitrary leading batch dimensions and are what
the optimiser uses; the per-survivor functions are thin wrappers over them.
"""

import numpy as np

from .errors import InvalidInput
from .numerics import hermitian_solve

__all__ = ['as_mask', 'effective_channel', 'effective_channels',
           'cascade_coefficients', 'interference_covariance',
           'achievable_rate', 'achievable_rates', 'total_redistributed',
           'survivability', 'surrogate_value', 'surrogate_gradients',
           'capped_objective']


def as_mask(selection, L):
    """Convert a selection (mask or index iterable) to a boolean mask."""
    if selection is None:
        return np.ones(L, dtype=bool)
    arr = np.asarray(selection)
    if arr.dtype == bool:
        if arr.shape[-1] != L:
            raise InvalidInput(f'selection mask has length {arr.shape[-1]}, expected {L}')
        return arr
    mask = np.zeros(L, dtype=bool)
    idx = np.asarray(list(selection), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= L):
        raise InvalidInput(f'selection indices out of range for L={L}')
    mask[idx] = True
    return mask


def effective_channels(scenario, phi):
    """All effective channels ``H_l + G_l diag(phi) G_tilde``.

    ``phi`` may carry leading batch dimensions; the result has shape
    ``phi.shape[:-1] + (L, N, N)``.
    """
    ch = scenario.channels
    phi = np.asarray(phi, dtype=complex)
    if scenario.M == 0:
        return np.broadcast_to(ch.H, phi.shape[:-1] + ch.H.shape).copy()
    # G_l diag(phi) G_tilde, contracted over the RIS elements
    cascade = np.einsum('lnm,...m,mp->...lnp', ch.G, phi, ch.G_tilde, optimize=True)
    return ch.H + cascade


def effective_channel(scenario, l, phi):
    """Effective channel towards survivor ``l`` (``N x N``)."""
    ch = scenario.channels
    if scenario.M == 0:
        return ch.H[l].copy()
    return ch.H[l] + (ch.G[l] * np.asarray(phi)) @ ch.G_tilde


def cascade_coefficients(scenario, l, y, w):
    """Split ``y^H H_eff,l(phi) w`` into ``a + b^H phi``.

    Uses ``G_l diag(phi) G_tilde w = G_l diag(G_tilde w) phi`` so that the
    phase-dependent part is linear in ``phi``.

    Returns
    -------
    a : complex
        ``y^H H_l w``.
    b : ndarray, shape (M,)
        ``(y^H G_l diag(G_tilde w))^H``.
    """
    ch = scenario.channels
    y = np.asarray(y, dtype=complex)
    w = np.asarray(w, dtype=complex)
    a = np.vdot(y, ch.H[l] @ w)
    b = (ch.G[l].conj().T @ y) * np.conj(ch.G_tilde @ w)
    return a, b


def _interference_batch(Heff, W, mask, sigma2):
    """Signals and covariances for every survivor.

    Returns ``S`` with ``S[..., l, j, :] = H_eff,l w_j`` and the stacked
    covariances ``R[..., l, :, :]``.
    """
    n = Heff.shape[-1]
    S = np.einsum('...lnp,...jp->...ljn', Heff, W)
    weight = mask.astype(float)[..., None, :] * (1.0 - np.eye(mask.shape[-1]))
    R = np.einsum('...lj,...ljn,...ljm->...lnm', weight, S, S.conj())
    R = R + sigma2 * np.eye(n)
    return S, R


def sinr_batch(Heff, W, mask, sigma2):
    """MMSE-combining SINR for every survivor (zero where ``w_l = 0``)."""
    S, R = _interference_batch(Heff, W, mask, sigma2)
    L = Heff.shape[-3]
    sig = S[..., np.arange(L), np.arange(L), :]
    x = hermitian_solve(R, sig)
    return np.maximum(np.real(np.sum(sig.conj() * x, axis=-1)), 0.0)


def rates_batch(Heff, W, mask, sigma2, B):
    return B * np.log2(1.0 + sinr_batch(Heff, W, mask, sigma2))


def interference_covariance(scenario, l, phi, W, selection=None):
    """Interference-plus-noise covariance seen by survivor ``l``.

    The sum runs over the selected survivors ``j != l``, each interferer
    propagating over survivor ``l``'s own effective channel.
    """
    p = scenario.params
    mask = as_mask(selection, p.L)
    Heff = effective_channel(scenario, l, phi)
    R = p.sigma2 * np.eye(p.N, dtype=complex)
    for j in np.flatnonzero(mask):
        if j != l:
            s = Heff @ W[j]
            R += np.outer(s, s.conj())
    return R


def achievable_rate(scenario, l, phi, W, selection=None):
    """Rate (bits/s) survivor ``l`` can decode with MMSE combining."""
    p = scenario.params
    w = np.asarray(W[l])
    if not np.any(w):
        return 0.0
    Heff = effective_channel(scenario, l, phi)
    R = interference_covariance(scenario, l, phi, W, selection)
    s = Heff @ w
    sinr = max(float(np.real(np.vdot(s, hermitian_solve(R, s)))), 0.0)
    return p.B * np.log2(1.0 + sinr)


def achievable_rates(scenario, phi, W, selection=None):
    """Vector of all ``L`` rates in bits/s."""
    p = scenario.params
    mask = as_mask(selection, p.L)
    Heff = effective_channels(scenario, phi)
    return rates_batch(Heff, np.asarray(W, dtype=complex), mask, p.sigma2, p.B)


def credited_traffic(rates, mask, spare):
    """``f_l = beta_l * min(r_l, spare_l)``; works on batched arrays."""
    return np.where(mask, np.minimum(rates, spare), 0.0)


def total_redistributed(scenario, phi, W, selection=None):
    """Total resolvable traffic ``R`` and the per-survivor credited ``f_l``."""
    mask = as_mask(selection, scenario.L)
    f = credited_traffic(achievable_rates(scenario, phi, W, mask), mask,
                         scenario.traffic.spare)
    return float(f.sum()), f


def survivability(R, C_d):
    """Fraction of the disconnected traffic that is resolved, capped at 1."""
    if R < 0 or C_d < 0:
        raise InvalidInput('survivability needs non-negative R and C_d')
    if C_d == 0:
        return 1.0
    return min(1.0, R / C_d)


def surrogate_value(scenario, l, y, phi, W, selection=None):
    """Quadratic-transform lower bound on survivor ``l``'s SINR.

    ``q_l = 2 Re{y^H H_eff,l w_l} - y^H R_l y``.  It never exceeds the SINR
    and equals it at ``y = R_l^{-1} H_eff,l w_l``.
    """
    Heff = effective_channel(scenario, l, phi)
    R = interference_covariance(scenario, l, phi, W, selection)
    y = np.asarray(y, dtype=complex)
    return float(2 * np.real(np.vdot(y, Heff @ W[l])) - np.real(np.vdot(y, R @ y)))


def surrogate_gradients(scenario, l, y, phi, W, selection=None):
    """Gradients of :func:`surrogate_value` w.r.t. every ``w_j`` and ``phi``.

    Returns
    -------
    grad_W : ndarray, shape (L, N)
        Zero rows for unselected interferers.
    grad_phi : ndarray, shape (M,)
    """
    p = scenario.params
    mask = as_mask(selection, p.L)
    W = np.asarray(W, dtype=complex)
    y = np.asarray(y, dtype=complex)
    g = effective_channel(scenario, l, phi).conj().T @ y

    grad_W = np.zeros_like(W)
    grad_phi = np.zeros(p.M, dtype=complex)
    a, b = cascade_coefficients(scenario, l, y, W[l])
    grad_W[l] = 2 * g
    grad_phi += 2 * b
    for j in np.flatnonzero(mask):
        if j == l:
            continue
        z = np.vdot(g, W[j])
        grad_W[j] = -2 * g * z
        a, b = cascade_coefficients(scenario, l, y, W[j])
        grad_phi -= 2 * b * z
    return grad_W, grad_phi


def capped_objective(q, spare, mask, B):
    """Capped surrogate objective ``sum_l min(B log2(1 + q_l), spare_l)``.

    Entries with ``q_l <= -1`` lie outside the domain and make the whole sum
    ``-inf``.  Works on batched arrays (reduction over the last axis).
    """
    q = np.where(mask, q, 0.0)
    with np.errstate(invalid='ignore', divide='ignore'):
        rate = B * np.log2(1.0 + q)
    rate = np.where(q > -1.0, rate, -np.inf)
    val = np.where(mask, np.minimum(rate, spare), 0.0)
    return val.sum(axis=-1)
