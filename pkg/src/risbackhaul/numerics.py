"""Complex linear-algebra kernels and seeded sampling.

Every random draw in the package goes through a :class:`numpy.random.Generator`
created by :func:`make_rng`; there is no module-level random state.
"""

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NumericalFailure

# Slack of a few ulps so that projecting a projected point is a no-op.
_PROJ_SLACK = 1.0 + 4 * np.finfo(float).eps

__all__ = ['make_rng', 'sample_cn', 'hermitian_solve', 'project_ball',
           'project_unit_disk', 'fro_norm', 'vec_norm']


def make_rng(seed, *stream):
    """Return a PCG64 generator for ``seed`` and an optional sub-stream key.

    Generators built from the same ``(seed, *stream)`` produce identical
    sequences; different stream keys give statistically independent ones.
    """
    seed = int(seed)
    if seed < 0:
        raise InvalidInput(f'seed must be non-negative, got {seed}')
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def sample_cn(rng, rows, cols=None):
    """Draw i.i.d. CN(0, 1) entries (real and imaginary variance 1/2 each)."""
    shape = (rows,) if cols is None else (rows, cols)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def hermitian_solve(A, B):
    """Solve ``A X = B`` for Hermitian positive-definite ``A``.

    ``A`` may be a stack of matrices with shape ``(..., N, N)``; ``B`` is then
    either ``(..., N, k)`` or a stack of vectors ``(..., N)``.

    Raises
    ------
    InvalidInput
        If any entry of ``A`` or ``B`` is not finite.
    NumericalFailure
        If the Cholesky factorisation fails even after one diagonal-loaded
        retry.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise InvalidInput('hermitian_solve received non-finite entries')
    vector_rhs = B.ndim == A.ndim - 1
    if vector_rhs:
        B = B[..., None]

    try:
        X = _cholesky_solve(A, B)
    except np.linalg.LinAlgError:
        n = A.shape[-1]
        load = 1e-12 * np.real(np.trace(A, axis1=-2, axis2=-1)) / n
        A_loaded = A + load[..., None, None] * np.eye(n)
        try:
            X = _cholesky_solve(A_loaded, B)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(
                'matrix is not numerically positive definite') from exc
    return X[..., 0] if vector_rhs else X


def _cholesky_solve(A, B):
    if A.ndim == 2:
        c = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        return scipy.linalg.cho_solve(c, B, check_finite=False)
    Lc = np.linalg.cholesky(A)
    Z = np.linalg.solve(Lc, B)
    return np.linalg.solve(np.conj(np.swapaxes(Lc, -1, -2)), Z)


def project_ball(v, radius):
    """Euclidean projection of ``v`` onto the ball of the given radius."""
    if not np.isfinite(radius) or radius < 0:
        raise InvalidInput(f'radius must be finite and >= 0, got {radius}')
    v = np.asarray(v)
    nrm = np.linalg.norm(v)
    if nrm <= radius * _PROJ_SLACK:
        return v
    return v * (radius / nrm)


def project_unit_disk(phi):
    """Rescale entries with modulus above one onto the unit circle."""
    phi = np.asarray(phi)
    mag = np.abs(phi)
    out = mag > _PROJ_SLACK
    return np.where(out, phi / np.where(out, mag, 1.0), phi)


def fro_norm(A):
    return float(np.linalg.norm(np.asarray(A).reshape(-1)))


def vec_norm(v):
    return float(np.linalg.norm(np.asarray(v).reshape(-1)))
