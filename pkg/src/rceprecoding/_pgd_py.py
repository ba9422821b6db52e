"""Pure-numpy projected gradient solver, batched over symbol vectors.

Same contract as the compiled ``_pgd`` extension; used when the extension
is unavailable or ``RCEPRECODING_PURE=1``.
"""

import numpy as np

from .amplifier import shrink_to_disk


def _project(v, prev, a_sat, constant_envelope):
    mag = np.abs(v)
    if constant_envelope:
        # the previous iterate already sits on the circle, so it supplies the phase for zeros
        safe = np.where(mag > 0, mag, 1.0)
        return np.where(mag > 0, v * (a_sat / safe), prev)
    return shrink_to_disk(v, a_sat)


def solve_batch(A, S, X0, a_sat, constant_envelope, mu0, eps, max_iter):
    """Minimize ``||A x_k - s_k||^2`` per row over disks or circles of radius ``a_sat``.

    Each row runs its own descent: trial step ``x - mu A^H (A x - s)``,
    projection, relative-change test against ``eps``, and step halving on a
    cost increase (the trial is then discarded).

    Returns:
        ``(X, residual, iterations, err, halvings)`` with ``residual`` the
        squared residual norm at the returned ``X``.
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    S = np.ascontiguousarray(S, dtype=np.complex128)
    X = np.array(X0, dtype=np.complex128, copy=True)
    K = X.shape[0]
    At = A.T
    Ac = A.conj()

    R = X @ At - S
    phi = (np.abs(R) ** 2).sum(axis=1)
    mu = np.full(K, float(mu0))
    iters = np.zeros(K, dtype=np.int64)
    halvings = np.zeros(K, dtype=np.int64)
    err = np.full(K, np.inf)
    active = np.arange(K) if max_iter > 0 else np.arange(0)

    while active.size:
        x = X[active]
        v = x - mu[active, None] * (R[active] @ Ac)
        xn = _project(v, x, a_sat, constant_envelope)
        rn = xn @ At - S[active]
        phin = (np.abs(rn) ** 2).sum(axis=1)
        diff = np.sqrt((np.abs(xn - x) ** 2).sum(axis=1))
        nx = np.sqrt((np.abs(x) ** 2).sum(axis=1))
        e = np.where(nx > 0, diff / np.where(nx > 0, nx, 1.0), diff)
        err[active] = e
        iters[active] += 1

        reject = phin > phi[active]
        acc = active[~reject]
        X[acc] = xn[~reject]
        R[acc] = rn[~reject]
        phi[acc] = phin[~reject]
        rej = active[reject]
        mu[rej] *= 0.5
        halvings[rej] += 1

        keep = (e > eps) & (iters[active] < max_iter)
        active = active[keep]

    return X, phi, iters, err, halvings
