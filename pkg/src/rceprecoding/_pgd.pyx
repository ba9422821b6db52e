# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled projected gradient solver; contract matches ``_pgd_py.solve_batch``.

Complex data is split into real and imaginary planes so the inner loops are
plain contiguous double arithmetic.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

# matches amplifier.INWARD
cdef double INWARD = 1.0 - 2.0 ** -50

cnp.import_array()


cdef struct Problem:
    Py_ssize_t M
    Py_ssize_t N
    const double *ar      # A, row-major M x N
    const double *ai
    const double *br      # A^H, row-major N x M
    const double *bi
    double a_sat
    bint constant_envelope
    double eps
    long max_iter


cdef inline double residual(const Problem *p, const double *xr, const double *xi,
                            const double *sr, const double *si,
                            double *rr, double *ri) noexcept nogil:
    cdef Py_ssize_t m, n, N = p.N
    cdef const double *ar
    cdef const double *ai
    cdef double accr, acci, total = 0.0
    for m in range(p.M):
        ar = p.ar + m * N
        ai = p.ai + m * N
        accr = 0.0
        acci = 0.0
        for n in range(N):
            accr += ar[n] * xr[n] - ai[n] * xi[n]
            acci += ar[n] * xi[n] + ai[n] * xr[n]
        accr -= sr[m]
        acci -= si[m]
        rr[m] = accr
        ri[m] = acci
        total += accr * accr + acci * acci
    return total


cdef void solve_one(const Problem *p, const double *sr, const double *si,
                    double *xr, double *xi, double *work, double mu,
                    double *phi_out, long *iters_out, double *err_out, long *halvings_out) noexcept nogil:
    cdef Py_ssize_t M = p.M, N = p.N, m, n
    cdef double *xnr = work
    cdef double *xni = work + N
    cdef double *rr = work + 2 * N
    cdef double *ri = rr + M
    cdef double *rnr = ri + M
    cdef double *rni = rnr + M
    cdef const double *br
    cdef const double *bi
    cdef double gr, gi, vr, vi, mag, scale, dr, di
    cdef double phi, phin, diff, nx, err = INFINITY
    cdef long it = 0, halvings = 0

    phi = residual(p, xr, xi, sr, si, rr, ri)
    while err > p.eps and it < p.max_iter:
        diff = 0.0
        nx = 0.0
        for n in range(N):
            br = p.br + n * M
            bi = p.bi + n * M
            gr = 0.0
            gi = 0.0
            for m in range(M):
                gr += br[m] * rr[m] - bi[m] * ri[m]
                gi += br[m] * ri[m] + bi[m] * rr[m]
            vr = xr[n] - mu * gr
            vi = xi[n] - mu * gi
            mag = sqrt(vr * vr + vi * vi)
            if p.constant_envelope:
                if mag > 0.0:
                    scale = p.a_sat / mag
                    vr *= scale
                    vi *= scale
                else:
                    # previous iterate is on the circle and supplies the phase
                    vr = xr[n]
                    vi = xi[n]
            elif mag > p.a_sat:
                scale = p.a_sat * INWARD / mag
                vr *= scale
                vi *= scale
            xnr[n] = vr
            xni[n] = vi
            dr = vr - xr[n]
            di = vi - xi[n]
            diff += dr * dr + di * di
            nx += xr[n] * xr[n] + xi[n] * xi[n]
        phin = residual(p, xnr, xni, sr, si, rnr, rni)
        err = sqrt(diff / nx) if nx > 0.0 else sqrt(diff)
        it += 1
        if phin > phi:
            mu *= 0.5
            halvings += 1
        else:
            for n in range(N):
                xr[n] = xnr[n]
                xi[n] = xni[n]
            for m in range(M):
                rr[m] = rnr[m]
                ri[m] = rni[m]
            phi = phin
    phi_out[0] = phi
    iters_out[0] = it
    err_out[0] = err
    halvings_out[0] = halvings


def solve_batch(A, S, X0, double a_sat, bint constant_envelope, double mu0, double eps, long max_iter):
    A = np.asarray(A, dtype=np.complex128)
    S = np.asarray(S, dtype=np.complex128)
    X0 = np.asarray(X0, dtype=np.complex128)
    cdef Py_ssize_t K = X0.shape[0], M = A.shape[0], N = A.shape[1], k
    if K == 0:
        return (X0.copy(), np.empty(0), np.empty(0, dtype=np.int64), np.empty(0),
                np.empty(0, dtype=np.int64))

    cdef double[:, ::1] ar = np.ascontiguousarray(A.real)
    cdef double[:, ::1] ai = np.ascontiguousarray(A.imag)
    cdef double[:, ::1] bhr = np.ascontiguousarray(A.real.T)
    cdef double[:, ::1] bhi = np.ascontiguousarray(-A.imag.T)
    cdef double[:, ::1] sr = np.ascontiguousarray(S.real)
    cdef double[:, ::1] si = np.ascontiguousarray(S.imag)
    cdef double[:, ::1] xr = np.array(X0.real, order="C")
    cdef double[:, ::1] xi = np.array(X0.imag, order="C")
    cdef double[::1] work = np.empty(2 * N + 4 * M, dtype=np.float64)

    phi_arr = np.empty(K, dtype=np.float64)
    err_arr = np.empty(K, dtype=np.float64)
    iters_arr = np.empty(K, dtype=np.int64)
    halv_arr = np.empty(K, dtype=np.int64)
    cdef double[::1] phi = phi_arr
    cdef double[::1] err = err_arr
    cdef long long[::1] iters = iters_arr
    cdef long long[::1] halv = halv_arr
    cdef long it_k, h_k

    cdef Problem p
    p.M = M
    p.N = N
    p.ar = &ar[0, 0]
    p.ai = &ai[0, 0]
    p.br = &bhr[0, 0]
    p.bi = &bhi[0, 0]
    p.a_sat = a_sat
    p.constant_envelope = constant_envelope
    p.eps = eps
    p.max_iter = max_iter

    with nogil:
        for k in range(K):
            solve_one(&p, &sr[k, 0], &si[k, 0], &xr[k, 0], &xi[k, 0], &work[0], mu0,
                      &phi[k], &it_k, &err[k], &h_k)
            iters[k] = it_k
            halv[k] = h_k
    X = np.asarray(xr) + 1j * np.asarray(xi)
    return X, phi_arr, iters_arr, err_arr, halv_arr
