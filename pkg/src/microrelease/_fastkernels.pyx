# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: batch release evaluation and coupled power sums.

Semantics match :mod:`microrelease._purekernels`; the loops here add early
exits that only drop terms bounded below one percent of the tail tolerance,
and evaluate the exponential ladders exp(-b*n^2*t) by recurrence
(q^{n^2} = q^{(n-1)^2} * q^{2n-1}) instead of calling exp per term.
"""
import numpy as np

from libc.math cimport exp, log, fabs

cdef double PI2 = 3.14159265358979323846 ** 2

BACKEND_NAME = "compiled"


def release_matrix(xs_in, times_in, double d_tilde, mu_in, cm_in,
                   int max_terms, double tail_tol):
    """End-to-end cumulative release for every (sample, time) pair."""
    xs_arr = np.ascontiguousarray(xs_in, dtype=np.float64)
    t_arr = np.ascontiguousarray(times_in, dtype=np.float64)
    mu_arr = np.ascontiguousarray(mu_in, dtype=np.float64)
    cm_arr = np.ascontiguousarray(cm_in, dtype=np.float64)
    out_arr = np.empty((xs_arr.shape[0], t_arr.shape[0]), dtype=np.float64)

    cdef double[::1] xs = xs_arr
    cdef double[::1] times = t_arr
    cdef double[::1] mu = mu_arr
    cdef double[::1] cm = cm_arr
    cdef double[:, ::1] out = out_arr
    cdef int S = xs.shape[0], T = times.shape[0], M = mu.shape[0]
    cdef int i, j, n, m
    cdef double t, x, b1x, q, q2, A, ladder, lam, an, acc, inner
    cdef double den, g, term, s_b, s_bt, bound, exit_eps
    cdef double[::1] B = np.empty(M, dtype=np.float64)

    exit_eps = 0.01 * tail_tol
    for j in range(T):
        t = times[j]
        if t == 0.0:
            for i in range(S):
                out[i, j] = 0.0
            continue
        s_b = 0.0
        s_bt = 0.0
        for m in range(M):
            B[m] = exp(-mu[m] * t)
            s_b += cm[m] * B[m]
            s_bt += cm[m] * mu[m] * t * B[m]
        for i in range(S):
            x = xs[i]
            b1x = d_tilde * PI2 * x
            q = exp(-b1x * t)
            q2 = q * q
            ladder = q          # q^(2n-1), starts at n=1
            A = q               # q^(n^2)
            acc = 0.0
            for n in range(1, max_terms + 1):
                if n > 1:
                    ladder = ladder * q2
                    A = A * ladder
                lam = b1x * n * n
                an = 6.0 / (PI2 * n * n)
                inner = A
                for m in range(M):
                    den = mu[m] - lam
                    if fabs(den) < 1e-12 * (mu[m] if mu[m] > lam else lam):
                        g = lam * t * A
                    else:
                        g = lam * (A - B[m]) / den
                    inner += cm[m] * g
                    # past the resonance the m-tail decays like (2m-1)^-4,
                    # so the remainder is below (2m+1)/6 times the last term
                    if mu[m] > 2.0 * lam and (2 * m + 1) * cm[m] * lam * (A + B[m]) / den < exit_eps:
                        break
                acc += an * inner
                # remaining n-tail bound: G <= lam*t*A + 2*B_m + 2*mu*t*B_m
                bound = an * (A * (1.0 + lam * t) + 2.0 * (s_b + s_bt))
                if 2.0 * n * bound < exit_eps:
                    break
            out[i, j] = 1.0 - acc
    return out_arr


def coupled_power_sum(u_in, v_in, beta_row_in, beta_col_in,
                      w_row_in, w_col_in, double zeta, double power,
                      double log_prefac):
    """sum_{n,l} w_row[n] w_col[l] exp(log_prefac - power*log(zeta + beta_row[n]*u + beta_col[l]*v))."""
    u_arr = np.ascontiguousarray(u_in, dtype=np.float64)
    v_arr = np.ascontiguousarray(v_in, dtype=np.float64)
    br_arr = np.ascontiguousarray(beta_row_in, dtype=np.float64)
    bc_arr = np.ascontiguousarray(beta_col_in, dtype=np.float64)
    wr_arr = np.ascontiguousarray(w_row_in, dtype=np.float64)
    wc_arr = np.ascontiguousarray(w_col_in, dtype=np.float64)
    out_arr = np.empty(u_arr.shape[0], dtype=np.float64)

    cdef double[::1] u = u_arr, v = v_arr
    cdef double[::1] br = br_arr, bc = bc_arr, wr = wr_arr, wc = wc_arr
    cdef double[::1] out = out_arr
    cdef int Q = u.shape[0], N = br.shape[0], L = bc.shape[0]
    cdef int q, n, l
    cdef double uq, vq, acc, row, bu, term
    for q in range(Q):
        uq = u[q]
        vq = v[q]
        acc = 0.0
        for n in range(N):
            bu = zeta + br[n] * uq
            row = 0.0
            for l in range(L):
                term = wr[n] * wc[l] * exp(log_prefac - power * log(bu + bc[l] * vq))
                row += term
                if vq > 0.0 and term < 1e-16 * (acc + row):
                    break
            acc += row
            if uq > 0.0 and row < 1e-16 * acc:
                break
        out[q] = acc
    return out_arr
