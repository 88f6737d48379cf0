"""Pure-NumPy reference implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable and
the ground truth the extension is tested against.  They evaluate the full
dense truncated sums; the compiled versions add early exits that only drop
terms far below the tail tolerance.
"""
import numpy as np

_PI2 = np.pi ** 2
_SAMPLE_CHUNK = 64
_POINT_CHUNK = 4096

BACKEND_NAME = "pure"


def release_matrix(xs, times, d_tilde, mu, cm, max_terms, tail_tol):
    """End-to-end cumulative release for every (sample, time) pair.

    Parameters
    ----------
    xs : ndarray, shape (S,)
        Per-sample rate factors ``x = R**-(2 - omega)``; the in-particle
        decay rates are ``d_tilde * pi**2 * n**2 * x``.
    times : ndarray, shape (T,)
        Nonnegative evaluation times in hours.
    d_tilde : float
        Normalized diffusion scaling constant, 1/h.
    mu, cm : ndarray, shape (M,)
        Decay rates and weights of the dressing-transport series.
    max_terms : int
        Cap on the particle-series index.
    tail_tol : float
        Unused here (dense reference evaluates every term); kept for
        signature parity with the compiled kernel.

    Returns
    -------
    ndarray, shape (S, T)
    """
    xs = np.asarray(xs, dtype=float)
    times = np.asarray(times, dtype=float)
    n = np.arange(1, max_terms + 1, dtype=float)
    beta = d_tilde * _PI2 * n**2
    an = 6.0 / (_PI2 * n**2)
    out = np.empty((len(xs), len(times)))
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
            continue
        B = np.exp(-mu * t)
        for i0 in range(0, len(xs), _SAMPLE_CHUNK):
            x = xs[i0:i0 + _SAMPLE_CHUNK]
            lam = np.outer(x, beta)                        # (s, N)
            A = np.exp(-lam * t)
            den = mu[None, None, :] - lam[:, :, None]      # (s, N, M)
            with np.errstate(divide="ignore", invalid="ignore"):
                G = lam[:, :, None] * (A[:, :, None] - B[None, None, :]) / den
            near = np.abs(den) < 1e-12 * np.maximum(mu[None, None, :],
                                                    lam[:, :, None])
            if near.any():
                s_, n_, m_ = np.nonzero(near)
                G[s_, n_, m_] = lam[s_, n_] * t * A[s_, n_]
            out[i0:i0 + _SAMPLE_CHUNK, j] = 1.0 - A @ an - np.einsum(
                "n,snm,m->s", an, G, cm)
    return out


def coupled_power_sum(u, v, beta_row, beta_col, w_row, w_col,
                      zeta, power, log_prefac):
    """sum_{n,l} w_row[n] w_col[l] exp(log_prefac - power*log(zeta + beta_row[n]*u + beta_col[l]*v)).

    ``u`` and ``v`` are equal-length point arrays; the return has the same
    length.  All powers are taken in log space so shape parameters of
    several hundred stay representable.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.empty(len(u))
    for q0 in range(0, len(u), _POINT_CHUNK):
        uq = u[q0:q0 + _POINT_CHUNK]
        vq = v[q0:q0 + _POINT_CHUNK]
        arg = (zeta
               + uq[:, None, None] * beta_row[None, :, None]
               + vq[:, None, None] * beta_col[None, None, :])
        lw = np.log(w_row)[None, :, None] + np.log(w_col)[None, None, :]
        out[q0:q0 + _POINT_CHUNK] = np.exp(
            log_prefac + lw - power * np.log(arg)).sum(axis=(1, 2))
    return out
