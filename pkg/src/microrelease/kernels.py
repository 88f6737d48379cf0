"""Deterministic release curves for a fixed particle radius.

Three curves describe the two-stage transport: the in-particle release
(spherical diffusion, Dirichlet boundary, uniform initial load), the
dressing transport (slab diffusion, sealed top / open bottom, uniform
initial distribution), and their cascade.  Each is an exponential-mixture
series; cumulative forms start at 0 and converge to 1, rate forms carry an
integrable 1/sqrt(t) singularity at t=0 and therefore refuse times below
``TruncationPolicy.t_min``.
"""
import numpy as np
from scipy.signal import fftconvolve

from . import _backend
from .errors import DomainError
from .params import MAX_OMEGA, TimeSeries, TransportParams, TruncationPolicy

_PI2 = np.pi ** 2
_TERM_BLOCK = 64


def effective_diffusion(d_hat: float, r_norm: float, omega: float) -> float:
    """In-particle diffusivity ``d_hat * r_norm**omega`` in mm^2/h.

    The exponent models the observed correlation between particle radius
    and internal morphology; ``omega`` must lie in [0, 2) because larger
    values would make bigger particles release faster.
    """
    if not d_hat > 0:
        raise DomainError(f"d_hat must be positive, got {d_hat}")
    if not r_norm > 0:
        raise DomainError(f"r_norm must be positive, got {r_norm}")
    if not (0.0 <= omega < MAX_OMEGA):
        raise DomainError(f"omega must lie in [0, {MAX_OMEGA}), got {omega}")
    return d_hat * r_norm ** omega


def transmit_series(params: TransportParams, max_terms: int):
    """Weights ``a_n = 6/(pi^2 n^2)`` and rates ``lam_n = d_tilde n^2 pi^2 / R^(2-omega)``."""
    n = np.arange(1, max_terms + 1, dtype=float)
    weights = 6.0 / (_PI2 * n**2)
    rates = params.d_tilde * _PI2 * n**2 / params.r_norm ** (2.0 - params.omega)
    return weights, rates


def channel_series(params: TransportParams, max_terms: int):
    """Weights ``c_m = 8/(pi^2 (2m-1)^2)`` and rates ``mu_m = d_out beta_m^2``.

    ``beta_m = (2m-1) pi / (2a)``.  The squared exponent is what makes the
    weights sum to one and the rate integrate to one.
    """
    m = np.arange(1, max_terms + 1, dtype=float)
    weights = 8.0 / (_PI2 * (2 * m - 1) ** 2)
    beta = (2 * m - 1) * np.pi / (2.0 * params.a)
    rates = params.d_out * beta**2
    return weights, rates


def _as_times(t, minimum=0.0, what="t"):
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.size and arr.min() < minimum:
        raise DomainError(f"{what} must be >= {minimum}, got {arr.min()}")
    return arr, np.isscalar(t) or getattr(t, "ndim", 1) == 0


def _mixture_complement(times, weights, rates, tail_tol):
    """1 - sum_k w_k exp(-r_k t) with the adaptive tail rule.

    Terms decrease monotonically in k, so summation stops for a time point
    once the last term of a block falls below ``tail_tol`` times the running
    sum there.  t = 0 short-circuits to exactly 0.
    """
    out = np.zeros_like(times)
    pos = times > 0.0
    tp = times[pos]
    acc = np.zeros_like(tp)
    active = np.ones(len(tp), dtype=bool)
    k0 = 0
    K = len(weights)
    while k0 < K and active.any():
        blk = slice(k0, min(k0 + _TERM_BLOCK, K))
        idx = np.nonzero(active)[0]
        terms = weights[blk][None, :] * np.exp(-np.outer(tp[idx], rates[blk]))
        acc[idx] += terms.sum(axis=1)
        active[idx] = terms[:, -1] >= tail_tol * acc[idx]
        k0 = blk.stop
    out[pos] = 1.0 - acc
    return out


def _mixture_rate(times, weights, rates, tail_tol):
    """sum_k w_k r_k exp(-r_k t), adaptive as in :func:`_mixture_complement`."""
    acc = np.zeros_like(times)
    active = np.ones(len(times), dtype=bool)
    wr = weights * rates
    k0 = 0
    K = len(weights)
    while k0 < K and active.any():
        blk = slice(k0, min(k0 + _TERM_BLOCK, K))
        idx = np.nonzero(active)[0]
        terms = wr[blk][None, :] * np.exp(-np.outer(times[idx], rates[blk]))
        acc[idx] += terms.sum(axis=1)
        active[idx] = terms[:, -1] >= tail_tol * acc[idx]
        k0 = blk.stop
    return acc


def transmit_cumulative(t, params: TransportParams,
                        trunc: TruncationPolicy = TruncationPolicy()):
    """Fraction released from the particle into the dressing by time t.

    Parameters
    ----------
    t : float or array_like
        Time(s) in hours, >= 0.
    params : TransportParams
    trunc : TruncationPolicy

    Returns
    -------
    float or ndarray
        Nondecreasing in t, 0 at t=0, -> 1 as t -> infinity.
    """
    times, scalar = _as_times(t)
    w, r = transmit_series(params, trunc.max_terms)
    vals = _mixture_complement(times, w, r, trunc.tail_tol)
    return float(vals[0]) if scalar else vals


def transmit_rate(t, params: TransportParams,
                  trunc: TruncationPolicy = TruncationPolicy()):
    """Release rate from the particle, 1/h.  Requires t >= trunc.t_min."""
    times, scalar = _as_times(t, minimum=trunc.t_min, what="rate time")
    w, r = transmit_series(params, trunc.max_terms)
    vals = _mixture_rate(times, w, r, trunc.tail_tol)
    return float(vals[0]) if scalar else vals


def channel_cumulative(t, params: TransportParams,
                       trunc: TruncationPolicy = TruncationPolicy()):
    """Fraction transported across the dressing by time t (uniform source)."""
    times, scalar = _as_times(t)
    w, r = channel_series(params, trunc.max_terms)
    vals = _mixture_complement(times, w, r, trunc.tail_tol)
    return float(vals[0]) if scalar else vals


def channel_rate(t, params: TransportParams,
                 trunc: TruncationPolicy = TruncationPolicy()):
    """Transport rate through the dressing, 1/h.  Requires t >= trunc.t_min."""
    times, scalar = _as_times(t, minimum=trunc.t_min, what="rate time")
    w, r = channel_series(params, trunc.max_terms)
    vals = _mixture_rate(times, w, r, trunc.tail_tol)
    return float(vals[0]) if scalar else vals


def end_to_end_release(t, params: TransportParams,
                       trunc: TruncationPolicy = TruncationPolicy()):
    """Cumulative fraction arriving in the release medium by time t.

    Exact integral of the convolution of the two stage rates:

        r(t) = 1 - sum_n a_n e^(-lam_n t)
                 - sum_{n,m} a_n c_m lam_n (e^(-lam_n t) - e^(-mu_m t)) / (mu_m - lam_n)

    with the removable singularity at ``mu_m = lam_n`` replaced by its
    limit ``lam_n t e^(-lam_n t)``.  Cascading two stages can only slow
    release, so r(t) <= min(transmit, channel) pointwise.
    """
    times, scalar = _as_times(t)
    cm, mu = channel_series(params, trunc.max_terms)
    x = params.r_norm ** -(2.0 - params.omega)
    vals = _backend.release_matrix(
        np.array([x]), times, params.d_tilde, mu, cm,
        trunc.max_terms, trunc.tail_tol)[0]
    return float(vals[0]) if scalar else vals


def convolution_oracle(params: TransportParams, trunc: TruncationPolicy,
                       times) -> TimeSeries:
    """Numerical check of :func:`end_to_end_release`, used in tests only.

    Samples the two truncated rates on the (uniform) grid, forms their
    discrete convolution with trapezoid end weights, and integrates it
    cumulatively with the trapezoid rule.  The value at ``times[k]``
    approximates the release at ``times[k] + times[0]`` (the convolution of
    two grids that both start at ``times[0]`` is shifted by one grid
    origin), so grids should start near ``t_min``.

    Resolution note: the true rates carry 1/sqrt(t) singularities at t=0,
    so a uniform K-point grid captures the early-time mass only to
    O(sqrt(lam_1 dt)).  Agreement with the closed form is limited by that
    defect, not by the closed form.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return TimeSeries(times, np.empty(0))
    if times.size == 1:
        raise DomainError("convolution oracle needs at least two grid points")
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise DomainError("convolution oracle requires a uniform time grid")
    if times[0] < trunc.t_min * (1.0 - 1e-12):
        raise DomainError(
            f"grid must start at or above t_min={trunc.t_min}, got {times[0]}")
    step = float(dt[0])
    x = transmit_rate(times, params, trunc)
    h = channel_rate(times, params, trunc)
    conv = fftconvolve(x, h)[: len(times)] * step
    conv -= 0.5 * step * (x[0] * h + h[0] * x)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * step * (conv[1:] + conv[:-1]))])
    return TimeSeries(times, cum)
