"""Parameter bundles and the sampled-curve exchange type.

Internal canonical units are millimeters and hours.  Particle radii are
normalized by 1 mm on ingestion, so ``r_norm`` is dimensionless and the
scaling constant ``d_tilde`` carries units of 1/h.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MAX_OMEGA = 2.0


@dataclass(frozen=True)
class TransportParams:
    """Physical parameters of one particle/dressing configuration.

    Parameters
    ----------
    a : float
        Height of the dressing slab in mm.
    d_hat : float
        Radius-independent diffusion scaling constant in mm^2/h; the
        effective in-particle diffusivity is ``d_hat * r_norm**omega``.
    omega : float
        Radius-diffusivity correlation exponent, ``0 <= omega < 2``.
        Values >= 2 would make release speed up with particle size,
        contradicting observation, and are rejected.
    d_out : float
        Diffusion coefficient in the dressing (outside particles), mm^2/h.
    r_norm : float
        Particle radius divided by 1 mm (dimensionless).
    """

    a: float
    d_hat: float
    omega: float
    d_out: float
    r_norm: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"fleece height a must be positive, got {self.a}")
        if not self.d_hat > 0:
            raise DomainError(f"d_hat must be positive, got {self.d_hat}")
        if not (0.0 <= self.omega < MAX_OMEGA):
            raise DomainError(
                f"omega must lie in [0, {MAX_OMEGA}), got {self.omega}")
        if not self.d_out > 0:
            raise DomainError(f"d_out must be positive, got {self.d_out}")
        if not self.r_norm > 0:
            raise DomainError(f"r_norm must be positive, got {self.r_norm}")

    @property
    def d_tilde(self) -> float:
        """Scaling constant divided by 1 mm^2 (units 1/h)."""
        return self.d_hat / 1.0

    @property
    def d_in(self) -> float:
        """Effective in-particle diffusivity ``d_hat * r_norm**omega`` in mm^2/h."""
        return self.d_hat * self.r_norm ** self.omega


@dataclass(frozen=True)
class TruncationPolicy:
    """Numerical controls for the infinite release series.

    ``max_terms`` caps every series index, ``tail_tol`` is the relative
    tail tolerance of the adaptive stop rule, and ``t_min`` is the smallest
    time at which the rate-form series (which diverge at t=0) may be
    evaluated.
    """

    max_terms: int = 200
    tail_tol: float = 1e-10
    t_min: float = 1e-6

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if not 0.0 < self.tail_tol < 1.0:
            raise DomainError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        if not self.t_min > 0:
            raise DomainError(f"t_min must be positive, got {self.t_min}")


@dataclass
class TimeSeries:
    """Sampled curve: strictly increasing times (hours) with one value each."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.values.ndim != 1:
            raise DomainError("times and values must be one-dimensional")
        if len(self.times) != len(self.values):
            raise DomainError(
                f"length mismatch: {len(self.times)} times vs {len(self.values)} values")
        if len(self.times) and self.times[0] < 0:
            raise DomainError("times must be nonnegative")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)


def check_cumulative(series: TimeSeries, tol: float = 1e-9) -> None:
    """Validate that a series is a cumulative release fraction.

    Cumulative curves must be nondecreasing (up to ``tol``) and stay inside
    ``[0, 1 + tol]``.
    """
    v = series.values
    if len(v) == 0:
        return
    if np.any(v < -tol) or np.any(v > 1.0 + tol):
        raise DomainError("cumulative values must lie in [0, 1]")
    if np.any(np.diff(v) < -tol):
        raise DomainError("cumulative values must be nondecreasing")


@dataclass(frozen=True)
class GammaRateParams:
    """Shape/rate pair of the Gamma law governing ``X = R**-(2 - omega)``.

    The decay rates of the in-particle release series are proportional to
    ``X``, so a Gamma prior on those rates induces this law.  ``omega`` is
    carried along for unit bookkeeping.  Finiteness of ``E[R]`` requires
    ``gamma > 1/(2 - omega)`` and of ``E[R^2]`` requires
    ``gamma > 2/(2 - omega)``; those bounds are enforced by the moment
    operations, not here.
    """

    gamma: float
    zeta: float
    omega: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not self.zeta > 0:
            raise DomainError(f"zeta must be positive, got {self.zeta}")
        if not (0.0 <= self.omega < MAX_OMEGA):
            raise DomainError(f"omega must lie in [0, {MAX_OMEGA})")

    @property
    def omega_tilde(self) -> float:
        return MAX_OMEGA - self.omega


@dataclass(frozen=True)
class SizeMoments:
    """Mean and standard deviation of the normalized particle radius."""

    mu_R: float
    sigma_R: float

    def __post_init__(self):
        if not self.mu_R > 0:
            raise DomainError(f"mu_R must be positive, got {self.mu_R}")
        if self.sigma_R < 0:
            raise DomainError(f"sigma_R must be nonnegative, got {self.sigma_R}")
