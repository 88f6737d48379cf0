"""Seedable radius sampling, ensemble release curves, and histogram tools.

Radii are drawn by sampling ``X ~ Gamma(gamma, rate zeta)`` and mapping
``R = X**(-1/(2 - omega))``.  One ``numpy.random.default_rng(seed)`` stream
is consumed in a single vectorized pass in sample-index order, so a fixed
(seed, n) pair reproduces the same radii bit for bit.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DataFormatError, DomainError, SupportMismatchError
from .kernels import channel_series
from .params import GammaRateParams, TimeSeries, TransportParams, TruncationPolicy

LOADING_HYPOTHESES = ("equal", "volume")


@dataclass
class SampleSet:
    """Drawn normalized radii with per-particle drug-load weights."""

    radii: np.ndarray
    seed: int
    weights: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.radii) != len(self.weights):
            raise DomainError("radii and weights must have equal length")
        if len(self.radii) == 0:
            raise DomainError("sample set must be nonempty")
        if np.any(self.radii <= 0):
            raise DomainError("radii must be positive")
        if np.any(self.weights < 0):
            raise DomainError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise DomainError(
                f"weights must sum to 1, got {self.weights.sum()!r}")

    def __len__(self) -> int:
        return len(self.radii)


@dataclass
class BinnedHistogram:
    """Normalized masses on contiguous bins."""

    bin_edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if len(self.masses) != len(self.bin_edges) - 1:
            raise DomainError("need len(masses) == len(bin_edges) - 1")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise DomainError("bin edges must be strictly increasing")
        if np.any(self.masses < 0):
            raise DomainError("masses must be nonnegative")
        if abs(self.masses.sum() - 1.0) > 1e-6:
            raise DomainError(f"masses must sum to 1, got {self.masses.sum()!r}")


def sample_radii(gp: GammaRateParams, n: int, seed: int) -> SampleSet:
    """Draw ``n`` normalized radii; deterministic for fixed (seed, n).

    Weights are initialized uniform (equal-load hypothesis).
    """
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.gamma(shape=gp.gamma, scale=1.0 / gp.zeta, size=n)
    radii = x ** (-1.0 / gp.omega_tilde)
    return SampleSet(radii=radii, seed=seed, weights=np.full(n, 1.0 / n))


def apply_loading_hypothesis(s: SampleSet, hypothesis: str) -> SampleSet:
    """Reweight samples for a drug-loading hypothesis.

    ``"equal"``: every particle carries the same load.  ``"volume"``: load
    proportional to particle volume, ``w_i ~ R_i**3`` renormalized (total
    ensemble release stays normalized to 1 either way).
    """
    if hypothesis == "equal":
        w = np.full(len(s), 1.0 / len(s))
    elif hypothesis == "volume":
        w = s.radii ** 3
        w = w / w.sum()
    else:
        raise DomainError(
            f"unknown hypothesis {hypothesis!r}; choose from {LOADING_HYPOTHESES}")
    return SampleSet(radii=s.radii.copy(), seed=s.seed, weights=w)


def ensemble_release(s: SampleSet, tp: TransportParams, grid,
                     trunc: TruncationPolicy = TruncationPolicy()):
    """Weighted ensemble mean and variance of per-sample release curves.

    Returns ``(mean, variance)`` as :class:`TimeSeries` on ``grid``:
    ``mean(t) = sum_i w_i r(t; R_i)`` and
    ``variance(t) = sum_i w_i (r(t; R_i) - mean(t))**2``.
    """
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("grid must be a nonempty 1-D time array")
    if np.any(times < 0):
        raise DomainError("grid times must be nonnegative")
    xs = s.radii ** -(2.0 - tp.omega)
    cm, mu = channel_series(tp, trunc.max_terms)
    curves = _backend.release_matrix(xs, times, tp.d_tilde, mu, cm,
                                     trunc.max_terms, trunc.tail_tol)
    mean = s.weights @ curves
    var = s.weights @ (curves - mean[None, :]) ** 2
    return TimeSeries(times, mean), TimeSeries(times, var)


def histogram_from_samples(values, bin_width: float,
                           origin: float = 0.0) -> BinnedHistogram:
    """Bin samples into width-``bin_width`` bins anchored at ``origin``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("cannot histogram an empty sample")
    if not bin_width > 0:
        raise DomainError(f"bin_width must be positive, got {bin_width}")
    k_lo = int(np.floor((values.min() - origin) / bin_width))
    k_hi = int(np.floor((values.max() - origin) / bin_width)) + 1
    edges = origin + bin_width * np.arange(k_lo, k_hi + 1)
    counts, _ = np.histogram(values, bins=edges)
    return BinnedHistogram(bin_edges=edges, masses=counts / values.size)


def empirical_kld(p: BinnedHistogram, q: BinnedHistogram) -> float:
    """Kullback-Leibler divergence sum_i p_i ln(p_i / q_i) in nats.

    Bins must coincide.  Zero-mass bins of ``p`` contribute nothing
    (0 ln 0 := 0); a bin with ``p_i > 0`` but ``q_i = 0`` is an error
    rather than infinity.
    """
    if len(p.bin_edges) != len(q.bin_edges) or not np.allclose(
            p.bin_edges, q.bin_edges, rtol=1e-12, atol=0.0):
        raise DomainError("histograms are binned on different edges")
    pm, qm = p.masses, q.masses
    bad = (pm > 0) & (qm == 0)
    if bad.any():
        raise SupportMismatchError(
            f"{bad.sum()} bins carry mass in p but none in q")
    mask = pm > 0
    return float(np.sum(pm[mask] * np.log(pm[mask] / qm[mask])))


def gaussian_histogram(edges, mean: float, sd: float) -> BinnedHistogram:
    """Moment-matched normal reference binned on ``edges``.

    Masses are exact CDF differences renormalized over the edge span (the
    infinite-sample limit of binning normal draws that land in the range).
    """
    from scipy.stats import norm

    edges = np.asarray(edges, dtype=float)
    if not sd > 0:
        raise DomainError(f"sd must be positive, got {sd}")
    cdf = norm.cdf(edges, loc=mean, scale=sd)
    masses = np.diff(cdf)
    total = masses.sum()
    if total <= 0:
        raise DomainError("normal reference has no mass on the given bins")
    return BinnedHistogram(bin_edges=edges, masses=masses / total)


def read_histogram_csv(path, header=("bin_left_um", "bin_right_um", "mass")
                       ) -> BinnedHistogram:
    """Read a reference histogram: columns bin_left, bin_right, mass."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise DataFormatError(
            f"{path}: expected header {','.join(header)}")
    lefts, rights, masses = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise DataFormatError(f"{path}: row {i}: expected 3 columns")
        try:
            lefts.append(float(row[0]))
            rights.append(float(row[1]))
            masses.append(float(row[2]))
        except ValueError as exc:
            raise DataFormatError(f"{path}: row {i}: {exc}") from exc
    for i in range(len(lefts) - 1):
        if abs(lefts[i + 1] - rights[i]) > 1e-9 * max(abs(rights[i]), 1.0):
            raise DataFormatError(
                f"{path}: row {i + 3}: bins are not contiguous")
    edges = np.array(lefts + [rights[-1]])
    return BinnedHistogram(bin_edges=edges, masses=np.array(masses))
