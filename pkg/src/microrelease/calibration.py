"""Least-squares calibration against experimental release data.

Diffusivities are found by exhaustive grid search (coarse log-spaced stage,
then one linear refinement around the best cell); the empirical power-law
benchmark is fitted by log-linear regression.  Goodness of fit is reported
as plain MSE, which unlike R^2 stays meaningful for nonlinear models.
"""
import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import (DataFormatError, DomainError, InsufficientDataError)
from .kernels import channel_cumulative, channel_series
from .params import TimeSeries, TransportParams, TruncationPolicy

MIN_FIT_SAMPLES = 3


@dataclass
class ExperimentalDataset:
    """Measured release fractions over strictly increasing times (hours)."""

    times: np.ndarray
    fractions: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.fractions = np.asarray(self.fractions, dtype=float)
        if len(self.times) != len(self.fractions):
            raise DataFormatError("times and fractions must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DataFormatError("times must be strictly increasing")
        if len(self.times) and self.times[0] < 0:
            raise DataFormatError("times must be nonnegative")
        if np.any(self.fractions < 0) or np.any(self.fractions > 1.0 + 1e-6):
            raise DataFormatError("fractions must lie in [0, 1 + 1e-6]")

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_csv(cls, path, label: str = "") -> "ExperimentalDataset":
        """Read `time_h,fraction` CSV; errors carry the offending row number."""
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["time_h", "fraction"]:
            raise DataFormatError(f"{path}: expected header time_h,fraction")
        times, fracs = [], []
        prev = -np.inf
        for i, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise DataFormatError(f"{path}: row {i}: expected 2 columns")
            try:
                t, f = float(row[0]), float(row[1])
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {i}: {exc}") from exc
            if t <= prev:
                raise DataFormatError(
                    f"{path}: row {i}: time {t} not strictly increasing")
            if not (0.0 <= f <= 1.0 + 1e-6):
                raise DataFormatError(
                    f"{path}: row {i}: fraction {f} outside [0, 1]")
            prev = t
            times.append(t)
            fracs.append(f)
        return cls(np.array(times), np.array(fracs),
                   label=label or str(path))


@dataclass
class FitResult:
    """Calibrated parameters with residual diagnostics."""

    model: str
    params: dict
    mse: float
    grid_meta: dict
    residuals: np.ndarray
    dataset_label: str = ""
    n_points: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "mse": self.mse,
            "grid_meta": self.grid_meta,
            "residuals": list(map(float, self.residuals)),
            "dataset_label": self.dataset_label,
            "n_points": self.n_points,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class GridSearchSpec:
    """Log-spaced coarse stage plus one linear refinement stage."""

    lo: float
    hi: float
    points: int = 50
    refine_points: int = 10

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise DomainError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2 or self.refine_points < 2:
            raise DomainError("grid stages need at least 2 points")

    def coarse(self) -> np.ndarray:
        return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)


# defaults bracket physically plausible diffusivities by several decades
DEFAULT_DI_SEARCH = GridSearchSpec(1e-12, 1e-6)
DEFAULT_DO_SEARCH = GridSearchSpec(1e-4, 1e0)


def mse(model: TimeSeries, data: ExperimentalDataset) -> float:
    """Mean squared residual of a model curve evaluated at the data times."""
    if len(model) != len(data) or not np.allclose(
            model.times, data.times, rtol=1e-12, atol=1e-12):
        raise DomainError("model is not evaluated on the dataset time grid")
    res = model.values - data.fractions
    return float(np.mean(res**2))


def _require_samples(data: ExperimentalDataset, n: int = MIN_FIT_SAMPLES):
    if len(data) < n:
        raise InsufficientDataError(
            f"fit needs at least {n} samples, got {len(data)}")


def _refine_grid(grid: np.ndarray, best: int, points: int) -> np.ndarray:
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    return np.linspace(lo, hi, points)


def _argmin_stable(values: np.ndarray) -> int:
    # np.argmin already returns the first minimum; make the tie rule explicit
    return int(np.argmin(values))


def fit_channel_only(data: ExperimentalDataset, a: float,
                     search: GridSearchSpec = DEFAULT_DO_SEARCH,
                     trunc: TruncationPolicy = TruncationPolicy()) -> FitResult:
    """Fit the dressing diffusivity so the slab curve matches ``data``.

    Used for instantaneous-source experiments where the measured
    concentration is the transport stage alone.
    """
    _require_samples(data)

    def sweep(grid):
        errs = np.empty(len(grid))
        for i, d_out in enumerate(grid):
            tp = TransportParams(a=a, d_hat=1.0, omega=0.0, d_out=d_out,
                                 r_norm=1.0)
            model = channel_cumulative(data.times, tp, trunc)
            errs[i] = np.mean((model - data.fractions) ** 2)
        return errs

    coarse = search.coarse()
    errs1 = sweep(coarse)
    b1 = _argmin_stable(errs1)
    if b1 in (0, len(coarse) - 1):
        warnings.warn(
            f"channel fit hit the search boundary at d_out={coarse[b1]:.3e}",
            RuntimeWarning)
    fine = _refine_grid(coarse, b1, search.refine_points)
    errs2 = sweep(fine)
    b2 = _argmin_stable(errs2)
    best = float(fine[b2])
    tp = TransportParams(a=a, d_hat=1.0, omega=0.0, d_out=best, r_norm=1.0)
    residuals = channel_cumulative(data.times, tp, trunc) - data.fractions
    return FitResult(
        model="channel",
        params={"d_out_mm2_per_h": best},
        mse=float(np.mean(residuals**2)),
        grid_meta={
            "stage1": {"lo": search.lo, "hi": search.hi, "points": search.points,
                       "spacing": "log"},
            "stage2": {"lo": float(fine[0]), "hi": float(fine[-1]),
                       "points": search.refine_points, "spacing": "linear",
                       "step": float(fine[1] - fine[0])},
        },
        residuals=residuals,
        dataset_label=data.label,
        n_points=len(data),
    )


def fit_end_to_end(data: ExperimentalDataset, a: float, omega: float,
                   mu_R: float,
                   search_di: GridSearchSpec = DEFAULT_DI_SEARCH,
                   search_do: GridSearchSpec = DEFAULT_DO_SEARCH,
                   trunc: TruncationPolicy = TruncationPolicy()) -> FitResult:
    """Exhaustive 2-D search for the in-particle and dressing diffusivities.

    Geometry, exponent and radius stay fixed; the model curve is the exact
    series cascade evaluated at the data times (never interpolated).
    ``mu_R`` is the normalized radius (mm / 1 mm).
    """
    _require_samples(data)
    x_base = mu_R ** -(2.0 - omega)   # decay rates = (d_i/mu_R^omega) pi^2 n^2 x

    def sweep(di_grid, do_grid):
        errs = np.empty((len(di_grid), len(do_grid)))
        xs = np.asarray(di_grid) / mu_R**omega * x_base
        for j, d_out in enumerate(do_grid):
            tp = TransportParams(a=a, d_hat=1.0, omega=omega, d_out=d_out,
                                 r_norm=1.0)
            cm, mu_m = channel_series(tp, trunc.max_terms)
            curves = _backend.release_matrix(
                xs, data.times, 1.0, mu_m, cm, trunc.max_terms, trunc.tail_tol)
            errs[:, j] = np.mean((curves - data.fractions[None, :]) ** 2, axis=1)
        return errs

    di1, do1 = search_di.coarse(), search_do.coarse()
    errs1 = sweep(di1, do1)
    flat = _argmin_stable(errs1.ravel())
    bi, bj = np.unravel_index(flat, errs1.shape)
    if bi in (0, len(di1) - 1) or bj in (0, len(do1) - 1):
        warnings.warn(
            f"end-to-end fit hit the search boundary at "
            f"d_i={di1[bi]:.3e}, d_out={do1[bj]:.3e}", RuntimeWarning)
    di2 = _refine_grid(di1, bi, search_di.refine_points)
    do2 = _refine_grid(do1, bj, search_do.refine_points)
    errs2 = sweep(di2, do2)
    flat = _argmin_stable(errs2.ravel())
    ri, rj = np.unravel_index(flat, errs2.shape)
    best_di, best_do = float(di2[ri]), float(do2[rj])

    tp = TransportParams(a=a, d_hat=best_di / mu_R**omega, omega=omega,
                         d_out=best_do, r_norm=mu_R)
    cm, mu_m = channel_series(tp, trunc.max_terms)
    model = _backend.release_matrix(
        np.array([x_base]), data.times, tp.d_tilde, mu_m, cm,
        trunc.max_terms, trunc.tail_tol)[0]
    residuals = model - data.fractions
    return FitResult(
        model="end-to-end",
        params={"d_i_mm2_per_h": best_di, "d_out_mm2_per_h": best_do},
        mse=float(np.mean(residuals**2)),
        grid_meta={
            "stage1": {"d_i": {"lo": search_di.lo, "hi": search_di.hi,
                               "points": search_di.points, "spacing": "log"},
                       "d_out": {"lo": search_do.lo, "hi": search_do.hi,
                                 "points": search_do.points, "spacing": "log"}},
            "stage2": {"d_i": {"lo": float(di2[0]), "hi": float(di2[-1]),
                               "points": search_di.refine_points,
                               "step": float(di2[1] - di2[0])},
                       "d_out": {"lo": float(do2[0]), "hi": float(do2[-1]),
                                 "points": search_do.refine_points,
                                 "step": float(do2[1] - do2[0])}},
        },
        residuals=residuals,
        dataset_label=data.label,
        n_points=len(data),
    )


def fit_ritger_peppas(data: ExperimentalDataset,
                      early_cutoff: float = 0.6) -> FitResult:
    """Fit the empirical power law ``fraction = k * t**n``.

    Log-linear least squares on the early-release window
    (``fraction <= early_cutoff`` and ``t > 0``); the reported MSE is taken
    in the original linear scale over the whole dataset, which is the
    apples-to-apples benchmark against mechanistic fits.
    """
    window = (data.fractions <= early_cutoff) & (data.times > 0)
    if np.any(window & (data.fractions <= 0)):
        raise DataFormatError(
            "zero or negative fractions inside the power-law fit window")
    if window.sum() < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"power-law fit needs at least {MIN_FIT_SAMPLES} points below "
            f"cutoff {early_cutoff}, got {int(window.sum())}")
    lt = np.log(data.times[window])
    lf = np.log(data.fractions[window])
    design = np.column_stack([np.ones_like(lt), lt])
    (log_k, n_exp), *_ = np.linalg.lstsq(design, lf, rcond=None)
    k = float(np.exp(log_k))
    model = k * data.times ** n_exp
    residuals = model - data.fractions
    return FitResult(
        model="ritger-peppas",
        params={"k_per_h_pow_n": k, "n": float(n_exp)},
        mse=float(np.mean(residuals**2)),
        grid_meta={"early_cutoff": early_cutoff,
                   "window_points": int(window.sum())},
        residuals=residuals,
        dataset_label=data.label,
        n_points=len(data),
    )


def compare_models(data: ExperimentalDataset, fits) -> list:
    """Rank fits of the same dataset by MSE (ascending, stable on ties).

    Returns rows ``{"model", "n_params", "mse"}``.
    """
    fits = list(fits)
    if len(fits) < 2:
        raise DomainError("model comparison needs at least two fits")
    for f in fits:
        if f.dataset_label != data.label or f.n_points != len(data):
            raise DomainError(
                f"fit {f.model!r} was computed on a different dataset")
    rows = [{"model": f.model, "n_params": len(f.params), "mse": f.mse}
            for f in fits]
    return sorted(rows, key=lambda r: r["mse"])
