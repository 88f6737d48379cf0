"""Command-line front end.

Subcommands: ``simulate`` (forward curves), ``stats`` (mean/std of release
over the size distribution), ``fit`` (calibration against a dataset CSV),
``sensitivity`` (release-spread vs. exponent sweep), ``sample`` (radius
drawing, histogram, divergence metrics).  All outputs are plot-ready CSV
with 12-significant-digit values and no timestamps, so repeated seeded runs
are byte-identical.

Exit codes: 0 success, 2 input/validation, 3 mathematical infeasibility,
4 insufficient data.
"""
import os

_threads = os.environ.get("MICRORELEASE_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .calibration import (ExperimentalDataset, fit_channel_only,
                          fit_end_to_end, fit_ritger_peppas)
from .config import UM_PER_MM, RunConfig, SensitivityConfig
from .errors import (DataFormatError, DomainError, InfeasibleError,
                     InsufficientDataError)
from .params import SizeMoments, TransportParams
from .montecarlo import (apply_loading_hypothesis, empirical_kld,
                         ensemble_release, gaussian_histogram,
                         histogram_from_samples, read_histogram_csv,
                         sample_radii)
from .kernels import channel_cumulative, end_to_end_release, transmit_cumulative
from .sizestats import mean_release, solve_gamma_params, variance_release

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_DATA = 4

_FMT = "%.12g"


def _fmt(value: float) -> str:
    return _FMT % value


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_csv(path, header, rows):
    fh, close = _open_out(path)
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    finally:
        if close:
            fh.close()


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = {
        "a_mm": args.a_mm, "omega": args.omega,
        "mu_R_um": args.mu_r_um, "sigma_R_um": args.sigma_r_um,
        "d_in_mm2_per_h": args.d_in, "d_out_mm2_per_h": args.d_out,
        "samples": args.samples, "seed": args.seed,
        "hypothesis": args.hypothesis,
        "start_h": args.grid_start, "stop_h": args.grid_stop,
        "step_h": args.grid_step, "max_terms": args.max_terms,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
            if key == "d_in_mm2_per_h":
                cfg.d_hat_mm2_per_h = None
    cfg.validate()
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    tp = cfg.transport()
    trunc = cfg.truncation()
    times = cfg.time_grid()
    tx = transmit_cumulative(times, tp, trunc)
    ch = channel_cumulative(times, tp, trunc)
    rel = end_to_end_release(times, tp, trunc)
    _write_csv(args.output,
               ["time_h", "transmit_cum", "channel_cum", "release_cum"],
               zip(times.tolist(), tx.tolist(), ch.tolist(), rel.tolist()))
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _load_config(args)
    tp = cfg.transport()
    trunc = cfg.truncation()
    gp = solve_gamma_params(cfg.size_moments(), cfg.omega)
    times = cfg.time_grid()
    fixed = end_to_end_release(times, tp, trunc)
    rows = []
    for t, rf in zip(times, fixed):
        mu = mean_release(t, gp, tp, trunc, cfg.quad_single())
        var = variance_release(t, gp, tp, trunc, cfg.quad_double(),
                               quad_single=cfg.quad_single())
        rows.append((float(t), mu, float(np.sqrt(var)), float(rf)))
    _write_csv(args.output,
               ["time_h", "mean_release", "std_release", "fixed_radius_release"],
               rows)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load_config(args)
    data = ExperimentalDataset.from_csv(args.dataset)
    trunc = cfg.truncation()
    if args.mode == "channel":
        result = fit_channel_only(data, a=cfg.a_mm, trunc=trunc)
    elif args.mode == "end-to-end":
        result = fit_end_to_end(data, a=cfg.a_mm, omega=cfg.omega,
                                mu_R=cfg.mu_R_norm, trunc=trunc)
    else:
        result = fit_ritger_peppas(data, early_cutoff=args.early_cutoff)
    fh, close = _open_out(args.output)
    try:
        fh.write(result.to_json() + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = _load_config(args)
    sens = SensitivityConfig(
        omega_grid=tuple(args.omega_grid) if args.omega_grid
        else SensitivityConfig.omega_grid,
        eval_time_h=args.eval_time,
        di_targets_mm2_per_h=tuple(args.di_targets) if args.di_targets
        else SensitivityConfig.di_targets_mm2_per_h,
        sigma_R_um=args.sigma_r_um if args.sigma_r_um is not None else 0.24,
    )
    trunc = cfg.truncation()
    mu_norm = cfg.mu_R_norm
    from .params import SizeMoments, TransportParams
    failures = []
    rows = []
    for omega in sens.omega_grid:
        for d_i in sens.di_targets_mm2_per_h:
            # hold the effective in-particle diffusivity fixed across omega
            d_hat = d_i / mu_norm**omega
            tp = TransportParams(a=cfg.a_mm, d_hat=d_hat, omega=omega,
                                 d_out=cfg.d_out_mm2_per_h, r_norm=mu_norm)
            try:
                gp = solve_gamma_params(
                    SizeMoments(mu_norm, sens.sigma_R_um / UM_PER_MM), omega)
                var = variance_release(sens.eval_time_h, gp, tp, trunc,
                                       cfg.quad_double(),
                                       quad_single=cfg.quad_single())
                rows.append((float(omega), float(d_i), float(np.sqrt(var))))
            except InfeasibleError as exc:
                failures.append((omega, d_i, str(exc)))
                rows.append((float(omega), float(d_i), "NaN"))
    fh, close = _open_out(args.output)
    try:
        fh.write("omega,d_i,sigma_r\n")
        for omega, d_i, sig in rows:
            tail = sig if isinstance(sig, str) else _fmt(sig)
            fh.write(f"{_fmt(omega)},{_fmt(d_i)},{tail}\n")
    finally:
        if close:
            fh.close()
    for omega, d_i, msg in failures:
        print(f"infeasible at omega={omega}, d_i={d_i}: {msg}", file=sys.stderr)
    return EXIT_INFEASIBLE if failures else EXIT_OK


_MAX_RADII_ROWS = 1_000_000


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    gp = solve_gamma_params(cfg.size_moments(), cfg.omega)
    samples = sample_radii(gp, cfg.samples, cfg.seed)
    radii_um = samples.radii * UM_PER_MM

    _write_csv(args.output, ["radius_um"],
               ((float(r),) for r in radii_um[:_MAX_RADII_ROWS]))

    reference = read_histogram_csv(args.reference) if args.reference else None
    if reference is not None:
        width = float(reference.bin_edges[1] - reference.bin_edges[0])
        origin = float(reference.bin_edges[0])
        hist = histogram_from_samples(radii_um, width, origin)
        hist, reference = _align_histograms(hist, reference)
    else:
        hist = histogram_from_samples(radii_um, args.bin_width_um,
                                      args.origin_um)
    if args.hist_output:
        _write_csv(args.hist_output, ["bin_left_um", "bin_right_um", "mass"],
                   ((float(l), float(r), float(m)) for l, r, m in
                    zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.masses)))

    gauss = gaussian_histogram(hist.bin_edges, cfg.mu_R_um, cfg.sigma_R_um)
    metrics = []
    if reference is not None:
        metrics.append(("kld_reference_vs_model",
                        empirical_kld(reference, hist)))
        metrics.append(("kld_reference_vs_gaussian",
                        empirical_kld(reference, gauss)))
    else:
        metrics.append(("kld_model_vs_gaussian", empirical_kld(hist, gauss)))
    _write_csv(args.kld_output, ["metric", "value"], metrics)
    return EXIT_OK


def _align_histograms(a, b):
    """Pad two same-width, same-anchor histograms onto their union range."""
    from .montecarlo import BinnedHistogram

    wa = np.diff(a.bin_edges)
    wb = np.diff(b.bin_edges)
    width = wa[0]
    if not (np.allclose(wa, width) and np.allclose(wb, width)):
        raise DataFormatError("reference histogram bins are not uniform")
    offset = (a.bin_edges[0] - b.bin_edges[0]) / width
    if abs(offset - round(offset)) > 1e-6:
        raise DataFormatError("reference histogram bins are misaligned")
    lo = min(a.bin_edges[0], b.bin_edges[0])
    hi = max(a.bin_edges[-1], b.bin_edges[-1])
    n = int(round((hi - lo) / width))
    edges = lo + width * np.arange(n + 1)

    def embed(h):
        shift = int(round((h.bin_edges[0] - lo) / width))
        masses = np.zeros(n)
        masses[shift:shift + len(h.masses)] = h.masses
        return BinnedHistogram(bin_edges=edges, masses=masses)

    return embed(a), embed(b)


def _add_common(p):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.add_argument("--a-mm", type=float, help="dressing height, mm")
    p.add_argument("--omega", type=float, help="radius-diffusivity exponent")
    p.add_argument("--mu-r-um", type=float, help="mean radius, um")
    p.add_argument("--sigma-r-um", type=float, help="radius spread, um")
    p.add_argument("--d-in", type=float, help="in-particle diffusivity, mm^2/h")
    p.add_argument("--d-out", type=float, help="dressing diffusivity, mm^2/h")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--hypothesis", choices=("equal", "volume"),
                   help="drug-loading hypothesis")
    p.add_argument("--grid-start", type=float, help="grid start, h")
    p.add_argument("--grid-stop", type=float, help="grid stop, h")
    p.add_argument("--grid-step", type=float, help="grid step, h")
    p.add_argument("--max-terms", type=int, help="series term cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="microrelease",
        description="Microparticle drug-release modeling: forward curves, "
                    "size statistics, Monte Carlo, and calibration.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward release curves")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="mean/std of release over random radii")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="calibrate against a dataset CSV")
    p.add_argument("dataset", help="CSV with header time_h,fraction")
    p.add_argument("--mode", choices=("channel", "end-to-end", "ritger-peppas"),
                   default="end-to-end")
    p.add_argument("--early-cutoff", type=float, default=0.6,
                   help="fraction cutoff for the power-law window")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sensitivity",
                       help="release spread vs. exponent at fixed d_i")
    _add_common(p)
    p.add_argument("--omega-grid", type=float, nargs="+")
    p.add_argument("--di-targets", type=float, nargs="+")
    p.add_argument("--eval-time", type=float, default=24.0)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("sample", help="draw radii, histogram, divergences")
    _add_common(p)
    p.add_argument("--hist-output", help="histogram CSV path")
    p.add_argument("--kld-output", help="divergence metrics path (default stdout)")
    p.add_argument("--reference", help="reference histogram CSV")
    p.add_argument("--bin-width-um", type=float, default=0.14)
    p.add_argument("--origin-um", type=float, default=0.0)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataFormatError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
