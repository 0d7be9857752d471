"""Command-line front end: ``homf <command> [options]``.

Every command writes CSV (header row first, CRLF line ends) or JSON (UTF-8,
fixed key order) to stdout or ``--output``.  Identical invocations give
identical bytes.

Exit status: 0 on success, 2 for invalid input, 3 when a numerical limit is
hit (grid too coarse, aliasing, an approximation outside its range, ...).
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidParameters, NumericalLimitError, ValidationError
from .estimate import ExperimentConfig, default_operating_offset, report_rows_csv, run_experiment
from .figures import FIGURES, figure_data, to_csv
from .hom import (
    PROB_EPS,
    BeamsplitterConfig,
    cfi_gaussian,
    cfi_numeric,
    cfi_zero_delay,
    coincidence_probability,
    coincidence_probability_gaussian,
    dip_width_estimate,
    hom_dip,
    max_cfi_gaussian,
    visibility_overlap,
)
from .metrology import effective_qfi, qcrb, qfi_matrix
from .serialization import amplitude_to_dict, clicks_to_dict, dumps, load_amplitude, save_amplitude
from .spectra import (
    DEFAULT_SPAN,
    FREQUENCY,
    TIME,
    GaussianJsaParams,
    Grid2D,
    SpectralMoments,
    default_grid_points,
    gaussian_jsa,
    moments,
    to_spectral,
    to_temporal,
)
from .timeresolved import (
    DetectorConfig,
    cfi_matrix_timeresolved,
    click_distribution_exact,
    click_distribution_slow,
    effective_information,
    hom_kernel,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

MONTECARLO_KEYS = {
    "bw1": float,
    "bw2": float,
    "cov": float,
    "normalized_cov": float,
    "mean1": float,
    "mean2": float,
    "eta": float,
    "true_tau_minus": float,
    "operating_offset": float,
    "n_trials": int,
    "n_experiments": int,
    "seed": int,
    "branch": int,
    "complete_cfi": bool,
}

MONTECARLO_HELP = """\
config file: flat key=value lines, '#' starts a comment.  Keys:
  bw1, bw2            rms bandwidths [rad/s] (default 1, 1)
  cov                 frequency covariance [(rad/s)^2]
  normalized_cov      cov / (bw1*bw2), used instead of cov (default -0.5)
  mean1, mean2        mean frequencies [rad/s] (default 0)
  eta                 beamsplitter reflectance (default 0.5)
  true_tau_minus      true relative delay [s] (default 0)
  operating_offset    known offset of the operating point [s]
                      (default: CFI-optimal delay, or T/5 at unit visibility)
  n_trials            pairs per experiment (default 10000)
  n_experiments       independent experiments (default 1000)
  seed                64-bit RNG seed (default 0)
  branch              side of the dip, +1 or -1 (default +1)
  complete_cfi        true: bound from the full binary-outcome CFI;
                      false: coincidence-only CFI (default false)
Command-line flags override file values."""


@dataclass(frozen=True)
class SweepSpec:
    """A named one-dimensional sweep, linear or logarithmic."""

    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise InvalidParameters(f"sweep {self.name!r} needs count >= 2, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise InvalidParameters(f"sweep scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise InvalidParameters(f"log sweep {self.name!r} needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.count)
        return np.linspace(self.start, self.stop, self.count)


# ---------------------------------------------------------------- helpers

def _add_state_flags(p: argparse.ArgumentParser, jsa_file: bool = False) -> None:
    g = p.add_argument_group("two-photon state (Gaussian JSA)")
    g.add_argument("--bw1", type=float, default=1.0, help="rms bandwidth of photon 1 [rad/s]")
    g.add_argument("--bw2", type=float, default=1.0, help="rms bandwidth of photon 2 [rad/s]")
    cov = g.add_mutually_exclusive_group()
    cov.add_argument("--cov", type=float, help="frequency covariance [(rad/s)^2] (default 0)")
    cov.add_argument("--normalized-cov", type=float, help="covariance divided by bw1*bw2")
    g.add_argument("--mean1", type=float, default=0.0, help="mean frequency of photon 1 [rad/s]")
    g.add_argument("--mean2", type=float, default=0.0, help="mean frequency of photon 2 [rad/s]")
    if jsa_file:
        g.add_argument("--jsa", type=Path, help="load the amplitude from a JSON file instead")


def _cov(args) -> float:
    if args.normalized_cov is not None:
        return args.normalized_cov * args.bw1 * args.bw2
    return 0.0 if args.cov is None else args.cov


def _params(args) -> GaussianJsaParams:
    return GaussianJsaParams(args.mean1, args.mean2, args.bw1, args.bw2, _cov(args))


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", type=Path, help="write here instead of stdout")


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8", newline="")


def _grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-points", type=int, default=None,
                   help="points per frequency axis (default: HOMF_GRID_POINTS or 257)")
    p.add_argument("--span", type=float, default=DEFAULT_SPAN,
                   help="grid half-width in rms bandwidths (default %(default)s)")


def _gaussian_amplitude(params: GaussianJsaParams, args):
    n = args.grid_points if args.grid_points is not None else default_grid_points()
    return gaussian_jsa(params, Grid2D.around(params, span=args.span, n=n))


def _state_amplitude(args):
    """Frequency-domain amplitude from ``--jsa`` or from the Gaussian flags."""
    if getattr(args, "jsa", None) is not None:
        amp = load_amplitude(args.jsa)
        return amp if amp.domain == FREQUENCY else to_spectral(amp)
    return _gaussian_amplitude(_params(args), args)


def _state_dict(args) -> dict:
    if getattr(args, "jsa", None) is not None:
        return {"jsa_file": str(args.jsa)}
    return asdict(_params(args))


def _bound_dict(q: float, n: int) -> dict:
    if not q > 0:
        return {"variance_s2": None, "std_s": None}
    b = qcrb(q, n)
    return {"variance_s2": b.variance_bound, "std_s": b.std_bound}


# ---------------------------------------------------------------- commands

def cmd_qfi(args) -> None:
    m = SpectralMoments(args.mean1, args.mean2, args.bw1, args.bw2, _cov(args))
    q = qfi_matrix(m)
    plus, minus = effective_qfi(q)
    out = {
        "moments": asdict(m),
        "n_trials": args.n,
        "qfi_matrix_rad2_per_s2": {"q_pp": q.q_pp, "q_mm": q.q_mm, "q_pm": q.q_pm},
        "q_eff_plus": plus,
        "q_eff_minus": minus,
        "qcrb_plus": _bound_dict(plus, args.n),
        "qcrb_minus": _bound_dict(minus, args.n),
    }
    if args.format == "csv":
        rows = [["q_pp", q.q_pp], ["q_mm", q.q_mm], ["q_pm", q.q_pm],
                ["q_eff_plus", plus], ["q_eff_minus", minus]]
        for name in ("qcrb_plus", "qcrb_minus"):
            b = out[name]
            rows.append([f"{name}_std_s", b["std_s"] if b["std_s"] is not None else math.inf])
        _emit(_kv_csv(rows), args.output)
    else:
        _emit(dumps(out), args.output)


def _kv_csv(rows) -> str:
    lines = ["quantity,value"] + [f"{k},{float(v)!r}" for k, v in rows]
    return "\r\n".join(lines) + "\r\n"


def cmd_hom_scan(args) -> None:
    closed = args.method == "closed-form"
    if closed and args.jsa is not None:
        raise InvalidParameters("--jsa needs --method quadrature")
    if closed:
        params = _params(args)
        width = hom_dip(params).width
    else:
        jsa = _state_amplitude(args)
        width = dip_width_estimate(jsa)
    lo = -5 * width if args.tau_min is None else args.tau_min
    hi = 5 * width if args.tau_max is None else args.tau_max
    taus = SweepSpec("tau_minus", lo, hi, args.count).values()
    if closed:
        p = coincidence_probability_gaussian(params, taus, args.eta)
        if args.eta == 0.5:
            f = np.asarray(cfi_gaussian(params, taus, complete=args.complete), dtype=float)
        else:
            f = _fd_cfi(lambda t: coincidence_probability_gaussian(params, t, args.eta), taus, width,
                        args.complete)
    else:
        bs = BeamsplitterConfig(args.eta)
        p = coincidence_probability(jsa, taus, bs)
        f = _fd_cfi(lambda t: coincidence_probability(jsa, t, bs), taus, width, args.complete)
    cols = ["tau_minus [s]", "tau_minus/T", "P_c", "F [1/s^2]"]
    rows = np.column_stack([taus, taus / width, p, f])
    _emit(to_csv(cols, rows), args.output)


def _fd_cfi(prob, taus, width, complete):
    h = width / 1000
    p = prob(taus)
    dp = (prob(taus + h) - prob(taus - h)) / (2 * h)
    ok = (p > PROB_EPS) & (p < 1 - PROB_EPS)
    f = np.full_like(p, np.nan)
    f[ok] = dp[ok] ** 2 / p[ok]
    if complete:
        f[ok] /= 1 - p[ok]
    return f


def cmd_fisher(args) -> None:
    closed = args.method == "closed-form"
    if closed and args.jsa is not None:
        raise InvalidParameters("--jsa needs --method quadrature")
    if closed:
        params = _params(args)
        m = params.to_moments()
        width = hom_dip(params).width
    else:
        jsa = _state_amplitude(args)
        m = moments(jsa)
        width = dip_width_estimate(jsa)
    tau = args.tau if args.tau_over_T is None else args.tau_over_T * width
    if closed:
        f = cfi_gaussian(params, tau)
        fc = cfi_gaussian(params, tau, complete=True)
    else:
        f = cfi_numeric(jsa, tau)
        fc = cfi_numeric(jsa, tau, complete=True)
    q = qfi_matrix(m)
    _, q_minus = effective_qfi(q)
    out = {
        "state": _state_dict(args),
        "method": args.method,
        "tau_minus_s": tau,
        "dip_width_s": width,
        "cfi_coincidence_1_per_s2": float(f),
        "cfi_complete_1_per_s2": float(fc),
        "q_eff_minus": q_minus,
        "q_mm": q.q_mm,
        "cfi_over_q_eff_minus": float(f) / q_minus if q_minus > 0 else None,
        "n_trials": args.n,
        "crb_std_s": math.sqrt(1 / (args.n * f)) if f > 0 else None,
        "qcrb_minus": _bound_dict(q_minus, args.n),
    }
    if closed:
        tau_opt, f_max = max_cfi_gaussian(params)
        out["visibility"] = hom_dip(params).visibility
        out["optimal_tau_minus_s"] = tau_opt
        out["cfi_at_optimum_1_per_s2"] = f_max
    else:
        out["visibility"] = visibility_overlap(jsa)
    _emit(dumps(out), args.output)


def cmd_figure(args) -> None:
    kwargs = {} if args.points is None else {"n": args.points}
    cols, rows = figure_data(args.which, **kwargs)
    _emit(to_csv(cols, rows), args.output)


def cmd_time_resolved(args) -> None:
    det = DetectorConfig(theta=args.theta, tau_res=args.tau_res, tau_e=args.tau_e, eta=args.eta)
    jta = to_temporal(_state_amplitude(args))
    model = click_distribution_slow if args.model == "slow" else click_distribution_exact
    dist = model(jta, args.tau_minus, args.tau_plus, det)
    out = {
        "state": _state_dict(args),
        "detector": asdict(det) | {"effective_resolution_s": det.effective_resolution},
        "model": args.model,
        "tau_minus_s": args.tau_minus,
        "tau_plus_s": args.tau_plus,
        "p0": float(dist.p0),
        "masses": dist.masses(),
        "total_probability": dist.total(),
        "hom_kernel": hom_kernel(jta, args.tau_minus, det.eta),
    }
    if args.fisher:
        fm = cfi_matrix_timeresolved(jta, args.tau_minus, args.tau_plus, det, model=args.model)
        out["fisher_1_per_s2"] = {"f_pp": float(fm[0, 0]), "f_mm": float(fm[1, 1]),
                                  "f_pm": float(fm[0, 1]), "f_eff_minus": effective_information(fm)}
    if args.densities:
        out["clicks"] = clicks_to_dict(dist)
    _emit(dumps(out), args.output)


def _read_config(path: Path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        text = path.read_text(encoding="utf-8")
        parser.read_string("[montecarlo]\n" + text, source=str(path))
    except (OSError, configparser.Error) as exc:
        raise InvalidParameters(f"cannot read config {path}: {exc}") from None
    out = {}
    section = parser["montecarlo"]
    for key in section:
        if key not in MONTECARLO_KEYS:
            raise InvalidParameters(f"{path}: unknown key {key!r}")
        kind = MONTECARLO_KEYS[key]
        try:
            out[key] = section.getboolean(key) if kind is bool else kind(section[key])
        except ValueError:
            raise InvalidParameters(f"{path}: bad value for {key!r}: {section[key]!r}") from None
    return out


def cmd_montecarlo(args) -> None:
    values = {"bw1": 1.0, "bw2": 1.0, "mean1": 0.0, "mean2": 0.0, "eta": 0.5,
              "true_tau_minus": 0.0, "n_trials": 10_000, "n_experiments": 1_000, "seed": 0,
              "branch": 1, "complete_cfi": False}
    if args.config is not None:
        values.update(_read_config(args.config))
    for key in MONTECARLO_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "cov" in values and "normalized_cov" in values:
        raise InvalidParameters("give either cov or normalized_cov, not both")
    if "cov" not in values:
        values.setdefault("normalized_cov", -0.5)
    if "normalized_cov" in values:
        params = GaussianJsaParams.from_normalized(values["bw1"], values["bw2"], values["normalized_cov"],
                                                   values["mean1"], values["mean2"])
    else:
        params = GaussianJsaParams(values["mean1"], values["mean2"], values["bw1"], values["bw2"],
                                   values["cov"])
    offset = values.get("operating_offset")
    if offset is None:
        offset = default_operating_offset(params)
    cfg = ExperimentConfig(
        params=params,
        eta=values["eta"],
        true_tau_minus=values["true_tau_minus"],
        operating_offset=offset,
        n_trials=values["n_trials"],
        n_experiments=values["n_experiments"],
        rng_seed=values["seed"],
        branch=values["branch"],
    )
    report = run_experiment(cfg, complete_cfi=values["complete_cfi"])
    dip = hom_dip(params)
    out = {
        "config": cfg.to_dict(),
        "complete_cfi": values["complete_cfi"],
        "visibility": dip.visibility,
        "dip_width_s": dip.width,
        "report": report.summary(),
    }
    if args.rows_csv is not None:
        args.rows_csv.write_text(report_rows_csv(report), encoding="utf-8", newline="")
    _emit(dumps(out), args.output)


def cmd_jsa_export(args) -> None:
    amp = _gaussian_amplitude(_params(args), args)
    if args.domain == TIME:
        amp = to_temporal(amp)
    text = dumps(amplitude_to_dict(amp))
    if args.output is None:
        sys.stdout.write(text)
    else:
        save_amplitude(amp, args.output)


def cmd_jsa_import(args) -> None:
    amp = load_amplitude(args.path)
    jsa = amp if amp.domain == FREQUENCY else to_spectral(amp)
    m = moments(jsa)
    q = qfi_matrix(m)
    plus, minus = effective_qfi(q)
    out = {
        "file": str(args.path),
        "domain": amp.domain,
        "grid": amp.grid.to_dict(),
        "norm": amp.norm(),
        "moments": asdict(m),
        "q_eff_plus": plus,
        "q_eff_minus": minus,
        "visibility": visibility_overlap(jsa),
        "cfi_zero_delay_1_per_s2": cfi_zero_delay(jsa),
    }
    _emit(dumps(out), args.output)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homf",
        description="Timing precision limits for two-photon (HOM) delay measurements.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("qfi", help="QFI matrix, effective QFIs and quantum Cramer-Rao bounds",
                       allow_abbrev=False)
    _add_state_flags(p)
    p.add_argument("--n", type=int, default=1, help="number of repetitions (default 1)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_output(p)
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("hom-scan", help="coincidence probability and CFI against relative delay",
                       allow_abbrev=False)
    _add_state_flags(p, jsa_file=True)
    p.add_argument("--method", choices=("closed-form", "quadrature"), default="closed-form")
    p.add_argument("--tau-min", type=float, help="first delay [s] (default -5 T)")
    p.add_argument("--tau-max", type=float, help="last delay [s] (default +5 T)")
    p.add_argument("--count", type=int, default=201, help="number of delays (default 201)")
    p.add_argument("--eta", type=float, default=0.5, help="beamsplitter reflectance")
    p.add_argument("--complete", action="store_true",
                   help="report the full binary-outcome CFI instead of the coincidence-only form")
    _grid_args(p)
    _add_output(p)
    p.set_defaults(func=cmd_hom_scan)

    p = sub.add_parser("fisher", help="HOM classical Fisher information at one delay",
                       allow_abbrev=False)
    _add_state_flags(p, jsa_file=True)
    where = p.add_mutually_exclusive_group()
    where.add_argument("--tau", type=float, default=0.0, help="relative delay [s]")
    where.add_argument("--tau-over-T", type=float, help="relative delay in dip widths")
    p.add_argument("--method", choices=("closed-form", "quadrature"), default="closed-form")
    p.add_argument("--n", type=int, default=1, help="number of repetitions (default 1)")
    _grid_args(p)
    _add_output(p)
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("figure", help="curve data for figure 2, 3 or 5 as CSV", allow_abbrev=False)
    p.add_argument("which", type=int, choices=FIGURES)
    p.add_argument("--points", type=int, help="abscissa points (default depends on the figure)")
    _add_output(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("time-resolved", help="click probabilities with time-resolving detectors",
                       allow_abbrev=False)
    _add_state_flags(p, jsa_file=True)
    p.add_argument("--theta", type=float, default=1.0, help="detector efficiency (default 1)")
    p.add_argument("--tau-res", type=float, default=10.0, help="detector time resolution [s] (default 10)")
    p.add_argument("--tau-e", type=float, default=0.0, help="electronic response time [s] (default 0)")
    p.add_argument("--eta", type=float, default=0.5, help="beamsplitter reflectance")
    p.add_argument("--tau-minus", type=float, default=0.0, help="relative delay [s]")
    p.add_argument("--tau-plus", type=float, default=0.0, help="mean delay [s]")
    p.add_argument("--model", choices=("exact", "slow"), default="exact")
    p.add_argument("--fisher", action="store_true", help="include the Fisher matrix")
    p.add_argument("--densities", action="store_true", help="include the click densities")
    _grid_args(p)
    _add_output(p)
    p.set_defaults(func=cmd_time_resolved)

    p = sub.add_parser("montecarlo", help="simulate delay estimation and compare with the bounds",
                       epilog=MONTECARLO_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
                       allow_abbrev=False)
    p.add_argument("--config", type=Path, help="key=value config file (keys below)")
    p.add_argument("--bw1", type=float)
    p.add_argument("--bw2", type=float)
    cov = p.add_mutually_exclusive_group()
    cov.add_argument("--cov", type=float)
    cov.add_argument("--normalized-cov", type=float)
    p.add_argument("--mean1", type=float)
    p.add_argument("--mean2", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--true-tau-minus", type=float)
    p.add_argument("--operating-offset", type=float)
    p.add_argument("--n-trials", type=int)
    p.add_argument("--n-experiments", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--branch", type=int, choices=(1, -1))
    p.add_argument("--complete-cfi", action="store_true", default=None)
    p.add_argument("--rows-csv", type=Path, help="also write one CSV row per experiment here")
    _add_output(p)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("jsa", help="export or inspect joint spectral amplitude files", allow_abbrev=False)
    jsub = p.add_subparsers(dest="action", required=True, metavar="action")
    e = jsub.add_parser("export", help="write a Gaussian amplitude as JSON", allow_abbrev=False)
    _add_state_flags(e)
    e.add_argument("--domain", choices=(FREQUENCY, TIME), default=FREQUENCY)
    _grid_args(e)
    _add_output(e)
    e.set_defaults(func=cmd_jsa_export)
    i = jsub.add_parser("import", help="load an amplitude file and summarize it", allow_abbrev=False)
    i.add_argument("path", type=Path)
    _add_output(i)
    i.set_defaults(func=cmd_jsa_import)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"homf: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalLimitError as exc:
        print(f"homf: numerical limit: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"homf: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
