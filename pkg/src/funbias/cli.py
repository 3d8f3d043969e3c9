"""Command-line entry point: ``weights``, ``constants``, ``estimate``, ``simulate``.

Exit codes: 0 success, 1 usage error, 2 numerical/domain error.  Errors are
reported on stderr as one JSON line ``{"error": ..., "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .biasred import (
    DEFAULT_CONDITION_CAP,
    BandwidthDesign,
    get_link,
    h1_design,
    projector_weights,
    sum_g_c_squared,
)
from .curves import METRICS, read_curve_csv, read_sample_csv
from .design import DesignSpec
from .errors import NumericalError
from .estimator import PhiTransform, estimate
from .kernels import ONE_SIDED_NAMES, SYMMETRIC_NAMES, make_one_sided, make_symmetric
from .sim import ExperimentConfig, reports_to_csv, run_experiment, table_configs
from .theory import SmallBallModel, compute_constants

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, out: Optional[str]) -> None:
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


# ----------------------------------------------------------------- subcommands


def cmd_weights(args) -> int:
    spec = DesignSpec.parse(args.design) if args.design else None
    if spec is not None:
        design = spec.build(pilot_h=args.pilot_h)
    elif args.bandwidths:
        design = h1_design(_floats(args.bandwidths))
    else:
        raise UsageError("weights: give --design or --bandwidths")
    if args.b_values:
        b = np.asarray(_floats(args.b_values))
        if len(b) != design.B:
            raise UsageError(f"weights: got {len(b)} b values for {design.B} bandwidths")
        design = BandwidthDesign(
            np.column_stack([design.bandwidths, b]),
            (get_link(args.link), get_link(args.b_link)),
            (design.base[0], float(b.min())),
        )
    elif args.link != "h":
        design = BandwidthDesign(design.vectors, (get_link(args.link),), design.base)
    w = projector_weights(design, condition_cap=args.condition_cap)
    result = {
        "design": spec.to_dict() if spec else None,
        "links": [link.name for link in design.links],
        "parameters": design.vectors.tolist(),
        "weights": w.g.tolist(),
        "sum": float(np.sum(w.g)),
        "residuals": w.residuals(),
        "condition_number": w.condition_number,
    }
    if design.p == 1:
        result["sum_g_c2"] = sum_g_c_squared(design, w)
    _emit(_dump(result), args.out)
    return EXIT_OK


def _tau_from_args(args) -> SmallBallModel:
    if args.tau == "dirac":
        return SmallBallModel.dirac()
    return SmallBallModel.power(args.gamma)


def cmd_constants(args) -> int:
    kernel = make_one_sided(args.kernel)
    tau = _tau_from_args(args)
    design = DesignSpec.parse(args.design).build(pilot_h=args.pilot_h) if args.design else None
    c = compute_constants(kernel, tau, design)
    result = {
        "kernel": kernel.name,
        "satisfies_a4": kernel.satisfies_a4,
        "tau": {"family": tau.family, "gamma": tau.gamma if tau.family == "power" else None},
        "m0": c.m0,
        "m1": c.m1,
        "m3": c.m3,
        "m0_over_m1": c.m0 / c.m1 if c.m1 else None,
        "m3_over_m1": c.m3 / c.m1 if c.m1 else None,
        "gamma_factor": c.gamma_var,
    }
    if design is not None:
        result["B"] = design.B
        result["sum_g_c2"] = sum_g_c_squared(design)
    _emit(_dump(result), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    sample = read_sample_csv(args.sample)
    chi = read_curve_csv(args.chi)
    kernel = make_one_sided(args.kernel)
    if args.phi == "reg":
        phi = PhiTransform.identity()
    elif args.phi == "cdf":
        if args.y is None:
            raise UsageError("estimate: --phi cdf needs --y")
        phi = PhiTransform.indicator(args.y)
    else:
        if args.y is None or args.b is None:
            raise UsageError("estimate: --phi pdf needs --y and --b")
        phi = PhiTransform.density(args.y, args.b, make_symmetric(args.k0))
    res = estimate(sample, chi, args.h, kernel, phi, metric=args.metric)
    _emit(f"value,neighbor_count\n{res.value!r},{res.neighbor_count}\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    overrides = {}
    for key in ("seed", "replications", "n"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.metric:
        overrides["metric"] = args.metric
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        configs = raw if isinstance(raw, list) else [raw]
        configs = [replace(ExperimentConfig.from_dict(c), **overrides) for c in configs]
    elif args.table is not None:
        configs = table_configs(args.table, **overrides)
    else:
        raise UsageError("simulate: give --config or --table")
    reports = [run_experiment(cfg, threads=args.threads) for cfg in configs]
    _emit(reports_to_csv(reports), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="funbias", description="Bias-reduced kernel estimators for functional data.")
    p.add_argument("--version", action="version", version=f"funbias {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("weights", help="projector weights of a bandwidth design (JSON)")
    w.add_argument("--design", help="centered:h,B,sw | interval:h0,hu,B | cluster:lo_a,lo_b,hi_a,hi_b,B[,prop]")
    w.add_argument("--bandwidths", help="explicit comma-separated bandwidths h_i")
    w.add_argument("--pilot-h", type=float, default=None, help="base bandwidth for cluster designs")
    w.add_argument("--link", default="h", choices=["h", "h^2"], help="link for the h column (default h)")
    w.add_argument("--b-values", help="comma-separated b_i; adds a second column (H2 design)")
    w.add_argument("--b-link", default="h", choices=["h", "h^2"], help="link for the b column (default raw b)")
    w.add_argument("--condition-cap", type=float, default=DEFAULT_CONDITION_CAP, help="max cond(H^T H)")
    w.add_argument("--out", help="output file (default stdout)")
    w.set_defaults(func=cmd_weights)

    c = sub.add_parser("constants", help="asymptotic constants M0, M1, M3 and the variance factor (JSON)")
    c.add_argument("--kernel", default="shifted_linear", choices=ONE_SIDED_NAMES)
    c.add_argument("--tau", default="power", choices=["power", "dirac"], help="small-ball family")
    c.add_argument("--gamma", type=float, default=1.0, help="exponent of the power family tau0(s)=s^gamma")
    c.add_argument("--design", help="bandwidth design string as for `weights`; omitted means the pilot")
    c.add_argument("--pilot-h", type=float, default=None, help="base bandwidth for cluster designs")
    c.add_argument("--out", help="output file (default stdout)")
    c.set_defaults(func=cmd_constants)

    e = sub.add_parser("estimate", help="kernel estimate at a query curve (CSV)")
    e.add_argument("--sample", required=True, help="wide sample CSV (t grid header, last column Y)")
    e.add_argument("--chi", required=True, help="query curve CSV (columns t,value)")
    e.add_argument("--h", type=float, required=True, help="bandwidth")
    e.add_argument("--kernel", default="quadratic", choices=ONE_SIDED_NAMES)
    e.add_argument("--phi", default="reg", choices=["reg", "cdf", "pdf"])
    e.add_argument("--y", type=float, help="response level for cdf/pdf")
    e.add_argument("--b", type=float, help="response bandwidth for pdf")
    e.add_argument("--k0", default="epanechnikov", choices=SYMMETRIC_NAMES)
    e.add_argument("--metric", default="l2", choices=METRICS)
    e.add_argument("--out", help="output file (default stdout)")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="Monte Carlo study (CSV)")
    s.add_argument("--config", help="JSON experiment config (object or list of objects)")
    s.add_argument("--table", type=int, choices=range(1, 11), metavar="N", help="run the preset grid for table N (1-10)")
    s.add_argument("--seed", type=int)
    s.add_argument("--replications", type=int)
    s.add_argument("--n", type=int, help="sample size override")
    s.add_argument("--metric", choices=METRICS, help="distance override")
    s.add_argument("--threads", type=int, default=None, help="worker threads (env FUNBIAS_THREADS); output is unaffected")
    s.add_argument("--out", help="output CSV (default stdout)")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        _error("UsageError", str(exc))
        return EXIT_USAGE
    except NumericalError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_NUMERICAL
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_USAGE


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
