"""Command-line interface: ``memest <subcommand> ...``.

Exit codes: 0 success, 1 computation or validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import theory
from .estimators import EstimatorDomainError, EstimatorId
from .moments import ParameterError, derive_moments, dumps_params, read_params, write_params
from .report import (
    REFERENCE_DATASET,
    REFERENCE_PARAMS,
    DataError,
    data_path,
    discrepancy_report,
    ingest,
    make_report,
    params_from_dataset,
)
from .simulate import CSV_HEADER, DEFAULT_REPLICATIONS, SimulationConfig, SimulationError, run_simulation


def _load_params(value: str, n=None):
    path = data_path(REFERENCE_PARAMS) if value == "reference" else Path(value)
    p = read_params(path)
    return p.with_n(n) if n else p


def _add_params(parser):
    parser.add_argument("--params", required=True,
                        help="key=value params file, or 'reference' for the bundled reference parameters")
    parser.add_argument("--n", type=int, default=None, help="override the sample size")


def cmd_moments(args) -> int:
    p = _load_params(args.params, args.n)
    m = derive_moments(p)
    fields = ("r_m", "c_x", "c_y", "v_ym", "v_xm", "v_yxm")
    if args.format == "csv":
        print(",".join(fields))
        print(",".join(repr(getattr(m, f)) for f in fields))
    else:
        for f in fields:
            print(f"{f:<6} {getattr(m, f):.6f}")
    return 0


def cmd_report(args) -> int:
    table = make_report(_load_params(args.params, args.n), m1=args.m1)
    text = table.to_csv() if args.format == "csv" else table.to_text() + "\n"
    sys.stdout.write(text)
    return 0


def cmd_discrepancy(args) -> int:
    rep = discrepancy_report(_load_params(args.params, args.n), m1=args.m1,
                             replications=args.reps, seed=args.seed, workers=args.workers)
    print(rep.to_text())
    return 0


def cmd_optimum(args) -> int:
    p = _load_params(args.params, args.n)
    o3 = theory.optimum_t3(p)
    o5 = theory.optimum_t5(p)
    op = theory.optimum_tp(p, args.m1)
    print(f"t3  w1*={o3.w1_star:.6f}  w2*={o3.w2_star:.6f}  min MSE={o3.min_mse:.6f}")
    print(f"t5  alpha*={o5.alpha_star:.6f}  min MSE={o5.min_mse:.6f}")
    closed = "undefined" if op.q_closed_form is None else f"{op.q_closed_form:.6f}"
    print(f"tp  m1={args.m1:g}  q*={op.q_star:.6f} (numeric)  min MSE={op.min_mse:.6f}  "
          f"published closed-form q={closed}")
    return 0


def _estimator_from_args(args, p) -> EstimatorId:
    kind = args.estimator.upper()
    if kind == "T3":
        if args.w1 is None or args.w2 is None:
            opt = theory.optimum_t3(p)
            w1 = opt.w1_star if args.w1 is None else args.w1
            w2 = opt.w2_star if args.w2 is None else args.w2
        else:
            w1, w2 = args.w1, args.w2
        return EstimatorId("T3", w1=w1, w2=w2)
    if kind == "T5":
        alpha = theory.optimum_t5(p).alpha_star if args.alpha is None else args.alpha
        return EstimatorId("T5", alpha=alpha)
    if kind == "TP":
        q = theory.optimum_tp(p, args.m1).q_star if args.q is None else args.q
        return EstimatorId("TP", q=q, m1=args.m1)
    return EstimatorId(kind)


def cmd_simulate(args) -> int:
    p = _load_params(args.params, args.n)
    cfg = SimulationConfig(p, _estimator_from_args(args, p), replications=args.reps, seed=args.seed)
    result = run_simulation(cfg, workers=args.workers)
    if not args.no_header:
        print(CSV_HEADER)
    print(result.to_csv_row())
    if result.unreliable:
        print(f"warning: {result.failed_draws} of {result.replications} draws failed; result unreliable",
              file=sys.stderr)
    return 0


def cmd_ingest_params(args) -> int:
    d = ingest(args.data, args.col_y, args.col_x, args.col_y_true, args.col_x_true)
    p = params_from_dataset(d, args.n)
    if args.output:
        write_params(p, args.output)
    else:
        print(dumps_params(p), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("moments", help="derived moments R, Cx, Cy, V_ym, V_xm, V_yxm")
    _add_params(sp)
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("report", help="MSE decomposition and PRE table")
    _add_params(sp)
    sp.add_argument("--m1", type=float, default=1.0, help="family exponent m1 for the tp row")
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("discrepancy", help="published values vs formula and Monte Carlo")
    _add_params(sp)
    sp.add_argument("--m1", type=float, default=1.0)
    sp.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS, help="0 skips the simulation")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_discrepancy)

    sp = sub.add_parser("optimum", help="optimum constants, closed form and numeric")
    _add_params(sp)
    sp.add_argument("--m1", type=float, default=1.0)
    sp.set_defaults(func=cmd_optimum)

    sp = sub.add_parser("simulate", help="Monte Carlo bias/MSE of one estimator (CSV row)")
    _add_params(sp)
    sp.add_argument("--estimator", required=True, type=str.lower,
                    choices=("mean", "t1", "t2", "t3", "t4", "t5", "tp"))
    sp.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--w1", type=float, help="t3 weight on ybar (default: optimum)")
    sp.add_argument("--w2", type=float, help="t3 weight on (mu_x - xbar) (default: optimum)")
    sp.add_argument("--alpha", type=float, help="t5 mixing constant (default: optimum)")
    sp.add_argument("--q", type=float, help="family weight q (default: numeric optimum)")
    sp.add_argument("--m1", type=float, default=1.0, help="family exponent m1")
    sp.add_argument("--no-header", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ingest-params", help="estimate a params file from a CSV with true values")
    sp.add_argument("--data", default=None,
                    help=f"CSV file (default: bundled {REFERENCE_DATASET})")
    sp.add_argument("--col-y", default="y_obs")
    sp.add_argument("--col-x", default="x_obs")
    sp.add_argument("--col-y-true", default="y_true")
    sp.add_argument("--col-x-true", default="x_true")
    sp.add_argument("--n", type=int, default=None, help="sample size (default: number of rows)")
    sp.add_argument("-o", "--output", help="write the params file here instead of stdout")
    sp.set_defaults(func=cmd_ingest_params)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "data", "") is None:
        args.data = data_path(REFERENCE_DATASET)
    try:
        return args.func(args)
    except (ParameterError, DataError, EstimatorDomainError, SimulationError,
            theory.DegenerateMomentsError, ValueError, OSError) as exc:
        print(f"memest: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
