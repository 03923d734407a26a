"""Unified command-line interface.

Data goes to stdout as JSON (CSV for `tables`); diagnostics go to stderr.
Exit codes: 0 success, 1 usage or data error, 2 computational refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import construction, crowd, kernels, simulate, weightstats
from .channels import parse_channel
from .construction import DEFAULT_SEED
from .errors import RefusalError
from .gf2 import BitMatrix


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)


def _emit_json(data, path: str | None) -> None:
    _emit(json.dumps(_jsonable(data), indent=2) + "\n", path)


def _load_kernel(target: str) -> kernels.Kernel:
    try:
        return kernels.kernel_by_name(target)
    except ValueError:
        pass
    p = Path(target)
    if not p.exists():
        raise ValueError(f"{target!r} is neither a catalog kernel nor a file")
    return kernels.Kernel.from_matrix(BitMatrix.from_text(p.read_text(encoding="ascii")))


def _load_generator(path: str | None) -> construction.SparseGenerator:
    text = Path(path).read_text(encoding="ascii") if path else sys.stdin.read()
    return construction.SparseGenerator.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_kernel(args) -> int:
    if args.action != "analyze":
        raise ValueError(f"unknown kernel action {args.action!r}")
    kern = _load_kernel(args.target)
    _emit_json(
        {
            "l": kern.l,
            "matrix": kern.matrix.to_lists(),
            "partial_distances": list(kern.partial_distances),
            "exponent": kern.exponent,
            "column_weights": list(kern.column_weights),
            "sparsity_ratio": kernels.sparsity_ratio(kern),
        },
        args.output,
    )
    return 0


def _cmd_construct(args) -> int:
    kern = _load_kernel(args.kernel)
    spec = construction.make_code_spec(
        kern,
        args.n,
        parse_channel(args.channel),
        rate=args.rate,
        delta=args.delta,
        trials=args.trials,
        seed=args.seed,
    )
    _emit_json(construction.spec_to_dict(spec), args.output)
    return 0


def _cmd_split(args) -> int:
    gen = _load_generator(args.gen)
    sgen, report = construction.split(gen, args.wub)
    _emit_json(
        {
            "generator": sgen.to_dict(),
            "report": {
                "w_ub": report.w_ub,
                "original_cols": report.original_cols,
                "extra_cols": report.extra_cols,
                "R": report.R,
                "piece_map": [list(ids) for ids in report.piece_map],
            },
        },
        args.output,
    )
    return 0


def _cmd_rateloss(args) -> int:
    if args.wub is not None:
        r = weightstats.exact_R(args.n, args.wub)
        _emit_json({"n": args.n, "w_ub": args.wub, "R": r, "R_float": float(r)}, args.output)
        return 0
    if args.epsilon is None:
        raise ValueError("rateloss needs either --wub or --epsilon (with --delta)")
    analysis = weightstats.classify_regime(args.epsilon, args.delta, args.n)
    _emit_json(
        {
            "n": analysis.n,
            "w_ub": analysis.w_ub,
            "n_lub": analysis.n_lub,
            "epsilon": analysis.epsilon,
            "epsilon_prime": analysis.epsilon_prime,
            "delta": analysis.delta,
            "epsilon_star": weightstats.epsilon_star(),
            "a_terms": list(analysis.a_terms),
            "R": analysis.R_exact,
            "R_float": float(analysis.R_exact),
            "regime": analysis.regime,
            "exponent": analysis.exponent,
            "empirical_slope": analysis.empirical_slope,
        },
        args.output,
    )
    return 0


def _kernel_row(name: str, kern: kernels.Kernel, n: int, delta: float) -> dict:
    lam_mc, lam_max = weightstats.sparsity_orders(kern, n, delta)
    return {
        "kernel": name,
        "E": kern.exponent,
        "sparsity_ratio": kernels.sparsity_ratio(kern),
        "lambda_max_limit": kernels.lambda_max_limit(kern),
        "lambda_mc_at_n": lam_mc,
        "lambda_max_at_n": lam_max,
    }


def _cmd_weights(args) -> int:
    kern = _load_kernel(args.kernel)
    row = _kernel_row(args.kernel, kern, args.n, args.delta)
    row.update(
        {
            "n": args.n,
            "delta": args.delta,
            "w_mc": str(weightstats.w_mc(kern, args.n)),
            "w_max": str(weightstats.w_max(kern, args.n)),
        }
    )
    _emit_json(row, args.output)
    return 0


def _cmd_tables(args) -> int:
    buf = io.StringIO()
    fields = ["kernel", "E", "sparsity_ratio", "lambda_max_limit", "lambda_mc_at_n", "lambda_max_at_n"]
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for name, kern in kernels.catalog().items():
        row = _kernel_row(name, kern, args.n, args.delta)
        writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    _emit(buf.getvalue(), args.output)
    return 0


def _cmd_simulate(args) -> int:
    spec = construction.spec_from_dict(json.loads(Path(args.spec).read_text(encoding="ascii")))
    ch = parse_channel(args.channel)
    result = simulate.mc_bler(spec, ch, args.trials, args.seed)
    bound = (
        simulate.union_bound_log2(spec, math.log2(result.estimate))
        if result.estimate > 0
        else None
    )
    _emit_json(
        {
            "bler": result.estimate,
            "ci": list(result.interval),
            "errors": result.errors,
            "trials": result.trials,
            "union_bound_log2": bound,
        },
        args.output,
    )
    return 0


def _cmd_oracle(args) -> int:
    gen = _load_generator(args.gen)
    ch = parse_channel(args.channel)
    out = {
        "pe_ml": simulate.exact_pe_ml(gen, ch),
        "pe_sc": simulate.exact_pe_sc(gen, ch),
    }
    if args.split:
        col_str, _, wub_str = args.split.partition(":")
        col, wub = int(col_str), int(wub_str)
        column = gen.columns[col]
        pieces = [column[s : s + wub] for s in range(0, len(column), wub)]
        cols = list(gen.columns[:col]) + pieces + list(gen.columns[col + 1 :])
        split_gen = construction.SparseGenerator(gen.rows, len(cols), tuple(cols))
        out["pe_sc_split"] = simulate.exact_pe_sc(split_gen, ch)
    _emit_json(out, args.output)
    return 0


def _cmd_crowd(args) -> int:
    params = crowd.QuerySchemeParams(n=args.n, p=args.p, q=args.q, zeta=args.zeta, seed=args.seed)
    code = None
    if not args.identity:
        code = crowd.build_crowd_code(
            params, block_levels=args.block_levels, tail_levels=args.tail_levels, w_ub=args.wub
        )
        if args.dump_queries:
            code.queries.dump(args.dump_queries)
    report = crowd.simulate_crowd(params, code, trials=args.trials)
    _emit_json(
        {
            "m": report.m,
            "m_prime": report.m_prime,
            "design_m_prime": report.design_m_prime,
            "w_r": report.w_r,
            "w_ub": report.w_ub,
            "max_items": report.max_items,
            "m_bsc": report.m_bsc,
            "ratio": report.ratio,
            "ideal_m_prime": report.ideal_m_prime,
            "ideal_ratio": report.ideal_ratio,
            "trials": report.trials,
            "success_rate": report.success_rate,
            "stage1_success_rate": report.stage1_success_rate,
            "stage2_success_rate": report.stage2_success_rate,
        },
        args.output,
    )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="polarldgm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-o", "--output", help="write the data stream to a file instead of stdout")
        return p

    p = add("kernel", "analyze a catalog kernel or a matrix file")
    p.add_argument("action", choices=["analyze"])
    p.add_argument("target", help="catalog name (G2, G3*, G4*, G3', G4') or matrix text file")
    p.set_defaults(func=_cmd_kernel)

    p = add("construct", "build a code spec by ranking bit channels")
    p.add_argument("--kernel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--channel", required=True, help="bec:<z> or bsc:<q>")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=construction.DEFAULT_BSC_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=_cmd_construct)

    p = add("split", "split generator columns above a weight threshold")
    p.add_argument("--wub", type=int, required=True)
    p.add_argument("--gen", help="sparse generator JSON file (default: stdin)")
    p.set_defaults(func=_cmd_split)

    p = add("rateloss", "exact splitting rate loss / regime classification")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--wub", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, default=0.01)
    p.set_defaults(func=_cmd_rateloss)

    p = add("weights", "column-weight statistics and sparsity orders")
    p.add_argument("--kernel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=_cmd_weights)

    p = add("tables", "kernel comparison table as CSV (limits and finite-n orders)")
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=_cmd_tables)

    p = add("simulate", "Monte Carlo block-error rate for a code spec")
    p.add_argument("--spec", required=True, help="code spec JSON file (from `construct`)")
    p.add_argument("--channel", required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=_cmd_simulate)

    p = add("oracle", "exact ML/SC error probabilities for a small generator")
    p.add_argument("--gen", help="sparse generator JSON file (default: stdin)")
    p.add_argument("--channel", required=True)
    p.add_argument("--split", help="col:wub, also report the split code's SC error")
    p.set_defaults(func=_cmd_oracle)

    p = add("crowd", "end-to-end crowdsourced label-learning simulation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--block-levels", type=int, default=11)
    p.add_argument("--tail-levels", type=int, default=8)
    p.add_argument("--wub", type=int, default=1024)
    p.add_argument("--identity", action="store_true", help="use the LDPC rows directly as queries")
    p.add_argument("--dump-queries", help="write one query per line as item indices")
    p.set_defaults(func=_cmd_crowd)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except RefusalError as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
