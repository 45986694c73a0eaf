"""Command-line interface.

Exit status: 0 on success, 1 on I/O failure, 2 on invalid input.
Row indices in files are 0-based.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    DataMatrix,
    SyntheticSpec,
    load_csv,
    load_spec_file,
    make_dataset,
    scale_to_unit,
    write_csv,
)
from .discrepancy import total_discrepancy
from .evaluation import (
    METHODS,
    BenchmarkSpec,
    adjusted_intercept,
    design,
    efficiency_report,
    ols_fit,
    run_benchmark,
    run_bootstrap,
    select_indices,
    write_table,
)
from .oss import oss_select_batched


def _int_list(text):
    try:
        values = [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _methods(text):
    values = [v.strip().lower() for v in text.split(",") if v.strip()]
    bad = [v for v in values if v not in METHODS]
    if bad or not values:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return values


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _load(args) -> DataMatrix:
    return load_csv(args.input, has_header=args.header, response_col=args.response_col)


def read_indices(path) -> np.ndarray:
    """Read a one-column index file, with or without a header line."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    try:
        idx = np.array([int(row[0]) for row in rows], dtype=np.intp)
    except ValueError as exc:
        raise ValueError(f"{path}: index file must hold integers ({exc})") from None
    if idx.size == 0:
        raise ValueError(f"{path}: no indices")
    return idx


def _check_indices(idx, n):
    if idx.min() < 0 or idx.max() >= n:
        raise ValueError(f"indices must lie in [0, {n}); the index file does not match the data")


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args):
    if args.config:
        spec = load_spec_file(args.config)
    else:
        spec = SyntheticSpec(
            case=args.case, n=args.n, p=args.p, seed=args.seed,
            model="interaction" if args.interactions else "first-order",
            beta0=args.beta0, noise_variance=args.sigma2,
        )
    write_csv(args.output, make_dataset(spec), header=True)
    print(f"wrote {spec.n} rows x {spec.p} covariates ({spec.case}, {spec.model}) to {args.output}")


def cmd_scale(args):
    data = _load(args)
    scaled, tf = scale_to_unit(data)
    write_csv(args.output, scaled, header=True)
    meta = {"columns": list(data.columns), **tf.to_dict()}
    _write_json(meta, sidecar_path(args.output))
    print(f"scaled {data.p} columns of {data.n} rows to [-1, 1]")


def cmd_sample(args):
    data = _load(args)
    if args.k > data.n:
        raise ValueError(f"k exceeds n ({args.k} > {data.n})")
    if args.g > 1 and args.method != "oss":
        raise ValueError("--g applies to --method oss only")
    scaled, _ = scale_to_unit(data.values)
    start = time.perf_counter()
    meta = {"method": args.method, "k": args.k, "g": args.g, "seed": args.seed, "n": data.n}
    if args.method == "oss":
        res = oss_select_batched(
            scaled, args.k, args.g, args.exponent,
            elimination=args.elimination, seed=args.seed,
        )
        idx = res.indices
        meta["exponent"] = args.exponent
        meta["elimination"] = args.elimination
        meta["discrepancy"] = res.discrepancy
        if res.groups is not None:
            meta["groups"] = [g.tolist() for g in res.groups]
    else:
        idx = select_indices(args.method, data.values, scaled, args.k, seed=args.seed)
    meta["wall_time_ms"] = (time.perf_counter() - start) * 1000.0

    with Path(args.output).open("w", newline="", encoding="utf-8") as fh:
        fh.write("index\n")
        fh.writelines(f"{int(i)}\n" for i in idx)
    _write_json(meta, sidecar_path(args.output))
    extra = f", discrepancy {meta['discrepancy']:.6g}" if "discrepancy" in meta else ""
    print(f"selected {len(idx)} of {data.n} rows with {args.method}{extra}")


def cmd_fit(args):
    data = _load(args)
    if data.response is None:
        raise ValueError("fit needs --response-col")
    idx = read_indices(args.indices)
    _check_indices(idx, data.n)
    sub = data.take(idx)
    fit = ols_fit(sub.values, sub.response, args.interactions, columns=data.columns)
    intercept = fit.intercept
    if not args.no_adjusted_intercept:
        x_bar = design(data.values, args.interactions).mean(axis=0)
        intercept = adjusted_intercept(float(data.response.mean()), x_bar, fit.slopes)
    with Path(args.output).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "estimate"])
        writer.writerow(["intercept", repr(float(intercept))])
        for term, value in zip(fit.terms[1:], fit.slopes):
            writer.writerow([term, repr(float(value))])
    print(f"fitted {len(fit.terms)} coefficients on {len(idx)} rows")


def cmd_evaluate(args):
    data = _load(args)
    idx = read_indices(args.indices)
    _check_indices(idx, data.n)
    scaled, _ = scale_to_unit(data.values)
    rep = efficiency_report(scaled[idx], args.interactions)
    out = {"k": int(idx.size), "p": data.p, **rep.to_dict()}
    if idx.size >= 2:
        out["discrepancy"] = total_discrepancy(scaled[idx], args.exponent)
    text = json.dumps(out, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)


def _print_rows(rows):
    for r in rows:
        print(
            f"n={r['n']} p={r['p']} k={r['k']} {r['method']:>5}: "
            f"mse_slopes={r['mse_slopes']:.6g} mse_intercept={r['mse_intercept']:.6g} "
            f"D_eff={r['d_eff_mean']:.4f} A_eff={r['a_eff_mean']:.4f}"
        )


def cmd_bench(args):
    spec = BenchmarkSpec(
        case=args.case, n_grid=args.n, p=args.p, k=args.k, T=args.T,
        methods=args.methods, seed=args.seed,
        model="interaction" if args.interactions else "first-order",
        exponent=args.exponent, n_batches=args.g, elimination=args.elimination,
        adjusted_intercept=not args.no_adjusted_intercept,
    )
    rows = run_benchmark(spec)
    write_table(rows, args.output, args.format, timing=not args.no_timing)
    _print_rows(rows)


def cmd_bootstrap(args):
    data = _load(args)
    if data.response is None:
        raise ValueError("bootstrap needs --response-col")
    rows = run_bootstrap(data, args.k, args.B, args.methods, args.seed, args.exponent)
    write_table(rows, args.output, args.format, timing=not args.no_timing)
    _print_rows(rows)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _data_args(p, response=False):
    p.add_argument("--input", required=True, help="CSV data file")
    p.add_argument("--header", action="store_true", help="first line holds column names")
    p.add_argument(
        "--response-col", default=None,
        help="response column name or 0-based position" + (" (required)" if response else ""),
    )


def _oss_args(p):
    p.add_argument("--exponent", type=int, choices=(2, 4), default=2)
    p.add_argument("--elimination", choices=("harmonic", "none"), default="harmonic")
    p.add_argument("--seed", type=int, default=0)


def _table_args(p):
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--methods", type=_methods, default=list(METHODS))
    p.add_argument(
        "--no-timing", action="store_true",
        help="write wall_time as 0 so output is byte-identical for a given seed",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthosub", description="Orthogonal subsampling for big-data linear regression."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic regression dataset")
    p.add_argument("--config", help="flat key = value synthetic-spec file")
    p.add_argument("--case", choices=("uniform", "normal", "truncated-normal"), default="uniform")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=9.0)
    p.add_argument("--interactions", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("scale", help="scale covariates to [-1, 1]")
    _data_args(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("sample", help="select a subsample and write its row indices")
    _data_args(p)
    p.add_argument("--method", choices=METHODS, default="oss")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g", type=int, default=1, help="number of batches (oss only)")
    _oss_args(p)
    p.add_argument("--output", required=True, help="index CSV; a .json sidecar is written next to it")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="least squares on the rows of an index file")
    _data_args(p, response=True)
    p.add_argument("--indices", required=True)
    p.add_argument("--interactions", action="store_true")
    p.add_argument("--no-adjusted-intercept", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="D/A-efficiency and discrepancy of a subsample")
    _data_args(p)
    p.add_argument("--indices", required=True)
    p.add_argument("--interactions", action="store_true")
    p.add_argument("--exponent", type=int, choices=(2, 4), default=2)
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="simulated MSE/efficiency comparison")
    p.add_argument("--case", choices=("uniform", "normal", "truncated-normal"), default="uniform")
    p.add_argument("--n", type=_int_list, default=[5000, 10_000, 100_000], help="comma-separated grid")
    p.add_argument("--p", type=int, default=50)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--g", type=int, default=1)
    p.add_argument("--interactions", action="store_true")
    p.add_argument("--no-adjusted-intercept", action="store_true")
    _oss_args(p)
    _table_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bootstrap", help="bootstrap MSE on a dataset with a response")
    _data_args(p, response=True)
    p.add_argument("--k", type=_int_list, required=True, help="comma-separated subsample sizes")
    p.add_argument("--B", type=int, default=100)
    _oss_args(p)
    _table_args(p)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except OSError as exc:
        print(f"orthosub: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"orthosub: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
