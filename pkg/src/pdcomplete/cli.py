"""Command-line interface: complete, bounds, extend, verify, refine.

Exit codes: 0 success, 1 unreadable input, 2 validation failure,
3 numerical failure, 4 a --strict threshold was exceeded.  All randomness
sits behind --seed (default 0) and reports are emitted as deterministic
JSON, so identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import completion as comp
from .errors import NumericalError, PdCompleteError, StructuralError
from .graphdomain import strided_band_cover
from .specio import (
    dump_report_json,
    format_matrix_csv,
    read_matrix_csv,
    read_spec,
)
from .stationary import band_partial

EXIT_OK = 0
EXIT_UNREADABLE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_STRICT = 4


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_spec_or_fail(path):
    try:
        return read_spec(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise _CliExit(EXIT_UNREADABLE, f"cannot read spec file {path}: {exc}")
    except StructuralError as exc:
        raise _CliExit(EXIT_VALIDATION, str(exc))


class _CliExit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _add_common(parser):
    parser.add_argument("--tol", type=float, default=1e-9,
                        help="relative PSD acceptance tolerance (default 1e-9)")
    parser.add_argument("--svd-cutoff", type=float, default=1e-10,
                        help="relative spectral cutoff for pseudoinverses (default 1e-10)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized checks (default 0)")


def _out_path(given, input_path, suffix):
    if given:
        return Path(given)
    p = Path(input_path)
    return p.with_name(p.stem + suffix)


def cmd_complete(args):
    spec = _read_spec_or_fail(args.input)
    if spec.kernel is None or (spec.cover is None and spec.tree is None):
        raise _CliExit(EXIT_VALIDATION,
                       "complete needs a spec file with entries and a cover or tree")
    if spec.cover is not None:
        report = comp.canonical_serrated(spec.kernel, spec.cover,
                                         tol=args.tol, cutoff=args.svd_cutoff)
    else:
        report = comp.canonical_junction_tree(spec.kernel, spec.tree,
                                              tol=args.tol, cutoff=args.svd_cutoff)
    matrix_path = _out_path(args.output_matrix, args.input, ".completion.csv")
    report_path = _out_path(args.output_report, args.input, ".report.json")
    matrix_path.write_text(
        format_matrix_csv(report.completion.values, spec.labels), encoding="utf-8"
    )
    report_path.write_text(dump_report_json(report.to_dict()), encoding="utf-8")
    print(f"wrote {matrix_path} and {report_path}")
    return EXIT_OK


def cmd_bounds(args):
    spec = _read_spec_or_fail(args.input)
    if spec.kernel is None:
        raise _CliExit(EXIT_VALIDATION, "bounds needs a spec file with entries")
    kern = spec.kernel
    i, j = args.entry
    if not (1 <= i <= kern.n and 1 <= j <= kern.n):
        raise _CliExit(EXIT_VALIDATION, f"entry ({i}, {j}) outside 1..{kern.n}")
    x, y = i - 1, j - 1
    if kern.pattern.mask[x, y]:
        raise _CliExit(EXIT_VALIDATION, f"entry ({i}, {j}) is already specified")
    if spec.cover is not None and len(spec.cover.blocks) == 2:
        b1, b2 = spec.cover.blocks
        if x in set(b2) and y in set(b1):
            x, y = y, x
        lo, hi = comp.completion_interval_2serrated(kern, b1, b2, x, y,
                                                    cutoff=args.svd_cutoff)
        canonical = 0.5 * (lo + hi)
    elif len(kern.pattern.unspecified_pairs()) == 1:
        lo, hi = comp.feasible_interval_single_entry(kern, x, y)
        canonical = float(
            comp.maxdet_oracle(kern).values[x, y]
        )
    else:
        raise _CliExit(
            EXIT_VALIDATION,
            "bounds needs a two-block cover or a pattern with a single free entry",
        )
    payload = {"m": float(lo), "M": float(hi), "canonical": float(canonical)}
    if args.format == "csv":
        text = "m,M,canonical\n" + ",".join(f"{v:.17g}" for v in (lo, hi, canonical)) + "\n"
    else:
        text = dump_report_json(payload)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _dyadic_covers(n, w, levels):
    strides = [2 ** (levels - 1 - k) for k in range(levels)]
    if strides[0] > w + 1:
        raise StructuralError(
            f"{levels} levels need stride {strides[0]} <= w+1 = {w + 1}"
        )
    return [strided_band_cover(n, w, s) for s in strides]


def cmd_extend(args):
    spec = _read_spec_or_fail(args.input)
    if spec.stationary is None:
        raise _CliExit(EXIT_VALIDATION, "extend needs a spec file with a stationary block")
    fn = spec.stationary
    n = args.points
    levels = args.refine
    try:
        covers = _dyadic_covers(n, fn.w, levels)
        kern, _ = band_partial(fn, n, tol=args.tol)
        table = comp.refine_serrated(kern, covers, tol=args.tol, cutoff=args.svd_cutoff)
    except StructuralError as exc:
        raise _CliExit(EXIT_VALIDATION, str(exc))
    columns = [lv.completion.values[0] for lv in table.levels]
    resids = []
    for lv in table.levels:
        vals = lv.completion.values
        spread = 0.0
        for k in range(1, vals.shape[0]):
            d = np.diagonal(vals, offset=k)
            spread = max(spread, float(d.max() - d.min()))
        resids.append(spread)
    col_diffs = [
        float(np.abs(a - b).max()) for a, b in zip(columns, columns[1:])
    ]
    csv_path = _out_path(args.output_matrix, args.input, ".extension.csv")
    rows = ["k,t," + ",".join(f"level_{lv.index + 1}" for lv in table.levels)]
    for k in range(n):
        cells = [str(k), f"{k * fn.delta:.17g}"] + [f"{c[k]:.17g}" for c in columns]
        rows.append(",".join(cells))
    csv_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    payload = {
        "delta": float(fn.delta),
        "points": int(n),
        "levels": [
            {
                "index": lv.index + 1,
                "n_blocks": lv.n_blocks,
                "stationarity_residual": resids[k],
            }
            for k, lv in enumerate(table.levels)
        ],
        "extension_sup_diffs": col_diffs,
        "completion_sup_diffs": [float(d) for d in table.diffs],
        "final_gap": float(table.final_gap),
    }
    report_path = _out_path(args.output_report, args.input, ".extend.json")
    report_path.write_text(dump_report_json(payload), encoding="utf-8")
    print(f"wrote {csv_path} and {report_path}")
    return EXIT_OK


def cmd_verify(args):
    try:
        values, labels = read_matrix_csv(args.completion)
    except OSError as exc:
        raise _CliExit(EXIT_UNREADABLE, f"cannot read matrix {args.completion}: {exc}")
    except (StructuralError, ValueError) as exc:
        raise _CliExit(EXIT_VALIDATION, str(exc))
    spec = _read_spec_or_fail(args.pattern)
    if spec.kernel is None:
        raise _CliExit(EXIT_VALIDATION, "verify needs a pattern spec file with entries")
    if spec.kernel.n != values.shape[0]:
        raise _CliExit(
            EXIT_VALIDATION,
            f"matrix is {values.shape[0]}x{values.shape[0]} but the pattern has "
            f"n={spec.kernel.n}",
        )
    try:
        completion = comp.KernelMatrix(values, labels=labels, tol=args.tol,
                                       svd_cutoff=args.svd_cutoff)
        report = comp.verify_canonical(
            completion,
            spec.kernel.pattern,
            cover_or_tree=spec.cover if spec.cover is not None else spec.tree,
            n_checks=args.checks,
            seed=args.seed,
            reference=spec.kernel,
            cutoff=args.svd_cutoff,
        )
    except StructuralError as exc:
        raise _CliExit(EXIT_VALIDATION, str(exc))
    text = dump_report_json(report.to_dict())
    if args.output_report:
        Path(args.output_report).write_text(text, encoding="utf-8")
        print(f"wrote {args.output_report}")
    else:
        sys.stdout.write(text)
    if args.strict is not None:
        residuals = [
            report.restriction_residual,
            report.inverse_offpattern_residual,
            report.max_separation_residual(),
        ]
        if report.trace_residual is not None:
            residuals.append(report.trace_residual)
        if report.projection_residual is not None:
            residuals.append(report.projection_residual)
        if max(residuals) > args.strict:
            print(
                f"strict check failed: max residual {max(residuals):.3e} > {args.strict:.3e}",
                file=sys.stderr,
            )
            return EXIT_STRICT
    return EXIT_OK


def cmd_refine(args):
    spec = _read_spec_or_fail(args.input)
    levels = args.levels
    try:
        if spec.stationary is not None:
            fn = spec.stationary
            n = args.points if args.points else 4 * (fn.w + 1)
            kern, _ = band_partial(fn, n, tol=args.tol)
            w = fn.w
        elif spec.kernel is not None and spec.cover is not None:
            kern = spec.kernel
            widths = {b[-1] - b[0] for b in spec.cover.blocks}
            if len(widths) != 1:
                raise StructuralError("refine needs a uniform band cover")
            w = widths.pop()
        else:
            raise StructuralError(
                "refine needs a stationary block or a banded cover spec"
            )
        covers = _dyadic_covers(kern.n, w, levels)
        table = comp.refine_serrated(kern, covers, tol=args.tol, cutoff=args.svd_cutoff)
    except StructuralError as exc:
        raise _CliExit(EXIT_VALIDATION, str(exc))
    text = dump_report_json(table.to_dict())
    if args.output_report:
        Path(args.output_report).write_text(text, encoding="utf-8")
        print(f"wrote {args.output_report}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pdcomplete",
        description="Canonical positive-definite completion of partial kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="canonical completion of a spec file")
    p.add_argument("input")
    p.add_argument("--output-matrix", help="completion CSV path")
    p.add_argument("--output-report", help="diagnostics JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("bounds", help="feasible interval and canonical value of one entry")
    p.add_argument("input")
    p.add_argument("--entry", nargs=2, type=int, required=True, metavar=("I", "J"),
                   help="1-based entry indices")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", help="write instead of printing")
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("extend", help="stationary extension with refinement levels")
    p.add_argument("input")
    p.add_argument("--points", type=int, required=True, help="extension grid length")
    p.add_argument("--refine", type=int, default=1, help="number of dyadic levels")
    p.add_argument("--output-matrix", help="extension CSV path")
    p.add_argument("--output-report", help="convergence JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify", help="canonicality diagnostics of a completion CSV")
    p.add_argument("completion", help="completion matrix CSV")
    p.add_argument("pattern", help="spec file with the pattern and data")
    p.add_argument("--checks", type=int, default=50, help="random checks per family")
    p.add_argument("--strict", type=float, default=None, metavar="TAU",
                   help="exit 4 when any residual exceeds TAU")
    p.add_argument("--output-report", help="write the JSON report here")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("refine", help="nested-cover convergence table")
    p.add_argument("input")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--points", type=int, default=None,
                   help="grid length when refining a stationary block")
    p.add_argument("--output-report", help="write the JSON table here")
    _add_common(p)
    p.set_defaults(func=cmd_refine)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliExit as exc:
        return _fail(exc.code, str(exc))
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except StructuralError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except PdCompleteError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        return _fail(EXIT_UNREADABLE, str(exc))


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
