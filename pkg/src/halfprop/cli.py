"""Command-line entry point: ``halfprop eval | verify | compare``.

Exit codes: 0 success, 1 a check or comparison failed, 2 invalid arguments.

eval columns:    t,x,log_magnitude,magnitude,phase[,flag]
compare columns: t,x,closed_form,oracle,relative_diff   (spectral)
                 t,x,closed_form_re,closed_form_im,oracle_re,oracle_im,relative_diff   (cn, self)

``flag`` appears only when some row sits on a focusing time; those rows
carry ``inf`` magnitudes.  ``HALFPROP_THREADS`` caps the evaluation threads.
"""

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel, kernels, oracle, verify
from .kernels import CausticError, Convention, KernelKind, KernelSpec, PotentialParams


class UsageError(ValueError):
    pass


def _num(v):
    """Shortest round-trip text for a float; non-finite values as inf/-inf/nan."""
    return repr(float(v))


def _json_num(v):
    v = float(v)
    return v if math.isfinite(v) else _num(v)


def _axis(values, rng, name):
    if values is not None and rng is not None:
        raise UsageError(f"give either --{name} or --{name}-range, not both")
    if rng is not None:
        start, stop, count = rng
        count = int(count)
        if count < 1 or int(rng[2]) != rng[2]:
            raise UsageError(f"--{name}-range count must be a positive integer")
        return np.linspace(start, stop, count)
    if values is None:
        raise UsageError(f"--{name} or --{name}-range is required")
    return np.asarray(values, dtype=float)


def _spec(args, xi=None) -> KernelSpec:
    params = PotentialParams(args.k, args.omega)
    kind = KernelKind.select(args.kind, args.omega)
    convention = Convention(args.convention) if args.convention else verify.arbitrated_convention(kind)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return KernelSpec(kind, params, args.xi if xi is None else xi, convention)


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------------- eval

def _eval_row_block(spec, t, xs):
    if t <= 0:
        raise UsageError("t must be positive")
    try:
        val = kernels.evaluate(spec, np.full(xs.shape, t), xs)
    except CausticError:
        return [(t, x, math.inf, math.inf, math.nan, "caustic") for x in xs]
    return [(t, x, lm, math.exp(lm), ph, "") for x, lm, ph in
            zip(xs, np.atleast_1d(val.log_magnitude), np.atleast_1d(val.phase))]


def cmd_eval(args) -> int:
    spec = _spec(args)
    ts = _axis(args.t, args.t_range, "t")
    xs = _axis(args.x, args.x_range, "x")
    if np.any(xs <= 0):
        raise UsageError("x must be positive")
    with ThreadPoolExecutor(max_workers=_accel.thread_count()) as pool:
        blocks = list(pool.map(lambda t: _eval_row_block(spec, float(t), xs), ts))
    rows = [r for block in blocks for r in block]
    flagged = any(r[5] for r in rows)
    header = ["t", "x", "log_magnitude", "magnitude", "phase"] + (["flag"] if flagged else [])
    if args.format == "csv":
        body = [[_num(v) for v in r[:5]] + ([r[5]] if flagged else []) for r in rows]
        _emit(_csv(header, body), args.out)
    else:
        doc = {"schema_version": verify.SCHEMA_VERSION, "kind": spec.kind.value,
               "convention": spec.convention.value,
               "params": {"k": args.k, "omega": args.omega, "xi": args.xi},
               "columns": header,
               "rows": [[_json_num(v) for v in r[:5]] + ([r[5]] if flagged else []) for r in rows]}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


# ----------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    params = PotentialParams(args.k, args.omega)
    if not args.xi > 0:
        raise UsageError("xi must be positive")
    report = verify.run_suite(args.suite, params, args.xi, args.tol)
    doc = report.as_dict()
    if args.format == "csv":
        rows = [[r["name"], r["anchor"], _num(r["value"]), _num(r["tolerance"]), r["comparison"],
                 "pass" if r["pass"] else "fail"] for r in doc["records"]]
        _emit(_csv(["name", "anchor", "value", "tolerance", "comparison", "result"], rows), args.out)
    else:
        _emit(json.dumps(_finite(doc), indent=2) + "\n", args.out)
    for rec in report.failing():
        print(f"FAIL {rec.name}: {rec.value!r} (tolerance {rec.comparison} {rec.tolerance!r})",
              file=sys.stderr)
    print(f"suite {args.suite}: {'pass' if report.passed else 'fail'} "
          f"({len(report.records)} checks)", file=sys.stderr)
    return 0 if report.passed else 1


def _finite(obj):
    if isinstance(obj, float):
        return _json_num(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


# ---------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    spec = _spec(args)
    if args.oracle == "spectral":
        if not (spec.kind.is_heat and args.omega > 0):
            raise UsageError("the spectral oracle needs a heat kernel with omega > 0")
        ts = _axis(args.t, args.t_range, "t")
        xs = _axis(args.x, args.x_range, "x")
        basis = oracle.SpectralBasis(spec.params, spec.convention, args.terms)
        rows, diffs = [], []
        for t in ts:
            try:
                ref = oracle.spectral_heat_kernel(basis, spec.xi, float(t), xs).value
            except oracle.TailTooLarge as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            got = kernels.heat_kernel(spec, float(t), xs).real()
            rel = np.abs(got - ref) / np.abs(ref)
            diffs.extend(rel.tolist())
            rows.extend((t, x, g, r, d) for x, g, r, d in zip(xs, got, ref, rel))
        header = ["t", "x", "closed_form", "oracle", "relative_diff"]
        tol = args.tol if args.tol is not None else 1e-9
        summary = {"max_relative_diff": max(diffs), "median_relative_diff": float(np.median(diffs))}
        passed = summary["max_relative_diff"] <= tol
    else:
        header = ["t", "x", "closed_form_re", "closed_form_im", "oracle_re", "oracle_im", "relative_diff"]
        if args.oracle == "self":
            ts = _axis(args.t, args.t_range, "t")
            xs = _axis(args.x, args.x_range, "x")
            rows = []
            for t in ts:
                a = kernels.evaluate(spec, np.full(xs.shape, t), xs).value()
                b = kernels.evaluate(spec, np.full(xs.shape, t), xs).value()
                rows.extend((t, x, u.real, u.imag, v.real, v.imag, abs(u - v) / abs(u))
                            for x, u, v in zip(xs, a, b))
            diffs = [r[-1] for r in rows]
            summary = {"max_relative_diff": max(diffs), "median_relative_diff": float(np.median(diffs))}
            tol = args.tol if args.tol is not None else 0.0
            passed = summary["max_relative_diff"] <= tol
        else:
            rows, summary = _compare_cn(spec, args)
            tol = args.tol if args.tol is not None else 5e-3
            passed = summary["l2_relative_diff"] <= tol
    summary = {k: float(v) for k, v in summary.items()}
    summary["tolerance"] = tol
    summary["pass"] = bool(passed)
    if args.format == "csv":
        _emit(_csv(header, [[_num(v) for v in r] for r in rows]), args.out)
    else:
        doc = {"schema_version": verify.SCHEMA_VERSION, "oracle": args.oracle,
               "kind": spec.kind.value, "convention": spec.convention.value,
               "params": {"k": args.k, "omega": args.omega, "xi": args.xi},
               "columns": header, "rows": [[_json_num(v) for v in r] for r in rows],
               "summary": _finite(summary)}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    print(" ".join(f"{k}={v!r}" for k, v in summary.items()), file=sys.stderr)
    return 0 if passed else 1


def _compare_cn(spec, args):
    n = args.intervals
    if args.initial == "kernel":
        result = oracle.cn_kernel_check(spec, args.t0, args.duration, args.x_max, n, args.dt)
        t_end = args.t0 + args.duration
        exact = kernels.evaluate(spec, t_end, result.state.x).value()
    else:
        packet = verify.gaussian_packet(args.packet_center, args.packet_width)
        result = oracle.cn_packet_check(spec, packet, args.duration, args.x_max, n, args.dt)
        t_end = args.duration
        idx = np.linspace(0, len(result.state.x) - 1, 66).round().astype(int)[1:-1]
        exact = np.full(result.state.x.shape, np.nan, dtype=complex)
        exact[idx] = oracle.propagate_by_kernel(spec, packet, t_end, result.state.x[idx])
    values = result.state.values
    scale = np.nanmax(np.abs(exact))
    keep = np.isfinite(exact)
    rows = [(t_end, x, e.real, e.imag, complex(v).real, complex(v).imag, abs(v - e) / scale)
            for x, e, v in zip(result.state.x[keep], exact[keep], values[keep])]
    diffs = [r[-1] for r in rows]
    summary = {"l2_relative_diff": result.rel_l2, "max_relative_diff": max(diffs),
               "median_relative_diff": float(np.median(diffs)), "mass_drift_per_step": result.mass_drift}
    if args.initial == "kernel":
        summary["nyquist_ratio"] = result.nyquist_ratio
    return rows, summary


# ----------------------------------------------------------------- parser

def _common(p, need_kind=True):
    if need_kind:
        p.add_argument("--kind", choices=["heat", "schrodinger"], required=True)
        p.add_argument("--convention", choices=["half", "unit"], default=None,
                       help="time convention (default: half for heat, unit for Schrodinger)")
    p.add_argument("--k", type=float, default=1.0, help="inverse-square strength, k >= -1/4")
    p.add_argument("--omega", type=float, default=1.0, help="oscillator frequency, omega >= 0")
    p.add_argument("--xi", type=float, default=1.0, help="source point, xi > 0")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--tol", type=float, default=None, help="override the default tolerance")


def _grid(p):
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--t-range", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--x-range", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfprop", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="tabulate a kernel over a (t, x) grid")
    _common(p_eval)
    _grid(p_eval)
    p_eval.set_defaults(func=cmd_eval, format="csv")

    p_verify = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    _common(p_verify, need_kind=False)
    p_verify.add_argument("--suite", choices=list(verify.SUITES) + ["all"], default="all")
    p_verify.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare", help="compare a kernel with an independent oracle")
    _common(p_cmp)
    _grid(p_cmp)
    p_cmp.add_argument("--oracle", choices=["spectral", "cn", "self"], default="spectral")
    p_cmp.add_argument("--terms", type=int, default=100, help="spectral terms")
    p_cmp.add_argument("--initial", choices=["kernel", "packet"], default="kernel",
                       help="cn initial data: kernel at --t0, or a Gaussian packet")
    p_cmp.add_argument("--t0", type=float, default=1e-3)
    p_cmp.add_argument("--duration", type=float, default=0.3)
    p_cmp.add_argument("--dt", type=float, default=1e-4)
    p_cmp.add_argument("--x-max", type=float, default=20.0)
    p_cmp.add_argument("--intervals", type=int, default=4096)
    p_cmp.add_argument("--packet-center", type=float, default=1.5)
    p_cmp.add_argument("--packet-width", type=float, default=0.3)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
