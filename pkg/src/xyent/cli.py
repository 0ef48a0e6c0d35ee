"""Command-line front end.

Subcommands: entropy, scan, spectrum, verify, critical-fit.
Exit codes: 0 success, 1 usage or parameter error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .asymptotics import critical_estimate, critical_fit, entropy_closed, entropy_integral, entropy_series
from .correlation import entropy_finite
from .errors import DomainError, XYEntropyError
from .model import ModelParams, classify, elliptic_data
from .verify import doubling_check, run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
METHODS = ("finite", "series", "integral", "closed_form", "critical_estimate")
SCAN_METHODS = ("finite", "series", "integral", "closed_form")
LN2 = math.log(2.0)
CSV_HEADER = ["gamma", "h", "regime", "k", "tau0", "method", "value", "error_bound", "reason"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def fmt(x) -> str:
    """Float with 17 significant digits; NaN and infinities spelled out."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float at 17 significant digits; non-finite floats become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    return dumps(float(obj), indent, _level)


def _methods(text: str, allowed=METHODS) -> list:
    out = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in allowed]
    if bad or not out:
        raise UsageError(f"unknown method(s) {', '.join(bad) or '(none)'}; choose from {', '.join(allowed)}")
    return out


def _evaluate(method: str, params: ModelParams, L, tol: float):
    if method == "finite":
        if L is None:
            raise UsageError("--L is required for the finite method")
        return entropy_finite(L, params)
    if method == "series":
        return entropy_series(params, tol)
    if method == "integral":
        return entropy_integral(params, tol)
    if method == "closed_form":
        return entropy_closed(params)
    return critical_estimate(params)


def _elliptic_fields(params: ModelParams) -> dict:
    regime = classify(params)
    if regime.is_critical:
        return {"k": None, "tau0": None, "sigma": None}
    d = elliptic_data(params)
    return {"k": d.k, "tau0": d.tau0, "sigma": d.sigma}


def run_entropy(params: ModelParams, methods, L=None, tol: float = 1e-10, bits: bool = False):
    """RunReport as a dict and the exit code it implies."""
    scale = 1.0 / LN2 if bits else 1.0
    report = {"gamma": params.gamma, "h": params.h, "regime": classify(params).value}
    report.update(_elliptic_fields(params))
    report["units"] = "bits" if bits else "nats"
    results, code = [], EXIT_OK
    for method in methods:
        t0 = time.perf_counter()
        try:
            est = _evaluate(method, params, L, tol)
        except XYEntropyError as exc:
            results.append({"method": method, "error": str(exc)})
            code = max(code, exc.exit_code)
            continue
        results.append(
            {
                "method": method,
                "value": float(est.value) * scale,
                "error_bound": float(est.error_bound) * scale,
                "wall_time": time.perf_counter() - t0,
            }
        )
    report["results"] = results
    return report, code


def cmd_entropy(args) -> int:
    params = ModelParams(args.gamma, args.h)
    report, code = run_entropy(params, _methods(args.methods), args.L, args.tol, args.bits)
    print(dumps(report))
    for r in report["results"]:
        if "error" in r:
            print(f"error: {r['method']}: {r['error']}", file=sys.stderr)
    return code


@dataclass(frozen=True)
class ScanSpec:
    gamma_range: tuple
    h_range: tuple
    methods: tuple
    L: int | None = None

    def __post_init__(self):
        for lo, hi, steps in (self.gamma_range, self.h_range):
            if steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise UsageError(f"bad range {lo}:{hi}:{steps}")
        if "finite" in self.methods and self.L is None:
            raise UsageError("--L is required when the finite method is scanned")

    @staticmethod
    def _axis(lo, hi, steps):
        if steps == 1:
            return [lo]
        return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]

    def grid(self) -> list:
        return [(g, h) for g in self._axis(*self.gamma_range) for h in self._axis(*self.h_range)]


def _range(text: str) -> tuple:
    """'x' or 'lo:hi:steps'."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v, 1)
        if len(parts) == 3:
            return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise UsageError(f"expected a number or lo:hi:steps, got {text!r}")


def _scan_point(point, scan: ScanSpec, tol: float, scale: float) -> list:
    g, h = point
    params = ModelParams(g, h)
    regime = classify(params)
    ell = _elliptic_fields(params)
    rows = []
    for method in scan.methods:
        value, bound, reason = math.nan, math.nan, ""
        try:
            est = _evaluate(method, params, scan.L, tol)
            value, bound = float(est.value) * scale, float(est.error_bound) * scale
        except XYEntropyError as exc:
            reason = str(exc)
        k = ell["k"] if ell["k"] is not None else math.nan
        tau0 = ell["tau0"] if ell["tau0"] is not None else math.nan
        rows.append([fmt(g), fmt(h), regime.value, fmt(k), fmt(tau0), method, fmt(value), fmt(bound), reason])
    return rows


def _threads() -> int:
    try:
        n = int(os.environ.get("XYENT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


PLOT_TEMPLATE = '''\
# Companion plot for {csv_name}
# Columns: gamma, h, regime, k, tau0, method, value (entropy, {units}),
# error_bound, reason (non-empty when the method was rejected; value is NaN).
# One curve per (method, gamma) against h.
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

curves = defaultdict(list)
with open({csv_name!r}) as fh:
    for row in csv.DictReader(fh):
        curves[(row["method"], row["gamma"])].append((float(row["h"]), float(row["value"])))
for (method, gamma), pts in sorted(curves.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=f"{{method}}, gamma={{gamma}}")
plt.xlabel("h")
plt.ylabel("S ({units})")
plt.legend(fontsize="small")
plt.savefig({png_name!r}, dpi=150)
'''


def run_scan(scan: ScanSpec, out: Path, tol: float = 1e-10, bits: bool = False) -> int:
    scale = 1.0 / LN2 if bits else 1.0
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        # map keeps grid order regardless of completion order
        chunks = list(pool.map(lambda pt: _scan_point(pt, scan, tol, scale), scan.grid()))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rows in chunks:
        writer.writerows(rows)
    out.write_text(buf.getvalue())
    plot = out.with_name(out.name + ".plot.py")
    units = "bits" if bits else "nats"
    plot.write_text(PLOT_TEMPLATE.format(csv_name=out.name, png_name=out.stem + ".png", units=units))
    return sum(len(r) for r in chunks)


def cmd_scan(args) -> int:
    if not args.out:
        raise UsageError("--out is required for scan")
    scan = ScanSpec(_range(args.gamma_text), _range(args.h_text), tuple(_methods(args.methods, SCAN_METHODS)), args.L)
    out = Path(args.out)
    try:
        n = run_scan(scan, out, args.tol, args.bits)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {n} rows to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.L is None:
        raise UsageError("--L is required for spectrum")
    rows = doubling_check(args.L, ModelParams(args.gamma, args.h), args.m_max)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["m", "nu_2m", "nu_2m_plus_1", "lambda_m", "pair_gap", "midpoint_error"])
    for r in rows:
        w.writerow([r.m, fmt(r.nu_a), fmt(r.nu_b), fmt(r.lambda_m), fmt(r.gap), fmt(r.midpoint_error)])
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(ModelParams(args.gamma, args.h), args.level)
    failed = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = " ".join(f"{k}={_short(v)}" for k, v in r.details.items())
        print(f"{status} {r.name} {detail}")
        if not r.passed:
            failed.append(r.name)
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(str(_short(x)) for x in v) + "]"
    return v


def cmd_critical_fit(args) -> int:
    if (args.gamma is None) == (args.h is None):
        raise UsageError("critical-fit needs exactly one of --gamma (field fit) or --h (xx fit)")
    if args.gamma is not None:
        kind, fixed, default = "field", args.gamma, (1.9, 1.999)
    else:
        kind, fixed, default = "xx", args.h, (1e-3, 1e-2)
    window = default
    if args.window:
        try:
            lo, hi = (float(x) for x in args.window.split(","))
        except ValueError as exc:
            raise UsageError(f"--window expects lo,hi, got {args.window!r}") from exc
        window = (lo, hi)
    fit = critical_fit(kind, fixed, window, args.points, args.spacing, not args.no_correction)
    print(
        dumps(
            {
                "kind": fit.kind,
                "fixed": fit.fixed,
                "window": list(window),
                "points": args.points,
                "spacing": args.spacing,
                "corrected": fit.corrected,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "expected_slope": fit.expected_slope,
                "expected_intercept": fit.expected_intercept,
                "slope_deviation": fit.slope_deviation,
                "intercept_deviation": fit.intercept_deviation,
                "leading_slope": fit.leading_slope,
                "leading_intercept": fit.leading_intercept,
            }
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xyent", description="Block entanglement entropy of the XY spin chain.")
    sub = p.add_subparsers(dest="command", required=True)

    def couplings(sp, required=True):
        sp.add_argument("--gamma", type=float, required=required)
        sp.add_argument("--h", type=float, required=required)

    sp = sub.add_parser("entropy", help="entropy at one (gamma, h)")
    couplings(sp)
    sp.add_argument("--methods", default="series,closed_form")
    sp.add_argument("--L", type=int)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("scan", help="grid scan to CSV")
    sp.add_argument("--gamma", dest="gamma_text", required=True, help="value or lo:hi:steps")
    sp.add_argument("--h", dest="h_text", required=True, help="value or lo:hi:steps")
    sp.add_argument("--methods", default="series")
    sp.add_argument("--L", type=int)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--out")
    sp.add_argument("--bits", action="store_true")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("spectrum", help="finite-L eigenvalue pairs against lambda_m")
    couplings(sp)
    sp.add_argument("--L", type=int)
    sp.add_argument("--m-max", type=int, default=3)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verify", help="run the determinant-level checks")
    couplings(sp)
    sp.add_argument("--level", choices=("quick", "full"), default="quick")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("critical-fit", help="fit the logarithmic divergence near a critical line")
    couplings(sp, required=False)
    sp.add_argument("--window", help="lo,hi of the varied coupling")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
    sp.add_argument("--no-correction", action="store_true", help="fit the leading two terms only")
    sp.set_defaults(func=cmd_critical_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XYEntropyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return exc.exit_code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
