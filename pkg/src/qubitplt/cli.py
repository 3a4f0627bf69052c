"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid state or parameters,
3 numerical failure, 4 a claim check failed (random disagreements,
positivity violations, selftest failures).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .criteria import Tolerances, analyze
from .errors import InvalidState, NumericalFailure, ParamOutOfRange, QubitPltError
from .harness import DEFAULT_BATCH, Family, SweepRow, compare_batch, sign_changes, sweep
from .selftest import run_selftest

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERICAL, EXIT_CLAIM = 0, 1, 2, 3, 4

CSV_COLUMNS = ["param", "T", "T_normalized", "plt_verdict", "ppt_min_eig", "ppt_verdict", "ccn_norm", "concurrence"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_tolerances(p):
    p.add_argument("--eps-boundary", type=float, default=1e-9, help="relative width of the boundary band")
    p.add_argument("--eps-imag", type=float, default=1e-6, help="discardable |Im lambda| relative to ||B||")
    p.add_argument("--eps-neg", type=float, default=1e-8, help="clampable negative lambda relative to ||B||")


def _tolerances(args) -> Tolerances:
    return Tolerances(boundary_eps=args.eps_boundary, imag_tol=args.eps_imag, neg_tol=args.eps_neg)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qubitplt", description="Two-qubit entanglement tests via the partial Lorentz transformation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="run every criterion on a state file")
    p.add_argument("path", type=Path, help='JSON file with 4x4 arrays "re" and "im"')
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_tolerances(p)

    p = sub.add_parser("sweep", help="tabulate a one-parameter family to CSV")
    p.add_argument("--family", required=True, choices=["werner", "rudolph", "singlet_polarized"])
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--r", type=float, help="fixed r for the rudolph family")
    p.add_argument("--s", type=float, help="fixed s for the rudolph family")
    p.add_argument("--out", type=Path, help="CSV destination (default: standard output)")
    _add_tolerances(p)

    p = sub.add_parser("random", help="PLT versus PPT agreement on random states")
    p.add_argument("--ensemble", choices=sorted(DEFAULT_BATCH), default="ginibre")
    p.add_argument("-n", type=int, help="number of states (default depends on the ensemble)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json", action="store_true", help="print only the JSON summary")
    _add_tolerances(p)

    sub.add_parser("selftest", help="closed-form regression checks")
    return parser


def load_state(path: Path) -> tuple[np.ndarray, str | None]:
    """Parse a state file into a complex 4x4 array (validation happens later)."""
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidState(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "re" not in doc or "im" not in doc:
        raise InvalidState('state file needs a JSON object with "re" and "im" arrays')
    try:
        re = np.asarray(doc["re"], dtype=np.float64)
        im = np.asarray(doc["im"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidState(f'"re"/"im" must be numeric arrays: {exc}') from exc
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise InvalidState(f'"re" and "im" must both be 4x4, got {re.shape} and {im.shape}')
    label = doc.get("label")
    return re + 1j * im, label if isinstance(label, str) else None


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _matrix(m) -> str:
    return "\n".join("  " + "  ".join(f"{v: .10f}" for v in row) for row in np.asarray(m))


def _cmd_analyze(args) -> int:
    rho, label = load_state(args.path)
    report = analyze(rho, _tolerances(args), label=label)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
        return EXIT_OK
    if report.label:
        print(f"state: {report.label}")
    print(f"trace: {_fmt(report.trace)}")
    print("A (Pauli coefficients):")
    print(_matrix(report.coefficients))
    print("B (Lorentz square):")
    print(_matrix(report.lorentz))
    print("lambda: " + "  ".join(_fmt(v) for v in report.plt.eigenvalues))
    print("mu:     " + "  ".join(_fmt(v) for v in report.plt.mu))
    print(f"T: {_fmt(float(report.plt.T))}   T/mu0: {_fmt(float(report.plt.T_normalized))}")
    print(f"PLT:         {report.plt_verdict.label.value}")
    print(f"PPT:         {report.ppt_verdict.label.value}  (min eigenvalue {_fmt(report.ppt_min_eig)})")
    print(f"CCN:         {report.ccn_verdict.label.value}  (trace norm {_fmt(report.ccn_norm)})")
    print(f"concurrence: {report.concurrence_verdict.label.value}  (C = {_fmt(report.concurrence)})")
    return EXIT_OK


def write_csv(rows: list[SweepRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([
            _fmt(row.param), _fmt(row.T), _fmt(row.T_normalized), row.plt_verdict,
            _fmt(row.ppt_min_eig), row.ppt_verdict, _fmt(row.ccn_norm), _fmt(row.concurrence),
        ])


def read_csv(stream) -> list[SweepRow]:
    reader = csv.DictReader(stream)
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        SweepRow(
            param=float(d["param"]), T=float(d["T"]), T_normalized=float(d["T_normalized"]),
            plt_verdict=d["plt_verdict"], ppt_min_eig=float(d["ppt_min_eig"]), ppt_verdict=d["ppt_verdict"],
            ccn_norm=float(d["ccn_norm"]), concurrence=float(d["concurrence"]),
        )
        for d in reader
    ]


def _cmd_sweep(args) -> int:
    if args.family == "rudolph" and (args.r is None or args.s is None):
        raise UsageError("--family rudolph needs --r and --s")
    if args.steps < 2 or not args.lo < args.hi:
        raise UsageError("need --steps >= 2 and --lo < --hi")
    family = Family(args.family, args.r, args.s) if args.family == "rudolph" else Family(args.family)
    rows = sweep(family, args.lo, args.hi, args.steps, _tolerances(args))
    info = sys.stdout
    if args.out is None:
        write_csv(rows, sys.stdout)
        info = sys.stderr
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    print(f"rows: {len(rows)}", file=info)
    crossings = sign_changes(rows)
    if crossings:
        for lo, hi in crossings:
            print(f"T changes sign between {_fmt(lo)} and {_fmt(hi)}", file=info)
    else:
        print("T does not change sign", file=info)
    return EXIT_OK


def _cmd_random(args) -> int:
    n = DEFAULT_BATCH[args.ensemble] if args.n is None else args.n
    if n < 1:
        raise UsageError(f"-n must be at least 1, got {n}")
    stats = compare_batch(args.ensemble, n, args.seed, _tolerances(args))
    summary = stats.to_dict()
    if not args.json:
        width = max(len(k) for k in summary)
        for key, value in summary.items():
            if isinstance(value, list):
                value = f"{len(value)} seeds" + (f": {value[:10]}" if value else "")
            print(f"{key:<{width}}  {value}")
    print(json.dumps(summary))
    return EXIT_OK if stats.ok else EXIT_CLAIM


def _cmd_selftest(args) -> int:
    checks = run_selftest()
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CLAIM


COMMANDS = {"analyze": _cmd_analyze, "sweep": _cmd_sweep, "random": _cmd_random, "selftest": _cmd_selftest}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qubitplt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidState as exc:
        print(f"qubitplt: invalid state: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_INVALID
    except ParamOutOfRange as exc:
        print(f"qubitplt: parameter out of range: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"qubitplt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QubitPltError as exc:
        print(f"qubitplt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
