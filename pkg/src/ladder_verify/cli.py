"""ladder-verify command line.

Exit codes for ``verify``: 0 all conditions proved, 1 runtime error found,
2 inconclusive, 3 input/usage/configuration problem, 4 internal
inconsistency (a solver model that does not re-simulate to its fault).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ladder_verify import __version__
from ladder_verify.ast import Device
from ladder_verify.instructions import registry
from ladder_verify.oracle import BudgetExceeded, DomainSpec, enumerate_faults, enumeration_plan
from ladder_verify.parser import LadderSyntaxError, parse_program
from ladder_verify.pipeline import InternalInconsistency, build_report, exit_code, verify
from ladder_verify.report import ERROR, format_init, render_html, render_json, render_text
from ladder_verify.scenario import format_trace, parse_init, simulate_scan
from ladder_verify.smt import DEFAULT_TIMEOUT_MS, SOLVER_ENV, SolverConfig, SolverConfigError, resolve_solver
from ladder_verify.svg import render_svg
from ladder_verify.vcgen import format_vc, run_scan_symbolic

log = logging.getLogger("ladder_verify")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_INTERNAL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ladder-verify", description="Find runtime errors in ladder IL programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="check every instruction precondition of one scan")
    v.add_argument("file")
    v.add_argument("--all", action="store_true", dest="all_vcs", help="check every condition, not just up to the first error")
    v.add_argument("--wrap", action="store_true", help="16-bit wraparound arithmetic (no overflow checks)")
    v.add_argument("--solver", help=f"SMT-LIB2 solver executable (default ${SOLVER_ENV} or z3)")
    v.add_argument("--solver-arg", action="append", default=[], help="extra solver argument (repeatable)")
    v.add_argument("--timeout", type=_positive, default=DEFAULT_TIMEOUT_MS, help="per-condition timeout in ms")
    v.add_argument("--jobs", type=_positive, default=1, help="solver processes to run in parallel")
    v.add_argument("--format", choices=("text", "json", "html"), default="text")
    v.add_argument("--out", help="directory for report files")
    v.add_argument("--dump-vcs", nargs="?", const="-", metavar="PATH", help="write the conditions to PATH or stdout")
    v.add_argument("--timings", action="store_true", help="include per-condition solver time")

    s = sub.add_parser("simulate", help="run one scan from given initial values")
    s.add_argument("file")
    s.add_argument("--init", default="", help='initial values, e.g. "X1=1,D0=9999"')
    s.add_argument("--wrap", action="store_true")

    o = sub.add_parser("oracle", help="enumerate initial states exhaustively")
    o.add_argument("file")
    o.add_argument("--domain", default="", help='e.g. "D0=0..100;X1=1" (single value pins a device)')
    o.add_argument("--budget", type=_positive, default=DomainSpec().budget)
    o.add_argument("--wrap", action="store_true")

    r = sub.add_parser("render", help="draw a simulated scan as SVG")
    r.add_argument("file")
    r.add_argument("--init", default="")
    r.add_argument("--wrap", action="store_true")
    r.add_argument("--out", help="write <name>.scan.svg into this directory instead of stdout")

    sub.add_parser("list-instructions", help="show the instruction contracts")
    return parser


def _load(path: str):
    try:
        text = Path(path).read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        return parse_program(text)
    except LadderSyntaxError as e:
        for err in e.errors:
            print(f"{path}:{err}", file=sys.stderr)
        raise UsageError(f"{path}: {len(e.errors)} error(s)") from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def cmd_verify(args) -> int:
    program = _load(args.file)
    try:
        solver = resolve_solver(args.solver)
        cfg = SolverConfig(solver, tuple(args.solver_arg), max(args.timeout, 100))
    except (SolverConfigError, ValueError) as e:
        raise UsageError(str(e)) from e
    name = Path(args.file).name
    if args.dump_vcs:
        vcs, _ = run_scan_symbolic(program, wrap=args.wrap)
        dump = "".join(format_vc(vc) for vc in vcs)
        if args.dump_vcs == "-":
            sys.stdout.write(dump)
        else:
            _write(Path(args.dump_vcs), dump)
    try:
        vcs, results = verify(program, cfg, all_vcs=args.all_vcs, wrap=args.wrap, jobs=args.jobs)
    except SolverConfigError as e:
        raise UsageError(str(e)) from e
    try:
        report = build_report(name, program, vcs, results, cfg, all_vcs=args.all_vcs, wrap=args.wrap)
    except InternalInconsistency as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    text = render_text(report, timings=args.timings)
    if args.format == "json":
        sys.stdout.write(render_json(report, timings=args.timings))
    else:
        sys.stdout.write(text)
    stem = Path(args.file).stem
    if args.out or args.format == "html":
        out = Path(args.out or ".")
        if args.out:
            _write(out / f"{stem}.report.txt", text)
            _write(out / f"{stem}.report.json", render_json(report, timings=args.timings))
        for k, outcome in enumerate((o for o in report.outcomes if o.status == ERROR), start=1):
            _write(out / f"{stem}.error-{k}.html", render_html(program, outcome, report))
    return exit_code(report)


def cmd_simulate(args) -> int:
    program = _load(args.file)
    try:
        init = parse_init(args.init, program)
    except ValueError as e:
        raise UsageError(str(e)) from e
    trace = simulate_scan(program, init, wrap=args.wrap)
    print(f"initial values: {format_init(init)}")
    for line in format_trace(trace):
        print(line)
    if trace.fault:
        f = trace.fault
        values = ", ".join(f"{n}={v}" for n, v in f.offending_values)
        print(f"fault: {f.reason} at {f.location} ({values})")
        return EXIT_ERROR
    print("no fault")
    return EXIT_OK


def parse_domain(text: str) -> DomainSpec:
    dom = DomainSpec()
    for item in filter(None, (s.strip() for s in text.split(";"))):
        name, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"expected DEVICE=values, got {item!r}")
        d = Device.parse(name)
        values: list[int] = []
        for part in raw.split("|"):
            lo, dots, hi = part.partition("..")
            values.extend(range(int(lo), int(hi) + 1) if dots else [int(part)])
        if len(values) == 1:
            dom.pinned[d] = bool(values[0]) if d.is_bit else values[0]
        elif d.is_bit:
            raise ValueError(f"bit device {d} ranges over 0 and 1 already")
        else:
            dom.words[d] = tuple(values)
    return dom


def cmd_oracle(args) -> int:
    program = _load(args.file)
    try:
        dom = parse_domain(args.domain)
    except ValueError as e:
        raise UsageError(str(e)) from e
    dom.budget = args.budget
    devices, _, size = enumeration_plan(program, dom)
    print(f"enumerating {size} initial states over {', '.join(map(str, devices)) or 'no devices'}")
    try:
        faults = enumerate_faults(program, dom, wrap=args.wrap)
    except BudgetExceeded as e:
        raise UsageError(str(e)) from e
    groups: dict[tuple[int, str], list] = {}
    for rec in faults:
        groups.setdefault((rec.location_step, rec.reason), []).append(rec.valuation)
    for (step, reason), vals in sorted(groups.items()):
        sample = min(vals, key=repr)
        shown = " ".join(f"{d}={int(v) if isinstance(v, bool) else v}" for d, v in sample)
        noun = "state" if len(vals) == 1 else "states"
        print(f"step {step}: {reason}: {len(vals)} faulting {noun}, e.g. {shown}")
    if not faults:
        print("no faulting state")
    return EXIT_ERROR if faults else EXIT_OK


def cmd_render(args) -> int:
    program = _load(args.file)
    try:
        init = parse_init(args.init, program)
    except ValueError as e:
        raise UsageError(str(e)) from e
    svg = render_svg(program, simulate_scan(program, init, wrap=args.wrap))
    if args.out:
        _write(Path(args.out) / f"{Path(args.file).stem}.scan.svg", svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, ins in registry().items():
        roles = ", ".join(spec.role + ("|const" if spec.accepts_const else "") for spec in ins.signature)
        reasons = "; ".join(c.reason for c in ins.checks) or "-"
        print(f"{name:<4} {ins.kind:<8} ({roles})")
        print(f"     effect: {ins.summary}")
        print(f"     pre:    {ins.precondition_text()}")
        print(f"     reason: {reasons}")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "render": cmd_render,
    "list-instructions": cmd_list,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"ladder-verify: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
