"""Exhaustive ground truth over bounded initial-state domains.

The oracle knows nothing about VCs or solvers: it runs the concrete
simulator on every initial valuation of a finite domain and records which
ones fault, where, and why.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ladder_verify.ast import WORD_MAX, WORD_MIN, Device, Program, StepOp
from ladder_verify.instructions import instruction_for, source_operands
from ladder_verify.scenario import InitialValuation, Scenario, default_value, simulate_scan
from ladder_verify.smt import Sat, Unknown, Unsat

BOUNDARY_WORDS = (-32768, -2, -1, 0, 1, 9998, 9999, 10000, 32766, 32767)
DEFAULT_BUDGET = 1 << 22
FULL_RANGE = range(WORD_MIN, WORD_MAX + 1)


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class FaultRecord:
    valuation: tuple[tuple[Device, object], ...]
    location_step: int
    reason: str


@dataclass
class DomainSpec:
    """Per-device value sets. Unlisted bit devices range over both values.

    Unlisted word devices range over the full 16-bit range when the program
    has at most one word device, otherwise over ``word_subset``. Explicit
    word sets always get the boundary values added.
    """

    words: dict[Device, tuple[int, ...]] = field(default_factory=dict)
    pinned: dict[Device, object] = field(default_factory=dict)
    word_subset: tuple[int, ...] = BOUNDARY_WORDS
    budget: int = DEFAULT_BUDGET

    def values_for(self, d: Device, word_devices: int):
        if d in self.pinned:
            return (self.pinned[d],)
        if d.is_bit:
            return (False, True)
        if d in self.words:
            return tuple(sorted(set(self.words[d]) | set(BOUNDARY_WORDS)))
        if word_devices <= 1:
            return FULL_RANGE
        return tuple(sorted(set(self.word_subset) | set(BOUNDARY_WORDS)))

    def contains(self, d: Device, value, word_devices: int) -> bool:
        return value in self.values_for(d, word_devices)


def read_devices(p: Program) -> list[Device]:
    """Devices whose scan-start value can influence a fault.

    Only values that are read (contacts, comparison and source operands,
    INC/DEC targets) can reach a precondition; a device that is only ever
    written just carries its initial value through.
    """
    found: set[Device] = set()
    for step in p.steps:
        if step.op in (StepOp.ANB, StepOp.ORB, StepOp.OUT, StepOp.SET, StepOp.RST):
            continue
        if step.op is StepOp.CALL:
            ins = instruction_for(step)
            operands = source_operands(ins, step)
        else:
            operands = step.operands
        found.update(o for o in operands if isinstance(o, Device))
    return sorted(found, key=Device.sort_key)


def enumeration_plan(p: Program, dom: DomainSpec):
    devices = read_devices(p)
    n_words = sum(1 for d in devices if not d.is_bit)
    domains = [dom.values_for(d, n_words) for d in devices]
    size = 1
    for values in domains:
        size *= len(values)
    return devices, domains, size


def enumerate_faults(p: Program, dom: DomainSpec | None = None, *, wrap: bool = False) -> set[FaultRecord]:
    """Simulate every valuation in the domain; return the faulting ones."""
    dom = dom or DomainSpec()
    devices, domains, size = enumeration_plan(p, dom)
    if size > dom.budget:
        raise BudgetExceeded(f"{size} states exceed the budget of {dom.budget}")
    fixed = {d: default_value(d) for d in p.devices_used if d not in devices}
    faults: set[FaultRecord] = set()
    for combo in itertools.product(*domains):
        bits = {d: v for d, v in fixed.items() if d.is_bit}
        words = {d: v for d, v in fixed.items() if not d.is_bit}
        for d, v in zip(devices, combo):
            (bits if d.is_bit else words)[d] = v
        trace = simulate_scan(p, InitialValuation(bits, words), wrap=wrap, record=False)
        if trace.fault is not None:
            faults.add(FaultRecord(tuple(zip(devices, combo)), trace.fault.location.step, trace.fault.reason))
    return faults


@dataclass
class CrossCheckReport:
    findings: list[str] = field(default_factory=list)
    verifier_errors: int = 0
    oracle_faults: int = 0
    witnesses_outside: int = 0

    @property
    def ok(self) -> bool:
        return not self.findings


def cross_check(p: Program, dom: DomainSpec, results, faults: set[FaultRecord] | None = None,
                *, wrap: bool = False) -> CrossCheckReport:
    """Compare verifier results against exhaustive enumeration.

    ``results`` is a sequence of ``(vc, verdict, scenario_or_None)`` triples
    covering every VC of the program.
    """
    if faults is None:
        faults = enumerate_faults(p, dom, wrap=wrap)
    devices, _, _ = enumeration_plan(p, dom)
    n_words = sum(1 for d in devices if not d.is_bit)
    report = CrossCheckReport(oracle_faults=len(faults))
    for vc, verdict, scenario in results:
        if isinstance(verdict, Unknown):
            report.findings.append(f"VC {vc.index} inconclusive ({verdict.reason}); cannot cross-check")
            continue
        if isinstance(verdict, Unsat):
            continue
        assert isinstance(verdict, Sat)
        if scenario is None or not isinstance(scenario, Scenario):
            report.findings.append(f"VC {vc.index} is sat but no scenario was built")
            continue
        if not scenario.confirmed:
            report.findings.append(f"VC {vc.index} model is spurious: {scenario.trace.fault}")
            continue
        report.verifier_errors += 1
        init = scenario.trace.init.state()
        key = tuple((d, init[d]) for d in devices)
        if all(dom.contains(d, v, n_words) for d, v in key):
            rec = FaultRecord(key, vc.location.step, vc.reason)
            if rec not in faults:
                report.findings.append(f"VC {vc.index} witness {_fmt(key)} is not an oracle fault")
        else:
            report.witnesses_outside += 1
    # Per-condition completeness: a fault the oracle reaches must have a satisfiable VC.
    verdicts = {(vc.location.step, vc.reason): (vc, verdict) for vc, verdict, _ in results}
    for step, reason in sorted({(r.location_step, r.reason) for r in faults}):
        vc, verdict = verdicts.get((step, reason), (None, None))
        if vc is None:
            report.findings.append(f"oracle fault {reason!r} at step {step} has no VC")
        elif isinstance(verdict, Unsat):
            report.findings.append(f"oracle reaches {reason!r} at step {step} but VC {vc.index} is unsat")
    verifier_found = report.verifier_errors > 0
    if verifier_found != bool(faults) and not (verifier_found and report.witnesses_outside):
        if faults:
            sample = min(faults, key=lambda r: (r.location_step, repr(r.valuation)))
            report.findings.append(
                f"oracle found {len(faults)} faulting states (e.g. {_fmt(sample.valuation)} "
                f"-> {sample.reason}) but the verifier reported none")
        else:
            report.findings.append("verifier reported an error inside the domain but the oracle found none")
    return report


def _fmt(valuation) -> str:
    parts = []
    for d, v in valuation:
        parts.append(f"{d}={int(v) if isinstance(v, bool) else v}")
    return "{" + ", ".join(parts) + "}"
