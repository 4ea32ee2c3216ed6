"""Concrete re-simulation of a scan and error-scenario construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ladder_verify.ast import Device, Location, Program, Step, StepOp, check_word
from ladder_verify.instructions import (
    CONCRETE_RELATIONS, InstructionFault, concrete_eval, instruction_for, read_operand, source_operands,
)
from ladder_verify.vcgen import VC, SsaVar, parse_var_name

CONFIRMED = "Confirmed"
SPURIOUS = "Spurious"


class ModelSortMismatch(ValueError):
    pass


@dataclass(frozen=True)
class InitialValuation:
    bits: dict[Device, bool]
    words: dict[Device, int]
    defaulted: frozenset[Device] = frozenset()

    def state(self) -> dict[Device, object]:
        return {**self.bits, **self.words}

    def items(self) -> list[tuple[Device, object]]:
        s = self.state()
        return [(d, s[d]) for d in sorted(s, key=Device.sort_key)]


@dataclass(frozen=True)
class TraceStep:
    location: Location
    text: str
    acc_active: bool
    contact: bool | None = None
    reads: tuple[tuple[str, int], ...] = ()
    writes: tuple[tuple[Device, object], ...] = ()


@dataclass(frozen=True)
class Fault:
    location: Location
    reason: str
    offending_values: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class Trace:
    init: InitialValuation
    steps: tuple[TraceStep, ...]
    fault: Fault | None = None
    final: dict[Device, object] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Scenario:
    vc: VC
    trace: Trace
    status: str

    @property
    def confirmed(self) -> bool:
        return self.status == CONFIRMED


def default_value(d: Device):
    return False if d.is_bit else 0


def model_to_initial(model: Mapping[str, object], p: Program) -> InitialValuation:
    """Interpret version-0 assignments of a solver model as scan-start values."""
    bits: dict[Device, bool] = {}
    words: dict[Device, int] = {}
    for name, value in model.items():
        var = parse_var_name(name)
        if var is None or var.version != 0 or var.device not in p.devices_used:
            continue
        d = var.device
        if d.is_bit:
            if not isinstance(value, bool):
                raise ModelSortMismatch(f"{name} is a bit device but the model gives {value!r}")
            bits[d] = value
        else:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ModelSortMismatch(f"{name} is a word device but the model gives {value!r}")
            words[d] = check_word(value)
    defaulted = set()
    for d in p.devices_used:
        if d not in bits and d not in words:
            (bits if d.is_bit else words)[d] = default_value(d)
            defaulted.add(d)
    return InitialValuation(bits, words, frozenset(defaulted))


def valuation(values: Mapping[Device, object], p: Program | None = None) -> InitialValuation:
    """Build an initial valuation from explicit values, defaulting the rest of ``p``'s devices."""
    model = {SsaVar(d, 0).name: v for d, v in values.items()}
    if p is None:
        bits = {d: v for d, v in values.items() if d.is_bit}
        words = {d: v for d, v in values.items() if not d.is_bit}
        return InitialValuation(bits, words)
    return model_to_initial(model, p)


def _contact_value(step: Step, state) -> bool:
    if step.op.is_compare:
        a, b = (read_operand(o, state) for o in step.operands)
        return CONCRETE_RELATIONS[step.rel](a, b)
    v = bool(state[step.operands[0]])
    return not v if step.op in (StepOp.LDI, StepOp.ANI, StepOp.ORI) else v


def simulate_scan(p: Program, init: InitialValuation, *, wrap: bool = False, record: bool = True) -> Trace:
    """Run one scan concretely, stopping at the first instruction fault.

    With ``record=False`` only the fault (if any) and final state are kept,
    which is what the exhaustive oracle needs.
    """
    state = init.state()
    for d in p.devices_used:
        if d not in state:
            raise KeyError(f"initial valuation does not cover {d}")
    out: list[TraceStep] = []
    fault = None
    for rng in p.rungs:
        stack: list[bool] = []
        for i in rng:
            step = p.steps[i]
            op = step.op
            if op.is_logic:
                contact = None
                if op in (StepOp.ANB, StepOp.ORB):
                    b = stack.pop()
                    a = stack.pop()
                    stack.append(a and b if op is StepOp.ANB else a or b)
                else:
                    contact = _contact_value(step, state)
                    if op.is_load:
                        stack.append(contact)
                    elif op in (StepOp.AND, StepOp.ANI, StepOp.AND_CMP):
                        stack[-1] = stack[-1] and contact
                    else:
                        stack[-1] = stack[-1] or contact
                if record:
                    reads = tuple((str(o), read_operand(o, state)) for o in step.operands
                                  if op.is_compare)
                    out.append(TraceStep(step.location, step.text, stack[-1], contact, reads))
                continue
            wire = stack[-1]
            ins = instruction_for(step)
            if record:
                srcs = source_operands(ins, step) if ins.kind == "call" else ()
                reads = tuple((str(o), read_operand(o, state)) for o in srcs)
            try:
                new = concrete_eval(step, wire, state, wrap=wrap)
            except InstructionFault as f:
                if record:
                    out.append(TraceStep(step.location, step.text, wire, None, reads))
                fault = Fault(f.location, f.reason, tuple(f.offending))
                return Trace(init, tuple(out), fault, state)
            if record:
                dst = step.operands[-1]
                writes = ((dst, new[dst]),) if (wire or ins.kind == "coil") else ()
                out.append(TraceStep(step.location, step.text, wire, None, reads, writes))
            state = new
    return Trace(init, tuple(out), fault, state)


def build_scenario(vc: VC, model: Mapping[str, object], p: Program, *, wrap: bool = False) -> Scenario:
    """Re-simulate a solver model and check it reproduces the VC's fault."""
    init = model_to_initial(model, p)
    trace = simulate_scan(p, init, wrap=wrap)
    ok = (trace.fault is not None and trace.fault.location == vc.location
          and trace.fault.reason == vc.reason)
    return Scenario(vc, trace, CONFIRMED if ok else SPURIOUS)


def parse_init(text: str, p: Program) -> InitialValuation:
    """Parse ``"X1=1,D0=9999"`` into a valuation over ``p``'s devices."""
    values: dict[Device, object] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"expected device=value, got {item!r}")
        d = Device.parse(name)
        raw = raw.strip()
        if d.is_bit:
            if raw not in ("0", "1"):
                raise ValueError(f"bit device {d} takes 0 or 1, got {raw!r}")
            values[d] = raw == "1"
        else:
            values[d] = check_word(int(raw))
    return valuation(values, p) if p is not None else valuation(values)


def format_value(d, v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def format_trace(trace: Trace) -> list[str]:
    lines = []
    for ts in trace.steps:
        wire = "on " if ts.acc_active else "off"
        extra = ""
        if ts.writes:
            extra = " -> " + ", ".join(f"{d}={format_value(d, v)}" for d, v in ts.writes)
        elif ts.reads and trace.fault and ts.location == trace.fault.location:
            extra = " -> FAULT (" + ", ".join(f"{n}={v}" for n, v in ts.reads) + ")"
        lines.append(f"step {ts.location.step:>4}  [{wire}] {ts.text}{extra}")
    return lines

