"""Forward symbolic execution of one scan in single-state-assignment form.

Every write to a device defines a fresh version of it; version 0 is the
value at scan start. The wire feeding each action step is bound to a name of
its own (``w<step>``) so it can be shared between the step's effect and its
verification conditions.

Each precondition yields one VC::

    assumptions /\\ wire /\\ not domain(args)

where the assumptions are the guarded preconditions of every check executed
before it (``wire_i -> domain_i``). A model of the VC is therefore a scan
start that reaches this check with all earlier checks passing, i.e. the
first fault of the concrete scan is exactly this one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ladder_verify import symbolic as S
from ladder_verify.ast import Const, Device, DeviceKind, Location, Program, Step, StepOp
from ladder_verify.instructions import instruction_for, source_operands
from ladder_verify.parser import validate

_VAR_RE_KINDS = "".join(k.value for k in DeviceKind)


@dataclass(frozen=True)
class SsaVar:
    device: Device
    version: int

    @property
    def name(self) -> str:
        return f"{self.device}_{self.version}"

    def term(self) -> S.Term:
        return S.var(self.name, S.BOOL if self.device.is_bit else S.INT)


def parse_var_name(name: str) -> SsaVar | None:
    dev, _, version = name.rpartition("_")
    if not version.isdigit() or not dev or dev[0] not in _VAR_RE_KINDS:
        return None
    try:
        return SsaVar(Device.parse(dev), int(version))
    except ValueError:
        return None


@dataclass(frozen=True)
class Def:
    name: str
    term: S.Term
    deps: frozenset[str]


@dataclass(frozen=True)
class VC:
    index: int
    formula: S.Term
    location: Location
    instr: str
    reason: str
    source: str
    defs: tuple[Def, ...] = field(repr=False, compare=False)

    def closed(self) -> S.Term:
        return inline(self, self.defs)

    def variables(self) -> dict[str, str]:
        """Version-0 variables of the closed formula, name -> sort."""
        return S.free_vars(self.closed())


@dataclass
class SymState:
    current: dict[Device, SsaVar] = field(default_factory=dict)
    defs: list[Def] = field(default_factory=list)
    acc_stack: list[S.Term] = field(default_factory=list)
    assumptions: list[S.Term] = field(default_factory=list)

    def read(self, d: Device) -> S.Term:
        return self.current.get(d, SsaVar(d, 0)).term()

    def operand(self, o) -> S.Term:
        return S.num(o.value) if isinstance(o, Const) else self.read(o)

    def define(self, name: str, term: S.Term) -> S.Term:
        self.defs.append(Def(name, term, frozenset(S.free_vars(term))))
        return S.var(name, term.sort)

    def assign(self, d: Device, term: S.Term) -> None:
        prev = self.current.get(d, SsaVar(d, 0))
        nxt = SsaVar(d, prev.version + 1)
        self.define(nxt.name, term)
        self.current[d] = nxt


class UnvalidatedProgram(ValueError):
    pass


def _contact(state: SymState, step: Step) -> S.Term:
    if step.op.is_compare:
        a, b = (state.operand(o) for o in step.operands)
        return S.rel(step.rel, a, b)
    t = state.read(step.operands[0])
    return S.not_(t) if step.op in (StepOp.LDI, StepOp.ANI, StepOp.ORI) else t


def run_scan_symbolic(p: Program, *, wrap: bool = False) -> tuple[list[VC], SymState]:
    """Symbolically execute one scan of ``p`` and collect its VCs."""
    problems = validate(p)
    if problems:
        raise UnvalidatedProgram("; ".join(str(e) for e in problems))
    state = SymState()
    vcs: list[VC] = []
    for rng in p.rungs:
        state.acc_stack = []
        for i in rng:
            _step(state, p.steps[i], vcs, wrap)
    return vcs, state


def _step(state: SymState, step: Step, vcs: list[VC], wrap: bool) -> None:
    op = step.op
    stack = state.acc_stack
    if op.is_load:
        stack.append(_contact(state, step))
    elif op in (StepOp.AND, StepOp.ANI, StepOp.AND_CMP):
        stack[-1] = S.and_(stack[-1], _contact(state, step))
    elif op in (StepOp.OR, StepOp.ORI, StepOp.OR_CMP):
        stack[-1] = S.or_(stack[-1], _contact(state, step))
    elif op in (StepOp.ANB, StepOp.ORB):
        b = stack.pop()
        a = stack.pop()
        stack.append(S.and_(a, b) if op is StepOp.ANB else S.or_(a, b))
    else:
        wire = stack[-1]
        if not S.is_const(wire) and wire.op != "var":
            wire = state.define(f"w{step.location.step}", wire)
            stack[-1] = wire
        _action(state, step, wire, vcs, wrap)


def _action(state: SymState, step: Step, wire: S.Term, vcs: list[VC], wrap: bool) -> None:
    ins = instruction_for(step)
    dst = step.operands[-1]
    prev = state.read(dst)
    if ins.kind == "coil":
        state.assign(dst, ins.sym_compute(wire, prev))
        return
    args = [state.operand(o) for o in source_operands(ins, step)]
    tag = f"s{step.location.step}"
    for check in ins.active_checks(wrap):
        domain = check.domain(args, tag)
        formula = S.and_(*state.assumptions, wire, S.not_(domain))
        vcs.append(VC(len(vcs) + 1, formula, step.location, ins.name, check.reason,
                      str(step), tuple(state.defs)))
        state.assumptions.append(S.implies(wire, domain))
    effect = ins.sym_compute(args, tag, wrap)
    state.assign(dst, S.ite(wire, effect, prev))


def needed_defs(formula: S.Term, defs) -> list[Def]:
    """Definitions the formula transitively depends on, in definition order."""
    need = set(S.free_vars(formula))
    keep = []
    for d in reversed(defs):
        if d.name in need:
            keep.append(d)
            need |= d.deps
    keep.reverse()
    return keep


def inline(vc: VC, defs=None) -> S.Term:
    """Close a VC over its definitions with a let chain (size linear in the defs)."""
    defs = vc.defs if defs is None else defs
    chain = needed_defs(vc.formula, defs)
    return S.let([S.Binding(d.name, d.term) for d in chain], vc.formula)


def evaluate_defs(state: SymState, env: dict[str, object]) -> dict[str, object]:
    """Evaluate every definition in order starting from version-0 values."""
    scope = dict(env)
    for d in state.defs:
        scope[d.name] = S.evaluate(d.term, scope)
    return scope


def initial_env(p: Program, values: dict[Device, object]) -> dict[str, object]:
    return {SsaVar(d, 0).name: values[d] for d in p.devices_used}


def format_vc(vc: VC) -> str:
    return (f"VC {vc.index}: {vc.instr} at {vc.location}\n"
            f"  source: {vc.source}\n"
            f"  reason: {vc.reason}\n"
            f"  formula:\n    " + S.pretty(vc.closed()).replace("\n", "\n    ") + "\n")
