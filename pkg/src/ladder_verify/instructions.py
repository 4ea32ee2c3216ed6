"""Instruction contracts.

Every instruction carries a signature, an ordered list of labelled
preconditions and a transfer function. Each precondition and transfer
function is written twice, once over Python ints for the simulator and once
over :mod:`ladder_verify.symbolic` terms for the VC generator. The two forms
are kept deliberately separate so the differential tests between simulator
and SSA definitions actually compare two implementations.

A precondition always has the shape ``inactive wire or domain(args)``; only
the domain part is stored here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from ladder_verify import symbolic as S
from ladder_verify.ast import WORD_MAX, WORD_MIN, Const, Device, DeviceKind, Location, Step, StepOp, to_signed16, wrap16

WORD_SRC = "word_src"
WORD_DST = "word_dst"
BIT_DST = "bit_dst"
BIT_SRC = "bit_src"


@dataclass(frozen=True)
class OperandSpec:
    role: str
    accepts_const: bool = False


@dataclass(frozen=True)
class Check:
    """One labelled precondition: the domain condition that must hold when the wire is active."""

    reason: str
    text: str
    holds: Callable[[list[int]], bool]
    domain: Callable[[list[S.Term], str], S.Term]
    overflow: bool = False  # dropped in wrap mode


@dataclass(frozen=True)
class Instruction:
    name: str
    signature: tuple[OperandSpec, ...]
    kind: str  # "call", "coil" or "compare"
    checks: tuple[Check, ...] = ()
    compute: Callable | None = None
    sym_compute: Callable | None = None
    reads_dst: bool = False
    summary: str = ""

    def active_checks(self, wrap: bool = False) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not (wrap and c.overflow))

    def precondition_text(self, wrap: bool = False) -> str:
        checks = self.active_checks(wrap)
        if not checks:
            return "none"
        return "inactive or " + " and ".join(f"({c.text})" for c in checks)


class UnknownInstruction(KeyError):
    pass


@dataclass
class InstructionFault(Exception):
    """Raised by :func:`concrete_eval` when an active instruction's precondition fails."""

    reason: str
    location: Location
    offending: list[tuple[str, int]] = field(default_factory=list)

    def __str__(self) -> str:
        return f"{self.reason} at {self.location}"


# --- word helpers -------------------------------------------------------------

def in_word(v: int) -> bool:
    return WORD_MIN <= v <= WORD_MAX


def sym_in_word(t: S.Term) -> S.Term:
    return S.and_(S.rel("<=", S.num(WORD_MIN), t), S.rel("<=", t, S.num(WORD_MAX)))


def sym_wrap16(t: S.Term) -> S.Term:
    return S.sub(S.mod(S.add(t, S.num(-WORD_MIN)), S.num(1 << 16)), S.num(-WORD_MIN))


def sym_to_unsigned(t: S.Term) -> S.Term:
    return S.ite(S.rel("<", t, S.num(0)), S.add(t, S.num(1 << 16)), t)


def sym_to_signed(t: S.Term) -> S.Term:
    return S.ite(S.rel(">", t, S.num(WORD_MAX)), S.sub(t, S.num(1 << 16)), t)


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


# --- BCD / BIN ------------------------------------------------------------------

def bcd_compute(src: int) -> int:
    """Pack a decimal number in [0, 9999] into four BCD nibbles.

    Returns the 16-bit pattern as a non-negative int (9999 -> 0x9999 = 39321).
    """
    if not 0 <= src <= 9999:
        raise ValueError(f"BCD source {src} outside [0, 9999]")
    dig1 = src // 1000
    r1 = src % 1000
    dig2 = r1 // 100
    r2 = r1 % 100
    dig3 = r2 // 10
    dig4 = r2 % 10
    return dig1 * 4096 + dig2 * 256 + dig3 * 16 + dig4


def bin_compute(src: int) -> int:
    """Decode a 16-bit BCD pattern (given in [0, 65535]) back to its decimal value."""
    if not 0 <= src <= 0xFFFF:
        raise ValueError(f"BIN source {src} is not a 16-bit pattern")
    nibbles = [(src >> shift) & 0xF for shift in (12, 8, 4, 0)]
    if any(n > 9 for n in nibbles):
        raise ValueError(f"BIN source {src:#06x} has a nibble above 9")
    n3, n2, n1, n0 = nibbles
    return n3 * 1000 + n2 * 100 + n1 * 10 + n0


def sym_bcd_compute(src: S.Term, tag: str) -> S.Term:
    """Symbolic packing with the intermediate digits let-bound."""
    def v(name):
        return S.var(f"{name}_{tag}", S.INT)

    thousand, hundred, ten = S.num(1000), S.num(100), S.num(10)
    bindings = [
        S.Binding(f"dig1_{tag}", S.div(src, thousand)),
        S.Binding(f"r1_{tag}", S.mod(src, thousand)),
        S.Binding(f"dig2_{tag}", S.div(v("r1"), hundred)),
        S.Binding(f"r2_{tag}", S.mod(v("r1"), hundred)),
        S.Binding(f"dig3_{tag}", S.div(v("r2"), ten)),
        S.Binding(f"dig4_{tag}", S.mod(v("r2"), ten)),
    ]
    packed = S.Term("+", (
        S.mul(v("dig1"), S.num(4096)),
        S.mul(v("dig2"), S.num(256)),
        S.mul(v("dig3"), S.num(16)),
        v("dig4"),
    ), sort=S.INT)
    return S.let(bindings, packed)


def _nibbles(pattern: S.Term) -> list[S.Term]:
    return [S.mod(S.div(pattern, S.num(1 << shift)), S.num(16)) for shift in (12, 8, 4, 0)]


def _bcd_holds(vals):
    return 0 <= vals[0] <= 9999


def _bcd_domain(args, tag):
    return S.and_(S.rel("<=", S.num(0), args[0]), S.rel("<=", args[0], S.num(9999)))


def _bin_holds(vals):
    pattern = vals[0] & 0xFFFF
    return all(((pattern >> s) & 0xF) <= 9 for s in (12, 8, 4, 0))


def _bin_domain(args, tag):
    return S.and_(*(S.rel("<=", n, S.num(9)) for n in _nibbles(sym_to_unsigned(args[0]))))


def _bin_sym(args, tag, wrap):
    n3, n2, n1, n0 = _nibbles(sym_to_unsigned(args[0]))
    return S.Term("+", (S.mul(n3, S.num(1000)), S.mul(n2, S.num(100)), S.mul(n1, S.num(10)), n0), sort=S.INT)


# --- arithmetic ---------------------------------------------------------------------

def _overflow(name: str, result: Callable[[list[int]], int], sym_result: Callable) -> Check:
    return Check(
        reason=f"{name}: overflow",
        text=f"{WORD_MIN} <= result <= {WORD_MAX}",
        holds=lambda vals: in_word(result(vals)),
        domain=lambda args, tag: sym_in_word(sym_result(args)),
        overflow=True,
    )


_WORD2 = (OperandSpec(WORD_SRC, True), OperandSpec(WORD_DST))
_WORD3 = (OperandSpec(WORD_SRC, True), OperandSpec(WORD_SRC, True), OperandSpec(WORD_DST))


def _arith(name, fn, sym_fn, arity, summary):
    def compute(vals, wrap):
        r = fn(vals)
        return wrap16(r) if wrap else r

    def sym_compute(args, tag, wrap):
        r = sym_fn(args)
        return sym_wrap16(r) if wrap else r

    sig = (OperandSpec(WORD_DST),) if arity == 1 else _WORD3
    check = _overflow(name, fn, sym_fn)
    if arity == 1:
        check = Check(check.reason, "src < 32767" if name == "INC" else "src > -32768",
                      check.holds, check.domain, True)
    return Instruction(name, sig, "call", (check,), compute, sym_compute,
                       reads_dst=arity == 1, summary=summary)


def _div_compute(vals, wrap):
    q = trunc_div(vals[0], vals[1])
    return wrap16(q) if wrap else q


def _div_sym(args, tag, wrap):
    a, b = args
    # truncating division expressed with Euclidean SMT div
    q = S.ite(S.rel(">=", a, S.num(0)), S.div(a, b), S.neg(S.div(S.neg(a), b)))
    return sym_wrap16(q) if wrap else q


_DIV_CHECKS = (
    Check("DIV: division by zero", "src2 <> 0",
          lambda vals: vals[1] != 0,
          lambda args, tag: S.rel("<>", args[1], S.num(0))),
    Check("DIV: overflow", "not (src1 = -32768 and src2 = -1)",
          lambda vals: not (vals[0] == WORD_MIN and vals[1] == -1),
          lambda args, tag: S.not_(S.and_(S.rel("=", args[0], S.num(WORD_MIN)),
                                          S.rel("=", args[1], S.num(-1))))),
)


def _coil(name, fn, sym_fn, summary):
    return Instruction(name, (OperandSpec(BIT_DST),), "coil", (), fn, sym_fn, summary=summary)


def _compare(rel):
    return Instruction(rel, (OperandSpec(WORD_SRC, True), OperandSpec(WORD_SRC, True)), "compare",
                       summary=f"contact closed when src1 {rel} src2")


_REGISTRY: dict[str, Instruction] = {}


def _register(ins: Instruction) -> None:
    if ins.name in _REGISTRY:
        raise ValueError(f"duplicate instruction {ins.name}")
    _REGISTRY[ins.name] = ins


_register(Instruction("MOV", _WORD2, "call", (),
                      lambda vals, wrap: vals[0], lambda args, tag, wrap: args[0],
                      summary="dst := src"))
_register(_arith("INC", lambda v: v[0] + 1, lambda a: S.add(a[0], S.num(1)), 1, "dst := dst + 1"))
_register(_arith("DEC", lambda v: v[0] - 1, lambda a: S.sub(a[0], S.num(1)), 1, "dst := dst - 1"))
_register(_arith("ADD", lambda v: v[0] + v[1], lambda a: S.add(a[0], a[1]), 2, "dst := src1 + src2"))
_register(_arith("SUB", lambda v: v[0] - v[1], lambda a: S.sub(a[0], a[1]), 2, "dst := src1 - src2"))
_register(_arith("MUL", lambda v: v[0] * v[1], lambda a: S.mul(a[0], a[1]), 2, "dst := src1 * src2"))
_register(Instruction("DIV", _WORD3, "call", _DIV_CHECKS,
                      _div_compute, _div_sym, summary="dst := src1 / src2 (truncating)"))
_register(Instruction(
    "BCD", _WORD2, "call",
    (Check("BCD: out of [0...9999] range call", "0 <= src <= 9999", _bcd_holds, _bcd_domain),),
    lambda vals, wrap: to_signed16(bcd_compute(vals[0])),
    lambda args, tag, wrap: sym_to_signed(sym_bcd_compute(args[0], tag)),
    summary="dst := BCD encoding of src"))
_register(Instruction(
    "BIN", _WORD2, "call",
    (Check("BIN: nibble out of [0...9] range call", "every nibble of src <= 9", _bin_holds, _bin_domain),),
    lambda vals, wrap: bin_compute(vals[0] & 0xFFFF),
    _bin_sym,
    summary="dst := decimal value of BCD src"))
_register(_coil("OUT", lambda wire, prev: wire, lambda acc, prev: acc, "dst := wire"))
_register(_coil("SET", lambda wire, prev: prev or wire, lambda acc, prev: S.or_(prev, acc),
                "dst := dst or wire"))
_register(_coil("RST", lambda wire, prev: prev and not wire, lambda acc, prev: S.and_(prev, S.not_(acc)),
                "dst := dst and not wire"))
for _rel in ("=", "<", ">", "<=", ">=", "<>"):
    _register(_compare(_rel))

CALL_NAMES = tuple(n for n, i in _REGISTRY.items() if i.kind == "call")
COIL_NAMES = ("OUT", "SET", "RST")


def lookup(name: str) -> Instruction:
    try:
        return _REGISTRY[name.upper()]
    except KeyError:
        raise UnknownInstruction(name) from None


def registry() -> Mapping[str, Instruction]:
    return dict(_REGISTRY)


CONCRETE_RELATIONS: dict[str, Callable[[int, int], bool]] = {
    "=": lambda a, b: a == b,
    "<>": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


# --- signature checking -------------------------------------------------------------

def instruction_for(step: Step) -> Instruction:
    if step.op is StepOp.CALL:
        return lookup(step.name or "")
    if step.op.is_compare:
        return lookup(step.rel or "")
    if step.op in (StepOp.OUT, StepOp.SET, StepOp.RST):
        return lookup(step.op.value)
    raise UnknownInstruction(step.op.value)


def _operand_problem(spec: OperandSpec, operand) -> str | None:
    if isinstance(operand, Const):
        if spec.accepts_const:
            return None
        return f"{operand} is a constant but a device is required"
    if spec.role in (WORD_SRC, WORD_DST):
        if operand.kind is not DeviceKind.D:
            return f"{operand} is a bit device but a word device is required"
    elif spec.role == BIT_DST:
        if operand.kind not in (DeviceKind.Y, DeviceKind.M):
            return f"{operand} cannot be written; a Y or M device is required"
    elif spec.role == BIT_SRC:
        if not operand.is_bit:
            return f"{operand} is a word device but a bit device is required"
    return None


_CONTACT_SIG = (OperandSpec(BIT_SRC),)


def signature_problems(step: Step) -> list[tuple[str, str]]:
    """Return ``(kind, message)`` pairs for arity or sort problems of a step."""
    if step.op in (StepOp.ANB, StepOp.ORB):
        sig = ()
    elif step.op in (StepOp.LD, StepOp.LDI, StepOp.AND, StepOp.ANI, StepOp.OR, StepOp.ORI):
        sig = _CONTACT_SIG
    else:
        try:
            sig = instruction_for(step).signature
        except UnknownInstruction:
            return [("UnknownMnemonic", f"unknown instruction {step.mnemonic!r}")]
    if len(step.operands) != len(sig):
        return [("ArityMismatch",
                 f"{step.mnemonic or step.op.value} takes {len(sig)} operand(s), got {len(step.operands)}")]
    problems = []
    for spec, operand in zip(sig, step.operands):
        msg = _operand_problem(spec, operand)
        if msg:
            problems.append(("SortMismatch", msg))
    return problems


# --- concrete evaluation --------------------------------------------------------------

def read_operand(operand, state: Mapping[Device, object]):
    if isinstance(operand, Const):
        return operand.value
    return state[operand]


def source_operands(ins: Instruction, step: Step) -> tuple:
    """Operands whose values feed the computation (destination included for INC/DEC)."""
    if ins.reads_dst:
        return step.operands
    return step.operands[:-1]


def concrete_eval(step: Step, wire: bool, state: Mapping[Device, object], *, wrap: bool = False) -> dict:
    """Execute a call or coil step on a concrete device valuation.

    Returns a new valuation. Raises :class:`InstructionFault` when the wire is
    active and a precondition's domain condition is false.
    """
    ins = instruction_for(step)
    new = dict(state)
    dst = step.operands[-1]
    if ins.kind == "coil":
        new[dst] = bool(ins.compute(wire, state[dst]))
        return new
    if ins.kind != "call":
        raise ValueError(f"{step} is not an executable instruction")
    if not wire:
        return new
    srcs = source_operands(ins, step)
    vals = [read_operand(o, state) for o in srcs]
    for check in ins.active_checks(wrap):
        if not check.holds(vals):
            offending = [(str(o), v) for o, v in zip(srcs, vals)]
            raise InstructionFault(check.reason, step.location, offending)
    new[dst] = ins.compute(vals, wrap)
    return new
