"""Textual IL front end.

One step per line, ``;`` starts a comment. Mnemonics are case-insensitive.
The grammar is documented in ``docs/format.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ladder_verify.ast import (
    DEFAULT_ADDRESS_BOUND, WORD_MAX, WORD_MIN, Const, Device, DeviceKind, Location,
    Program, SourceSpan, Step, StepOp,
)
from ladder_verify.instructions import CALL_NAMES, signature_problems

ERROR_KINDS = (
    "UnknownMnemonic", "BadOperand", "ArityMismatch", "SortMismatch",
    "StackImbalance", "IndexOutOfRange", "ConstantOutOfRange",
)

_SIMPLE = {op.value: op for op in (
    StepOp.LD, StepOp.LDI, StepOp.AND, StepOp.ANI, StepOp.OR, StepOp.ORI,
    StepOp.ANB, StepOp.ORB, StepOp.OUT, StepOp.SET, StepOp.RST,
)}
_CMP_OPS = {"LD": StepOp.LD_CMP, "AND": StepOp.AND_CMP, "OR": StepOp.OR_CMP}
_CMP_RE = re.compile(r"(LD|AND|OR)(<>|<=|>=|=|<|>)", re.ASCII)
_DEVICE_RE = re.compile(r"([XYMD])([0-9]+)", re.IGNORECASE | re.ASCII)
_CONST_RE = re.compile(r"K([+-]?[0-9]+)", re.IGNORECASE | re.ASCII)


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    kind: str
    message: str

    def __str__(self) -> str:
        return f"line {self.span.line}, column {self.span.column}: {self.kind}: {self.message}"


class LadderSyntaxError(ValueError):
    """Raised by :func:`parse_program`; ``errors`` holds every problem found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


def _parse_operand(token: str, bound: int):
    """Return ``(operand, None)`` or ``(None, (kind, message))``."""
    m = _DEVICE_RE.fullmatch(token)
    if m:
        index = int(m.group(2))
        if index >= bound:
            return None, ("IndexOutOfRange", f"device {token!r} index {index} is not below {bound}")
        return Device(DeviceKind(m.group(1).upper()), index), None
    m = _CONST_RE.fullmatch(token)
    if m:
        value = int(m.group(1))
        if not WORD_MIN <= value <= WORD_MAX:
            return None, ("ConstantOutOfRange", f"constant {token!r} outside [{WORD_MIN}, {WORD_MAX}]")
        return Const(value), None
    return None, ("BadOperand", f"bad operand {token!r}")


def _parse_head(token: str):
    head = token.upper()
    if head in _SIMPLE:
        return _SIMPLE[head], None, None
    m = _CMP_RE.fullmatch(head)
    if m:
        return _CMP_OPS[m.group(1)], m.group(2), None
    if head in CALL_NAMES:
        return StepOp.CALL, None, head
    return None, None, None


def _strip_comment(line: str) -> str:
    cut = line.find(";")
    return line if cut < 0 else line[:cut]


def parse_steps(text, *, address_bound: int = DEFAULT_ADDRESS_BOUND):
    """Parse lines into unnumbered steps. Returns ``(steps, errors)``."""
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    steps: list[Step] = []
    errors: list[ParseError] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        body = _strip_comment(line.rstrip("\r"))
        content = body.strip()
        if not content:
            continue
        column = body.index(content) + 1
        span = SourceSpan(lineno, column, content)
        tokens = content.split()
        op, rel, name = _parse_head(tokens[0])
        if op is None:
            errors.append(ParseError(span, "UnknownMnemonic", f"unknown mnemonic {tokens[0]!r}"))
            continue
        operands = []
        bad = False
        for tok in tokens[1:]:
            operand, problem = _parse_operand(tok, address_bound)
            if problem:
                errors.append(ParseError(span, *problem))
                bad = True
            else:
                operands.append(operand)
        if bad:
            continue
        step = Step(op, tuple(operands), Location(0, 0, lineno), rel, name, span)
        problems = signature_problems(step)
        if problems:
            errors.extend(ParseError(span, kind, f"{msg} in {content!r}") for kind, msg in problems)
            continue
        steps.append(step)
    return steps, errors


def validate(p: Program) -> list[ParseError]:
    """Check accumulator-stack balance, signatures and index bounds. Empty list means ok."""
    errors: list[ParseError] = []

    def err(step, kind, msg):
        span = step.span or SourceSpan(step.location.line, 1, str(step))
        errors.append(ParseError(span, kind, f"{msg} in {span.raw_text!r}"))

    for rng in p.rungs:
        depth = 0
        for i in rng:
            step = p.steps[i]
            for kind, msg in signature_problems(step):
                err(step, kind, msg)
            for o in step.operands:
                if isinstance(o, Device) and o.index >= p.address_bound:
                    err(step, "IndexOutOfRange", f"device {o} index is not below {p.address_bound}")
            op = step.op
            if op.is_load:
                depth += 1
            elif op in (StepOp.ANB, StepOp.ORB):
                if depth < 2:
                    err(step, "StackImbalance", f"{op.value} needs two stacked blocks, found {depth}")
                    depth = max(depth, 2)
                depth -= 1
            elif op.is_logic:
                if depth < 1:
                    err(step, "StackImbalance", f"{step.mnemonic or op.value} has no current accumulator")
                    depth = 1
            else:
                if depth != 1:
                    err(step, "StackImbalance", f"{step} executes with {depth} accumulator entries, expected 1")
                    depth = 1
        if rng and depth != 1:
            last = p.steps[rng[-1]]
            err(last, "StackImbalance", f"rung ends with {depth} accumulator entries, expected 1")
    return errors


def parse_program(text, *, address_bound: int = DEFAULT_ADDRESS_BOUND) -> Program:
    """Parse and validate a ladder IL source text.

    Raises :class:`LadderSyntaxError` carrying every diagnostic found.
    """
    steps, errors = parse_steps(text, address_bound=address_bound)
    if errors:
        raise LadderSyntaxError(errors)
    program = Program.from_steps(steps, address_bound=address_bound)
    errors = validate(program)
    if errors:
        raise LadderSyntaxError(errors)
    return program


def pretty_print(p: Program) -> str:
    return p.to_text()
