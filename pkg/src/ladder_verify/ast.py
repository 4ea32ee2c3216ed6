"""Program representation: devices, operands, IL steps and rungs.

All values here are immutable once built, so they can be shared freely
between the symbolic executor, the simulator and the renderers.
"""

from __future__ import annotations

import enum
import re
from functools import cached_property
from dataclasses import dataclass, field
from typing import Union

WORD_MIN = -32768
WORD_MAX = 32767
WORD_MOD = 1 << 16

DEFAULT_ADDRESS_BOUND = 1024


def check_word(value: int) -> int:
    """Return ``value`` unchanged if it fits a signed 16-bit word, else raise."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"word value must be an int, got {value!r}")
    if not WORD_MIN <= value <= WORD_MAX:
        raise ValueError(f"{value} is outside the 16-bit word range [{WORD_MIN}, {WORD_MAX}]")
    return value


def wrap16(value: int) -> int:
    """Reduce an arbitrary integer into [-32768, 32767] modulo 2**16."""
    return (value - WORD_MIN) % WORD_MOD + WORD_MIN


def wrap_add(a: int, b: int) -> int:
    """Two's-complement 16-bit addition."""
    return wrap16(check_word(a) + check_word(b))


def to_unsigned16(value: int) -> int:
    """Bit pattern of a signed word as an integer in [0, 65535]."""
    return check_word(value) & 0xFFFF


def to_signed16(pattern: int) -> int:
    """Inverse of :func:`to_unsigned16`."""
    if not 0 <= pattern < WORD_MOD:
        raise ValueError(f"{pattern} is not a 16-bit pattern")
    return pattern - WORD_MOD if pattern > WORD_MAX else pattern


class DeviceKind(enum.Enum):
    X = "X"  # input bit
    Y = "Y"  # output bit
    M = "M"  # internal relay bit
    D = "D"  # data register word

    __hash__ = object.__hash__  # members are singletons

    @property
    def is_bit(self) -> bool:
        return self is not DeviceKind.D


_KIND_ORDER = {kind: i for i, kind in enumerate(DeviceKind)}
_DEVICE_RE = re.compile(r"([XYMD])([0-9]+)", re.IGNORECASE | re.ASCII)


@dataclass(frozen=True)
class Device:
    kind: DeviceKind
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative device index {self.index}")
        object.__setattr__(self, "_hash", hash((self.kind.value, self.index)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def parse(cls, text: str) -> Device:
        m = _DEVICE_RE.fullmatch(text.strip())
        if not m:
            raise ValueError(f"not a device name: {text!r}")
        return cls(DeviceKind(m.group(1).upper()), int(m.group(2)))

    @property
    def is_bit(self) -> bool:
        return self.kind.is_bit

    def sort_key(self) -> tuple[int, int]:
        return (_KIND_ORDER[self.kind], self.index)

    def __str__(self) -> str:
        return f"{self.kind.value}{self.index}"


@dataclass(frozen=True)
class Const:
    value: int

    def __post_init__(self):
        check_word(self.value)

    def __str__(self) -> str:
        return f"K{self.value}"


Operand = Union[Device, Const]


class StepOp(enum.Enum):
    LD = "LD"
    LDI = "LDI"
    AND = "AND"
    ANI = "ANI"
    OR = "OR"
    ORI = "ORI"
    ANB = "ANB"
    ORB = "ORB"
    LD_CMP = "LD_CMP"
    AND_CMP = "AND_CMP"
    OR_CMP = "OR_CMP"
    OUT = "OUT"
    SET = "SET"
    RST = "RST"
    CALL = "CALL"

    __hash__ = object.__hash__

    @property
    def is_load(self) -> bool:
        return self in (StepOp.LD, StepOp.LDI, StepOp.LD_CMP)

    @property
    def is_logic(self) -> bool:
        return self not in _ACTIONS

    @property
    def is_action(self) -> bool:
        return self in _ACTIONS

    @property
    def is_compare(self) -> bool:
        return self in (StepOp.LD_CMP, StepOp.AND_CMP, StepOp.OR_CMP)


_ACTIONS = frozenset({StepOp.OUT, StepOp.SET, StepOp.RST, StepOp.CALL})
_CMP_PREFIX = {StepOp.LD_CMP: "LD", StepOp.AND_CMP: "AND", StepOp.OR_CMP: "OR"}

RELATIONS = ("=", "<>", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Location:
    """Where a step lives: 1-based rung number, step number and source line."""

    rung: int
    step: int
    line: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return f"rung {self.rung}, step {self.step}, line {self.line}"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    raw_text: str


@dataclass(frozen=True)
class Step:
    op: StepOp
    operands: tuple[Operand, ...] = ()
    location: Location = Location(0, 0)
    rel: str | None = None
    name: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def mnemonic(self) -> str:
        """The instruction name used for registry lookup."""
        if self.op is StepOp.CALL:
            return self.name or ""
        if self.op.is_compare:
            return self.rel or ""
        return self.op.value

    @cached_property
    def text(self) -> str:
        return str(self)

    def __str__(self) -> str:
        if self.op is StepOp.CALL:
            head = self.name
        elif self.op.is_compare:
            head = _CMP_PREFIX[self.op] + (self.rel or "")
        else:
            head = self.op.value
        return " ".join([head, *(str(o) for o in self.operands)])


def rung_ranges(steps) -> tuple[range, ...]:
    """Group a flat step list into rungs.

    A rung starts at the first step and at every load step that follows an
    action step (the accumulator is considered consumed at that point).
    """
    starts = []
    prev_action = True
    for i, step in enumerate(steps):
        if step.op.is_load and prev_action:
            starts.append(i)
        elif i == 0:
            starts.append(0)
        prev_action = step.op.is_action
    bounds = starts + [len(steps)]
    return tuple(range(a, b) for a, b in zip(bounds, bounds[1:]))


@dataclass(frozen=True)
class Program:
    steps: tuple[Step, ...]
    rungs: tuple[range, ...]
    devices_used: frozenset[Device]
    address_bound: int = DEFAULT_ADDRESS_BOUND

    @classmethod
    def from_steps(cls, steps, *, address_bound: int = DEFAULT_ADDRESS_BOUND) -> Program:
        """Build a program, numbering steps and rungs.

        Raises ValueError when a step's operands do not match the instruction
        signature or a device index is out of bounds.
        """
        from ladder_verify.instructions import signature_problems

        steps = list(steps)
        rungs = rung_ranges(steps)
        numbered = []
        for r, rng in enumerate(rungs, start=1):
            for i in rng:
                step = steps[i]
                problem = signature_problems(step)
                if problem:
                    raise ValueError(f"step {i + 1} ({step}): {problem[0][1]}")
                for o in step.operands:
                    if isinstance(o, Device) and o.index >= address_bound:
                        raise ValueError(f"step {i + 1}: device {o} beyond address bound {address_bound}")
                line = step.location.line or (step.span.line if step.span else i + 1)
                loc = Location(r, i + 1, line)
                numbered.append(Step(step.op, tuple(step.operands), loc, step.rel, step.name, step.span))
        devices = frozenset(o for s in numbered for o in s.operands if isinstance(o, Device))
        return cls(tuple(numbered), rungs, devices, address_bound)

    def to_text(self) -> str:
        return "".join(f"{s}\n" for s in self.steps)

    def rung_of(self, step_index: int) -> int:
        for r, rng in enumerate(self.rungs, start=1):
            if step_index in rng:
                return r
        raise IndexError(step_index)

    def sorted_devices(self) -> list[Device]:
        return sorted(self.devices_used, key=Device.sort_key)


def step_count(p: Program) -> int:
    return len(p.steps)
