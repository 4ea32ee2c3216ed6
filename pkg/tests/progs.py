"""Program sources shared by the test modules: samples, generators, corpus."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from ladder_verify.ast import Device
from ladder_verify.oracle import BOUNDARY_WORDS, DomainSpec

ROOT = Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"

FIG1 = "LD X1\nINC D0\nBCD D0 D1\n"

# Constants the generator likes: every one sits next to a precondition edge.
EDGE_CONSTS = (-32768, -32767, -2, -1, 0, 1, 2, 9, 10, 100, 9998, 9999, 10000, 32766, 32767)


def sample_text(name: str) -> str:
    return (SAMPLES / name).read_text()


def sample_names() -> list[str]:
    return sorted(p.name for p in SAMPLES.glob("*.lad"))


def _const(rng: random.Random) -> int:
    if rng.random() < 0.8:
        return rng.choice(EDGE_CONSTS)
    return rng.randint(-32768, 32767)


def _contact(rng: random.Random, bits: list[str], head: str) -> str:
    """One contact line; ``head`` is LD, AND or OR."""
    if rng.random() < 0.3:
        rel = rng.choice(["=", "<>", "<", ">", "<=", ">="])
        return f"{head}{rel} D0 K{_const(rng)}"
    neg = {"LD": "LDI", "AND": "ANI", "OR": "ORI"}[head]
    return f"{rng.choice([head, neg])} {rng.choice(bits)}"


def _expression(rng: random.Random, bits: list[str]) -> list[str]:
    lines = [_contact(rng, bits, "LD")]
    for _ in range(rng.randint(0, 2)):
        lines.append(_contact(rng, bits, rng.choice(["AND", "OR"])))
    if rng.random() < 0.25:
        lines.append(_contact(rng, bits, "LD"))
        if rng.random() < 0.5:
            lines.append(_contact(rng, bits, rng.choice(["AND", "OR"])))
        lines.append(rng.choice(["ANB", "ORB"]))
    return lines


def _action(rng: random.Random, outputs: list[str]) -> str:
    c = _const(rng)
    return rng.choice([
        f"OUT {rng.choice(outputs)}",
        f"SET {rng.choice(outputs)}",
        f"RST {rng.choice(outputs)}",
        f"MOV K{c} D0",
        "INC D0",
        "DEC D0",
        f"ADD D0 K{c} D0",
        f"SUB D0 K{c} D0",
        f"MUL D0 K{rng.choice([-1, 2, 3, 10, 100])} D0",
        f"DIV D0 K{rng.choice([-1, 0, 2, 7])} D0",
        f"DIV K{c} D0 D0",
        "BCD D0 D0",
        "BIN D0 D0",
    ])


def random_program(seed: int, *, max_rungs: int = 5, n_inputs: int = 3) -> str:
    """A random valid program over X0..X(n-1), M0, M1, Y0 and the single word D0.

    At most ``n_inputs + 3`` bit devices are read, so an exhaustive oracle
    with a word subset stays small.
    """
    rng = random.Random(seed)
    inputs = [f"X{i}" for i in range(n_inputs)]
    relays = ["M0", "M1"]
    outputs = relays + ["Y0"]
    readable = inputs + relays + ["Y0"]
    lines: list[str] = []
    for _ in range(rng.randint(1, max_rungs)):
        lines += _expression(rng, readable)
        for _ in range(rng.randint(1, 2)):
            lines.append(_action(rng, outputs))
    return "\n".join(lines) + "\n"


def program_constants(text: str) -> set[int]:
    out = set()
    for token in text.split():
        if token[:1] in "Kk":
            out.add(int(token[1:]))
    return out


def word_subset(text: str, seed: int = 0, extra: int = 24) -> tuple[int, ...]:
    """Boundary values, program constants and their neighbours, plus a few random words."""
    rng = random.Random(seed)
    values = set(BOUNDARY_WORDS)
    for c in program_constants(text):
        values.update(v for v in (c - 1, c, c + 1) if -32768 <= v <= 32767)
    values.update(rng.randint(-32768, 32767) for _ in range(extra))
    return tuple(sorted(values))


@dataclass
class CorpusEntry:
    name: str
    text: str
    wrap: bool = False
    full_range: bool = False
    pinned: dict = field(default_factory=dict)

    def domain(self) -> DomainSpec:
        dom = DomainSpec(pinned={Device.parse(k): v for k, v in self.pinned.items()})
        if not self.full_range:
            dom.words[Device.parse("D0")] = word_subset(self.text)
        return dom


def corpus() -> list[CorpusEntry]:
    """The oracle-equivalence corpus: every sample plus seeded random programs."""
    entries = []
    for name in sample_names():
        full = name in ("fig1.lad", "safe.lad")
        entries.append(CorpusEntry(name, sample_text(name), full_range=full))
    entries.append(CorpusEntry("fig1.lad (wrap)", FIG1, wrap=True, full_range=True))
    for seed in range(24):
        entries.append(CorpusEntry(f"random-{seed}", random_program(seed), wrap=seed % 4 == 3))
    return entries


def scale_program(min_steps: int = 1657) -> str:
    """A desk-size program with exactly three checkable calls (INC, ADD, BCD).

    Most of it is a chain of relay rungs, each feeding the next, so the wires
    of the three calls depend on the whole chain. Padding rungs use MOV and
    comparison contacts, which carry no precondition.
    """
    tail = [
        "LD M{last}", "AND X1", "INC D0",
        "LD M{mid}", "OR X2", "ADD D0 K100 D1",
        "LD M{last}", "BCD D0 D2",
        "LD>= D0 K0", "AND<= D0 K9998", "MOV D0 D3",
    ]
    n_chain = -(-(min_steps - len(tail)) // 3)
    lines = ["LD X0", "OUT M0"]
    for i in range(1, n_chain):
        lines += [f"LD X{i % 64}", f"{'AND' if i % 3 else 'OR'} M{i - 1}", f"OUT M{i}"]
    lines += [t.format(last=n_chain - 1, mid=n_chain // 2) for t in tail]
    return "\n".join(lines) + "\n"
