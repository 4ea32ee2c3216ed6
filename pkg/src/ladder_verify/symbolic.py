"""Symbolic expressions over integers and booleans.

Terms are immutable trees. Smart constructors fold boolean constants so the
formulas handed to the solver stay small. :func:`evaluate` follows SMT-LIB
integer semantics (``div``/``mod`` are Euclidean), which is what lets the
test suite compare the evaluator against the solver term for term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

INT = "Int"
BOOL = "Bool"

_BOOL_OPS = {"not", "and", "or", "=>", "=", "distinct", "<", "<=", ">", ">="}
_INT_OPS = {"+", "-", "*", "div", "mod", "neg"}
RELATIONS = {"=": "=", "<>": "distinct", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


@dataclass(frozen=True)
class Term:
    op: str
    args: tuple[Term, ...] = ()
    value: object = None
    sort: str = BOOL

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Binding:
    name: str
    term: Term


TRUE = Term("bool", value=True)
FALSE = Term("bool", value=False)


def var(name: str, sort: str) -> Term:
    return Term("var", value=name, sort=sort)


def num(n: int) -> Term:
    return Term("int", value=int(n), sort=INT)


def boolean(b: bool) -> Term:
    return TRUE if b else FALSE


def is_const(t: Term) -> bool:
    return t.op in ("int", "bool")


def not_(a: Term) -> Term:
    if a.op == "bool":
        return boolean(not a.value)
    if a.op == "not":
        return a.args[0]
    return Term("not", (a,))


def _assoc(op: str, unit: Term, zero: Term, xs) -> Term:
    flat = []
    for x in xs:
        if x == zero:
            return zero
        if x == unit:
            continue
        flat.extend(x.args if x.op == op else (x,))
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return Term(op, tuple(flat))


def and_(*xs: Term) -> Term:
    return _assoc("and", TRUE, FALSE, xs)


def or_(*xs: Term) -> Term:
    return _assoc("or", FALSE, TRUE, xs)


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return Term("=>", (a, b))


def ite(c: Term, a: Term, b: Term) -> Term:
    if c == TRUE:
        return a
    if c == FALSE:
        return b
    if a == b:
        return a
    return Term("ite", (c, a, b), sort=a.sort)


def rel(op: str, a: Term, b: Term) -> Term:
    """Relational atom; ``op`` is one of the ladder relations or an SMT name."""
    smt_op = RELATIONS.get(op, op)
    if is_const(a) and is_const(b):
        return boolean(_apply(smt_op, [a.value, b.value]))
    return Term(smt_op, (a, b))


def _arith(op: str, *xs: Term) -> Term:
    if all(is_const(x) for x in xs):
        return num(_apply(op, [x.value for x in xs]))
    return Term(op, tuple(xs), sort=INT)


def add(a: Term, b: Term) -> Term:
    return _arith("+", a, b)


def sub(a: Term, b: Term) -> Term:
    return _arith("-", a, b)


def mul(a: Term, b: Term) -> Term:
    return _arith("*", a, b)


def div(a: Term, b: Term) -> Term:
    return _arith("div", a, b)


def mod(a: Term, b: Term) -> Term:
    return _arith("mod", a, b)


def neg(a: Term) -> Term:
    return _arith("neg", a)


def let(bindings, body: Term) -> Term:
    """Sequential let: each binding may refer to the ones before it."""
    bindings = tuple(bindings)
    if not bindings:
        return body
    return Term("let", (body,), value=bindings, sort=body.sort)


def smt_div(a: int, b: int) -> int:
    """SMT-LIB integer division: remainder is always non-negative."""
    if b == 0:
        return 0  # unspecified in SMT-LIB; any fixed choice is sound here
    q = a // b if b > 0 else -(a // -b)
    return q


def smt_mod(a: int, b: int) -> int:
    if b == 0:
        return a
    return a - b * smt_div(a, b)


def _apply(op: str, vals):
    if op == "not":
        return not vals[0]
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "=":
        return vals[0] == vals[1]
    if op == "distinct":
        return vals[0] != vals[1]
    if op == "<":
        return vals[0] < vals[1]
    if op == "<=":
        return vals[0] <= vals[1]
    if op == ">":
        return vals[0] > vals[1]
    if op == ">=":
        return vals[0] >= vals[1]
    if op == "+":
        return sum(vals)
    if op == "-":
        return vals[0] - vals[1]
    if op == "*":
        return vals[0] * vals[1]
    if op == "div":
        return smt_div(vals[0], vals[1])
    if op == "mod":
        return smt_mod(vals[0], vals[1])
    if op == "neg":
        return -vals[0]
    raise ValueError(f"unknown operator {op!r}")


def evaluate(t: Term, env: Mapping[str, object]):
    """Evaluate a term under an assignment of its free variables."""
    if t.op == "int" or t.op == "bool":
        return t.value
    if t.op == "var":
        return env[t.value]
    if t.op == "let":
        scope = dict(env)
        for b in t.value:
            scope[b.name] = evaluate(b.term, scope)
        return evaluate(t.args[0], scope)
    if t.op == "ite":
        c, a, b = t.args
        return evaluate(a, env) if evaluate(c, env) else evaluate(b, env)
    if t.op == "and":
        return all(evaluate(x, env) for x in t.args)
    if t.op == "or":
        return any(evaluate(x, env) for x in t.args)
    return _apply(t.op, [evaluate(x, env) for x in t.args])


def free_vars(t: Term) -> dict[str, str]:
    """Map of free variable name to sort, in first-occurrence order."""
    out: dict[str, str] = {}
    _collect(t, frozenset(), out)
    return out


def _collect(t: Term, bound: frozenset, out: dict) -> None:
    if t.op == "var":
        if t.value not in bound:
            out.setdefault(t.value, t.sort)
        return
    if t.op == "let":
        for b in t.value:
            _collect(b.term, bound, out)
            bound = bound | {b.name}
    for a in t.args:
        _collect(a, bound, out)


def operators(t: Term) -> set[str]:
    found = set()
    stack = [t]
    while stack:
        x = stack.pop()
        found.add(x.op)
        stack.extend(x.args)
        if x.op == "let":
            stack.extend(b.term for b in x.value)
    return found


def is_nonlinear(t: Term) -> bool:
    """True when the term multiplies two non-constants or divides by a non-constant."""
    stack = [t]
    while stack:
        x = stack.pop()
        if x.op == "*" and not any(is_const(a) for a in x.args):
            return True
        if x.op in ("div", "mod") and not is_const(x.args[1]):
            return True
        stack.extend(x.args)
        if x.op == "let":
            stack.extend(b.term for b in x.value)
    return False


def smt_int(n: int) -> str:
    return f"(- {-n})" if n < 0 else str(n)


def to_smt(t: Term) -> str:
    """SMT-LIB2 rendering of a term."""
    if t.op == "int":
        return smt_int(t.value)
    if t.op == "bool":
        return "true" if t.value else "false"
    if t.op == "var":
        return t.value
    if t.op == "let":
        body = to_smt(t.args[0])
        for b in reversed(t.value):
            body = f"(let (({b.name} {to_smt(b.term)})) {body})"
        return body
    op = "-" if t.op == "neg" else t.op
    if t.op not in _BOOL_OPS | _INT_OPS | {"ite"}:
        raise UnsupportedTerm(t.op)
    return f"({op} {' '.join(to_smt(a) for a in t.args)})"


class UnsupportedTerm(ValueError):
    """A term operator without an SMT-LIB mapping."""


_INFIX = {"and": " & ", "or": " | ", "=>": " -> ", "=": " = ", "distinct": " <> ",
          "<": " < ", "<=": " <= ", ">": " > ", ">=": " >= ",
          "+": " + ", "-": " - ", "*": " * ", "div": " div ", "mod": " mod "}


def pretty(t: Term) -> str:
    """Human-readable infix rendering used by ``--dump-vcs``."""
    if t.op == "int":
        return str(t.value)
    if t.op == "bool":
        return "true" if t.value else "false"
    if t.op == "var":
        return t.value
    if t.op == "not":
        return f"!{pretty(t.args[0])}"
    if t.op == "neg":
        return f"-{pretty(t.args[0])}"
    if t.op == "ite":
        c, a, b = (pretty(x) for x in t.args)
        return f"(if {c} then {a} else {b})"
    if t.op == "let":
        lines = [f"let {b.name} = {pretty(b.term)} in" for b in t.value]
        return "\n".join(lines + [pretty(t.args[0])])
    return "(" + _INFIX[t.op].join(pretty(a) for a in t.args) + ")"
