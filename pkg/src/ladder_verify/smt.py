"""SMT-LIB2 encoding and an external-solver driver.

One solver process is spawned per VC. Scripts are written to the solver's
stdin and the verdict plus model are read back from stdout.
"""

from __future__ import annotations

import logging
import os
import shutil
import signal
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ladder_verify import symbolic as S
from ladder_verify.ast import WORD_MAX, WORD_MIN
from ladder_verify.vcgen import VC

log = logging.getLogger(__name__)

SOLVER_ENV = "LADDER_VERIFY_SOLVER"
DEFAULT_SOLVER = "z3"
DEFAULT_TIMEOUT_MS = 10_000

# arguments that make well-known solvers read SMT-LIB2 from stdin
_STDIN_ARGS = {"z3": ["-in"], "cvc5": ["--lang=smt2"], "cvc4": ["--lang=smt2"], "yices-smt2": []}


class SolverConfigError(RuntimeError):
    """The solver cannot be started (missing executable, bad permissions...)."""


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    executable_path: str = DEFAULT_SOLVER
    extra_args: tuple[str, ...] = ()
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    produce_models: bool = True

    def __post_init__(self):
        if self.timeout_ms < 100:
            raise ValueError(f"timeout_ms must be at least 100, got {self.timeout_ms}")

    def command(self) -> list[str]:
        args = list(self.extra_args)
        if not args:
            base = os.path.basename(self.executable_path)
            base = base[:-4] if base.endswith(".exe") else base
            args = list(_STDIN_ARGS.get(base, []))
        return [self.executable_path, *args]


def resolve_solver(path: str | None = None) -> str:
    """Pick the solver executable from a flag, the environment, or the default."""
    candidate = path or os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER
    found = shutil.which(candidate)
    if found is None:
        raise SolverConfigError(f"SMT solver {candidate!r} not found (set --solver or {SOLVER_ENV})")
    return candidate


@dataclass(frozen=True)
class Sat:
    model: dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str  # "timeout", "solver-reported" or "protocol-error"
    detail: str = ""


Verdict = Sat | Unsat | Unknown


# --- encoding -------------------------------------------------------------------

def logic_for(formula: S.Term) -> str:
    return "QF_NIA" if S.is_nonlinear(formula) else "QF_LIA"


def declarations(variables: dict[str, str]) -> list[str]:
    lines = []
    for name, sort in variables.items():
        lines.append(f"(declare-const {name} {sort})")
        if sort == S.INT:
            lines.append(f"(assert (and (<= {S.smt_int(WORD_MIN)} {name}) (<= {name} {WORD_MAX})))")
    return lines


def _comment(text: str) -> str:
    return "; " + text.replace("\n", " ")


def emit_smtlib(vc: VC, *, pins: dict[str, object] | None = None) -> str:
    """Complete SMT-LIB2 script for one VC.

    ``pins`` adds equality assertions fixing some variables, used by the
    encoding-faithfulness tests.
    """
    formula = vc.closed()
    variables = S.free_vars(formula)
    lines = [
        _comment(f"vc {vc.index}: {vc.instr} at {vc.location}"),
        _comment(f"expl: {vc.reason}"),
        "(set-option :produce-models true)",
        f"(set-logic {logic_for(formula)})",
        *declarations(variables),
    ]
    for name, value in (pins or {}).items():
        lit = ("true" if value else "false") if isinstance(value, bool) else S.smt_int(value)
        lines.append(f"(assert (= {name} {lit}))")
    lines += [f"(assert {S.to_smt(formula)})", "(check-sat)", "(get-model)", ""]
    return "\n".join(lines)


# --- output parsing -----------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            tokens.append(text[i:j + 1])
            i = j + 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ProtocolError("unterminated quoted symbol")
            tokens.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();"':
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_sexprs(text: str) -> list:
    """Parse a sequence of S-expressions into nested lists of atom strings."""
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ProtocolError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ProtocolError("unbalanced '('")
    return stack[0]


def _value(sexpr):
    if isinstance(sexpr, str):
        if sexpr == "true":
            return True
        if sexpr == "false":
            return False
        try:
            return int(sexpr)
        except ValueError:
            raise ProtocolError(f"unsupported model value {sexpr!r}") from None
    if len(sexpr) == 2 and sexpr[0] == "-":
        v = _value(sexpr[1])
        if isinstance(v, bool):
            raise ProtocolError(f"cannot negate {sexpr!r}")
        return -v
    raise ProtocolError(f"unsupported model value {sexpr!r}")


def _symbol(s: str) -> str:
    return s[1:-1] if s.startswith("|") and s.endswith("|") else s


def parse_model(text: str) -> dict[str, object]:
    """Parse a ``(get-model)`` response (with or without a leading ``model`` atom)."""
    exprs = parse_sexprs(text)
    if len(exprs) != 1 or not isinstance(exprs[0], list):
        raise ProtocolError("expected a single model S-expression")
    entries = exprs[0]
    if entries and entries[0] == "model":
        entries = entries[1:]
    model: dict[str, object] = {}
    for entry in entries:
        if not isinstance(entry, list) or len(entry) != 5 or entry[0] != "define-fun":
            raise ProtocolError(f"unexpected model entry {entry!r}")
        _, name, params, _sort, value = entry
        if params:
            continue  # function definitions (e.g. div0) are not initial values
        model[_symbol(name)] = _value(value)
    return model


def print_model(model: dict[str, object]) -> str:
    lines = ["("]
    for name, value in model.items():
        if isinstance(value, bool):
            lines.append(f"  (define-fun {name} () Bool {'true' if value else 'false'})")
        else:
            lines.append(f"  (define-fun {name} () Int {S.smt_int(value)})")
    lines.append(")")
    return "\n".join(lines)


def parse_response(stdout: str) -> Verdict:
    text = stdout.strip()
    head, _, rest = text.partition("\n")
    head = head.strip()
    if head == "unsat":
        return Unsat()
    if head == "unknown":
        return Unknown("solver-reported", rest.strip())
    if head != "sat":
        return Unknown("protocol-error", text[:200])
    try:
        return Sat(parse_model(rest))
    except ProtocolError as e:
        return Unknown("protocol-error", str(e))


# --- process driver ---------------------------------------------------------------

def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def run_script(script: str, cfg: SolverConfig) -> Verdict:
    cmd = cfg.command()
    try:
        proc = subprocess.Popen(cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True, start_new_session=True)
    except OSError as e:
        raise SolverConfigError(f"cannot start solver {cmd[0]!r}: {e}") from e
    try:
        out, err = proc.communicate(script, timeout=cfg.timeout_ms / 1000)
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        proc.communicate()
        return Unknown("timeout", f"no answer within {cfg.timeout_ms} ms")
    except BrokenPipeError:
        out, err = proc.communicate()
    finally:
        if proc.poll() is None:
            _kill_group(proc)
            proc.wait()
    if not out.strip() and err.strip():
        log.debug("solver stderr: %s", err.strip())
    return parse_response(out)


def check(vc: VC, cfg: SolverConfig) -> Verdict:
    log.debug("checking VC %d (%s at %s)", vc.index, vc.instr, vc.location)
    return run_script(emit_smtlib(vc), cfg)


def check_all(vcs, cfg: SolverConfig, jobs: int = 1) -> list[Verdict]:
    """Check VCs, ``jobs`` at a time; results come back in VC order."""
    vcs = list(vcs)
    if jobs <= 1 or len(vcs) <= 1:
        return [check(vc, cfg) for vc in vcs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda vc: check(vc, cfg), vcs))
