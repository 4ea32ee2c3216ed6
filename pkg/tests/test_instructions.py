import pytest
from hypothesis import given, strategies as st

from ladder_verify import symbolic as S
from ladder_verify.ast import WORD_MAX, WORD_MIN, Const, Device, Location, Step, StepOp
from ladder_verify.instructions import (
    CALL_NAMES, InstructionFault, UnknownInstruction, bcd_compute, bin_compute, concrete_eval, lookup,
    registry, trunc_div,
)

D0, D1, D2, X0, Y0, M0 = (Device.parse(n) for n in ("D0", "D1", "D2", "X0", "Y0", "M0"))
words = st.integers(WORD_MIN, WORD_MAX)


def call(name, *operands, step=1):
    return Step(StepOp.CALL, operands, Location(1, step, step), name=name)


@pytest.mark.parametrize("v, pattern", [(0, 0), (1234, 4660), (9999, 39321)])
def test_bcd_examples(v, pattern):
    assert bcd_compute(v) == pattern
    assert bin_compute(pattern) == v


@pytest.mark.parametrize("bad", [-1, 10000, 32767])
def test_bcd_rejects_out_of_domain(bad):
    with pytest.raises(ValueError):
        bcd_compute(bad)


@pytest.mark.parametrize("bad", [0x000A, 0xF000, 0x1A23, -1, 0x10000])
def test_bin_rejects_non_bcd(bad):
    with pytest.raises(ValueError):
        bin_compute(bad)


def test_bcd_digits_match_decimal_digits():
    for v in range(0, 10000, 7):
        pattern = bcd_compute(v)
        assert f"{pattern:04x}" == f"{v:04d}"


def test_lookup_bcd():
    ins = lookup("BCD")
    assert [s.role for s in ins.signature] == ["word_src", "word_dst"]
    assert ins.precondition_text() == "inactive or (0 <= src <= 9999)"
    (check,) = ins.checks
    assert check.reason == "BCD: out of [0...9999] range call"


def test_lookup_inc():
    ins = lookup("inc")
    assert [s.role for s in ins.signature] == ["word_dst"]
    assert ins.precondition_text() == "inactive or (src < 32767)"
    assert [c.reason for c in ins.checks] == ["INC: overflow"]
    assert ins.precondition_text(wrap=True) == "none"


def test_lookup_unknown():
    with pytest.raises(UnknownInstruction):
        lookup("XYZ")


def test_registry_covers_calls_coils_and_comparisons():
    kinds = {ins.kind for ins in registry().values()}
    assert kinds == {"call", "coil", "compare"}
    assert set(CALL_NAMES) == {"MOV", "INC", "DEC", "ADD", "SUB", "MUL", "DIV", "BCD", "BIN"}
    reasons = [c.reason for ins in registry().values() for c in ins.checks]
    assert len(reasons) == len(set(reasons)) and all(reasons)


def test_bcd_active_converts():
    assert concrete_eval(call("BCD", D0, D1), True, {D0: 1234, D1: 0})[D1] == 4660


def test_bcd_inactive_keeps_destination():
    state = {D0: 10000, D1: 7}
    assert concrete_eval(call("BCD", D0, D1), False, state) == state


def test_bcd_active_out_of_range_faults():
    with pytest.raises(InstructionFault) as info:
        concrete_eval(call("BCD", D0, D1, step=3), True, {D0: 10000, D1: 0})
    assert info.value.reason == "BCD: out of [0...9999] range call"
    assert info.value.location.step == 3
    assert info.value.offending == [("D0", 10000)]


def test_bcd_result_is_stored_as_signed_word():
    assert concrete_eval(call("BCD", D0, D1), True, {D0: 9999, D1: 0})[D1] == 39321 - 65536


def test_bin_reads_the_unsigned_pattern():
    assert concrete_eval(call("BIN", D0, D1), True, {D0: 39321 - 65536, D1: 0})[D1] == 9999


@pytest.mark.parametrize("a, b, q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3)])
def test_div_truncates_toward_zero(a, b, q):
    assert trunc_div(a, b) == q
    assert concrete_eval(call("DIV", D0, D1, D2), True, {D0: a, D1: b, D2: 0})[D2] == q


@pytest.mark.parametrize("a, b, reason", [(5, 0, "DIV: division by zero"), (-32768, -1, "DIV: overflow")])
def test_div_faults(a, b, reason):
    for wrap in (False, True):
        with pytest.raises(InstructionFault, match=reason):
            concrete_eval(call("DIV", D0, D1, D2), True, {D0: a, D1: b, D2: 0}, wrap=wrap)


def test_wrap_mode_wraps_instead_of_faulting():
    step = call("INC", D0)
    with pytest.raises(InstructionFault, match="INC: overflow"):
        concrete_eval(step, True, {D0: 32767})
    assert concrete_eval(step, True, {D0: 32767}, wrap=True)[D0] == -32768
    assert concrete_eval(call("MUL", D0, Const(2), D1), True, {D0: 20000, D1: 0}, wrap=True)[D1] == -25536


def test_coils():
    out = Step(StepOp.OUT, (Y0,), Location(1, 2, 2))
    assert concrete_eval(out, True, {Y0: False})[Y0] is True
    assert concrete_eval(out, False, {Y0: True})[Y0] is False
    st_ = Step(StepOp.SET, (M0,), Location(1, 2, 2))
    rs = Step(StepOp.RST, (M0,), Location(1, 2, 2))
    assert concrete_eval(st_, True, {M0: False})[M0] is True
    assert concrete_eval(st_, False, {M0: True})[M0] is True
    assert concrete_eval(rs, True, {M0: True})[M0] is False
    assert concrete_eval(rs, False, {M0: True})[M0] is True


def test_comparison_is_not_executable():
    step = Step(StepOp.LD_CMP, (D0, Const(1)), Location(1, 1, 1), rel="=")
    with pytest.raises(ValueError):
        concrete_eval(step, True, {D0: 1})


def _operands(ins):
    """Distinct D devices for every operand so sources and destination never alias."""
    return tuple(Device.parse(f"D{i}") for i in range(len(ins.signature)))


@pytest.mark.parametrize("name", CALL_NAMES)
@pytest.mark.parametrize("wrap", [False, True])
@given(vals=st.lists(words, min_size=3, max_size=3))
def test_concrete_and_symbolic_contracts_agree(name, wrap, vals):
    """holds/domain and compute/sym_compute describe the same function."""
    ins = lookup(name)
    n_src = len(ins.signature) if ins.reads_dst else len(ins.signature) - 1
    vals = vals[:n_src]
    args = [S.num(v) for v in vals]
    ok = True
    for check in ins.active_checks(wrap):
        holds = check.holds(vals)
        assert S.evaluate(check.domain(args, "t"), {}) is holds
        ok = ok and holds
    if ok:
        assert S.evaluate(ins.sym_compute(args, "t", wrap), {}) == ins.compute(vals, wrap)
        assert WORD_MIN <= ins.compute(vals, wrap) <= WORD_MAX


@pytest.mark.parametrize("name", CALL_NAMES + ("SET", "RST"))
@given(data=st.data())
def test_inactive_wire_changes_nothing(name, data):
    ins = lookup(name)
    operands = _operands(ins) if ins.kind == "call" else (M0,)
    state = {d: (data.draw(st.booleans()) if d.is_bit else data.draw(words)) for d in operands}
    step = call(name, *operands) if ins.kind == "call" else Step(StepOp[name], operands, Location(1, 1, 1))
    assert concrete_eval(step, False, state) == state
    assert concrete_eval(step, False, state, wrap=True) == state


@given(words)
def test_bcd_domain_is_exactly_the_precondition(v):
    ins = lookup("BCD")
    step = call("BCD", D0, D1)
    try:
        concrete_eval(step, True, {D0: v, D1: 0})
    except InstructionFault:
        assert not 0 <= v <= 9999
    else:
        assert 0 <= v <= 9999
    assert ins.checks[0].holds([v]) == (0 <= v <= 9999)
