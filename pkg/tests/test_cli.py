import json
import subprocess
import sys
from pathlib import Path

import pytest
from progs import SAMPLES

from ladder_verify.cli import main, parse_domain
from ladder_verify.ast import Device

FIG1 = str(SAMPLES / "fig1.lad")
SAFE = str(SAMPLES / "safe.lad")
BCD = "BCD: out of [0...9999] range call"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def stub(tmp_path: Path, body: str) -> str:
    path = tmp_path / "stub-solver"
    path.write_text("#!/bin/sh\ncat > /dev/null\n" + body + "\n")
    path.chmod(0o755)
    return str(path)


def test_verify_fig1_first_error(capsys):
    code, out, _ = run(capsys, "verify", FIG1)
    assert code == 1
    assert "[1] ERROR  INC D0" in out and "D0=32767" in out
    assert "[2] NOT CHECKED  BCD D0 D1" in out


def test_verify_fig1_all_renders_bcd_error(capsys):
    code, out, _ = run(capsys, "verify", "--all", FIG1)
    assert code == 1
    assert "[2] ERROR  BCD D0 D1  (rung 1, step 3, line 4)" in out
    assert f"reason: {BCD}" in out
    assert out.endswith("2 runtime errors found (0 proved, 2 errors, 0 inconclusive, 0 not checked)\n")


def test_verify_safe(capsys):
    code, out, _ = run(capsys, "verify", SAFE)
    assert code == 0
    assert out.endswith("no runtime error found: 2/2 conditions proved\n")


def test_verify_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "verify", str(tmp_path / "missing.lad"))
    assert code == 3 and "cannot read" in err


def test_verify_parse_errors_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.lad"
    bad.write_text("LD X0\nFOO D0\nBCD D0\n")
    code, out, err = run(capsys, "verify", str(bad))
    assert code == 3 and out == ""
    assert "bad.lad:line 2, column 1: UnknownMnemonic" in err
    assert "line 3, column 1: ArityMismatch" in err


@pytest.mark.parametrize("argv", [[], ["verify"], ["verify", FIG1, "--jobs", "0"], ["frobnicate"],
                                  ["verify", FIG1, "--format", "pdf"]])
def test_usage_errors_exit_3(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 3


def test_unresolvable_solver_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "verify", FIG1, "--solver", str(tmp_path / "no-such-solver"))
    assert code == 3 and "not found" in err


def test_solver_env_var(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("LADDER_VERIFY_SOLVER", stub(tmp_path, "echo unknown"))
    code, out, _ = run(capsys, "verify", FIG1)
    assert code == 2
    assert "INCONCLUSIVE (solver-reported)" in out
    assert "not counted as proved" in out


def test_timeout_exit_2(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", FIG1, "--solver", stub(tmp_path, "exec sleep 30"), "--timeout", "200")
    assert code == 2 and "INCONCLUSIVE (timeout)" in out


def test_spurious_model_exit_4(capsys, tmp_path):
    lying = stub(tmp_path, "echo sat; echo '((define-fun X1_0 () Bool false) (define-fun D0_0 () Int 0))'")
    code, out, err = run(capsys, "verify", FIG1, "--solver", lying)
    assert code == 4 and out == ""
    assert "spurious counterexample" in err


def test_json_output(capsys):
    code, out, _ = run(capsys, "verify", "--all", "--format", "json", FIG1)
    assert code == 1
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["program"] == {"file": "fig1.lad", "step_count": 3, "rung_count": 1}
    assert [o["reason"] for o in doc["outcomes"]] == ["INC: overflow", BCD]
    assert doc["outcomes"][0]["scenario"]["init"][1] == {"device": "D0", "value": 32767, "defaulted": False}


def test_out_directory(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "--all", "--out", str(tmp_path), FIG1)
    assert code == 1
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig1.error-1.html", "fig1.error-2.html", "fig1.report.json", "fig1.report.txt"]
    assert BCD in (tmp_path / "fig1.error-2.html").read_text()


def test_html_format_writes_to_cwd(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, _ = run(capsys, "verify", "--format", "html", FIG1)
    assert code == 1
    assert [p.name for p in tmp_path.iterdir()] == ["fig1.error-1.html"]


def test_jobs_do_not_change_output(capsys):
    outputs = set()
    for jobs in ("1", "3"):
        code, out, _ = run(capsys, "verify", "--all", "--format", "json", "--jobs", jobs, SAFE)
        outputs.add((code, out))
    assert len(outputs) == 1


def test_dump_vcs(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", FIG1, "--dump-vcs")
    assert out.startswith("VC 1: INC at rung 1, step 2, line 3\n")
    assert "VC 2: BCD" in out and "X1_0" in out
    target = tmp_path / "vcs.txt"
    run(capsys, "verify", FIG1, "--dump-vcs", str(target))
    assert "reason: BCD" in target.read_text()


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", FIG1, "--init", "X1=1,D0=9999")
    assert code == 1
    assert "initial values: X1=1 D0=9999 D1=0 (default)" in out
    assert "step    2  [on ] INC D0 -> D0=10000" in out
    assert f"fault: {BCD} at rung 1, step 3, line 4 (D0=10000)" in out
    code, out, _ = run(capsys, "simulate", FIG1, "--init", "X1=0,D0=10000")
    assert code == 0 and out.endswith("no fault\n")
    code, _, err = run(capsys, "simulate", FIG1, "--init", "X1=7")
    assert code == 3


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", FIG1, "--domain", "D0=9990..10005")
    assert code == 1
    # 16 listed values plus the boundary words, three of which overlap: 23 x 2 states
    assert "enumerating 46 initial states over X1, D0" in out
    assert "step 2: INC: overflow: 1 faulting state, e.g. X1=1 D0=32767" in out
    assert f"step 3: {BCD}: 10 faulting states, e.g. X1=1 D0=-2" in out
    code, out, _ = run(capsys, "oracle", FIG1, "--domain", "X1=0")
    assert code == 0 and "no faulting state" in out
    code, _, err = run(capsys, "oracle", FIG1, "--budget", "10")
    assert code == 3 and "budget" in err


def test_parse_domain():
    dom = parse_domain("D0=0..3|7; X1=1")
    assert dom.words[Device.parse("D0")] == (0, 1, 2, 3, 7)
    assert dom.pinned == {Device.parse("X1"): True}
    with pytest.raises(ValueError):
        parse_domain("X1=0..1")


def test_render(capsys, tmp_path):
    code, out, _ = run(capsys, "render", FIG1, "--init", "X1=1,D0=9999")
    assert code == 0 and out.startswith("<svg") and "#C62828" in out
    run(capsys, "render", FIG1, "--init", "X1=1,D0=9999", "--out", str(tmp_path))
    assert (tmp_path / "fig1.scan.svg").read_text() == out


def test_list_instructions(capsys):
    code, out, _ = run(capsys, "list-instructions")
    assert code == 0
    assert "BCD  call     (word_src|const, word_dst)" in out
    assert "pre:    inactive or (0 <= src <= 9999)" in out
    assert f"reason: {BCD}" in out


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "ladder_verify", "verify", SAFE],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0, proc.stderr
    assert "no runtime error found" in proc.stdout
