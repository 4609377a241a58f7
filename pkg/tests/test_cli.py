import copy
import json
import subprocess
import sys

import pytest

from mmfsseq.cli import EXIT_DATA, EXIT_ERROR, EXIT_OK, EXIT_USAGE, run_command
from mmfsseq.grading import parse_expression
from mmfsseq.mmfdata import shipped_text


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def jump2_file(tmp_path):
    doc = json.loads(shipped_text())
    row = doc["hidden_tau"][0]
    row["target"] = str(parse_expression(row["target"]) * parse_expression("h_0"))
    p = tmp_path / "jump2.json"
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == EXIT_OK and out == "PASS 379 checks, 0 failures\n"


def test_validate_failure_and_policy(capsys, jump2_file):
    code, out, _ = run(capsys, "validate", jump2_file)
    assert code == EXIT_ERROR and "hidden jump policy" in out and out.rstrip().endswith("1 failures")
    code, _, _ = run(capsys, "validate", jump2_file, "--max-jump", "2")
    assert code == EXIT_OK


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", "--format", "json")
    obj = json.loads(out)
    assert code == EXIT_OK and obj["ok"] and len(obj["checks"]) == 379


def test_infer(capsys):
    code, out, _ = run(capsys, "infer", "--page", "2", "--relation", "c u = h_1^2 e", "--unknown", "u")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "d_2(u) = h_1^2 c  [unique]"
    assert "constraint: (c) * d_2(u) = h_1^4 d" in lines[1]
    assert lines[-1] == "  table value: h_1^2 c (agrees in the page)"


def test_infer_json(capsys):
    code, out, _ = run(capsys, "infer", "--page", "2", "--relation", "c u = h_1^2 e", "--unknown", "u",
                       "--format", "json")
    obj = json.loads(out)
    assert code == EXIT_OK and obj["value"] == "h_1^2 c" and obj["unique"] and obj["page"] == 2


def test_infer_against_table(capsys):
    # a false relation h_1 u = 0 forces d_2(u) = 0, contradicting the table
    code, out, _ = run(capsys, "infer", "--page", "2", "--relation", "h_1 u = 0", "--unknown", "u")
    assert code == EXIT_ERROR and "(DISAGREES in the page)" in out
    # a weak relation leaves the table value as one of several solutions
    code, out, _ = run(capsys, "infer", "--page", "2", "--relation", "h_0 u = h_1 \\Delta h_1", "--unknown", "u")
    assert code == EXIT_OK and "[not unique]" in out and "also satisfies the constraint" in out


def test_infer_no_information(capsys):
    code, out, _ = run(capsys, "infer", "--page", "2", "--relation", "h_0 h_1 = 0", "--unknown", "u")
    assert code == EXIT_ERROR and "drops out" in out


def test_forced(capsys):
    code, out, _ = run(capsys, "forced", "--page", "2")
    lines = out.splitlines()
    assert code == EXIT_OK and len([x for x in lines if not x.startswith("warning")]) == 14
    assert lines[0] == "h_0 a d g tau^2 + h_2 P n g tau^2 = 0  (d^2 of Delta^2)"


def test_homotopy(capsys):
    code, out, _ = run(capsys, "homotopy", "--stem", "55")
    assert code == EXIT_OK and out == "stem 55: lead=h_1 d g^2 (13,33) -> M2/tau^4\n"
    code, out, _ = run(capsys, "homotopy", "--stem", "22", "--format", "json")
    fam = json.loads(out)["families"][0]
    assert fam["chain"] == ["h_1^2 g", "c d", "P d"] and fam["bound"] == "lower bound"


def test_turn_small(capsys):
    code, out, _ = run(capsys, "turn", "--from", "2", "--max-stem", "12", "--max-f", "6", "--workers", "1")
    assert code == EXIT_OK
    assert "(8,3,5) c -> M2" in out and "0 missing" in out


def test_chart_to_file(capsys, tmp_path):
    out_file = tmp_path / "e2.svg"
    code, out, _ = run(capsys, "chart", "--page", "2", "-o", str(out_file))
    assert code == EXIT_OK and out == ""
    assert out_file.read_text(encoding="utf-8").startswith("<?xml")


@pytest.mark.parametrize("argv, code", [
    (["frobnicate"], EXIT_USAGE),
    (["chart", "--page", "7"], EXIT_USAGE),
    (["turn", "--from", "inf"], EXIT_USAGE),
    (["infer", "--page", "2", "--relation", "c u = h_1^2 e", "--unknown", "h_9"], EXIT_USAGE),
    (["validate", "/nonexistent/data.json"], EXIT_DATA),
])
def test_exit_codes(capsys, argv, code):
    try:
        got = run_command(argv)
    except SystemExit as e:
        got = e.code
    capsys.readouterr()
    assert got == code


def test_malformed_dataset(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"hidden_2": []}', encoding="utf-8")
    code, _, err = run(capsys, "validate", str(p))
    assert code == EXIT_DATA and "unsupported data kind" in err


def test_stdout_is_deterministic():
    cmd = [sys.executable, "-m", "mmfsseq.cli", "forced", "--page", "2"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b and a
