import json

import pytest

from sfe_lab import catalog
from sfe_lab.cli import HYPOTHESIS, NEGATIVE, OK, USAGE, main
from sfe_lab.report import parse_rat


def fn(name):
    return str(catalog.function_path(name))


def sfe(name):
    return str(catalog.protocol_path(name))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decompose_max_and_spiral(capsys):
    code, out, _ = run(capsys, "decompose", fn("max"))
    assert code == OK and json.loads(out)["decomposable"]
    code, out, _ = run(capsys, "decompose", fn("spiral"))
    assert code == NEGATIVE and not json.loads(out)["decomposable"]


def test_classify_exit_codes(capsys):
    assert run(capsys, "classify", fn("max"))[0] == OK
    assert run(capsys, "classify", fn("or"))[0] == NEGATIVE


def test_synthesize_then_security(capsys, tmp_path):
    out = tmp_path / "max.sfe"
    assert main(["synthesize", fn("max"), "--out", str(out)]) == OK
    assert out.read_text().startswith("(protocol")
    code, text, _ = run(capsys, "security", fn("max"), str(out))
    assert code == OK and parse_rat(json.loads(text)["nu0"]) == 0


def test_security_of_leaky_is_negative(capsys):
    code, text, _ = run(capsys, "security", fn("spiral"), sfe("leaky"))
    assert code == NEGATIVE and parse_rat(json.loads(text)["error"]) == 1


def test_simulate_one_run(capsys):
    code, text, _ = run(capsys, "simulate", fn("max"), sfe("max-plain"), "--x", "5", "--y", "0", "--eve-eps", "off")
    rep = json.loads(text)
    assert code == OK and rep["output"] == "5" == rep["expected"]


def test_eve_audit(capsys):
    code, text, _ = run(capsys, "eve-audit", sfe("shared-nonce"))
    assert code == OK and json.loads(text)["audits"]["independence"]["verdict"] == "PASS"
    code, text, _ = run(capsys, "eve-audit", sfe("shared-nonce"), "--no-eve", "--likely", "0,0,1")
    rep = json.loads(text)["audits"]
    assert code == NEGATIVE and parse_rat(rep["independence"]["violation_mass"]) == 1


def test_attack_exit_codes(capsys):
    code, text, _ = run(capsys, "attack", fn("spiral"), sfe("leaky"))
    assert code == NEGATIVE and parse_rat(json.loads(text)["advantage"]) == 1
    code, text, _ = run(capsys, "attack", fn("max"), sfe("max-plain"), "--force")
    assert code == OK and parse_rat(json.loads(text)["advantage"]) == 0


def test_frontier_strict_hypothesis(capsys):
    code, _, err = run(capsys, "frontier", fn("max"), sfe("max-plain"), "--strict")
    assert code == HYPOTHESIS and "hypothesis" in err


def test_frontier_theta_zero_note(capsys):
    code, text, _ = run(capsys, "frontier", fn("spiral"), sfe("leaky"), "--theta", "0")
    rep = json.loads(text)
    assert "note" in rep and set(rep["frontiers"]) == {"FX0", "FY0"}


def test_analyze_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", fn("spiral"), sfe("leaky"), "--out", str(a)]) == OK
    assert main(["analyze", fn("spiral"), sfe("leaky"), "--out", str(b)]) == OK
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["analyze", "missing.fn"],
    ["security", "--theta", "x"],
    ["frontier", "FN", "--theta", "-1"],
    ["frontier", "FN", "--delta", "0"],
    ["simulate", "FN", "--eve-eps", "2"],
])
def test_usage_errors(argv, capsys):
    argv = [fn("spiral") if a == "FN" else a for a in argv]
    assert main(argv) == USAGE


def test_malformed_function_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.fn"
    bad.write_text('{"x": [1, 2],\n "y": }')
    code, _, err = run(capsys, "decompose", str(bad))
    assert code == USAGE and "line 2" in err


def test_budget_exceeded_suggests_sampling(capsys):
    code, _, err = run(capsys, "security", fn("spiral"), sfe("masked-leaky"), "--budget", "2")
    assert code == USAGE and "--mode sample" in err


def test_mismatched_inputs(capsys):
    code, _, err = run(capsys, "security", fn("max"), sfe("shared-nonce"))
    assert code == USAGE and "do not match" in err


def test_attack_on_decomposable_needs_force(capsys):
    code, _, err = run(capsys, "attack", fn("const2"), sfe("collide"))
    assert code == HYPOTHESIS and "decomposable" in err
    assert run(capsys, "attack", fn("const2"), sfe("collide"), "--force")[0] == OK


def test_analyze_synthesized_max(capsys):
    code, text, _ = run(capsys, "analyze", fn("max"))
    rep = json.loads(text)
    assert code == OK and parse_rat(rep["security"]["nu0"]) == 0
    assert all(a["verdict"] == "PASS" for a in rep["audits"].values())
    full = rep["claims"][0]
    assert full["claim"] == "frontier-fullness" and not full["hypothesis_ok"]


def test_analyze_leaky_pins_segment_masses(capsys):
    code, text, _ = run(capsys, "analyze", fn("spiral"), sfe("leaky"))
    rep = json.loads(text)
    claims = {c["claim"]: c for c in rep["claims"]}
    assert code == OK and claims["frontier-fullness"]["holds"]
    masses = claims["frontier-ordering"]["masses"]
    assert parse_rat(masses["breve_X"]) == 1 and parse_rat(masses["tilde_X"]) == 1
