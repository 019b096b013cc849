import json

import pytest

from starcalc.cli import main

CONST_HALF = '{"type": "constant_level", "c": 0.5}'
WEIGHTS = '{"type": "level_weights", "weights": [1.0, 0.3]}'
EXP_04 = '{"type": "point_product", "field": {"expr": "const", "value": 0.4}}'
EXP_LIN = ('{"type": "point_product", "field": {"expr": "sum", "terms": '
           '[{"expr": "const", "value": 0.5}, {"expr": "coord", "axis": 0}]}}')


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_conv_envelope_and_defaults(capsys):
    code, out, _ = run(["conv", "--k1", CONST_HALF, "--k2", WEIGHTS,
                        "--n", "4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "config", "result"}
    assert doc["command"] == "conv"
    assert doc["config"]["mode"] == "both"
    assert doc["config"]["product"] == "conv"
    assert doc["config"]["n"] == 4
    assert doc["config"]["seed"] == 0
    assert doc["result"]["max_deviation"] <= 1e-12
    assert len(doc["result"]["fast"]["values"]) == 16


def test_identical_runs_are_byte_identical(tmp_path, capsys):
    paths = [str(tmp_path / "a.json"), str(tmp_path / "b.json")]
    for p in paths:
        code, _, _ = run(["integrate", "--kernel", EXP_LIN, "--method", "mc",
                          "--samples", "500", "--seed", "3", "--out", p],
                         capsys)
        assert code == 0
    a, b = (open(p, "rb").read() for p in paths)
    assert a == b


def test_config_file_merge_and_flag_priority(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 5, "seed": 9}))
    code, out, _ = run(["conv", "--config", str(cfg), "--k1", CONST_HALF,
                        "--k2", CONST_HALF, "--n", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    # file overrides defaults, flags override the file
    assert doc["config"]["n"] == 3
    assert doc["config"]["seed"] == 9


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(["conv", "--config", str(cfg), "--k1", CONST_HALF,
                        "--k2", CONST_HALF], capsys)
    assert code == 2
    assert "config rejected" in err


def test_missing_input_file(capsys):
    code, _, err = run(["conv", "--k1", "/nonexistent.json",
                        "--k2", CONST_HALF], capsys)
    assert code == 2
    assert "cannot read" in err


def test_missing_required_flag(capsys):
    code, _, err = run(["resolvent", "--a", CONST_HALF, "--k", CONST_HALF],
                       capsys)
    assert code == 2
    assert "requires" in err


def test_calculus_log_needs_normalized_input(capsys):
    code, _, err = run(["calculus", "--op", "log", "--k",
                        '{"type": "level_weights", "weights": [0.0, 1.0]}'],
                       capsys)
    assert code == 2
    assert "NotNormalized" in err


def test_calculus_exp_runs(capsys):
    code, out, _ = run(["calculus", "--k",
                        '{"type": "level_weights", "weights": [0.0, 0.3]}'],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["op"] == "exp"
    assert doc["result"]["result"]["values"][0] == 1.0


def test_evolve_csv(capsys):
    code, out, _ = run(["evolve", "--a", WEIGHTS, "--k0", CONST_HALF,
                        "--t", "0.5", "--snapshots", "2", "--format", "csv"],
                       capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,mask,value"
    assert len(lines) == 1 + 2 * 256


def test_integrate_exponent_route(capsys):
    code, out, _ = run(["integrate", "--kernel", EXP_04], capsys)
    assert code == 0
    doc = json.loads(out)
    from math import exp
    assert doc["result"]["exact"] is True
    assert doc["result"]["value"] == pytest.approx(exp(0.4), rel=1e-12)


def test_integrate_mc_route(capsys):
    code, out, _ = run(["integrate", "--kernel", EXP_04, "--method", "mc",
                        "--samples", "2000", "--seed", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["exact"] is False
    assert doc["result"]["stderr"] > 0
    assert "philox(seed=1" in doc["result"]["trace"]


def test_bogolyubov_growth_failure_exits_one(capsys):
    code, _, err = run(["bogolyubov", "--kernel",
                        '{"type": "constant_level", "c": 3.0}',
                        "--f", '{"expr": "const", "value": 1.0}',
                        "--method", "levels", "--growth", "1.2"], capsys)
    assert code == 1
    assert "GrowthViolation" in err


def test_minlos_check_exits_zero(capsys):
    code, out, _ = run(["minlos-check", "--h", EXP_04, "--g1", EXP_LIN,
                        "--g2", EXP_04, "--samples", "5000", "--seed", "2"],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["within_tol"] is True
    assert doc["result"]["closed_lhs"] == pytest.approx(
        doc["result"]["closed_rhs"], rel=1e-9)


def test_measure_conv_negative_density_exits_one(capsys):
    code, _, err = run(["measure-conv", "--k1",
                        '{"type": "level_weights", "weights": [1.0, -2.0]}',
                        "--k2", EXP_04, "--g", EXP_04,
                        "--samples", "2000"], capsys)
    assert code == 1
    assert "NegativeDensity" in err


def test_young_default_run(capsys):
    code, out, _ = run(["young"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["satisfied"] is True
    assert doc["config"]["variant"] == "Y1"


def test_young_csv(capsys):
    code, out, _ = run(["young", "--variant", "Y5", "--C1", "2.0",
                        "--n", "5", "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "level,lhs,rhs_bound"
    assert len(lines) == 7


def test_young_power_bounded_cube_exits_one(capsys):
    # the stated bounded-power constant fails beyond the square; the CLI
    # must surface that as a failed check, not a pass
    code, out, _ = run(["young", "--variant", "power", "--C1", "2.0",
                        "--delta1", "0.0", "--n-power", "3", "--bounded"],
                       capsys)
    assert code == 1
    assert json.loads(out)["result"]["satisfied"] is False


def test_posdef_positive_kernel(capsys):
    code, out, _ = run(["posdef", "--kernel",
                        '{"type": "level_weights", "weights": [1.0, 0.5, 0.0]}'],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["psd"] is True
    assert doc["result"]["verdict"] == "no violation found"


def test_posdef_negative_control_exits_one(capsys):
    code, out, _ = run(["posdef", "--kernel",
                        '{"type": "level_weights", "weights": [1.0, -0.5, 0.0]}'],
                       capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["result"]["psd"] is False
    assert doc["result"]["verdict"] == "violation found"


def test_posdef_transfer_route(capsys):
    code, out, _ = run(["posdef", "--kernel", EXP_04, "--k2", EXP_LIN,
                        "--cells", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["entries_match"] is True
    assert doc["result"]["implication_ok"] is True


def test_verify_all_single_area(capsys):
    code, out, _ = run(["verify-all", "--area", "model", "--n", "6",
                        "--trials", "5", "--samples", "2000"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["summary"]["passed"] == doc["result"]["summary"]["total"]
    assert all(c["area"] == "model" for c in doc["result"]["checks"])


def test_verify_all_csv(capsys):
    code, out, _ = run(["verify-all", "--area", "model", "--format", "csv"],
                       capsys)
    assert code == 0
    assert out.splitlines()[0] == "name,area,passed,detail"


def test_verify_all_unknown_area(capsys):
    code, _, err = run(["verify-all", "--area", "nosuch"], capsys)
    assert code == 2
    assert "no checks" in err


def test_bench_csv_headers(capsys):
    code, out, _ = run(["bench", "--n", "2..3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,naive_seconds,fast_seconds,ratio"
    assert len(lines) == 3


def test_bench_bad_range(capsys):
    code, _, err = run(["bench", "--n", "abc"], capsys)
    assert code == 2
    assert "bad range" in err


def test_csv_unsupported_for_scalar_commands(capsys):
    code, _, err = run(["calculus", "--op", "inverse", "--k", WEIGHTS,
                        "--format", "csv"], capsys)
    assert code == 2
    assert "no CSV rendering" in err
