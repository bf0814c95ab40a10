import asyncio
import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from app.config import settings
from app.main import main
from app.schemas import AnalysisReport
from app.services.analysis_pipeline import report_without_metrics, run_command
from app.services.errors import NotConfinedError, RuleSpecError
from app.services.rule_parser import load_rule_file

RULES = Path(__file__).resolve().parent.parent / "static" / "rules"


@pytest.fixture(autouse=True)
def short_ladder(monkeypatch):
    monkeypatch.setattr(settings, "LADDER_J_MAX", 3)


def rule_file(tmp_path, payload, name="rule.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_analyze_example_one(capsys):
    code, report = run(capsys, ["analyze", "--rule", str(RULES / "example1.json")])
    assert code == 0
    assert report["confined"] is True
    inv = report["invariants"]
    assert (inv["a"], inv["varpi"], inv["t"]) == (1, 1, {"1": 1})
    for row in report["fix_counts"]:
        n = row["n"]
        assert row["log_count"] == n - (n & -n)
    assert report["zeta"]["kind"] == "NaturalBoundaryCandidate"
    assert all(row["result"]["attained"] for row in report["oracle"])
    assert report["metrics"]["command"] == "analyze"


def test_analyze_not_confined(tmp_path, capsys):
    code, report = run(capsys, ["analyze", "--rule", rule_file(tmp_path, {"p": 2, "r": 1, "entries": [["1"]]})])
    assert code == 1
    assert report["confined"] is False
    assert report["invariants"] is None
    assert report["metrics"]["errors"] == ["rule is not confined"]


def test_fixcount(capsys):
    code, report = run(capsys, ["fixcount", "--rule", str(RULES / "example1.json"), "--n", "3"])
    assert code == 0
    assert report["row"] == {"n": 3, "log_count": 2, "count": "4"}


def test_fixcount_not_confined_exits_one(tmp_path, capsys):
    path = rule_file(tmp_path, {"p": 3, "r": 1, "entries": [["2"]]})
    assert main(["fixcount", "--rule", path, "--n", "2"]) == 1
    assert "NotConfinedError" in capsys.readouterr().err


def test_zeta(capsys):
    code, report = run(capsys, ["zeta", "--rule", str(RULES / "gauss_shift.json"), "--order", "5"])
    assert code == 0
    assert report["zeta"]["kind"] == "Rational"
    assert report["zeta"]["series"] == ["1", "2", "4", "8", "16", "32"]


def test_orbits(capsys):
    code, report = run(capsys, ["orbits", "--rule", str(RULES / "gauss_shift.json"), "--lmax", "6"])
    assert code == 0
    assert report["orbits"]["counts"] == ["2", "1", "2", "3", "6", "9"]
    assert report["orbits"]["counting"][-1]["total"] == "23"
    assert report["orbits"]["counting_limit"] == "2.000000"


def test_orbits_of_eventually_zero_rule(capsys):
    code, report = run(capsys, ["orbits", "--rule", str(RULES / "nilpotent.json"), "--lmax", "5"])
    assert code == 0
    assert report["orbits"]["counts"] == ["1", "0", "0", "0", "0"]
    assert report["orbits"]["asymptotics"] == []
    assert {row["total"] for row in report["orbits"]["counting"]} == {"1"}


def test_simulate_inline_config(capsys):
    code, report = run(capsys, [
        "simulate", "--rule", str(RULES / "gauss_shift.json"), "--config", "[1, 0, 0]", "--steps", "2",
    ])
    assert code == 0
    assert report["trajectory"] == [[[1], [0], [0]], [[0], [0], [1]], [[0], [1], [0]]]


def test_simulate_recursion_from_file(tmp_path, capsys):
    config = tmp_path / "history.json"
    config.write_text("[[1, 0, 0], [0, 0, 0]]", encoding="utf-8")
    code, report = run(capsys, [
        "simulate", "--rule", str(RULES / "second_order.json"), "--config", str(config), "--steps", "2",
    ])
    assert code == 0
    assert report["trajectory"] == [[[0], [0], [1]], [[1], [1], [0]]]


def test_simulate_bad_config(capsys):
    code, _ = run(capsys, ["simulate", "--rule", str(RULES / "swap_shift.json"), "--config", "[1, 0]"])
    assert code == 2


def test_verify(capsys):
    code, report = run(capsys, ["verify", "--rule", str(RULES / "example1.json"), "--nmax", "6", "--seed", "3"])
    assert code == 0
    assert report["passed"] is True
    assert report["seed"] == 3
    assert {(c["N"], c["n"]) for c in report["checks"]} == {(N, n) for N in (1, 2, 3, 6) for n in (1, 2, 3, 4)}


def test_companion(capsys):
    code, report = run(capsys, ["companion", "--rule", str(RULES / "second_order.json")])
    assert code == 0
    assert (report["order"], report["r"]) == (2, 1)
    assert report["rule"] == [["Z", "1"], ["1", "0"]]


def test_companion_needs_blocks(capsys):
    code, _ = run(capsys, ["companion", "--rule", str(RULES / "example1.json")])
    assert code == 2


@pytest.mark.parametrize("payload", [
    {"p": 4, "r": 1, "entries": [["Z"]]},
    {"p": 2, "r": 1, "entries": [["Z^"]]},
    {"p": 2, "r": 2, "entries": [["Z"]]},
])
def test_bad_rule_files_exit_two(tmp_path, capsys, payload):
    code, report = run(capsys, ["analyze", "--rule", rule_file(tmp_path, payload)])
    assert code == 2
    assert report is None


def test_short_n_check_is_a_usage_error(tmp_path, capsys):
    path = rule_file(tmp_path, {"p": 2, "r": 1, "entries": [["1 + Z"]], "n_check": 5})
    assert main(["zeta", "--rule", path]) == 2
    assert "n_check must be >= 20" in capsys.readouterr().err


def test_parse_error_position_on_stderr(tmp_path, capsys):
    main(["analyze", "--rule", rule_file(tmp_path, {"p": 2, "r": 1, "entries": [["Z^"]]})])
    assert "line 1, column 3" in capsys.readouterr().err


def test_missing_rule_file_exits_two(tmp_path):
    assert main(["zeta", "--rule", str(tmp_path / "nope.json")]) == 2


def test_argparse_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(["fixcount"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["analyze", "--rule", str(RULES / "example1.json"), "--threads", "0"])


def test_json_out(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["fixcount", "--rule", str(RULES / "varpi3.json"), "--n", "6", "--json-out", str(out)])
    printed = json.loads(capsys.readouterr().out)
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8")) == printed
    assert printed["row"]["log_count"] == 2


def test_reports_are_deterministic():
    spec = load_rule_file(RULES / "varpi3.json")
    first = asyncio.run(run_command("analyze", spec, seed=5))
    second = asyncio.run(run_command("analyze", spec, seed=5, threads=2))
    assert report_without_metrics(first) == report_without_metrics(second)
    assert first.metrics.trace_id != second.metrics.trace_id


def test_run_command_errors():
    spec = load_rule_file(RULES / "example1.json")
    with pytest.raises(RuleSpecError):
        asyncio.run(run_command("plot", spec))
    with pytest.raises(RuleSpecError):
        asyncio.run(run_command("fixcount", spec))
    with pytest.raises(NotConfinedError):
        asyncio.run(run_command("zeta", spec.model_copy(update={"entries": [["1"]]})))


def test_traces_written_when_enabled(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "TRACE_ENABLED", True)
    monkeypatch.setattr(settings, "TRACE_ROOT", str(tmp_path / "traces"))
    report = asyncio.run(run_command("fixcount", load_rule_file(RULES / "example1.json"), n=2))
    trace = json.loads((tmp_path / "traces" / f"{report.metrics.trace_id}.json").read_text(encoding="utf-8"))
    assert trace["command"] == "fixcount"
    assert trace["report"]["row"]["log_count"] == 0


def test_analysis_report_round_trip_and_consistency():
    spec = load_rule_file(RULES / "two_sided.json")
    report = asyncio.run(run_command("analyze", spec))
    again = AnalysisReport.model_validate_json(report.model_dump_json())
    assert again.model_dump() == report.model_dump()

    tampered = report.model_dump(mode="json")
    tampered["fix_counts"][0]["log_count"] += 1
    with pytest.raises(ValidationError):
        AnalysisReport.model_validate(tampered)
