import json

import pytest

from app.core.models import RunConfig
from app.pipeline.orchestrator import run_pipeline
from main import build_parser, config_from_args, main


def test_list_prints_every_experiment(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "witness" in out and "cowling-scan" in out


def test_flags_override_json(tmp_path):
    doc = tmp_path / "run.json"
    doc.write_text(json.dumps({"group": "su", "n": 2, "t_list": [1.0], "seed": 7}), encoding="utf-8")
    args = build_parser().parse_args(["growth", "--json", str(doc), "--t", "0..2", "--seed", "9"])
    config = config_from_args(args)
    assert config.group == "su"
    assert config.t_list == [0.0, 1.0, 2.0]
    assert config.seed == 9


def test_growth_run_writes_report(tmp_path):
    out = tmp_path / "out"
    assert main(["growth", "--group", "so", "--n", "2", "--t", "0,1,2,4,6", "--out", str(out)]) == 0
    with open(out / "growth_visual_so2.json", encoding="utf-8") as fh:
        data = json.load(fh)
    assert data["passed"] is True
    assert data["config"]["command"] == "growth"
    assert (out / "growth_visual_so2.csv").read_text(encoding="utf-8").startswith("t,band,mass_defect")


def test_csv_output_is_deterministic(tmp_path):
    argv = ["verify-cocycle", "--group", "so", "--n", "2", "--samples", "10", "--seed", "3"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "verify_cocycle_so2.csv").read_bytes()
    second = (tmp_path / "b" / "verify_cocycle_so2.csv").read_bytes()
    assert first == second


def test_failed_criterion_exits_2(tmp_path):
    assert main(["growth", "--t", "0,1", "--out", str(tmp_path)]) == 2
    with open(tmp_path / "growth_visual_so2.json", encoding="utf-8") as fh:
        assert json.load(fh)["passed"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["growth", "--group", "su", "--n", "2", "--experiment", "visual"],
        ["verify-group", "--group", "so", "--n", "1"],
        ["growth", "--t", "3..1"],
        ["witness", "--group", "sp", "--n", "2"],
        ["lp-isometry", "--lam", "2.0"],
    ],
)
def test_usage_and_configuration_errors_exit_1(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("argv", [["growth", "--group", "g2"], ["nonsense"], []])
def test_malformed_arguments_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_malformed_json_exits_1(tmp_path, capsys):
    doc = tmp_path / "bad.json"
    doc.write_text("{\"group\": ", encoding="utf-8")
    assert main(["growth", "--json", str(doc)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_pipeline_records_gate():
    state = run_pipeline(RunConfig(command="cowling-scan", group="so", n=3))
    assert state["exit_code"] == 1
    assert state["gate"] == "cowling-so21-gate"
    assert state.get("report") is None
