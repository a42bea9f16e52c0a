import json

import pytest

from amrmas.agents import run_simulation
from amrmas.cli import main
from amrmas.errors import ReportError, ScenarioParseError, ValidationFailed
from amrmas.generators import random_scenario
from amrmas.report import compute_report, load_scenario, robots_with_accounting_gaps, save_scenario
from amrmas.trace import read_jsonl, write_jsonl


# -- load_scenario -----------------------------------------------------------

def test_load_bundled(productx_path):
    s = load_scenario(productx_path)
    assert [r.id for r in s.robots] == ["TIAGo1", "TIAGo2"]
    assert [p.name for p in s.products] == ["ProductX"]
    assert s.products[0].setup == ("Material1", "Material2", "Tool1", "Tool2")


def test_load_empty_file(tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("")
    with pytest.raises(ScenarioParseError, match="empty"):
        load_scenario(f)


def test_load_syntax_error_has_line(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{\n  "grid_width": 3,\n  oops\n}')
    with pytest.raises(ScenarioParseError, match="line 3"):
        load_scenario(f)


def test_load_missing_field(tmp_path, productx):
    doc = productx.to_dict()
    del doc["robots"][0]["home"]
    f = tmp_path / "s.json"
    f.write_text(json.dumps(doc))
    with pytest.raises(ScenarioParseError, match="home"):
        load_scenario(f)


def test_load_duplicate_task_id(tmp_path, productx_path):
    text = productx_path.read_text().replace(
        '"tasks": {',
        '"tasks": {\n    "Tool1": {"kind": "Tool", "pickup": [7, 12], "dropoff": [12, 3], "handling_ticks": 2},',
        1,
    )
    f = tmp_path / "dup.json"
    f.write_text(text)
    with pytest.raises(ValidationFailed) as info:
        load_scenario(f)
    assert info.value.violations[0] == "tasks: duplicate id Tool1"


def test_save_load_round_trip(tmp_path, productx):
    save_scenario(productx, tmp_path / "s.json")
    assert load_scenario(tmp_path / "s.json") == productx


# -- compute_report ----------------------------------------------------------

def test_report_zero_orders():
    rep = compute_report([{"tick": 0, "agent": "sim", "event": "run_started", "strategy": "balanced"}])
    assert rep.makespan_ticks == 0 and rep.per_task == {}


def test_report_hand_built():
    trace = [
        {"tick": 0, "agent": "master", "event": "dispatch_started", "strategy": "sequential", "roster": ["R"]},
        {"tick": 3, "msg_id": 0, "from": "master", "to": "R", "correlates": None,
         "payload": {"type": "Order", "task_id": "T"}},
        {"tick": 12, "msg_id": 1, "from": "R", "to": "master", "correlates": 0,
         "payload": {"type": "OrderNotice", "task_id": "T", "elapsed_ticks": 10, "outcome": "Completed"}},
    ]
    rep = compute_report(trace)
    assert rep.per_task["T"].elapsed_ticks == 10
    assert rep.makespan_ticks == 12
    assert rep.per_robot["R"].busy_ticks == 10 and rep.per_robot["R"].idle_ticks == 2


@pytest.mark.parametrize(
    "bad",
    [
        "not a dict",
        {"tick": "x"},
        {"tick": 1, "msg_id": 0, "from": "a", "to": "b"},
        {"tick": 1, "msg_id": 0, "from": "a", "to": "b", "payload": {"type": "Telegram"}},
        {"tick": 1, "agent": "R", "event": "resumed"},
        {"tick": 1, "something": "else"},
    ],
)
def test_report_malformed(bad):
    good = {"tick": 0, "agent": "sim", "event": "run_started", "strategy": "x"}
    with pytest.raises(ReportError) as info:
        compute_report([good, bad])
    assert info.value.index == 1


def test_case_study_report(productx):
    _, rep = run_simulation(productx, "balanced")
    assert set(rep.per_task) == set(productx.tasks)
    assert rep.strategy == "balanced"
    assert rep.plan is not None and set(rep.plan["queues"]) == {"TIAGo1", "TIAGo2"}
    assert rep.message_counts == {"IdentityCheck": 2, "Identity": 2, "Order": 7, "OrderNotice": 7}


@pytest.mark.parametrize("seed", range(6))
def test_report_rebuilt_from_file(tmp_path, seed):
    s = random_scenario(seed, n_obstacles=2)
    trace, rep = run_simulation(s, "balanced" if seed % 2 else "sequential", snapshots=True)
    write_jsonl(trace, tmp_path / "t.jsonl")
    assert compute_report(read_jsonl(tmp_path / "t.jsonl")) == rep
    assert robots_with_accounting_gaps(rep) == []


def test_accounting_on_bundled(productx):
    for name in ("sequential", "balanced"):
        _, rep = run_simulation(productx, name)
        assert robots_with_accounting_gaps(rep) == []


# -- CLI ---------------------------------------------------------------------

def test_cli_run(tmp_path, productx_path, capsys):
    code = main(["run", "--scenario", str(productx_path), "--strategy", "balanced",
                 "--trace", str(tmp_path / "t.jsonl"), "--report", str(tmp_path / "r.json"),
                 "--snapshots"])
    assert code == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert set(rep) == {"strategy", "makespan_ticks", "per_robot", "per_task", "message_counts", "plan"}
    assert any("robots" in r for r in read_jsonl(tmp_path / "t.jsonl"))
    assert "7/7" in capsys.readouterr().out


def test_cli_default_outputs(tmp_path, productx_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["run", "--scenario", str(productx_path), "--strategy", "sequential"]) == 0
    assert (tmp_path / "trace.jsonl").exists() and (tmp_path / "report.json").exists()


def test_cli_bad_strategy(productx_path, capsys):
    code = main(["run", "--scenario", str(productx_path), "--strategy", "sideways"])
    assert code == 2
    assert "sequential, balanced" in capsys.readouterr().err


def test_cli_unknown_flag(productx_path):
    assert main(["validate", "--scenario", str(productx_path), "--frobnicate"]) == 2


def test_cli_validate(productx_path, tmp_path, capsys):
    assert main(["validate", "--scenario", str(productx_path)]) == 0
    doc = json.loads(productx_path.read_text())
    doc["robots"] = []
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--scenario", str(bad)]) == 1
    assert "robots: must be non-empty" in capsys.readouterr().out


def test_cli_parse_error_exit_code(tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("")
    assert main(["run", "--scenario", str(f), "--strategy", "balanced",
                 "--trace", str(tmp_path / "t"), "--report", str(tmp_path / "r")]) == 1


def test_cli_tick_limit(productx_path, tmp_path):
    assert main(["run", "--scenario", str(productx_path), "--strategy", "balanced",
                 "--tick-limit", "10", "--trace", str(tmp_path / "t"), "--report", str(tmp_path / "r")]) == 1


def test_cli_compare(productx_path, capsys):
    assert main(["compare", "--scenario", str(productx_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    rows = {ln.split()[0]: int(ln.split()[1]) for ln in lines[1:]}
    assert set(rows) == {"sequential", "balanced"}
    assert rows["balanced"] <= rows["sequential"]
