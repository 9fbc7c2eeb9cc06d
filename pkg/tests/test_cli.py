"""Command-line interface: subcommands, exit codes, stream discipline."""

import json
import subprocess
import sys

import pytest

from blade import load_knowledge_base
from blade.cli import main, merge_requirements
from blade.requirements import (
    Operator,
    Preference,
    RequirementSet,
    StrictRequirement,
)


@pytest.fixture
def kb_path(samples_dir):
    return str(samples_dir / "kb.json")


@pytest.fixture
def requirements_path(samples_dir):
    return str(samples_dir / "requirements.toml")


@pytest.fixture
def bpmn_path(samples_dir):
    return str(samples_dir / "order_process.bpmn")


# ---------------------------------------------------------------------------
# merge_requirements
# ---------------------------------------------------------------------------

def test_merge_appends_new_inputs():
    file_reqs = RequirementSet(
        strict=(StrictRequirement("smart-contracts", Operator.EQUALS, True),),
        preferences=(Preference("latency-s", 0.8),),
    )
    embedded = RequirementSet(
        strict=(StrictRequirement("private-transactions", Operator.EQUALS, True),),
        preferences=(Preference("throughput-tps", 0.9),),
    )
    merged, warnings = merge_requirements(file_reqs, embedded)
    assert warnings == []
    assert len(merged.strict) == 2
    assert {p.criterion for p in merged.preferences} == {
        "latency-s", "throughput-tps",
    }


def test_merge_file_wins_on_conflict():
    file_reqs = RequirementSet(
        strict=(StrictRequirement("throughput-tps", Operator.AT_LEAST, 100.0),),
        preferences=(Preference("latency-s", 0.8),),
    )
    embedded = RequirementSet(
        strict=(StrictRequirement("throughput-tps", Operator.AT_LEAST, 500.0),),
        preferences=(Preference("latency-s", 0.2),),
    )
    merged, warnings = merge_requirements(file_reqs, embedded)
    assert merged.strict[0].threshold == 100.0
    assert merged.preferences[0].weight == 0.8
    assert len(warnings) == 2
    assert all("file wins" in w for w in warnings)


def test_merge_identical_duplicates_are_silent():
    file_reqs = RequirementSet(
        strict=(StrictRequirement("throughput-tps", Operator.AT_LEAST, 100.0),),
        preferences=(Preference("latency-s", 0.8),),
    )
    merged, warnings = merge_requirements(file_reqs, file_reqs)
    assert warnings == []
    assert len(merged.strict) == 1
    assert len(merged.preferences) == 1


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_table(capsys, kb_path, requirements_path):
    code = main(["evaluate", "-k", kb_path, "-r", requirements_path])
    captured = capsys.readouterr()
    assert code == 0
    lines = captured.out.splitlines()
    assert lines[0].startswith("rank")
    assert "hyperledger-fabric" in lines[1]
    assert "eliminated:" in captured.out
    assert "bitcoin" in captured.out


def test_evaluate_json(capsys, kb_path, requirements_path):
    code = main(["evaluate", "-k", kb_path, "-r", requirements_path,
                 "--format", "json"])
    captured = capsys.readouterr()
    assert code == 0
    body = json.loads(captured.out)
    assert [e["id"] for e in body["ranked"]] == [
        "hyperledger-fabric", "r3-corda", "quorum",
    ]
    # canonical: no spaces after separators, single trailing newline
    assert captured.out.endswith("\n")
    assert ": " not in captured.out.split('"explanation"')[0]


def test_evaluate_uses_blade_kb_env(capsys, monkeypatch, kb_path, requirements_path):
    monkeypatch.setenv("BLADE_KB", kb_path)
    code = main(["evaluate", "-r", requirements_path])
    assert code == 0
    assert "hyperledger-fabric" in capsys.readouterr().out


def test_evaluate_without_kb(capsys, monkeypatch, requirements_path):
    monkeypatch.delenv("BLADE_KB", raising=False)
    code = main(["evaluate", "-r", requirements_path])
    captured = capsys.readouterr()
    assert code == 2
    assert "BLADE_KB" in captured.err


def test_evaluate_missing_requirements_file(capsys, kb_path, tmp_path):
    code = main(["evaluate", "-k", kb_path, "-r", str(tmp_path / "nope.toml")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_evaluate_validation_failure_exits_one(capsys, kb_path, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('[preferences]\n"made-up" = 0.9\n')
    code = main(["evaluate", "-k", kb_path, "-r", str(bad)])
    captured = capsys.readouterr()
    assert code == 1
    assert "made-up" in captured.err
    assert captured.out == ""


def test_evaluate_merges_bpmn(capsys, kb_path, requirements_path, bpmn_path):
    code = main([
        "evaluate", "-k", kb_path, "-r", requirements_path,
        "--bpmn", bpmn_path, "--rate", "2.0", "--format", "json",
    ])
    captured = capsys.readouterr()
    assert code == 0
    body = json.loads(captured.out)
    # the embedded private-transactions requirement knocks ethereum out
    assert {e["id"] for e in body["eliminations"]} == {"ethereum", "bitcoin"}
    ethereum = next(e for e in body["eliminations"] if e["id"] == "ethereum")
    assert any(
        v["requirement"]["criterion"] == "private-transactions"
        for v in ethereum["violations"]
    )
    # the embedded throughput-tps preference conflicts with the file's weight
    assert "file wins" in captured.err


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate(capsys, samples_dir, tmp_path):
    occupancy = tmp_path / "occupancy.csv"
    code = main([
        "simulate",
        "-p", str(samples_dir / "chain_params.json"),
        "-w", str(samples_dir / "workload.json"),
        "-d", "60",
        "--occupancy", str(occupancy),
    ])
    captured = capsys.readouterr()
    assert code == 0
    body = json.loads(captured.out)
    assert body["submitted"] == body["committed"] + body["pending"]
    lines = occupancy.read_text().splitlines()
    assert lines[0] == "block,time,tx_count,weight,pending"
    assert len(lines) == 1 + len(body["blocks"])


def test_simulate_rejects_short_duration(capsys, samples_dir):
    code = main([
        "simulate",
        "-p", str(samples_dir / "chain_params.json"),
        "-w", str(samples_dir / "workload.json"),
        "-d", "5",
    ])
    assert code == 2
    assert "warm-up" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# refine
# ---------------------------------------------------------------------------

def test_refine_writes_new_kb(capsys, kb_path, samples_dir, tmp_path):
    out = tmp_path / "refined.json"
    code = main([
        "refine", "-k", kb_path, "--profile", "hyperledger-fabric",
        "-p", str(samples_dir / "chain_params.json"),
        "-w", str(samples_dir / "workload.json"),
        "-o", str(out),
    ])
    captured = capsys.readouterr()
    assert code == 0
    assert "kb_version 1 -> 2" in captured.out
    refined = load_knowledge_base(out.read_text())
    assert refined.kb_version == 2
    fabric = refined.profile("hyperledger-fabric")
    assert "refined by workload simulation" in fabric.sources[-1].ref


def test_refine_unknown_profile(capsys, kb_path, samples_dir, tmp_path):
    code = main([
        "refine", "-k", kb_path, "--profile", "atlantis",
        "-p", str(samples_dir / "chain_params.json"),
        "-w", str(samples_dir / "workload.json"),
        "-o", str(tmp_path / "refined.json"),
    ])
    assert code == 1
    assert "atlantis" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_generate_writes_stub_files(capsys, kb_path, requirements_path,
                                    bpmn_path, tmp_path):
    out = tmp_path / "stubs"
    code = main([
        "generate", "-k", kb_path, "-r", requirements_path,
        "--bpmn", bpmn_path, "--rate", "2.0", "-o", str(out),
    ])
    captured = capsys.readouterr()
    assert code == 0
    for name in ("architecture.json", "deploy.yaml", "contract.json"):
        assert (out / name).is_file()
        assert str(out / name) in captured.out
    descriptor = json.loads((out / "architecture.json").read_text())
    assert descriptor["platform"] == "hyperledger-fabric"


def test_generate_requires_bpmn(capsys, kb_path, requirements_path, tmp_path):
    code = main([
        "generate", "-k", kb_path, "-r", requirements_path,
        "-o", str(tmp_path / "stubs"),
    ])
    assert code == 2
    assert "--bpmn" in capsys.readouterr().err


def test_generate_with_zero_survivors(capsys, kb_path, bpmn_path, tmp_path):
    impossible = tmp_path / "impossible.toml"
    impossible.write_text(
        '[[strict]]\ncriterion = "throughput-tps"\noperator = "at-least"\n'
        'value = 1000000\n\n[preferences]\n"latency-s" = 1.0\n'
    )
    code = main([
        "generate", "-k", kb_path, "-r", str(impossible),
        "--bpmn", bpmn_path, "-o", str(tmp_path / "stubs"),
    ])
    captured = capsys.readouterr()
    assert code == 1
    assert "no platform survives" in captured.err
    assert not (tmp_path / "stubs").exists()


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_kb_only(capsys, kb_path):
    code = main(["validate", "-k", kb_path])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out == "OK: kb version 1, 12 criteria, 5 profiles\n"


def test_validate_with_requirements(capsys, kb_path, requirements_path):
    code = main(["validate", "-k", kb_path, "-r", requirements_path])
    assert code == 0
    assert "OK" in capsys.readouterr().out


def test_validate_reports_findings(capsys, kb_path, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text(
        '[[strict]]\ncriterion = "smart-contracts"\noperator = "at-least"\n'
        'value = 1\n\n[preferences]\n"made-up" = 0.5\n'
    )
    code = main(["validate", "-k", kb_path, "-r", str(bad)])
    captured = capsys.readouterr()
    assert code == 1
    assert captured.err.count("error:") == 2
    assert "OK" not in captured.out


def test_validate_malformed_kb(capsys, tmp_path):
    broken = tmp_path / "kb.json"
    broken.write_text("{broken")
    code = main(["validate", "-k", str(broken)])
    assert code == 2
    assert "malformed" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# serve argument handling
# ---------------------------------------------------------------------------

def test_serve_rejects_bad_bind(kb_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["serve", "-k", kb_path, "--bind", "nonsense"])
    assert excinfo.value.code == 2


# ---------------------------------------------------------------------------
# console entry point
# ---------------------------------------------------------------------------

def test_console_script(kb_path):
    result = subprocess.run(
        [sys.executable, "-c",
         "import sys; from blade.cli import main; sys.exit(main(sys.argv[1:]))",
         "validate", "-k", kb_path],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert result.stdout.startswith("OK")
