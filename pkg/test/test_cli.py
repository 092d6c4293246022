import json

import pytest
from click.testing import CliRunner
from gengap.cli import cli, desk_table, load_problem
from gengap.errors import ProblemSchemaError


def run(*args):
    return CliRunner().invoke(cli, ["--log-level", "ERROR", "--no-cache", *args])


def report_of(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_relation_command():
    report = report_of(run("--no-timings", "relation", "--factors", "C2xZ,C3xZ"))
    assert report["result"] == 3
    assert report["formula"] == "mixed_relation"
    assert [(row["p"], row["sum"]) for row in report["per_prime"]] == [(2, 3), (3, 3), (5, 2)]
    assert report["provenance"] == "formula"


def test_augmentation_command_reads_problem_files(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps({"factors": ["C2", "C3"]}))
    report = report_of(run("augmentation", "--presentation-file", str(path), "--prime-support", "7"))
    assert report["result"] == 2
    assert [row["p"] for row in report["per_prime"]] == [2, 3, 5, 7]
    assert "timings" in report


def test_gap_command():
    report = report_of(run("gap", "--factors", "C2xZ*C3"))
    assert report["result"] == 0
    assert report["d_augmentation"] == 3
    assert report["nilpotent_criterion"]["criterion_met"]
    assert len(report["factor_gaps"]) == 2


def test_kernel_command():
    report = report_of(run("kernel", "--factors", "C2,C3", "--stage", "1"))
    assert report["result"] == 2
    assert report["formula"] == "resolution_kernel_count"


def test_bridson_command():
    assert report_of(run("bridson", "--m", "2,3"))["result"] == 3
    rejected = run("bridson", "--m", "2,4")
    assert rejected.exit_code == 1
    assert "gcd" in rejected.output


def test_refusals_and_schema_errors():
    refused = run("dfr")
    assert refused.exit_code == 1
    assert "d_F(R)" in refused.output
    missing = run("relation")
    assert missing.exit_code == 1
    assert "factors" in missing.output
    unknown = run("augmentation", "--factors", "D4")
    assert unknown.exit_code == 1


def test_load_problem_needs_a_stage_for_kernels():
    with pytest.raises(ProblemSchemaError):
        load_problem("C2", "kernel", None, None)
    problem, data = load_problem("C2,C3", "kernel", 3, None)
    assert problem.stage == 3
    assert data["module"] == {"kernel": 3}


def test_pretty_output():
    result = run("--pretty", "relation", "--factors", "C2xZ,C3xZ")
    assert result.exit_code == 0
    assert "result:  3" in result.output
    assert "components" in result.output


def test_reports_without_timings_are_deterministic():
    first = run("--no-timings", "gap", "--factors", "C2,C3")
    second = run("--no-timings", "gap", "--factors", "C2,C3")
    assert first.output == second.output
    assert "timings" not in json.loads(first.output)


def test_cache_hits_and_corrupted_entries(tmp_path):
    args = ["--log-level", "ERROR", "--cache-dir", str(tmp_path), "relation", "--factors", "C2xZ,C3xZ"]
    runner = CliRunner()
    first = report_of(runner.invoke(cli, args))
    assert not first["timings"]["cached"]
    second = report_of(runner.invoke(cli, args))
    assert second["timings"]["cached"]
    assert second["result"] == first["result"]
    entries = list(tmp_path.glob("*.json"))
    assert len(entries) == 1
    entries[0].write_text("{not json")
    third = report_of(runner.invoke(cli, args))
    assert not third["timings"]["cached"]
    assert third["result"] == 3
    fourth = report_of(runner.invoke(cli, ["--seed", "1", *args]))
    assert not fourth["timings"]["cached"]


def test_identity_check_command():
    lhs = json.dumps({"mul": [{"sub": [{"gen": "a"}, 1]}, {"ghat": True}]})
    holds = report_of(run("identity-check", "--group", "C3", "--lhs", lhs, "--rhs", "0"))
    assert holds["result"] is True
    fails = run("identity-check", "--group", "C3", "--lhs", '{"gen": "a"}', "--rhs", "1")
    assert fails.exit_code == 1
    assert run("identity-check").exit_code == 1


def test_synthesize_then_verify(tmp_path):
    out = tmp_path / "cert.json"
    result = run("--out", str(out), "synthesize", "--factors", "C2,C3", "--module", "augmentation")
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["result"] == 2
    assert report["provenance"] == "certificate-verified"
    assert report["certificate"]["verification"]["status"] == "verified"
    checked = report_of(run("verify", "--factors", "C2,C3", "--certificate", str(out)))
    assert checked["result"] == "verified"


def test_verify_refutes_a_short_certificate(tmp_path):
    out = tmp_path / "cert.json"
    run("--out", str(out), "synthesize", "--factors", "C2,C3", "--module", "augmentation")
    certificate = json.loads(out.read_text())["certificate"]
    certificate["generators"] = certificate["generators"][:1]
    certificate["factor_generators"] = [[0], []]
    short = tmp_path / "short.json"
    short.write_text(json.dumps(certificate))
    result = run("verify", "--factors", "C2,C3", "--certificate", str(short))
    assert result.exit_code == 1


def test_good_check_command():
    report = report_of(run("good-check", "--factors", "C6"))
    assert report["result"] == 1
    assert report["certificate"]["tested"] == [2, 3, 5]
    assert run("good-check", "--factors", "C2,C3").exit_code == 1


def test_desk_table():
    entries = desk_table()
    assert [e["name"] for e in entries if not e["ok"]] == []
