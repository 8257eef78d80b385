import json

import pytest

from seqalloc import cli
from seqalloc.golden import REFERENCE_FORMULA

INSTANCE = """\
agents 2 items 4 seq 4
item o1
item o2
item o3
item o4
pref 1 : o1 o2 o3 o4
pref 2 : o1 o3 o2 o4
seq : 1 2 2 1
"""

NASH_PROFILE = """\
agents 2 items 4 seq 4
item a
item b
item c
item d
pref 1 : a b c d
pref 2 : c d a b
seq : 1 2 1 2
util 1 : 8 4 2 1
util 2 : 8 4 2 1
"""

NOT_NASH_PROFILE = """\
agents 2 items 4 seq 4
item a
item b
item c
item d
pref 1 : a b c d
pref 2 : b c a d
seq : 1 2 1 2
util 1 : 8 4 2 1
util 2 : 8 4 2 1
"""


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "case.instance"
    path.write_text(INSTANCE)
    return str(path)


@pytest.fixture
def formula_file(tmp_path):
    path = tmp_path / "formula.cnf"
    path.write_text(REFERENCE_FORMULA)
    return str(path)


def _run_json(capsys, argv):
    code = cli.main(argv + ["--json"])
    doc = json.loads(capsys.readouterr().out)
    return code, doc


def test_allocate(capsys, instance_file):
    code, doc = _run_json(capsys, ["allocate", instance_file])
    assert code == cli.EXIT_OK
    assert doc["results"]["bundles"] == {"1": ["o1", "o4"], "2": ["o2", "o3"]}
    assert doc["results"]["trace"][0] == [1, "1", "o1"]
    assert len(doc["input_sha256"]) == 64


def test_allocate_text_output(capsys, instance_file):
    assert cli.main(["allocate", instance_file]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "stage   1" in out and "bundles:" in out


def test_best_response_two_agent(capsys, instance_file):
    code, doc = _run_json(
        capsys, ["best-response", instance_file, "--agent", "1"]
    )
    assert code == cli.EXIT_OK
    assert doc["results"]["bundle"] == ["o1", "o4"]
    assert doc["results"]["utilities"] == "lexicographic (none supplied)"


def test_best_response_oracle_and_greedy_agree_here(capsys, instance_file):
    code, doc = _run_json(
        capsys,
        ["best-response", instance_file, "--agent", "1", "--mode", "oracle"],
    )
    assert code == cli.EXIT_OK
    assert doc["results"]["optimal_bundles"] == [["o1", "o4"]]
    code, doc = _run_json(
        capsys,
        ["best-response", instance_file, "--agent", "1", "--mode", "refuted-greedy"],
    )
    assert code == cli.EXIT_OK
    assert doc["results"]["bundle"] == ["o1", "o4"]


def test_best_response_unknown_agent_is_usage_error(capsys, instance_file):
    assert cli.main(["best-response", instance_file, "--agent", "9"]) == cli.EXIT_USAGE
    assert "unknown agent" in capsys.readouterr().err


def test_oracle_budget_exhaustion_exit_code(capsys, instance_file):
    code = cli.main(
        ["best-response", instance_file, "--agent", "1", "--mode", "oracle", "--budget", "1"]
    )
    assert code == cli.EXIT_BUDGET


def test_nash_verify_verdicts(capsys, tmp_path):
    good = tmp_path / "good.instance"
    good.write_text(NASH_PROFILE)
    code, doc = _run_json(capsys, ["nash-verify", str(good)])
    assert code == cli.EXIT_OK
    assert doc["results"]["equilibrium"] is True

    bad = tmp_path / "bad.instance"
    bad.write_text(NOT_NASH_PROFILE)
    code, doc = _run_json(capsys, ["nash-verify", str(bad)])
    assert code == cli.EXIT_VERDICT_FALSE
    assert doc["results"]["equilibrium"] is False
    assert doc["results"]["agents"]["1"]["can_improve"] is True


def test_nash_verify_requires_full_utilities(capsys, instance_file):
    assert cli.main(["nash-verify", instance_file]) == cli.EXIT_USAGE


def test_reduce_writes_artifacts(capsys, tmp_path, formula_file):
    prefix = str(tmp_path / "compiled")
    code, doc = _run_json(capsys, ["reduce", formula_file, "--out", prefix])
    assert code == cli.EXIT_OK
    assert doc["results"]["agents"] == 13
    assert doc["results"]["items"] == 66
    assert doc["results"]["stages"] == 64
    instance_text = (tmp_path / "compiled.instance").read_text()
    assert instance_text.startswith("agents 13 items 66 seq 64")
    registry = json.loads((tmp_path / "compiled.registry.json").read_text())
    assert registry["target_utility"] == doc["results"]["target_utility"]

    # the emitted instance is itself consumable by the other commands
    code2, doc2 = _run_json(
        capsys, ["allocate", str(tmp_path / "compiled.instance")]
    )
    assert code2 == cli.EXIT_OK


def test_verify_reduction_assignment(capsys, formula_file):
    code, doc = _run_json(
        capsys,
        ["verify-reduction", formula_file, "--assignment", "x1=T,x2=F,x3=F"],
    )
    assert code == cli.EXIT_OK
    assert doc["results"]["meets_target"] is True
    assert len(doc["results"]["trace"]) == 64

    code, doc = _run_json(
        capsys,
        ["verify-reduction", formula_file, "--assignment", "x1=F,x2=F,x3=F"],
    )
    assert code == cli.EXIT_VERDICT_FALSE
    assert doc["results"]["meets_target"] is False


def test_verify_reduction_rejects_partial_assignment(capsys, formula_file):
    code = cli.main(["verify-reduction", formula_file, "--assignment", "x1=T"])
    assert code == cli.EXIT_USAGE


def test_verify_reduction_patterns(capsys, formula_file):
    code, doc = _run_json(capsys, ["verify-reduction", formula_file, "--patterns"])
    assert code == cli.EXIT_OK
    assert doc["results"]["satisfiable"] is True
    assert doc["results"]["patterns_checked"] == 64
    assert doc["results"]["sat_enumeration_agrees"] is True


def test_verify_reduction_pattern_budget(capsys, formula_file):
    code = cli.main(
        ["verify-reduction", formula_file, "--patterns", "--budget", "5"]
    )
    assert code == cli.EXIT_BUDGET


def test_examples_all_green(capsys):
    code, doc = _run_json(capsys, ["examples"])
    assert code == cli.EXIT_OK
    assert all(entry["passed"] for entry in doc["results"].values())


def test_malformed_instance_is_usage_error(capsys, tmp_path):
    path = tmp_path / "broken.instance"
    path.write_text("agents 1 items 1\n")
    assert cli.main(["allocate", str(path)]) == cli.EXIT_USAGE
    assert "malformed header" in capsys.readouterr().err


def test_missing_file_is_usage_error(capsys, tmp_path):
    assert cli.main(["allocate", str(tmp_path / "nope")]) == cli.EXIT_USAGE


def test_json_results_are_deterministic(capsys, instance_file):
    _, first = _run_json(capsys, ["allocate", instance_file])
    _, second = _run_json(capsys, ["allocate", instance_file])
    first.pop("elapsed_seconds")
    second.pop("elapsed_seconds")
    assert first == second
