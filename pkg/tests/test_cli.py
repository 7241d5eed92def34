import json
from pathlib import Path

import pytest

from envctl.cli import EXIT_OK, EXIT_UNSUPPORTED, EXIT_USAGE, EXIT_VIOLATION, main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_check_exit_codes(capsys):
    assert run(capsys, "check", FIXTURES / "grid_2x2.yaml")[0] == EXIT_OK
    assert run(capsys, "check", FIXTURES / "binomial_n2.yaml")[0] == EXIT_OK
    code, rep = run_json(capsys, "check", FIXTURES / "contradiction.yaml")
    assert code == EXIT_VIOLATION
    assert rep["coherent"] is False and rep["failed_layer"] == 0 and rep["violated"]


def test_check_witness_layers(capsys):
    code, rep = run_json(capsys, "check", FIXTURES / "grid_2x2.yaml", "--witness")
    assert code == EXIT_OK and rep["layers"] == len(rep["witness"]) >= 1


def test_check_countable(capsys):
    assert run(capsys, "check", FIXTURES / "parity.yaml")[0] == EXIT_OK
    code, rep = run_json(capsys, "check", FIXTURES / "ultrafilter.yaml")
    assert code == EXIT_OK and rep["coherent"] is None


@pytest.mark.parametrize(
    "name, kind, lower, upper",
    [
        ("binomial_n2", "coherent", "1/100", "81/100"),
        ("binomial_n3", "fully-dis", "1/1000", "729/1000"),
        ("ultrafilter", "fully-dis", "1/2", "3/4"),
        ("parity", "sc", "0", "1"),
        ("vacuity", "coherent", "0", "1"),
    ],
)
def test_envelope_examples(capsys, name, kind, lower, upper):
    code, rep = run_json(capsys, "envelope", FIXTURES / f"{name}.yaml", "--kind", kind)
    assert code == EXIT_OK
    q = rep["queries"][0]
    assert (q["lower"], q["upper"]) == (lower, upper)


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.yaml")), ids=lambda p: p.stem)
def test_oracle_never_disagrees_on_fixtures(capsys, path):
    code, out, _ = run(capsys, "envelope", path, "--oracle", "--json")
    if path.stem.startswith("capacity") or path.stem == "contradiction":
        assert code in (EXIT_USAGE, EXIT_VIOLATION)
        return
    rep = json.loads(out)
    assert code == EXIT_OK
    for q in rep["queries"]:
        if path.stem in ("ultrafilter", "parity"):
            assert "oracle" not in q
        else:
            assert q["oracle"]["agree"] is True


def test_all_finite_kinds_nest_inside_the_oracle(capsys):
    for kind in ("dis", "fully-dis", "fsc"):
        code, rep = run_json(capsys, "envelope", FIXTURES / "grid_2x2.yaml", "--kind", kind, "--oracle")
        assert code == EXIT_OK and rep["queries"][0]["oracle"]["relation"] == "within"


def test_unsupported_query_exit_code(capsys):
    code, rep = run_json(capsys, "envelope", FIXTURES / "parity.yaml", "--kind", "fully-dis")
    assert code == EXIT_UNSUPPORTED
    assert rep["queries"][0]["error"].startswith("NotIntegrable")
    code, out, _ = run(capsys, "envelope", FIXTURES / "ultrafilter.yaml", "--kind", "dis")
    assert code == EXIT_UNSUPPORTED and "NotDescribable" in out


def test_extra_assessments_use_the_oracle(tmp_path, capsys):
    text = (FIXTURES / "grid_2x2.yaml").read_text() + "assessments:\n- {F: E1, K: H1, value: 1/4}\n"
    p = tmp_path / "grid.yaml"
    p.write_text(text)
    code, rep = run_json(capsys, "envelope", p)
    assert code == EXIT_OK and rep["queries"][0]["case_tag"] == "lp-extension"
    assert run(capsys, "envelope", p, "--kind", "dis")[0] == EXIT_USAGE


def test_parse_and_usage_errors(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("space:\n  rows: [H1]\n  columns: [E1]\nprior:\n- {rows: [H1], mass: 1.0}\nmodel:\n  H1: [1]\n")
    code, _, err = run(capsys, "check", p)
    assert code == EXIT_USAGE and "line 5" in err
    assert run(capsys, "check", tmp_path / "missing.yaml")[0] == EXIT_USAGE
    assert run(capsys, "envelope", FIXTURES / "grid_2x2.yaml", "--kind", "nope")[0] == EXIT_USAGE
    assert run(capsys, "bayes", "--grid", "10", "--n", "2", "--theta1", "0.2", "--theta2", "1/2")[0] == EXIT_USAGE


def test_bayes_table(capsys):
    code, rep = run_json(capsys, "bayes", "--grid", "200", "--n", "2", "--theta1", "1/5", "--theta2", "1/2", "--levels", "2")
    assert code == EXIT_OK and rep["limit"] == "117/1000"
    errs = [float(r["error_decimal"]) for r in rep["rows"]]
    assert errs[0] < 1e-2 and errs[1] < errs[0]


def test_bayes_trivial_cases(capsys):
    _, rep = run_json(capsys, "bayes", "--grid", "8", "--n", "3", "--theta1", "0", "--theta2", "1", "--levels", "3")
    assert [r["posterior"] for r in rep["rows"]] == ["1", "1", "1"]
    _, rep = run_json(capsys, "bayes", "--grid", "4", "--n", "0", "--theta1", "1/4", "--theta2", "3/4")
    assert rep["rows"][0]["posterior"] == "2/5"  # prior mass of {1/2, 3/4} among five grid points
    assert run(capsys, "bayes", "--grid", "3", "--n", "2", "--theta1", "1/5", "--theta2", "1/2")[0] == EXIT_USAGE


def test_capacity_reports(capsys):
    _, rep = run_json(capsys, "capacity", FIXTURES / "capacity_additive.yaml", "--analyze")
    assert rep["totally_monotone"] is True and len(rep["core_vertices"]) == 1
    _, rep = run_json(capsys, "capacity", FIXTURES / "capacity_pair.yaml", "--analyze")
    assert [rep["mobius"][k] for k in ("{a}", "{b}", "{a,b}")] == ["1/5", "3/10", "1/2"]
    assert len(rep["core_vertices"]) == 2
    assert rep["choquet"]["X"]["choquet"] == rep["choquet"]["X"]["core_min"]
    code, out, _ = run(capsys, "capacity", FIXTURES / "capacity_not2.yaml", "--analyze")
    assert code == EXIT_OK and "2-monotone: NO (witness" in out


def test_capacity_of_a_model_file(capsys):
    code, rep = run_json(capsys, "capacity", FIXTURES / "vacuity.yaml", "--analyze")
    assert code == EXIT_OK and rep["totally_monotone"] is True
    _, rep = run_json(capsys, "capacity", FIXTURES / "parity.yaml")
    assert rep["values"]["{even}"] == "0"
