"""Command-line front end: outputs and exit codes."""

import csv
import io
import json

import pytest

from hfrac.cli import (
    EXIT_FAIL,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    default_config_text,
    format_value,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def small_config(tmp_path):
    doc = json.loads(default_config_text())
    doc["grid"] = [1.0]
    doc["functions"] = doc["functions"][:1]
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


# ------------------------------------------------------------------ eval


def test_eval_values(capsys):
    assert run(capsys, "eval", "--expr", "I[1] . f:const1", "--x", "1")[:2] == (
        EXIT_OK,
        "1.000000000000\n",
    )
    code, out, _ = run(capsys, "eval", "--expr", "I[0.5] . f:const1", "--x", "1")
    assert code == EXIT_OK and abs(float(out) - 1.1283791670955126) < 1e-12


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "--expr", "I[0.5]", "--x", "1")
    assert code == EXIT_NUMERIC and "no applied function" in err
    code, _, err = run(capsys, "eval", "--expr", "I[0.5 . f:const1", "--x", "1")
    assert code == EXIT_USAGE and "line 1" in err
    code, _, _ = run(capsys, "eval", "--expr", "D[0.5] . f:const1", "--x", "0")
    assert code == EXIT_NUMERIC


def test_format_value():
    assert format_value(0.5 + 0.25j) == "0.500000000000+0.250000000000i"
    assert format_value(0.5 + 1e-18j) == "0.500000000000"


# -------------------------------------------------------------- simplify


def test_simplify_outputs(capsys):
    code, out, _ = run(capsys, "simplify", "--expr", "H[ml] . I[0.5]")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "H[ml#s1]"
    assert lines[1].strip() == "ml#s1: orders (1, 2, 2, 3), beta 2"
    assert run(capsys, "simplify", "--expr", "I[0.3] . I[0.4]")[1] == "I[0.7]\n"
    assert run(capsys, "simplify", "--expr", "D[0.5]")[1] == "D[0.5]\n"


def test_simplify_trace(capsys):
    code, out, _ = run(capsys, "simplify", "--expr", "I[0.25] . H[ml]", "--trace")
    assert code == EXIT_OK
    assert "I.H: I^mu o H -> H with (n+1, p+1, q+1), beta + mu" in out
    assert "I[0.25] . H[ml]  =>  H[ml#s1]" in out


def test_simplify_errors(capsys):
    assert run(capsys, "simplify", "--expr", "I[")[0] == EXIT_USAGE
    assert run(capsys, "simplify", "--expr", "H[nosuch]")[0] == EXIT_USAGE


# ---------------------------------------------------------------- verify


def test_verify_single(capsys, tmp_path, small_config):
    out_path = tmp_path / "cor1.csv"
    code, _, err = run(
        capsys, "verify", "--identity", "cor1", "--config", small_config,
        "--tol", "1e-5", "--out", str(out_path),
    )
    assert code == EXIT_OK and err.startswith("pass cor1[ml;mu=0.5]/const1")
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert len(rows) == 1 and float(rows[0]["rel_err"]) <= 1e-5


def test_verify_stdout_and_json(capsys, tmp_path, small_config):
    code, out, _ = run(capsys, "verify", "--identity", "thm3", "--config", small_config)
    assert code == EXIT_OK and out.startswith("identity,x,lhs_re")
    path = tmp_path / "r.json"
    run(capsys, "verify", "--identity", "thm3", "--config", small_config, "--out", str(path))
    doc = json.loads(path.read_text())
    assert doc[0]["identity"] == "thm3[ml;mu=0.5]/const1"


def test_verify_failure_exit_code(capsys, tmp_path, small_config):
    path = tmp_path / "g.csv"
    code, _, err = run(
        capsys, "verify", "--identity", "thm1-gamma0", "--config", small_config,
        "--out", str(path),
    )
    assert code == EXIT_FAIL and "FAIL" in err
    assert path.read_text().startswith("identity,")


def test_verify_usage_errors(capsys, tmp_path, small_config):
    assert run(capsys, "verify", "--identity", "nosuch")[0] == EXIT_USAGE
    args = ("verify", "--identity", "cor1", "--config", small_config)
    assert run(capsys, *args, "--tol", "0")[0] == EXIT_USAGE
    missing = str(tmp_path / "missing.json")
    assert run(capsys, "verify", "--identity", "cor1", "--config", missing)[0] == EXIT_USAGE


@pytest.mark.parametrize(
    "edit",
    [
        lambda d: d.update(tol=-1),
        lambda d: d["identities"]["cor1"].update(op="nosuch"),
        lambda d: d.update(grid=[-0.5, 1.0]),
        lambda d: d["ops"]["ml"].update(beta=-1.0),
    ],
)
def test_config_validation(capsys, tmp_path, edit):
    doc = json.loads(default_config_text())
    edit(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code = run(capsys, "eval", "--expr", "I[1] . f:const1", "--x", "1", "--config", str(path))[0]
    assert code == EXIT_USAGE


def test_missing_subcommand():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
