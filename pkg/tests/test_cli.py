import io
import subprocess
import sys

import pytest

from teamlogic.cli import EXIT_BUDGET, EXIT_FALSE, EXIT_OK, EXIT_USAGE, PASS_NAMES, run
from teamlogic.formula import parse_formula
from teamlogic.rewrite import PASSES


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    structure = tmp_path / "m.structure"
    structure.write_text("domain = 0 1 2\nR/1 = {0,2}\n")
    team = tmp_path / "x.team"
    team.write_text("x,y\n0,1\n1,0\n")
    formula = tmp_path / "phi.txt"
    formula.write_text("inc(x; y)\n")
    return structure, team, formula


def test_strict_counting_on_a_singleton_is_false():
    code, out, err = call("eval", "--sem", "strict", "--structure", "m2", "--team", "singleton-u", "--formula", "counting 2")
    assert (code, out, err) == (EXIT_FALSE, "false\n", "")


def test_lax_counting_on_a_singleton_is_true():
    code, out, _ = call("eval", "--structure", "m2", "--team", "singleton-u", "--formula", "counting 2")
    assert (code, out) == (EXIT_OK, "true\n")


def test_eval_with_files(files):
    structure, team, formula = files
    code, out, _ = call("eval", "--structure", str(structure), "--team", str(team), "--formula-file", str(formula))
    assert (code, out) == (EXIT_OK, "true\n")
    code, out, _ = call("eval", "--structure", str(structure), "--team", str(team), "--formula", "R(x) & R(y)")
    assert (code, out) == (EXIT_FALSE, "false\n")


def test_eval_budget_exhaustion():
    code, out, _ = call(
        "eval", "--sem", "strict", "--structure", "m3", "--team", "singleton-u",
        "--formula", "counting 3", "--max-branching", "1",
    )
    assert code == EXIT_BUDGET
    assert out == "budget-exhausted\n"


def test_machine_format():
    code, out, _ = call("--format", "machine", "eval", "--structure", "m2", "--formula", "E x. dep(; x)")
    assert code == EXIT_OK
    assert out.splitlines() == ["result=true", "semantics=lax"]


def test_classify():
    code, out, _ = call("classify", "--formula", "A x. A y. E z. dep(x y; z)")
    assert (code, out) == (EXIT_OK, "dep=2 ind=- inc=- forall=2\n")
    code, out, _ = call("--format", "machine", "classify", "--formula", "inc(x y; z w)")
    assert out.splitlines() == ["dep=-", "ind=-", "inc=2", "forall=0"]


def test_rewrite_list_has_every_pass():
    code, out, _ = call("rewrite", "--list")
    assert code == EXIT_OK
    assert out.split() == list(PASS_NAMES)
    assert set(PASSES) == set(PASS_NAMES)


@pytest.mark.parametrize(
    "args, expected",
    [
        (["--pass", "dep-to-ind", "--formula", "dep(x; y)"], "ind(x; y; y)"),
        (["--pass", "split-ind", "--formula", "ind(x; y z; z w)"], "(ind(x; y; w) & dep(x; z))"),
        (["--pass", "counting", "--n", "2"], "E x0. E x1. ((inc(x0; x0) & inc(x1; x0)) & x0 != x1)"),
        (["--pass", "prenex", "--formula", "(A x. R(x)) | S(y)"], "E a. E b. A x. ((R(x) & a = b) | (S(y) & a != b))"),
        (["--pass", "ind-to-eso", "--formula", "A x. E y. dep(x; y)"], "exists f/1 . A x. E y. f(x) = y"),
    ],
)
def test_rewrite_passes(args, expected):
    code, out, _ = call("rewrite", *args)
    assert (code, out) == (EXIT_OK, expected + "\n")


def test_rewrite_inclusion_variants():
    _, default, _ = call("rewrite", "--pass", "inc-to-pind", "--formula", "inc(x; y)")
    _, printed, _ = call("rewrite", "--pass", "inc-to-pind", "--duplicate-guard", "--formula", "inc(x; y)")
    assert "z != x & z != y" in default
    assert "z != x & z != x" in printed
    parse_formula(default)
    parse_formula(printed)


def test_rewrite_shape_error_is_a_usage_error():
    code, out, err = call("rewrite", "--pass", "collapse-2forall", "--formula", "E y. R(y)")
    assert code == EXIT_USAGE and out == ""
    assert err.startswith("teamlogic: error:") and err.count("\n") == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["eval", "--structure", "m2"],
        ["eval", "--structure", "m2", "--formula", "R(x", "--team", "unit"],
        ["eval", "--structure", "m1", "--formula", "x = x"],
        ["eval", "--structure", "m2", "--formula", "dep(x; y)"],
        ["eval", "--structure", "/no/such/file", "--formula", "x = x"],
        ["rewrite", "--pass", "counting"],
        ["rewrite", "--pass", "nope", "--formula", "x = x"],
        ["check"],
        ["check", "no-such-check"],
        ["equiv", "--left", "R(x)", "--right", "R(y)", "--vars", "x"],
    ],
)
def test_usage_errors(argv):
    code, out, err = call(*argv)
    assert code == EXIT_USAGE
    assert err.startswith("teamlogic: error:")
    assert err.count("\n") == 1


def test_equiv_pass_and_fail(tmp_path):
    code, out, _ = call("equiv", "--left", "dep(x; y)", "--right", "ind(x; y; y)", "--signature", "R/1")
    assert (code, out) == (EXIT_OK, "equiv PASS\n")
    code, out, _ = call(
        "equiv", "--left", "counting 2", "--right", "counting 2", "--sem-right", "strict",
        "--vars", "u", "--witness-dir", str(tmp_path),
    )
    assert code == EXIT_FALSE
    assert out.startswith("equiv FAIL left=true right=false |M|=2 |X|=1")
    assert (tmp_path / "equiv.structure").exists() and (tmp_path / "equiv.team").exists()


def test_check_named_items():
    code, out, _ = call("check", "empty-team", "prenex/rule4-forall-or")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("empty-team PASS")
    assert lines[1] == "prenex/rule4-forall-or PASS"


def test_check_list():
    code, out, _ = call("check", "--list")
    assert code == EXIT_OK
    assert "strict-locality-counterexample" in out.split()
    assert "inc-to-pind/unary" in out.split()


def test_check_all_passes():
    code, out, _ = call("check", "--all")
    assert code == EXIT_OK, out
    lines = out.splitlines()
    assert lines and all(line.split()[1] == "PASS" for line in lines)


def test_output_is_deterministic():
    argv = ["rewrite", "--pass", "dep-to-pind", "--formula", "dep(x y; z) & dep(; z)"]
    assert call(*argv) == call(*argv)
    argv = ["check", "strict-locality-counterexample", "flatness"]
    assert call(*argv) == call(*argv)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "teamlogic", "classify", "--formula", "pind(x; y)"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == "dep=- ind=1 inc=- forall=0\n"
