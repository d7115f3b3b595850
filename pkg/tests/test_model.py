import pytest
from hypothesis import given, strategies as st

from teamlogic.model import (
    FormatError,
    Signature,
    Structure,
    Team,
    full_team,
    load_structure,
    load_team,
    pure_structure,
    team_restrict,
    team_universal_extension,
    team_values,
)

M2 = pure_structure(2)
XY = Team.build(("x", "y"), [{"x": "0", "y": "1"}, {"x": "1", "y": "0"}])


def test_load_pure_structure():
    M = load_structure("domain = 0 1\n")
    assert M.domain == ("0", "1")
    assert M == M2


def test_load_unary_relation_without_braces_or_with():
    M = load_structure("domain = 0 1 2\nR/1 = {0,2}\n")
    assert M.relations["R"] == {("0",), ("2",)}
    assert load_structure("domain = 0 1 2\nR/1 = 0, 2\n") == M


def test_load_binary_relation_constants_and_comments():
    M = load_structure("# graph\ndomain = a b\nE/2 = {(a,b), (b,b)}  # edges\nconst c = b\n")
    assert M.relations["E"] == {("a", "b"), ("b", "b")}
    assert M.constants == {"c": "b"}
    assert load_structure(M.to_text()) == M


@pytest.mark.parametrize(
    "text",
    [
        "domain = 0",
        "domain = 0 1\nR/1 = {2}",
        "domain = 0 1\nE/2 = {(0,1,1)}",
        "domain = 0 1\nconst c = 5",
        "R/1 = {0}",
        "domain = 0 0",
    ],
)
def test_load_structure_errors(text):
    with pytest.raises(ValueError):
        load_structure(text)


def test_domain_too_small_message():
    with pytest.raises(ValueError, match="too small"):
        load_structure("domain = 0")


def test_signature_parse():
    sig = Signature.parse("R/1, E/2, const c")
    assert sig.relations == (("R", 1), ("E", 2))
    assert sig.constants == ("c",)
    with pytest.raises(ValueError):
        Signature.parse("R/1, R/2")


def test_load_team_rows():
    X = load_team("x,y\n0,1\n1,0\n", M2)
    assert X == XY
    assert len(X) == 2


def test_load_team_empty_rows_gives_empty_team():
    X = load_team("x,y\n", M2)
    assert X.variables == ("x", "y")
    assert len(X) == 0


def test_load_team_without_variables_is_unit():
    X = load_team("\n", M2)
    assert X == Team.unit()
    assert len(X) == 1


@pytest.mark.parametrize("text", ["x,y\n0\n", "x\n7\n", "x,x\n0,0\n"])
def test_load_team_errors(text):
    with pytest.raises(FormatError):
        load_team(text, M2)


def test_team_values():
    assert team_values(XY, ("x",)) == {("0",), ("1",)}
    assert team_values(Team.empty(("x",)), ("x",)) == frozenset()
    assert team_values(XY, ("x", "x")) == {("0", "0"), ("1", "1")}
    with pytest.raises(KeyError):
        team_values(XY, ("z",))


def test_team_restrict():
    X = Team.build(("x", "y"), [{"x": "0", "y": "0"}, {"x": "0", "y": "1"}])
    assert len(team_restrict(X, {"x"})) == 1
    assert team_restrict(X, {"x", "y"}) == X
    assert team_restrict(Team.unit(), set()) == Team.unit()
    with pytest.raises(KeyError):
        team_restrict(X, {"z"})


def test_universal_extension():
    one = Team.build(("x",), [{"x": "0"}])
    assert len(team_universal_extension(one, "y", M2)) == 2
    assert len(team_universal_extension(Team.empty(), "v", M2)) == 0
    both = team_universal_extension(team_universal_extension(Team.unit(), "x", M2), "y", M2)
    assert len(both) == 4
    assert both == full_team(("x", "y"), M2)


def test_universal_extension_overwrites_existing_variable():
    X = team_universal_extension(XY, "x", M2)
    assert X.variables == ("x", "y")
    assert len(X) == 4


def test_team_equality_is_structural():
    a = Team.build(("y", "x"), [{"x": "1", "y": "0"}, {"x": "0", "y": "1"}])
    assert a == XY and hash(a) == hash(XY)
    assert Team.empty(("x",)) != Team.empty(("y",))


def test_team_text_round_trip():
    M = load_structure("domain = b a\n")
    X = Team.build(("x",), [{"x": "a"}, {"x": "b"}])
    assert X.to_text(M) == "x\nb\na\n"
    assert load_team(X.to_text(M), M) == X


rows = st.lists(st.tuples(st.sampled_from("012"), st.sampled_from("012")), max_size=9)


@given(rows)
def test_extension_laws(rs):
    M3 = pure_structure(3)
    X = Team(("x", "y"), frozenset(rs))
    ext = team_universal_extension(X, "z", M3)
    assert len(ext) == len(X) * 3
    assert team_restrict(ext, {"x", "y"}) == X
    assert len(team_values(X, ("y", "x"))) <= len(X)


def test_structure_needs_two_elements():
    with pytest.raises(ValueError):
        Structure(("0",))
