import pytest

from teamlogic.formula import (
    Dep,
    Inc,
    Ind,
    all_vars,
    free_vars,
    classify_fragment,
    is_first_order,
    parse_formula,
    subformulas,
    to_text,
)
from teamlogic.model import Signature
from teamlogic.oracle import EquivalenceTask, check_equivalence
from teamlogic.rewrite import (
    DLNormalForm,
    PureIndNormalForm,
    ShapeError,
    collapse_to_one_forall,
    collapse_to_two_forall,
    counting_sentence,
    counting_width,
    dep_to_ind,
    dep_to_pure_ind,
    dep_to_pure_ind_all,
    inc_to_pure_ind,
    is_prenex,
    split_independence_atom,
    strict_inclusion_translation,
    to_prenex,
)

P = parse_formula


def same(phi, text):
    assert phi == P(text), to_text(phi)


def dependency_atoms(phi):
    return sorted((to_text(s) for s in subformulas(phi) if isinstance(s, (Dep, Ind, Inc))))


def lax_equivalent(left, right, max_domain=2, signature=Signature()):
    vs = tuple(sorted(free_vars(left) | free_vars(right)))
    task = EquivalenceTask("t", left, right, signature, max_domain, vs)
    return check_equivalence(task)


@pytest.mark.parametrize(
    "source, expected",
    [
        ("dep(x; y)", "ind(x; y; y)"),
        ("dep(; y)", "ind(; y; y)"),
        ("E z. (dep(x z; y) | R(z))", "E z. (ind(x z; y; y) | R(z))"),
    ],
)
def test_dep_to_ind(source, expected):
    same(dep_to_ind(P(source)), expected)


@pytest.mark.parametrize(
    "source, expected",
    [
        ("ind(x; y; y)", "ind(x; ;) & dep(x; y)"),
        ("ind(x; y z; z w)", "ind(x; y; w) & dep(x; z)"),
        ("ind(x; y; z)", "ind(x; y; z)"),
        ("ind(x; x y; z)", "ind(x; y; z)"),
    ],
)
def test_split_independence_atom(source, expected):
    same(split_independence_atom(P(source)), expected)


def test_split_output_has_disjoint_components():
    out = split_independence_atom(P("ind(a b; b c d e; d e f a)"))
    for s in subformulas(out):
        if isinstance(s, Ind):
            parts = [set(s.condition), set(s.left), set(s.right)]
            assert all(not (p & q) for i, p in enumerate(parts) for q in parts[i + 1:])


INC_PRINTED = (
    "A v1. A v2. A z. ((z != x & z != x) | (v1 != v2 & z != y)"
    " | ((v1 = v2 | z = y) & pind(z; v1 v2)))"
)
INC_CORRECTED = INC_PRINTED.replace("z != x & z != x", "z != x & z != y")


def test_inc_to_pure_ind_printed_form():
    same(inc_to_pure_ind(Inc(("x",), ("y",)), duplicate_guard=True), INC_PRINTED)


def test_inc_to_pure_ind_default_form():
    same(inc_to_pure_ind(Inc(("x",), ("y",))), INC_CORRECTED)


def test_printed_inclusion_form_has_a_counterexample():
    atom = Inc(("x",), ("y",))
    cex = lax_equivalent(atom, inc_to_pure_ind(atom, duplicate_guard=True))
    assert cex is not None
    rows = [dict(zip(cex.team.variables, r)) for r in cex.team.rows]
    assert cex.verdict_left is False and cex.verdict_right is True
    assert len(rows) == 1 and rows[0]["x"] != rows[0]["y"]


def test_corrected_inclusion_form_is_equivalent():
    atom = Inc(("x",), ("y",))
    assert lax_equivalent(atom, inc_to_pure_ind(atom)) is None


@pytest.mark.parametrize("text", ["inc(x; y)", "inc(x y; y x)", "inc(x y z; z z x)"])
def test_inc_translation_profile(text):
    atom = P(text)
    profile = classify_fragment(inc_to_pure_ind(atom))
    assert profile.universal_count == len(atom.left) + 2
    assert profile.max_inc_width is None
    assert profile.max_dep_arity is None


def test_inc_translation_fresh_names_avoid_input():
    out = inc_to_pure_ind(P("inc(v1 z; z v2)"))
    bound = all_vars(out) - {"v1", "v2", "z"}
    assert len(bound) == 4
    same(out.body.body.body.body, to_text(out.body.body.body.body))


@pytest.mark.parametrize(
    "source, expected",
    [
        ("dep(x; y)", "A z. E w. ((z != x | w = y) & pind(x y; z w))"),
        ("dep(x1 x2; y)", "A z1. A z2. E w. ((z1 != x1 | z2 != x2 | w = y) & pind(x1 x2 y; z1 z2 w))"),
    ],
)
def test_dep_to_pure_ind(source, expected):
    same(dep_to_pure_ind(P(source)), expected)


@pytest.mark.parametrize("text", ["dep(x; y)", "dep(; y)"])
def test_dep_to_pure_ind_is_equivalent(text):
    phi = P(text)
    out = dep_to_pure_ind_all(phi)
    assert lax_equivalent(phi, out) is None
    profile = classify_fragment(out)
    assert profile.max_dep_arity is None
    if phi.determinants:
        atom = next(s for s in subformulas(out) if isinstance(s, Ind))
        assert profile.max_ind_measure == len(set(atom.left + atom.right)) - 1


@pytest.mark.parametrize(
    "source, expected",
    [
        ("(E x. R(x)) & S(y)", "E x. (R(x) & S(y))"),
        ("(A x. R(x)) & S(y)", "A x. (R(x) & S(y))"),
        ("(E x. R(x)) | S(y)", "E x. (R(x) | S(y))"),
        ("(A x. R(x)) | S(y)", "E a. E b. A x. ((R(x) & a = b) | (S(y) & a != b))"),
        ("S(y) | A x. R(x)", "E a. E b. A x. ((S(y) & a != b) | (R(x) & a = b))"),
        ("(E x. R(x)) & (E x. S(x))", "E x. E x_1. (R(x) & S(x_1))"),
    ],
)
def test_prenex_rules(source, expected):
    same(to_prenex(P(source)), expected)


@pytest.mark.parametrize(
    "text",
    [
        "(A x. E z. (dep(x; z) & R(z))) | (E w. (inc(w; y) & R(w)))",
        "((A x. (R(x) | R(y))) & E z. pind(y; z)) | (A w. w != y)",
        "A x. ((E y. dep(x; y)) | (A z. inc(z; x)))",
    ],
)
def test_prenex_contract(text):
    phi = P(text)
    out = to_prenex(phi)
    assert is_prenex(out)
    assert dependency_atoms(out) == dependency_atoms(phi)
    assert classify_fragment(out).universal_count == classify_fragment(phi).universal_count


@pytest.mark.parametrize(
    "text",
    ["(A x. (dep(; y) | x = y)) | ~R(y)", "(E x. (dep(y; x) & R(x))) | ~R(y)"],
)
def test_prenex_preserves_lax_truth(text):
    phi = P(text)
    assert lax_equivalent(phi, to_prenex(phi), signature=Signature.parse("R/1")) is None


@pytest.mark.parametrize("n, width", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)])
def test_counting_width(n, width):
    assert counting_width(n) == width


def test_counting_sentence_goldens():
    same(counting_sentence(1), "E t. t = t")
    same(counting_sentence(2), "E x0. E x1. (inc(x0; x0) & inc(x1; x0) & x0 != x1)")
    three = counting_sentence(3)
    assert classify_fragment(three).max_inc_width == 2
    assert len(all_vars(three)) == 6


def test_counting_rejects_zero():
    with pytest.raises(ValueError):
        counting_sentence(0)


def test_strict_inclusion_translation_empty_w():
    same(
        strict_inclusion_translation(P("A x. E y. (dep(x; y) & R(y))")),
        "A x. E y. (inc(x y; x y) & R(y))",
    )


def test_strict_inclusion_translation_one_w():
    same(
        strict_inclusion_translation(P("A x1. A x2. E y. (dep(x1; y) & R(y))")),
        "A x1. A x2. E y. ((A q. inc(q x1 y; x2 x1 y)) & R(y))",
    )


@pytest.mark.parametrize(
    "text",
    [
        "E y. A x. (dep(x; y) & R(y))",
        "A x. E y. (dep(x; y) & dep(x; y) & R(y))",
        "A x. E y. (dep(y; y) & R(y))",
        "A x. E y. (dep(x; y) & E z. R(z))",
        "A x. E y. (inc(x; y) & R(y))",
    ],
)
def test_strict_inclusion_rejects_other_shapes(text):
    with pytest.raises(ShapeError):
        DLNormalForm.from_formula(P(text))


def test_collapse_one_forall():
    same(collapse_to_one_forall(P("A x1. E x2. E(x1, x2)")), "A x1. E x2. E(x1, x2)")
    same(
        collapse_to_one_forall(P("A x1. A x2. E(x1, x2)")),
        "A x1. E x2. (inc(x1; x2) & pind(x1; x2) & E(x1, x2))",
    )
    out = collapse_to_one_forall(P("A x1. A x2. A x3. E y. (pind(x1; y) & E(x3, y))"))
    assert classify_fragment(out).universal_count == 1


def test_collapse_two_forall():
    same(
        collapse_to_two_forall(P("A x1. E(x1, x1)")),
        "A p. A q. E x1. ((p != q | x1 = p) & E(x1, x1))",
    )
    same(
        collapse_to_two_forall(P("A x1. A x2. E(x1, x2)")),
        "A p. A q. E x1. E x2. ((p != q | (x1 = p & x2 = p)) & pind(x1; x2) & E(x1, x2))",
    )
    out = collapse_to_two_forall(P("A x1. A x2. A x3. E y. (pind(x1; y) & E(x3, y))"))
    assert classify_fragment(out).universal_count == 2


def test_collapse_fresh_names_avoid_input():
    out = collapse_to_two_forall(P("A p. A q. E(p, q)"))
    outer = (out.var, out.body.var)
    assert not set(outer) & {"p", "q"}
    assert out.body.body.var == "p" and out.body.body.body.var == "q"


@pytest.mark.parametrize(
    "fn, text",
    [
        (collapse_to_one_forall, "A x. E y. (inc(x; y) & R(y))"),
        (collapse_to_one_forall, "E y. A x. E(x, y)"),
        (collapse_to_two_forall, "A x. E y. (inc(x; y) & R(y))"),
        (collapse_to_two_forall, "E y. E(y, y)"),
        (collapse_to_two_forall, "A x. E y. (dep(x; y) & E(x, y))"),
    ],
)
def test_collapse_rejects_other_shapes(fn, text):
    with pytest.raises(ShapeError):
        fn(P(text))


def test_pure_ind_normal_form_round_trip():
    phi = P("A x1. A x2. E y. (pind(x1; y) & E(x2, y))")
    nf = PureIndNormalForm.from_formula(phi)
    assert nf.universals == ("x1", "x2")
    assert nf.existentials == ("y",)
    assert is_first_order(nf.matrix)
    assert nf.to_formula() == phi
