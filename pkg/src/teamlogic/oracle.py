"""Exhaustive small-model checking: structure and team enumeration,
equivalence checks with counterexamples, and semantic property suites."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .formula import (
    Dep,
    Formula,
    Inc,
    forall_all,
    free_vars,
    is_dependence_only,
    is_first_order,
    parse_formula,
    to_text,
)
from .model import Signature, Structure, Team, full_team
from .semantics import (
    DEFAULT_BUDGET,
    LAX,
    STRICT,
    BudgetExhausted,
    EvalBudget,
    Semantics,
    eval_flat,
    evaluate,
    is_x_universal,
)


# -- enumeration ---------------------------------------------------------------------

def enumerate_structures(sig: Signature, max_domain: int, min_domain: int = 2) -> Iterator[Structure]:
    """All structures over ``sig`` with domain ``0..n-1`` for ``min_domain ≤ n ≤ max_domain``.

    Relations range over all subsets of tuples (bitmask order over the
    lexicographic tuple list), constants over all elements.
    """
    if max_domain < 2 or min_domain < 2:
        raise ValueError("structures need at least two elements")
    for n in range(min_domain, max_domain + 1):
        dom = tuple(str(i) for i in range(n))
        spaces = []
        for _, arity in sig.relations:
            tuples = list(product(dom, repeat=arity))
            spaces.append([
                frozenset(t for i, t in enumerate(tuples) if mask >> i & 1) for mask in range(2 ** len(tuples))
            ])
        names = [name for name, _ in sig.relations]
        arities = dict(sig.relations)
        for rels in product(*spaces):
            for consts in product(dom, repeat=len(sig.constants)):
                yield Structure(dom, dict(zip(names, rels)), arities, dict(zip(sig.constants, consts)))


def enumerate_teams(M: Structure, variables: Sequence[str], max_rows: Optional[int] = None) -> Iterator[Team]:
    """All teams over ``variables`` with at most ``max_rows`` rows, smallest first."""
    vs = tuple(sorted(set(variables)))
    rows = sorted(full_team(vs, M).rows, key=M.sort_key)
    top = len(rows) if max_rows is None else min(max_rows, len(rows))
    for k in range(top + 1):
        for chosen in combinations(rows, k):
            yield Team(vs, frozenset(chosen))


# -- equivalence -------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceTask:
    name: str
    left: Formula
    right: Formula
    signature: Signature = Signature()
    max_domain: int = 2
    team_vars: Tuple[str, ...] = ()
    semantics_left: Semantics = LAX
    semantics_right: Semantics = LAX
    max_team_rows: Optional[int] = None
    sentence_mode: bool = False

    def __post_init__(self):
        if self.sentence_mode:
            if free_vars(self.left) or free_vars(self.right):
                raise ValueError(f"{self.name}: sentence mode needs sentences on both sides")
        else:
            missing = (free_vars(self.left) | free_vars(self.right)) - set(self.team_vars)
            if missing:
                raise ValueError(f"{self.name}: free variables {sorted(missing)} not among the team variables")


@dataclass(frozen=True)
class Counterexample:
    structure: Structure
    team: Team
    verdict_left: bool
    verdict_right: bool

    def __post_init__(self):
        if self.verdict_left == self.verdict_right:
            raise ValueError("a counterexample needs differing verdicts")

    def describe(self) -> str:
        return (
            f"left={str(self.verdict_left).lower()} right={str(self.verdict_right).lower()} "
            f"|M|={self.structure.size} |X|={len(self.team)}"
        )

    def write(self, directory: str, stem: str) -> Tuple[str, str]:
        """Save the structure and team in the loadable text formats; returns both paths."""
        os.makedirs(directory, exist_ok=True)
        spath = os.path.join(directory, f"{stem}.structure")
        tpath = os.path.join(directory, f"{stem}.team")
        with open(spath, "w") as fh:
            fh.write(self.structure.to_text())
        with open(tpath, "w") as fh:
            fh.write(self.team.to_text(self.structure))
        return spath, tpath


def task_instances(task: EquivalenceTask) -> Iterator[Tuple[Structure, Team]]:
    for M in enumerate_structures(task.signature, task.max_domain):
        if task.sentence_mode:
            yield M, Team.unit()
        else:
            for X in enumerate_teams(M, task.team_vars, task.max_team_rows):
                yield M, X


def check_equivalence(task: EquivalenceTask, budget: EvalBudget = DEFAULT_BUDGET) -> Optional[Counterexample]:
    """First (structure, team) in enumeration order where the two sides disagree.

    Budget exhaustion on either side propagates as :class:`BudgetExhausted`.
    """
    for M, X in task_instances(task):
        a = evaluate(M, X, task.left, task.semantics_left, budget)
        b = evaluate(M, X, task.right, task.semantics_right, budget)
        if a != b:
            return Counterexample(M, X, a, b)
    return None


# -- property suites ------------------------------------------------------------------------

DEFAULT_CORPUS: Tuple[str, ...] = (
    "R(x) | ~R(y)",
    "x = y & R(x)",
    "A y. (R(y) | x != y)",
    "dep(x; y)",
    "dep(; x)",
    "dep(x; y) | dep(y; x)",
    "E y. (dep(x; y) & ~R(y))",
    "A y. E z. (dep(y; z) & z != y)",
    "pind(x; y)",
    "ind(x; y; y)",
    "inc(x; y)",
    "inc(x; y) | (R(x) & pind(x; y))",
    "E y. (dep(x; y) & inc(x; y))",
    "A y. (inc(y; x) | R(y))",
)


@dataclass(frozen=True)
class PropertyBounds:
    signature: Signature = Signature((("R", 1),))
    max_domain: int = 3
    extended_domain: int = 2
    """Domain cap for suites that enumerate teams over extra variables."""
    max_team_rows: Optional[int] = None


@dataclass
class PropertyReport:
    name: str
    passed: bool
    checked: int = 0
    witnesses: List[Counterexample] = field(default_factory=list)
    note: str = ""

    def line(self, paths: Sequence[str] = ()) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [self.name, status, f"checked={self.checked}"]
        if self.note:
            parts.append(self.note)
        parts.extend(paths)
        return " ".join(parts)


def _parse_corpus(corpus) -> List[Formula]:
    return [parse_formula(f) if isinstance(f, str) else f for f in corpus]


def _instances(phis, bounds: PropertyBounds, extra: Sequence[str] = (), domain: Optional[int] = None):
    cap = domain or bounds.max_domain
    structures = list(enumerate_structures(bounds.signature, cap))
    for phi in phis:
        vs = tuple(sorted(free_vars(phi) | set(extra)))
        for M in structures:
            for X in enumerate_teams(M, vs, bounds.max_team_rows):
                yield phi, M, X


class _Suite:
    def __init__(self, name: str, budget: EvalBudget):
        self.report = PropertyReport(name, True)
        self.budget = budget

    def ev(self, M, X, phi, sem=LAX):
        return evaluate(M, X, phi, sem, self.budget)

    def expect(self, cond: bool, M, X, a: bool, b: bool):
        self.report.checked += 1
        if not cond and self.report.passed:
            self.report.passed = False
            self.report.witnesses.append(Counterexample(M, X, a, b))


def _empty_team(phis, bounds, budget):
    s = _Suite("empty-team", budget)
    for phi in phis:
        for M in enumerate_structures(bounds.signature, bounds.max_domain):
            X = Team.empty(free_vars(phi))
            for sem in (LAX, STRICT):
                v = s.ev(M, X, phi, sem)
                s.report.checked += 1
                if not v:
                    s.report.passed = False
                    s.report.note = f"formula={to_text(phi)!r}"
    return s.report


def _lax_locality(phis, bounds, budget):
    s = _Suite("lax-locality", budget)
    for phi, M, X in _instances(phis, bounds, extra=("u",), domain=bounds.extended_domain):
        a = s.ev(M, X, phi)
        b = s.ev(M, X.restrict(free_vars(phi)), phi)
        s.expect(a == b, M, X, a, b)
    return s.report


def _downward_closure(phis, bounds, budget):
    # all teams are enumerated, so removing one row at a time covers every subteam
    s = _Suite("downward-closure-dep", budget)
    for phi, M, X in _instances([p for p in phis if is_dependence_only(p)], bounds):
        if not s.ev(M, X, phi):
            continue
        for r in X.rows:
            Y = Team(X.variables, X.rows - {r})
            b = s.ev(M, Y, phi)
            s.expect(b, M, Y, True, b)
    return s.report


def _strict_implies_lax(phis, bounds, budget):
    s = _Suite("strict-implies-lax", budget)
    for phi, M, X in _instances(phis, bounds):
        a = s.ev(M, X, phi, STRICT)
        b = s.ev(M, X, phi, LAX) if a else False
        s.expect(not a or b, M, X, a, b)
    return s.report


def _flatness(phis, bounds, budget):
    s = _Suite("flatness", budget)
    for phi, M, X in _instances([p for p in phis if is_first_order(p)], bounds):
        a = s.ev(M, X, phi, LAX)
        b = s.ev(M, X, phi, STRICT)
        c = eval_flat(M, X, phi)
        s.expect(a == b == c, M, X, a, b if a != b else c)
    return s.report


def _strict_eq_lax_dep(phis, bounds, budget):
    s = _Suite("strict-eq-lax-dep", budget)
    for phi, M, X in _instances([p for p in phis if is_dependence_only(p)], bounds):
        a = s.ev(M, X, phi, LAX)
        b = s.ev(M, X, phi, STRICT)
        s.expect(a == b, M, X, a, b)
    return s.report


def strict_extensions(X: Team, v: str, M: Structure) -> Iterator[Team]:
    """``X[F/v]`` for every function ``F: X → M``."""
    rows = sorted(X.rows)
    for values in product(M.domain, repeat=len(rows)):
        chosen = dict(zip(rows, values))
        yield X.extend(v, lambda r: (chosen[r],))


def _x_universal(phis, bounds, budget):
    s = _Suite("x-universal-strict-extensions", budget)
    xs = ("x1", "x2")
    for M in enumerate_structures(Signature(), bounds.max_domain):
        base = full_team(xs, M)
        for Y in strict_extensions(base, "y1", M):
            ok = is_x_universal(Y, xs, M)
            s.expect(ok, M, Y, ok, True)
    return s.report


def _prop_this(phis, bounds, budget):
    s = _Suite("prop-this-on-universal-teams", budget)
    xs = ("x1", "x2")
    for M in enumerate_structures(Signature(), bounds.extended_domain):
        base = full_team(xs, M)
        for Y in strict_extensions(base, "y", M):
            for k in range(len(xs) + 1):
                for v in combinations(xs, k):
                    w = tuple(x for x in xs if x not in v)
                    q = tuple(f"q{i + 1}" for i in range(len(w)))
                    dep = Dep(v, "y")
                    inc = forall_all(q, Inc(q + v + ("y",), w + v + ("y",)))
                    a = s.ev(M, Y, dep, STRICT)
                    b = s.ev(M, Y, inc, STRICT)
                    s.expect(a == b, M, Y, a, b)
    return s.report


def _strict_locality_counterexample(phis, bounds, budget):
    """Search for a strict-semantics locality violation; success means one was found."""
    from .rewrite import counting_sentence

    s = _Suite("strict-locality-counterexample", budget)
    phi = counting_sentence(2)
    for M in enumerate_structures(Signature(), bounds.max_domain):
        for X in enumerate_teams(M, ("u",)):
            if not X:
                continue
            s.report.checked += 1
            a = s.ev(M, X, phi, STRICT)
            b = s.ev(M, X.restrict(()), phi, STRICT)
            if a != b:
                s.report.witnesses.append(Counterexample(M, X, a, b))
                s.report.note = f"found |X|={len(X)} vs restriction |X|=1"
                return s.report
    s.report.passed = False
    s.report.note = "no violation found"
    return s.report


PROPERTIES: Dict[str, Callable] = {
    "empty-team": _empty_team,
    "lax-locality": _lax_locality,
    "strict-locality-counterexample": _strict_locality_counterexample,
    "downward-closure-dep": _downward_closure,
    "strict-implies-lax": _strict_implies_lax,
    "flatness": _flatness,
    "strict-eq-lax-dep": _strict_eq_lax_dep,
    "x-universal-strict-extensions": _x_universal,
    "prop-this-on-universal-teams": _prop_this,
}


def check_property(
    name: str,
    corpus: Optional[Sequence] = None,
    bounds: PropertyBounds = PropertyBounds(),
    budget: EvalBudget = DEFAULT_BUDGET,
) -> PropertyReport:
    try:
        fn = PROPERTIES[name]
    except KeyError:
        raise ValueError(f"unknown property {name!r}; known: {', '.join(PROPERTIES)}") from None
    return fn(_parse_corpus(corpus if corpus is not None else DEFAULT_CORPUS), bounds, budget)


# -- registry ------------------------------------------------------------------------------------

R1 = Signature((("R", 1),))
E2 = Signature((("E", 2),))


def _atom_task(name, text, translate, max_domain=None):
    """Tasks over at most two free variables default to |M| ≤ 3, larger ones to |M| = 2."""
    phi = parse_formula(text)
    vs = tuple(sorted(free_vars(phi)))
    if max_domain is None:
        max_domain = 3 if len(vs) <= 2 else 2
    return EquivalenceTask(name, phi, translate(phi), R1, max_domain, vs)


def default_registry() -> List[EquivalenceTask]:
    """One equivalence task per rewrite pass and input shape."""
    from . import rewrite as rw

    tasks: List[EquivalenceTask] = [
        _atom_task("dep-to-ind/unary", "dep(x; y)", rw.dep_to_ind),
        _atom_task("dep-to-ind/constant", "dep(; y)", rw.dep_to_ind),
        _atom_task("dep-to-ind/binary", "dep(x y; z)", rw.dep_to_ind),
        _atom_task("dep-to-ind/formula", "E y. (dep(x; y) & inc(x; y)) | R(x)", rw.dep_to_ind),
        _atom_task("split-ind/y-ind-x-y", "ind(x; y; y)", rw.split_independence_atoms),
        _atom_task("split-ind/yz-ind-x-zw", "ind(x; y z; z w)", rw.split_independence_atoms),
        _atom_task("inc-to-pind/unary", "inc(x; y)", rw.inc_to_pure_ind_all),
        _atom_task("inc-to-pind/binary", "inc(x y; y x)", rw.inc_to_pure_ind_all),
        _atom_task("inc-to-pind/binary-3var", "inc(x y; z x)", rw.inc_to_pure_ind_all),
        _atom_task("dep-to-pind/unary", "dep(x; y)", rw.dep_to_pure_ind_all, max_domain=2),
        _atom_task("dep-to-pind/binary", "dep(x y; z)", rw.dep_to_pure_ind_all, max_domain=2),
        _atom_task("dep-to-pind/constant", "dep(; y)", rw.dep_to_pure_ind_all, max_domain=2),
    ]
    prenex_cases = [
        ("prenex/rule1-exists-and", "(E x. R(x)) & R(y)"),
        ("prenex/rule2-forall-and", "(A x. (R(x) | dep(y; x))) & inc(y; y)"),
        ("prenex/rule3-exists-or", "(E x. (dep(y; x) & R(x))) | ~R(y)"),
        ("prenex/rule4-forall-or", "(A x. R(x)) | R(y)"),
        ("prenex/rule4-forall-or-dep", "(A x. (dep(; y) | x = y)) | ~R(y)"),
        ("prenex/nested-1", "(A x. E z. (dep(x; z) & R(z))) | (E w. (inc(w; y) & R(w)))"),
        ("prenex/nested-2", "((A x. (R(x) | R(y))) & E z. pind(y; z)) | (A w. w != y)"),
    ]
    for name, text in prenex_cases:
        tasks.append(_atom_task(name, text, rw.to_prenex, max_domain=2))
    tasks += strict_inclusion_tasks() + collapse_tasks()
    return tasks


STRICT_INC_SOURCES = (
    "A x. E y. (dep(x; y) & (R(y) | R(x)))",
    "A x1. A x2. E y. (dep(x1; y) & (x2 = y | R(x2)))",
)


def strict_inclusion_tasks() -> List[EquivalenceTask]:
    from .rewrite import strict_inclusion_translation

    out = []
    for i, text in enumerate(STRICT_INC_SOURCES):
        phi = parse_formula(text)
        out.append(EquivalenceTask(
            f"strict-inc-nf/{i + 1}", phi, strict_inclusion_translation(phi), R1, 2,
            semantics_left=STRICT, semantics_right=STRICT, sentence_mode=True,
        ))
    return out


COLLAPSE_ONE_SOURCES = (
    "A x1. A x2. E(x1, x2)",
    "A x1. A x2. E y. (pind(x1; y) & (E(x1, y) | x2 = y))",
)
COLLAPSE_TWO_SOURCES = (
    "A x1. E(x1, x1)",
    "A x1. A x2. E(x1, x2)",
    "A x1. A x2. E y. (pind(x1; y) & (E(x2, y) | x1 = x2))",
)


def collapse_tasks() -> List[EquivalenceTask]:
    from .rewrite import collapse_to_one_forall, collapse_to_two_forall

    out = []
    for i, text in enumerate(COLLAPSE_ONE_SOURCES):
        phi = parse_formula(text)
        out.append(EquivalenceTask(f"collapse-1forall/{i + 1}", phi, collapse_to_one_forall(phi), E2, 2, sentence_mode=True))
    for i, text in enumerate(COLLAPSE_TWO_SOURCES):
        phi = parse_formula(text)
        out.append(EquivalenceTask(f"collapse-2forall/{i + 1}", phi, collapse_to_two_forall(phi), E2, 2, sentence_mode=True))
    return out


@dataclass
class TaskResult:
    name: str
    status: str
    counterexample: Optional[Counterexample] = None
    detail: str = ""

    def line(self, paths: Sequence[str] = ()) -> str:
        return " ".join([self.name, self.status] + ([self.detail] if self.detail else []) + list(paths))


def run_task(task: EquivalenceTask, budget: EvalBudget = DEFAULT_BUDGET) -> TaskResult:
    try:
        cex = check_equivalence(task, budget)
    except BudgetExhausted as exc:
        return TaskResult(task.name, "BUDGET", detail=str(exc))
    if cex is None:
        return TaskResult(task.name, "PASS")
    return TaskResult(task.name, "FAIL", cex, cex.describe())
