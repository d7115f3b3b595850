"""Formula-to-formula translations between dependence, independence and
inclusion atoms, prenexing, counting sentences and quantifier-collapse
normal forms."""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2
from typing import List, Optional, Tuple, Union

from .formula import (
    And,
    Dep,
    Eq,
    Exists,
    Forall,
    Formula,
    FreshNames,
    Inc,
    Ind,
    Or,
    all_vars,
    atom_vars,
    conj,
    exists_all,
    forall_all,
    free_vars,
    is_first_order,
    is_quantifier_free,
    map_atoms,
    neq,
    pind,
    rename_free,
    symbols,
    tuple_eq,
    tuple_neq,
)


class ShapeError(ValueError):
    """The input does not have the normal-form shape a pass requires."""


def _dedupe(vs):
    return tuple(dict.fromkeys(vs))


def _map_with_fresh(phi: Formula, kind, fn) -> Formula:
    fresh = FreshNames(symbols(phi))
    return map_atoms(phi, lambda a: fn(a, fresh) if isinstance(a, kind) else a)


# -- atom translations --------------------------------------------------------

def dep_to_ind(phi: Formula) -> Formula:
    """Replace every ``dep(x⃗; y)`` by ``ind(x⃗; y; y)``."""
    return map_atoms(phi, lambda a: Ind(a.determinants, (a.determined,), (a.determined,)) if isinstance(a, Dep) else a)


def split_independence_atom(a: Ind) -> Formula:
    """Rewrite ``b⃗ ⊥_a⃗ c⃗`` into an atom with pairwise disjoint parts plus dependence atoms.

    Variables shared by ``b⃗`` and ``c⃗`` outside ``a⃗`` must be constant for
    fixed ``a⃗``, which is what the dependence atoms say.
    """
    if not isinstance(a, Ind):
        raise TypeError("split_independence_atom needs an independence atom")
    cond = set(a.condition)
    left0 = tuple(v for v in a.left if v not in cond and v not in a.right)
    right0 = tuple(v for v in a.right if v not in cond and v not in a.left)
    shared = _dedupe(v for v in a.left if v in a.right and v not in cond)
    if left0 == a.left and right0 == a.right and not shared:
        return a
    return conj([Ind(a.condition, left0, right0)] + [Dep(a.condition, d) for d in shared])


def split_independence_atoms(phi: Formula) -> Formula:
    return map_atoms(phi, lambda a: split_independence_atom(a) if isinstance(a, Ind) else a)


def inc_to_pure_ind(a: Inc, fresh: Optional[FreshNames] = None, duplicate_guard: bool = False) -> Formula:
    """Express ``x⃗ ⊆ y⃗`` with pure independence atoms and three fresh quantifier blocks.

    The first disjunct is ``z⃗ ≠ x⃗ ∧ z⃗ ≠ y⃗``. ``duplicate_guard=True`` produces the
    variant with ``z⃗ ≠ x⃗`` repeated instead; that variant is not equivalent
    to the inclusion atom (the team ``{x↦0, y↦1}`` separates them) and is
    kept only for comparison.
    """
    if not isinstance(a, Inc):
        raise TypeError("inc_to_pure_ind needs an inclusion atom")
    fresh = fresh or FreshNames(atom_vars(a))
    v1, v2 = fresh("v1"), fresh("v2")
    z = fresh.many("z", len(a.left))
    second = tuple_neq(z, a.left) if duplicate_guard else tuple_neq(z, a.right)
    body = Or(
        Or(And(tuple_neq(z, a.left), second), And(neq(v1, v2), tuple_neq(z, a.right))),
        And(Or(Eq(v1, v2), tuple_eq(z, a.right)), pind(z, (v1, v2))),
    )
    return forall_all((v1, v2) + z, body)


def inc_to_pure_ind_all(phi: Formula, duplicate_guard: bool = False) -> Formula:
    return _map_with_fresh(phi, Inc, lambda a, fresh: inc_to_pure_ind(a, fresh, duplicate_guard))


def dep_to_pure_ind(a: Dep, fresh: Optional[FreshNames] = None) -> Formula:
    """``dep(x⃗; y)`` as ``∀z⃗ ∃w ((z⃗ = x⃗ → w = y) ∧ x⃗ y ⊥ z⃗ w)``."""
    if not isinstance(a, Dep):
        raise TypeError("dep_to_pure_ind needs a dependence atom")
    fresh = fresh or FreshNames(atom_vars(a))
    xs, y = a.determinants, a.determined
    z = fresh.many("z", len(xs)) if xs else ()
    w = fresh("w")
    guard = Or(tuple_neq(z, xs), Eq(w, y)) if xs else Eq(w, y)
    return forall_all(z, Exists(w, And(guard, pind(xs + (y,), z + (w,)))))


def dep_to_pure_ind_all(phi: Formula) -> Formula:
    return _map_with_fresh(phi, Dep, dep_to_pure_ind)


# -- prenex form ----------------------------------------------------------------

def rename_apart(phi: Formula, fresh: Optional[FreshNames] = None) -> Formula:
    """Give every quantifier its own variable, distinct from all free variables."""
    fresh = fresh or FreshNames(free_vars(phi) | (symbols(phi) - all_vars(phi)))

    def go(f):
        if isinstance(f, (Exists, Forall)):
            new = fresh(f.var)
            body = go(f.body)
            if new != f.var:
                body = rename_free(body, {f.var: new})
            return type(f)(new, body)
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left), go(f.right))
        return f

    return go(phi)


def _merge_and(l: Formula, r: Formula) -> Formula:
    if isinstance(l, (Exists, Forall)):
        return type(l)(l.var, _merge_and(l.body, r))
    if isinstance(r, (Exists, Forall)):
        return type(r)(r.var, _merge_and(l, r.body))
    return And(l, r)


def _merge_or(l: Formula, r: Formula, fresh: FreshNames) -> Formula:
    if isinstance(l, Exists):
        return Exists(l.var, _merge_or(l.body, r, fresh))
    if isinstance(l, Forall):
        a, b = fresh("a"), fresh("b")
        inner = _merge_or(_merge_and(l.body, Eq(a, b)), _merge_and(r, neq(a, b)), fresh)
        return Exists(a, Exists(b, Forall(l.var, inner)))
    if isinstance(r, Exists):
        return Exists(r.var, _merge_or(l, r.body, fresh))
    if isinstance(r, Forall):
        a, b = fresh("a"), fresh("b")
        inner = _merge_or(_merge_and(l, neq(a, b)), _merge_and(r.body, Eq(a, b)), fresh)
        return Exists(a, Exists(b, Forall(r.var, inner)))
    return Or(l, r)


def to_prenex(phi: Formula) -> Formula:
    """Pull all quantifiers to the front.

    Quantifiers leave conjunctions and existentials leave disjunctions
    directly. A universal leaving a disjunction is guarded by two fresh
    existential variables ``a, b``: rows with ``a = b`` take the side the
    universal came from, rows with ``a ≠ b`` the other side.
    """
    fresh = FreshNames(symbols(phi))
    phi = rename_apart(phi, FreshNames(free_vars(phi) | (symbols(phi) - all_vars(phi))))

    def go(f):
        if isinstance(f, (Exists, Forall)):
            return type(f)(f.var, go(f.body))
        if isinstance(f, And):
            return _merge_and(go(f.left), go(f.right))
        if isinstance(f, Or):
            return _merge_or(go(f.left), go(f.right), fresh)
        return f

    fresh.taken |= all_vars(phi)
    return go(phi)


def is_prenex(phi: Formula) -> bool:
    while isinstance(phi, (Exists, Forall)):
        phi = phi.body
    return is_quantifier_free(phi)


# -- counting ---------------------------------------------------------------------

def counting_width(n: int) -> int:
    """Smallest tuple width ``w ≥ 1`` with ``2^w ≥ n``."""
    return max(1, ceil(log2(n)))


def counting_sentence(n: int) -> Formula:
    """A sentence true in a team under strict semantics iff the team has at least ``n`` rows.

    ``n`` distinct tuples all included in the first one: a strict witness for
    the tuples assigns one value per row, so ``n`` distinct values need ``n`` rows.
    """
    if n < 1:
        raise ValueError("counting sentences need n >= 1")
    if n == 1:
        return Exists("t", Eq("t", "t"))
    w = counting_width(n)
    tuples = [tuple(f"x{i}" if w == 1 else f"x{i}_{k}" for k in range(w)) for i in range(n)]
    parts: List[Formula] = [Inc(t, tuples[0]) for t in tuples]
    parts += [tuple_neq(tuples[i], tuples[j]) for i in range(n) for j in range(i + 1, n)]
    return exists_all([v for t in tuples for v in t], conj(parts))


# -- normal forms -------------------------------------------------------------------

def _prefix(phi: Formula) -> Tuple[Tuple[str, ...], Tuple[str, ...], Formula]:
    """Split ``∀x⃗ ∃y⃗ θ`` with quantifier-free ``θ``."""
    xs, ys = [], []
    while isinstance(phi, Forall):
        xs.append(phi.var)
        phi = phi.body
    while isinstance(phi, Exists):
        ys.append(phi.var)
        phi = phi.body
    if not is_quantifier_free(phi):
        raise ShapeError("expected a ∀*∃* prefix followed by a quantifier-free matrix")
    if len(set(xs + ys)) != len(xs) + len(ys):
        raise ShapeError("prefix variables must be distinct")
    return tuple(xs), tuple(ys), phi


def _conjuncts(phi: Formula) -> List[Formula]:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


@dataclass(frozen=True)
class DLNormalForm:
    """``∀x⃗ ∃y⃗ (⋀ dep(v⃗_i; y_i) ∧ θ)`` with one dependence atom per ``y_i``."""

    universals: Tuple[str, ...]
    existentials: Tuple[str, ...]
    dep_atoms: Tuple[Dep, ...]
    matrix: Optional[Formula] = None

    def __post_init__(self):
        determined = [d.determined for d in self.dep_atoms]
        if sorted(determined) != sorted(self.existentials):
            raise ShapeError("need exactly one dependence atom per existential variable")
        for d in self.dep_atoms:
            if not set(d.determinants) <= set(self.universals):
                raise ShapeError(f"determinants of dep(...; {d.determined}) must be universal variables")
        if self.matrix is not None and not (is_first_order(self.matrix) and is_quantifier_free(self.matrix)):
            raise ShapeError("the matrix must be first-order and quantifier-free")

    @classmethod
    def from_formula(cls, phi: Formula) -> "DLNormalForm":
        xs, ys, body = _prefix(phi)
        deps, rest = [], []
        for part in _conjuncts(body):
            (deps if isinstance(part, Dep) else rest).append(part)
        return cls(xs, ys, tuple(deps), conj(rest) if rest else None)

    def to_formula(self) -> Formula:
        parts = list(self.dep_atoms) + ([self.matrix] if self.matrix is not None else [])
        return forall_all(self.universals, exists_all(self.existentials, conj(parts)))


def strict_inclusion_translation(nf: Union[DLNormalForm, Formula]) -> Formula:
    """Replace each ``dep(v⃗; y)`` by ``∀q⃗ (q⃗ v⃗ y ⊆ w⃗ v⃗ y)`` with ``w⃗ = x⃗ ∖ v⃗``.

    Correct under strict semantics on the universal teams the prefix builds.
    """
    if not isinstance(nf, DLNormalForm):
        nf = DLNormalForm.from_formula(nf)
    fresh = FreshNames(symbols(nf.to_formula()))
    parts: List[Formula] = []
    for d in nf.dep_atoms:
        v = d.determinants
        w = tuple(x for x in nf.universals if x not in v)
        q = fresh.many("q", len(w)) if w else ()
        parts.append(forall_all(q, Inc(q + v + (d.determined,), w + v + (d.determined,))))
    if nf.matrix is not None:
        parts.append(nf.matrix)
    return forall_all(nf.universals, exists_all(nf.existentials, conj(parts)))


@dataclass(frozen=True)
class PureIndNormalForm:
    """``∀x⃗ ∃y⃗ (θ ∧ χ)``: ``θ`` pure independence atoms, ``χ`` quantifier-free first-order."""

    universals: Tuple[str, ...]
    existentials: Tuple[str, ...]
    pure_ind_atoms: Tuple[Ind, ...]
    matrix: Optional[Formula] = None

    def __post_init__(self):
        if any(not isinstance(a, Ind) or a.condition for a in self.pure_ind_atoms):
            raise ShapeError("only pure independence atoms may appear besides first-order conjuncts")
        if self.matrix is not None and not (is_first_order(self.matrix) and is_quantifier_free(self.matrix)):
            raise ShapeError("the matrix must be first-order and quantifier-free")

    @classmethod
    def from_formula(cls, phi: Formula) -> "PureIndNormalForm":
        xs, ys, body = _prefix(phi)
        atoms, rest = [], []
        for part in _conjuncts(body):
            (rest if is_first_order(part) else atoms).append(part)
        return cls(xs, ys, tuple(atoms), conj(rest) if rest else None)

    def body(self) -> Formula:
        parts = list(self.pure_ind_atoms) + ([self.matrix] if self.matrix is not None else [])
        return conj(parts) if parts else Eq(self.universals[0], self.universals[0])

    def to_formula(self) -> Formula:
        return forall_all(self.universals, exists_all(self.existentials, self.body()))


def collapse_to_one_forall(nf: Union[PureIndNormalForm, Formula]) -> Formula:
    """Keep only the first universal; the others become existentials that
    inclusion and independence atoms force to range over the whole domain."""
    if not isinstance(nf, PureIndNormalForm):
        nf = PureIndNormalForm.from_formula(nf)
    xs = nf.universals
    if not xs:
        raise ShapeError("need at least one universal quantifier")
    added: List[Formula] = []
    for i in range(1, len(xs)):
        added.append(Inc((xs[0],), (xs[i],)))
        added.append(pind(xs[:i], (xs[i],)))
    return Forall(xs[0], exists_all(xs[1:] + nf.existentials, conj(added + [nf.body()])))


def collapse_to_two_forall(nf: Union[PureIndNormalForm, Formula]) -> Formula:
    """Trade all universals for two fresh ones, ``∀p ∀q``.

    Where ``p = q`` the old universals are pinned to ``p``; the chain of pure
    independence atoms then forces them to take every combination of values.
    """
    if not isinstance(nf, PureIndNormalForm):
        nf = PureIndNormalForm.from_formula(nf)
    xs = nf.universals
    if not xs:
        raise ShapeError("need at least one universal quantifier")
    phi = nf.to_formula()
    psi = exists_all(nf.existentials, nf.body())
    fresh = FreshNames(symbols(phi))
    p, q = fresh("p"), fresh("q")
    parts: List[Formula] = [Or(neq(p, q), conj(Eq(x, p) for x in xs))]
    parts += [pind(xs[:i], (xs[i],)) for i in range(1, len(xs))]
    parts.append(psi)
    return Forall(p, Forall(q, exists_all(xs, conj(parts))))


# -- registry of passes ---------------------------------------------------------------

PASSES: dict = {
    "dep-to-ind": dep_to_ind,
    "split-ind": split_independence_atoms,
    "inc-to-pind": inc_to_pure_ind_all,
    "dep-to-pind": dep_to_pure_ind_all,
    "prenex": to_prenex,
    "counting": None,
    "strict-inc-nf": strict_inclusion_translation,
    "collapse-1forall": collapse_to_one_forall,
    "collapse-2forall": collapse_to_two_forall,
    "ind-to-eso": None,
}
"""Formula passes by CLI name; ``None`` marks passes with a different signature."""
