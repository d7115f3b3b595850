"""Existential second-order sentences and the translation of prenex
independence-logic sentences into ESO with the same arity bound."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Mapping, Sequence, Tuple, Union

from .formula import (
    And,
    Const,
    Dep,
    Eq,
    Exists,
    Forall,
    Formula,
    FreshNames,
    Inc,
    Ind,
    Not,
    Or,
    Rel,
    free_vars,
    is_quantifier_free,
    symbols,
    to_text,
)
from .model import Structure
from .semantics import BudgetExhausted


# -- classical syntax ------------------------------------------------------------

@dataclass(frozen=True)
class Fn:
    name: str
    args: Tuple["CTerm", ...]


CTerm = Union[str, Const, Fn]


@dataclass(frozen=True)
class CTop:
    pass


@dataclass(frozen=True)
class CRel:
    name: str
    args: Tuple[CTerm, ...]


@dataclass(frozen=True)
class CEq:
    lhs: CTerm
    rhs: CTerm


@dataclass(frozen=True)
class CNot:
    body: "CFormula"


@dataclass(frozen=True)
class CAnd:
    parts: Tuple["CFormula", ...]


@dataclass(frozen=True)
class COr:
    parts: Tuple["CFormula", ...]


@dataclass(frozen=True)
class CImplies:
    left: "CFormula"
    right: "CFormula"


@dataclass(frozen=True)
class CExists:
    var: str
    body: "CFormula"


@dataclass(frozen=True)
class CForall:
    var: str
    body: "CFormula"


CFormula = Union[CTop, CRel, CEq, CNot, CAnd, COr, CImplies, CExists, CForall]


def c_and(parts: Sequence[CFormula]) -> CFormula:
    parts = [p for p in parts if not isinstance(p, CTop)]
    if not parts:
        return CTop()
    return parts[0] if len(parts) == 1 else CAnd(tuple(parts))


def c_quantify(prefix: Sequence[Tuple[type, str]], body: CFormula) -> CFormula:
    for kind, v in reversed(prefix):
        body = (CExists if kind is Exists else CForall)(v, body)
    return body


def _term_text(t: CTerm) -> str:
    if isinstance(t, Const):
        return "@" + t.name
    if isinstance(t, Fn):
        return f"{t.name}(" + ", ".join(_term_text(a) for a in t.args) + ")"
    return t


def c_to_text(phi: CFormula) -> str:
    if isinstance(phi, CTop):
        return "true"
    if isinstance(phi, CRel):
        return f"{phi.name}(" + ", ".join(_term_text(a) for a in phi.args) + ")"
    if isinstance(phi, CEq):
        return f"{_term_text(phi.lhs)} = {_term_text(phi.rhs)}"
    if isinstance(phi, CNot):
        return "~" + _c_operand(phi.body)
    if isinstance(phi, CAnd):
        return "(" + " & ".join(_c_operand(p) for p in phi.parts) + ")"
    if isinstance(phi, COr):
        return "(" + " | ".join(_c_operand(p) for p in phi.parts) + ")"
    if isinstance(phi, CImplies):
        return f"({_c_operand(phi.left)} -> {_c_operand(phi.right)})"
    if isinstance(phi, CExists):
        return f"E {phi.var}. {c_to_text(phi.body)}"
    if isinstance(phi, CForall):
        return f"A {phi.var}. {c_to_text(phi.body)}"
    raise TypeError(phi)


def _c_operand(phi: CFormula) -> str:
    text = c_to_text(phi)
    if isinstance(phi, (CExists, CForall, CEq)):
        return f"({text})"
    return text


def c_free_vars(phi: CFormula) -> frozenset:
    def tv(t):
        if isinstance(t, Fn):
            return frozenset().union(*(tv(a) for a in t.args)) if t.args else frozenset()
        return frozenset({t}) if isinstance(t, str) else frozenset()

    if isinstance(phi, CTop):
        return frozenset()
    if isinstance(phi, CRel):
        return frozenset().union(*(tv(a) for a in phi.args)) if phi.args else frozenset()
    if isinstance(phi, CEq):
        return tv(phi.lhs) | tv(phi.rhs)
    if isinstance(phi, CNot):
        return c_free_vars(phi.body)
    if isinstance(phi, (CAnd, COr)):
        return frozenset().union(*(c_free_vars(p) for p in phi.parts))
    if isinstance(phi, CImplies):
        return c_free_vars(phi.left) | c_free_vars(phi.right)
    return c_free_vars(phi.body) - {phi.var}


def c_substitute(phi: CFormula, mapping: Mapping[str, str]) -> CFormula:
    """Rename free variables; the renaming targets must not be bound inside ``phi``."""
    def st(t):
        if isinstance(t, Fn):
            return Fn(t.name, tuple(st(a) for a in t.args))
        return mapping.get(t, t) if isinstance(t, str) else t

    if isinstance(phi, CTop):
        return phi
    if isinstance(phi, CRel):
        return CRel(phi.name, tuple(st(a) for a in phi.args))
    if isinstance(phi, CEq):
        return CEq(st(phi.lhs), st(phi.rhs))
    if isinstance(phi, CNot):
        return CNot(c_substitute(phi.body, mapping))
    if isinstance(phi, (CAnd, COr)):
        return type(phi)(tuple(c_substitute(p, mapping) for p in phi.parts))
    if isinstance(phi, CImplies):
        return CImplies(c_substitute(phi.left, mapping), c_substitute(phi.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != phi.var}
    return type(phi)(phi.var, c_substitute(phi.body, inner))


@dataclass(frozen=True)
class ESOSentence:
    """``∃ R₁ … f₁ … . matrix`` with a classical first-order sentence as matrix."""

    rel_vars: Tuple[Tuple[str, int], ...]
    fun_vars: Tuple[Tuple[str, int], ...]
    matrix: CFormula

    def __post_init__(self):
        for name, arity in self.rel_vars + self.fun_vars:
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
        free = c_free_vars(self.matrix)
        if free:
            raise ValueError(f"ESO matrix must be a sentence, free: {sorted(free)}")

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.rel_vars + self.fun_vars), default=0)

    def to_text(self) -> str:
        head = " ".join(f"{n}/{a}" for n, a in self.rel_vars + self.fun_vars)
        body = c_to_text(self.matrix)
        return f"exists {head} . {body}" if head else body


# -- evaluation ----------------------------------------------------------------------

class _Interp:
    def __init__(self, M: Structure, rels: Dict[str, frozenset], funs: Dict[str, dict]):
        self.M = M
        self.rels = rels
        self.funs = funs

    def term(self, t: CTerm, env) -> str:
        if isinstance(t, Fn):
            return self.funs[t.name][tuple(self.term(a, env) for a in t.args)]
        if isinstance(t, Const):
            return self.M.constants[t.name]
        return env[t]

    def holds(self, phi: CFormula, env: dict) -> bool:
        if isinstance(phi, CTop):
            return True
        if isinstance(phi, CRel):
            vals = tuple(self.term(a, env) for a in phi.args)
            rel = self.rels.get(phi.name)
            if rel is None:
                rel = self.M.relations[phi.name]
            return vals in rel
        if isinstance(phi, CEq):
            return self.term(phi.lhs, env) == self.term(phi.rhs, env)
        if isinstance(phi, CNot):
            return not self.holds(phi.body, env)
        if isinstance(phi, CAnd):
            return all(self.holds(p, env) for p in phi.parts)
        if isinstance(phi, COr):
            return any(self.holds(p, env) for p in phi.parts)
        if isinstance(phi, CImplies):
            return not self.holds(phi.left, env) or self.holds(phi.right, env)
        inner = dict(env)
        want = isinstance(phi, CExists)
        for m in self.M.domain:
            inner[phi.var] = m
            if self.holds(phi.body, inner) == want:
                return want
        return not want


def count_interpretations(M: Structure, sentence: ESOSentence) -> int:
    n = M.size
    total = 1
    for _, a in sentence.rel_vars:
        total *= 2 ** (n ** a)
    for _, a in sentence.fun_vars:
        total *= n ** (n ** a)
    return total


def eval_eso(M: Structure, sentence: ESOSentence, max_interpretations: int = 10_000_000) -> bool:
    """Brute-force ESO satisfaction: try every interpretation of the quantified symbols.

    Relations are enumerated before functions, each in lexicographic tuple order.
    """
    total = count_interpretations(M, sentence)
    if total > max_interpretations:
        raise BudgetExhausted(f"{total} second-order interpretations exceed the budget of {max_interpretations}")
    clash = {n for n, _ in sentence.rel_vars + sentence.fun_vars} & (set(M.relations) | set(M.constants))
    if clash:
        raise ValueError(f"quantified symbols clash with the structure's signature: {sorted(clash)}")
    rel_spaces = []
    for _, a in sentence.rel_vars:
        tuples = list(product(M.domain, repeat=a))
        rel_spaces.append([
            frozenset(t for i, t in enumerate(tuples) if mask >> i & 1) for mask in range(2 ** len(tuples))
        ])
    fun_spaces = []
    for _, a in sentence.fun_vars:
        args = list(product(M.domain, repeat=a))
        fun_spaces.append([dict(zip(args, vals)) for vals in product(M.domain, repeat=len(args))])
    rel_names = [n for n, _ in sentence.rel_vars]
    fun_names = [n for n, _ in sentence.fun_vars]
    for rels in product(*rel_spaces):
        for funs in product(*fun_spaces):
            interp = _Interp(M, dict(zip(rel_names, rels)), dict(zip(fun_names, funs)))
            if interp.holds(sentence.matrix, {}):
                return True
    return False


# -- translation ---------------------------------------------------------------------

class TranslationError(ValueError):
    pass


def _prenex_split(phi: Formula):
    prefix = []
    while isinstance(phi, (Exists, Forall)):
        prefix.append((type(phi), phi.var))
        phi = phi.body
    if not is_quantifier_free(phi):
        raise TranslationError("input must be prenex: quantifiers followed by a quantifier-free matrix")
    names = [v for _, v in prefix]
    if len(set(names)) != len(names):
        raise TranslationError("prefix variables must be distinct")
    return prefix, phi


def _literal(phi: Formula) -> CFormula:
    if isinstance(phi, Rel):
        return CRel(phi.name, phi.args)
    if isinstance(phi, Eq):
        return CEq(phi.lhs, phi.rhs)
    if isinstance(phi, Not):
        return CNot(_literal(phi.atom))
    raise TypeError(phi)


@dataclass(frozen=True)
class IndSlot:
    """An independence atom at a path of the matrix with its two relation symbols."""

    path: str
    atom: Ind
    left_rel: str
    right_rel: str


def translate_ind_to_eso(phi: Formula) -> ESOSentence:
    """Translate a prenex sentence with dependence and independence atoms into ESO.

    Each independence atom ``b⃗ ⊥_a⃗ c⃗`` at matrix path ``i`` becomes
    ``S_i(a⃗ b⃗) ∧ T_i(a⃗ c⃗)`` and each ``dep(z⃗; y)`` becomes ``f_i(z⃗) = y``.
    A closing conjunct per independence atom demands, for all matching
    ``a⃗b⃗`` and ``a⃗c⃗`` tuples, a completion of ``a⃗ b⃗ c⃗`` that satisfies the
    translated formulas on the path to the atom and that is reproduced by a
    second, primed run of the quantifier prefix whose existential moves are
    tied to the unprimed ones.

    Atoms must be preprocessed: ``a⃗, b⃗, c⃗`` pairwise disjoint and ``y ∉ z⃗``.
    Independence atoms with an empty side are always true and become ``true``.
    """
    if free_vars(phi):
        raise TranslationError(f"input must be a sentence, free: {sorted(free_vars(phi))}")
    prefix, theta = _prenex_split(phi)
    xs = [v for _, v in prefix]
    fresh = FreshNames(symbols(phi))
    slots: List[IndSlot] = []
    fun_vars: List[Tuple[str, int]] = []
    translated: Dict[str, CFormula] = {}

    def build(node: Formula, path: str) -> CFormula:
        if isinstance(node, (And, Or)):
            left = build(node.left, path + "0")
            right = build(node.right, path + "1")
            out = CAnd((left, right)) if isinstance(node, And) else COr((left, right))
        elif isinstance(node, Ind):
            a, b, c = node.condition, node.left, node.right
            if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
                raise TranslationError(f"independence atom parts must be disjoint: {to_text(node)}")
            if not b or not c:
                out = CTop()
            else:
                s, t = fresh(f"S{path}"), fresh(f"T{path}")
                slots.append(IndSlot(path, node, s, t))
                out = CAnd((CRel(s, a + b), CRel(t, a + c)))
        elif isinstance(node, Dep):
            if node.determined in node.determinants:
                raise TranslationError(f"dependence atom determines one of its own arguments: {to_text(node)}")
            f = fresh(f"f{path}")
            fun_vars.append((f, len(node.determinants)))
            out = CEq(Fn(f, node.determinants), node.determined)
        elif isinstance(node, Inc):
            raise TranslationError("inclusion atoms are not supported by this translation")
        else:
            out = _literal(node)
        translated[path] = out
        return out

    varphi = build(theta, "")
    primed = {x: fresh(x + "'") for x in xs}
    chi_parts = []
    for k, (kind, x) in enumerate(prefix):
        if kind is Exists:
            earlier = c_and([CEq(xs[j], primed[xs[j]]) for j in range(k)])
            chi_parts.append(CImplies(earlier, CEq(x, primed[x])))
    replay = c_quantify(
        [(kind, primed[x]) for kind, x in prefix],
        c_and([c_substitute(varphi, primed), c_and(chi_parts)]),
    )
    omegas = []
    for slot in slots:
        a, b, c = slot.atom.condition, slot.atom.left, slot.atom.right
        abc = a + b + c
        z = [x for x in xs if x not in abc]
        path_parts = [translated[slot.path[:k]] for k in range(len(slot.path) + 1)]
        inner = c_quantify([(Exists, v) for v in z], c_and([c_and(path_parts), replay]))
        guard = CAnd((CRel(slot.left_rel, a + b), CRel(slot.right_rel, a + c)))
        omegas.append(c_quantify([(Forall, v) for v in abc], CImplies(guard, inner)))
    main = c_quantify(prefix, varphi)
    matrix = CAnd((main, c_and(omegas))) if omegas else main
    rel_vars = tuple((s.left_rel, len(s.atom.condition) + len(s.atom.left)) for s in slots) + tuple(
        (s.right_rel, len(s.atom.condition) + len(s.atom.right)) for s in slots
    )
    return ESOSentence(rel_vars, tuple(fun_vars), matrix)
