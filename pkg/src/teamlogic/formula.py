"""Formula syntax: atoms, connectives, parsing, printing and fragment measures.

Formulas are kept in negation normal form. Negation is only representable on
relation and equality atoms; the parser pushes ``~`` through first-order
material and rejects it anywhere else.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Iterator, Optional, Sequence, Tuple, Union


@dataclass(frozen=True)
class Const:
    """A constant symbol used as a term in relation/equality atoms."""

    name: str

    def __str__(self) -> str:
        return "@" + self.name


Term = Union[str, Const]


# -- atoms ------------------------------------------------------------------

@dataclass(frozen=True)
class Rel:
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Dep:
    """``=(determinants, determined)``; empty determinants is a constancy atom."""

    determinants: Tuple[str, ...]
    determined: str


@dataclass(frozen=True)
class Ind:
    """``left ⊥_condition right``; an empty condition is a pure independence atom."""

    condition: Tuple[str, ...]
    left: Tuple[str, ...]
    right: Tuple[str, ...]


@dataclass(frozen=True)
class Inc:
    """``left ⊆ right``."""

    left: Tuple[str, ...]
    right: Tuple[str, ...]

    def __post_init__(self):
        if len(self.left) != len(self.right) or not self.left:
            raise ValueError(
                f"inclusion atom needs equal nonempty tuples, got {len(self.left)} and {len(self.right)}"
            )


# -- connectives ----------------------------------------------------------

@dataclass(frozen=True)
class Not:
    atom: Union[Rel, Eq]

    def __post_init__(self):
        if not isinstance(self.atom, (Rel, Eq)):
            raise TypeError("negation only applies to relation and equality atoms")


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


FOAtom = Union[Rel, Eq]
DependencyAtom = Union[Dep, Ind, Inc]
Atom = Union[Rel, Eq, Dep, Ind, Inc]
Formula = Union[Rel, Eq, Dep, Ind, Inc, Not, And, Or, Exists, Forall]

DEPENDENCY_ATOMS = (Dep, Ind, Inc)
LITERALS = (Rel, Eq, Not)


def pind(left: Sequence[str], right: Sequence[str]) -> Ind:
    return Ind((), tuple(left), tuple(right))


def neq(a: Term, b: Term) -> Not:
    return Not(Eq(a, b))


def conj(parts: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; raises on an empty sequence."""
    return reduce(And, parts)


def disj(parts: Iterable[Formula]) -> Formula:
    return reduce(Or, parts)


def exists_all(variables: Sequence[str], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Exists(v, body)
    return body


def forall_all(variables: Sequence[str], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Forall(v, body)
    return body


def tuple_eq(xs: Sequence[Term], ys: Sequence[Term]) -> Formula:
    """Componentwise equality of two equal-length tuples."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("tuple equality needs equal nonempty tuples")
    return conj(Eq(a, b) for a, b in zip(xs, ys))


def tuple_neq(xs: Sequence[Term], ys: Sequence[Term]) -> Formula:
    """Tuple disequality as the disjunction of component disequalities."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("tuple disequality needs equal nonempty tuples")
    return disj(neq(a, b) for a, b in zip(xs, ys))


# -- traversal ------------------------------------------------------------

def term_vars(terms: Iterable[Term]) -> Iterator[str]:
    for t in terms:
        if isinstance(t, str):
            yield t


def atom_vars(a: Atom) -> Tuple[str, ...]:
    """Variables of an atom in textual order (with repetitions)."""
    if isinstance(a, Rel):
        return tuple(term_vars(a.args))
    if isinstance(a, Eq):
        return tuple(term_vars((a.lhs, a.rhs)))
    if isinstance(a, Dep):
        return a.determinants + (a.determined,)
    if isinstance(a, Ind):
        return a.condition + a.left + a.right
    if isinstance(a, Inc):
        return a.left + a.right
    raise TypeError(f"not an atom: {a!r}")


def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, Not):
        return frozenset(atom_vars(phi.atom))
    if isinstance(phi, (And, Or)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    return frozenset(atom_vars(phi))


def all_vars(phi: Formula) -> frozenset:
    """Every variable occurring in ``phi``, free or bound."""
    if isinstance(phi, Not):
        return frozenset(atom_vars(phi.atom))
    if isinstance(phi, (And, Or)):
        return all_vars(phi.left) | all_vars(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return all_vars(phi.body) | {phi.var}
    return frozenset(atom_vars(phi))


def symbols(phi: Formula) -> frozenset:
    """Variables plus relation and constant names, for fresh-name avoidance."""
    out = set(all_vars(phi))
    for node in subformulas(phi):
        if isinstance(node, Not):
            node = node.atom
        if isinstance(node, Rel):
            out.add(node.name)
            out.update(t.name for t in node.args if isinstance(t, Const))
        elif isinstance(node, Eq):
            out.update(t.name for t in (node.lhs, node.rhs) if isinstance(t, Const))
    return frozenset(out)


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Pre-order walk over all subformulas (literals count as leaves)."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (And, Or)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Exists, Forall)):
            stack.append(node.body)


def is_first_order(phi: Formula) -> bool:
    return not any(isinstance(n, DEPENDENCY_ATOMS) for n in subformulas(phi))


def is_quantifier_free(phi: Formula) -> bool:
    return not any(isinstance(n, (Exists, Forall)) for n in subformulas(phi))


def is_dependence_only(phi: Formula) -> bool:
    """No independence or inclusion atoms: the downward-closed fragment."""
    return not any(isinstance(n, (Ind, Inc)) for n in subformulas(phi))


def map_atoms(phi: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    """Rebuild ``phi`` with every positive atom replaced by ``fn(atom)``."""
    if isinstance(phi, Not):
        return phi
    if isinstance(phi, And):
        return And(map_atoms(phi.left, fn), map_atoms(phi.right, fn))
    if isinstance(phi, Or):
        return Or(map_atoms(phi.left, fn), map_atoms(phi.right, fn))
    if isinstance(phi, Exists):
        return Exists(phi.var, map_atoms(phi.body, fn))
    if isinstance(phi, Forall):
        return Forall(phi.var, map_atoms(phi.body, fn))
    return fn(phi)


def rename_free(phi: Formula, mapping: dict) -> Formula:
    """Substitute variables for free occurrences of variables (no capture check)."""
    if not mapping:
        return phi

    def sub(v):
        return mapping.get(v, v) if isinstance(v, str) else v

    def subs(vs):
        return tuple(sub(v) for v in vs)

    if isinstance(phi, Rel):
        return Rel(phi.name, subs(phi.args))
    if isinstance(phi, Eq):
        return Eq(sub(phi.lhs), sub(phi.rhs))
    if isinstance(phi, Dep):
        return Dep(subs(phi.determinants), sub(phi.determined))
    if isinstance(phi, Ind):
        return Ind(subs(phi.condition), subs(phi.left), subs(phi.right))
    if isinstance(phi, Inc):
        return Inc(subs(phi.left), subs(phi.right))
    if isinstance(phi, Not):
        return Not(rename_free(phi.atom, mapping))
    if isinstance(phi, And):
        return And(rename_free(phi.left, mapping), rename_free(phi.right, mapping))
    if isinstance(phi, Or):
        return Or(rename_free(phi.left, mapping), rename_free(phi.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != phi.var}
    return type(phi)(phi.var, rename_free(phi.body, inner))


def negate(phi: Formula) -> Formula:
    """NNF of the classical negation of a first-order formula."""
    if isinstance(phi, (Rel, Eq)):
        return Not(phi)
    if isinstance(phi, Not):
        return phi.atom
    if isinstance(phi, And):
        return Or(negate(phi.left), negate(phi.right))
    if isinstance(phi, Or):
        return And(negate(phi.left), negate(phi.right))
    if isinstance(phi, Exists):
        return Forall(phi.var, negate(phi.body))
    if isinstance(phi, Forall):
        return Exists(phi.var, negate(phi.body))
    raise ValueError(f"cannot negate a dependency atom: {to_text(phi)}")


def implies(a: Formula, b: Formula) -> Formula:
    """Classical implication over first-order material, desugared to ``~a | b``."""
    return Or(negate(a), b)


class FreshNames:
    """Produces variable names disjoint from a set of taken names.

    A base name is returned unchanged when it is still free, otherwise an
    integer counter is appended until the result is unused.
    """

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self.counter = 0

    def __call__(self, base: str) -> str:
        name = base
        while name in self.taken:
            self.counter += 1
            name = f"{base}_{self.counter}"
        self.taken.add(name)
        return name

    def many(self, base: str, n: int) -> Tuple[str, ...]:
        if n == 1:
            return (self(base),)
        return tuple(self(f"{base}{i + 1}") for i in range(n))


# -- fragment profile ---------------------------------------------------------

@dataclass(frozen=True)
class FragmentProfile:
    max_dep_arity: Optional[int]
    max_ind_measure: Optional[int]
    max_inc_width: Optional[int]
    universal_count: int

    def __str__(self) -> str:
        def fmt(v):
            return "-" if v is None else str(v)

        return (
            f"dep={fmt(self.max_dep_arity)} ind={fmt(self.max_ind_measure)} "
            f"inc={fmt(self.max_inc_width)} forall={self.universal_count}"
        )

    def leq(self, other: "FragmentProfile") -> bool:
        def le(a, b):
            return a is None or (b is not None and a <= b)

        return (
            le(self.max_dep_arity, other.max_dep_arity)
            and le(self.max_ind_measure, other.max_ind_measure)
            and le(self.max_inc_width, other.max_inc_width)
            and self.universal_count <= other.universal_count
        )


def ind_measure(a: Ind) -> int:
    # an empty atom has no variables; clamp so the measure stays a natural number
    return max(len(set(atom_vars(a))) - 1, 0)


def classify_fragment(phi: Formula) -> FragmentProfile:
    dep = ind = inc = None
    foralls = 0

    def bump(cur, val):
        return val if cur is None else max(cur, val)

    for node in subformulas(phi):
        if isinstance(node, Dep):
            dep = bump(dep, len(node.determinants))
        elif isinstance(node, Ind):
            ind = bump(ind, ind_measure(node))
        elif isinstance(node, Inc):
            inc = bump(inc, len(node.left))
        elif isinstance(node, Forall):
            foralls += 1
    return FragmentProfile(dep, ind, inc, foralls)


# -- printing -----------------------------------------------------------------

def _term(t: Term) -> str:
    return str(t)


def _call(keyword: str, *groups: Sequence[str]) -> str:
    return keyword + "(" + "; ".join(" ".join(g) for g in groups).rstrip() + ")"


def to_text(phi: Formula) -> str:
    """Render in the ASCII grammar accepted by :func:`parse_formula`."""
    if isinstance(phi, Rel):
        return f"{phi.name}({', '.join(_term(t) for t in phi.args)})"
    if isinstance(phi, Eq):
        return f"{_term(phi.lhs)} = {_term(phi.rhs)}"
    if isinstance(phi, Not):
        if isinstance(phi.atom, Eq):
            return f"{_term(phi.atom.lhs)} != {_term(phi.atom.rhs)}"
        return "~" + to_text(phi.atom)
    if isinstance(phi, Dep):
        return _call("dep", phi.determinants, (phi.determined,))
    if isinstance(phi, Ind):
        if not phi.condition:
            return _call("pind", phi.left, phi.right)
        return _call("ind", phi.condition, phi.left, phi.right)
    if isinstance(phi, Inc):
        return _call("inc", phi.left, phi.right)
    if isinstance(phi, (And, Or)):
        op = " & " if isinstance(phi, And) else " | "
        return "(" + _operand(phi.left) + op + _operand(phi.right) + ")"
    if isinstance(phi, Exists):
        return f"E {phi.var}. {to_text(phi.body)}"
    if isinstance(phi, Forall):
        return f"A {phi.var}. {to_text(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")


def _operand(phi: Formula) -> str:
    text = to_text(phi)
    if isinstance(phi, (Exists, Forall)):
        return "(" + text + ")"
    return text


# -- parsing ------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<op>->|!=|[()\[\],;.&|~=@])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>\S))"
)
DEPENDENCY_KEYWORDS = {"dep", "ind", "pind", "inc"}
KEYWORDS = {"A", "E"} | DEPENDENCY_KEYWORDS


def _tokenize(text: str):
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group("bad") is not None:
            raise ParseError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        kind = "op" if m.group("op") is not None else "ident"
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError("unexpected input", pos)
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        kind, val, _ = self.peek()
        return kind != "eof" and val == value

    def take(self, value: Optional[str] = None):
        tok = self.peek()
        if value is not None and (tok[0] == "eof" or tok[1] != value):
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def ident(self) -> str:
        kind, val, pos = self.peek()
        if kind != "ident" or val in KEYWORDS:
            raise ParseError(f"expected identifier, found {val or 'end of input'!r}", pos)
        self.i += 1
        return val

    def parse(self) -> Formula:
        phi = self.implication()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos)
        return phi

    def implication(self) -> Formula:
        pos = self.peek()[2]
        left = self.disjunction()
        if self.at("->"):
            self.take("->")
            right = self.implication()
            if not (is_first_order(left) and is_first_order(right)):
                raise ParseError("implication is only allowed between first-order formulas", pos)
            return implies(left, right)
        return left

    def disjunction(self) -> Formula:
        phi = self.conjunction()
        while self.at("|"):
            self.take("|")
            phi = Or(phi, self.conjunction())
        return phi

    def conjunction(self) -> Formula:
        phi = self.unary()
        while self.at("&"):
            self.take("&")
            phi = And(phi, self.unary())
        return phi

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~" and kind == "op":
            self.take()
            inner = self.unary()
            if not is_first_order(inner):
                raise ParseError("negation applied to a non-first-order formula", pos)
            return negate(inner)
        if kind == "ident" and val in ("A", "E") and self.peek(1)[1] != "(":
            self.take()
            names = [self.ident()]
            while self.peek()[0] == "ident" and self.peek()[1] not in KEYWORDS:
                names.append(self.ident())
            self.take(".")
            body = self.implication()
            build = forall_all if val == "A" else exists_all
            return build(names, body)
        if val == "(" and kind == "op":
            self.take("(")
            phi = self.implication()
            self.take(")")
            return phi
        if val == "[" and kind == "op":
            return self.tuple_comparison()
        if kind == "ident" and val in ("dep", "ind", "pind", "inc"):
            return self.dependency_atom()
        return self.first_order_atom()

    def var_list(self, stops=(";", ")")) -> Tuple[str, ...]:
        out = []
        while not any(self.at(s) for s in stops):
            if self.at(","):
                self.take(",")
                continue
            out.append(self.ident())
        return tuple(out)

    def dependency_atom(self) -> Formula:
        _, kw, pos = self.take()
        self.take("(")
        groups = [self.var_list()]
        while self.at(";"):
            self.take(";")
            groups.append(self.var_list())
        self.take(")")
        expected = {"dep": 2, "ind": 3, "pind": 2, "inc": 2}[kw]
        if len(groups) != expected:
            raise ParseError(f"{kw} takes {expected} ';'-separated groups, got {len(groups)}", pos)
        if kw == "dep":
            if len(groups[1]) != 1:
                raise ParseError("dep needs exactly one determined variable", pos)
            return Dep(groups[0], groups[1][0])
        if kw == "ind":
            return Ind(*groups)
        if kw == "pind":
            return Ind((), groups[0], groups[1])
        if len(groups[0]) != len(groups[1]) or not groups[0]:
            raise ParseError("inc needs two nonempty tuples of equal length", pos)
        return Inc(groups[0], groups[1])

    def term(self) -> Term:
        if self.at("@"):
            self.take("@")
            return Const(self.ident())
        return self.ident()

    def first_order_atom(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "ident" and self.peek(1)[1] == "(" and val not in DEPENDENCY_KEYWORDS:
            self.take()
            self.take("(")
            args = []
            while not self.at(")"):
                if self.at(","):
                    self.take(",")
                    continue
                args.append(self.term())
            self.take(")")
            if not args:
                raise ParseError("relation atoms need at least one argument", pos)
            return Rel(val, tuple(args))
        lhs = self.term()
        if self.at("="):
            self.take("=")
            return Eq(lhs, self.term())
        if self.at("!="):
            self.take("!=")
            return neq(lhs, self.term())
        kind, val, pos = self.peek()
        raise ParseError(f"expected '=' or '!=', found {val or 'end of input'!r}", pos)

    def tuple_comparison(self) -> Formula:
        pos = self.peek()[2]
        left = self.bracketed()
        if self.at("="):
            self.take("=")
            op = tuple_eq
        else:
            self.take("!=")
            op = tuple_neq
        right = self.bracketed()
        if len(left) != len(right) or not left:
            raise ParseError("tuple comparison needs equal nonempty tuples", pos)
        return op(left, right)

    def bracketed(self) -> Tuple[Term, ...]:
        self.take("[")
        out = []
        while not self.at("]"):
            if self.at(","):
                self.take(",")
                continue
            out.append(self.term())
        self.take("]")
        return tuple(out)


def parse_formula(text: str) -> Formula:
    """Parse the ASCII formula grammar into an NNF formula tree.

    ``A x.`` / ``E x.`` quantify (the body extends as far right as possible),
    ``&`` binds tighter than ``|``, which binds tighter than ``->``. Both
    binary connectives associate to the left.
    """
    return _Parser(text).parse()
