"""Finite structures, teams and the team-extension operations."""
from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Sequence, Tuple


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    relations: Tuple[Tuple[str, int], ...] = ()
    constants: Tuple[str, ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in signature: {names}")
        for name, arity in self.relations:
            if arity < 1:
                raise ValueError(f"relation {name} needs arity >= 1")

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Parse ``"R/1, E/2, const c"`` style signature descriptions."""
        rels, consts = [], []
        for item in filter(None, (p.strip() for p in text.split(","))):
            if item.startswith("const "):
                consts.append(item.split(None, 1)[1].strip())
                continue
            name, _, arity = item.partition("/")
            if not arity.isdigit():
                raise FormatError(f"bad signature entry {item!r}")
            rels.append((name.strip(), int(arity)))
        return cls(tuple(rels), tuple(consts))


@dataclass(frozen=True, eq=False)
class Structure:
    domain: Tuple[str, ...]
    relations: Mapping[str, FrozenSet[Tuple[str, ...]]] = field(default_factory=dict)
    arities: Mapping[str, int] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.domain)) != len(self.domain):
            raise ValueError("domain elements must be distinct")
        if len(self.domain) < 2:
            raise ValueError(f"domain too small: structures need at least two elements, got {len(self.domain)}")
        elems = set(self.domain)
        for name, tuples in self.relations.items():
            arity = self.arities[name]
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} of {name} does not have arity {arity}")
                if not elems.issuperset(t):
                    raise ValueError(f"tuple {t} of {name} uses an unknown element")
        for name, value in self.constants.items():
            if value not in elems:
                raise ValueError(f"constant {name} is interpreted by unknown element {value!r}")
        object.__setattr__(self, "index", {e: i for i, e in enumerate(self.domain)})

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.domain == other.domain
            and dict(self.relations) == dict(other.relations)
            and dict(self.arities) == dict(other.arities)
            and dict(self.constants) == dict(other.constants)
        )

    __hash__ = None

    @property
    def size(self) -> int:
        return len(self.domain)

    def signature(self) -> Signature:
        return Signature(tuple(self.arities.items()), tuple(self.constants))

    def to_text(self) -> str:
        lines = ["domain = " + " ".join(self.domain)]
        for name, arity in self.arities.items():
            tuples = sorted(self.relations[name], key=self.sort_key)
            if arity == 1:
                body = ",".join(t[0] for t in tuples)
            else:
                body = ", ".join("(" + ",".join(t) + ")" for t in tuples)
            lines.append(f"{name}/{arity} = {{{body}}}")
        for name, value in self.constants.items():
            lines.append(f"const {name} = {value}")
        return "\n".join(lines) + "\n"

    def sort_key(self, values: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.index[v] for v in values)


def pure_structure(size: int) -> Structure:
    return Structure(tuple(str(i) for i in range(size)))


_REL_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*/\s*(\d+)\s*=\s*(.*)$")
_CONST_LINE = re.compile(r"^const\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)$")


def _parse_tuples(body: str, arity: int):
    body = body.strip()
    if body.startswith("{"):
        if not body.endswith("}"):
            raise FormatError(f"unbalanced braces in {body!r}")
        body = body[1:-1]
    elif arity != 1:
        raise FormatError("braces are only optional for unary relations")
    body = body.strip()
    if not body:
        return []
    if arity == 1 and "(" not in body:
        return [(e,) for e in re.split(r"[\s,]+", body) if e]
    tuples = re.findall(r"\(([^()]*)\)", body)
    if re.sub(r"\([^()]*\)", "", body).replace(",", "").strip():
        raise FormatError(f"cannot read tuples from {body!r}")
    return [tuple(e for e in re.split(r"[\s,]+", t.strip()) if e) for t in tuples]


def load_structure(text: str) -> Structure:
    """Read the line-based structure format.

    ``domain = e1 e2 ...``, ``NAME/ARITY = {(a,b), ...}`` and ``const NAME = e``;
    ``#`` starts a comment.
    """
    domain = None
    relations: Dict[str, frozenset] = {}
    arities: Dict[str, int] = {}
    constants: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("domain"):
            key, _, rest = line.partition("=")
            if key.strip() != "domain":
                raise FormatError(f"line {lineno}: cannot parse {raw!r}")
            domain = tuple(e for e in re.split(r"[\s,]+", rest.strip()) if e)
            continue
        m = _CONST_LINE.match(line)
        if m:
            constants[m.group(1)] = m.group(2)
            continue
        m = _REL_LINE.match(line)
        if not m:
            raise FormatError(f"line {lineno}: cannot parse {raw!r}")
        name, arity = m.group(1), int(m.group(2))
        if name in arities:
            raise FormatError(f"line {lineno}: relation {name} declared twice")
        tuples = _parse_tuples(m.group(3), arity)
        for t in tuples:
            if len(t) != arity:
                raise FormatError(f"line {lineno}: arity mismatch for {name}: {t}")
        arities[name] = arity
        relations[name] = frozenset(tuples)
    if domain is None:
        raise FormatError("missing 'domain = ...' line")
    known = set(domain)
    for name, tuples in relations.items():
        for t in tuples:
            bad = [e for e in t if e not in known]
            if bad:
                raise FormatError(f"unknown element {bad[0]!r} in relation {name}")
    for name, value in constants.items():
        if value not in known:
            raise FormatError(f"unknown element {value!r} for constant {name}")
    try:
        return Structure(domain, relations, arities, constants)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- teams --------------------------------------------------------------------

Row = Tuple[str, ...]


@dataclass(frozen=True)
class Team:
    """A set of assignments over a common, sorted tuple of variables.

    Rows are value tuples aligned with ``variables``; the row set is a
    frozenset, so equality and hashing are structural.
    """

    variables: Tuple[str, ...]
    rows: FrozenSet[Row]

    def __post_init__(self):
        if list(self.variables) != sorted(set(self.variables)):
            raise ValueError("team variables must be sorted and distinct")
        n = len(self.variables)
        for r in self.rows:
            if len(r) != n:
                raise ValueError(f"row {r} does not match variables {self.variables}")

    @classmethod
    def build(cls, variables: Iterable[str], rows: Iterable[Mapping[str, str]]) -> "Team":
        vs = tuple(sorted(set(variables)))
        return cls(vs, frozenset(tuple(r[v] for v in vs) for r in rows))

    @classmethod
    def unit(cls) -> "Team":
        """The team containing only the empty assignment."""
        return cls((), frozenset({()}))

    @classmethod
    def empty(cls, variables: Iterable[str] = ()) -> "Team":
        return cls(tuple(sorted(set(variables))), frozenset())

    def __len__(self) -> int:
        return len(self.rows)

    def __bool__(self) -> bool:
        return bool(self.rows)

    def positions(self, vs: Sequence[str]) -> Tuple[int, ...]:
        try:
            return tuple(self.variables.index(v) for v in vs)
        except ValueError:
            missing = [v for v in vs if v not in self.variables]
            raise KeyError(f"unknown variable(s) {missing} for team over {self.variables}") from None

    def assignments(self):
        for r in self.rows:
            yield dict(zip(self.variables, r))

    def sorted_rows(self, structure: Structure):
        return sorted(self.rows, key=structure.sort_key)

    def values(self, vs: Sequence[str]) -> FrozenSet[Row]:
        """``X(v⃗)``: the set of value tuples taken by ``vs``."""
        pos = self.positions(vs)
        return frozenset(tuple(r[i] for i in pos) for r in self.rows)

    def restrict(self, vs: Iterable[str]) -> "Team":
        keep = tuple(sorted(set(vs)))
        if keep == self.variables:
            return self
        pos = self.positions(keep)
        return Team(keep, frozenset(tuple(r[i] for i in pos) for r in self.rows))

    def extend(self, v: str, choices: Callable[[Row], Iterable[str]]) -> "Team":
        """``{s[m/v] : s ∈ X, m ∈ choices(s)}``, overwriting ``v`` if present."""
        if v in self.variables:
            i = self.variables.index(v)
            rows = frozenset(r[:i] + (m,) + r[i + 1:] for r in self.rows for m in choices(r))
            return Team(self.variables, rows)
        i = bisect_left(self.variables, v)
        vs = self.variables[:i] + (v,) + self.variables[i:]
        rows = frozenset(r[:i] + (m,) + r[i:] for r in self.rows for m in choices(r))
        return Team(vs, rows)

    def universal_extension(self, v: str, structure: Structure) -> "Team":
        """``X[M/v]``."""
        dom = structure.domain
        return self.extend(v, lambda _r: dom)

    def to_text(self, structure: Structure = None) -> str:
        rows = self.sorted_rows(structure) if structure is not None else sorted(self.rows)
        lines = [",".join(self.variables)]
        if self.variables:
            lines.extend(",".join(r) for r in rows)
        return "\n".join(lines) + "\n"


def team_values(team: Team, vs: Sequence[str]) -> FrozenSet[Row]:
    return team.values(vs)


def team_restrict(team: Team, vs: Iterable[str]) -> Team:
    unknown = set(vs) - set(team.variables)
    if unknown:
        raise KeyError(f"unknown variable(s) {sorted(unknown)}")
    return team.restrict(vs)


def team_universal_extension(team: Team, v: str, structure: Structure) -> Team:
    return team.universal_extension(v, structure)


def full_team(variables: Sequence[str], structure: Structure) -> Team:
    """``{∅}[M/v1]...[M/vn]``."""
    vs = tuple(sorted(set(variables)))
    return Team(vs, frozenset(product(structure.domain, repeat=len(vs))))


def load_team(text: str, structure: Structure) -> Team:
    """Read a CSV-style team: a header of variable names, then one row per line.

    A header without variables always denotes ``{∅}``.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    if not lines:
        return Team.unit()
    header = [h.strip() for h in lines[0].split(",") if h.strip()] if lines[0] else []
    if len(set(header)) != len(header):
        raise FormatError(f"duplicate variable in header {header}")
    if not header:
        return Team.unit()
    known = set(structure.domain)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise FormatError(f"line {lineno}: ragged row, expected {len(header)} values, got {len(cells)}")
        for c in cells:
            if c not in known:
                raise FormatError(f"line {lineno}: unknown element {c!r}")
        rows.append(dict(zip(header, cells)))
    return Team.build(header, rows)
