"""Model checking for lax and strict team semantics.

The search is complete: disjunctions enumerate every admissible split and
existential quantifiers every admissible choice function. Several sound
prunings keep it tractable at desk scale:

* first-order subformulas are decided row by row (flatness);
* in lax mode every subformula is evaluated on the restriction of the team
  to its free variables (locality), and results are memoized per call;
* a row can only belong to a team satisfying ``ψ`` if it satisfies the
  first-order skeleton of ``ψ`` (dependency atoms read as true), which
  restricts both split choices and witness values;
* conjuncts reachable from an existential body through ``∧``/``∃``/``∀``
  only see a projection of the team that later quantifiers preserve, so they
  are checked as soon as their variables are bound;
* downward-closed subformulas only need single-valued witnesses and
  disjoint splits;
* in lax mode existential quantifiers are first pushed inwards: through
  disjunctions, and past conjuncts and subformulas that do not mention the
  quantified variable;
* in strict mode rows that agree on every variable of the subformula are
  interchangeable when the remaining columns tag rows uniquely, so witnesses
  are enumerated as multisets.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Dict, List, Mapping, Optional, Sequence

from .formula import (
    And,
    Const,
    Dep,
    Eq,
    Exists,
    Forall,
    Formula,
    Inc,
    Ind,
    Not,
    Or,
    Rel,
    all_vars,
    free_vars,
    is_dependence_only,
    is_first_order,
    to_text,
)
from .model import Structure, Team

_MEMO_LIMIT = 200_000


class Semantics(enum.Enum):
    LAX = "lax"
    STRICT = "strict"

    def __str__(self) -> str:
        return self.value


LAX = Semantics.LAX
STRICT = Semantics.STRICT


@dataclass(frozen=True)
class EvalBudget:
    """Caps on the exponential search; exceeding one raises :class:`BudgetExhausted`."""

    max_team_rows: int = 20_000
    max_branching: int = 2_000_000
    max_nodes: Optional[int] = 50_000_000

    def __post_init__(self):
        if self.max_team_rows <= 0 or self.max_branching <= 0:
            raise ValueError("budget limits must be positive")
        if self.max_nodes is not None and self.max_nodes <= 0:
            raise ValueError("budget limits must be positive")


DEFAULT_BUDGET = EvalBudget()


class BudgetExhausted(RuntimeError):
    """The search hit a budget cap; the verdict is unknown, not false."""


# -- Tarski semantics -----------------------------------------------------------

def _value(M: Structure, env: Mapping[str, str], t) -> str:
    if isinstance(t, Const):
        try:
            return M.constants[t.name]
        except KeyError:
            raise KeyError(f"structure has no constant {t.name!r}") from None
    return env[t]


def _rel_holds(M: Structure, env, a: Rel) -> bool:
    try:
        tuples = M.relations[a.name]
    except KeyError:
        raise KeyError(f"structure has no relation {a.name!r}") from None
    if M.arities[a.name] != len(a.args):
        raise ValueError(f"relation {a.name} has arity {M.arities[a.name]}, used with {len(a.args)}")
    return tuple(_value(M, env, t) for t in a.args) in tuples


def holds(M: Structure, env: Mapping[str, str], phi: Formula, atoms_true: bool = False) -> bool:
    """Classical satisfaction of a first-order formula by one assignment.

    With ``atoms_true`` dependency atoms are read as true, which evaluates the
    first-order skeleton of an arbitrary formula.
    """
    if isinstance(phi, Rel):
        return _rel_holds(M, env, phi)
    if isinstance(phi, Eq):
        return _value(M, env, phi.lhs) == _value(M, env, phi.rhs)
    if isinstance(phi, Not):
        return not holds(M, env, phi.atom)
    if isinstance(phi, And):
        return holds(M, env, phi.left, atoms_true) and holds(M, env, phi.right, atoms_true)
    if isinstance(phi, Or):
        return holds(M, env, phi.left, atoms_true) or holds(M, env, phi.right, atoms_true)
    if isinstance(phi, Exists):
        inner = dict(env)
        for m in M.domain:
            inner[phi.var] = m
            if holds(M, inner, phi.body, atoms_true):
                return True
        return False
    if isinstance(phi, Forall):
        inner = dict(env)
        for m in M.domain:
            inner[phi.var] = m
            if not holds(M, inner, phi.body, atoms_true):
                return False
        return True
    if atoms_true:
        return True
    raise ValueError(f"dependency atom in a first-order context: {to_text(phi)}")


# -- dependency atoms -----------------------------------------------------------

def atom_holds(X: Team, a) -> bool:
    """Team satisfaction of a dependence, independence or inclusion atom."""
    if not X.rows:
        return True
    if isinstance(a, Dep):
        px = X.positions(a.determinants)
        (py,) = X.positions((a.determined,))
        seen = {}
        for r in X.rows:
            key = tuple(r[i] for i in px)
            if seen.setdefault(key, r[py]) != r[py]:
                return False
        return True
    if isinstance(a, Ind):
        pa, pb, pc = X.positions(a.condition), X.positions(a.left), X.positions(a.right)
        groups: Dict[tuple, tuple] = {}
        for r in X.rows:
            key = tuple(r[i] for i in pa)
            b = tuple(r[i] for i in pb)
            c = tuple(r[i] for i in pc)
            g = groups.get(key)
            if g is None:
                g = groups[key] = (set(), set(), set())
            g[0].add(b)
            g[1].add(c)
            g[2].add((b, c))
        # the observed pairs always lie inside the product, so counting suffices
        return all(len(pairs) == len(bs) * len(cs) for bs, cs, pairs in groups.values())
    if isinstance(a, Inc):
        return X.values(a.left) <= X.values(a.right)
    raise TypeError(f"not a dependency atom: {a!r}")


def eval_flat(M: Structure, X: Team, phi: Formula) -> bool:
    """Flat evaluation of a first-order formula: every row satisfies it classically."""
    if not is_first_order(phi):
        raise ValueError("eval_flat needs a first-order formula")
    return all(holds(M, env, phi) for env in X.assignments())


def is_x_universal(X: Team, xs: Sequence[str], M: Structure) -> bool:
    """Exactly one row of ``X`` per tuple of values for ``xs``."""
    if len(set(xs)) != len(xs):
        raise ValueError("x-universality needs distinct variables")
    pos = X.positions(xs)
    counts = Counter(tuple(r[i] for i in pos) for r in X.rows)
    return len(counts) == M.size ** len(xs) and all(c == 1 for c in counts.values())


# -- the search -------------------------------------------------------------------

@dataclass
class _Info:
    free: tuple
    occ: frozenset
    fo: bool
    dc: bool
    guards: tuple = ()


_END = object()


def _conjuncts(phi: Formula) -> list:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


def _nonempty_subsets(values: Sequence[str]) -> List[tuple]:
    """Full set first, then by increasing size."""
    n = len(values)
    out = [tuple(values)]
    for k in range(1, n):
        out.extend(combinations(values, k))
    return out


class _Search:
    def __init__(self, M: Structure, sem: Semantics, budget: EvalBudget):
        self.M = M
        self.lax = sem is LAX
        self.budget = budget
        self.info: Dict[int, _Info] = {}
        self.memo: Dict[tuple, bool] = {}
        self.skel: Dict[tuple, bool] = {}
        self.pos_cache: Dict[tuple, tuple] = {}
        self.nodes = 0

    # analysis

    def analyze(self, phi: Formula) -> _Info:
        key = id(phi)
        if key in self.info:
            return self.info[key]
        if isinstance(phi, (And, Or)):
            self.analyze(phi.left)
            self.analyze(phi.right)
        elif isinstance(phi, (Exists, Forall)):
            self.analyze(phi.body)
        info = _Info(
            free=tuple(sorted(free_vars(phi))),
            occ=all_vars(phi),
            fo=is_first_order(phi),
            dc=is_dependence_only(phi),
        )
        if isinstance(phi, Exists) and not info.fo:
            info.guards = tuple(self._guards(phi))
        self.info[key] = info
        return info

    def _guards(self, node: Exists):
        """Conjuncts under ``node`` reachable through ∧/∃/∀ whose variables stay bound as here."""
        out = []
        stack = [(node.body, frozenset())]
        while stack:
            phi, bound = stack.pop()
            if isinstance(phi, And):
                stack.append((phi.right, bound))
                stack.append((phi.left, bound))
            elif isinstance(phi, (Exists, Forall)):
                stack.append((phi.body, bound | {phi.var}))
            else:
                fv = free_vars(phi)
                if fv & bound:
                    continue
                # strict satisfaction of compound formulas is not determined by the projection
                if not self.lax and isinstance(phi, Or) and not is_first_order(phi):
                    continue
                out.append(phi)
        return out

    # helpers

    def tick(self):
        self.nodes += 1
        if self.budget.max_nodes is not None and self.nodes > self.budget.max_nodes:
            raise BudgetExhausted(f"node budget of {self.budget.max_nodes} exhausted")

    def positions(self, phi: Formula, X: Team) -> tuple:
        key = (id(phi), X.variables)
        pos = self.pos_cache.get(key)
        if pos is None:
            pos = self.pos_cache[key] = X.positions(self.info[id(phi)].free)
        return pos

    def row_holds(self, phi: Formula, X: Team, row: tuple, skeleton: bool) -> bool:
        info = self.info[id(phi)]
        pos = self.positions(phi, X)
        proj = tuple(row[i] for i in pos)
        key = (id(phi), skeleton, proj)
        hit = self.skel.get(key)
        if hit is None:
            hit = self.skel[key] = holds(self.M, dict(zip(info.free, proj)), phi, atoms_true=skeleton)
        return hit

    def _strict_groups(self, X: Team, rows: Sequence[tuple], keep: frozenset) -> List[List[tuple]]:
        """Partition rows into interchangeable classes (singletons when symmetry is unsafe)."""
        hidden = [i for i, v in enumerate(X.variables) if v not in keep]
        if hidden:
            tags = {tuple(r[i] for i in hidden) for r in rows}
            if len(tags) == len(rows):
                shown = [i for i, v in enumerate(X.variables) if v in keep]
                groups: Dict[tuple, list] = {}
                for r in rows:
                    groups.setdefault(tuple(r[i] for i in shown), []).append(r)
                return list(groups.values())
        return [[r] for r in rows]

    def _memo_key(self, phi: Formula, X: Team):
        if self.lax:
            return (id(phi), X)
        occ = self.info[id(phi)].occ
        hidden = [i for i, v in enumerate(X.variables) if v not in occ]
        if hidden and len({tuple(r[i] for i in hidden) for r in X.rows}) == len(X.rows):
            shown = tuple(i for i, v in enumerate(X.variables) if v in occ)
            ms = Counter(tuple(r[i] for i in shown) for r in X.rows)
            return (id(phi), tuple(X.variables[i] for i in shown), frozenset(ms.items()))
        return (id(phi), X)

    # satisfaction

    def sat(self, phi: Formula, X: Team) -> bool:
        if not X.rows:
            return True
        info = self.info[id(phi)]
        if self.lax:
            X = X.restrict(info.free)
        if info.fo:
            return all(self.row_holds(phi, X, r, False) for r in X.rows)
        if len(X.rows) > self.budget.max_team_rows:
            raise BudgetExhausted(f"team of {len(X.rows)} rows exceeds max_team_rows")
        key = self._memo_key(phi, X)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.tick()
        if isinstance(phi, (Dep, Ind, Inc)):
            res = atom_holds(X, phi)
        elif isinstance(phi, And):
            first, second = phi.left, phi.right
            if self.info[id(second)].fo and not self.info[id(first)].fo:
                first, second = second, first
            res = self.sat(first, X) and self.sat(second, X)
        elif isinstance(phi, Or):
            res = self._or(phi, X)
        elif isinstance(phi, Exists):
            res = self._exists(phi, X)
        elif isinstance(phi, Forall):
            res = self.sat(phi.body, X.universal_extension(phi.var, self.M))
        else:
            raise TypeError(f"not a formula: {phi!r}")
        if len(self.memo) >= _MEMO_LIMIT:
            self.memo.clear()
        self.memo[key] = res
        return res

    def _backtrack(self, options: Sequence[Sequence], ok_partial, ok_full, what: str) -> bool:
        """Depth-first search over one option per position, pruning dead prefixes."""
        n = len(options)
        if n == 0:
            return ok_full([])
        choice: list = [None] * n
        iters = [iter(options[0])]
        steps = 0
        while iters:
            k = len(iters) - 1
            opt = next(iters[-1], _END)
            if opt is _END:
                iters.pop()
                continue
            steps += 1
            if steps > self.budget.max_branching:
                raise BudgetExhausted(f"{what} budget of {self.budget.max_branching} choices exhausted")
            self.tick()
            choice[k] = opt
            if ok_partial is not None and k + 1 < n and not ok_partial(choice, k + 1):
                continue
            if k + 1 == n:
                if ok_full(choice):
                    return True
            else:
                iters.append(iter(options[k + 1]))
        return False

    def _or(self, phi: Or, X: Team) -> bool:
        left, right = phi.left, phi.right
        rows = sorted(X.rows)
        must_left, must_right, free = [], [], []
        for r in rows:
            a = self.row_holds(left, X, r, True)
            b = self.row_holds(right, X, r, True)
            if not a and not b:
                return False
            if not b:
                must_left.append(r)
            elif not a:
                must_right.append(r)
            else:
                free.append(r)
        # a flat side can absorb every row it accepts, leaving a sandwich problem for the other
        if self.info[id(left)].fo:
            return self._sandwich(right, X.variables, must_right, must_right + free)
        if self.info[id(right)].fo:
            return self._sandwich(left, X.variables, must_left, must_left + free)
        ldc, rdc = self.info[id(left)].dc, self.info[id(right)].dc
        if not self.lax:
            groups = self._strict_groups(X, free, self.info[id(phi)].occ)
            options = [range(len(g), -1, -1) for g in groups]

            def split(choice, k):
                ys, zs = list(must_left), list(must_right)
                for g, c in zip(groups, choice[:k]):
                    ys.extend(g[:c])
                    zs.extend(g[c:])
                return Team(X.variables, frozenset(ys)), Team(X.variables, frozenset(zs))
        else:
            opts = ("L", "R") if ldc or rdc else ("B", "L", "R")
            options = [opts] * len(free)

            def split(choice, k):
                ys, zs = list(must_left), list(must_right)
                for r, c in zip(free, choice[:k]):
                    if c != "R":
                        ys.append(r)
                    if c != "L":
                        zs.append(r)
                return Team(X.variables, frozenset(ys)), Team(X.variables, frozenset(zs))

        if (ldc and not self.sat(left, Team(X.variables, frozenset(must_left)))) or (
            rdc and not self.sat(right, Team(X.variables, frozenset(must_right)))
        ):
            return False

        def ok_partial(choice, k):
            Y, Z = split(choice, k)
            return (not ldc or self.sat(left, Y)) and (not rdc or self.sat(right, Z))

        def ok_full(choice):
            Y, Z = split(choice, len(choice))
            return self.sat(left, Y) and self.sat(right, Z)

        return self._backtrack(options, ok_partial if ldc or rdc else None, ok_full, "disjunction split")

    def _sandwich(self, phi: Formula, variables: tuple, lower: list, upper: list) -> bool:
        """Is there a team ``Z`` with ``lower ⊆ Z ⊆ upper`` satisfying ``phi``?"""
        if not lower:
            return True
        if self.info[id(phi)].dc:
            return self.sat(phi, Team(variables, frozenset(lower)))
        probe = Team(variables, frozenset())
        parts = _conjuncts(phi)
        flat = [p for p in parts if self.info[id(p)].fo]
        rest = [p for p in parts if not self.info[id(p)].fo]
        if flat:
            def ok(r):
                return all(self.row_holds(p, probe, r, False) for p in flat)

            if not all(ok(r) for r in lower):
                return False
            upper = [r for r in upper if ok(r)]
        if len(rest) == 1 and isinstance(rest[0], Inc):
            # inclusion atoms are closed under unions: test against the largest satisfying subteam
            a = rest[0]
            px, py = probe.positions(a.left), probe.positions(a.right)
            team = set(upper)
            while True:
                targets = {tuple(r[i] for i in py) for r in team}
                kept = {r for r in team if tuple(r[i] for i in px) in targets}
                if len(kept) == len(team):
                    break
                team = kept
            return team.issuperset(lower)
        if len(rest) == 1 and isinstance(rest[0], Ind):
            # every combination forced by the lower team must be available in the upper team
            a = rest[0]
            pa, pb, pc = probe.positions(a.condition), probe.positions(a.left), probe.positions(a.right)
            available = {(tuple(r[i] for i in pa), tuple(r[i] for i in pb), tuple(r[i] for i in pc)) for r in upper}
            groups: Dict[tuple, tuple] = {}
            for r in lower:
                g = groups.setdefault(tuple(r[i] for i in pa), (set(), set()))
                g[0].add(tuple(r[i] for i in pb))
                g[1].add(tuple(r[i] for i in pc))
            return all((k, b, c) in available for k, (bs, cs) in groups.items() for b in bs for c in cs)
        base = frozenset(lower)
        extras = [r for r in upper if r not in base]
        if self.lax:
            # only the projection on the free variables matters; take whole classes
            pos = probe.positions(self.info[id(phi)].free)
            classes: Dict[tuple, list] = {}
            for r in extras:
                classes.setdefault(tuple(r[i] for i in pos), []).append(r)
            units = list(classes.values())
        else:
            units = [[r] for r in extras]

        def ok_full(choice):
            rows = set(base)
            for unit, take in zip(units, choice):
                if take:
                    rows.update(unit)
            return self.sat(phi, Team(variables, frozenset(rows)))

        return self._backtrack([(True, False)] * len(units), None, ok_full, "subteam")

    def _lax_cover(self, body, v, rows, put, ext_vars, cands) -> Optional[bool]:
        """Decide a lax existential whose body is first-order conjuncts plus one atom.

        Returns ``None`` when the body has another shape. ``cands`` already
        holds, per row, the values satisfying the first-order conjuncts.
        """
        parts = _conjuncts(body)
        rest = [p for p in parts if not self.info[id(p)].fo]
        if len(rest) != 1 or not isinstance(rest[0], (Inc, Ind)):
            return None
        atom = rest[0]
        probe = Team(ext_vars, frozenset())
        if isinstance(atom, Inc):
            # closed under unions: shrink all candidate rows to the largest satisfying team
            px, py = probe.positions(atom.left), probe.positions(atom.right)
            team = {put(r, m) for r in rows for m in cands[r]}
            while True:
                targets = {tuple(e[i] for i in py) for e in team}
                kept = {e for e in team if tuple(e[i] for i in px) in targets}
                if len(kept) == len(team):
                    break
                team = kept
            return all(any(put(r, m) in team for m in cands[r]) for r in rows)
        cond, left, right = atom.condition, atom.left, atom.right
        if v in cond or (v in left and v in right) or (v not in left and v not in right):
            return None
        if v in left:
            left, right = right, left
        # v occurs on the right only: per condition value, the right tuples that
        # can be paired with every left tuple are exactly the usable witnesses
        iv = ext_vars.index(v)
        pa, pb, pc = probe.positions(cond), probe.positions(left), probe.positions(right)
        pc_rest = tuple(i for i in pc if i != iv)
        avail: Dict[tuple, set] = {}
        lefts: Dict[tuple, set] = {}
        keys = {}
        for r in rows:
            e = put(r, self.M.domain[0])
            a, b, c = tuple(e[i] for i in pa), tuple(e[i] for i in pb), tuple(e[i] for i in pc_rest)
            keys[r] = (a, c)
            lefts.setdefault(a, set()).add(b)
            avail.setdefault((a, b, c), set()).update(cands[r])
        usable: Dict[tuple, set] = {}
        for r in rows:
            a, c = keys[r]
            if (a, c) not in usable:
                sets = [avail.get((a, b, c), set()) for b in lefts[a]]
                usable[(a, c)] = set.intersection(*sets)
            if not usable[(a, c)].intersection(cands[r]):
                return False
        return True

    def _exists(self, phi: Exists, X: Team) -> bool:
        info = self.info[id(phi)]
        v, body = phi.var, phi.body
        early, late = [], []
        for g in info.guards:
            (late if v in self.info[id(g)].free else early).append(g)
        for g in early:
            if not self.sat(g, X):
                return False
        rows = sorted(X.rows)
        if v in X.variables:
            ext_vars = X.variables
            i = X.variables.index(v)

            def put(r, m):
                return r[:i] + (m,) + r[i + 1:]
        else:
            ext_vars = X.extend(v, lambda _r: ()).variables
            i = ext_vars.index(v)

            def put(r, m):
                return r[:i] + (m,) + r[i:]
        probe = Team(ext_vars, frozenset())
        cands = {}
        for r in rows:
            cs = tuple(m for m in self.M.domain if self.row_holds(body, probe, put(r, m), True))
            if not cs:
                return False
            cands[r] = cs

        if self.lax:
            quick = self._lax_cover(body, v, rows, put, ext_vars, cands)
            if quick is not None:
                return quick

        if not self.lax:
            groups = self._strict_groups(X, rows, info.occ - {v})
            options = [list(combinations_with_replacement(cands[g[0]], len(g))) for g in groups]

            def build(choice, k):
                return Team(ext_vars, frozenset(
                    put(r, m) for g, ms in zip(groups, choice[:k]) for r, m in zip(g, ms)))
        else:
            if self.info[id(body)].dc:
                options = [[(m,) for m in cands[r]] for r in rows]
            else:
                options = [_nonempty_subsets(cands[r]) for r in rows]

            def build(choice, k):
                return Team(ext_vars, frozenset(put(r, m) for r, ms in zip(rows, choice[:k]) for m in ms))

        prunes = [g for g in late if self.info[id(g)].dc]
        if self.info[id(body)].dc and body not in late:
            prunes.append(body)

        def ok_partial(choice, k):
            Y = build(choice, k)
            return all(self.sat(g, Y) for g in prunes)

        def ok_full(choice):
            Y = build(choice, len(choice))
            return all(self.sat(g, Y) for g in late) and self.sat(body, Y)

        return self._backtrack(options, ok_partial if prunes else None, ok_full, "witness enumeration")


def _split_and(phi: Formula) -> List[Formula]:
    if isinstance(phi, And):
        return _split_and(phi.left) + _split_and(phi.right)
    return [phi]


def _rebuild_and(parts: List[Formula]) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def _push_exists(v: str, body: Formula) -> Formula:
    if v not in free_vars(body):
        return body
    if isinstance(body, Or):
        return Or(_push_exists(v, body.left), _push_exists(v, body.right))
    if isinstance(body, And):
        parts = _split_and(body)
        outside = [p for p in parts if v not in free_vars(p)]
        if outside:
            inside = _rebuild_and([p for p in parts if v in free_vars(p)])
            return _rebuild_and(outside + [_push_exists(v, inside)])
    return Exists(v, body)


def miniscope(phi: Formula) -> Formula:
    """Push existential quantifiers inwards; preserves lax team semantics.

    Under lax semantics ``∃v(ψ ∨ θ)`` is equivalent to ``∃vψ ∨ ∃vθ``, and by
    locality ``∃v(ψ ∧ θ)`` to ``ψ ∧ ∃vθ`` when ``v`` is not free in ``ψ``.
    Neither holds for strict semantics.
    """
    if isinstance(phi, And):
        return And(miniscope(phi.left), miniscope(phi.right))
    if isinstance(phi, Or):
        return Or(miniscope(phi.left), miniscope(phi.right))
    if isinstance(phi, Forall):
        return Forall(phi.var, miniscope(phi.body))
    if isinstance(phi, Exists):
        return _push_exists(phi.var, miniscope(phi.body))
    return phi


def evaluate(
    M: Structure,
    X: Team,
    phi: Formula,
    sem: Semantics = LAX,
    budget: EvalBudget = DEFAULT_BUDGET,
) -> bool:
    """Decide ``M ⊨_X φ`` under the given semantics.

    Raises :class:`BudgetExhausted` when the search exceeds ``budget`` and
    ``KeyError`` when a free variable of ``phi`` is missing from the team.
    """
    missing = free_vars(phi) - set(X.variables)
    if missing:
        raise KeyError(f"free variable(s) {sorted(missing)} missing from the team")
    search = _Search(M, Semantics(sem), budget)
    if search.lax:
        phi = miniscope(phi)
    search.analyze(phi)
    return search.sat(phi, X)
