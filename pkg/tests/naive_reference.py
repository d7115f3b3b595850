"""Direct transcription of the lax and strict team-semantics rules.

No memoization, no pruning, no flatness shortcut: every split and every
choice function is enumerated. Only usable on tiny inputs; it exists to
cross-check the real evaluator.
"""
from itertools import product

from teamlogic.formula import And, Const, Dep, Eq, Exists, Forall, Inc, Ind, Not, Or, Rel


def _val(M, s, t):
    return M.constants[t.name] if isinstance(t, Const) else s[t]


def _assignments(team):
    return [dict(a) for a in team]


def _freeze(assignments):
    return frozenset(frozenset(s.items()) for s in assignments)


def _subsets(items):
    items = list(items)
    for mask in range(1 << len(items)):
        yield [x for i, x in enumerate(items) if mask >> i & 1]


def naive_sat(M, team, phi, strict):
    """``team`` is a frozenset of frozensets of (variable, value) pairs."""
    rows = _assignments(team)
    if isinstance(phi, Rel):
        return all(tuple(_val(M, s, t) for t in phi.args) in M.relations[phi.name] for s in rows)
    if isinstance(phi, Eq):
        return all(_val(M, s, phi.lhs) == _val(M, s, phi.rhs) for s in rows)
    if isinstance(phi, Not):
        return all(not naive_sat(M, _freeze([s]), phi.atom, strict) for s in rows)
    if isinstance(phi, Dep):
        return all(
            s[phi.determined] == t[phi.determined]
            for s in rows
            for t in rows
            if all(s[x] == t[x] for x in phi.determinants)
        )
    if isinstance(phi, Ind):
        def part(s, vs):
            return tuple(s[v] for v in vs)

        return all(
            any(
                part(u, phi.condition + phi.left) == part(s, phi.condition + phi.left)
                and part(u, phi.right) == part(t, phi.right)
                for u in rows
            )
            for s in rows
            for t in rows
            if part(s, phi.condition) == part(t, phi.condition)
        )
    if isinstance(phi, Inc):
        return all(
            any(tuple(t[y] for y in phi.right) == tuple(s[x] for x in phi.left) for t in rows)
            for s in rows
        )
    if isinstance(phi, And):
        return naive_sat(M, team, phi.left, strict) and naive_sat(M, team, phi.right, strict)
    if isinstance(phi, Or):
        labels = ("L", "R") if strict else ("L", "R", "B")
        for choice in product(labels, repeat=len(rows)):
            ys = [s for s, c in zip(rows, choice) if c != "R"]
            zs = [s for s, c in zip(rows, choice) if c != "L"]
            if naive_sat(M, _freeze(ys), phi.left, strict) and naive_sat(M, _freeze(zs), phi.right, strict):
                return True
        return False
    if isinstance(phi, Exists):
        if strict:
            options = [[m] for m in M.domain]
        else:
            options = [sub for sub in _subsets(M.domain) if sub]
        for choice in product(options, repeat=len(rows)):
            ext = [{**s, phi.var: m} for s, ms in zip(rows, choice) for m in ms]
            if naive_sat(M, _freeze(ext), phi.body, strict):
                return True
        return False
    if isinstance(phi, Forall):
        ext = [{**s, phi.var: m} for s in rows for m in M.domain]
        return naive_sat(M, _freeze(ext), phi.body, strict)
    raise TypeError(phi)


def naive_eval(M, X, phi, strict=False):
    """Evaluate on a :class:`teamlogic.model.Team`."""
    team = _freeze(X.assignments())
    return naive_sat(M, team, phi, strict)
