"""Command-line entry point: ``teamlogic eval|rewrite|classify|equiv|check``."""
from __future__ import annotations

import argparse
import re
import sys
from typing import List, Optional, Sequence, TextIO

from .formula import Formula, ParseError, classify_fragment, parse_formula, to_text
from .model import FormatError, Signature, Structure, Team, load_structure, load_team, pure_structure
from .semantics import BudgetExhausted, EvalBudget, Semantics, evaluate

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

PASS_NAMES = (
    "dep-to-ind",
    "split-ind",
    "inc-to-pind",
    "dep-to-pind",
    "prenex",
    "counting",
    "strict-inc-nf",
    "collapse-1forall",
    "collapse-2forall",
    "ind-to-eso",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_COUNTING = re.compile(r"^\s*counting\s+(\d+)\s*$")


def read_formula(text: Optional[str], path: Optional[str]) -> Formula:
    if (text is None) == (path is None):
        raise UsageError("give exactly one of --formula and --formula-file")
    if path is not None:
        with open(path) as fh:
            text = fh.read()
    m = _COUNTING.match(text)
    if m:
        from .rewrite import counting_sentence

        n = int(m.group(1))
        if n < 1:
            raise UsageError("counting needs n >= 1")
        return counting_sentence(n)
    return parse_formula(text)


def read_structure(source: str) -> Structure:
    m = re.fullmatch(r"m(\d+)", source)
    if m:
        return pure_structure(int(m.group(1)))
    with open(source) as fh:
        return load_structure(fh.read())


def read_team(source: Optional[str], M: Structure) -> Team:
    if source is None or source == "unit":
        return Team.unit()
    if source == "empty":
        return Team.empty()
    m = re.fullmatch(r"singleton-([A-Za-z_][A-Za-z0-9_]*)", source)
    if m:
        return Team((m.group(1),), frozenset({(M.domain[0],)}))
    with open(source) as fh:
        return load_team(fh.read(), M)


def _budget(args) -> EvalBudget:
    return EvalBudget(args.max_team_rows, args.max_branching, args.max_nodes)


def _emit(out: TextIO, args, text: str, **machine):
    if args.format == "machine":
        for k, v in machine.items():
            out.write(f"{k}={v}\n")
    else:
        out.write(text + "\n")


def _cmd_eval(args, out) -> int:
    phi = read_formula(args.formula, args.formula_file)
    M = read_structure(args.structure)
    X = read_team(args.team, M)
    try:
        result = evaluate(M, X, phi, Semantics(args.sem), _budget(args))
    except BudgetExhausted as exc:
        _emit(out, args, "budget-exhausted", result="budget-exhausted", reason=str(exc))
        return EXIT_BUDGET
    word = "true" if result else "false"
    _emit(out, args, word, result=word, semantics=args.sem)
    return EXIT_OK if result else EXIT_FALSE


def _cmd_rewrite(args, out) -> int:
    from . import rewrite as rw

    if args.list:
        for name in PASS_NAMES:
            out.write(name + "\n")
        return EXIT_OK
    if args.pass_name is None:
        raise UsageError("rewrite needs --pass (or --list)")
    if args.pass_name == "counting":
        if args.n is None:
            raise UsageError("the counting pass needs --n")
        if args.n < 1:
            raise UsageError("counting needs n >= 1")
        result = to_text(rw.counting_sentence(args.n))
    else:
        phi = read_formula(args.formula, args.formula_file)
        if args.pass_name == "ind-to-eso":
            from .eso import translate_ind_to_eso

            result = translate_ind_to_eso(phi).to_text()
        elif args.pass_name == "inc-to-pind":
            result = to_text(rw.inc_to_pure_ind_all(phi, duplicate_guard=args.duplicate_guard))
        else:
            result = to_text(rw.PASSES[args.pass_name](phi))
    _emit(out, args, result, formula=result)
    return EXIT_OK


def _cmd_classify(args, out) -> int:
    phi = read_formula(args.formula, args.formula_file)
    p = classify_fragment(phi)

    def show(v):
        return "-" if v is None else str(v)

    _emit(
        out, args, str(p),
        dep=show(p.max_dep_arity), ind=show(p.max_ind_measure), inc=show(p.max_inc_width), forall=p.universal_count,
    )
    return EXIT_OK


def _cmd_equiv(args, out) -> int:
    from .formula import free_vars
    from .oracle import EquivalenceTask, run_task

    left = read_formula(args.left, None)
    right = read_formula(args.right, None)
    if args.vars is None:
        team_vars = tuple(sorted(free_vars(left) | free_vars(right)))
    else:
        team_vars = tuple(v for v in re.split(r"[\s,]+", args.vars) if v)
    try:
        task = EquivalenceTask(
            "equiv", left, right, Signature.parse(args.signature), args.max_domain, team_vars,
            Semantics(args.sem_left or args.sem), Semantics(args.sem_right or args.sem),
            args.max_rows, args.sentence,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_task(task, _budget(args))
    paths: List[str] = []
    if result.counterexample is not None and args.witness_dir:
        paths = list(result.counterexample.write(args.witness_dir, "equiv"))
    _emit(out, args, result.line(paths), equiv=result.status, **({"detail": result.detail} if result.detail else {}))
    return {"PASS": EXIT_OK, "FAIL": EXIT_FALSE, "BUDGET": EXIT_BUDGET}[result.status]


def _cmd_check(args, out) -> int:
    from .oracle import PROPERTIES, check_property, default_registry, run_task

    registry = {t.name: t for t in default_registry()}
    if args.all:
        names = list(registry) + list(PROPERTIES)
    elif args.name:
        names = args.name
    else:
        raise UsageError("check needs property/task names or --all")
    unknown = [n for n in names if n not in registry and n not in PROPERTIES]
    if unknown:
        raise UsageError(f"unknown check {unknown[0]!r}; see --list")
    budget = _budget(args)
    words = []
    for name in names:
        stem = name.replace("/", "_")
        paths: List[str] = []
        if name in registry:
            result = run_task(registry[name], budget)
            if result.counterexample is not None and args.witness_dir:
                paths = list(result.counterexample.write(args.witness_dir, stem))
            word, line = result.status, result.line(paths)
        else:
            try:
                report = check_property(name, budget=budget)
            except BudgetExhausted as exc:
                word, line = "BUDGET", f"{name} BUDGET {exc}"
            else:
                if not report.passed and args.witness_dir:
                    for i, w in enumerate(report.witnesses):
                        paths += list(w.write(args.witness_dir, f"{stem}_{i}"))
                word, line = ("PASS" if report.passed else "FAIL"), report.line(paths)
        words.append(word)
        _emit(out, args, line, **{name: word})
    if "BUDGET" in words:
        return EXIT_BUDGET
    return EXIT_FALSE if "FAIL" in words else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="teamlogic", description="Model checking and rewriting for team-semantics logics.")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def budget_flags(sp):
        sp.add_argument("--max-team-rows", type=int, default=EvalBudget.max_team_rows)
        sp.add_argument("--max-branching", type=int, default=EvalBudget.max_branching)
        sp.add_argument("--max-nodes", type=int, default=EvalBudget.max_nodes)

    def formula_flags(sp):
        sp.add_argument("--formula", help="formula text, or 'counting N'")
        sp.add_argument("--formula-file", help="file containing the formula")

    e = sub.add_parser("eval", help="decide M ⊨_X φ")
    formula_flags(e)
    e.add_argument("--structure", required=True, help="structure file or mN for a pure N-element domain")
    e.add_argument("--team", help="team file, 'unit', 'empty' or singleton-VAR (default unit)")
    e.add_argument("--sem", choices=("lax", "strict"), default="lax")
    budget_flags(e)

    r = sub.add_parser("rewrite", help="apply a rewrite pass")
    formula_flags(r)
    r.add_argument("--pass", dest="pass_name", choices=PASS_NAMES)
    r.add_argument("--n", type=int, help="n for the counting pass")
    r.add_argument("--list", action="store_true", help="list pass names")
    r.add_argument("--duplicate-guard", action="store_true", help="inc-to-pind: repeat z != x in the first disjunct")

    c = sub.add_parser("classify", help="print the fragment profile")
    formula_flags(c)

    q = sub.add_parser("equiv", help="exhaustively compare two formulas")
    q.add_argument("--left", required=True)
    q.add_argument("--right", required=True)
    q.add_argument("--sem", choices=("lax", "strict"), default="lax")
    q.add_argument("--sem-left", choices=("lax", "strict"))
    q.add_argument("--sem-right", choices=("lax", "strict"))
    q.add_argument("--signature", default="", help="e.g. 'R/1, E/2, const c'")
    q.add_argument("--max-domain", type=int, default=2)
    q.add_argument("--vars", help="team variables (default: the free variables)")
    q.add_argument("--max-rows", type=int)
    q.add_argument("--sentence", action="store_true", help="only use the team {∅}")
    q.add_argument("--witness-dir")
    budget_flags(q)

    k = sub.add_parser("check", help="run named properties/registry tasks")
    k.add_argument("name", nargs="*")
    k.add_argument("--all", action="store_true")
    k.add_argument("--list", action="store_true")
    k.add_argument("--witness-dir", default=None)
    budget_flags(k)
    return p


def run(argv: Sequence[str], out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        if args.command is None:
            raise UsageError("missing subcommand (eval, rewrite, classify, equiv, check)")
        if args.command == "check" and args.list:
            from .oracle import PROPERTIES, default_registry

            for name in [t.name for t in default_registry()] + list(PROPERTIES):
                out.write(name + "\n")
            return EXIT_OK
        handler = {
            "eval": _cmd_eval,
            "rewrite": _cmd_rewrite,
            "classify": _cmd_classify,
            "equiv": _cmd_equiv,
            "check": _cmd_check,
        }[args.command]
        return handler(args, out)
    except UsageError as exc:
        err.write(f"teamlogic: error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, FormatError, OSError, KeyError, ValueError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        err.write(f"teamlogic: error: {msg}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
