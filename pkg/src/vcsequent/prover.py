"""Automated proof search on top of the kernel in :mod:`calculus`.

Strategy: saturate with alpha and delta steps (eagerly) and beta steps,
then try to close every open leaf with a single instantiation.  If that
fails, give every gamma formula on every open leaf one more instance and
repeat, up to the configured multiplicity.

The closing substitution is found by syntactic unification of
complementary pairs, leaf by leaf with backtracking.  Existential
variables are the only unknowns; universal variables and symbols are
rigid.  Candidates that violate the variable condition are pruned as soon
as they appear, which is safe because binding more variables can only add
universal variables to the instances.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from . import calculus as calc
from .calculus import STRONG, WEAK, ProofForest, RuleInstance
from .semantics import all_structures, is_r_valid
from .syntax import (And, App, Atom, Exists, Forall, Formula, Kind, Not, Or,
                     Sequent, Substitution, Term, Var, apply_subst,
                     format_formula, format_term, free_vars, signature_of)
from .varcond import admissibility_cycle

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchLimits:
    gamma_multiplicity: int = 2
    node_budget: int = 20_000

    def __post_init__(self):
        if self.gamma_multiplicity < 1 or self.node_budget < 1:
            raise ValueError("search limits must be positive")


@dataclass(frozen=True)
class Proved:
    forest: ProofForest
    sigma: Substitution
    answers: dict = field(default_factory=dict)
    choice_report: tuple[str, ...] = ()
    trace: tuple[str, ...] = ()
    multiplicity: int = 0
    query: frozenset = frozenset()

    proved = True


@dataclass(frozen=True)
class Unproven:
    reason: str
    countermodel: object = None
    forest: ProofForest | None = None

    proved = False


class BudgetExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------- unification


def _walk(t: Term, b: Mapping[Var, Term]) -> Term:
    while isinstance(t, Var) and t in b:
        t = b[t]
    return t


def _occurs(x: Var, t: Term, b: Mapping[Var, Term]) -> bool:
    t = _walk(t, b)
    if t == x:
        return True
    return isinstance(t, App) and any(_occurs(x, a, b) for a in t.args)


def unify_terms(s: Term, t: Term, b: dict) -> dict | None:
    s, t = _walk(s, b), _walk(t, b)
    if s == t:
        return b
    if isinstance(s, Var) and s.kind is Kind.GAMMA:
        return _bind(s, t, b)
    if isinstance(t, Var) and t.kind is Kind.GAMMA:
        return _bind(t, s, b)
    if isinstance(s, App) and isinstance(t, App) and s.fn == t.fn and len(s.args) == len(t.args):
        for a, c in zip(s.args, t.args):
            b = unify_terms(a, c, b)
            if b is None:
                return None
        return b
    return None


def _bind(x: Var, t: Term, b: dict) -> dict | None:
    if _occurs(x, t, b):
        return None
    if any(v.kind is Kind.BOUND for v in _term_vars(t)):
        return None
    return {**b, x: t}


def _term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from _term_vars(a)


def unify_formulas(f: Formula, g: Formula, b: dict) -> dict | None:
    if type(f) is not type(g):
        return None
    if isinstance(f, Atom):
        if f.pred != g.pred or len(f.args) != len(g.args):
            return None
        for a, c in zip(f.args, g.args):
            b = unify_terms(a, c, b)
            if b is None:
                return None
        return b
    if isinstance(f, Not):
        return unify_formulas(f.body, g.body, b)
    if isinstance(f, (And, Or)):
        b = unify_formulas(f.left, g.left, b)
        return None if b is None else unify_formulas(f.right, g.right, b)
    if isinstance(f, (Forall, Exists)):
        if f.var != g.var:
            return None
        return unify_formulas(f.body, g.body, b)
    return None


def resolve(b: Mapping[Var, Term]) -> Substitution:
    def full(t: Term) -> Term:
        t = _walk(t, b)
        if isinstance(t, App) and t.args:
            return App(t.fn, tuple(full(a) for a in t.args))
        return t
    return Substitution({x: full(x) for x in b})


# ---------------------------------------------------------------- closing


def _pair_candidates(s: Sequent, b: dict) -> Iterator[dict]:
    """Extensions of ``b`` that make ``s`` an axiom, in textual order."""
    seen = set()
    n = len(s)
    for i in range(n):
        for j in range(i + 1, n):
            for pos, neg in ((s[i], s[j]), (s[j], s[i])):
                if not isinstance(neg, Not):
                    continue
                ext = unify_formulas(pos, neg.body, b)
                if ext is None:
                    continue
                key = frozenset(ext.items())
                if key not in seen:
                    seen.add(key)
                    yield ext


def _admissible(b: dict, forest: ProofForest) -> bool:
    sigma = resolve(b)
    return admissibility_cycle(sigma, forest.r, strong=forest.mode == STRONG) is None


def close_attempt(forest: ProofForest, budget: list[int] | None = None) -> Substitution | None:
    """One substitution closing every tree, admissible for the forest, or None."""
    goals = [s for _, _, s in forest.open_leaves()]

    def closed_under(s: Sequent, b: dict) -> bool:
        return calc.is_axiom(apply_subst(s, resolve(b))) if b else calc.is_axiom(s)

    def go(k: int, b: dict) -> dict | None:
        if budget is not None:
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExhausted
        if k == len(goals):
            return b
        if closed_under(goals[k], b):
            return go(k + 1, b)
        for ext in _pair_candidates(goals[k], b):
            if not _admissible(ext, forest):
                continue
            found = go(k + 1, ext)
            if found is not None:
                return found
        return None

    found = go(0, {})
    return None if found is None else resolve(found)


# ---------------------------------------------------------------- strategy


_EAGER = ("alpha", "delta")


def _next_step(forest: ProofForest) -> RuleInstance | None:
    for ti, li, s in forest.open_leaves():
        best = None
        for idx, f in enumerate(s):
            rule = calc.rule_for(f)
            if rule is None or calc.RULES[rule] == "gamma":
                continue
            if calc.RULES[rule] in _EAGER:
                return RuleInstance(ti, li, rule, idx)
            if best is None:
                best = RuleInstance(ti, li, rule, idx)
        if best is not None:
            return best
    return None


def saturate(forest: ProofForest, budget: list[int]) -> ProofForest:
    while True:
        ri = _next_step(forest)
        if ri is None:
            return forest
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExhausted
        forest = calc.expand(forest, ri)


def gamma_round(forest: ProofForest, budget: list[int]) -> ProofForest:
    """One new instance of every gamma formula on every open leaf."""
    todo = [(ti, li, [i for i, f in enumerate(s) if calc.RULES.get(calc.rule_for(f) or "") == "gamma"])
            for ti, li, s in forest.open_leaves()]
    for ti, li, idxs in reversed(todo):
        for k, idx in enumerate(idxs):
            _, node = forest.leaf(ti, li)
            f = node.label[idx + k]
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExhausted
            forest = calc.expand(forest, RuleInstance(ti, li, calc.rule_for(f), idx + k))
    return forest


def _as_sequent(goal) -> Sequent:
    if isinstance(goal, (Atom, Not, And, Or, Forall, Exists)):
        return (goal,)
    return tuple(goal)


def search(goal, mode: str = STRONG, limits: SearchLimits = SearchLimits(),
           name: str | None = None) -> Proved | Unproven:
    s = _as_sequent(goal)
    forest = calc.hypothesize(calc.new_forest(mode), s, name=name)
    budget = [limits.node_budget]
    try:
        forest = saturate(forest, budget)
        sigma = close_attempt(forest, budget)
        rounds = 0
        while sigma is None and rounds < limits.gamma_multiplicity:
            rounds += 1
            forest = saturate(gamma_round(forest, budget), budget)
            sigma = close_attempt(forest, budget)
            log.debug("round %d: %d open leaves", rounds, len(forest.open_leaves()))
    except BudgetExhausted:
        return Unproven("node budget exhausted", forest=forest)
    if sigma is None:
        return Unproven(f"no admissible closing substitution up to gamma multiplicity "
                        f"{limits.gamma_multiplicity}", forest=forest)
    closed = calc.instantiate(forest, sigma) if sigma else forest
    for i in range(len(closed.entries)):
        closed = calc.qed(closed, i)
    query = free_vars(s)[0]
    result = Proved(closed, sigma, trace=closed.trace, multiplicity=rounds, query=query)
    answers, report = extract_answers(result)
    return Proved(closed, sigma, answers, tuple(report), closed.trace, rounds, query)


# ---------------------------------------------------------------- answers


def extract_answers(result: Proved, query_vars=None) -> tuple[dict, list[str]]:
    """Bindings of the query variables and the choices they rely on.

    By default the query variables are the free existential variables of
    the hypothesis.
    """
    if query_vars is None:
        query_vars = result.query
    answers = {x: result.sigma.image(x) for x in sorted(query_vars)}
    report: list[str] = []
    if result.forest.mode == WEAK:
        return answers, report
    cc = result.forest.choice
    mentioned = set()
    for t in answers.values():
        mentioned |= free_vars(t)[1]
    for y in sorted(mentioned):
        if y in cc.entries:
            report.append(f"choose {format_term(y)} such that {format_formula(cc.entries[y])} is false")
            report.append(cc.epsilon(y))
    return answers, report


# ---------------------------------------------------------------- countermodels


def countermodel(f, max_size: int = 2, min_size: int = 1):
    """Smallest structure (size, then enumeration order) refuting ``f``."""
    s = _as_sequent(f)
    sig = signature_of(s)
    for st in all_structures(sig, max_size, min_size):
        if not is_r_valid((s,), frozenset(), st):
            return st
    return None
