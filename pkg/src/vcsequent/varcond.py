"""Variable conditions and how substitutions interact with them.

A variable condition is a finite relation between existential and
universal variables; ``(x, y)`` in it forbids putting ``y`` into the
instance of ``x``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from . import relations as rl
from .syntax import Kind, Substitution, Term, Var, free_vars

VarCond = frozenset  # frozenset[tuple[Var, Var]]


class InadmissibleSubstitution(ValueError):
    def __init__(self, message: str, cycle: list | None = None):
        self.cycle = cycle
        if cycle:
            message = f"{message}: cycle {' -> '.join(str(v) for v in cycle)}"
        super().__init__(message)


@dataclass(frozen=True)
class SubstAnalysis:
    existential: frozenset  # E: pairs (x', x) with x' in the instance of x
    universal: frozenset    # U: pairs (y, x) with y in the instance of x


def as_subst(sigma: Mapping[Var, Term] | Substitution) -> Substitution:
    return sigma if isinstance(sigma, Substitution) else Substitution(sigma)


def check_varcond(r: Iterable[tuple[Var, Var]]) -> VarCond:
    r = frozenset(r)
    for x, y in r:
        if x.kind is not Kind.GAMMA or y.kind is not Kind.DELTA:
            raise ValueError(f"variable condition pair ({x}, {y}) is not existential x universal")
    return r


def analyze(sigma, relevant: Iterable[Var] = ()) -> SubstAnalysis:
    sigma = as_subst(sigma)
    relevant = set(relevant) | set(sigma)
    e, u = set(), set()
    for x in relevant:
        gs, ds = free_vars(sigma.image(x))
        e.update((x2, x) for x2 in gs)
        u.update((y, x) for y in ds)
    return SubstAnalysis(frozenset(e), frozenset(u))


def _gammas(r: Iterable[tuple[Var, Var]]) -> set[Var]:
    return {x for x, _ in r}


def u_compose_r(sigma, r: VarCond) -> frozenset:
    """The relation ``U_sigma . R`` on universal variables."""
    return rl.compose(analyze(sigma).universal, r)


def is_weak_admissible(sigma, r: VarCond) -> bool:
    return rl.is_irreflexive(u_compose_r(sigma, r))


def is_strong_admissible(sigma, r: VarCond) -> bool:
    return rl.is_acyclic(u_compose_r(sigma, r))


def admissibility_cycle(sigma, r: VarCond, strong: bool) -> list | None:
    """A witness cycle ``y -> x -> y' -> ...`` through the substitution and ``r``."""
    sigma = as_subst(sigma)
    u = analyze(sigma).universal
    if strong:
        g = rl.DependencyGraph()
        g.add_relation_edges(r)
        g.add_subst_edges((), u)
        return g.find_cycle()
    for y, x in sorted(u, key=repr):
        if (x, y) in r:
            return [y, x, y]
    return None


def _require(sigma, r: VarCond, strong: bool) -> None:
    cycle = admissibility_cycle(sigma, r, strong)
    if cycle is not None:
        kind = "strong" if strong else "weak"
        raise InadmissibleSubstitution(f"substitution {sigma} is not {kind}ly admissible", cycle)


def weak_update(sigma, r: VarCond) -> VarCond:
    sigma = as_subst(sigma)
    _require(sigma, r, strong=False)
    a = analyze(sigma, _gammas(r))
    return rl.compose(a.existential, r)


def update_term(sigma, r: VarCond, k: int) -> VarCond:
    """``E_sigma . R . (U_sigma . R)^k``; the summands of the strong update."""
    a = analyze(as_subst(sigma), _gammas(r))
    ur = rl.compose(a.universal, r)
    deltas = {y for _, y in r}
    return rl.compose(rl.compose(a.existential, r), rl.power(ur, k, deltas))


def strong_update(sigma, r: VarCond) -> VarCond:
    sigma = as_subst(sigma)
    _require(sigma, r, strong=True)
    a = analyze(sigma, _gammas(r))
    ur = rl.compose(a.universal, r)
    # iterate E.R.(U.R)^k until nothing new appears
    acc = frozenset(rl.compose(a.existential, r))
    frontier = acc
    while frontier:
        frontier = rl.compose(frontier, ur) - acc
        acc = acc | frontier
    return acc
