"""Finite binary relations and the graph checks built on them.

Relations are plain ``frozenset`` objects of ordered pairs.  Composition
reads left to right: ``(a, c)`` is in ``compose(P, Q)`` iff some ``b`` has
``(a, b)`` in ``P`` and ``(b, c)`` in ``Q``.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Hashable, Iterable
from dataclasses import dataclass
from typing import Any

from .syntax import Kind, Var

Pair = tuple[Any, Any]
Relation = frozenset  # frozenset[Pair]


def rel(pairs: Iterable[Pair] = ()) -> frozenset:
    return frozenset((a, b) for a, b in pairs)


def _successors(p: Iterable[Pair]) -> dict[Any, set]:
    succ: dict[Any, set] = defaultdict(set)
    for a, b in p:
        succ[a].add(b)
    return succ


def compose(p: Iterable[Pair], q: Iterable[Pair]) -> frozenset:
    q_succ = _successors(q)
    return frozenset((a, c) for a, b in p for c in q_succ.get(b, ()))


def reverse(p: Iterable[Pair]) -> frozenset:
    return frozenset((b, a) for a, b in p)


def domain(p: Iterable[Pair]) -> frozenset:
    return frozenset(a for a, _ in p)


def range_(p: Iterable[Pair]) -> frozenset:
    return frozenset(b for _, b in p)


def field_of(p: Iterable[Pair]) -> frozenset:
    p = list(p)
    return domain(p) | range_(p)


def image(p: Iterable[Pair], a: Iterable[Hashable]) -> frozenset:
    """``{b | (x, b) in p, x in a}``"""
    a = set(a)
    return frozenset(y for x, y in p if x in a)


def preimage(p: Iterable[Pair], b: Iterable[Hashable]) -> frozenset:
    """``{a | (a, y) in p, y in b}``"""
    b = set(b)
    return frozenset(x for x, y in p if y in b)


def domain_restrict(p: Iterable[Pair], a: Iterable[Hashable]) -> frozenset:
    a = set(a)
    return frozenset((x, y) for x, y in p if x in a)


def identity(carrier: Iterable[Hashable]) -> frozenset:
    return frozenset((x, x) for x in carrier)


def transitive_closure(p: Iterable[Pair]) -> frozenset:
    succ = _successors(p)
    out = set()
    for start in list(succ):
        seen: set = set()
        stack = list(succ[start])
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(succ.get(n, ()))
        out.update((start, n) for n in seen)
    return frozenset(out)


def refl_trans_closure(p: Iterable[Pair], carrier: Iterable[Hashable]) -> frozenset:
    """Transitive closure plus the identity on ``carrier`` (and on ``p``'s field)."""
    p = frozenset(p)
    return transitive_closure(p) | identity(set(carrier) | field_of(p))


def power(p: Iterable[Pair], n: int, carrier: Iterable[Hashable]) -> frozenset:
    """The ``n``-step relation; ``power(p, 0, A)`` is the identity on ``A``."""
    p = frozenset(p)
    out = identity(carrier)
    for _ in range(n):
        out = compose(out, p)
    return out


def is_irreflexive(p: Iterable[Pair]) -> bool:
    return all(a != b for a, b in p)


def find_cycle(p: Iterable[Pair]) -> list | None:
    """Return the nodes of some cycle of ``p`` (first node repeated at the end), or None."""
    succ = _successors(p)
    white, grey, black = 0, 1, 2
    color: dict[Any, int] = defaultdict(int)
    for root in sorted(succ, key=repr):
        if color[root] != white:
            continue
        path = [root]
        iters = [iter(sorted(succ[root], key=repr))]
        color[root] = grey
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = black
                iters.pop()
                continue
            if color[nxt] == grey:
                return path[path.index(nxt):] + [nxt]
            if color[nxt] == white:
                color[nxt] = grey
                path.append(nxt)
                iters.append(iter(sorted(succ.get(nxt, ()), key=repr)))
    return None


def is_acyclic(p: Iterable[Pair]) -> bool:
    """For finite relations: terminating iff wellfounded iff no cycle."""
    return find_cycle(p) is None


@dataclass(frozen=True)
class TerminationCheck:
    precondition_holds: bool
    union_terminating: bool


def check_union_termination(a: Iterable[Pair], b: Iterable[Pair]) -> TerminationCheck:
    """Evaluate both sides of the union-termination lemma for terminating ``a``, ``b``.

    The precondition is ``a . b <= a | b . (a | b)*``; the conclusion is that
    ``a | b`` terminates.
    """
    a, b = frozenset(a), frozenset(b)
    if not is_acyclic(a) or not is_acyclic(b):
        raise ValueError("both relations must be terminating")
    union = a | b
    rhs = a | compose(b, refl_trans_closure(union, field_of(union)))
    return TerminationCheck(
        precondition_holds=compose(a, b) <= rhs,
        union_terminating=is_acyclic(union),
    )


class DependencyGraph:
    """Bipartite dependency graph between existential and universal variables.

    Edges ``x -> y`` come from a variable condition, edges ``y -> x`` from the
    universal relation of a substitution.  Applying a substitution does not
    recompute the updated condition: each moved existential variable gets a
    fresh node with edges to the old nodes it now stands in for, so the
    reachable universal variables of a current node are exactly its strong
    update.
    """

    def __init__(self):
        self._succ: dict[Any, set] = defaultdict(set)
        self._current: dict[Var, tuple] = {}
        self._version: dict[Var, int] = defaultdict(int)

    def _gnode(self, x: Var) -> tuple:
        if x.kind is not Kind.GAMMA:
            raise ValueError(f"{x} is not an existential variable")
        if x not in self._current:
            self._current[x] = ("g", x, 0)
        return self._current[x]

    @staticmethod
    def _dnode(y: Var) -> tuple:
        if y.kind is not Kind.DELTA:
            raise ValueError(f"{y} is not a universal variable")
        return ("d", y)

    def add_relation_edges(self, r: Iterable[Pair]) -> None:
        for x, y in r:
            gx, dy = self._gnode(x), self._dnode(y)
            self._succ[gx].add(dy)

    def add_subst_edges(self, e: Iterable[Pair], u: Iterable[Pair],
                        moved: Iterable[Var] | None = None) -> None:
        """Record a substitution by its existential and universal relations.

        ``moved`` is the domain of the substitution; without it, only
        variables whose instance mentions other existential variables are
        renewed, which is wrong for ground instances.
        """
        e, u = frozenset(e), frozenset(u)
        for y, x in u:
            dy, gx = self._dnode(y), self._gnode(x)
            self._succ[dy].add(gx)
        if moved is None:
            renewed = {x for _, x in e if (x, x) not in e}
        else:
            renewed = set(moved)
        old = {x: self._gnode(x) for x in field_of(e) | renewed}
        for x in renewed:
            self._version[x] += 1
            self._current[x] = ("g", x, self._version[x])
        for x_new, x_old in e:
            src, dst = self._gnode(x_new), old[x_old]
            if src != dst:
                self._succ[src].add(dst)

    def find_cycle(self) -> list | None:
        cycle = find_cycle((a, b) for a, succ in self._succ.items() for b in succ)
        if cycle is None:
            return None
        return [n[1] for n in cycle]

    def has_cycle(self) -> bool:
        return self.find_cycle() is not None

    def relation(self) -> frozenset:
        """Pairs ``(x, y)`` with universal ``y`` reachable from the current node of ``x``."""
        out = set()
        for x, node in self._current.items():
            seen = set()
            stack = [node]
            while stack:
                n = stack.pop()
                if n in seen:
                    continue
                seen.add(n)
                stack.extend(self._succ.get(n, ()))
            out.update((x, n[1]) for n in seen if n[0] == "d")
        return frozenset(out)
