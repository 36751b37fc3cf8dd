"""Choice-conditions for universal variables introduced by liberalized delta steps.

An entry ``y -> B`` says that ``y`` was picked so as to falsify ``B`` if at
all possible, i.e. ``y = eps y. ~B``.  The accompanying ordering records
which universal variables each choice may depend on.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from . import relations as rl
from .syntax import (Formula, Kind, Var, apply_subst, format_formula,
                     format_term, free_vars, rename)
from .varcond import VarCond, analyze, as_subst, strong_update


@dataclass(frozen=True)
class ChoiceCondition:
    entries: Mapping[Var, Formula] = field(default_factory=dict)
    order: frozenset = frozenset()  # generating pairs (z, y) meaning z < y

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        object.__setattr__(self, "order", frozenset(self.order))

    def __hash__(self):
        return hash((frozenset(self.entries.items()), self.order))

    def __bool__(self) -> bool:
        return bool(self.entries) or bool(self.order)

    def ordering(self) -> frozenset:
        """The strict ordering generated by ``order``."""
        return rl.transitive_closure(self.order)

    def lines(self) -> list[str]:
        """``choose y^a : B`` per entry, the proof-trace serialization."""
        return [f"choose {format_term(y)} : {format_formula(b)}"
                for y, b in sorted(self.entries.items())]

    def epsilon(self, y: Var) -> str:
        """Render the entry for ``y`` as an epsilon term."""
        b = rename(self.entries[y], {y: Var(y.name, Kind.BOUND)})
        return f"{format_term(y)} = eps {y.name}. ~({format_formula(b)})"


@dataclass(frozen=True)
class StrongState:
    r: VarCond = frozenset()
    choice: ChoiceCondition = field(default_factory=ChoiceCondition)


def violations(cc: ChoiceCondition, r: VarCond) -> list[str]:
    """Human readable reasons why ``cc`` is not an ``(r, <)``-choice-condition."""
    out = []
    r = frozenset(r)
    for y in cc.entries:
        if y.kind is not Kind.DELTA:
            out.append(f"{y} in the domain is not a universal variable")
    for z, y in cc.order:
        if z.kind is not Kind.DELTA or y.kind is not Kind.DELTA:
            out.append(f"ordering pair ({z}, {y}) is not on universal variables")
    cycle = rl.find_cycle(cc.order)
    if cycle is not None:
        out.append("ordering is not wellfounded: " + " < ".join(map(str, cycle)))
    less = cc.ordering()
    extra = rl.compose(r, less) - r
    if extra:
        pairs = ", ".join(f"({x}, {y})" for x, y in sorted(extra))
        out.append(f"R . < is not contained in R: {pairs}")
    for y, b in cc.entries.items():
        gs, ds = free_vars(b)
        for z in sorted(ds - {y}):
            if (z, y) not in less:
                out.append(f"{z} occurs in the choice for {y} but {z} < {y} fails")
        for u in sorted(gs):
            if (u, y) not in r:
                out.append(f"{u} occurs in the choice for {y} but ({u}, {y}) is not in R")
    return out


def validate(cc: ChoiceCondition, r: VarCond) -> bool:
    return not violations(cc, r)


def is_extension(new: StrongState, old: StrongState) -> bool:
    entries_kept = all(new.choice.entries.get(y) == b for y, b in old.choice.entries.items())
    return (entries_kept and frozenset(old.r) <= frozenset(new.r)
            and validate(new.choice, new.r))


def extended_strong_update(sigma, state: StrongState) -> StrongState:
    """Apply a strongly admissible substitution to the whole strong state."""
    sigma = as_subst(sigma)
    r_new = strong_update(sigma, state.r)  # raises when inadmissible
    ur = rl.compose(analyze(sigma).universal, state.r)
    less = state.choice.ordering()
    carrier = rl.field_of(ur) | rl.field_of(less)
    order = rl.compose(less, rl.refl_trans_closure(ur, carrier)) | rl.transitive_closure(ur)
    entries = {y: apply_subst(b, sigma) for y, b in state.choice.entries.items()}
    return StrongState(r_new, ChoiceCondition(entries, order))


def merge(cc: ChoiceCondition, entries: Mapping[Var, Formula] = {},
          order: Iterable = ()) -> ChoiceCondition:
    return ChoiceCondition({**cc.entries, **entries}, cc.order | frozenset(order))
