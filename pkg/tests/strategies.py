"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from vcsequent.syntax import (And, App, Atom, Exists, Forall, Kind, Not, Or,
                              Var)

GAMMAS = [Var(n, Kind.GAMMA) for n in ("x", "u", "w")]
DELTAS = [Var(n, Kind.DELTA) for n in ("y", "v", "z")]
BOUND = ("b", "c", "d")


def terms(bound=(), with_functions=True):
    leaves = st.sampled_from(GAMMAS + DELTAS + [Var(b, Kind.BOUND) for b in bound])
    if not with_functions:
        return leaves
    consts = st.just(App("k", ()))
    base = st.one_of(leaves, consts)
    return st.one_of(base, st.builds(lambda t: App("f", (t,)), base),
                     st.builds(lambda s, t: App("g", (s, t)), base, base))


def atoms(bound=(), with_functions=True):
    t = terms(bound, with_functions)
    return st.one_of(
        st.builds(lambda a: Atom("P", (a,)), t),
        st.builds(lambda a, b: Atom("Q", (a, b)), t, t),
    )


@st.composite
def formulas(draw, depth=3, bound=(), with_functions=True):
    if depth == 0 or draw(st.integers(0, 4)) == 0:
        return draw(atoms(bound, with_functions))
    kind = draw(st.sampled_from(["not", "and", "or", "all", "ex"]))
    if kind == "not":
        return Not(draw(formulas(depth - 1, bound, with_functions)))
    if kind in ("and", "or"):
        cls = And if kind == "and" else Or
        return cls(draw(formulas(depth - 1, bound, with_functions)),
                   draw(formulas(depth - 1, bound, with_functions)))
    free = [b for b in BOUND if b not in bound]
    if not free:
        return draw(atoms(bound, with_functions))
    name = free[0]
    cls = Forall if kind == "all" else Exists
    return cls(name, draw(formulas(depth - 1, bound + (name,), with_functions)))


def sequents(depth=2, with_functions=True):
    return st.lists(formulas(depth, with_functions=with_functions), min_size=1, max_size=3).map(tuple)


def varconds(max_size=5):
    pairs = st.tuples(st.sampled_from(GAMMAS), st.sampled_from(DELTAS))
    return st.frozensets(pairs, max_size=max_size)


def substitutions(with_functions=True):
    return st.dictionaries(st.sampled_from(GAMMAS), terms((), with_functions), max_size=3)


def relations(nodes=5, max_size=10):
    n = st.integers(0, nodes - 1)
    return st.frozensets(st.tuples(n, n), max_size=max_size)
