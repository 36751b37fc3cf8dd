import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from strategies import relations
from vcsequent import relations as rl
from vcsequent.syntax import dvar, gvar

x, u = gvar("x"), gvar("u")
y, v, z = dvar("y"), dvar("v"), dvar("z")
xa = dvar("x")


def matrix_has_cycle(p, n=6):
    """Independent oracle: some power of the adjacency matrix has a nonzero trace."""
    m = np.zeros((n, n), dtype=np.int64)
    for a, b in p:
        m[a, b] = 1
    acc = np.eye(n, dtype=np.int64)
    for _ in range(n):
        acc = np.minimum(acc @ m, 1)
        if np.trace(acc):
            return True
    return False


def test_compose_is_left_to_right():
    u_sigma = {(v, x), (y, u)}
    r = {(x, y), (u, v)}
    assert rl.compose(u_sigma, r) == {(v, y), (y, v)}


def test_compose_trivia():
    q = {(1, 2), (3, 4)}
    assert rl.compose(set(), q) == set()
    assert rl.compose(rl.identity({1}), q) == {(1, 2)}


def test_closures():
    assert rl.transitive_closure({("a", "b"), ("b", "c")}) == {("a", "b"), ("b", "c"), ("a", "c")}
    le = rl.refl_trans_closure({(xa, z)}, {xa, z})
    assert rl.preimage(le, {xa}) == {xa}
    assert rl.preimage({(x, y), (u, v)}, {y}) == {x}
    assert rl.image({(x, y), (u, v)}, {x}) == {y}


def test_power():
    p = {(1, 2), (2, 3)}
    assert rl.power(p, 0, {1, 2, 3}) == rl.identity({1, 2, 3})
    assert rl.power(p, 2, {1, 2, 3}) == {(1, 3)}
    assert rl.power(p, 3, {1, 2, 3}) == set()


@pytest.mark.parametrize("p, irreflexive, acyclic", [
    ({(v, y), (y, v)}, True, False),
    (set(), True, True),
    ({("a", "a")}, False, False),
    ({(1, 2), (2, 3)}, True, True),
])
def test_irreflexive_vs_acyclic(p, irreflexive, acyclic):
    assert rl.is_irreflexive(p) == irreflexive
    assert rl.is_acyclic(p) == acyclic


def test_find_cycle_shape():
    cycle = rl.find_cycle({(1, 2), (2, 3), (3, 1), (3, 4)})
    assert cycle[0] == cycle[-1]
    assert set(cycle) == {1, 2, 3}
    for a, b in zip(cycle, cycle[1:]):
        assert (a, b) in {(1, 2), (2, 3), (3, 1)}
    assert rl.find_cycle({(1, 2)}) is None


def test_union_termination_counterexample():
    res = rl.check_union_termination({("a", "b")}, {("b", "a")})
    assert (res.precondition_holds, res.union_terminating) == (False, False)


def test_union_termination_trivial():
    res = rl.check_union_termination(set(), {(1, 2), (2, 3)})
    assert res.precondition_holds and res.union_terminating


def test_union_termination_rejects_cyclic_input():
    with pytest.raises(ValueError):
        rl.check_union_termination({(1, 1)}, set())


@settings(max_examples=300)
@given(relations(6, 12))
def test_acyclicity_three_ways(p):
    dfs = rl.find_cycle(p) is None
    closure = rl.is_irreflexive(rl.transitive_closure(p))
    assert dfs == closure == (not matrix_has_cycle(p))


@settings(max_examples=300)
@given(relations(5, 6), relations(5, 6))
def test_union_termination_lemma(a, b):
    assume(rl.is_acyclic(a) and rl.is_acyclic(b))
    res = rl.check_union_termination(a, b)
    if res.precondition_holds:
        assert res.union_terminating
        assert not matrix_has_cycle(a | b)


def test_dependency_graph_crossed():
    g = rl.DependencyGraph()
    g.add_relation_edges({(x, y), (u, v)})
    g.add_subst_edges(set(), {(v, x), (y, u)})
    cycle = g.find_cycle()
    assert cycle is not None and cycle[0] == cycle[-1]
    assert set(cycle) == {x, y, u, v}


def test_dependency_graph_without_substitution():
    g = rl.DependencyGraph()
    g.add_relation_edges({(x, y), (u, v)})
    assert not g.has_cycle()
    assert g.relation() == {(x, y), (u, v)}


def test_dependency_graph_nested_big():
    ye = gvar("y")
    g = rl.DependencyGraph()
    g.add_relation_edges({(ye, xa), (ye, z)})
    g.add_subst_edges(set(), {(z, ye)})
    assert g.find_cycle() == [z, ye, z] or g.find_cycle() == [ye, z, ye]


gs = [gvar(n) for n in "xuwst"]
ds = [dvar(n) for n in "yvzpq"]


@st.composite
def graph_inputs(draw):
    r = draw(st.frozensets(st.tuples(st.sampled_from(gs), st.sampled_from(ds)), max_size=8))
    u_rel = draw(st.frozensets(st.tuples(st.sampled_from(ds), st.sampled_from(gs)), max_size=6))
    return r, u_rel


@settings(max_examples=300)
@given(graph_inputs())
def test_dependency_graph_matches_composition(data):
    r, u_rel = data
    g = rl.DependencyGraph()
    g.add_relation_edges(r)
    g.add_subst_edges(set(), u_rel)
    assert g.has_cycle() == (not rl.is_acyclic(rl.compose(u_rel, r)))
