import pytest
from hypothesis import assume, given, settings

from strategies import substitutions, varconds
from vcsequent import relations as rl
from vcsequent.syntax import App, Substitution, dvar, gvar
from vcsequent.varcond import (InadmissibleSubstitution, admissibility_cycle,
                               analyze, check_varcond, is_strong_admissible,
                               is_weak_admissible, strong_update, u_compose_r,
                               update_term, weak_update)

x, u = gvar("x"), gvar("u")
y, v = dvar("y"), dvar("v")
R_HASH = frozenset({(x, y), (u, v)})
DOLLAR = {x: v, u: y}
SIGMA1 = {x: v}


def test_analysis_of_single_binding():
    a = analyze(SIGMA1, {x, u})
    assert a.universal == {(v, x)}
    assert a.existential == {(u, u)}


def test_analysis_of_identity():
    a = analyze({}, {x, u})
    assert a.universal == set()
    assert a.existential == {(x, x), (u, u)}


def test_analysis_of_dollar():
    a = analyze(DOLLAR, {x, u})
    assert a.universal == {(v, x), (y, u)}
    assert a.existential == set()


def test_weak_admissibility():
    assert is_weak_admissible(DOLLAR, R_HASH)
    assert not is_weak_admissible({x: y}, {(x, y)})
    assert is_weak_admissible({}, R_HASH)


def test_strong_admissibility():
    assert not is_strong_admissible(DOLLAR, R_HASH)
    assert is_strong_admissible(SIGMA1, R_HASH)
    assert is_strong_admissible({}, R_HASH)
    assert u_compose_r(DOLLAR, R_HASH) == {(v, y), (y, v)}


def test_strong_cycle_is_reported():
    cycle = admissibility_cycle(DOLLAR, R_HASH, strong=True)
    assert cycle[0] == cycle[-1] and set(cycle) == {x, y, u, v}
    with pytest.raises(InadmissibleSubstitution) as info:
        strong_update(DOLLAR, R_HASH)
    assert info.value.cycle == cycle


def test_weak_cycle_is_reported():
    with pytest.raises(InadmissibleSubstitution) as info:
        weak_update({x: y}, {(x, y)})
    assert info.value.cycle == [y, x, y]


def test_weak_updates():
    assert weak_update(SIGMA1, R_HASH) == {(u, v)}
    assert weak_update({}, R_HASH) == R_HASH
    assert weak_update({x: App("f", (u,))}, {(x, y)}) == {(u, y)}


def test_strong_updates():
    assert strong_update(SIGMA1, R_HASH) == {(u, v), (u, y)}
    assert strong_update({}, R_HASH) == R_HASH


def test_power_series_terms():
    assert [update_term(SIGMA1, R_HASH, k) for k in range(3)] == [{(u, v)}, {(u, y)}, set()]


def test_varcond_kinds_checked():
    with pytest.raises(ValueError):
        check_varcond({(y, x)})


@settings(max_examples=300)
@given(substitutions(), varconds())
def test_strong_implies_weak(sigma, r):
    if is_strong_admissible(sigma, r):
        assert is_weak_admissible(sigma, r)


@settings(max_examples=300)
@given(substitutions(), varconds())
def test_strong_update_is_power_series(sigma, r):
    assume(is_strong_admissible(sigma, r))
    upd = strong_update(sigma, r)
    series = frozenset()
    for k in range(len(r) + 2):
        series |= update_term(sigma, r, k)
    assert upd == series
    assert weak_update(sigma, r) <= upd


@settings(max_examples=300)
@given(substitutions(), varconds())
def test_dependency_graph_agrees_with_update(sigma, r):
    assume(is_strong_admissible(sigma, r))
    a = analyze(sigma, {g for g, _ in r})
    g = rl.DependencyGraph()
    g.add_relation_edges(r)
    g.add_subst_edges(a.existential, a.universal, moved=set(Substitution(sigma)))
    assert not g.has_cycle()
    assert g.relation() == strong_update(sigma, r)


@pytest.mark.parametrize("target, blocked", [(v, False), (y, True)])
def test_dependency_graph_sequential_updates(target, blocked):
    # two instantiations in a row: the graph keeps the history instead of recomputing
    w = gvar("w")
    r = frozenset({(x, y), (u, v)})
    g = rl.DependencyGraph()
    g.add_relation_edges(r)
    s1 = {x: App("f", (w,))}
    a1 = analyze(s1, {x, u, w})
    g.add_subst_edges(a1.existential, a1.universal, moved={x})
    r1 = strong_update(s1, r)
    assert r1 == {(w, y), (u, v)}
    s2 = {w: target}
    a2 = analyze(s2, {u, w})
    g.add_subst_edges(a2.existential, a2.universal, moved={w})
    assert g.has_cycle() == blocked == (not is_strong_admissible(s2, r1))
