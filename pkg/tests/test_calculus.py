import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcsequent import calculus as calc
from vcsequent import semantics as sem
from vcsequent.acceptance import PREDICATES, invariant_violations, random_run
from vcsequent.calculus import STRONG, WEAK, ProofError, RuleInstance
from vcsequent.choice import ChoiceCondition, StrongState, validate
from vcsequent.syntax import (Signature, dvar, gvar, parse_formula,
                              parse_sequent)
from vcsequent.varcond import InadmissibleSubstitution

xe, ue, ye = gvar("x"), gvar("u"), gvar("y")
xa, ya, va, za = dvar("x"), dvar("y"), dvar("v"), dvar("z")
LIB = parse_formula("ex x. (P(x) | all y. ~P(y))")
CROSSED = parse_formula("(ex x. all y. Q(x,y)) | (ex u. all v. ~Q(v,u))")
NESTED = parse_formula("ex y. all x. (~Q(x,y) | all z. Q(x,z))")
SMALL = list(sem.all_structures(Signature({}, dict(PREDICATES)), 2))


def leaf_seq(forest, tree=0, leaf=0):
    return forest.leaf(tree, leaf)[1].label


def step(forest, idx, var=None, leaf=0, tree=0, flavor=None):
    f = leaf_seq(forest, tree, leaf)[idx]
    return calc.expand(forest, RuleInstance(tree, leaf, calc.rule_for(f), idx, var, flavor))


def liberalized_forest(mode):
    forest = calc.hypothesize(calc.new_forest(mode), (LIB,))
    forest = step(forest, 0, xe)        # gamma
    forest = step(forest, 0)            # alpha
    return step(forest, 1, ya)          # delta on all y. ~P(y)


def crossed_star(mode=STRONG):
    forest = calc.hypothesize(calc.new_forest(mode), (CROSSED,))
    forest = step(forest, 0)                  # alpha
    forest = step(forest, 0, xe)              # gamma on ex x
    forest = step(forest, 2, ue)              # gamma on ex u
    forest = step(forest, 1, ya)              # delta on all y
    forest = step(forest, 1, va)              # delta on all v
    return forest


def nested_forest():
    forest = calc.hypothesize(calc.new_forest(STRONG), (NESTED,))
    forest = step(forest, 0, ye)
    forest = step(forest, 0, xa)
    forest = step(forest, 0)
    return step(forest, 1, za)


def test_hypothesize():
    forest = calc.hypothesize(calc.new_forest(STRONG), (LIB,))
    assert len(forest.entries) == 1 and forest.r == set()
    again = calc.hypothesize(forest, (LIB,))
    assert len(again.entries) == 1      # identical pairs collapse


def test_hypothesis_must_respect_order():
    forest = liberalized_forest(STRONG)
    forest = calc.hypothesize(forest, parse_sequent("P(u^e)"), name=None)
    # y^a has no predecessors, so any pair into it is fine
    assert calc.hypothesize(forest, parse_sequent("P(u^e)"), {(ue, ya)})
    ordered = replace(forest, choice=ChoiceCondition(forest.choice.entries, {(va, ya)}))
    with pytest.raises(ProofError):
        calc.hypothesize(ordered, parse_sequent("P(u^e)"), {(ue, va)})


def test_liberalized_delta():
    forest = calc.hypothesize(calc.new_forest(STRONG), parse_sequent("P(x^e), all y. ~P(y)"))
    forest = step(forest, 1, ya)
    assert leaf_seq(forest) == parse_sequent("~P(y^a), P(x^e)")
    assert forest.r == set()
    assert forest.choice.entries == {ya: parse_formula("~P(y^a)")}


def test_weak_delta():
    forest = calc.hypothesize(calc.new_forest(WEAK), parse_sequent("P(x^e), all y. ~P(y)"))
    forest = step(forest, 1, ya)
    assert forest.r == {(xe, ya)}
    assert not forest.choice


def test_delta_flavor_must_match_mode():
    for mode, flavor in ((WEAK, "liberalized"), (STRONG, "weak")):
        forest = calc.hypothesize(calc.new_forest(mode), parse_sequent("P(x^e), all y. ~P(y)"))
        with pytest.raises(ProofError):
            step(forest, 1, ya, flavor=flavor)
    forest = calc.hypothesize(calc.new_forest(STRONG), parse_sequent("P(x^e), all y. ~P(y)"))
    assert step(forest, 1, ya, flavor="liberalized").choice


def test_nested_condition_grows():
    forest = nested_forest()
    assert forest.r == {(ye, xa), (ye, za)}
    assert forest.choice.order == {(xa, za)}
    assert validate(forest.choice, forest.r)
    with pytest.raises(InadmissibleSubstitution) as info:
        calc.instantiate(forest, {ye: za})
    assert info.value.cycle is not None and set(info.value.cycle) == {ye, za}


def test_alpha_keeps_context():
    forest = calc.hypothesize(calc.new_forest(WEAK), parse_sequent("P(k), Q(k,k) | ~P(k), ~Q(k,k)"))
    forest = step(forest, 1)
    assert leaf_seq(forest) == parse_sequent("Q(k,k), ~P(k), P(k), ~Q(k,k)")


def test_beta_splits_and_gamma_keeps_principal():
    forest = calc.hypothesize(calc.new_forest(WEAK), parse_sequent("P(k) & Q(k,k), ex x. P(x)"))
    forest = step(forest, 0)
    assert [s for s in calc.open_sequents(forest.tree(0))] == [
        parse_sequent("P(k), ex x. P(x)"), parse_sequent("Q(k,k), ex x. P(x)")]
    forest = step(forest, 1, leaf=1)
    assert leaf_seq(forest, leaf=1) == parse_sequent("P(x^e), Q(k,k), ex x. P(x)")


def test_negated_rules():
    forest = calc.hypothesize(calc.new_forest(STRONG), parse_sequent("~(ex x. P(x)), ~(all y. P(y)), ~~P(k)"))
    forest = step(forest, 0, ya)
    assert leaf_seq(forest)[0] == parse_formula("~P(y^a)")
    forest = step(forest, 1, xe)
    assert leaf_seq(forest)[0] == parse_formula("~P(x^e)")
    forest = step(forest, 3)
    assert leaf_seq(forest)[0] == parse_formula("P(k)")


def test_freshness():
    forest = liberalized_forest(STRONG)
    with pytest.raises(ProofError):
        step(forest, 2, xe)                      # x^e occurs in the leaf
    forest2 = calc.hypothesize(forest, parse_sequent("all y. P(y)"))
    with pytest.raises(ProofError):
        step(forest2, 0, ya, tree=1)             # y^a is already chosen
    fresh = step(forest2, 0, tree=1)
    assert dvar("y1") in fresh.choice.entries


def test_liberalized_run_closes():
    forest = liberalized_forest(STRONG)
    forest = calc.instantiate(forest, {xe: ya})
    assert calc.open_sequents(forest.tree(0)) == [parse_sequent("~P(y^a), P(y^a), ex x. P(x) | (all y. ~P(y))")]
    assert forest.all_closed()
    forest = calc.qed(forest, 0)
    assert forest.trace[-1] == "qed 0"


def test_weak_run_is_blocked():
    forest = liberalized_forest(WEAK)
    with pytest.raises(InadmissibleSubstitution):
        calc.instantiate(forest, {xe: ya})


def test_identity_instantiation():
    forest = liberalized_forest(STRONG)
    after = calc.instantiate(forest, {})
    assert after.entries == forest.entries and after.r == forest.r


def test_dollar_rejected_on_crossed():
    forest = crossed_star()
    leaf = leaf_seq(forest)
    assert parse_formula("Q(x^e, y^a)") in leaf and parse_formula("~Q(v^a, u^e)") in leaf
    assert forest.r == {(xe, ya), (ue, va)}
    with pytest.raises(InadmissibleSubstitution) as info:
        calc.instantiate(forest, {xe: va, ue: ya})
    assert set(info.value.cycle) == {xe, ya, ue, va}
    assert calc.instantiate(forest, {xe: va}).r == {(ue, va), (ue, ya)}


def test_axioms():
    assert calc.is_axiom(parse_sequent("P(y^a), ~P(y^a)"))
    assert not calc.is_axiom(parse_sequent("P(x^e), ~P(y^a)"))
    assert calc.is_axiom(parse_sequent("~~Q, ~Q"))


def test_qed_refuses_open_tree():
    with pytest.raises(ProofError):
        calc.qed(liberalized_forest(STRONG), 0)


def test_leaves_and_sizes():
    forest = calc.hypothesize(calc.new_forest(WEAK), (LIB,))
    assert calc.open_sequents(forest.tree(0)) == [(LIB,)]
    assert calc.tree_size(liberalized_forest(WEAK).tree(0)) == 4


def test_trace_round_trip():
    forest = calc.instantiate(liberalized_forest(STRONG), {xe: ya})
    forest = calc.qed(forest, 0)
    again = calc.replay(forest.trace)
    assert again.entries == forest.entries
    assert again.r == forest.r and again.choice == forest.choice
    assert again.trace == forest.trace


def test_replay_reports_failing_step():
    forest = crossed_star()
    lines = list(forest.trace) + ["inst {x^e -> v^a, u^e -> y^a}"]
    with pytest.raises(calc.ReplayError) as info:
        calc.replay(lines)
    assert info.value.step == len(lines)
    assert isinstance(info.value.__cause__, InadmissibleSubstitution)


@pytest.mark.parametrize("line", ["expand 0#0 nonsense 0 -", "inst {y^a -> x^e}", "hyp unknown",
                                  "qed 0", "frobnicate"])
def test_replay_rejects_bad_lines(line):
    with pytest.raises(calc.ReplayError):
        calc.replay(["mode strong", "hyp [P(x^e), all y. ~P(y)]", line])


def test_mode_line_first():
    with pytest.raises(calc.ReplayError):
        calc.replay(["hyp [P(k)]", "mode strong"])


def test_externalization_without_choices():
    root = parse_sequent("P(x^e)")
    state = StrongState(frozenset({(xe, ya)}), ChoiceCondition({ya: parse_formula("~P(y^a)")}))
    new_root, r = calc.externalize_choices(root, state, {})
    assert new_root == root
    assert r == {(xe, ya)}


def test_externalization_renames_chosen_variables():
    we = gvar("w")
    root = parse_sequent("Q(y^a, y^a)")
    state = StrongState(frozenset(), ChoiceCondition({ya: parse_formula("Q(y^a, y^a)")}))
    new_root, r = calc.externalize_choices(root, state, {ya: we})
    assert new_root == parse_sequent("Q(w^e, w^e)")
    assert (we, ya) in r
    st2 = sem.parse_structure("universe a b; Q = id")
    assert sem.is_strong_valid([new_root], r, None, st2) == sem.is_strong_valid(
        [root], state.r, state.choice, st2)


def test_externalization_argument_checks():
    state = StrongState(frozenset(), ChoiceCondition({ya: parse_formula("P(y^a)")}))
    with pytest.raises(ProofError):
        calc.externalize_choices(parse_sequent("P(y^a)"), state, {})
    with pytest.raises(ProofError):
        calc.externalize_choices(parse_sequent("P(y^a), P(x^e)"), state, {ya: xe})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_random_runs_keep_the_invariant(seed):
    forest = random_run(random.Random(seed))
    assert invariant_violations(forest, SMALL) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_random_runs_replay(seed):
    forest = random_run(random.Random(seed))
    again = calc.replay(forest.trace)
    assert again.entries == forest.entries and again.r == forest.r and again.choice == forest.choice
