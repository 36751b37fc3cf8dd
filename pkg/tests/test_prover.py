import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcsequent import calculus as calc
from vcsequent import semantics as sem
from vcsequent.acceptance import random_atom, random_formula
from vcsequent.prover import (SearchLimits, close_attempt, countermodel,
                              extract_answers, search, unify_formulas,
                              unify_terms)
from vcsequent.syntax import (App, Atom, Exists, Forall, Kind, Not, Or, Var, dvar,
                              gvar, parse_formula, parse_sequent, signature_of)

xe, ye, ze, ue = gvar("x"), gvar("y"), gvar("z"), gvar("u")
xa, ya, va = dvar("x"), dvar("y"), dvar("v")
LIB = "ex x. (P(x) | all y. ~P(y))"
CROSSED = "(ex x. all y. Q(x,y)) | (ex u. all v. ~Q(v,u))"
NESTED = "ex y. all x. (~Q(x,y) | all z. Q(x,z))"
ANSWER = "all x. Q(x,x), ex y. (~Q(y,y) & ~P(y)), P(z^e)"


def test_unification():
    assert unify_terms(xe, App("f", (ya,)), {}) == {xe: App("f", (ya,))}
    assert unify_terms(xe, App("f", (xe,)), {}) is None       # occurs check
    assert unify_terms(ya, va, {}) is None                     # universal variables are rigid
    b = unify_formulas(parse_formula("Q(x^e, y^a)"), parse_formula("Q(v^a, u^e)"), {})
    assert b == {xe: va, ue: ya}
    assert unify_formulas(parse_formula("P(x^e)"), parse_formula("~P(x^e)"), {}) is None


def test_liberalized_strong_needs_one_round():
    res = search(parse_formula(LIB), "strong", SearchLimits(1))
    assert res.proved and res.sigma == {xe: ya}


def test_liberalized_weak_needs_two_rounds():
    f = parse_formula(LIB)
    assert not search(f, "weak", SearchLimits(1)).proved
    res = search(f, "weak", SearchLimits(2))
    assert res.proved and res.multiplicity == 2


@pytest.mark.parametrize("mode", ["weak", "strong"])
def test_invalid_equation_stays_unproven(mode):
    assert not search(parse_formula("ex x. all y. (x = y)"), mode).proved


@pytest.mark.parametrize("text", [CROSSED, NESTED])
@pytest.mark.parametrize("mode", ["weak", "strong"])
def test_invalid_examples_stay_unproven(text, mode):
    assert not search(parse_formula(text), mode, SearchLimits(3)).proved


def test_close_attempt_refuses_dollar():
    forest = calc.hypothesize(calc.new_forest("strong"), (parse_formula(CROSSED),))
    for idx, var in ((0, None), (0, xe), (2, ue), (1, ya), (1, va)):
        f = forest.leaf(0, 0)[1].label[idx]
        forest = calc.expand(forest, calc.RuleInstance(0, 0, calc.rule_for(f), idx, var))
    assert close_attempt(forest) is None


def test_close_attempt_on_axiom():
    forest = calc.hypothesize(calc.new_forest("strong"), parse_sequent("P(y^a), ~P(y^a)"))
    assert close_attempt(forest) == {}


def test_answer_extraction():
    res = search(parse_sequent(ANSWER), "strong", SearchLimits(1))
    assert res.proved
    assert res.sigma == {ye: xa, ze: xa}
    assert res.answers == {ze: xa}
    assert res.choice_report[0] == "choose x^a such that Q(x^a, x^a) is false"
    assert res.choice_report[1] == "x^a = eps x. ~(Q(x, x))"
    assert extract_answers(res, set()) == ({}, [])


def test_answer_extraction_weak_mode_has_no_choices():
    res = search(parse_formula(LIB), "weak", SearchLimits(2))
    answers, report = extract_answers(res, {gvar("x1")})
    assert report == [] and answers


def test_answer_for_introduced_variable():
    # frozen output of the search: the instance of x^e is the chosen y^a
    res = search(parse_formula("all y. ex x. (~P(y) | P(x))"), "strong")
    answers, report = extract_answers(res, {xe})
    assert answers == {xe: ya}
    assert report[0].startswith("choose y^a such that")


def test_equation_hypothesis_has_no_proof():
    assert not search(parse_sequent("x^e = y^a"), "strong").proved
    assert not search(parse_formula("all y. ex x. x = y"), "strong").proved


@pytest.mark.parametrize("text", [CROSSED, NESTED])
def test_countermodels(text):
    cm = countermodel(parse_formula(text), 2)
    assert cm is not None and cm.size == 2
    assert sem.format_structure(cm) == "universe a b; Q = id"


def test_no_countermodel_for_tautology():
    assert countermodel(parse_formula("P(a) | ~P(a)"), 2) is None


def test_budget():
    res = search(parse_formula(CROSSED), "strong", SearchLimits(3, node_budget=5))
    assert not res.proved and "budget" in res.reason


def test_limits_validated():
    with pytest.raises(ValueError):
        SearchLimits(0)


def _check_proof(f, res, structures):
    forest = res.forest
    replayed = calc.replay(res.trace)
    assert replayed.all_closed()
    assert countermodel(f, 2) is None
    for st_ in structures:
        assert sem.is_r_valid([(f,)], forest.r, st_)
        if forest.mode == "strong":
            assert sem.is_strong_valid([(f,)], forest.r, forest.choice, st_)


def provable_shape(rng):
    """Random formulas biased towards validity, so that proofs actually occur."""
    f = random_formula(rng, rng.choice((1, 2, 3)), [])
    b, c = Var("b", Kind.BOUND), Var("c", Kind.BOUND)
    m = random_atom(rng, [b, c])
    roll = rng.random()
    if roll < 0.3:
        return Or(f, Not(f))
    if roll < 0.6:
        # ex b. all c. M -> all c. ex b. M
        return Or(Not(Exists("b", Forall("c", m))), Forall("c", Exists("b", m)))
    if roll < 0.75:
        return Exists("b", Or(Not(Atom("P", (b,))), Forall("c", Atom("P", (c,)))))
    if roll < 0.9:
        # the converse swap, usually invalid: a proof here would be a soundness bug
        return Or(Not(Forall("c", Exists("b", m))), Exists("b", Forall("c", m)))
    return f


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["weak", "strong"]))
def test_never_unsound(seed, mode):
    rng = random.Random(seed)
    f = provable_shape(rng)
    res = search(f, mode, SearchLimits(2, 3000))
    if res.proved:
        structures = list(sem.all_structures(signature_of(f), 2))
        _check_proof(f, res, structures)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["weak", "strong"]))
def test_monotone_in_multiplicity(seed, mode):
    rng = random.Random(seed)
    f = provable_shape(rng)
    if search(f, mode, SearchLimits(1, 3000)).proved:
        assert search(f, mode, SearchLimits(2, 6000)).proved


@pytest.mark.parametrize("text", [
    "ex x. (~P(x) | all y. P(y))",
    "~(ex x. all y. (Q(x,y) & ~Q(y,y) | ~Q(x,y) & Q(y,y)))",
    "(all x. ex y. Q(x,y)) -> (all x. ex y. Q(x,y))",
    LIB,
])
@pytest.mark.parametrize("mode", ["weak", "strong"])
def test_known_theorems(text, mode):
    f = parse_formula(text)
    res = search(f, mode)
    assert res.proved
    _check_proof(f, res, list(sem.all_structures(signature_of(f), 2)))
