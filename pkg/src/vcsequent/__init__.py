"""Sequent calculi with explicit variable conditions instead of Skolem terms.

The package has a proof kernel (:mod:`vcsequent.calculus`), an automated
prover (:mod:`vcsequent.prover`) and a brute-force finite-model oracle
(:mod:`vcsequent.semantics`) for checking the kernel's soundness claims.
"""

from .syntax import (Formula, Kind, Sequent, Substitution, Var, conjugate,
                     dvar, format_formula, format_problems, format_sequent, free_vars,
                     gvar, parse_formula, parse_problems, parse_sequent)
from .varcond import (InadmissibleSubstitution, is_strong_admissible,
                      is_weak_admissible, strong_update, weak_update)
from .choice import ChoiceCondition, StrongState, extended_strong_update
from .calculus import ProofForest, RuleInstance, expand, hypothesize, instantiate, new_forest
from .prover import Proved, SearchLimits, Unproven, countermodel, search

__version__ = "0.1.0"

__all__ = [
    "Formula", "Kind", "Sequent", "Substitution", "Var", "conjugate", "dvar",
    "format_formula", "format_problems", "format_sequent", "free_vars", "gvar", "parse_formula",
    "parse_problems", "parse_sequent", "InadmissibleSubstitution", "is_strong_admissible",
    "is_weak_admissible", "strong_update", "weak_update", "ChoiceCondition",
    "StrongState", "extended_strong_update", "ProofForest", "RuleInstance",
    "expand", "hypothesize", "instantiate", "new_forest", "Proved",
    "SearchLimits", "Unproven", "countermodel", "search",
]
