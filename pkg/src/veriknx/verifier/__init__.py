"""Symbolic execution and a complete decision procedure for the DSL fragment.

The executor enumerates every path of a loop-free handler (one fork per
branch); the solver decides conjunctions of boolean formulas over boolean
symbols, linear arithmetic atoms with rational coefficients, and string
(dis)equalities against literals. Verification checks, for every path and
every app, that states satisfying all invariants can only step to states
that still satisfy them; any counterexample model is replayed concretely
before it is reported.
"""

from .terms import (
    FAnd,
    FCmp,
    FNot,
    FOr,
    FStrEq,
    FSym,
    FALSE,
    TRUE,
    Formula,
    LinTerm,
    PathCondition,
    StrExpr,
    f_and,
    f_cmp,
    f_iff,
    f_not,
    f_or,
    render_formula,
)
from .solver import solve
from .symexec import SymbolicState, SymPath, build_invariant_formula, initial_state, symexec_iteration
from .check import (
    CheckOutcome,
    CompiledApp,
    Counterexample,
    InstallReport,
    VerificationTask,
    check_app,
    verify_installation,
)

__all__ = [
    "LinTerm",
    "Formula",
    "FSym",
    "FNot",
    "FAnd",
    "FOr",
    "FCmp",
    "FStrEq",
    "TRUE",
    "FALSE",
    "StrExpr",
    "PathCondition",
    "f_and",
    "f_or",
    "f_not",
    "f_cmp",
    "f_iff",
    "render_formula",
    "solve",
    "SymbolicState",
    "SymPath",
    "initial_state",
    "symexec_iteration",
    "build_invariant_formula",
    "CompiledApp",
    "VerificationTask",
    "Counterexample",
    "CheckOutcome",
    "InstallReport",
    "check_app",
    "verify_installation",
]
