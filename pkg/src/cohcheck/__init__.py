"""Type checker, MLTT elaborator and finite-model interpreter for coherences of weak ∞-groupoids."""

from .checker import (
    CheckReport,
    SymbolTable,
    check_context,
    check_contractible,
    check_ctx_morphism,
    check_program,
    check_term,
    check_type,
    infer_type,
    run_program,
)
from .errors import CohError
from .parser import parse_program, print_program
from .syntax import (
    STAR,
    Coh,
    CohDecl,
    Ctx,
    Hom,
    Star,
    Var,
    alpha_canonicalize,
    depth,
    dim,
    free_vars,
    project,
    substitute,
    syntactic_eq,
)

__version__ = "0.1.0"

__all__ = [
    "STAR", "Coh", "CohDecl", "Ctx", "Hom", "Star", "Var",
    "alpha_canonicalize", "depth", "dim", "free_vars", "project", "substitute", "syntactic_eq",
    "CheckReport", "SymbolTable", "check_context", "check_contractible", "check_ctx_morphism",
    "check_program", "check_term", "check_type", "infer_type", "run_program",
    "CohError", "parse_program", "print_program",
]
