"""The judgments of the theory and resolution of surface declarations.

Kernel judgments raise a :class:`~cohcheck.errors.CohError` on failure and
return ``None`` (or the inferred type) on success.  They work purely on core
syntax; the symbol table only matters while resolving surface programs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

from . import parser as P
from .errors import (
    ArityMismatch,
    CohError,
    DuplicateName,
    EndpointTypeMismatch,
    IllTypedEntry,
    NotContractible,
    TypeMismatch,
    UnboundVariable,
    UnknownName,
)
from .syntax import (
    STAR,
    Coh,
    CohDecl,
    Ctx,
    Hom,
    Star,
    Ty,
    Tm,
    Var,
    depth,
    dim,
    free_vars,
    show,
    substitute,
    syntactic_eq,
)


class JudgmentKind(enum.Enum):
    CTX_OK = "ctx"
    MOR_OK = "mor"
    TYPE_OK = "type"
    TERM_OK = "term"
    CONTR = "contr"


# ------------------------------------------------------------------ kernel

def check_context(ctx: Ctx) -> None:
    for i, (name, ty) in enumerate(ctx.entries):
        try:
            check_type(ctx.prefix(i), ty)
        except CohError as e:
            raise IllTypedEntry(name, e) from e


def check_type(ctx: Ctx, ty: Ty) -> None:
    _check_type(ctx, ty)


@lru_cache(maxsize=None)
def _check_type(ctx: Ctx, ty: Ty) -> None:
    if isinstance(ty, Star):
        return
    if not isinstance(ty, Hom):
        raise TypeError(f"check_type: unexpected {type(ty).__name__}")
    check_type(ctx, ty.base)
    left = infer_type(ctx, ty.lhs)
    right = infer_type(ctx, ty.rhs)
    lok, rok = syntactic_eq(left, ty.base), syntactic_eq(right, ty.base)
    if lok and rok:
        return
    if not syntactic_eq(left, right):
        raise EndpointTypeMismatch(
            f"endpoints have different types: {show(ty.lhs)} : {show(left)} "
            f"but {show(ty.rhs)} : {show(right)}",
            left,
            right,
        )
    raise TypeMismatch(
        f"endpoints have type {show(left)} but the base is {show(ty.base)}",
        left,
        ty.base,
    )


@lru_cache(maxsize=None)
def infer_type(ctx: Ctx, tm: Tm) -> Ty:
    if isinstance(tm, Var):
        return ctx.lookup(tm.name)
    if isinstance(tm, Coh):
        check_subscript(tm.ctx, tm.ty)
        check_ctx_morphism(ctx, tm.args, tm.ctx)
        return substitute(tm.ty, tm.args, tm.ctx)
    raise TypeError(f"infer_type: unexpected {type(tm).__name__}")


def check_term(ctx: Ctx, tm: Tm, expected: Ty) -> None:
    got = infer_type(ctx, tm)
    if not syntactic_eq(got, expected):
        raise TypeMismatch(
            f"{show(tm)} has type {show(got)} but {show(expected)} was expected",
            got,
            expected,
        )


def check_ctx_morphism(src: Ctx, gamma: tuple, dst: Ctx) -> None:
    gamma = tuple(gamma)
    if len(gamma) != len(dst):
        raise ArityMismatch(f"expected {len(dst)} arguments, got {len(gamma)}")
    for i, ((name, ty), u) in enumerate(zip(dst.entries, gamma)):
        try:
            check_term(src, u, substitute(ty, gamma, dst))
        except CohError as e:
            raise e.within(f"argument {i + 1} ({name})")


@lru_cache(maxsize=None)
def check_subscript(ctx: Ctx, ty: Ty) -> None:
    """The side conditions of the coh rule: ``ctx`` contractible, ``ty`` a type in it."""
    check_contractible(ctx)
    check_type(ctx, ty)


@dataclass(frozen=True)
class Step:
    """One application of the step rule: ``(y : ty) (z : u = y)``."""

    y: str
    ty: Ty
    z: str
    u: Tm


def contractible_shape(ctx: Ctx) -> tuple:
    """Peel two-entry blocks off the right; structural part only.

    Returns ``(base_name, steps)`` with steps in left-to-right order.  Typing
    of the ``u`` endpoints is left to :func:`check_contractible`.
    """
    entries = ctx.entries
    steps = []
    n = len(entries)
    while n > 1:
        if n == 2:
            raise NotContractible(
                f"context {show(ctx)} has even length, so no rule produces it"
            )
        (y, y_ty), (z, z_ty) = entries[n - 2], entries[n - 1]
        suffix = show(Ctx(entries[n - 2:]))
        if not isinstance(z_ty, Hom) or z_ty.rhs != Var(y):
            raise NotContractible(
                f"the suffix {suffix} does not end in a cell into the preceding entry"
            )
        if not syntactic_eq(z_ty.base, y_ty):
            raise NotContractible(
                f"in the suffix {suffix}, {y} has type {show(y_ty)} "
                f"but the cell lives in {show(z_ty.base)}"
            )
        prefix_names = set(n_ for n_, _ in entries[: n - 2])
        loose = free_vars(z_ty.lhs) - prefix_names
        if loose:
            raise NotContractible(
                f"in the suffix {suffix}, the source mentions {', '.join(sorted(loose))} "
                f"which is not in the preceding context"
            )
        steps.append(Step(y, y_ty, z, z_ty.lhs))
        n -= 2
    if n == 0:
        raise NotContractible("the empty context is not contractible")
    x, x_ty = entries[0]
    if not isinstance(x_ty, Star):
        raise NotContractible(f"a contractible context starts with a point, not {x} : {show(x_ty)}")
    steps.reverse()
    return x, tuple(steps)


@lru_cache(maxsize=None)
def check_contractible(ctx: Ctx) -> None:
    _, steps = contractible_shape(ctx)
    n = 1
    for s in steps:
        prefix = ctx.prefix(n)
        try:
            check_term(prefix, s.u, s.ty)
        except CohError as e:
            raise e.within(f"source of {s.z}")
        n += 2


def judge(kind: JudgmentKind, *args) -> bool:
    """Boolean front end to the kernel, for tests and property checks."""
    fn = {
        JudgmentKind.CTX_OK: check_context,
        JudgmentKind.MOR_OK: check_ctx_morphism,
        JudgmentKind.TYPE_OK: check_type,
        JudgmentKind.TERM_OK: check_term,
        JudgmentKind.CONTR: check_contractible,
    }[kind]
    try:
        fn(*args)
    except CohError:
        return False
    return True


def clear_caches() -> None:
    for f in (_check_type, infer_type, check_subscript, check_contractible):
        f.cache_clear()


# ------------------------------------------------------------ symbol table

@dataclass(frozen=True)
class DefDecl:
    name: str
    ctx: Ctx
    ty: Ty
    body: Tm


Entry = Union[CohDecl, DefDecl]


@dataclass(frozen=True)
class SymbolTable:
    items: tuple = ()

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.items)

    def get(self, name: str) -> Optional[Entry]:
        for n, e in self.items:
            if n == name:
                return e
        return None

    def add(self, entry: Entry) -> "SymbolTable":
        if entry.name in self:
            raise ValueError(f"{entry.name!r} already declared")
        return SymbolTable(self.items + ((entry.name, entry),))

    def entries(self) -> list:
        return [e for _, e in self.items]

    def cohs(self) -> list:
        return [e for _, e in self.items if isinstance(e, CohDecl)]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Optional[P.SourceSpan] = None

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": self.span.to_json() if self.span is not None else None,
        }


@dataclass(frozen=True)
class CheckReport:
    decl: str
    ok: bool
    dim: Optional[int] = None
    depth: Optional[int] = None
    diagnostics: tuple = ()
    entry: Optional[Entry] = field(default=None, compare=False, repr=False)

    @property
    def status(self) -> str:
        return "ok" if self.ok else "error"

    def to_json(self) -> dict:
        return {
            "decl": self.decl,
            "status": self.status,
            "dim": self.dim,
            "depth": self.depth,
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }


# -------------------------------------------------------------- resolution

def _locate(e: CohError, span) -> CohError:
    return e.located(span)


def resolve_term(table: SymbolTable, ctx: Ctx, t: P.STm) -> Tm:
    """Translate a surface term, typechecking it as it is built."""
    try:
        if isinstance(t, P.SVar):
            if t.name in ctx:
                return Var(t.name)
            if t.name in table:
                raise ArityMismatch(f"{t.name!r} is a declaration and needs arguments")
            raise UnboundVariable(f"unbound variable {t.name!r}")
        entry = table.get(t.name)
        if entry is None:
            raise UnknownName(f"unknown declaration {t.name!r}")
        args = tuple(resolve_term(table, ctx, a) for a in t.args)
        if len(args) != len(entry.ctx):
            raise ArityMismatch(
                f"{t.name} expects {len(entry.ctx)} arguments, got {len(args)}"
            )
        if isinstance(entry, CohDecl):
            out = Coh(entry.ctx, entry.ty, args, entry.name)
            infer_type(ctx, out)
            return out
        check_ctx_morphism(ctx, args, entry.ctx)
        return substitute(entry.body, args, entry.ctx)
    except CohError as e:
        raise _locate(e, t.span)


def resolve_type(table: SymbolTable, ctx: Ctx, t: P.STy) -> Ty:
    try:
        if isinstance(t, P.SStar):
            return STAR
        lhs = resolve_term(table, ctx, t.lhs)
        rhs = resolve_term(table, ctx, t.rhs)
        if t.base is not None:
            out = Hom(resolve_type(table, ctx, t.base), lhs, rhs)
        else:
            # the base is read off the left endpoint
            out = Hom(infer_type(ctx, lhs), lhs, rhs)
        check_type(ctx, out)
        return out
    except CohError as e:
        raise _locate(e, t.span)


def resolve_tele(table: SymbolTable, tele: tuple) -> Ctx:
    ctx = Ctx()
    for entry in tele:
        if entry.name in ctx:
            raise DuplicateName(f"duplicate name {entry.name!r} in context", entry.span)
        try:
            ty = resolve_type(table, ctx, entry.ty)
        except CohError as e:
            raise IllTypedEntry(entry.name, e).located(entry.span) from e
        ctx = ctx.extend(entry.name, ty)
    return ctx


def _elaborate_decl(table: SymbolTable, decl) -> Entry:
    ctx = resolve_tele(table, decl.tele)
    if isinstance(decl, P.CohDeclSrc):
        try:
            check_contractible(ctx)
        except CohError as e:
            raise e.located(decl.span)
        ty = resolve_type(table, ctx, decl.ty)
        return CohDecl(decl.name, ctx, ty)
    ty = resolve_type(table, ctx, decl.ty)
    body = resolve_term(table, ctx, decl.body)
    try:
        check_term(ctx, body, ty)
    except CohError as e:
        raise e.located(decl.body.span)
    return DefDecl(decl.name, ctx, ty, body)


def check_declaration(table: SymbolTable, decl) -> tuple:
    """Check one surface declaration; returns ``(report, new_table)``."""
    try:
        entry = _elaborate_decl(table, decl)
    except CohError as e:
        diag = Diagnostic(e.code, e.describe(), e.span if e.span is not None else decl.span)
        return CheckReport(decl.name, False, diagnostics=(diag,)), table
    report = CheckReport(decl.name, True, dim(entry.ty), depth(entry.ty), entry=entry)
    return report, table.add(entry)


def run_program(program: P.Program, fail_fast: bool = False, table: Optional[SymbolTable] = None):
    """Fold :func:`check_declaration` over a program; returns ``(reports, table)``."""
    table = table if table is not None else SymbolTable()
    reports = []
    for decl in program.decls:
        report, table = check_declaration(table, decl)
        reports.append(report)
        if fail_fast and not report.ok:
            break
    return reports, table


def check_program(program: P.Program, fail_fast: bool = False) -> list:
    return run_program(program, fail_fast)[0]


def check_source(text: str, file: str = "<input>", fail_fast: bool = False):
    return run_program(P.parse_program(text, file), fail_fast)
