"""Abstract syntax of the coherence type theory and its structural operations.

Types are ``*`` (:class:`Star`) or iterated homs ``u =[T] v`` (:class:`Hom`);
terms are variables or coherence applications ``coh[D : T](args)``
(:class:`Coh`).  A coherence node carries its whole subscript ``(D, T)``; the
subscript is a closed package, so free variables, substitution and renaming
only ever look at the argument list.

All nodes are frozen and hashable.  Hashes are memoised because subscripts get
shared and compared a lot.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Union

from .errors import ArityMismatch, DuplicateName, UnboundVariable

RESERVED = frozenset({"coh", "def"})
_NAME_RE = re.compile(r"\S+")


def _memo_hash(cls):
    """Cache the structural hash and short-circuit equality on identity."""
    raw = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = raw(self)
            object.__setattr__(self, "_hash", h)
            return h

    raw_eq = cls.__eq__

    def __eq__(self, other):
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return NotImplemented
        if hash(self) != hash(other):
            return False
        return raw_eq(self, other)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


_CONSED: dict = {}


class _HashConsed(type):
    """Metaclass returning one shared instance per distinct value.

    Children are consed before their parents, so the table lookup only ever
    compares one level deep.  Subscripts are shared heavily and deep
    comparison of equal but distinct copies would otherwise walk them as
    trees.  The display label of a coherence is part of the key so that
    labels survive.
    """

    def __call__(cls, *args, **kwargs):
        obj = super().__call__(*args, **kwargs)
        key = (obj, obj.__dict__.get("label"))
        return _CONSED.setdefault(key, obj)


def check_name(name: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.fullmatch(name) or name in RESERVED:
        raise ValueError(f"invalid identifier {name!r}")
    return name


@_memo_hash
@dataclass(frozen=True)
class Star(metaclass=_HashConsed):
    def __repr__(self) -> str:
        return "Star()"


@_memo_hash
@dataclass(frozen=True)
class Hom(metaclass=_HashConsed):
    base: "Ty"
    lhs: "Tm"
    rhs: "Tm"


@_memo_hash
@dataclass(frozen=True)
class Var(metaclass=_HashConsed):
    name: str


@_memo_hash
@dataclass(frozen=True)
class Coh(metaclass=_HashConsed):
    ctx: "Ctx"
    ty: "Ty"
    args: tuple
    # display only: the declaration this node was resolved from
    label: Optional[str] = field(default=None, compare=False)


@_memo_hash
@dataclass(frozen=True)
class Ctx(metaclass=_HashConsed):
    entries: tuple = ()

    def __post_init__(self):
        seen = set()
        for name, _ in self.entries:
            check_name(name)
            if name in seen:
                raise DuplicateName(f"duplicate name {name!r} in context")
            seen.add(name)

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, name) -> bool:
        return any(n == name for n, _ in self.entries)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.entries):
            if n == name:
                return i
        raise UnboundVariable(f"unbound variable {name!r}")

    def lookup(self, name: str) -> "Ty":
        return self.entries[self.index(name)][1]

    def extend(self, name: str, ty: "Ty") -> "Ctx":
        return Ctx(self.entries + ((name, ty),))

    def prefix(self, n: int) -> "Ctx":
        return Ctx(self.entries[:n])

    def identity(self) -> tuple:
        return tuple(Var(n) for n in self.names)


Ty = Union[Star, Hom]
Tm = Union[Var, Coh]
CtxMor = tuple  # of Tm, positionally paired with a target context

STAR = Star()


def hom(lhs: Tm, rhs: Tm, base: Ty = STAR) -> Hom:
    return Hom(base, lhs, rhs)


# ---------------------------------------------------------------- free vars

def free_vars(x) -> frozenset:
    """Names occurring in ``x`` outside every coherence subscript."""
    if isinstance(x, Var):
        return frozenset((x.name,))
    if isinstance(x, Coh):
        return _fv_seq(x.args)
    if isinstance(x, Hom):
        return free_vars(x.base) | free_vars(x.lhs) | free_vars(x.rhs)
    if isinstance(x, Star):
        return frozenset()
    if isinstance(x, tuple):
        return _fv_seq(x)
    raise TypeError(f"free_vars: unexpected {type(x).__name__}")


def _fv_seq(xs) -> frozenset:
    out = frozenset()
    for t in xs:
        out |= free_vars(t)
    return out


# ------------------------------------------------------------- substitution

def _subst(x, mapping: dict, strict: bool, memo: dict):
    try:
        return memo[x]
    except KeyError:
        pass
    if isinstance(x, Var):
        try:
            out = mapping[x.name]
        except KeyError:
            if strict:
                raise UnboundVariable(f"unbound variable {x.name!r}") from None
            out = x
    elif isinstance(x, Coh):
        args = tuple(_subst(a, mapping, strict, memo) for a in x.args)
        out = x if args == x.args else Coh(x.ctx, x.ty, args, x.label)
    elif isinstance(x, Hom):
        out = Hom(
            _subst(x.base, mapping, strict, memo),
            _subst(x.lhs, mapping, strict, memo),
            _subst(x.rhs, mapping, strict, memo),
        )
    elif isinstance(x, Star):
        out = x
    elif isinstance(x, tuple):
        out = tuple(_subst(t, mapping, strict, memo) for t in x)
    else:
        raise TypeError(f"substitute: unexpected {type(x).__name__}")
    memo[x] = out
    return out


def substitute(x, gamma: CtxMor, ctx: Ctx):
    """Simultaneous substitution ``x[gamma/ctx]``.

    Only argument lists are traversed; subscripts come back as the very same
    objects.
    """
    gamma = tuple(gamma)
    if len(gamma) != len(ctx):
        raise ArityMismatch(
            f"morphism has {len(gamma)} terms but the context has {len(ctx)} entries"
        )
    return _subst(x, dict(zip(ctx.names, gamma)), True, {})


def rename(x, mapping: dict):
    """Total renaming of free variables; names missing from ``mapping`` stay."""
    return _subst(x, {k: Var(v) for k, v in mapping.items()}, False, {})


def project(gamma: CtxMor, ctx: Ctx, name: str) -> Tm:
    if len(gamma) != len(ctx):
        raise ArityMismatch(
            f"morphism has {len(gamma)} terms but the context has {len(ctx)} entries"
        )
    return gamma[ctx.index(name)]


# ------------------------------------------------------------ depth and dim

@lru_cache(maxsize=None)
def _depth(x) -> int:
    if isinstance(x, (Var, Star)):
        return 0
    if isinstance(x, Coh):
        return max(depth(x.args), _depth(x.ty) + 1, depth(x.ctx) + 1)
    if isinstance(x, Hom):
        return max(_depth(x.base), _depth(x.lhs), _depth(x.rhs))
    raise TypeError(f"depth: unexpected {type(x).__name__}")


def depth(x) -> int:
    if isinstance(x, Ctx):
        return max((_depth(t) for _, t in x.entries), default=0)
    if isinstance(x, tuple):
        return max((_depth(t) for t in x), default=0)
    return _depth(x)


def dim(t: Ty) -> int:
    n = 0
    while isinstance(t, Hom):
        t = t.base
        n += 1
    return n


# --------------------------------------------------------- alpha-equivalence

CANON_PREFIX = "v"


@lru_cache(maxsize=None)
def _canon_closed(ctx: Ctx, ty):
    mapping = {name: f"{CANON_PREFIX}{i}" for i, name in enumerate(ctx.names)}
    entries = tuple(
        (mapping[name], _canon(rename(t, mapping))) for name, t in ctx.entries
    )
    return Ctx(entries), _canon(rename(ty, mapping))


@lru_cache(maxsize=None)
def _canon(x):
    if isinstance(x, (Var, Star)):
        return x
    if isinstance(x, Coh):
        ctx, ty = _canon_closed(x.ctx, x.ty)
        return Coh(ctx, ty, tuple(_canon(a) for a in x.args), x.label)
    if isinstance(x, Hom):
        return Hom(_canon(x.base), _canon(x.lhs), _canon(x.rhs))
    raise TypeError(f"alpha_canonicalize: unexpected {type(x).__name__}")


def alpha_canonicalize(x):
    """Rename every subscript's binders to ``v0, v1, ...``; free names stay."""
    if isinstance(x, Ctx):
        return Ctx(tuple((n, _canon(t)) for n, t in x.entries))
    if isinstance(x, tuple):
        return tuple(_canon(t) for t in x)
    return _canon(x)


def syntactic_eq(a, b) -> bool:
    if a is b:
        return True
    return alpha_canonicalize(a) == alpha_canonicalize(b)


# ------------------------------------------------------------------ helpers

def subterms(x) -> Iterator:
    """Terms occurring in ``x`` outside subscripts, outermost first."""
    if isinstance(x, Var):
        yield x
    elif isinstance(x, Coh):
        yield x
        for a in x.args:
            yield from subterms(a)
    elif isinstance(x, Hom):
        yield from subterms(x.base)
        yield from subterms(x.lhs)
        yield from subterms(x.rhs)
    elif isinstance(x, tuple):
        for t in x:
            yield from subterms(t)


def disk_context(n: int) -> Ctx:
    """The n-disk ``(x0:*) (y0:*) (x1:x0=y0) (y1:x0=y0) ...`` up to one n-cell.

    It is contractible: every step appends a parallel target and a cell into it.
    """
    entries = [("d0", STAR)]
    top, top_ty = "d0", STAR
    for k in range(1, n + 1):
        y, z = f"e{k - 1}", f"d{k}"
        entries.append((y, top_ty))
        z_ty = Hom(top_ty, Var(top), Var(y))
        entries.append((z, z_ty))
        top, top_ty = z, z_ty
    return Ctx(tuple(entries))


def disk_morphism(ty: Ty, term: Tm) -> CtxMor:
    """Morphism into ``disk_context(dim(ty))`` sending the top cell to ``term``."""
    if isinstance(ty, Star):
        return (term,)
    return disk_morphism(ty.base, ty.lhs) + (ty.rhs, term)


def identity_cell(ty: Ty, term: Tm) -> Tm:
    """The constant path on ``term : ty`` at any dimension."""
    n = dim(ty)
    disk = disk_context(n)
    top = Var(disk.names[-1])
    return Coh(disk, Hom(disk.entries[-1][1], top, top), disk_morphism(ty, term), f"id{n}")


# ----------------------------------------------------------------- printing

def show(x, annotate: bool = False) -> str:
    if isinstance(x, Var):
        return x.name
    if isinstance(x, Coh):
        args = ", ".join(show(a, annotate) for a in x.args)
        if x.label is not None:
            return f"{x.label}({args})"
        return f"coh[{show(x.ctx, annotate)} : {show(x.ty, annotate)}]({args})"
    if isinstance(x, Star):
        return "*"
    if isinstance(x, Hom):
        if annotate:
            return f"{show(x.lhs, annotate)} =[{show(x.base, annotate)}] {show(x.rhs, annotate)}"
        return f"{show(x.lhs, annotate)} = {show(x.rhs, annotate)}"
    if isinstance(x, Ctx):
        groups: list[tuple[list, object]] = []
        for name, t in x.entries:
            if groups and groups[-1][1] == t:
                groups[-1][0].append(name)
            else:
                groups.append(([name], t))
        return " ".join(f"({' '.join(ns)} : {show(t, annotate)})" for ns, t in groups)
    if isinstance(x, tuple):
        return "(" + ", ".join(show(t, annotate) for t in x) + ")"
    raise TypeError(f"show: unexpected {type(x).__name__}")


@dataclass(frozen=True)
class CohDecl:
    """A named coherence: ``ctx`` contractible and ``ty`` a type over it."""

    name: str
    ctx: Ctx
    ty: Ty

    def term(self) -> Coh:
        """``coh[ctx : ty]`` applied to the identity morphism."""
        return Coh(self.ctx, self.ty, self.ctx.identity(), self.name)
