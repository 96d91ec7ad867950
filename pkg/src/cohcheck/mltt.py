"""Translation into a fragment of Martin-Löf type theory with identity types.

The target fragment has one base type ``A``, identity types, ``idp`` and the
``J`` eliminator with its computation rule.  Every coherence is translated to
an iterated ``J`` over its contractible context; the diagonal lemmas say that
at the diagonal morphism everything computes down to iterated ``idp``.

Terms built from coherences are kept as :class:`MCohRef` until normalization
so that elaboration stays linear in the size of the source.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .checker import contractible_shape, infer_type
from .errors import LemmaFailure
from .syntax import _memo_hash, Coh, CohDecl, Ctx, Hom, Star, Ty, Tm, Var, dim, subterms

BASE_NAME = "A"
POINT = "a"


# ------------------------------------------------------------------- syntax

@_memo_hash
@dataclass(frozen=True)
class MBase:
    name: str = BASE_NAME


@_memo_hash
@dataclass(frozen=True)
class MId:
    base: "MTy"
    lhs: "MTm"
    rhs: "MTm"


@_memo_hash
@dataclass(frozen=True)
class MVar:
    name: str


@_memo_hash
@dataclass(frozen=True)
class MIdp:
    arg: "MTm"


@_memo_hash
@dataclass(frozen=True)
class Motive:
    """A defunctionalised binder: ``params`` bound in ``body``."""

    params: tuple
    body: object

    def __call__(self, *args):
        if len(args) != len(self.params):
            raise ValueError(f"motive takes {len(self.params)} arguments, got {len(args)}")
        return msubst(self.body, dict(zip(self.params, args)))


@_memo_hash
@dataclass(frozen=True)
class MJ:
    """``J(u, P, d)(v, p)`` with ``P`` a motive over ``(y, z)``.

    ``d`` is the value at ``(u, idp u)``; it does not bind anything.
    """

    point: "MTm"
    motive: Motive
    diag: "MTm"
    end: "MTm"
    path: "MTm"


@_memo_hash
@dataclass(frozen=True)
class MCohRef:
    """A translated coherence applied to ``args``, not yet unfolded."""

    ctx: Ctx
    ty: Ty
    args: tuple
    label: Optional[str] = field(default=None, compare=False)


MTy = Union[MBase, MId]
MTm = Union[MVar, MIdp, MJ, MCohRef]

_fresh = itertools.count()


def _fresh_name(hint: str) -> str:
    # '%' cannot occur in source identifiers, so these never clash
    return f"{hint.split('%')[0]}%{next(_fresh)}"


def mfree(x) -> frozenset:
    if isinstance(x, MVar):
        return frozenset((x.name,))
    if isinstance(x, MBase):
        return frozenset()
    if isinstance(x, MIdp):
        return mfree(x.arg)
    if isinstance(x, MId):
        return mfree(x.base) | mfree(x.lhs) | mfree(x.rhs)
    if isinstance(x, MJ):
        return (
            mfree(x.point) | (mfree(x.motive.body) - set(x.motive.params))
            | mfree(x.diag) | mfree(x.end) | mfree(x.path)
        )
    if isinstance(x, MCohRef):
        out = frozenset()
        for a in x.args:
            out |= mfree(a)
        return out
    raise TypeError(f"mfree: unexpected {type(x).__name__}")


def msubst(x, mapping: dict):
    """Capture-avoiding simultaneous substitution of names by MLTT terms."""
    if not mapping:
        return x
    if isinstance(x, MVar):
        return mapping.get(x.name, x)
    if isinstance(x, MBase):
        return x
    if isinstance(x, MIdp):
        return MIdp(msubst(x.arg, mapping))
    if isinstance(x, MId):
        return MId(msubst(x.base, mapping), msubst(x.lhs, mapping), msubst(x.rhs, mapping))
    if isinstance(x, MJ):
        return MJ(
            msubst(x.point, mapping),
            _subst_motive(x.motive, mapping),
            msubst(x.diag, mapping),
            msubst(x.end, mapping),
            msubst(x.path, mapping),
        )
    if isinstance(x, MCohRef):
        return MCohRef(x.ctx, x.ty, tuple(msubst(a, mapping) for a in x.args), x.label)
    raise TypeError(f"msubst: unexpected {type(x).__name__}")


def _subst_motive(m: Motive, mapping: dict) -> Motive:
    fresh = tuple(_fresh_name(p) for p in m.params)
    inner = {k: v for k, v in mapping.items() if k not in m.params}
    inner.update({p: MVar(f) for p, f in zip(m.params, fresh)})
    return Motive(fresh, msubst(m.body, inner))


# ------------------------------------------------------------------- towers

def iterated_tower(a: str, n: int) -> tuple:
    """``(I_n, i_n)``: the n-fold identity type on the point ``a`` and its idp."""
    ty, tm = MBase(), MVar(a)
    for _ in range(n):
        ty, tm = MId(ty, tm, tm), MIdp(tm)
    return ty, tm


# --------------------------------------------------------------- elaborator

def j_delta_standard(el: "Elaborator", delta: Ctx, motive: Motive, d: Motive) -> Motive:
    """``J_Delta(P, d)`` as a motive over the names of ``delta``.

    Base case ``(x : *)``: ``x |-> d(x)``.  Step case
    ``(D', y : T, z : u = y)``: one ``J`` at ``u`` whose diagonal case is
    ``J_{D'}`` for the motive restricted along ``(y, z) := (u, idp u)``.
    """
    x, steps = contractible_shape(delta)
    if not steps:
        return Motive((x,), d(MVar(x)))
    last = steps[-1]
    prefix = delta.prefix(len(delta) - 2)
    u = el.elaborate_tm(prefix, last.u)
    restricted = Motive(prefix.names, msubst(motive.body, {last.y: u, last.z: MIdp(u)}))
    inner = el.j_delta(prefix, restricted, d)
    body = MJ(
        u,
        Motive((last.y, last.z), motive.body),
        inner.body,
        MVar(last.y),
        MVar(last.z),
    )
    return Motive(delta.names, body)


JDelta = Callable[["Elaborator", Ctx, Motive, Motive], Motive]


class Elaborator:
    """Translation and normalization, parameterised by the ``J_Delta`` construction.

    Swapping ``j_delta`` is how negative fixtures plant a broken eliminator.
    """

    def __init__(self, j_delta: JDelta = j_delta_standard):
        self._j_delta = j_delta
        self._unfold_cache: dict = {}
        self._norm_cache: dict = {}
        self._lemma_cache: dict = {}

    def j_delta(self, delta: Ctx, motive: Motive, d: Motive) -> Motive:
        return self._j_delta(self, delta, motive, d)

    # translation ----------------------------------------------------------

    def elaborate_ty(self, ctx: Ctx, t: Ty) -> Motive:
        return Motive(ctx.names, self._ty(t))

    def elaborate_tm(self, ctx: Ctx, t: Tm) -> MTm:
        """The body of ``[[t]]``: a term whose free names are those of ``ctx``."""
        return self._tm(t)

    def elaborate_mor(self, src: Ctx, gamma: tuple, dst: Ctx) -> tuple:
        return tuple(self._tm(u) for u in gamma)

    def _ty(self, t: Ty):
        if isinstance(t, Star):
            return MBase()
        return MId(self._ty(t.base), self._tm(t.lhs), self._tm(t.rhs))

    def _tm(self, t: Tm):
        if isinstance(t, Var):
            return MVar(t.name)
        return MCohRef(t.ctx, t.ty, tuple(self._tm(a) for a in t.args), t.label)

    def coh_motive(self, ctx: Ctx, ty: Ty) -> Motive:
        """``J_Delta([[T]], a |-> i_dim T)`` over the names of ``ctx``."""
        key = (ctx, ty)
        try:
            return self._unfold_cache[key]
        except KeyError:
            pass
        n = dim(ty)
        d = Motive((POINT,), iterated_tower(POINT, n)[1])
        out = self.j_delta(ctx, self.elaborate_ty(ctx, ty), d)
        self._unfold_cache[key] = out
        return out

    def unfold(self, ref: MCohRef):
        return self.coh_motive(ref.ctx, ref.ty)(*ref.args)

    # normalization ---------------------------------------------------------

    def normalize(self, x):
        """Leftmost-innermost normal form; stuck ``J`` applications stay."""
        try:
            return self._norm_cache[x]
        except KeyError:
            pass
        out = self._normalize(x)
        self._norm_cache[x] = out
        self._norm_cache[out] = out
        return out

    def _normalize(self, x):
        if isinstance(x, (MVar, MBase)):
            return x
        if isinstance(x, MIdp):
            return MIdp(self.normalize(x.arg))
        if isinstance(x, MId):
            return MId(self.normalize(x.base), self.normalize(x.lhs), self.normalize(x.rhs))
        if isinstance(x, MCohRef):
            args = tuple(self.normalize(a) for a in x.args)
            return self.normalize(self.unfold(MCohRef(x.ctx, x.ty, args, x.label)))
        if isinstance(x, MJ):
            point = self.normalize(x.point)
            end = self.normalize(x.end)
            path = self.normalize(x.path)
            if isinstance(path, MIdp) and alpha_eq(path.arg, point) and alpha_eq(end, point):
                return self.normalize(x.diag)
            m = x.motive
            return MJ(point, Motive(m.params, self.normalize(m.body)), self.normalize(x.diag), end, path)
        raise TypeError(f"normalize: unexpected {type(x).__name__}")

    # diagonal -------------------------------------------------------------

    def diag(self, delta: Ctx, a: str = POINT) -> tuple:
        """``id^Delta_a``: every point to ``a``, every cell to an iterated idp."""
        x, steps = contractible_shape(delta)
        out = [MVar(a)]
        names = [x]
        for s in steps:
            u = self.normalize(msubst(self._tm(s.u), dict(zip(names, out))))
            out += [u, MIdp(u)]
            names += [s.y, s.z]
        return tuple(out)

    def at_diag(self, delta: Ctx, body, a: str = POINT):
        return self.normalize(msubst(body, dict(zip(delta.names, self.diag(delta, a)))))

    # lemmas ---------------------------------------------------------------

    def check_diagonal_lemmas(self, decl: Union[CohDecl, Coh], a: str = POINT) -> int:
        """Verify the three diagonal lemmas for a coherence and every subscript in it.

        Returns the tower index ``dim T`` reached by the declaration itself.
        Raises :class:`LemmaFailure` with the mismatching normal forms.
        """
        if isinstance(decl, CohDecl):
            ctx, ty, name = decl.ctx, decl.ty, decl.name
        else:
            ctx, ty, name = decl.ctx, decl.ty, decl.label or "coh"
        self._lemmas(ctx, ty, name, a)
        return dim(ty)

    def _lemmas(self, ctx: Ctx, ty: Ty, name: str, a: str) -> None:
        key = (ctx, ty, a)
        if key in self._lemma_cache:
            return
        n = dim(ty)
        tower_ty, tower_tm = iterated_tower(a, n)
        diag = self.diag(ctx, a)
        env = dict(zip(ctx.names, diag))

        got = self.normalize(msubst(self._ty(ty), env))
        if not alpha_eq(got, tower_ty):
            raise LemmaFailure(
                "lemmatype", f"{name}: type computes to {show_m(got)}, not {show_m(tower_ty)}", (got, tower_ty)
            )

        own = self.normalize(MCohRef(ctx, ty, diag, name))
        if not alpha_eq(own, tower_tm):
            raise LemmaFailure(
                "lemmaterm", f"{name}: term computes to {show_m(own)}, not {show_m(tower_tm)}", (own, tower_tm)
            )

        for i, (v, v_ty) in enumerate(ctx.entries):
            want = iterated_tower(a, dim(v_ty))[1]
            if not alpha_eq(diag[i], want):
                raise LemmaFailure(
                    "lemmaterm", f"{name}: variable {v} computes to {show_m(diag[i])}, not {show_m(want)}",
                    (diag[i], want),
                )

        self.check_j_typing(ctx, ty, name)

        prefixes = [(ctx.prefix(i), t) for i, (_, t) in enumerate(ctx.entries)] + [(ctx, ty)]
        for where, t in prefixes:
            for sub in subterms(t):
                if not isinstance(sub, Coh):
                    continue
                k = dim(infer_type(where, sub))
                got = self.normalize(msubst(self._tm(sub), env))
                want = iterated_tower(a, k)[1]
                if not alpha_eq(got, want):
                    raise LemmaFailure(
                        "lemmaterm", f"{name}: subterm {sub.label or 'coh'} computes to {show_m(got)}, "
                        f"not {show_m(want)}", (got, want),
                    )
                inner = self.normalize_mor(msubst_all(self.elaborate_mor(where, sub.args, sub.ctx), env))
                target = self.diag(sub.ctx, a)
                if not all(alpha_eq(g, w) for g, w in zip(inner, target)):
                    raise LemmaFailure(
                        "lemmactxmor",
                        f"{name}: arguments of {sub.label or 'coh'} compute to {show_mor(inner)}, "
                        f"not {show_mor(target)}",
                        (inner, target),
                    )
                self._lemmas(sub.ctx, sub.ty, sub.label or "coh", a)
        self._lemma_cache[key] = n

    def infer(self, env: dict, t):
        """Type of an MLTT term, read off its head; ``env`` maps names to types.

        ``J`` applications also have their diagonal case and path checked, so
        an eliminator built with the wrong shape is caught here even when it
        happens to compute correctly at the diagonal.
        """
        if isinstance(t, MVar):
            return env[t.name]
        if isinstance(t, MIdp):
            return MId(self.infer(env, t.arg), t.arg, t.arg)
        if isinstance(t, MCohRef):
            return msubst(self._ty(t.ty), dict(zip(t.ctx.names, t.args)))
        if isinstance(t, MJ):
            point_ty = self.infer(env, t.point)
            self._expect(env, t.path, MId(point_ty, t.point, t.end), "path")
            self._expect(env, t.diag, t.motive(t.point, MIdp(t.point)), "diagonal case")
            return t.motive(t.end, t.path)
        raise TypeError(f"infer: unexpected {type(t).__name__}")

    def _expect(self, env: dict, t, want, what: str) -> None:
        got = self.infer(env, t)
        if not alpha_eq(self.normalize(got), self.normalize(want)):
            raise LemmaFailure(
                "jtyping", f"{what} {show_m(t)} has type {show_m(got)}, not {show_m(want)}", (got, want)
            )

    def check_j_typing(self, ctx: Ctx, ty: Ty, name: str = "coh") -> None:
        """``J_Delta([[T]], d)`` at the identity morphism has type ``[[T]]``."""
        env = {n: self._ty(t) for n, t in ctx.entries}
        body = self.coh_motive(ctx, ty).body
        try:
            self._expect(env, body, self._ty(ty), "J_Delta")
        except LemmaFailure as e:
            raise LemmaFailure("jtyping", f"{name}: {e.message.split(': ', 1)[1]}", e.witness) from None

    def normalize_mor(self, gamma: tuple) -> tuple:
        return tuple(self.normalize(u) for u in gamma)


def msubst_all(xs: tuple, mapping: dict) -> tuple:
    return tuple(msubst(x, mapping) for x in xs)


# ----------------------------------------------------------------- equality

def canonical(x, _env: Optional[dict] = None, _counter: Optional[list] = None):
    """Rename motive binders positionally (``%0``, ``%1``, ...)."""
    env = _env or {}
    counter = _counter if _counter is not None else [0]
    if isinstance(x, MVar):
        return MVar(env.get(x.name, x.name))
    if isinstance(x, MBase):
        return x
    if isinstance(x, MIdp):
        return MIdp(canonical(x.arg, env, counter))
    if isinstance(x, MId):
        return MId(canonical(x.base, env, counter), canonical(x.lhs, env, counter), canonical(x.rhs, env, counter))
    if isinstance(x, MJ):
        point = canonical(x.point, env, counter)
        names = []
        inner = dict(env)
        for p in x.motive.params:
            names.append(f"%{counter[0]}")
            inner[p] = names[-1]
            counter[0] += 1
        motive = Motive(tuple(names), canonical(x.motive.body, inner, counter))
        return MJ(point, motive, canonical(x.diag, env, counter),
                  canonical(x.end, env, counter), canonical(x.path, env, counter))
    if isinstance(x, MCohRef):
        return MCohRef(x.ctx, x.ty, tuple(canonical(a, env, counter) for a in x.args), x.label)
    raise TypeError(f"canonical: unexpected {type(x).__name__}")


def alpha_eq(a, b) -> bool:
    if a == b:
        return True
    return canonical(a) == canonical(b)


# ----------------------------------------------------------------- printing

def _idp_power(x) -> tuple:
    k = 0
    while isinstance(x, MIdp):
        x, k = x.arg, k + 1
    return k, x


def _tower_power(t) -> Optional[tuple]:
    """``(k, a)`` when ``t`` is exactly ``I_k`` over the point ``a``, with k > 0."""
    k, bottom = 0, t
    while isinstance(bottom, MId):
        k, bottom = k + 1, bottom.base
    if k == 0 or not isinstance(bottom, MBase):
        return None
    layer = t
    while isinstance(layer.base, MId):
        layer = layer.base
    if not isinstance(layer.lhs, MVar):
        return None
    a = layer.lhs.name
    if t != _tower_over(bottom, a, k):
        return None
    return k, a


def _tower_over(base: MBase, a: str, n: int):
    ty, tm = base, MVar(a)
    for _ in range(n):
        ty, tm = MId(ty, tm, tm), MIdp(tm)
    return ty


def _atomic(s: str) -> str:
    return s if all(c not in s for c in " (,") else f"({s})"


def show_m(x) -> str:
    """Readable form; iterated constants print as ``idp^k a`` and ``Id^k A a``."""
    x = canonical(x)
    return _show(x)


def _show(x) -> str:
    if isinstance(x, MVar):
        return x.name
    if isinstance(x, MBase):
        return x.name
    if isinstance(x, MIdp):
        k, core = _idp_power(x)
        return f"idp^{k} {_atomic(_show(core))}"
    if isinstance(x, MId):
        tp = _tower_power(x)
        if tp is not None:
            k, a = tp
            bottom = x
            while isinstance(bottom, MId):
                bottom = bottom.base
            return f"Id^{k} {bottom.name} {a}"
        return f"Id_{_atomic(_show(x.base))}({_show(x.lhs)}, {_show(x.rhs)})"
    if isinstance(x, MJ):
        ps = " ".join(x.motive.params)
        return (
            f"J({_show(x.point)}, ({ps}) => {_show(x.motive.body)}, {_show(x.diag)})"
            f"({_show(x.end)}, {_show(x.path)})"
        )
    if isinstance(x, MCohRef):
        args = ", ".join(_show(a) for a in x.args)
        return f"[{x.label or 'coh'}]({args})"
    raise TypeError(f"show_m: unexpected {type(x).__name__}")


def show_mor(xs: tuple) -> str:
    return "(" + ", ".join(show_m(x) for x in xs) + ")"


# ------------------------------------------------------- module-level API

DEFAULT = Elaborator()


def elaborate_ty(ctx: Ctx, t: Ty) -> Motive:
    return DEFAULT.elaborate_ty(ctx, t)


def elaborate_tm(ctx: Ctx, t: Tm) -> Motive:
    return Motive(ctx.names, DEFAULT.elaborate_tm(ctx, t))


def elaborate_mor(src: Ctx, gamma: tuple, dst: Ctx) -> tuple:
    return tuple(Motive(src.names, b) for b in DEFAULT.elaborate_mor(src, gamma, dst))


def diag(delta: Ctx, a: str = POINT) -> tuple:
    return DEFAULT.diag(delta, a)


def j_delta(delta: Ctx, motive: Motive, d: Motive) -> Motive:
    return DEFAULT.j_delta(delta, motive, d)


def normalize(x):
    return DEFAULT.normalize(x)


def check_diagonal_lemmas(decl, a: str = POINT) -> int:
    return DEFAULT.check_diagonal_lemmas(decl, a)
