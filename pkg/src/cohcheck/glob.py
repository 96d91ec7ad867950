"""Finite strict globular models and the interpretation of the syntax in them.

Two forced-coherence models ship: in the discrete model only identity cells
exist; in the codiscrete one there is exactly one cell between any two
parallel cells.  In both every fiber over a contractible context is a
singleton, so coherences have a unique interpretation and the models serve as
brute-force oracles.

Cells are plain tuples: objects are ints, ``("id", c)`` is the identity on
``c`` and ``("to", c, d)`` is the unique cell from ``c`` to ``d``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .checker import DefDecl, JudgmentKind, judge
from .errors import EmptyCarrier, HookFailure, LemmaFailure, UnsupportedDepth
from .syntax import (
    _memo_hash,
    Coh,
    CohDecl,
    Ctx,
    Hom,
    Star,
    Ty,
    Tm,
    Var,
    alpha_canonicalize,
    depth,
    dim,
    project,
    show,
    substitute,
    subterms,
)

KINDS = ("discrete", "codiscrete")


@_memo_hash
@dataclass(frozen=True)
class GlobModel:
    """A globular set seen from one hom: its objects and, lazily, its homs."""

    kind: str
    objects: tuple
    level: int = 0
    max_depth: Optional[int] = field(default=None, compare=False)

    def hom(self, a, b) -> "GlobModel":
        if a not in self.objects or b not in self.objects:
            raise ValueError(f"{a!r} or {b!r} is not an object of this model")
        if self.kind == "discrete":
            cells = (("id", a),) if a == b else ()
        else:
            cells = (("to", a, b),)
        return GlobModel(self.kind, cells, self.level + 1, self.max_depth)

    def coh_hook(self, delta: Ctx, ty: Ty, env: tuple):
        fiber = _interp_ty(self, delta, ty, env)
        if len(fiber.objects) != 1:
            raise HookFailure(
                f"fiber of {show(ty)} over {show(delta)} has {len(fiber.objects)} cells"
            )
        return fiber.objects[0]

    def describe(self) -> str:
        return f"{self.kind}:{len(self.objects)}"


def source(cell):
    if isinstance(cell, tuple):
        return cell[1]
    raise ValueError("objects have no source")


def target(cell):
    if isinstance(cell, tuple):
        return cell[1] if cell[0] == "id" else cell[2]
    raise ValueError("objects have no target")


def _model(kind: str, s) -> GlobModel:
    objs = tuple(sorted(s))
    if not objs:
        raise EmptyCarrier(f"a {kind} model needs at least one object")
    return GlobModel(kind, objs)


def discrete_model(s) -> GlobModel:
    return _model("discrete", s)


def codiscrete_model(s) -> GlobModel:
    return _model("codiscrete", s)


_DESCRIPTOR = re.compile(r"(discrete|codiscrete):([1-9])")


def parse_model(descriptor: str) -> GlobModel:
    """``discrete:N`` or ``codiscrete:N`` with ``1 <= N <= 9``."""
    m = _DESCRIPTOR.fullmatch(descriptor.strip())
    if m is None:
        raise ValueError(
            f"bad model {descriptor!r}: expected discrete:N or codiscrete:N with 1 <= N <= 9"
        )
    return _model(m.group(1), range(int(m.group(2))))


# ----------------------------------------------------------- interpretation

def interp_ctx(g: GlobModel, ctx: Ctx) -> tuple:
    """All environments over ``ctx``, in lexicographic order of choices."""
    if g.max_depth is not None and depth(ctx) > g.max_depth:
        raise UnsupportedDepth(f"context of depth {depth(ctx)} exceeds the model's bound {g.max_depth}")
    return _interp_ctx(g, ctx)


def interp_ty(g: GlobModel, ctx: Ctx, ty: Ty, env: tuple) -> GlobModel:
    return _interp_ty(g, ctx, ty, tuple(env))


def interp_tm(g: GlobModel, ctx: Ctx, t: Tm, env: tuple):
    return _interp_tm(g, ctx, t, tuple(env))


def interp_mor(g: GlobModel, src: Ctx, gamma: tuple, dst: Ctx, env: tuple) -> tuple:
    env = tuple(env)
    return tuple(_interp_tm(g, src, u, env) for u in gamma)


@lru_cache(maxsize=None)
def _interp_ctx(g: GlobModel, ctx: Ctx) -> tuple:
    envs = [()]
    for i, (_, ty) in enumerate(ctx.entries):
        prefix = ctx.prefix(i)
        envs = [env + (c,) for env in envs for c in _interp_ty(g, prefix, ty, env).objects]
    return tuple(envs)


@lru_cache(maxsize=None)
def _interp_ty(g: GlobModel, ctx: Ctx, ty: Ty, env: tuple) -> GlobModel:
    if isinstance(ty, Star):
        return g
    fiber = _interp_ty(g, ctx, ty.base, env)
    return fiber.hom(_interp_tm(g, ctx, ty.lhs, env), _interp_tm(g, ctx, ty.rhs, env))


@lru_cache(maxsize=None)
def _interp_tm(g: GlobModel, ctx: Ctx, t: Tm, env: tuple):
    if isinstance(t, Var):
        return env[ctx.index(t.name)]
    inner = tuple(_interp_tm(g, ctx, u, env) for u in t.args)
    return g.coh_hook(t.ctx, t.ty, inner)


def clear_caches() -> None:
    for f in (_interp_ctx, _interp_ty, _interp_tm):
        f.cache_clear()


# ----------------------------------------------------------------- checks

def globularity(g: GlobModel, levels: int) -> int:
    """Check ``s.s = s.t`` and ``t.s = t.t`` on all cells up to ``levels``.

    Returns the number of cells examined.
    """
    count = 0
    layer = [(g, c) for c in g.objects]
    for n in range(1, levels + 1):
        nxt = []
        models = {}
        for m, c in layer:
            models.setdefault(m, []).append(c)
        for m, cs in models.items():
            for a in cs:
                for b in cs:
                    h = m.hom(a, b)
                    nxt.extend((h, c) for c in h.objects)
        for _, c in nxt:
            count += 1
            if n >= 2:
                s, t = source(c), target(c)
                if source(s) != source(t) or target(s) != target(t):
                    raise LemmaFailure("globularity", f"cell {c!r} is not globular", c)
        layer = nxt
    return count


@dataclass
class SemanticReport:
    model: str
    contexts: int = 0
    environments: int = 0
    checks: dict = field(default_factory=dict)

    def tick(self, lemma: str, n: int = 1) -> None:
        self.checks[lemma] = self.checks.get(lemma, 0) + n

    @property
    def total(self) -> int:
        return sum(self.checks.values())


@dataclass(frozen=True)
class _Judgment:
    """A piece of corpus material: types and terms well typed over all of ``ctx``."""

    ctx: Ctx
    types: tuple
    terms: tuple


def corpus_material(entries) -> list:
    """Every context occurring in checked declarations, with what lives over it.

    Coherence subscripts are collected recursively; duplicates up to renaming
    of subscripts are dropped.
    """
    out: dict = {}
    order: list = []

    def add(ctx: Ctx, types: tuple, terms: tuple):
        key = alpha_canonicalize(ctx)
        if key not in out:
            out[key] = (ctx, [], [])
            order.append(key)
        base, tys, tms = out[key]
        if base != ctx:
            return
        for t in types:
            if t not in tys:
                tys.append(t)
        for t in terms:
            if t not in tms:
                tms.append(t)

    seen_subscripts = set()

    def visit(ctx: Ctx, ty: Ty, term: Optional[Tm]):
        add(ctx, (ty,), (term,) if term is not None else ())
        things = [t for _, t in ctx.entries] + [ty] + ([term] if term is not None else [])
        for x in things:
            for sub in subterms(x):
                if isinstance(sub, Coh) and (sub.ctx, sub.ty) not in seen_subscripts:
                    seen_subscripts.add((sub.ctx, sub.ty))
                    visit(sub.ctx, sub.ty, Coh(sub.ctx, sub.ty, sub.ctx.identity(), sub.label))

    for e in entries:
        if isinstance(e, CohDecl):
            seen_subscripts.add((e.ctx, e.ty))
            visit(e.ctx, e.ty, e.term())
        elif isinstance(e, DefDecl):
            visit(e.ctx, e.ty, e.body)
    return [_Judgment(out[k][0], tuple(out[k][1]), tuple(out[k][2])) for k in order]


def _fail(lemma: str, ctx: Ctx, env: tuple, what: str, left, right):
    raise LemmaFailure(
        lemma,
        f"{what} in {show(ctx)} at {env!r}: {left!r} != {right!r}",
        {"context": ctx, "env": env, "lemma": lemma},
    )


def check_semantic_lemmas(
    g: GlobModel,
    entries,
    subst: Callable = substitute,
    levels: Optional[int] = None,
) -> SemanticReport:
    """Exhaustively check the semantic lemmas over all corpus contexts.

    ``entries`` are checked declarations.  ``subst`` is the syntactic
    substitution under test; negative fixtures pass a broken one.
    """
    report = SemanticReport(g.describe())
    material = corpus_material(entries)
    max_dim = max((max((dim(t) for t in j.types), default=0) for j in material), default=0)
    report.tick("globularity", globularity(g, levels if levels is not None else max_dim + 1))

    for j in material:
        ctx = j.ctx
        report.contexts += 1
        envs = interp_ctx(g, ctx)
        report.environments += len(envs)

        # every environment inhabits the fibers of its entries
        for env in envs:
            for i, (_, ty) in enumerate(ctx.entries):
                fiber = interp_ty(g, ctx.prefix(i), ty, env[:i])
                if env[i] not in fiber.objects:
                    _fail("membership", ctx, env, f"component {i}", env[i], fiber.objects)
            report.tick("membership")

        _check_weakening(g, j, envs, report)
        _check_substitution(g, j, envs, report, subst)
        _check_singletons(g, j, envs, report)
    return report


def _check_weakening(g: GlobModel, j: _Judgment, envs: tuple, report: SemanticReport) -> None:
    ctx = j.ctx
    for k in range(1, len(ctx)):
        small, big = ctx.prefix(k), ctx.prefix(k + 1)
        types = [t for _, t in small.entries] + [ctx.entries[k][1]]
        terms = [s for t in types for s in subterms(t)]
        for env in {e[: k + 1] for e in envs}:
            for t in types:
                a, b = interp_ty(g, small, t, env[:k]), interp_ty(g, big, t, env)
                if a != b:
                    _fail("weakening", big, env, f"type {show(t)}", a, b)
            for u in terms:
                a, b = interp_tm(g, small, u, env[:k]), interp_tm(g, big, u, env)
                if a != b:
                    _fail("weakening", big, env, f"term {show(u)}", a, b)
            report.tick("weakening")


def _check_substitution(g, j: _Judgment, envs: tuple, report: SemanticReport, subst) -> None:
    ctx = j.ctx
    things = [t for _, t in ctx.entries] + list(j.types) + list(j.terms)
    morphisms = []
    for x in things:
        for sub in subterms(x):
            if isinstance(sub, Coh) and sub not in morphisms:
                morphisms.append(sub)
    for sub in morphisms:
        theta, dst = sub.args, sub.ctx
        dst_types = [t for _, t in dst.entries] + [sub.ty]
        dst_terms = [s for t in dst_types for s in subterms(t)]
        # the syntactic side does not depend on the environment
        types = [(t, subst(t, theta, dst)) for t in dst_types]
        terms = [(u, subst(u, theta, dst)) for u in dst_terms]
        mors = [(u, subst(u.args, theta, dst)) for u in dst_terms if isinstance(u, Coh)]
        projections = [(name, project(theta, dst, name)) for name in dst.names]
        dst_envs = set(interp_ctx(g, dst))
        for env in envs:
            try:
                _substitution_at(g, ctx, env, sub, theta, dst, dst_envs, types, terms, mors, projections)
            except (ValueError, HookFailure) as e:
                # the substituted side is not even interpretable
                raise LemmaFailure(
                    "substitution",
                    f"substituting along {show(sub)} in {show(ctx)} at {env!r} is ill typed: {e}",
                    {"context": ctx, "env": env, "lemma": "substitution"},
                ) from None
            report.tick("substitution")
            report.tick("projection", len(dst))


def _substitution_at(g, ctx, env, sub, theta, dst, dst_envs, types, terms, mors, projections) -> None:
    image = interp_mor(g, ctx, theta, dst, env)
    if image not in dst_envs:
        _fail("substitution", ctx, env, f"image of the arguments of {show(sub)}", image, dst)
    for t, t_sub in types:
        a = interp_ty(g, ctx, t_sub, env)
        b = interp_ty(g, dst, t, image)
        if a != b:
            _fail("substitution", ctx, env, f"type {show(t)}", a, b)
    for u, u_sub in terms:
        a = interp_tm(g, ctx, u_sub, env)
        b = interp_tm(g, dst, u, image)
        if a != b:
            _fail("substitution", ctx, env, f"term {show(u)}", a, b)
    for u, args_sub in mors:
        a = interp_mor(g, ctx, args_sub, u.ctx, env)
        b = interp_mor(g, dst, u.args, u.ctx, image)
        if a != b:
            _fail("substitution", ctx, env, f"morphism of {show(u)}", a, b)
    for name, proj in projections:
        a = interp_tm(g, ctx, proj, env)
        b = image[dst.index(name)]
        if a != b:
            _fail("projection", ctx, env, f"projection {name}", a, b)


def _check_singletons(g: GlobModel, j: _Judgment, envs: tuple, report: SemanticReport) -> None:
    ctx = j.ctx
    if not judge(JudgmentKind.CONTR, ctx):
        return
    for env in envs:
        for t in j.types:
            fiber = interp_ty(g, ctx, t, env)
            if len(fiber.objects) != 1:
                _fail("singleton", ctx, env, f"fiber of {show(t)}", len(fiber.objects), 1)
        report.tick("singleton")


def tower_cell(n: int, point=0):
    """The cell denoted by ``i_n`` in a discrete model: ``n`` identities on ``point``."""
    c = point
    for _ in range(n):
        c = ("id", c)
    return c


def check_backend_agreement(entries, elaborator=None) -> int:
    """Compare the one-point discrete model with the MLTT normal forms.

    For each coherence the interpreted cell must be the ``dim T``-fold identity
    and the normal form at the diagonal must be ``i_{dim T}``.
    """
    from .mltt import DEFAULT, MCohRef, MIdp, MVar

    el = elaborator or DEFAULT
    g = discrete_model({0})
    count = 0
    for e in entries:
        if not isinstance(e, CohDecl):
            continue
        term = e.term()
        for env in interp_ctx(g, e.ctx):
            cell = interp_tm(g, e.ctx, term, env)
            nf = el.normalize(MCohRef(e.ctx, e.ty, el.diag(e.ctx), e.name))
            k = 0
            while isinstance(nf, MIdp):
                nf, k = nf.arg, k + 1
            if not isinstance(nf, MVar) or tower_cell(k) != cell or k != dim(e.ty):
                raise LemmaFailure(
                    "agreement", f"{e.name}: model gives {cell!r}, normal form has index {k}", (cell, k)
                )
            count += 1
    return count
