"""Corpus access and random generators of well-typed syntax for the tests."""
from __future__ import annotations

import random
from functools import lru_cache

from cohcheck import corpus
from cohcheck.checker import DefDecl, contractible_shape, infer_type, judge, JudgmentKind, run_program
from cohcheck.parser import parse_program
from cohcheck.syntax import STAR, Coh, CohDecl, Ctx, Hom, Star, Var, identity_cell, substitute, subterms


@lru_cache(maxsize=None)
def corpus_tables() -> dict:
    """File name to symbol table, for every shipped file."""
    out = {}
    for name, text in corpus.load().items():
        reports, table = run_program(parse_program(text, name))
        assert all(r.ok for r in reports), name
        out[name] = table
    return out


@lru_cache(maxsize=None)
def corpus_entries() -> tuple:
    return tuple(e for t in corpus_tables().values() for e in t.entries())


@lru_cache(maxsize=None)
def corpus_cohs() -> tuple:
    seen, out = set(), []
    for e in corpus_entries():
        if isinstance(e, CohDecl) and (e.ctx, e.ty) not in seen:
            seen.add((e.ctx, e.ty))
            out.append(e)
    return tuple(out)


@lru_cache(maxsize=None)
def corpus_contexts() -> tuple:
    """Every distinct context of a declaration, contractible or not."""
    seen, out = set(), []
    for e in corpus_entries():
        if e.ctx not in seen:
            seen.add(e.ctx)
            out.append(e.ctx)
    return tuple(out)


@lru_cache(maxsize=None)
def contractible_contexts() -> tuple:
    return tuple(c for c in corpus_contexts() if judge(JudgmentKind.CONTR, c))


def material(entry) -> list:
    """``(ctx, thing)`` pairs: every type and term well formed over ``ctx``."""
    out = []
    ctx = entry.ctx
    for i, (_, ty) in enumerate(ctx.entries):
        out.append((ctx.prefix(i), ty))
        out.extend((ctx.prefix(i), s) for s in subterms(ty))
    out.append((ctx, entry.ty))
    out.extend((ctx, s) for s in subterms(entry.ty))
    if isinstance(entry, DefDecl):
        out.append((ctx, entry.body))
    elif isinstance(entry, CohDecl):
        out.append((ctx, entry.term()))
    return out


def random_morphism(rng: random.Random, src: Ctx, dst: Ctx) -> tuple:
    """A random well-typed morphism ``src -> dst`` for contractible ``dst``.

    The base point goes to a point of ``src``; each step either collapses
    (target := source, cell := identity) or follows a cell variable of
    ``src`` whose type fits.
    """
    x, steps = contractible_shape(dst)
    points = [Var(n) for n, t in src.entries if isinstance(t, Star)]
    if not points:
        raise ValueError("source context has no points")
    gamma = [rng.choice(points)]
    names = [x]
    for s in steps:
        partial = Ctx(dst.entries[: len(names)])
        ty = substitute(s.ty, tuple(gamma), partial)
        u = substitute(s.u, tuple(gamma), partial)
        fits = [
            (t.rhs, Var(n))
            for n, t in src.entries
            if isinstance(t, Hom) and t.base == ty and t.lhs == u
        ]
        if fits and rng.random() < 0.7:
            y, z = rng.choice(fits)
        else:
            y, z = u, identity_cell(ty, u)
        gamma += [y, z]
        names += [s.y, s.z]
    return tuple(gamma)


def random_coh_term(rng: random.Random, src: Ctx):
    """A coherence from the corpus applied to a random morphism out of ``src``."""
    decl = rng.choice(corpus_cohs())
    return Coh(decl.ctx, decl.ty, random_morphism(rng, src, decl.ctx), decl.name)


def random_type(rng: random.Random, ctx: Ctx):
    """A random type over ``ctx``: a point, or a hom between parallel terms."""
    terms = [Var(n) for n in ctx.names]
    if rng.random() < 0.5 and any(isinstance(t, Star) for _, t in ctx.entries):
        try:
            terms.append(random_coh_term(rng, ctx))
        except ValueError:
            pass
    by_type = {}
    for t in terms:
        by_type.setdefault(infer_type(ctx, t), []).append(t)
    choices = [ts for ts in by_type.values()]
    if not choices or rng.random() < 0.2:
        return STAR
    group = rng.choice(choices)
    lhs, rhs = rng.choice(group), rng.choice(group)
    return Hom(infer_type(ctx, lhs), lhs, rhs)


def fresh_name(ctx: Ctx, stem: str = "w") -> str:
    i = 0
    while f"{stem}{i}" in ctx:
        i += 1
    return f"{stem}{i}"


def source_contexts() -> tuple:
    """Contexts with at least one point, usable as sources of morphisms."""
    return tuple(c for c in corpus_contexts() if any(isinstance(t, Star) for _, t in c.entries))


# ------------------------------------------------------- syntactic lemmas
#
# Each runner draws ``n`` random well-typed instances from corpus material,
# asserts the lemma on each and returns the number of instances checked.

def _over(ctx: Ctx) -> list:
    """Material well formed over ``ctx`` or one of its prefixes."""
    out = []
    for e in corpus_entries():
        if e.ctx == ctx:
            out.extend(x for c, x in material(e))
    return out


def _canon_eq(a, b) -> bool:
    from cohcheck.syntax import alpha_canonicalize

    return alpha_canonicalize(a) == alpha_canonicalize(b)


def lemma_composition(n: int, seed: int = 0) -> int:
    """``(X[g/D])[t/G'] = X[g[t/G']/D]``."""
    rng = random.Random(seed)
    contr, sources = contractible_contexts(), source_contexts()
    for _ in range(n):
        delta, mid, src = rng.choice(contr), rng.choice(contr), rng.choice(sources)
        g = random_morphism(rng, mid, delta)
        t = random_morphism(rng, src, mid)
        assert judge(JudgmentKind.MOR_OK, mid, g, delta)
        assert judge(JudgmentKind.MOR_OK, src, t, mid)
        x = rng.choice(_over(delta))
        lhs = substitute(substitute(x, g, delta), t, mid)
        rhs = substitute(x, substitute(g, t, mid), delta)
        assert _canon_eq(lhs, rhs), (x, g, t)
    return n


def lemma_irrelevance(n: int, seed: int = 0) -> int:
    """Substituting for names a thing does not mention changes nothing."""
    rng = random.Random(seed)
    contr, sources = contractible_contexts(), source_contexts()
    for _ in range(n):
        delta, src = rng.choice(contr), rng.choice(sources)
        g = random_morphism(rng, src, delta)
        k = rng.randrange(1, len(delta) + 1)
        small = delta.prefix(k)
        things = [x for x in _over(delta) if free_vars_of(x) <= set(small.names)]
        x = rng.choice(things)
        assert substitute(x, g, delta) == substitute(x, g[:k], small)
        # and for a fresh trailing entry
        w = fresh_name(delta)
        big = delta.extend(w, random_type(rng, delta))
        assert substitute(x, g + (rng.choice(g),), big) == substitute(x, g, delta)
    return n


def free_vars_of(x) -> set:
    from cohcheck.syntax import free_vars

    return set(free_vars(x))


def _judgments(rng: random.Random, ctx: Ctx) -> list:
    """Checkable facts over ``ctx``: ``("type", T)``, ``("term", t, T)``, ``("mor", g, D)``."""
    out = []
    for x in _over(ctx):
        if isinstance(x, (Star, Hom)):
            out.append(("type", x))
        else:
            out.append(("term", x, infer_type(ctx, x)))
    if any(isinstance(t, Star) for _, t in ctx.entries):
        delta = rng.choice(contractible_contexts())
        out.append(("mor", random_morphism(rng, ctx, delta), delta))
    return out


def _holds(ctx: Ctx, j: tuple) -> bool:
    if j[0] == "type":
        return judge(JudgmentKind.TYPE_OK, ctx, j[1])
    if j[0] == "term":
        return judge(JudgmentKind.TERM_OK, ctx, j[1], j[2])
    return judge(JudgmentKind.MOR_OK, ctx, j[1], j[2])


def random_extension(rng: random.Random, ctx: Ctx, k: int) -> Ctx:
    for _ in range(k):
        ctx = ctx.extend(fresh_name(ctx), random_type(rng, ctx))
    return ctx


def lemma_weakening(n: int, seed: int = 0) -> int:
    """A judgment over ``G`` still holds over ``(G, w : B)``."""
    rng = random.Random(seed)
    contexts = corpus_contexts()
    for _ in range(n):
        ctx = rng.choice(contexts)
        j = rng.choice(_judgments(rng, ctx))
        assert _holds(ctx, j)
        big = random_extension(rng, ctx, rng.randint(1, 3))
        assert judge(JudgmentKind.CTX_OK, big)
        assert _holds(big, j), (big, j)
    return n


def lemma_variables(n: int, seed: int = 0) -> int:
    """Every entry of a valid context has a valid type and is typed by it."""
    rng = random.Random(seed)
    contexts = corpus_contexts()
    for _ in range(n):
        ctx = random_extension(rng, rng.choice(contexts), rng.randint(0, 3))
        assert judge(JudgmentKind.CTX_OK, ctx)
        for i, (x, ty) in enumerate(ctx.entries):
            assert judge(JudgmentKind.TYPE_OK, ctx, ty)
            assert infer_type(ctx, Var(x)) == ty
    return n


def lemma_compatibility(n: int, seed: int = 0) -> int:
    """Typed terms have valid types and valid contexts; morphisms have valid ends.

    Also checks that substitution along a morphism preserves typing.
    """
    rng = random.Random(seed)
    contr, sources = contractible_contexts(), source_contexts()
    for _ in range(n):
        src = random_extension(rng, rng.choice(sources), rng.randint(0, 2))
        t = random_coh_term(rng, src)
        ty = infer_type(src, t)
        assert judge(JudgmentKind.TERM_OK, src, t, ty)
        assert judge(JudgmentKind.TYPE_OK, src, ty)
        assert judge(JudgmentKind.CTX_OK, src)
        delta = rng.choice(contr)
        g = random_morphism(rng, src, delta)
        assert judge(JudgmentKind.MOR_OK, src, g, delta)
        assert judge(JudgmentKind.CTX_OK, delta)
        j = rng.choice(_judgments(rng, delta))
        if j[0] == "type":
            assert judge(JudgmentKind.TYPE_OK, src, substitute(j[1], g, delta))
        elif j[0] == "term":
            assert judge(
                JudgmentKind.TERM_OK, src, substitute(j[1], g, delta), substitute(j[2], g, delta)
            )
        else:
            assert judge(JudgmentKind.MOR_OK, src, substitute(j[1], g, delta), j[2])
    return n


SYNTACTIC_LEMMAS = {
    "composition": lemma_composition,
    "irrelevance": lemma_irrelevance,
    "weakening": lemma_weakening,
    "variables": lemma_variables,
    "compatibility": lemma_compatibility,
}


def dim_of(decl) -> int:
    from cohcheck.syntax import dim

    return dim(decl.ty)
