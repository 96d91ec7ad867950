"""Random well-formed surface programs (syntactically valid, not necessarily typed)."""
from __future__ import annotations

import random
import string

from hypothesis import strategies as st

from cohcheck.parser import CohDeclSrc, DefDeclSrc, Program, SApp, SHom, SStar, SVar, TeleEntry
from cohcheck.syntax import RESERVED

_FIRST = string.ascii_letters + "_"
_REST = string.ascii_letters + string.digits + "_'-"


def random_ident(rng: random.Random) -> str:
    while True:
        name = rng.choice(_FIRST) + "".join(rng.choice(_REST) for _ in range(rng.randint(0, 6)))
        if name not in RESERVED:
            return name


def random_term(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.5:
        return SVar(random_ident(rng))
    return SApp(random_ident(rng), tuple(random_term(rng, depth - 1) for _ in range(rng.randint(1, 3))))


def random_stype(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.3:
        return SStar()
    base = random_stype(rng, depth - 1) if rng.random() < 0.3 else None
    return SHom(random_term(rng), random_term(rng), base)


def random_decl(rng: random.Random, name: str):
    tele = tuple(TeleEntry(random_ident(rng), random_stype(rng)) for _ in range(rng.randint(0, 5)))
    ty = random_stype(rng)
    if rng.random() < 0.5:
        return CohDeclSrc(name, tele, ty)
    return DefDeclSrc(name, tele, ty, random_term(rng))


def random_program(rng: random.Random) -> Program:
    names = []
    while len(names) < rng.randint(0, 5):
        n = random_ident(rng)
        if n not in names:
            names.append(n)
    return Program(tuple(random_decl(rng, n) for n in names))


programs = st.randoms(use_true_random=False).map(random_program)
