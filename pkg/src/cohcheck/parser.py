"""Lexer, parser and printer for ``.coh`` source files.

Grammar::

    program  := decl*
    decl     := "coh" IDENT tele ":" ty
              | "def" IDENT tele ":" ty ":=" tm
    tele     := ("(" IDENT+ ":" ty ")")*
    ty       := "*" | tm "=" tm | tm "=[" ty "]" tm
    tm       := IDENT | IDENT "(" tm ("," tm)* ")"

Comments run from ``--`` to the end of the line.  Applications keep the
declaration name; resolving it is the checker's job.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import DuplicateDecl, ParseError
from .syntax import RESERVED


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start: tuple
    end: tuple

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "start": {"line": self.start[0], "column": self.start[1]},
            "end": {"line": self.end[0], "column": self.end[1]},
        }

    def __str__(self) -> str:
        return f"{self.file}:{self.start[0]}:{self.start[1]}"


def _join(a: Optional[SourceSpan], b: Optional[SourceSpan]) -> Optional[SourceSpan]:
    if a is None or b is None:
        return a or b
    return SourceSpan(a.file, a.start, b.end)


# --------------------------------------------------------------- surface AST

@dataclass(frozen=True)
class SVar:
    name: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SApp:
    name: str
    args: tuple
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SStar:
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SHom:
    lhs: "STm"
    rhs: "STm"
    base: Optional["STy"] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


STm = Union[SVar, SApp]
STy = Union[SStar, SHom]


@dataclass(frozen=True)
class TeleEntry:
    name: str
    ty: STy
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CohDeclSrc:
    name: str
    tele: tuple
    ty: STy
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DefDeclSrc:
    name: str
    tele: tuple
    ty: STy
    body: STm
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


Decl = Union[CohDeclSrc, DefDeclSrc]


@dataclass(frozen=True)
class Program:
    decls: tuple = ()

    def names(self) -> list:
        return [d.name for d in self.decls]


# -------------------------------------------------------------------- lexer

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_'-]*")
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>--[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_'-]*)"
    r"|(?P<sym>:=|=\[|[():,*=\]])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "keyword", a symbol, or "eof"
    text: str
    span: SourceSpan


def tokenize(text: str, file: str = "<input>") -> list:
    tokens = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            span = SourceSpan(file, (line, col), (line, col + 1))
            raise ParseError(f"unexpected character {ch!r}", span)
        kind = m.lastgroup
        lexeme = m.group()
        end_col = col + len(lexeme)
        if kind == "nl":
            line, col = line + 1, 1
            pos = m.end()
            continue
        if kind == "ident":
            tk = "keyword" if lexeme in RESERVED else "ident"
            tokens.append(Token(tk, lexeme, SourceSpan(file, (line, col), (line, end_col))))
        elif kind == "sym":
            tokens.append(Token(lexeme, lexeme, SourceSpan(file, (line, col), (line, end_col))))
        pos, col = m.end(), end_col
    tokens.append(Token("eof", "", SourceSpan(file, (line, col), (line, col))))
    return tokens


# ------------------------------------------------------------------- parser

def _describe(kind: str, text: Optional[str]) -> str:
    if kind == "ident":
        return "identifier"
    if kind == "eof":
        return "end of input"
    return f"'{text or kind}'"


class _Parser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.cur
        return t.kind == kind and (text is None or t.text == text)

    def fail(self, *expected: str):
        t = self.cur
        found = "end of input" if t.kind == "eof" else repr(t.text)
        exp = " or ".join(sorted(expected))
        raise ParseError(f"expected {exp}, found {found}", t.span, frozenset(expected))

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            self.fail(_describe(kind, text))
        t = self.cur
        self.i += 1
        return t

    def program(self) -> Program:
        decls = []
        seen = set()
        while not self.at("eof"):
            d = self.decl()
            if d.name in seen:
                raise DuplicateDecl(f"duplicate declaration {d.name!r}", d.span)
            seen.add(d.name)
            decls.append(d)
        return Program(tuple(decls))

    def decl(self) -> Decl:
        if not (self.at("keyword", "coh") or self.at("keyword", "def")):
            self.fail("'coh'", "'def'")
        kw = self.expect("keyword")
        name = self.expect("ident")
        tele = self.tele()
        self.expect(":")
        ty = self.ty()
        if kw.text == "coh":
            return CohDeclSrc(name.text, tele, ty, _join(kw.span, ty.span))
        self.expect(":=")
        body = self.tm()
        return DefDeclSrc(name.text, tele, ty, body, _join(kw.span, body.span))

    def tele(self) -> tuple:
        entries = []
        while self.at("("):
            open_ = self.expect("(")
            names = [self.expect("ident")]
            while self.at("ident"):
                names.append(self.cur)
                self.i += 1
            self.expect(":")
            ty = self.ty()
            close = self.expect(")")
            span = _join(open_.span, close.span)
            entries.extend(TeleEntry(t.text, ty, t.span) for t in names)
            del span
        return tuple(entries)

    def ty(self) -> STy:
        if self.at("*"):
            return SStar(self.expect("*").span)
        if not self.at("ident"):
            self.fail("'*'", "identifier")
        lhs = self.tm()
        if self.at("="):
            self.i += 1
            rhs = self.tm()
            return SHom(lhs, rhs, None, _join(lhs.span, rhs.span))
        if self.at("=["):
            self.i += 1
            base = self.ty()
            self.expect("]")
            rhs = self.tm()
            return SHom(lhs, rhs, base, _join(lhs.span, rhs.span))
        self.fail("'='", "'=['")

    def tm(self) -> STm:
        head = self.expect("ident")
        if not self.at("("):
            return SVar(head.text, head.span)
        self.i += 1
        args = [self.tm()]
        while self.at(","):
            self.i += 1
            args.append(self.tm())
        close = self.expect(")")
        return SApp(head.text, tuple(args), _join(head.span, close.span))


def _run(text: str, file: str, rule: str):
    try:
        p = _Parser(tokenize(text, file))
        out = getattr(p, rule)()
        if rule != "program":
            p.expect("eof")
        return out
    except RecursionError:
        raise ParseError("input nested too deeply", SourceSpan(file, (1, 1), (1, 1))) from None


def parse_program(text: str, file: str = "<input>") -> Program:
    return _run(text, file, "program")


def parse_type(text: str, file: str = "<input>") -> STy:
    return _run(text, file, "ty")


def parse_term(text: str, file: str = "<input>") -> STm:
    return _run(text, file, "tm")


# ------------------------------------------------------------------ printer

def print_term(t: STm) -> str:
    if isinstance(t, SVar):
        return t.name
    return f"{t.name}({', '.join(print_term(a) for a in t.args)})"


def print_type(t: STy) -> str:
    if isinstance(t, SStar):
        return "*"
    if t.base is None:
        return f"{print_term(t.lhs)} = {print_term(t.rhs)}"
    return f"{print_term(t.lhs)} =[{print_type(t.base)}] {print_term(t.rhs)}"


def print_tele(tele: tuple) -> str:
    groups: list = []
    for e in tele:
        if groups and groups[-1][1] == e.ty:
            groups[-1][0].append(e.name)
        else:
            groups.append(([e.name], e.ty))
    return " ".join(f"({' '.join(ns)} : {print_type(t)})" for ns, t in groups)


def print_decl(d: Decl) -> str:
    kw = "coh" if isinstance(d, CohDeclSrc) else "def"
    head = f"{kw} {d.name}"
    tele = print_tele(d.tele)
    if tele:
        head += " " + tele
    out = f"{head} : {print_type(d.ty)}"
    if isinstance(d, DefDeclSrc):
        out += f" := {print_term(d.body)}"
    return out


def print_program(p: Program) -> str:
    return "".join(print_decl(d) + "\n" for d in p.decls)
