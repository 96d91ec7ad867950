"""Exception hierarchy shared by every stage of the pipeline.

Each error carries a stable code so tests and the JSON reporter can match on
it without parsing messages.
"""
from __future__ import annotations

from typing import Optional


class CohError(Exception):
    code = "E000"

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.trail: list[str] = []

    def within(self, where: str) -> "CohError":
        """Record an enclosing location; innermost first."""
        self.trail.append(where)
        return self

    def located(self, span) -> "CohError":
        if self.span is None:
            self.span = span
        return self

    def describe(self) -> str:
        if not self.trail:
            return self.message
        return self.message + " (" + ", ".join(self.trail) + ")"

    def __str__(self) -> str:
        return self.describe()


class DuplicateName(CohError):
    code = "E001"


class UnboundVariable(CohError):
    code = "E002"


class NotContractible(CohError):
    code = "E003"


class TypeMismatch(CohError):
    code = "E004"

    def __init__(self, message: str, inferred=None, expected=None, span=None):
        super().__init__(message, span)
        self.inferred = inferred
        self.expected = expected


class ArityMismatch(CohError):
    code = "E005"


class UnknownName(CohError):
    code = "E006"


class EndpointTypeMismatch(CohError):
    code = "E007"

    def __init__(self, message: str, left=None, right=None, span=None):
        super().__init__(message, span)
        self.left = left
        self.right = right


class IllTypedEntry(CohError):
    """A context entry whose type does not check; reuses the inner code."""

    def __init__(self, name: str, inner: CohError):
        super().__init__(f"entry {name!r}: {inner.describe()}", inner.span)
        self.inner = inner
        self.code = inner.code


class ParseError(CohError):
    code = "P001"

    def __init__(self, message: str, span=None, expected: Optional[frozenset] = None):
        super().__init__(message, span)
        self.expected = expected or frozenset()


class DuplicateDecl(CohError):
    code = "P002"


class LemmaFailure(CohError):
    code = "L001"

    def __init__(self, lemma: str, message: str, witness=None):
        super().__init__(f"{lemma}: {message}")
        self.lemma = lemma
        self.witness = witness


class HookFailure(CohError):
    code = "L002"


class EmptyCarrier(CohError):
    code = "M001"


class UnsupportedDepth(CohError):
    code = "M002"
