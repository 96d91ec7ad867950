"""The shipped corpus of coherence declarations.

Every file is self-contained: the handful of basic coherences it uses are
repeated at its top, since the language has no imports.
"""
from importlib import resources

FILES = ("basics.coh", "laws.coh", "twodim.coh", "pentagon.coh", "appendix.coh", "eh.coh")


def read(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def load() -> dict:
    """File name to source text, in the canonical order."""
    return {name: read(name) for name in FILES}
