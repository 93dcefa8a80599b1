"""Matching-state evaluation kernels.

Two interchangeable backends implement the same evaluator API:

  - ``compiled`` -- the Cython extension ``_engine`` (built by setup.py);
  - ``python``   -- the numpy implementation in :mod:`.pure`.

The compiled backend is picked at import time when available. Set the
environment variable ``CDNA_MARKET_BACKEND`` to ``python`` or ``compiled`` to
force one; ``benchmarks/kernel_benchmark.py`` compares the two.
"""
from __future__ import annotations

import os

from .arrays import UNASSIGNED, ScenarioArrays
from .pure import ExchangeEval, MoveEval, PureEvaluator

try:
    from ._engine import CEvaluator

    _HAVE_COMPILED = True
except ImportError:  # extension not built; fall back to numpy
    CEvaluator = None
    _HAVE_COMPILED = False

_ENV_VAR = "CDNA_MARKET_BACKEND"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _HAVE_COMPILED else ["python"]


def default_backend() -> str:
    forced = os.environ.get(_ENV_VAR)
    if forced:
        if forced not in ("python", "compiled"):
            raise ValueError(f"{_ENV_VAR} must be 'python' or 'compiled', got {forced!r}")
        if forced == "compiled" and not _HAVE_COMPILED:
            raise RuntimeError("compiled kernel backend requested but the extension is not built")
        return forced
    return "compiled" if _HAVE_COMPILED else "python"


def make_evaluator(arrays: ScenarioArrays, backend: str | None = None):
    """Create an evaluator over the given scenario arrays."""
    name = backend or default_backend()
    if name == "compiled":
        if not _HAVE_COMPILED:
            raise RuntimeError("compiled kernel backend is not available")
        return CEvaluator(arrays)
    if name == "python":
        return PureEvaluator(arrays)
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "UNASSIGNED",
    "ScenarioArrays",
    "MoveEval",
    "ExchangeEval",
    "PureEvaluator",
    "CEvaluator",
    "available_backends",
    "default_backend",
    "make_evaluator",
]
