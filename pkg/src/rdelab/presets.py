"""Small named systems used by the tests, demos, and documentation."""

from __future__ import annotations

import numpy as np

from .base import ProbBase, SymbolicBundle

__all__ = ["full_shift", "identity_shift", "alternating_golden_mean"]


def full_shift(symbols: int = 2) -> SymbolicBundle:
    """Single fiber, every transition allowed: the full shift on ``symbols``."""
    return SymbolicBundle(
        base=ProbBase(weights=(1.0,), theta=(0,)),
        alphabet=tuple(chr(ord("a") + i) for i in range(symbols)),
        adjacency=(np.ones((symbols, symbols), dtype=np.int8),),
    )


def identity_shift(symbols: int = 2) -> SymbolicBundle:
    """Single fiber, only self-transitions: ``symbols`` fixed points, zero growth."""
    return SymbolicBundle(
        base=ProbBase(weights=(1.0,), theta=(0,)),
        alphabet=tuple(chr(ord("a") + i) for i in range(symbols)),
        adjacency=(np.eye(symbols, dtype=np.int8),),
    )


def alternating_golden_mean() -> SymbolicBundle:
    """Two equally weighted fibers swapped by the base map.

    One fiber allows every transition, the other forbids ``b -> b`` (the
    golden-mean constraint), so admissible words alternate between the two
    rules.  The word-growth rate is ``(1/2) ln 3``: the two-step transfer
    product ``[[2, 1], [2, 1]]`` has spectral radius 3.
    """
    return SymbolicBundle(
        base=ProbBase(weights=(0.5, 0.5), theta=(1, 0), labels=("w0", "w1")),
        alphabet=("a", "b"),
        adjacency=(
            np.ones((2, 2), dtype=np.int8),
            np.array([[1, 1], [1, 0]], dtype=np.int8),
        ),
    )
