"""Composite Simpson with step halving for smooth, oscillatory integrands."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """Refinement limit reached before the requested tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    evaluations: int
    intervals: int


def simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson on an odd number of equally spaced samples."""
    values = np.asarray(values, dtype=float)
    if values.size < 3 or values.size % 2 == 0:
        raise ValueError("Simpson needs an odd number (>= 3) of samples")
    return h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum())


def refine_simpson(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                   intervals: int, tolerance: float, refinement_limit: int,
                   min_halvings: int = 2) -> QuadratureResult:
    """Halve the Simpson step until successive estimates agree to ``tolerance``.

    ``func`` must be vectorised. Samples from the previous level are reused.
    The returned value carries one Richardson correction, (S_h/2 - S_h)/15;
    the error estimate is the uncorrected difference, which bounds it.
    """
    if intervals < 2:
        intervals = 2
    intervals += intervals % 2
    h = (b - a) / intervals
    values = np.asarray(func(a + h * np.arange(intervals + 1)), dtype=float)
    evaluations = values.size
    prev = simpson(values, h)
    for level in range(1, refinement_limit + 1):
        mid = a + h * (np.arange(intervals) + 0.5)
        new = np.asarray(func(mid), dtype=float)
        evaluations += new.size
        merged = np.empty(2 * intervals + 1)
        merged[0::2] = values
        merged[1::2] = new
        values = merged
        intervals *= 2
        h *= 0.5
        cur = simpson(values, h)
        diff = cur - prev
        if level >= min_halvings and abs(diff) < tolerance:
            return QuadratureResult(cur + diff / 15.0, abs(diff), evaluations, intervals)
        prev = cur
    raise QuadratureError(
        f"Simpson refinement did not reach tolerance {tolerance:g} after "
        f"{refinement_limit} halvings (last change {abs(diff):.3g})")
