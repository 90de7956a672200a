"""Derivative-free minimizers used to cross-check closed-form optimum constants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...


@dataclass(frozen=True)
class SearchSpec:
    lower: float
    upper: float
    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if not self.tolerance >= 1e-12:
            raise ValueError(f"tolerance must be >= 1e-12, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


class SearchResult(NamedTuple):
    argmin: float
    minimum: float
    iterations: int
    converged: bool


def iteration_bound(spec: SearchSpec) -> int:
    """Golden-section iterations needed to shrink the bracket below ``tolerance``."""
    return math.ceil(math.log((spec.upper - spec.lower) / spec.tolerance) / math.log(1.0 / INV_PHI))


def golden_minimize(f: Callable[[float], float], spec: SearchSpec) -> SearchResult:
    """Golden-section search for the minimum of a unimodal ``f`` on a bracket.

    Stops once the bracket is narrower than ``spec.tolerance``; the midpoint
    of the final bracket is returned. If ``max_iterations`` runs out first,
    the best point seen is returned with ``converged=False``.
    """
    a, b = float(spec.lower), float(spec.upper)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    iterations = 0
    while b - a > spec.tolerance:
        if iterations >= spec.max_iterations:
            x, fx = (c, fc) if fc <= fd else (d, fd)
            return SearchResult(x, fx, iterations, False)
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        iterations += 1
    x = 0.5 * (a + b)
    return SearchResult(x, f(x), iterations, True)


Box = Tuple[Tuple[float, float], Tuple[float, float]]


class GridResult(NamedTuple):
    argmin: Tuple[float, float]
    minimum: float
    evaluations: int


def grid_refine_minimize_2d(
    f: Callable[[float, float], float],
    box: Box,
    coarse: int = 41,
    refinements: int = 10,
) -> GridResult:
    """Nested grid search over a 2-D box.

    Each round evaluates a ``coarse`` x ``coarse`` grid, then recentres a box
    two grid steps wide on the best cell (clipped to the original box). Ties
    go to the lowest flat grid index, so the result does not depend on
    evaluation order.
    """
    if coarse < 8:
        raise ValueError(f"coarse must be >= 8, got {coarse}")
    (x_lo, x_hi), (y_lo, y_hi) = box
    if not all(map(math.isfinite, (x_lo, x_hi, y_lo, y_hi))):
        raise ValueError("box bounds must be finite")
    if not (x_lo < x_hi and y_lo < y_hi):
        raise ValueError("box bounds must be increasing")
    outer = ((x_lo, x_hi), (y_lo, y_hi))

    best = (math.nan, math.nan)
    best_val = math.inf
    evaluations = 0
    for _ in range(refinements + 1):
        xs = np.linspace(x_lo, x_hi, coarse)
        ys = np.linspace(y_lo, y_hi, coarse)
        values = np.array([[f(x, y) for y in ys] for x in xs], dtype=float)
        evaluations += values.size
        i, j = np.unravel_index(int(np.nanargmin(values)), values.shape)
        if values[i, j] <= best_val:
            best_val = float(values[i, j])
            best = (float(xs[i]), float(ys[j]))
        dx = xs[1] - xs[0]
        dy = ys[1] - ys[0]
        x_lo, x_hi = max(outer[0][0], best[0] - dx), min(outer[0][1], best[0] + dx)
        y_lo, y_hi = max(outer[1][0], best[1] - dy), min(outer[1][1], best[1] + dy)
    return GridResult(best, best_val, evaluations)


def grid_minimize_1d(f: Callable[[float], float], grid: Sequence[float]) -> Tuple[float, float]:
    """Brute-force minimum over an explicit grid (lowest index wins ties)."""
    values = [f(g) for g in grid]
    k = int(np.argmin(values))
    return float(grid[k]), float(values[k])
