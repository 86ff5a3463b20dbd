"""Downhill simplex (Nelder-Mead) minimization.

Classical coefficients: reflection 1.0, expansion 2.0, contraction 0.5,
shrink 0.5. Iterates until the simplex diameter falls below tolerance or
the iteration budget runs out, and always returns the best vertex seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import OptimizerError

REFLECTION = 1.0
EXPANSION = 2.0
CONTRACTION = 0.5
SHRINK = 0.5


@dataclass(frozen=True)
class SimplexConfig:
    diameter_tol: float = 1e-6
    max_iterations: int = 2000
    # Hard cap on objective evaluations (shrink steps cost one per vertex,
    # which dominates in high dimension). None derives it from iterations.
    max_evaluations: int | None = None
    # Step used to offset each coordinate when building the initial simplex.
    # None scales the step to the initial point's magnitude.
    initial_step: float | None = None


def _initial_simplex(init: np.ndarray, step: float | None) -> np.ndarray:
    k = init.size
    simplex = np.tile(init, (k + 1, 1))
    for i in range(k):
        delta = step if step is not None else 0.05 * max(abs(init[i]), 1.0)
        simplex[i + 1, i] += delta
    return simplex


def simplex_downhill(
    objective: Callable[[np.ndarray], float],
    init: Sequence[float] | np.ndarray,
    config: SimplexConfig | None = None,
) -> np.ndarray:
    """Minimize objective from init; returns the best vertex found."""
    cfg = config or SimplexConfig()
    x0 = np.asarray(init, dtype=np.float64).ravel()
    if x0.size < 1:
        raise ValueError("init must have at least one coordinate")
    eval_budget = cfg.max_evaluations
    if eval_budget is None:
        eval_budget = x0.size + 1 + 3 * cfg.max_iterations
    evals = 0

    def evaluate(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        value = float(objective(x))
        if not math.isfinite(value):
            raise OptimizerError(f"objective returned non-finite value {value!r} at {x!r}")
        return value

    simplex = _initial_simplex(x0, cfg.initial_step)
    values = np.array([evaluate(v) for v in simplex])

    for _ in range(cfg.max_iterations):
        if evals >= eval_budget:
            break
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]
        if np.max(np.abs(simplex[1:] - simplex[0])) < cfg.diameter_tol:
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + REFLECTION * (centroid - worst)
        f_reflected = evaluate(reflected)

        if f_reflected < values[0]:
            expanded = centroid + EXPANSION * (reflected - centroid)
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + CONTRACTION * (reflected - centroid)
            else:
                contracted = centroid - CONTRACTION * (centroid - worst)
            f_contracted = evaluate(contracted)
            if f_contracted < min(f_reflected, values[-1]):
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                best = simplex[0]
                for i in range(1, simplex.shape[0]):
                    simplex[i] = best + SHRINK * (simplex[i] - best)
                    values[i] = evaluate(simplex[i])

    return simplex[int(np.argmin(values))].copy()
