"""One-dimensional minimisation: grid scan followed by golden-section refinement."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
from scipy.optimize import minimize_scalar


def grid_then_golden(
    objective: Callable[[float], float],
    grid: np.ndarray,
    xtol: float = 1e-8,
) -> tuple[float, float]:
    """Minimise ``objective`` over the span of ``grid``.

    The grid is scanned first; the best interior point and its neighbours
    then bracket a golden-section search. Returns ``(argmin, min)``. The
    returned minimum is never larger than the best grid value.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.array([objective(float(x)) for x in grid])
    finite = np.isfinite(values)
    if not finite.any():
        raise ValueError("objective is non-finite on the whole search grid")
    values = np.where(finite, values, np.inf)
    best = int(np.argmin(values))
    best_x, best_val = float(grid[best]), float(values[best])
    if 0 < best < len(grid) - 1 and finite[best - 1] and finite[best + 1]:
        lo, hi = float(grid[best - 1]), float(grid[best + 1])
        try:
            res = minimize_scalar(
                objective, bracket=(lo, best_x, hi), method="golden", tol=xtol
            )
        except ValueError:
            # flat neighbourhoods can defeat the bracket check
            return best_x, best_val
        if np.isfinite(res.fun) and res.fun < best_val and lo <= res.x <= hi:
            return float(res.x), float(res.fun)
    return best_x, best_val
