"""Divergences between Bernoulli distributions, measured in nats.

Every function accepts scalars or numpy arrays and broadcasts. The
convention ``0 * log 0 = 0`` is used throughout, so boundary arguments
are always well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._optimize import grid_then_golden

Provenance = Literal["closed-form", "monte-carlo", "oracle"]

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class InfoQuantity:
    """A (conditional) mutual information value in nats.

    ``value`` is the total over ``per_term`` when per-index terms are
    present; bounds consume the individual terms because their square
    roots sit inside the sum.
    """

    kind: str
    value: float
    per_term: tuple[float, ...] = ()
    provenance: Provenance = "closed-form"
    stderr: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or self.value < -1e-12:
            raise ValueError(f"{self.kind}: information must be finite and >= 0, got {self.value}")
        if self.per_term:
            if min(self.per_term) < -1e-12:
                raise ValueError(f"{self.kind}: negative per-term information")
            total = math.fsum(self.per_term)
            if abs(total - self.value) > 1e-9 * max(1.0, abs(total)):
                raise ValueError(f"{self.kind}: per-term values sum to {total}, not {self.value}")


def _as_prob(p, name: str = "p") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if np.isnan(arr).any() or (arr < 0).any() or (arr > 1).any():
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return arr


def _as_weight(theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=float)
    if np.isnan(arr).any() or (arr <= 0).any() or (arr >= 1).any():
        raise ValueError(f"theta must lie strictly inside (0, 1), got {theta!r}")
    return arr


def _out(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def binary_entropy(p):
    """Entropy of a Bernoulli(p) variable."""
    p = _as_prob(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, -p * np.log(p), 0.0)
        b = np.where(p < 1, -(1 - p) * np.log1p(-p), 0.0)
    return _out(a + b)


def d_kl_binary(p, q):
    """KL divergence between Bernoulli(p) and Bernoulli(q).

    Returns ``inf`` when Bernoulli(p) is not absolutely continuous with
    respect to Bernoulli(q). The second term is evaluated with ``log1p``
    so that divergences between very small probabilities keep their
    relative accuracy.
    """
    p = _as_prob(p)
    q = _as_prob(q, "q")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = np.where(p > 0, p * (np.log(p) - np.log(q)), 0.0)
        b = np.where(p < 1, (1 - p) * (np.log1p(-p) - np.log1p(-q)), 0.0)
        total = a + b
    total = np.where(np.isnan(total), np.inf, total)
    return _out(np.maximum(total, 0.0))


def d_gamma(gamma, p, q):
    """The relaxation ``gamma*q - log(1 - p + p*exp(gamma))``.

    The log term is a log-sum-exp, so large ``gamma`` cannot overflow.
    Its supremum over ``gamma`` is ``d_kl_binary(q, p)``.
    """
    p = _as_prob(p)
    q = _as_prob(q, "q")
    gamma = np.asarray(gamma, dtype=float)
    if not np.isfinite(gamma).all():
        raise ValueError("gamma must be finite")
    with np.errstate(divide="ignore"):
        log_mgf = np.logaddexp(np.log1p(-p), np.log(p) + gamma)
    return _out(gamma * q - log_mgf)


def _gamma_grid() -> np.ndarray:
    # symmetric log spacing: 1000 points per sign plus the origin
    pos = np.logspace(-6, np.log10(30.0), 1000)
    return np.concatenate([-pos[::-1], [0.0], pos])


def d_gamma_supremum(p: float, q: float) -> float:
    """Maximise ``d_gamma(., p, q)`` over gamma in [-30, 30]."""
    _as_prob(p)
    _as_prob(q, "q")
    _, best = grid_then_golden(lambda g: -d_gamma(g, p, q), _gamma_grid())
    return -best


def d_js(theta, p, q):
    """Weighted binary Jensen-Shannon divergence.

    ``theta * KL(p || mix) + (1 - theta) * KL(q || mix)`` with
    ``mix = theta*p + (1 - theta)*q``.
    """
    theta = _as_weight(theta)
    p = _as_prob(p)
    q = _as_prob(q, "q")
    mix = np.clip(theta * p + (1 - theta) * q, 0.0, 1.0)
    val = theta * np.asarray(d_kl_binary(p, mix)) + (1 - theta) * np.asarray(d_kl_binary(q, mix))
    return _out(np.where(p == q, 0.0, val))


def d_js_inverse(theta: float, p: float, c: float) -> float:
    """Largest ``q`` in [p, 1] with ``d_js(theta, p, q) <= c``.

    ``d_js`` is convex in ``q`` with its minimum at ``q = p``, so the
    feasible set on the upper branch is an interval and bisection finds
    its right end.
    """
    _as_weight(theta)
    _as_prob(p)
    if not c >= 0:
        raise ValueError(f"c must be non-negative, got {c}")
    if d_js(theta, p, 1.0) <= c:
        return 1.0
    if c == 0:
        return float(p)  # rounding makes d_js vanish slightly above p
    lo, hi = float(p), 1.0
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo <= BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if d_js(theta, p, mid) <= c:
            lo = mid
        else:
            hi = mid
    return lo


def js_quadratic_floor(theta, p, q):
    """Lower bound ``2 theta (1 - theta) (p - q)^2`` on ``d_js``."""
    theta = _as_weight(theta)
    p = _as_prob(p)
    q = _as_prob(q, "q")
    return _out(2 * theta * (1 - theta) * (p - q) ** 2)
