"""Generalisation bounds assembled from information quantities.

Each bounded-loss kind has the form ``coefficient * sum_i sqrt(I_i)``; the
coefficient is applied to every term under its own square root, never to
the total. CGF-form bounds go through :func:`lambda_optimize` and the
prediction-based bounds invert the weighted JS divergence.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Protocol

import numpy as np

from ._optimize import grid_then_golden
from .info_measures import InfoQuantity, d_js_inverse
from .supersample import PartitionConfig

LAMBDA_RANGE = (1e-4, 1e4)
LAMBDA_POINTS = 400


class BoundKind(str, Enum):
    MI = "MI"
    IMI = "IMI"
    IPMI = "IPMI"
    CMI_STD = "CMI_STD"
    ICIMI = "ICIMI"
    LOO_CMI = "LOO_CMI"
    IPCIMI_BOUNDED = "IPCIMI_BOUNDED"
    LMO_CMI = "LMO_CMI"
    LOFO_CMI = "LOFO_CMI"
    MN_IPCIMI = "MN_IPCIMI"
    SIPCIMI = "SIPCIMI"
    SICIMI = "SICIMI"
    LOO_SCMI = "LOO_SCMI"
    LMO_SCMI = "LMO_SCMI"
    GENERAL_CGF = "GENERAL_CGF"
    VAR_IPCIMI = "VAR_IPCIMI"
    JS_PRED = "JS_PRED"
    JS_PRED_SINGLE = "JS_PRED_SINGLE"


DELTA_KINDS = (BoundKind.IPCIMI_BOUNDED, BoundKind.LMO_CMI)


class Sizes(Protocol):
    n: int
    m: int
    k: int


@dataclass(frozen=True)
class BoundValue:
    kind: BoundKind
    value: float
    coefficient: float
    info_total: float
    stderr: float = 0.0
    params: tuple[int, int, int, float] = (0, 0, 0, 1.0)
    terms: tuple[float, ...] = ()
    label: str = ""

    @property
    def name(self) -> str:
        return self.label or self.kind.value

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError(f"{self.kind}: bound must be finite and >= 0, got {self.value}")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")

    def recompute(self) -> float:
        """Value rebuilt from the coefficient and the per-term information."""
        return self.coefficient * math.fsum(math.sqrt(t) for t in self.terms)


def coefficient_C(cfg: PartitionConfig) -> float:
    """Leading constant of the CGF bound for the block cross-validation error."""
    n, m, k = cfg.n, cfg.m, cfg.k
    if min(n, m) == k:
        return (n + m) / max(n, m)
    denom = n * m - k * min(n, m)
    if denom <= 0 or n + m - k <= 0:
        raise ValueError(f"degenerate constant for {cfg}")
    return (n + m) / (n + m - k) * (n * m) / denom


def _sizes(cfg: Sizes) -> tuple[int, int, int]:
    return int(cfg.n), int(getattr(cfg, "m", 0)), int(getattr(cfg, "k", 1))


def term_count(kind: BoundKind, cfg: Sizes) -> int:
    """Number of summands in the bound's outer sum."""
    n, m, k = _sizes(cfg)
    counts = {
        BoundKind.MI: 1,
        BoundKind.IMI: n,
        BoundKind.IPMI: k,
        BoundKind.CMI_STD: 1,
        BoundKind.ICIMI: n,
        BoundKind.LOO_CMI: 1,
        BoundKind.IPCIMI_BOUNDED: k,
        BoundKind.LMO_CMI: 1,
        BoundKind.LOFO_CMI: m,
        BoundKind.MN_IPCIMI: n,
        BoundKind.SIPCIMI: n + m,
        BoundKind.SICIMI: n,
        BoundKind.LOO_SCMI: n + 1,
        BoundKind.LMO_SCMI: n + m,
        BoundKind.VAR_IPCIMI: k,
    }
    if kind not in counts:
        raise ValueError(f"{kind.value} is not a square-root bound")
    return counts[kind]


def coefficient(kind: BoundKind, cfg: Sizes, delta: float = 1.0) -> float:
    """Factor ``c`` such that the bound equals ``c * sum_i sqrt(I_i)``."""
    kind = BoundKind(kind)
    n, m, k = _sizes(cfg)
    if kind in DELTA_KINDS and not delta > 0:
        raise ValueError(f"{kind.value} needs a positive loss-difference range delta")
    if kind is BoundKind.MI:
        return math.sqrt(1 / (2 * n))
    if kind in (BoundKind.IMI,):
        return math.sqrt(0.5) / n
    if kind is BoundKind.IPMI:
        return math.sqrt(k / (2 * n)) / k
    if kind is BoundKind.CMI_STD:
        return math.sqrt(2 / n)
    if kind in (BoundKind.ICIMI, BoundKind.SICIMI):
        return math.sqrt(2) / n
    if kind is BoundKind.LOO_CMI:
        return (n + 1) / n * math.sqrt(0.5)
    if kind is BoundKind.LOO_SCMI:
        return math.sqrt(1 / (2 * n))
    if m < 1:
        raise ValueError(f"{kind.value} needs m >= 1")
    if kind is BoundKind.IPCIMI_BOUNDED:
        C = coefficient_C(PartitionConfig(n, m, k))
        return math.sqrt(delta**2 * C * k * (n + m) / (2 * n * m)) / k
    if kind is BoundKind.LMO_CMI:
        C = coefficient_C(PartitionConfig(n, m, 1))
        return math.sqrt(delta**2 * C * (n + m) / (2 * n * m))
    if kind is BoundKind.LOFO_CMI:
        if n % m:
            raise ValueError(f"LOFO_CMI needs m | n, got n={n}, m={m}")
        return (n + m) / (n * m) * math.sqrt(0.5)
    if kind is BoundKind.MN_IPCIMI:
        if m % n:
            raise ValueError(f"MN_IPCIMI needs n | m, got n={n}, m={m}")
        return (n + m) / (n * m) * math.sqrt(0.5)
    if kind in (BoundKind.SIPCIMI, BoundKind.LMO_SCMI):
        return math.sqrt(1 / (2 * n * m))
    if kind is BoundKind.VAR_IPCIMI:
        return math.sqrt(k * (n + m) / (n * m)) / k
    raise ValueError(f"{kind.value} has no coefficient rule")


def _terms(quantity: InfoQuantity) -> tuple[float, ...]:
    return tuple(quantity.per_term) if quantity.per_term else (quantity.value,)


def assemble(
    kind: BoundKind | str,
    quantity: InfoQuantity,
    cfg: Sizes,
    delta: float = 1.0,
    stderr: float = 0.0,
) -> BoundValue:
    """Bound value for a square-root kind from its per-summand information."""
    kind = BoundKind(kind)
    terms = tuple(max(t, 0.0) for t in _terms(quantity))
    expected = term_count(kind, cfg)
    if len(terms) != expected:
        raise ValueError(f"{kind.value} sums {expected} terms, got {len(terms)}")
    coef = coefficient(kind, cfg, delta)
    value = coef * math.fsum(math.sqrt(t) for t in terms)
    n, m, k = _sizes(cfg)
    return BoundValue(kind, value, coef, math.fsum(terms), stderr, (n, m, k, delta), terms)


def assemble_disintegrated(
    kind: BoundKind | str,
    outcomes: Sequence[tuple[float, InfoQuantity]],
    cfg: Sizes,
    delta: float = 1.0,
) -> BoundValue:
    """Expectation over conditioning values of the bound at each value.

    ``outcomes`` lists ``(probability, quantity)`` pairs; the square roots
    are taken before averaging.
    """
    kind = BoundKind(kind)
    weights = np.array([w for w, _ in outcomes], dtype=float)
    if (weights < 0).any() or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("outcome probabilities must be non-negative and sum to 1")
    parts = [assemble(kind, q, cfg, delta) for _, q in outcomes]
    value = math.fsum(w * b.value for w, b in zip(weights, parts))
    info = math.fsum(w * b.info_total for w, b in zip(weights, parts))
    n, m, k = _sizes(cfg)
    return BoundValue(kind, value, parts[0].coefficient, info, 0.0, (n, m, k, delta))


# ---------------------------------------------------------------------------
# CGF-form bounds


@dataclass(frozen=True)
class LambdaOptimum:
    value: float
    lam: float


def lambda_search(
    info: float,
    psi: Callable[[float], float],
    lambda_range: tuple[float, float] = LAMBDA_RANGE,
    points: int = LAMBDA_POINTS,
) -> LambdaOptimum:
    """Minimise ``(info + psi(lam)) / lam`` over ``lam > 0``."""
    lo, hi = lambda_range
    if not 0 < lo < hi:
        raise ValueError(f"invalid lambda range {lambda_range}")
    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    psi_grid = np.array([psi(float(x)) for x in grid])
    ok = np.isfinite(psi_grid)
    if not ok.any():
        raise ValueError("psi is non-finite on the whole lambda range")
    # keep the contiguous finite stretch containing the smallest lambdas
    last = int(np.argmin(ok)) if not ok.all() else len(grid)
    first = int(np.argmax(ok))
    grid = grid[first:last] if last > first else grid[ok]
    log_grid = np.log(grid)

    def objective(log_lam: float) -> float:
        lam = math.exp(log_lam)
        val = psi(lam)
        return (info + val) / lam if np.isfinite(val) else math.inf

    arg, best = grid_then_golden(objective, log_grid)
    return LambdaOptimum(best, math.exp(arg))


def lambda_optimize(
    info: float,
    psi: Callable[[float], float],
    lambda_range: tuple[float, float] = LAMBDA_RANGE,
) -> float:
    """``inf over lam > 0 of (info + psi(lam)) / lam`` by grid scan plus golden section."""
    return lambda_search(info, psi, lambda_range).value


def general_cgf_bound(
    infos: Sequence[float],
    psi: Callable[[float], float],
    cfg: Sizes,
    weight: float | None = None,
    lambda_range: tuple[float, float] = LAMBDA_RANGE,
) -> BoundValue:
    """Average over summands of the optimised CGF-form bound.

    ``psi`` bounds the CGF shared by every summand; ``weight`` defaults to
    ``1 / len(infos)``.
    """
    weight = 1 / len(infos) if weight is None else weight
    opts = [lambda_search(i, psi, lambda_range) for i in infos]
    value = weight * math.fsum(o.value for o in opts)
    n, m, k = _sizes(cfg)
    return BoundValue(
        BoundKind.GENERAL_CGF, value, weight, math.fsum(infos), 0.0, (n, m, k, float("nan"))
    )


# ---------------------------------------------------------------------------
# prediction-based bounds


def js_budget(info_sum: float, cfg: Sizes, mode: Literal["blockwise", "single"]) -> float:
    n, m, _ = _sizes(cfg)
    if info_sum < 0:
        raise ValueError("info_sum must be non-negative")
    if mode == "blockwise":
        return 2 * info_sum / (n + m)
    if mode == "single":
        return info_sum / (n + m)
    raise ValueError(f"unknown mode {mode!r}")


def js_population_bound(
    emp_risk: float,
    info_sum: float,
    cfg: Sizes,
    mode: Literal["blockwise", "single"] = "single",
) -> float:
    """Upper bound on the population risk of a loss valued in [0, 1].

    ``blockwise`` expects the sum over blocks of ``I(block losses; U_i)``;
    ``single`` expects the double sum of ``I(L_ij; U_i)``.
    """
    n, m, _ = _sizes(cfg)
    return d_js_inverse(n / (n + m), emp_risk, js_budget(info_sum, cfg, mode))


def js_gap_bound(
    emp_risk: float, info_sum: float, cfg: Sizes, mode: Literal["blockwise", "single"] = "single"
) -> BoundValue:
    """Generalisation-gap form of :func:`js_population_bound`."""
    kind = BoundKind.JS_PRED if mode == "blockwise" else BoundKind.JS_PRED_SINGLE
    pop = js_population_bound(emp_risk, info_sum, cfg, mode)
    n, m, k = _sizes(cfg)
    return BoundValue(kind, max(pop - emp_risk, 0.0), 1.0, info_sum, 0.0, (n, m, k, 1.0))


def bac_mutual_information(emp_risk: float, pop_risk: float, cfg: Sizes) -> float:
    """Mutual information across the binary asymmetric channel from membership to 0-1 loss.

    Input 0 (held out, prior ``m/(n+m)``) yields a loss with rate
    ``pop_risk``; input 1 (training, prior ``n/(n+m)``) with rate ``emp_risk``.
    """
    n, m, _ = _sizes(cfg)
    prior = np.array([m / (n + m), n / (n + m)])
    channel = np.array([[1 - pop_risk, pop_risk], [1 - emp_risk, emp_risk]])
    joint = prior[:, None] * channel
    out = joint.sum(axis=0)
    live = joint > 0
    ratio = np.where(live, joint, 1.0) / (prior[:, None] * np.where(out > 0, out, 1.0)[None, :])
    return max(math.fsum((joint[live] * np.log(ratio[live])).ravel()), 0.0)
