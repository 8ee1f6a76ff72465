"""Exact information quantities for Bernoulli mean estimation.

Data are i.i.d. Bernoulli(p) and the learner outputs the training mean
``W = (1/n) sum Z_i``. Every quantity below is a finite expectation over
binomial counts, evaluated exactly over the whole support with
log-gamma binomial weights, so no asymptotic approximation is involved.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .info_measures import InfoQuantity, binary_entropy

MAX_TRIALS = 10**6


class InfoKind(str, Enum):
    MI_FULL = "MI_FULL"
    IMI = "IMI"
    IPMI_BLOCK = "IPMI_BLOCK"
    LOO_CMI = "LOO_CMI"
    ICIMI = "ICIMI"
    LMO_CMI = "LMO_CMI"
    LOFO_CMI = "LOFO_CMI"
    MN_IPCIMI = "MN_IPCIMI"
    SICIMI = "SICIMI"
    LOO_SCMI = "LOO_SCMI"
    LMO_SCMI = "LMO_SCMI"


DISINTEGRABLE = (InfoKind.LMO_SCMI, InfoKind.SICIMI, InfoKind.LOO_SCMI)


@dataclass(frozen=True)
class BernoulliInstance:
    """Sizes and data parameter. ``m = 0`` means no held-out points."""

    n: int
    m: int = 0
    k: int = 1
    p: float = 0.5

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 0 or self.k < 1:
            raise ValueError(f"invalid sizes n={self.n}, m={self.m}, k={self.k}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.n % self.k:
            raise ValueError(f"k={self.k} does not divide n={self.n}")
        if self.m and self.m % self.k:
            raise ValueError(f"k={self.k} does not divide m={self.m}")


def binomial_log_weights(trials: int, p: float) -> np.ndarray:
    """Log probabilities of Binomial(trials, p) over 0..trials."""
    if not 0 <= trials <= MAX_TRIALS:
        raise ValueError(f"trials must lie in [0, {MAX_TRIALS}], got {trials}")
    x = np.arange(trials + 1, dtype=float)
    log_comb = gammaln(trials + 1) - gammaln(x + 1) - gammaln(trials - x + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_comb + xlogy(x, p) + xlog1py(trials - x, -p)


def binomial_weights(trials: int, p: float) -> np.ndarray:
    w = np.exp(binomial_log_weights(trials, p))
    return w / w.sum()


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    values = np.broadcast_to(np.asarray(values, dtype=float), weights.shape)
    live = weights > 0
    if not np.isfinite(values[live]).all():
        bad = np.argwhere(live & ~np.isfinite(values))[0]
        raise ValueError(f"integrand is not finite at support point {tuple(int(b) for b in bad)}")
    return math.fsum((weights[live] * values[live]).ravel())


def binom_expect(trials: int, p: float, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """``E f(X)`` for ``X ~ Binomial(trials, p)``; ``f`` is applied to the integer support array."""
    x = np.arange(trials + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = f(x)
    return _weighted_sum(binomial_weights(trials, p), vals)


def binom_expect2(
    trials_x: int, trials_y: int, p: float, f: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> float:
    """``E f(X, Y)`` for independent ``X ~ Bin(trials_x, p)``, ``Y ~ Bin(trials_y, p)``."""
    x = np.arange(trials_x + 1)[:, None]
    y = np.arange(trials_y + 1)[None, :]
    weights = binomial_weights(trials_x, p)[:, None] * binomial_weights(trials_y, p)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = f(x, y)
    return _weighted_sum(weights, vals)


def log_comb(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def true_gen_error(n: int, p: float) -> float:
    """Expected generalisation gap of the training mean under squared loss."""
    if n < 1:
        raise ValueError("n must be positive")
    return 2 * p * (1 - p) / n


# ---------------------------------------------------------------------------
# closed forms; each returns the information of a single summand


def _mi_full(n: int, p: float) -> float:
    # entropy of Binomial(n, p), since W is a bijection of the count
    return binom_expect(n, p, lambda x: -(log_comb(n, x) + xlogy(x, p) + xlog1py(n - x, -p)))


def _imi(n: int, p: float) -> float:
    t = n - 1
    return (
        binary_entropy(p)
        - math.log(n)
        + p * binom_expect(t, p, lambda x: np.log(x + 1.0))
        + (1 - p) * binom_expect(t, p, lambda x: np.log(t - x + 1.0))
    )


def _ipmi_block(n: int, k: int, p: float) -> float:
    t = n // k
    rest = n - t
    return binom_expect2(
        t,
        rest,
        p,
        lambda x, y: log_comb(rest, y) - log_comb(n, x + y) - xlogy(x, p) - xlog1py(t - x, -p),
    )


def _loo_cmi(n: int, p: float) -> float:
    return math.log(n + 1) - binom_expect(
        n, p, lambda x: (1 - p) * np.log(n + 1.0 - x) + p * np.log(x + 1.0)
    )


def _icimi(n: int, p: float) -> float:
    t = n - 1
    a, b = (1 - p) / p, p / (1 - p)
    e1 = binom_expect(t, p, lambda x: np.log(a * x / (t - x + 1.0) + 1))
    e2 = binom_expect(t, p, lambda x: np.log(b * (t - x) / (x + 1.0) + 1))
    return p * (1 - p) * (2 * math.log(2) - e1 - e2)


def _lmo_cmi(n: int, m: int, p: float) -> float:
    return float(log_comb(n + m, n)) - binom_expect2(
        n, m, p, lambda x, y: log_comb(x + y, x) + log_comb(n - x + m - y, n - x)
    )


def _lofo_cmi(n: int, m: int, p: float) -> float:
    f = n // m
    t = n - f
    a, b = (1 - p) / p, p / (1 - p)

    def integrand(x, y):
        xb, yb = t - x, f - y
        return p * np.log(y + 1 + a * x * yb / (xb + 1.0)) + (1 - p) * np.log(
            yb + 1 + b * xb * y / (x + 1.0)
        )

    return math.log(f + 1) - binom_expect2(t, f, p, integrand)


def _mn_ipcimi(n: int, m: int, p: float) -> float:
    f = m // n
    t = n - 1
    a, b = (1 - p) / p, p / (1 - p)

    def integrand(x, y):
        xb, yb = t - x, f - y
        return p * np.log(y + 1 + b * xb * yb / (x + 1.0)) + (1 - p) * np.log(
            yb + 1 + a * x * y / (xb + 1.0)
        )

    return math.log(f + 1) - binom_expect2(t, f, p, integrand)


def _sicimi(n: int, p: float) -> float:
    q = 1 - p
    t = n - 1
    ex = binom_expect(
        n, p, lambda x: p / 2 * np.log1p(x / (n * p)) + q / 2 * np.log1p((n - x) / (n * q))
    )
    ey = binom_expect(
        t, p, lambda y: p / 2 * np.log1p(n * p / (y + 1.0)) + q / 2 * np.log1p(n * q / (t - y + 1.0))
    )
    return math.log(2) - ex - ey


def _loo_scmi(n: int, p: float) -> float:
    q = 1 - p
    t = n - 1
    ex = binom_expect(n, p, lambda x: p * np.log1p(x / p) + q * np.log1p((n - x) / q))
    ey = binom_expect(
        t, p, lambda y: p * n * np.log(n + n * p / (y + 1.0)) + q * n * np.log(n + n * q / (t - y + 1.0))
    )
    return math.log(n + 1) - (ex + ey) / (n + 1)


def _lmo_scmi(n: int, m: int, p: float) -> float:
    q = 1 - p
    t = n - 1
    wt, wn = m / (n + m), n / (n + m)
    ex = binom_expect(n, p, lambda x: wt * (p * np.log(m + x / p) + q * np.log(m + (n - x) / q)))
    ey = binom_expect(
        t,
        p,
        lambda y: wn
        * (p * np.log(n + n * m * p / (y + 1.0)) + q * np.log(n + n * m * q / (t - y + 1.0))),
    )
    return math.log(n + m) - ex - ey


def _require(kind: InfoKind, inst: BernoulliInstance) -> tuple[int, int]:
    """Validate the instance for ``kind``; return (held-out count, number of summands)."""
    n, m, k = inst.n, inst.m, inst.k
    if kind in (InfoKind.MI_FULL, InfoKind.LOO_CMI):
        return m, 1
    if kind in (InfoKind.IMI, InfoKind.ICIMI, InfoKind.SICIMI):
        return m, n
    if kind is InfoKind.IPMI_BLOCK:
        return m, k
    if kind is InfoKind.LOO_SCMI:
        return 1, n + 1
    if m < 1:
        raise ValueError(f"{kind.value} needs m >= 1 held-out points")
    if kind is InfoKind.LMO_CMI:
        return m, 1
    if kind is InfoKind.LMO_SCMI:
        return m, n + m
    if kind is InfoKind.LOFO_CMI:
        if n % m:
            raise ValueError(f"{kind.value} needs m | n, but m={m} does not divide n={n}")
        return m, m
    if kind is InfoKind.MN_IPCIMI:
        if m % n:
            raise ValueError(f"{kind.value} needs n | m, but n={n} does not divide m={m}")
        return m, n
    raise ValueError(f"unknown kind {kind!r}")


def _single_term(kind: InfoKind, inst: BernoulliInstance) -> float:
    n, m, k, p = inst.n, inst.m, inst.k, inst.p
    if p in (0.0, 1.0):
        return 0.0
    if kind is InfoKind.MI_FULL:
        return _mi_full(n, p)
    if kind is InfoKind.IMI:
        return _imi(n, p)
    if kind is InfoKind.IPMI_BLOCK:
        return _ipmi_block(n, k, p)
    if kind is InfoKind.LOO_CMI:
        return _loo_cmi(n, p)
    if kind is InfoKind.ICIMI:
        return _icimi(n, p)
    if kind is InfoKind.LMO_CMI:
        return _lmo_cmi(n, m, p)
    if kind is InfoKind.LOFO_CMI:
        return _lofo_cmi(n, m, p)
    if kind is InfoKind.MN_IPCIMI:
        return _mn_ipcimi(n, m, p)
    if kind is InfoKind.SICIMI:
        return _sicimi(n, p)
    if kind is InfoKind.LOO_SCMI:
        return _loo_scmi(n, p)
    if kind is InfoKind.LMO_SCMI:
        return _lmo_scmi(n, m, p)
    raise ValueError(f"unknown kind {kind!r}")


def _pack(kind: InfoKind, single: float, count: int, **meta) -> InfoQuantity:
    single = max(single, 0.0)
    terms = (single,) * count
    return InfoQuantity(kind.value, math.fsum(terms), terms, "closed-form", meta=meta)


def info_quantity(kind: InfoKind | str, instance: BernoulliInstance) -> InfoQuantity:
    """Exact information quantity with one entry per summand of its bound.

    Every summand has the same value by exchangeability, so ``per_term``
    repeats the single-summand value and ``value`` is their total.
    """
    kind = InfoKind(kind)
    _, count = _require(kind, instance)
    return _pack(kind, _single_term(kind, instance), count, instance=instance)


# ---------------------------------------------------------------------------
# disintegrated single-point information, built from conditional laws


def _score_mixture_js(n: int, weight_train: float, p: float, z: int) -> float:
    """``I(W; T | Z_j = z)`` for the training mean.

    Given ``Z_j = z`` the hypothesis count is ``z + Bin(n-1, p)`` when the
    point is used for training and ``Bin(n, p)`` otherwise; the membership
    indicator is Bernoulli(``weight_train``), so the information is a
    weighted JS divergence between these two laws.
    """
    if p in (0.0, 1.0):
        return 0.0
    train = np.zeros(n + 1)
    train[z : z + n] = binomial_weights(n - 1, p)
    held = binomial_weights(n, p)
    mix = weight_train * train + (1 - weight_train) * held

    def kl(a: np.ndarray, b: np.ndarray) -> float:
        live = a > 0
        return math.fsum(a[live] * (np.log(a[live]) - np.log(b[live])))

    val = weight_train * kl(train, mix) + (1 - weight_train) * kl(held, mix)
    return max(val, 0.0)


def _dis_setting(kind: InfoKind, inst: BernoulliInstance) -> tuple[int, int]:
    """Held-out count and number of summands for a single-point kind."""
    if kind is InfoKind.SICIMI:
        return inst.n, inst.n
    if kind is InfoKind.LOO_SCMI:
        return 1, inst.n + 1
    if inst.m < 1:
        raise ValueError("LMO_SCMI needs m >= 1 held-out points")
    return inst.m, inst.n + inst.m


def dis_info_quantity(kind: InfoKind | str, instance: BernoulliInstance, conditioning_value: int) -> InfoQuantity:
    """Information at a fixed value of the conditioning supersample point.

    Averaging the results for ``conditioning_value`` 0 and 1 with weights
    ``(1 - p, p)`` gives the corresponding integrated quantity.
    """
    kind = InfoKind(kind)
    if kind not in DISINTEGRABLE:
        raise ValueError(f"{kind.value} has no single-point disintegration")
    if conditioning_value not in (0, 1):
        raise ValueError("conditioning_value must be 0 or 1")
    held, count = _dis_setting(kind, instance)
    n = instance.n
    single = _score_mixture_js(n, n / (n + held), instance.p, conditioning_value)
    return _pack(kind, single, count, instance=instance, conditioning_value=conditioning_value)


def integrated_from_tables(kind: InfoKind | str, instance: BernoulliInstance) -> InfoQuantity:
    """Integrated single-point information via the conditional-law route."""
    kind = InfoKind(kind)
    p = instance.p
    v0 = dis_info_quantity(kind, instance, 0).per_term[0]
    v1 = dis_info_quantity(kind, instance, 1).per_term[0]
    _, count = _dis_setting(kind, instance)
    return _pack(kind, (1 - p) * v0 + p * v1, count, instance=instance)


# ---------------------------------------------------------------------------
# assembled bounds

_BOUND_INFO = {
    "MI": InfoKind.MI_FULL,
    "IMI": InfoKind.IMI,
    "IPMI": InfoKind.IPMI_BLOCK,
    "ICIMI": InfoKind.ICIMI,
    "LOO_CMI": InfoKind.LOO_CMI,
    "LMO_CMI": InfoKind.LMO_CMI,
    "LOFO_CMI": InfoKind.LOFO_CMI,
    "MN_IPCIMI": InfoKind.MN_IPCIMI,
    "SICIMI": InfoKind.SICIMI,
    "LOO_SCMI": InfoKind.LOO_SCMI,
    "LMO_SCMI": InfoKind.LMO_SCMI,
}

BERNOULLI_BOUNDS = tuple(_BOUND_INFO)


def bound_sizes(kind: str, n: int, m: int = 0, k: int = 1) -> tuple[int, int, int]:
    """The ``(n, m, k)`` geometry a bound kind actually uses.

    Kinds tied to a fixed setting ignore the supplied ``m`` or ``k``.
    """
    if kind in ("MI", "IMI"):
        return n, 0, 1
    if kind == "IPMI":
        return n, 0, k
    if kind in ("ICIMI", "SICIMI"):
        return n, n, n
    if kind in ("LOO_CMI", "LOO_SCMI"):
        return n, 1, 1
    if kind in ("LMO_CMI", "LMO_SCMI"):
        return n, m, 1
    if kind == "LOFO_CMI":
        return n, m, m
    if kind == "MN_IPCIMI":
        return n, m, n
    raise ValueError(f"{kind} has no Bernoulli closed form")


def bernoulli_bound(kind: str, n: int, m: int = 0, k: int = 1, p: float = 0.5, disintegrated: bool = False):
    """Assembled generalisation bound for the Bernoulli training mean.

    ``disintegrated`` applies to the single-point kinds and averages the
    bound over the value of the conditioning point.
    """
    from .bound_catalog import assemble, assemble_disintegrated

    info_kind = _BOUND_INFO.get(kind)
    if info_kind is None:
        raise ValueError(f"{kind} has no Bernoulli closed form")
    sizes = bound_sizes(kind, n, m, k)
    inst = BernoulliInstance(*sizes, p=p)
    if disintegrated:
        if info_kind not in DISINTEGRABLE:
            raise ValueError(f"{kind} has no disintegrated form")
        outcomes = [(1 - p, dis_info_quantity(info_kind, inst, 0)), (p, dis_info_quantity(info_kind, inst, 1))]
        return assemble_disintegrated(kind, outcomes, inst)
    return assemble(kind, info_quantity(info_kind, inst), inst)
