"""Bounds for Gaussian mean estimation.

Two learners are covered.

* Sample mean under squared loss (unbounded). Given one block of the
  supersample, the hypothesis is a Gaussian mixture whose components are
  indexed by the block's training subset, and the block error is affine in
  the hypothesis. Both the conditional mutual information (by quadrature)
  and the decoupled CGF (in closed form) are therefore exact per draw; only
  the outer expectation over the block is Monte Carlo.
* Sign rule ``W = mu`` if the training mean is ``>= 0`` else ``-mu`` under
  a loss truncated to [0, 1]. Error probabilities are normal tail
  probabilities of the unconditioned part of the training sum. Because
  errors are rare, the outer expectation uses importance sampling on the
  block's training sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import simpson
from scipy.special import logsumexp, ndtr
from scipy.stats import norm

from .bound_catalog import BoundKind, BoundValue, coefficient, lambda_search
from .info_measures import d_kl_binary
from .supersample import PartitionConfig, derive_rng

GaussianLoss = Literal["quadratic", "truncated-quadratic"]
GeneralKind = Literal["ICIMI_GENERAL", "LOFO_GENERAL"]
FiniteKind = Literal["IMI", "ICIMI", "LOO_CMI", "LOFO_CMI"]

QUAD_HALF_WIDTH = 10.0
QUAD_MASS_TOL = 1e-10


@dataclass(frozen=True)
class GaussianInstance:
    n: int
    m: int
    mu: float = 0.0
    sigma: float = 1.0
    loss: GaussianLoss = "quadratic"

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"n and m must be positive, got n={self.n}, m={self.m}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.loss not in ("quadratic", "truncated-quadratic"):
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass(frozen=True)
class McConfig:
    outer_samples: int = 2000
    inner_samples: int = 20000
    seed: int = 0
    lambda_range: tuple[float, float] = (1e-4, 1e4)
    quadrature_points: int = 801

    def __post_init__(self) -> None:
        if self.outer_samples < 1 or self.inner_samples < 1:
            raise ValueError("sample counts must be positive")
        if self.quadrature_points < 51 or self.quadrature_points % 2 == 0:
            raise ValueError("quadrature_points must be odd and at least 51")


@dataclass(frozen=True)
class NormalLaw:
    mean: float
    variance: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, math.sqrt(self.variance), size)


def truncated_quadratic_loss(w, z):
    return np.minimum((np.asarray(w) - np.asarray(z)) ** 2, 1.0)


def true_gen_error(n: int, sigma: float) -> float:
    """Generalisation gap of the sample mean under squared loss."""
    return 2 * sigma**2 / n


# ---------------------------------------------------------------------------
# sample mean, squared loss


def gaussian_imi_closed(n: int, sigma: float) -> BoundValue:
    """Closed-form individual-sample MI bound for the sample mean."""
    if n < 2:
        raise ValueError("the closed form needs n >= 2 (the information diverges at n = 1)")
    info = 0.5 * math.log(n / (n - 1))
    scale = sigma**2 * (n + 1) / n
    value = sigma**2 * math.sqrt(2 * (n + 1) ** 2 / n**2 * math.log(n / (n - 1)))
    # value = 2 * scale * sqrt(info), spread over n equal terms
    return BoundValue(
        BoundKind.IMI, value, 2 * scale / n, n * info, 0.0, (n, 0, 1, float("nan")), (info,) * n
    )


def gaussian_imi_general(n: int, sigma: float, cgf: Literal["sub-gaussian", "exact"] = "sub-gaussian",
                         lambda_range: tuple[float, float] = (1e-4, 1e4)) -> float:
    """Individual-sample MI bound with the CGF optimised over lambda.

    The decoupled loss ``(W' - Z')^2`` is ``scale * chi2_1`` with
    ``scale = sigma^2 (n+1)/n``. ``sub-gaussian`` uses the Gaussian CGF
    with the loss's exact variance ``2 scale^2``; ``exact`` uses the
    chi-square CGF of the negated loss, which is smaller. ``lambda_range``
    is in units of ``1 / sigma^2``.
    """
    if n < 2:
        raise ValueError("needs n >= 2")
    info = 0.5 * math.log(n / (n - 1))
    scale = sigma**2 * (n + 1) / n
    if cgf == "sub-gaussian":
        psi = lambda lam: lam**2 * scale**2
    elif cgf == "exact":
        psi = lambda lam: lam * scale - 0.5 * math.log1p(2 * lam * scale)
    else:
        raise ValueError(f"unknown cgf {cgf!r}")
    return lambda_search(info, psi, (lambda_range[0] / sigma**2, lambda_range[1] / sigma**2)).value


def posterior_given_pair(instance: GaussianInstance, pair: tuple[float, float], r: int) -> NormalLaw:
    """Law of the sample mean given a supersample pair and which of them trains.

    The other ``n - 1`` training points are unconditioned.
    """
    if r not in (0, 1):
        raise ValueError("r must be 0 or 1")
    n, mu, sigma = instance.n, instance.mu, instance.sigma
    return NormalLaw((pair[r] + (n - 1) * mu) / n, (n - 1) * sigma**2 / n**2)


def _general_cfg(kind: GeneralKind, instance: GaussianInstance) -> PartitionConfig:
    n, m = instance.n, instance.m
    if kind == "ICIMI_GENERAL":
        return PartitionConfig(n, n, n)
    if kind == "LOFO_GENERAL":
        if n % m:
            raise ValueError(f"LOFO_GENERAL needs m | n, but m={m} does not divide n={n}")
        return PartitionConfig(n, m, m)
    raise ValueError(f"unknown kind {kind!r}")


def _subset_masks(block_size: int, train: int) -> np.ndarray:
    subs = list(itertools.combinations(range(block_size), train))
    masks = np.zeros((len(subs), block_size), dtype=bool)
    for s, sub in enumerate(subs):
        masks[s, list(sub)] = True
    return masks


def mixture_information(means: np.ndarray, tau: float, points: int = 801) -> np.ndarray:
    """Mutual information between a uniform component index and an equal-weight Gaussian mixture.

    ``means`` has shape ``(draws, components)``; all components share the
    standard deviation ``tau``. Evaluated as the average KL divergence of
    each component from the mixture by Simpson quadrature on
    ``[min mean - 10 tau, max mean + 10 tau]``. Identical components give
    exactly zero.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    ncomp = means.shape[1]
    if tau == 0:
        out = np.empty(len(means))
        for d, row in enumerate(means):
            _, counts = np.unique(np.round(row, 14), return_counts=True)
            prob = counts / ncomp
            out[d] = -np.sum(prob * np.log(prob))
        return out
    for _ in range(5):
        lo = means.min(axis=1) - QUAD_HALF_WIDTH * tau
        hi = means.max(axis=1) + QUAD_HALF_WIDTH * tau
        grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, points)[None, :]
        log_comp = norm.logpdf(grid[:, None, :], means[:, :, None], tau)  # (D, C, Q)
        log_mix = logsumexp(log_comp, axis=1) - math.log(ncomp)  # (D, Q)
        mass = simpson(np.exp(log_mix), x=grid, axis=1)
        if np.all(np.abs(mass - 1) < QUAD_MASS_TOL):
            dens = np.exp(log_comp)
            integrand = (dens * (log_comp - log_mix[:, None, :])).mean(axis=1)
            return np.maximum(simpson(integrand, x=grid, axis=1), 0.0)
        points = 2 * points - 1
    raise RuntimeError("mixture quadrature did not converge; mass outside tolerance")


@dataclass
class _BlockDraws:
    """Per-draw mixture means and affine coefficients of the block error."""

    means: np.ndarray  # (D, C) component means of the hypothesis
    tau: float  # common component std
    slope: np.ndarray  # (D, C) block error = slope * w + offset for each membership
    offset: np.ndarray


def _block_draws(cfg: PartitionConfig, instance: GaussianInstance, z: np.ndarray) -> _BlockDraws:
    n, m, k = cfg.n, cfg.m, cfg.k
    t = cfg.train_per_block
    rest = n - t
    masks = _subset_masks(cfg.block_size, t).astype(float)
    train_sum = z @ masks.T
    test_sum = z.sum(axis=1, keepdims=True) - train_sum
    train_sq = (z**2) @ masks.T
    test_sq = (z**2).sum(axis=1, keepdims=True) - train_sq
    means = (train_sum + rest * instance.mu) / n
    tau = instance.sigma * math.sqrt(rest) / n
    # the w^2 terms cancel: (k/m)(m/k) = (k/n)(n/k) = 1
    slope = -2 * (k / m * test_sum - k / n * train_sum)
    offset = k / m * test_sq - k / n * train_sq
    return _BlockDraws(means, tau, slope, offset)


def _decoupled_cgf(blocks: _BlockDraws, lam: float) -> np.ndarray:
    """Exact ``log E exp(lam * eps)`` per draw with independent hypothesis and membership."""
    a = blocks.slope[:, :, None]
    c = blocks.offset[:, :, None]
    mv = blocks.means[:, None, :]
    expo = lam * c + lam * a * mv + 0.5 * lam**2 * a**2 * blocks.tau**2
    ncomp = blocks.means.shape[1]
    return logsumexp(expo.reshape(len(expo), -1), axis=1) - 2 * math.log(ncomp)


def decoupled_cgf_samples(
    instance: GaussianInstance,
    cfg: PartitionConfig,
    block_values: np.ndarray,
    inner_samples: int,
    seed: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Block errors with the hypothesis drawn from its conditional mixture and an independent membership."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = np.asarray(block_values, dtype=float)[None, :]
    blocks = _block_draws(cfg, instance, z)
    ncomp = blocks.means.shape[1]
    v = rng.integers(ncomp, size=inner_samples)
    w = blocks.means[0, v] + blocks.tau * rng.standard_normal(inner_samples)
    u = rng.integers(ncomp, size=inner_samples)
    return blocks.slope[0, u] * w + blocks.offset[0, u]


def decoupled_cgf_mc(
    instance: GaussianInstance,
    cfg: PartitionConfig,
    block_values: np.ndarray,
    lams: np.ndarray,
    inner_samples: int,
    seed: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Monte Carlo estimate of the decoupled CGF for one block value, at each lambda."""
    eps = decoupled_cgf_samples(instance, cfg, block_values, inner_samples, seed)
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    return logsumexp(lams[:, None] * eps[None, :], axis=1) - math.log(inner_samples)


def general_bound_mc(kind: GeneralKind, instance: GaussianInstance, mc: McConfig = McConfig()) -> BoundValue:
    """CGF-form bound for the sample mean under squared loss.

    ``ICIMI_GENERAL`` uses the paired setting (``m = k = n``) and
    ``LOFO_GENERAL`` the leave-one-fold-out setting with ``k = m``. Every
    block has the same law, so one block's estimate is the average over
    blocks. The standard error is the delta-method error at the optimal
    lambda.
    """
    if instance.loss != "quadratic":
        raise ValueError("general CGF bounds are for the squared loss")
    cfg = _general_cfg(kind, instance)
    rng = derive_rng(mc.seed, 0 if kind == "ICIMI_GENERAL" else 1)
    z = instance.mu + instance.sigma * rng.standard_normal((mc.outer_samples, cfg.block_size))
    blocks = _block_draws(cfg, instance, z)
    info = mixture_information(blocks.means, blocks.tau, mc.quadrature_points)
    info_mean = float(info.mean())

    # the loss scales with sigma^2, so the lambda range is taken in units of 1/sigma^2
    scale = instance.sigma**2
    lam_range = (mc.lambda_range[0] / scale, mc.lambda_range[1] / scale)
    opt = lambda_search(info_mean, lambda lam: float(_decoupled_cgf(blocks, lam).mean()), lam_range)
    per_draw = (info + _decoupled_cgf(blocks, opt.lam)) / opt.lam
    stderr = float(per_draw.std(ddof=1) / math.sqrt(len(per_draw))) if len(per_draw) > 1 else 0.0
    return BoundValue(
        BoundKind.GENERAL_CGF,
        max(opt.value, 0.0),
        1 / opt.lam,
        info_mean,
        stderr,
        (cfg.n, cfg.m, cfg.k, float("nan")),
        label=kind,
    )


# ---------------------------------------------------------------------------
# sign rule, truncated loss


def finite_w_correct_prob(n: int, mu: float, sigma: float) -> float:
    """Probability that the sign rule returns the true mean."""
    return float(ndtr(math.sqrt(n) * mu / sigma))


def finite_w_error_prob(n: int, mu: float, sigma: float) -> float:
    """Probability that the sign rule returns the wrong sign, accurate in the far tail."""
    return float(ndtr(-math.sqrt(n) * mu / sigma))


def _error_prob(known_sum: np.ndarray, rest: int, mu: float, sigma: float) -> np.ndarray:
    """``P(known_sum + S < 0)`` for ``S`` a sum of ``rest`` unconditioned points."""
    if rest == 0:
        return (known_sum < 0).astype(float)
    return ndtr(-(known_sum + rest * mu) / (sigma * math.sqrt(rest)))


@dataclass(frozen=True)
class _FiniteSetting:
    block: int  # conditioned points
    train: int  # training points among them
    rest: int  # unconditioned training points
    cfg: PartitionConfig | None


def _finite_setting(kind: FiniteKind, instance: GaussianInstance) -> _FiniteSetting:
    n, m = instance.n, instance.m
    if kind == "IMI":
        return _FiniteSetting(1, 1, n - 1, None)
    if kind == "ICIMI":
        return _FiniteSetting(2, 1, n - 1, PartitionConfig(n, n, n))
    if kind == "LOO_CMI":
        return _FiniteSetting(n + 1, n, 0, PartitionConfig(n, 1, 1))
    if kind == "LOFO_CMI":
        if n % m:
            raise ValueError(f"LOFO_CMI needs m | n, but m={m} does not divide n={n}")
        return _FiniteSetting(n // m + 1, n // m, n - n // m, PartitionConfig(n, m, m))
    raise ValueError(f"unknown kind {kind!r}")


def _finite_information(kind: FiniteKind, setting: _FiniteSetting, instance: GaussianInstance,
                        z: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Per-draw (conditional) information between the hypothesis and the membership."""
    mu, sigma = instance.mu, instance.sigma
    if kind == "IMI":
        q = _error_prob(z[:, 0], setting.rest, mu, sigma)
        prior = finite_w_error_prob(instance.n, mu, sigma)
        return np.asarray(d_kl_binary(q, np.full_like(q, prior)))
    q = _error_prob(z @ masks.T.astype(float), setting.rest, mu, sigma)
    qbar = np.broadcast_to(q.mean(axis=1, keepdims=True), q.shape)
    return np.asarray(d_kl_binary(q, qbar)).mean(axis=1)


def _sample_block(rng, masks, train_mean, train_var, setting, instance, size):
    """Draw block values: a random held-out pattern, the training sum from
    ``N(train_mean, train_var)``, training points given their sum from the
    exact conditional law, held-out points from the data law."""
    mu, sigma, t = instance.mu, instance.sigma, setting.train
    c = rng.integers(len(masks), size=size)
    train_mask = masks[c]
    s = rng.normal(train_mean, math.sqrt(train_var), size)
    xi = rng.standard_normal((size, setting.block))
    xi_train_mean = np.where(train_mask, xi, 0.0).sum(axis=1) / t
    z_train = s[:, None] / t + sigma * (xi - xi_train_mean[:, None])
    z_test = mu + sigma * xi
    z = np.where(train_mask, z_train, z_test)
    # proposal over data-law density ratio depends only on each pattern's training sum
    sums = z @ masks.T.astype(float)
    log_ratio = norm.logpdf(sums, train_mean, math.sqrt(train_var)) - norm.logpdf(
        sums, t * mu, sigma * math.sqrt(t)
    )
    log_w = -(logsumexp(log_ratio, axis=1) - math.log(len(masks)))
    return z, s, log_w


@dataclass(frozen=True)
class ImportanceEstimate:
    mean: float
    stderr: float
    train_mean: float
    train_var: float


def finite_w_information(kind: FiniteKind, instance: GaussianInstance, mc: McConfig = McConfig(),
                         pilot_rounds: int = 2, inflate: float = 2.0) -> ImportanceEstimate:
    """Importance-sampled expectation of the per-draw information.

    The proposal mixes over which block points are held out; the training
    sum is Gaussian with parameters fitted by weighted moment matching on
    pilot rounds (started at a zero training sum), its variance inflated
    by ``inflate``.
    """
    if not instance.mu > 0:
        raise ValueError("the sign rule needs mu > 0")
    setting = _finite_setting(kind, instance)
    masks = _subset_masks(setting.block, setting.train)
    order = ("IMI", "ICIMI", "LOO_CMI", "LOFO_CMI").index(kind)
    rng = derive_rng(mc.seed, 10 + order)
    t, sigma = setting.train, instance.sigma
    train_mean, train_var = 0.0, t * sigma**2
    for round_ in range(pilot_rounds + 1):
        z, s, log_w = _sample_block(rng, masks, train_mean, train_var, setting, instance, mc.outer_samples)
        vals = np.exp(log_w) * _finite_information(kind, setting, instance, z, masks)
        total = vals.sum()
        if round_ == pilot_rounds or not total > 0:
            break
        fit_mean = float(np.sum(vals * s) / total)
        fit_var = float(np.sum(vals * (s - fit_mean) ** 2) / total)
        if not fit_var > 0:
            break
        train_mean, train_var = fit_mean, inflate * fit_var
    n_draws = len(vals)
    stderr = float(vals.std(ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else 0.0
    return ImportanceEstimate(float(vals.mean()), stderr, train_mean, train_var)


def finite_w_bound(kind: FiniteKind, instance: GaussianInstance, mc: McConfig = McConfig()) -> BoundValue:
    """Bounded-loss bound for the sign rule with importance-sampled information."""
    if instance.loss != "truncated-quadratic":
        raise ValueError("the sign-rule bounds need the truncated loss")
    est = finite_w_information(kind, instance, mc)
    n = instance.n
    setting = _finite_setting(kind, instance)
    sizes = setting.cfg if setting.cfg is not None else PartitionConfig(n, 1, 1)
    bkind = BoundKind(kind)
    coef = coefficient(bkind, sizes)
    count = {"IMI": n, "ICIMI": n, "LOO_CMI": 1, "LOFO_CMI": sizes.m}[kind]
    info = max(est.mean, 0.0)
    value = coef * count * math.sqrt(info)
    stderr = coef * count * est.stderr / (2 * math.sqrt(info)) if info > 0 else 0.0
    m = sizes.m if kind != "IMI" else 0
    return BoundValue(bkind, value, coef, count * info, stderr, (n, m, sizes.k, 1.0), (info,) * count)
