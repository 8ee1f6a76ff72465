"""Self-checks run by ``cmibounds verify``.

Each check returns a :class:`Check` recording the measured deviation and
the tolerance it was held to. ``fast`` covers exact identities and cheap
numerical relations; ``full`` adds the Monte Carlo comparisons.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from . import bernoulli_exact as bx
from . import gaussian_mc as gm
from .bound_catalog import BoundKind, assemble, coefficient_C, term_count
from .info_measures import (
    binary_entropy,
    d_gamma_supremum,
    d_js,
    d_js_inverse,
    d_kl_binary,
    js_quadratic_floor,
)
from .oracle import (
    TinyInstance,
    dual_representation_check,
    enumerate_joint,
    exact_cgf,
    expected_cv_error,
    info_query,
    loss_difference_range,
    theorem12_check,
)
from .supersample import (
    PartitionConfig,
    cv_error,
    derive_rng,
    divisor_set,
    enumerate_memberships,
    sample_indicators,
)


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name}: measured {self.measured:.6g}, tolerance {self.tolerance:.6g}"
        if self.detail:
            text += f" ({self.detail})"
        return text


def _at_most(name: str, measured: float, tol: float, detail: str = "") -> Check:
    return Check(name, measured, tol, bool(measured <= tol), detail)


def _guarded(name: str, fn: Callable[[], Check | list[Check]]) -> list[Check]:
    start = time.perf_counter()
    try:
        out = fn()
    except Exception as exc:  # a crash is a failed check, reported by name
        return [Check(name, math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")]
    out = out if isinstance(out, list) else [out]
    spent = time.perf_counter() - start
    return [Check(c.name, c.measured, c.tolerance, c.passed, c.detail, spent) for c in out]


# ---------------------------------------------------------------------------
# exact checks


def closed_form_pairs(n: int, m: int, k: int, p: float) -> dict[str, tuple[float, float]]:
    """(oracle, closed form) per information kind valid at ``(n, m, k)``."""
    table = enumerate_joint(TinyInstance(PartitionConfig(n, m, k), p))
    inst = bx.BernoulliInstance(n, m, k, p)

    def single(kind: str) -> float:
        return bx.info_quantity(kind, inst).per_term[0]

    pairs = {
        "MI_FULL": (info_query(table, "W", "ZT").value, single("MI_FULL")),
        "IMI": (info_query(table, "W", "ZT0").value, single("IMI")),
        "IPMI_BLOCK": (info_query(table, "W", "S0").value, single("IPMI_BLOCK")),
    }
    block_cmi = info_query(table, "W", "U0", given="B0").value
    if m == 1 and k == 1:
        pairs["LOO_CMI"] = (block_cmi, single("LOO_CMI"))
    if m == n and k == n:
        pairs["ICIMI"] = (block_cmi, single("ICIMI"))
    if k == 1:
        pairs["LMO_CMI"] = (block_cmi, single("LMO_CMI"))
    if k == m and n % m == 0:
        pairs["LOFO_CMI"] = (block_cmi, single("LOFO_CMI"))
    if k == n and m % n == 0:
        pairs["MN_IPCIMI"] = (block_cmi, single("MN_IPCIMI"))
    point_cmi = info_query(table, "W", "U0", given="Z0").value
    if m == n:
        pairs["SICIMI"] = (point_cmi, single("SICIMI"))
    if m == 1:
        pairs["LOO_SCMI"] = (point_cmi, single("LOO_SCMI"))
    pairs["LMO_SCMI"] = (point_cmi, single("LMO_SCMI"))
    pairs["LMO_SCMI via conditional laws"] = (point_cmi, bx.integrated_from_tables("LMO_SCMI", inst).per_term[0])
    return pairs


def check_closed_forms(sizes=(1, 2, 3), probs=(0.2, 0.5, 0.8), tol: float = 1e-9) -> list[Check]:
    worst: dict[str, tuple[float, str]] = {}
    for n in sizes:
        for m in sizes:
            for k in divisor_set(n, m):
                for p in probs:
                    for kind, (a, b) in closed_form_pairs(n, m, k, p).items():
                        dev = abs(a - b)
                        if dev >= worst.get(kind, (-1.0, ""))[0]:
                            worst[kind] = (dev, f"worst at n={n}, m={m}, k={k}, p={p}")
    return [_at_most(f"closed form {kind} matches enumeration", dev, tol, where) for kind, (dev, where) in sorted(worst.items())]


# (bound, n, m, k) settings with exact enumeration available
_TINY_BOUNDS = (
    ("MI", 2, 2, 1, "ZT", None),
    ("IMI", 2, 2, 2, "ZT0", None),
    ("IPMI", 2, 2, 2, "S0", None),
    ("ICIMI", 2, 2, 2, "U0", "B0"),
    ("LOO_CMI", 3, 1, 1, "U0", "B0"),
    ("IPCIMI_BOUNDED", 2, 4, 2, "U0", "B0"),
    ("LMO_CMI", 2, 3, 1, "U0", "B0"),
    ("LOFO_CMI", 2, 2, 2, "U0", "B0"),
    ("MN_IPCIMI", 2, 4, 2, "U0", "B0"),
    ("SIPCIMI", 2, 3, 1, "U0", "Z0"),
    ("SICIMI", 2, 2, 2, "U0", "Z0"),
    ("LOO_SCMI", 3, 1, 1, "U0", "Z0"),
    ("LMO_SCMI", 2, 3, 1, "U0", "Z0"),
    ("CMI_STD", 2, 2, 2, "U", "Z"),
)


def check_bound_validity(p: float = 0.3) -> list[Check]:
    """Every bound built from exact oracle information exceeds the exact expected gap."""
    out = []
    for name, n, m, k, target, given in _TINY_BOUNDS:
        def run(name=name, n=n, m=m, k=k, target=target, given=given) -> Check:
            table = enumerate_joint(TinyInstance(PartitionConfig(n, m, k), p))
            gap = expected_cv_error(table)
            q = info_query(table, "W", target, given=given or ())
            kind = BoundKind(name)
            count = term_count(kind, PartitionConfig(n, m, k))
            quantity = type(q)(q.kind, q.value * count, (q.value,) * count, "oracle")
            delta = loss_difference_range(table)
            bound = assemble(kind, quantity, PartitionConfig(n, m, k), delta=max(delta, 1e-12))
            return _at_most(f"bound {name} is valid", gap - bound.value, 1e-12,
                            f"gap {gap:.6g}, bound {bound.value:.6g}")
        out += _guarded(f"bound {name} is valid", run)
    return out


def check_block_centering(tol: float = 1e-12) -> Check:
    """For each hypothesis and supersample the membership average of the block error is 0."""
    worst = 0.0
    rng = np.random.default_rng(0)
    for n, m, k in ((2, 2, 2), (3, 3, 1), (4, 2, 2), (2, 4, 2)):
        cfg = PartitionConfig(n, m, k)
        losses = rng.random((k, cfg.block_size))
        masks = np.stack([draw.indicators for draw in enumerate_memberships(cfg)])
        worst = max(worst, abs(float(cv_error(losses[None], masks, cfg).total.mean())))
    return _at_most("membership average of the block error is zero", worst, tol)


def check_cgf_bound(instances: int = 10, seed: int = 0) -> Check:
    """Exact enumerated CGF never exceeds the bounded-difference bound on a lambda grid."""
    rng = np.random.default_rng(seed)
    configs = [(n, m, k) for n in (1, 2, 3, 4) for m in (1, 2, 3, 4) for k in divisor_set(n, m) if n + m <= 8]
    lams = np.linspace(-5, 5, 41)
    worst, where = -math.inf, ""
    for _ in range(instances):
        n, m, k = configs[rng.integers(len(configs))]
        cfg = PartitionConfig(n, m, k)
        p = float(rng.uniform(0.05, 0.95))
        algo = ("average-ERM", "majority-vote")[rng.integers(2)]
        table = enumerate_joint(TinyInstance(cfg, p, algo))
        delta = loss_difference_range(table)
        cap = lams**2 * delta**2 * coefficient_C(cfg) * k * (n + m) / (8 * n * m)
        for values in exact_cgf(table, 0, lams, per_hypothesis=True).values():
            excess = float(np.max(values - cap))
            if excess > worst:
                worst, where = excess, f"n={n}, m={m}, k={k}, p={p:.3f}, {algo}"
    return _at_most("block CGF stays under the bounded-difference bound", worst, 1e-12, where)


def check_zero_one_identities(sizes=(1, 2, 3), probs=(0.0, 0.3, 0.5, 0.8), tol: float = 1e-9) -> list[Check]:
    worst = 0.0
    where = ""
    count = 0
    for n in sizes:
        for m in sizes:
            for k in divisor_set(n, m):
                for p in probs:
                    report = theorem12_check(TinyInstance(PartitionConfig(n, m, k), p, "majority-vote", "zero-one"), tol, strict=False)
                    for c in report.checks:
                        count += 1
                        if c.deviation > worst:
                            worst, where = c.deviation, c.name
    out = [_at_most(f"zero-one JS equality, processed = unprocessed, k-invariance ({count} identities)", worst, tol, where)]
    dual = max(dual_representation_check(n, p).deviation for n in (1, 2, 3, 4) for p in (0.2, 0.5))
    out.append(_at_most("leave-one-out and paired inversions agree", dual, tol))
    return out


def check_divergences(samples: int = 10_000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    sup_dev = max(
        abs(d_gamma_supremum(p, q) - float(d_kl_binary(q, p)))
        for p, q in [(0.5, 0.25), (0.3, 0.7), (0.1, 0.02), (0.9, 0.6), (0.45, 0.5)]
    )
    theta, p, q = rng.uniform(0.01, 0.99, (3, samples))
    floor_gap = float(np.max(js_quadratic_floor(theta, p, q) - d_js(theta, p, q)))
    round_trip = 0.0
    for t, a, b in zip(theta[:200], np.minimum(p, q)[:200], np.maximum(p, q)[:200]):
        c = float(d_js(t, a, b))
        if c > 0:
            round_trip = max(round_trip, abs(d_js_inverse(t, a, c) - b))
    return [
        _at_most("supremum of the gamma divergence equals binary KL", sup_dev, 1e-4),
        _at_most("JS quadratic floor", floor_gap, 1e-12),
        _at_most("JS inverse round trip", round_trip, 1e-9),
    ]


# ---------------------------------------------------------------------------
# Bernoulli relations


def check_loo_limit(p: float = 0.4) -> Check:
    target = math.sqrt(float(binary_entropy(p)) / 2)
    dev = max(abs(bx.bernoulli_bound("LOO_CMI", n, p=p).value - target) for n in (1000, 2000))
    return _at_most("leave-one-out CMI bound approaches sqrt(H(p)/2)", dev, 0.02)


def decay_slope(kind: str, p: float = 0.4, grid=(10, 20, 50, 100, 200, 500, 1000)) -> float:
    vals = [bx.bernoulli_bound(kind, n, p=p).value for n in grid]
    return float(np.polyfit(np.log(grid), np.log(vals), 1)[0])


def check_decay() -> list[Check]:
    out = []
    for kind in ("IMI", "ICIMI"):
        slope = decay_slope(kind)
        out.append(_at_most(f"{kind} decays like n^-1/2", abs(slope + 0.5), 0.05, f"slope {slope:.4f}"))
    return out


def check_fig4(n: int = 10, p: float = 0.4) -> list[Check]:
    grid = (100, 1000, 10_000)
    lmo = [bx.bernoulli_bound("LMO_CMI", n, m, p=p).value for m in grid]
    mn = [bx.bernoulli_bound("MN_IPCIMI", n, m, p=p).value for m in grid]
    mi = bx.bernoulli_bound("MI", n, p=p).value
    imi = bx.bernoulli_bound("IMI", n, p=p).value
    rise = max(max(np.diff(lmo)), max(np.diff(mn)))
    return [
        _at_most("LMO_CMI approaches the MI bound", abs(lmo[-1] - mi), 0.02),
        _at_most("MN_IPCIMI approaches the IMI bound", abs(mn[-1] - imi), 0.02),
        _at_most("LMO_CMI and MN_IPCIMI non-increasing in m", float(rise), 0.0),
    ]


def check_fig7(n: int = 10, p: float = 0.25) -> list[Check]:
    grid = (100, 1000, 10_000)
    lmo = [bx.bernoulli_bound("LMO_SCMI", n, m, p=p, disintegrated=True).value for m in grid]
    sicimi = bx.bernoulli_bound("SICIMI", n, p=p, disintegrated=True).value
    return [
        _at_most("disintegrated LMO_SCMI non-increasing in m", float(max(np.diff(lmo))), 0.0),
        _at_most("disintegrated LMO_SCMI below SICIMI at the largest m", lmo[-1] - sicimi, 0.0,
                 f"{lmo[-1]:.6g} vs {sicimi:.6g}"),
    ]


def check_gaussian_imi() -> Check:
    dev = max(
        abs(gm.gaussian_imi_general(n, 1.0) / gm.gaussian_imi_closed(n, 1.0).value - 1) for n in (2, 10, 100)
    )
    return _at_most("lambda-optimised Gaussian IMI matches the closed form", dev, 1e-3)


# ---------------------------------------------------------------------------
# Monte Carlo relations


def mc_gen_error_bernoulli(n: int, p: float, draws: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of the cross-validation error (paired setting)."""
    cfg = PartitionConfig(n, n, n)
    rng = derive_rng(seed, 100)
    z = (rng.random((draws, cfg.k, cfg.block_size)) < p).astype(float)
    mask = sample_indicators(cfg, draws, rng)
    w = np.where(mask, z, 0.0).sum(axis=(1, 2)) / n
    err = cv_error((w[:, None, None] - z) ** 2, mask, cfg).total
    return float(err.mean()), float(err.std(ddof=1) / math.sqrt(draws))


def mc_gen_error_gaussian(n: int, sigma: float, draws: int, seed: int, mu: float = 0.0) -> tuple[float, float]:
    cfg = PartitionConfig(n, n, n)
    rng = derive_rng(seed, 101)
    z = mu + sigma * rng.standard_normal((draws, cfg.k, cfg.block_size))
    mask = sample_indicators(cfg, draws, rng)
    w = np.where(mask, z, 0.0).sum(axis=(1, 2)) / n
    err = cv_error((w[:, None, None] - z) ** 2, mask, cfg).total
    return float(err.mean()), float(err.std(ddof=1) / math.sqrt(draws))


def check_gen_error(draws: int = 100_000, seed: int = 0) -> list[Check]:
    mean_b, se_b = mc_gen_error_bernoulli(10, 0.4, draws, seed)
    mean_g, se_g = mc_gen_error_gaussian(10, 1.0, draws, seed)
    exact_b, exact_g = bx.true_gen_error(10, 0.4), gm.true_gen_error(10, 1.0)
    return [
        _at_most("simulated Bernoulli gap matches 2p(1-p)/n (in standard errors)", abs(mean_b - exact_b) / se_b, 3.0),
        _at_most("simulated Gaussian gap matches 2 sigma^2/n (in standard errors)", abs(mean_g - exact_g) / se_g, 3.0),
    ]


def _margin(name: str, small, large) -> Check:
    """Pass when ``large - small`` exceeds two combined standard errors."""
    se = math.hypot(small.stderr, large.stderr)
    z = (large.value - small.value) / se if se > 0 else math.copysign(math.inf, large.value - small.value)
    return Check(name, z, 2.0, bool(z > 2.0),
                 f"{small.value:.6g} (se {small.stderr:.2g}) vs {large.value:.6g} (se {large.stderr:.2g}); margin in se")


def check_fig5(mc: gm.McConfig, grid=(10, 20, 40)) -> list[Check]:
    out = []
    for n in grid:
        inst = gm.GaussianInstance(n, n // 2)
        lofo = gm.general_bound_mc("LOFO_GENERAL", inst, mc)
        icimi = gm.general_bound_mc("ICIMI_GENERAL", inst, mc)
        imi = gm.gaussian_imi_closed(n, 1.0)
        out.append(_margin(f"LOFO_GENERAL below ICIMI_GENERAL at n={n}", lofo, icimi))
        out.append(_margin(f"LOFO_GENERAL below closed-form IMI at n={n}", lofo, imi))
    return out


def check_fig6(mc: gm.McConfig, grid=(10, 20, 40)) -> list[Check]:
    out = []
    for n in grid:
        inst = gm.GaussianInstance(n, 2, 1.0, 0.5, "truncated-quadratic")
        lofo = gm.finite_w_bound("LOFO_CMI", inst, mc)
        for other in ("IMI", "ICIMI", "LOO_CMI"):
            out.append(_margin(f"sign-rule LOFO_CMI below {other} at n={n}", lofo, gm.finite_w_bound(other, inst, mc)))
    return out


def check_cgf_closed_form(mc: gm.McConfig, draws: int = 4, lams=(0.25, 0.5, 1.0)) -> list[Check]:
    """Closed-form decoupled CGF against inner Monte Carlo, in standard errors."""
    out = []
    rng = derive_rng(mc.seed, 102)
    for kind, inst in (("ICIMI_GENERAL", gm.GaussianInstance(10, 10)), ("LOFO_GENERAL", gm.GaussianInstance(10, 5))):
        cfg = gm._general_cfg(kind, inst)
        worst = 0.0
        for _ in range(draws):
            z = rng.standard_normal(cfg.block_size)
            blocks = gm._block_draws(cfg, inst, z[None, :])
            eps = gm.decoupled_cgf_samples(inst, cfg, z, mc.inner_samples, rng)
            for lam in lams:
                exact = float(gm._decoupled_cgf(blocks, lam)[0])
                terms = np.exp(lam * eps)
                est = math.log(terms.mean())
                se = terms.std(ddof=1) / (terms.mean() * math.sqrt(len(terms)))
                worst = max(worst, abs(est - exact) / se)
        out.append(_at_most(f"closed-form decoupled CGF matches inner Monte Carlo ({kind}, in standard errors)", worst, 4.0))
    return out


def run_checks(level: str = "fast", mc: gm.McConfig | None = None) -> list[Check]:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    mc = mc or gm.McConfig()
    suites: list[tuple[str, Callable[[], Check | list[Check]]]] = [
        ("closed forms", check_closed_forms),
        ("block centering", check_block_centering),
        ("CGF bound", check_cgf_bound),
        ("zero-one identities", check_zero_one_identities),
        ("divergences", check_divergences),
        ("leave-one-out limit", check_loo_limit),
        ("decay", check_decay),
        ("fig4 relations", check_fig4),
        ("fig7 relations", check_fig7),
        ("Gaussian IMI", check_gaussian_imi),
    ]
    results = check_bound_validity()
    if level == "full":
        suites += [
            ("generalisation error", lambda: check_gen_error(seed=mc.seed)),
            ("decoupled CGF", lambda: check_cgf_closed_form(mc)),
            ("fig5 relations", lambda: check_fig5(mc)),
            ("fig6 relations", lambda: check_fig6(mc)),
        ]
    for name, fn in suites:
        results += _guarded(name, fn)
    return results


def report(checks: Iterable[Check]) -> str:
    checks = list(checks)
    failed = sum(not c.passed for c in checks)
    lines = [c.line() for c in checks]
    lines.append(f"{len(checks) - failed} passed, {failed} failed")
    return "\n".join(lines)
