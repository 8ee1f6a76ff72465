"""Exhaustive joint law of (hypothesis, supersample, membership) on tiny instances.

Data are Bernoulli(p) bits. Every supersample and every membership is
enumerated, so any (conditional, possibly disintegrated) mutual
information can be computed exactly from the table.

Query variables are strings:

* ``W``: hypothesis (integer key: training count for average-ERM, vote for majority-vote)
* ``Z``: whole supersample; ``Z<g>``: supersample point at global index ``g``
* ``B<i>``: values of block ``i``
* ``U``: whole membership; ``U<i>``: membership of block ``i``
* ``T<g>``: training indicator of global index ``g``
* ``L<g>``: loss at global index ``g``; ``LB<i>``: losses of block ``i``
* ``S<i>``: training values of block ``i`` in ascending position order
* ``ZT``: the whole training set (block-major order); ``ZT<t>``: its ``t``-th entry
"""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from .info_measures import InfoQuantity, d_js, d_js_inverse
from .supersample import PartitionConfig, block_subsets, divisor_set

Algorithm = Literal["average-ERM", "majority-vote"]
Loss = Literal["quadratic", "zero-one"]

MAX_SUPERSAMPLE = 14
MAX_ATOMS = 10**8


@dataclass(frozen=True)
class TinyInstance:
    cfg: PartitionConfig
    p: float
    algorithm: Algorithm = "average-ERM"
    loss: Loss = "quadratic"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.algorithm not in ("average-ERM", "majority-vote"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.loss not in ("quadratic", "zero-one"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.cfg.size > MAX_SUPERSAMPLE:
            raise ValueError(f"n+m={self.cfg.size} exceeds the oracle limit {MAX_SUPERSAMPLE}")
        if self.n_atoms > MAX_ATOMS:
            raise ValueError(f"enumeration size {self.n_atoms} exceeds {MAX_ATOMS}")

    @property
    def n_atoms(self) -> int:
        per_block = math.comb(self.cfg.block_size, self.cfg.train_per_block)
        return 2**self.cfg.size * per_block**self.cfg.k

    def hypothesis(self, train_count):
        """Hypothesis key from the number of ones in the training set."""
        n = self.cfg.n
        if self.algorithm == "average-ERM":
            return train_count
        return (2 * np.asarray(train_count) >= n).astype(np.int64)  # ties go to 1

    def hypothesis_value(self, key):
        key = np.asarray(key, dtype=float)
        return key / self.cfg.n if self.algorithm == "average-ERM" else key

    def loss_value(self, key, z):
        w = self.hypothesis_value(key)
        z = np.asarray(z, dtype=float)
        if self.loss == "quadratic":
            return (w - z) ** 2
        return (w != z).astype(float)

    def loss_key(self, key, z):
        """Exact integer key of the loss, used for information queries."""
        key = np.asarray(key, dtype=np.int64)
        z = np.asarray(z, dtype=np.int64)
        if self.loss == "zero-one":
            scale = self.cfg.n if self.algorithm == "average-ERM" else 1
            return (key != scale * z).astype(np.int64)
        scale = self.cfg.n if self.algorithm == "average-ERM" else 1
        return (key - scale * z) ** 2


@dataclass
class JointTable:
    """Enumerated atoms ``(w, z, u)`` with exact probabilities."""

    instance: TinyInstance
    z: np.ndarray  # (atoms, n+m) bits
    member: np.ndarray  # (atoms,) index into ``memberships``
    memberships: np.ndarray  # (M, k) block subset ids
    subsets: list[tuple[int, ...]]
    mask: np.ndarray  # (atoms, n+m) training indicators
    w: np.ndarray  # (atoms,) hypothesis keys
    prob: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def cfg(self) -> PartitionConfig:
        return self.instance.cfg

    @cached_property
    def loss_keys(self) -> np.ndarray:
        return self.instance.loss_key(self.w[:, None], self.z)

    @cached_property
    def losses(self) -> np.ndarray:
        return self.instance.loss_value(self.w[:, None], self.z)

    @cached_property
    def train_values(self) -> np.ndarray:
        """Training values in block-major ascending order, shape (atoms, n)."""
        order = np.argsort(~self.mask, axis=1, kind="stable")[:, : self.cfg.n]
        return np.take_along_axis(self.z, order, axis=1)

    def columns(self, name: str) -> np.ndarray:
        """Integer columns (atoms, width) encoding one query variable."""
        if name in self._cache:
            return self._cache[name]
        cfg = self.cfg
        b = cfg.block_size
        match = re.fullmatch(r"([A-Z]+)(\d*)", name)
        if not match:
            raise KeyError(f"undefined query variable {name!r}")
        head, idx = match.group(1), match.group(2)
        i = int(idx) if idx else None

        def need(limit: int) -> int:
            if i is None or not 0 <= i < limit:
                raise KeyError(f"undefined query variable {name!r}")
            return i

        if head == "W" and i is None:
            col = self.w[:, None]
        elif head == "Z" and i is None:
            col = self.z
        elif head == "Z":
            col = self.z[:, [need(cfg.size)]]
        elif head == "B":
            blk = need(cfg.k)
            col = self.z[:, blk * b : (blk + 1) * b]
        elif head == "U" and i is None:
            col = self.member[:, None]
        elif head == "U":
            col = self.memberships[self.member][:, [need(cfg.k)]]
        elif head == "T":
            col = self.mask[:, [need(cfg.size)]].astype(np.int64)
        elif head == "L":
            col = self.loss_keys[:, [need(cfg.size)]]
        elif head == "LB":
            blk = need(cfg.k)
            col = self.loss_keys[:, blk * b : (blk + 1) * b]
        elif head == "S":
            blk = need(cfg.k)
            t = cfg.train_per_block
            col = self.train_values[:, blk * t : (blk + 1) * t]
        elif head == "ZT" and i is None:
            col = self.train_values
        elif head == "ZT":
            col = self.train_values[:, [need(cfg.n)]]
        else:
            raise KeyError(f"undefined query variable {name!r}")
        col = np.asarray(col, dtype=np.int64)
        self._cache[name] = col
        return col

    def codes(self, names: Sequence[str]) -> np.ndarray:
        """Dense integer code per atom for the joint value of ``names``."""
        if not names:
            return np.zeros(len(self.prob), dtype=np.int64)
        cols = np.concatenate([self.columns(nm) for nm in names], axis=1)
        _, inv = np.unique(cols, axis=0, return_inverse=True)
        return inv.ravel()

    def marginal(self, names: Sequence[str]) -> dict[tuple, float]:
        """Exact marginal law of ``names`` as ``{value tuple: probability}``."""
        cols = np.concatenate([self.columns(nm) for nm in names], axis=1)
        uniq, inv = np.unique(cols, axis=0, return_inverse=True)
        mass = np.bincount(inv.ravel(), weights=self.prob, minlength=len(uniq))
        return {tuple(int(v) for v in row): float(pm) for row, pm in zip(uniq, mass)}


def enumerate_joint(instance: TinyInstance) -> JointTable:
    """Exhaustive table of the generative process."""
    cfg = instance.cfg
    size, b, k = cfg.size, cfg.block_size, cfg.k
    subsets = block_subsets(cfg)
    memberships = np.array(list(itertools.product(range(len(subsets)), repeat=k)), dtype=np.int64)
    n_members = len(memberships)

    block_masks = np.zeros((len(subsets), b), dtype=bool)
    for s, sub in enumerate(subsets):
        block_masks[s, list(sub)] = True
    member_masks = block_masks[memberships].reshape(n_members, size)

    # data atoms outermost so each likelihood is computed once
    z = ((np.arange(2**size)[:, None] >> np.arange(size)[None, ::-1]) & 1).astype(np.int64)
    ones = z.sum(axis=1)
    p = instance.p
    data_prob = np.array([p**o * (1 - p) ** (size - o) for o in ones])

    z_atoms = np.repeat(z, n_members, axis=0)
    member = np.tile(np.arange(n_members), len(z))
    mask = member_masks[member]
    prob = np.repeat(data_prob, n_members) / n_members
    train_count = (z_atoms * mask).sum(axis=1)
    w = np.asarray(instance.hypothesis(train_count), dtype=np.int64)
    return JointTable(instance, z_atoms, member, memberships, subsets, mask, w, prob)


def _as_names(v: str | Iterable[str]) -> list[str]:
    return [v] if isinstance(v, str) else list(v)


def _combine(*codes: np.ndarray) -> np.ndarray:
    _, inv = np.unique(np.stack(codes, axis=1), axis=0, return_inverse=True)
    return inv.ravel()


def _cmi(prob: np.ndarray, x: np.ndarray, y: np.ndarray, c: np.ndarray) -> float:
    keep = prob > 0
    prob, x, y, c = prob[keep], x[keep], y[keep], c[keep]
    if prob.size == 0:
        return 0.0

    def mass(key):
        return np.bincount(key, weights=prob)

    xyz, xz, yz, cz = _combine(x, y, c), _combine(x, c), _combine(y, c), _combine(c)
    p_xyz, p_xz, p_yz, p_z = mass(xyz), mass(xz), mass(yz), mass(cz)
    _, first = np.unique(xyz, return_index=True)
    terms = p_xyz * (
        np.log(p_xyz) + np.log(p_z[cz[first]]) - np.log(p_xz[xz[first]]) - np.log(p_yz[yz[first]])
    )
    return max(math.fsum(terms), 0.0)


def info_query(
    table: JointTable,
    a: str | Iterable[str],
    b: str | Iterable[str],
    given: str | Iterable[str] = (),
    at: dict[str, int | Sequence[int]] | None = None,
) -> InfoQuantity:
    """Exact ``I(a; b | given)``.

    When ``at`` fixes values of conditioning variables the result is the
    disintegrated information at that value, i.e. the mutual information
    under the conditional law given ``at``.
    """
    a, b, given = _as_names(a), _as_names(b), _as_names(given)
    prob = table.prob
    if at:
        sel = np.ones(len(prob), dtype=bool)
        for name, value in at.items():
            target = np.atleast_1d(np.asarray(value, dtype=np.int64))
            sel &= (table.columns(name) == target[None, :]).all(axis=1)
        total = prob[sel].sum()
        if total <= 0:
            raise ValueError(f"conditioning event {at} has zero probability")
        prob = np.where(sel, prob / total, 0.0)
    value = _cmi(prob, table.codes(a), table.codes(b), table.codes(given))
    label = f"I({','.join(a)};{','.join(b)}" + (f"|{','.join(given)}" if given else "") + ")"
    if at:
        label += "@" + ",".join(f"{k}={v}" for k, v in at.items())
    return InfoQuantity(kind=label, value=value, provenance="oracle")


def expected_cv_error(table: JointTable) -> float:
    """Exact expectation of the leave-m-out cross-validation error."""
    cfg = table.cfg
    test = np.where(table.mask, 0.0, table.losses).sum(axis=1) / cfg.m
    train = np.where(table.mask, table.losses, 0.0).sum(axis=1) / cfg.n
    return math.fsum(table.prob * (test - train))


def risks(table: JointTable) -> tuple[float, float]:
    """Exact expected empirical risk and population risk."""
    cfg = table.cfg
    train = np.where(table.mask, table.losses, 0.0).sum(axis=1) / cfg.n
    test = np.where(table.mask, 0.0, table.losses).sum(axis=1) / cfg.m
    return math.fsum(table.prob * train), math.fsum(table.prob * test)


def loss_difference_range(table: JointTable) -> float:
    """Largest ``|loss(w, z) - loss(w, z')|`` over attainable hypotheses."""
    keys = np.unique(table.w)
    inst = table.instance
    l0 = inst.loss_value(keys, 0)
    l1 = inst.loss_value(keys, 1)
    return float(np.max(np.abs(l0 - l1)))


def exact_cgf(
    table: JointTable, block: int, lam, per_hypothesis: bool = False
) -> dict[tuple[int, ...], np.ndarray]:
    """Exact CGF of the block cross-validation error.

    For every value of block ``block`` the membership average of
    ``exp(lam * eps)`` is computed exactly for each hypothesis and then
    averaged over the conditional law of the hypothesis given the block
    values. With ``per_hypothesis=True`` the hypothesis is not averaged out
    and the largest per-hypothesis value is returned instead. The block
    error is centred by construction since its membership average is 0.
    """
    cfg, inst = table.cfg, table.instance
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    b = cfg.block_size
    sub_masks = np.zeros((len(table.subsets), b), dtype=bool)
    for s, sub in enumerate(table.subsets):
        sub_masks[s, list(sub)] = True

    block_cols = table.columns(f"B{block}")
    law = {}
    for row, w, pm in zip(map(tuple, block_cols), table.w, table.prob):
        if pm > 0:
            law.setdefault(row, {}).setdefault(int(w), 0.0)
            law[row][int(w)] += pm

    out: dict[tuple[int, ...], np.ndarray] = {}
    for zb, w_law in law.items():
        keys = np.array(sorted(w_law))
        weights = np.array([w_law[w] for w in keys])
        weights = weights / weights.sum()
        loss = inst.loss_value(keys[:, None], np.array(zb)[None, :])  # (W, b)
        train = loss @ sub_masks.T.astype(float)  # (W, subsets)
        test = loss.sum(axis=1, keepdims=True) - train
        eps = cfg.k / cfg.m * test - cfg.k / cfg.n * train
        # log E_U exp(lam eps) per hypothesis, shape (W, lam)
        expo = lam[None, None, :] * eps[:, :, None]
        per_w = _logmeanexp(expo, axis=1)
        if per_hypothesis:
            out[zb] = per_w.max(axis=0)
        else:
            out[zb] = logsumexp(per_w + np.log(weights)[:, None], axis=0)
    return out


def _logmeanexp(x: np.ndarray, axis: int) -> np.ndarray:
    return logsumexp(x, axis=axis) - np.log(x.shape[axis])


# ---------------------------------------------------------------------------
# exact-equality checks for the zero-one loss


class IdentityViolation(AssertionError):
    """Raised when an exact identity fails on an oracle instance."""


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: float
    rhs: float
    tol: float

    @property
    def deviation(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


@dataclass(frozen=True)
class Theorem12Report:
    instance: TinyInstance
    emp_risk: float
    pop_risk: float
    js_value: float
    info_average: float
    checks: tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]


def _scmi_values(table: JointTable) -> dict[tuple[int, int], float]:
    """Disintegrated ``I(W; U_i | Z_g = z)`` for every global index and value."""
    cfg = table.cfg
    vals = {}
    for g in range(cfg.size):
        block = g // cfg.block_size
        for z in (0, 1):
            if table.prob[table.z[:, g] == z].sum() > 0:
                vals[(g, z)] = info_query(table, "W", f"U{block}", at={f"Z{g}": z}).value
    return vals


def theorem12_check(instance: TinyInstance, tol: float = 1e-9, strict: bool = True) -> Theorem12Report:
    """Exact checks of the zero-one-loss equality and its companions.

    * the weighted JS divergence between empirical and population risk
      equals the average of ``I(L_g; U_block(g))``;
    * ``I(W; T_g | Z_g) = I(W; U_block(g) | Z_g)`` for every index;
    * disintegrated ``I(W; U | Z_g = z)`` does not depend on ``k`` or ``g``.
    """
    if instance.loss != "zero-one":
        raise ValueError("the exact JS equality needs the zero-one loss")
    cfg = instance.cfg
    table = enumerate_joint(instance)
    emp, pop = risks(table)
    theta = cfg.n / cfg.size
    js = float(d_js(theta, emp, pop))
    terms = [
        info_query(table, f"L{g}", f"U{g // cfg.block_size}").value for g in range(cfg.size)
    ]
    avg = math.fsum(terms) / cfg.size
    where = f"n={cfg.n}, m={cfg.m}, k={cfg.k}, p={instance.p}, {instance.algorithm}"
    checks = [IdentityCheck(f"JS equality [{where}]", js, avg, tol)]

    for g in range(cfg.size):
        blk = g // cfg.block_size
        lhs = info_query(table, "W", f"T{g}", given=f"Z{g}").value
        rhs = info_query(table, "W", f"U{blk}", given=f"Z{g}").value
        checks.append(IdentityCheck(f"processed = unprocessed at index {g} [{where}]", lhs, rhs, tol))

    reference = _scmi_values(table)
    for kk in divisor_set(cfg.n, cfg.m):
        other_table = (
            table
            if kk == cfg.k
            else enumerate_joint(
                TinyInstance(PartitionConfig(cfg.n, cfg.m, kk), instance.p, instance.algorithm, instance.loss)
            )
        )
        other = _scmi_values(other_table)
        for (g, z), val in other.items():
            ref = reference[(0, z)]
            checks.append(
                IdentityCheck(f"k-invariance k={kk}, index {g}, z={z} [{where}]", val, ref, tol)
            )

    report = Theorem12Report(instance, emp, pop, js, avg, tuple(checks))
    if strict and not report.passed:
        bad = report.failures()[0]
        raise IdentityViolation(f"{bad.name}: |{bad.lhs} - {bad.rhs}| = {bad.deviation:.3e} > {tol}")
    return report


def dual_representation_check(n: int, p: float, algorithm: Algorithm = "majority-vote") -> IdentityCheck:
    """Compare the inverse-JS risk bounds from the leave-one-out and paired settings.

    Both use the exact equality, so when the empirical risk does not exceed
    the population risk each inversion returns the population risk.
    """
    loo = enumerate_joint(TinyInstance(PartitionConfig(n, 1, 1), p, algorithm, "zero-one"))
    paired = enumerate_joint(TinyInstance(PartitionConfig(n, n, n), p, algorithm, "zero-one"))
    emp, _ = risks(loo)
    c_loo = info_query(loo, "L0", "U").value
    c_pair = info_query(paired, "L0", "U0").value
    lhs = d_js_inverse(n / (n + 1), emp, c_loo)
    rhs = d_js_inverse(0.5, emp, c_pair)
    return IdentityCheck(f"dual representation n={n}, p={p}", lhs, rhs, 1e-9)
