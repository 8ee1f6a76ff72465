"""Partitioned leave-m-out supersample combinatorics.

A supersample of ``n + m`` points is split into ``k`` equal blocks laid out
in ascending order: block ``i`` (0-based) holds global indices
``i*b, ..., i*b + b - 1`` with ``b = (n + m) / k``. In every block a uniformly
random subset of ``n / k`` positions is used for training and the rest are
held out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SeedLike = int | np.random.Generator | None


def divisor_set(n: int, m: int) -> list[int]:
    """Ascending list of all block counts ``k`` dividing both ``n`` and ``m``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    g = math.gcd(n, m)
    return [d for d in range(1, g + 1) if g % d == 0]


@dataclass(frozen=True)
class PartitionConfig:
    """Geometry ``(n, m, k)`` of a leave-m-out supersample."""

    n: int
    m: int
    k: int

    def __post_init__(self) -> None:
        for name in ("n", "m", "k"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val!r}")
        if self.n % self.k:
            raise ValueError(f"k={self.k} does not divide n={self.n}")
        if self.m % self.k:
            raise ValueError(f"k={self.k} does not divide m={self.m}")

    @property
    def block_size(self) -> int:
        return (self.n + self.m) // self.k

    @property
    def train_per_block(self) -> int:
        return self.n // self.k

    @property
    def test_per_block(self) -> int:
        return self.m // self.k

    @property
    def size(self) -> int:
        return self.n + self.m

    def global_index(self, block: int, pos: int) -> int:
        """Global supersample index of position ``pos`` inside ``block``."""
        if not (0 <= block < self.k and 0 <= pos < self.block_size):
            raise IndexError(f"(block={block}, pos={pos}) outside {self}")
        return self.block_size * block + pos


@dataclass(frozen=True)
class MembershipDraw:
    """Sorted training positions for each block."""

    cfg: PartitionConfig
    subsets: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.subsets) != self.cfg.k:
            raise ValueError(f"expected {self.cfg.k} blocks, got {len(self.subsets)}")
        b, t = self.cfg.block_size, self.cfg.train_per_block
        for sub in self.subsets:
            if len(sub) != t or len(set(sub)) != t or list(sub) != sorted(sub):
                raise ValueError(f"block subset {sub} must be {t} sorted distinct positions")
            if sub and (sub[0] < 0 or sub[-1] >= b):
                raise ValueError(f"block subset {sub} out of range [0, {b})")

    @cached_property
    def indicators(self) -> np.ndarray:
        """Training indicators, shape ``(k, block_size)``."""
        mask = np.zeros((self.cfg.k, self.cfg.block_size), dtype=bool)
        for i, sub in enumerate(self.subsets):
            mask[i, list(sub)] = True
        return mask

    def train_indices(self) -> list[int]:
        """Global indices of training points, block-major and ascending."""
        return [self.cfg.global_index(i, j) for i, sub in enumerate(self.subsets) for j in sub]

    def test_indices(self) -> list[int]:
        flat = self.indicators.ravel()
        return [int(g) for g in np.flatnonzero(~flat)]


def derive_rng(seed: int, task_index: int = 0) -> np.random.Generator:
    """Independent generator for ``task_index`` under a 64-bit base seed."""
    seq = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(task_index),))
    return np.random.default_rng(seq)


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_indicators(cfg: PartitionConfig, size: int, seed: SeedLike = None) -> np.ndarray:
    """Draw ``size`` independent memberships as boolean indicators.

    Uses a partial Fisher-Yates shuffle vectorised over draws and blocks:
    only the first ``n/k`` swap steps are performed. Returns an array of
    shape ``(size, k, block_size)``.
    """
    rng = _rng(seed)
    b, t = cfg.block_size, cfg.train_per_block
    perm = np.broadcast_to(np.arange(b), (size, cfg.k, b)).copy()
    rows = np.arange(size)[:, None]
    blocks = np.arange(cfg.k)[None, :]
    for step in range(t):
        pick = step + rng.integers(0, b - step, size=(size, cfg.k))
        chosen = perm[rows, blocks, pick]
        perm[rows, blocks, pick] = perm[:, :, step]
        perm[:, :, step] = chosen
    mask = np.zeros((size, cfg.k, b), dtype=bool)
    np.put_along_axis(mask, perm[:, :, :t], True, axis=2)
    return mask


def sample_membership(cfg: PartitionConfig, seed: SeedLike = None) -> MembershipDraw:
    """One uniformly random membership, independent across blocks."""
    mask = sample_indicators(cfg, 1, seed)[0]
    subsets = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in mask)
    return MembershipDraw(cfg, subsets)


def training_prob(cfg: PartitionConfig) -> tuple[float, float]:
    """``(P(T=1), P(T=0)) = (n/(n+m), m/(n+m))`` for any supersample index."""
    return cfg.n / cfg.size, cfg.m / cfg.size


def block_subsets(cfg: PartitionConfig) -> list[tuple[int, ...]]:
    """All possible training subsets of one block, in lexicographic order."""
    return list(itertools.combinations(range(cfg.block_size), cfg.train_per_block))


def enumerate_memberships(cfg: PartitionConfig):
    """Iterate over every membership draw (each has equal probability)."""
    for combo in itertools.product(block_subsets(cfg), repeat=cfg.k):
        yield MembershipDraw(cfg, combo)


@dataclass(frozen=True)
class CvError:
    total: np.ndarray | float
    per_block: np.ndarray


def cv_error(losses, draw: MembershipDraw | np.ndarray, cfg: PartitionConfig) -> CvError:
    """Leave-m-out cross-validation error of a loss table.

    ``losses`` has shape ``(..., k, block_size)`` and ``draw`` is either a
    :class:`MembershipDraw` or a boolean indicator array broadcastable to
    the same shape. Block errors are ``(k/m) * test sum - (k/n) * train sum``
    and the total is their average.
    """
    losses = np.asarray(losses, dtype=float)
    mask = draw.indicators if isinstance(draw, MembershipDraw) else np.asarray(draw, dtype=bool)
    shape = (cfg.k, cfg.block_size)
    if losses.shape[-2:] != shape or mask.shape[-2:] != shape:
        raise ValueError(
            f"loss table {losses.shape} and membership {mask.shape} must end in {shape}"
        )
    if not np.isfinite(losses).all():
        raise ValueError("loss table contains non-finite entries")
    train = np.where(mask, losses, 0.0).sum(axis=-1)
    test = np.where(mask, 0.0, losses).sum(axis=-1)
    per_block = cfg.k / cfg.m * test - cfg.k / cfg.n * train
    total = per_block.mean(axis=-1)
    return CvError(float(total) if np.ndim(total) == 0 else total, per_block)


def block_average_over_memberships(values, cfg: PartitionConfig, fn) -> float:
    """Exact average of ``fn(values, indicator_row)`` over all subsets of one block."""
    values = np.asarray(values, dtype=float)
    acc = [fn(values, np.isin(np.arange(cfg.block_size), sub)) for sub in block_subsets(cfg)]
    return math.fsum(acc) / len(acc)
