
import numpy as np
import pytest

from cmibounds.supersample import (
    MembershipDraw,
    PartitionConfig,
    block_average_over_memberships,
    cv_error,
    derive_rng,
    divisor_set,
    enumerate_memberships,
    sample_indicators,
    sample_membership,
    training_prob,
)


@pytest.mark.parametrize("n,m,expected", [(6, 4, [1, 2]), (5, 1, [1]), (12, 12, [1, 2, 3, 4, 6, 12])])
def test_divisor_set(n, m, expected):
    assert divisor_set(n, m) == expected


class TestPartitionConfig:
    def test_geometry(self):
        cfg = PartitionConfig(6, 4, 2)
        assert (cfg.block_size, cfg.train_per_block, cfg.test_per_block) == (5, 3, 2)

    def test_global_index_is_block_major(self):
        cfg = PartitionConfig(4, 2, 2)
        assert [cfg.global_index(i, j) for i in range(2) for j in range(3)] == list(range(6))

    @pytest.mark.parametrize("args", [(4, 3, 2), (3, 4, 2), (0, 1, 1), (2, 2, 0)])
    def test_rejects_bad_sizes(self, args):
        with pytest.raises(ValueError):
            PartitionConfig(*args)

    def test_global_index_range(self):
        with pytest.raises(IndexError):
            PartitionConfig(2, 2, 2).global_index(2, 0)


class TestSampling:
    def test_two_point_uniform(self):
        cfg = PartitionConfig(1, 1, 1)
        mask = sample_indicators(cfg, 100_000, 1)
        assert abs(mask[:, 0, 0].mean() - 0.5) < 0.01

    def test_three_subsets_uniform(self):
        cfg = PartitionConfig(2, 1, 1)
        mask = sample_indicators(cfg, 100_000, 2)[:, 0, :]
        held_out = np.argmin(mask, axis=1)
        freq = np.bincount(held_out, minlength=3) / len(held_out)
        assert np.all(np.abs(freq - 1 / 3) < 0.01)

    def test_marginal_inclusion(self):
        cfg = PartitionConfig(6, 4, 2)
        mask = sample_indicators(cfg, 50_000, 3)
        assert np.all(mask.sum(axis=2) == cfg.train_per_block)
        assert np.allclose(mask.mean(axis=0), training_prob(cfg)[0], atol=0.01)

    def test_seeded_reproducible(self):
        cfg = PartitionConfig(4, 4, 2)
        a = sample_indicators(cfg, 10, derive_rng(7, 3))
        b = sample_indicators(cfg, 10, derive_rng(7, 3))
        c = sample_indicators(cfg, 10, derive_rng(7, 4))
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_membership_indices(self):
        draw = sample_membership(PartitionConfig(4, 2, 2), 0)
        assert sorted(draw.train_indices() + draw.test_indices()) == list(range(6))
        assert len(draw.train_indices()) == 4


@pytest.mark.parametrize("n,m,expected", [(6, 4, 0.6), (5, 5, 0.5), (1, 9, 0.1)])
def test_training_prob(n, m, expected):
    assert training_prob(PartitionConfig(n, m, 1))[0] == pytest.approx(expected)


class TestMembershipDraw:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            MembershipDraw(PartitionConfig(2, 1, 1), ((1, 0),))

    def test_rejects_wrong_block_count(self):
        with pytest.raises(ValueError):
            MembershipDraw(PartitionConfig(2, 2, 2), ((0,),))

    def test_enumeration_count(self):
        cfg = PartitionConfig(2, 2, 2)
        assert len(list(enumerate_memberships(cfg))) == 4


class TestCvError:
    def test_constant_losses(self):
        cfg = PartitionConfig(4, 2, 2)
        draw = sample_membership(cfg, 0)
        assert cv_error(np.full((2, 3), 0.7), draw, cfg).total == pytest.approx(0.0)

    def test_two_point(self):
        cfg = PartitionConfig(1, 1, 1)
        draw = MembershipDraw(cfg, ((0,),))
        assert cv_error(np.array([[0.2, 0.9]]), draw, cfg).total == pytest.approx(0.9 - 0.2)

    def test_membership_average_vanishes(self, rng):
        for n, m, k in [(2, 2, 2), (4, 2, 2), (3, 3, 1), (2, 4, 1)]:
            cfg = PartitionConfig(n, m, k)
            losses = rng.random((k, cfg.block_size))
            totals = [cv_error(losses, d, cfg).total for d in enumerate_memberships(cfg)]
            assert np.mean(totals) == pytest.approx(0.0, abs=1e-12)

    def test_block_average_helper(self, rng):
        cfg = PartitionConfig(3, 3, 1)
        vals = rng.random(cfg.block_size)
        avg = block_average_over_memberships(
            vals, cfg, lambda v, mask: v[~mask].sum() / 3 - v[mask].sum() / 3
        )
        assert avg == pytest.approx(0.0, abs=1e-12)

    def test_batched(self, rng):
        cfg = PartitionConfig(2, 2, 2)
        losses = rng.random((5, 2, 2))
        masks = sample_indicators(cfg, 5, 0)
        batched = cv_error(losses, masks, cfg).total
        single = [cv_error(losses[i], masks[i], cfg).total for i in range(5)]
        assert np.allclose(batched, single)

    def test_shape_mismatch(self):
        cfg = PartitionConfig(2, 2, 2)
        with pytest.raises(ValueError):
            cv_error(np.zeros((2, 3)), sample_membership(cfg, 0), cfg)

    def test_non_finite(self):
        cfg = PartitionConfig(1, 1, 1)
        with pytest.raises(ValueError):
            cv_error(np.array([[np.inf, 0.0]]), MembershipDraw(cfg, ((0,),)), cfg)
