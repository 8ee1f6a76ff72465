import math

import numpy as np
import pytest
from scipy.stats import binom

from cmibounds.bernoulli_exact import (
    BERNOULLI_BOUNDS,
    BernoulliInstance,
    InfoKind,
    bernoulli_bound,
    binom_expect,
    dis_info_quantity,
    info_quantity,
    integrated_from_tables,
    log_comb,
    true_gen_error,
)
from cmibounds.info_measures import binary_entropy
from cmibounds.oracle import TinyInstance, enumerate_joint, info_query
from cmibounds.supersample import PartitionConfig


class TestBinomialHelpers:
    def test_identity(self):
        assert binom_expect(7, 0.3, lambda x: x) == pytest.approx(2.1)

    def test_normalisation(self):
        assert binom_expect(50, 0.61, lambda x: np.ones_like(x)) == pytest.approx(1.0)

    def test_second_moment(self):
        assert binom_expect(2, 0.5, lambda x: x**2) == pytest.approx(1.5)

    def test_large_trials_stay_finite(self):
        assert binom_expect(100_000, 0.4, lambda x: x / 100_000) == pytest.approx(0.4)

    def test_log_comb(self):
        assert math.exp(log_comb(10, 3)) == pytest.approx(120)


class TestTrueGap:
    @pytest.mark.parametrize("n,p,expected", [(10, 0.4, 0.048), (2, 0.5, 0.25), (5, 0.0, 0.0), (5, 1.0, 0.0)])
    def test_values(self, n, p, expected):
        assert true_gen_error(n, p) == pytest.approx(expected)


class TestClosedForms:
    def test_single_sample_information_is_entropy(self):
        assert info_quantity("MI_FULL", BernoulliInstance(1, p=0.3)).value == pytest.approx(binary_entropy(0.3))

    def test_two_samples(self):
        ent = -sum(q * math.log(q) for q in binom.pmf(range(3), 2, 0.5))
        assert ent == pytest.approx(1.039721, abs=1e-6)
        assert info_quantity("MI_FULL", BernoulliInstance(2, p=0.5)).value == pytest.approx(ent)

    @pytest.mark.parametrize("n", [1, 2, 5, 30])
    @pytest.mark.parametrize("p", [0.1, 0.4, 0.77])
    def test_leave_m_out_reduces_to_leave_one_out(self, n, p):
        lmo = info_quantity("LMO_CMI", BernoulliInstance(n, 1, 1, p)).value
        loo = info_quantity("LOO_CMI", BernoulliInstance(n, 1, 1, p)).value
        assert lmo == pytest.approx(loo, abs=1e-10)

    def test_lofo_with_m_equal_n_is_paired(self):
        a = info_quantity("LOFO_CMI", BernoulliInstance(6, 6, 6, 0.3)).per_term[0]
        b = info_quantity("ICIMI", BernoulliInstance(6, 6, 6, 0.3)).per_term[0]
        assert a == pytest.approx(b, abs=1e-12)

    def test_term_packing(self):
        q = info_quantity("IMI", BernoulliInstance(4, p=0.3))
        assert len(q.per_term) == 4 and q.value == pytest.approx(4 * q.per_term[0])

    def test_deterministic_data(self):
        for kind in InfoKind:
            inst = BernoulliInstance(4, 4, 4, 0.0)
            assert info_quantity(kind, inst).value == 0.0

    @pytest.mark.parametrize("kind,inst", [("LOFO_CMI", BernoulliInstance(5, 2, 1, 0.3)),
                                           ("MN_IPCIMI", BernoulliInstance(2, 3, 1, 0.3)),
                                           ("LMO_CMI", BernoulliInstance(3, 0, 1, 0.3))])
    def test_divisibility_errors(self, kind, inst):
        with pytest.raises(ValueError):
            info_quantity(kind, inst)

    @pytest.mark.parametrize("n,m,k", [(2, 2, 2), (2, 2, 1), (3, 3, 3), (2, 4, 2), (3, 1, 1)])
    def test_against_enumeration(self, n, m, k):
        p = 0.37
        t = enumerate_joint(TinyInstance(PartitionConfig(n, m, k), p))
        inst = BernoulliInstance(n, m, k, p)
        assert info_quantity("IMI", inst).per_term[0] == pytest.approx(info_query(t, "W", "ZT0").value, abs=1e-9)
        block = info_query(t, "W", "U0", given="B0").value
        if k == 1:
            assert info_quantity("LMO_CMI", inst).value == pytest.approx(block, abs=1e-9)
        if k == m and n % m == 0:
            assert info_quantity("LOFO_CMI", inst).per_term[0] == pytest.approx(block, abs=1e-9)
        if k == n and m % n == 0:
            assert info_quantity("MN_IPCIMI", inst).per_term[0] == pytest.approx(block, abs=1e-9)


class TestDisintegrated:
    @pytest.mark.parametrize("kind,inst", [("LMO_SCMI", BernoulliInstance(4, 3, 1, 0.3)),
                                           ("SICIMI", BernoulliInstance(5, 5, 5, 0.6)),
                                           ("LOO_SCMI", BernoulliInstance(7, 1, 1, 0.2))])
    def test_average_is_integrated(self, kind, inst):
        parts = [dis_info_quantity(kind, inst, z).value for z in (0, 1)]
        avg = (1 - inst.p) * parts[0] + inst.p * parts[1]
        assert avg == pytest.approx(info_quantity(kind, inst).value, abs=1e-10)
        assert integrated_from_tables(kind, inst).value == pytest.approx(avg, abs=1e-12)

    def test_against_enumeration(self):
        t = enumerate_joint(TinyInstance(PartitionConfig(2, 2, 1), 0.3))
        inst = BernoulliInstance(2, 2, 1, 0.3)
        for z in (0, 1):
            got = dis_info_quantity("LMO_SCMI", inst, z).per_term[0]
            assert got == pytest.approx(info_query(t, "W", "U0", at={"Z0": z}).value, abs=1e-9)

    def test_symmetric_at_half(self):
        inst = BernoulliInstance(4, 2, 1, 0.5)
        a, b = (dis_info_quantity("LMO_SCMI", inst, z).value for z in (0, 1))
        assert a == pytest.approx(b, abs=1e-12)

    def test_rejects_block_kind(self):
        with pytest.raises(ValueError):
            dis_info_quantity("LOFO_CMI", BernoulliInstance(2, 2, 2, 0.3), 0)


class TestAssembledBounds:
    @pytest.mark.parametrize("kind", BERNOULLI_BOUNDS)
    def test_valid_at_n10(self, kind):
        bound = bernoulli_bound(kind, 10, 10, 1, 0.4)
        assert bound.value >= true_gen_error(10, 0.4)
        assert bound.recompute() == pytest.approx(bound.value, rel=1e-12)

    def test_loo_converges(self):
        assert bernoulli_bound("LOO_CMI", 5000, p=0.4).value == pytest.approx(
            math.sqrt(binary_entropy(0.4) / 2), abs=0.002
        )

    def test_disintegrated_tighter(self):
        integ = bernoulli_bound("LMO_SCMI", 10, 100, p=0.25).value
        dis = bernoulli_bound("LMO_SCMI", 10, 100, p=0.25, disintegrated=True).value
        assert dis <= integ
