import math

import numpy as np
import pytest
from mpmath import log as mlog
from mpmath import mp, mpf

from cmibounds.info_measures import (
    InfoQuantity,
    binary_entropy,
    d_gamma,
    d_gamma_supremum,
    d_js,
    d_js_inverse,
    d_kl_binary,
    js_quadratic_floor,
)

mp.dps = 30


def _kl_mp(p, q):
    p, q = mpf(p), mpf(q)
    out = mpf(0)
    if p > 0:
        out += p * mlog(p / q)
    if p < 1:
        out += (1 - p) * mlog((1 - p) / (1 - q))
    return out


class TestEntropy:
    def test_maximum_at_half(self):
        assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)

    def test_degenerate(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_value_at_0_4(self):
        assert binary_entropy(0.4) == pytest.approx(0.673012, abs=1e-6)

    def test_broadcasts(self):
        out = binary_entropy(np.array([0.1, 0.9]))
        assert out.shape == (2,) and out[0] == pytest.approx(out[1])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            binary_entropy(1.5)


class TestKL:
    def test_identity(self):
        assert d_kl_binary(0.3, 0.3) == pytest.approx(0.0, abs=1e-16)

    def test_zero_log_zero(self):
        assert d_kl_binary(0.0, 0.5) == pytest.approx(math.log(2))

    def test_reference_value(self):
        assert d_kl_binary(0.25, 0.5) == pytest.approx(0.130812, abs=1e-6)

    @pytest.mark.parametrize("p,q", [(0.1, 0.7), (0.999, 0.001), (1e-9, 0.5)])
    def test_matches_high_precision(self, p, q):
        assert d_kl_binary(p, q) == pytest.approx(float(_kl_mp(p, q)), rel=1e-12)

    def test_not_absolutely_continuous(self):
        assert d_kl_binary(0.5, 0.0) == math.inf


class TestGamma:
    def test_zero_gamma(self):
        assert d_gamma(0.0, 0.3, 0.8) == 0.0

    def test_reduces_to_gamma_q_when_p_zero(self):
        assert d_gamma(2.0, 0.0, 0.3) == pytest.approx(0.6)

    def test_supremum_is_kl(self):
        assert d_gamma_supremum(0.5, 0.25) == pytest.approx(0.130812, abs=1e-6)

    def test_supremum_matches_kl_on_random_pairs(self, rng):
        for p, q in rng.uniform(0.05, 0.95, (20, 2)):
            assert d_gamma_supremum(p, q) == pytest.approx(d_kl_binary(q, p), abs=1e-9)


class TestJS:
    def test_identity(self):
        assert d_js(0.7, 0.2, 0.2) == pytest.approx(0.0, abs=1e-16)

    def test_separated_symmetric(self):
        assert d_js(0.5, 0.0, 1.0) == pytest.approx(math.log(2))

    def test_two_term_definition(self):
        theta, p, q = mpf("0.6"), mpf("0.1"), mpf("0.4")
        mix = theta * p + (1 - theta) * q
        ref = theta * _kl_mp(p, mix) + (1 - theta) * _kl_mp(q, mix)
        assert d_js(0.6, 0.1, 0.4) == pytest.approx(float(ref), abs=1e-12)

    def test_theta_must_be_interior(self):
        with pytest.raises(ValueError):
            d_js(1.0, 0.2, 0.3)

    def test_quadratic_floor(self, rng):
        theta, p, q = rng.uniform(0.001, 0.999, (3, 10_000))
        assert np.all(js_quadratic_floor(theta, p, q) <= d_js(theta, p, q) + 1e-12)


class TestInverse:
    def test_zero_budget(self):
        assert d_js_inverse(0.6, 0.2, 0.0) == pytest.approx(0.2, abs=1e-9)

    def test_vacuous(self):
        assert d_js_inverse(0.6, 0.2, float(d_js(0.6, 0.2, 1.0))) == 1.0

    def test_round_trip(self):
        q = d_js_inverse(0.6, 0.2, 0.05)
        assert d_js(0.6, 0.2, q) == pytest.approx(0.05, abs=1e-9)
        assert q > 0.2

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            d_js_inverse(0.5, 0.2, -1.0)


class TestInfoQuantity:
    def test_total_of_terms(self):
        q = InfoQuantity("IMI", 0.3, (0.1, 0.2))
        assert q.value == 0.3

    def test_inconsistent_terms(self):
        with pytest.raises(ValueError):
            InfoQuantity("IMI", 0.5, (0.1, 0.2))

    def test_negative(self):
        with pytest.raises(ValueError):
            InfoQuantity("MI", -0.1)
