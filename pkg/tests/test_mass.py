import math
from fractions import Fraction as F

import numpy as np
import pytest

from fqz.mass import (
    MassValue,
    ball_mass_exponent,
    certified_ball_constants,
    delta1,
    empirical_ball_sup,
    fitted_lambda1,
    gamma_sum_mu1,
    gamma_sum_mu1_enumerated,
    hereditary_log_sum,
    hereditary_log_sum_enumerated,
    log_symbol_table,
    mass_case1,
    mass_case1_log,
    mass_case2,
    mu1,
    mu1_direct,
)
from fqz.samples import random_case1_system
from fqz.symbolic import Word, empty_word


def w(*syms, n=2):
    return Word(tuple(syms), n)


class TestMassValue:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            MassValue.from_fraction(F(3, 2))
        with pytest.raises(ValueError):
            MassValue.from_log(0.5)

    def test_backends(self):
        v = MassValue.from_fraction(F(1, 8))
        assert v.backend == "rational"
        assert float(v) == 0.125
        u = MassValue.from_log(math.log(0.125))
        assert u.backend == "log-float"
        assert float(u) == pytest.approx(0.125)


class TestCase1Mass:
    def test_single_symbol(self, cantor1):
        assert mass_case1(cantor1, w(1)).exact == F(1, 2)

    def test_two_symbols(self, cantor1):
        assert mass_case1(cantor1, w(1, 1)).exact == F(1, 4)
        # symmetric system: the level-2 masses partition evenly by pairs
        total = sum(mass_case1(cantor1, v).exact for v in
                    (w(1, 1), w(1, 2), w(2, 1), w(2, 2)))
        assert total == 1

    def test_asymmetric(self, asym1):
        assert mass_case1(asym1, w(1)).exact == F(7, 15)

    def test_rejects_case2(self, cantor2):
        with pytest.raises(ValueError, match="case I"):
            mass_case1(cantor2, w(1))

    def test_rejects_empty(self, cantor1):
        with pytest.raises(ValueError):
            mass_case1(cantor1, empty_word(2))

    def test_float_backend_agrees(self, asym1):
        rng = np.random.default_rng(1)
        for _ in range(10):
            k = int(rng.integers(1, 21))
            word = Word(tuple(int(rng.integers(1, 3)) for _ in range(k)), 2)
            exact = mass_case1(asym1, word)
            lg = mass_case1_log(asym1, word)
            assert lg.log_value == pytest.approx(exact.log_value, abs=1e-12)


class TestMu1:
    def test_examples(self, cantor1):
        assert mu1(cantor1, w(1)).exact == F(1, 4)
        assert mu1(cantor1, w(1, 1)).exact == F(3, 16)
        assert mu1(cantor1, empty_word(2)).exact == 0

    def test_recursion_matches_direct_sum(self, asym1):
        rng = np.random.default_rng(2)
        for _ in range(20):
            k = int(rng.integers(0, 13))
            word = Word(tuple(int(rng.integers(1, 3)) for _ in range(k)), 2)
            assert mu1(asym1, word).exact == mu1_direct(asym1, word)

    def test_mass_is_mu1_plus_branch_product(self, asym1):
        word = w(2, 1, 2)
        p = F(2, 5) * F(2, 5) * F(2, 5)
        assert mass_case1(asym1, word).exact == mu1(asym1, word).exact + p


class TestCase2Mass:
    def test_map_piece(self, cantor2):
        assert mass_case2(cantor2, w(1)).exact == F(1, 4)

    def test_aux_piece(self, cantor2):
        assert mass_case2(cantor2, w(1), w(2)).exact == F(1, 16)

    def test_top_level_aux(self, cantor2):
        assert mass_case2(cantor2, empty_word(2), empty_word(2)).exact == F(1, 2)

    def test_rejects_case1(self, cantor1):
        with pytest.raises(ValueError, match="case II"):
            mass_case2(cantor1, w(1))


class TestDescendantSums:
    def test_closed_form_examples(self, cantor1):
        val, ok = gamma_sum_mu1(cantor1, w(1), 1, verify=True)
        assert val == F(3, 8) and ok
        val, ok = gamma_sum_mu1(cantor1, w(1), 2, verify=True)
        assert val == F(7, 16) and ok

    def test_h1_collapse(self, asym1):
        # one-step collapse: sum equals mu1(sigma) + p0 p_sigma
        sigma = w(2, 1)
        val, _ = gamma_sum_mu1(asym1, sigma, 1)
        p_sigma = F(2, 5) * F(2, 5)
        assert val == mu1(asym1, sigma).exact + asym1.p0 * p_sigma

    def test_enumeration_matches(self, asym1):
        sigma = w(1, 2)
        for h in range(1, 5):
            closed, _ = gamma_sum_mu1(asym1, sigma, h)
            assert closed == gamma_sum_mu1_enumerated(asym1, sigma, h)


class TestHereditaryIdentities:
    def test_h1_is_one_step_identity(self, asym1):
        # at h=1 the correction reduces to u0*(mu1+p0 p) + p0 p log t_sigma
        sigma = w(2, 1)
        d = delta1(asym1, sigma, 1)
        m = mu1(asym1, sigma).exact
        p_sigma = F(2, 5) * F(2, 5)
        from fqz.mass import LogLinear, _u0_like, _log_word

        expected = _u0_like(asym1, "t").scale(m + asym1.p0 * p_sigma) + _log_word(
            "t", sigma
        ).scale(asym1.p0 * p_sigma)
        assert d == expected

    @pytest.mark.parametrize("seed", range(20))
    def test_exact_on_seeded_systems(self, seed):
        cs = random_case1_system(seed)
        rng = np.random.default_rng(seed + 1000)
        table = log_symbol_table(cs)
        for _ in range(2):
            k = int(rng.integers(0, 4))
            sigma = Word(tuple(int(rng.integers(1, cs.n_outer + 1)) for _ in range(k)), cs.n_outer)
            h = int(rng.integers(1, 6))
            for kind in ("t", "s"):
                closed = hereditary_log_sum(cs, sigma, h, kind)
                brute = hereditary_log_sum_enumerated(cs, sigma, h, kind)
                assert closed == brute  # exact rational log-combination
                assert abs(closed.value(table) - brute.value(table)) < 1e-10


class TestBallMass:
    def test_case2_exponent(self, cantor2):
        eta1, d3, d4 = ball_mass_exponent(cantor2)
        assert d3 == pytest.approx(0.1)
        assert d4 == pytest.approx(0.5)
        assert eta1 == pytest.approx(math.log(1 / 2) / math.log(1 / 10), abs=1e-12)

    def test_case1_exponent_flagged_formula(self, cantor1):
        eta1, d3, d4 = ball_mass_exponent(cantor1)
        assert d3 == pytest.approx(1 / 3)
        assert d4 == pytest.approx(1 / 2)  # max(t_i, p_i + p0 t_i) = 1/2

    def test_certified_constants_bound_empirical(self, cantor2):
        lam, eta = certified_ball_constants(cantor2)
        for eps in (2.0**-k for k in range(3, 9)):
            assert empirical_ball_sup(cantor2, eps) <= lam * eps**eta + 1e-12

    def test_empirical_monotone(self, cantor2):
        a = empirical_ball_sup(cantor2, 1 / 64)
        b = empirical_ball_sup(cantor2, 1 / 32)
        assert a <= b + 1e-12

    def test_eps_validation(self, cantor2):
        with pytest.raises(ValueError):
            empirical_ball_sup(cantor2, 1.0)
        with pytest.raises(ValueError):
            empirical_ball_sup(cantor2, 1 / 8, grid_resolution=1)

    def test_fitted_lambda_covers_grid(self, cantor1):
        lam, eta, rows = fitted_lambda1(cantor1, [2.0**-k for k in range(3, 9)])
        assert lam < math.inf
        for eps, sup in rows:
            assert sup <= lam * eps**eta * (1 + 1e-12)
