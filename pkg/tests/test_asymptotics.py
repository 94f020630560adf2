import math
from fractions import Fraction as F

import numpy as np
import pytest

from fqz.asymptotics import (
    CardinalityCapExceeded,
    antichain_log_identity,
    check_count_bounds,
    check_count_growth,
    convergence_report,
    cover_family,
    level_family,
    mass_partition_sum,
    ratio_dk,
    ratio_eta_j,
    ratio_xi_j,
)
from fqz.samples import random_case1_system, random_case2_system
from fqz.symbolic import Antichain, Word, random_maximal_antichain, threshold_stats
from fqz.systems import u0_l0_d0

LOG2, LOG3 = math.log(2), math.log(3)


def w(*syms, n=2):
    return Word(tuple(syms), n)


class TestCase1Families:
    def test_cantor_level1(self, cantor1):
        fam = level_family(cantor1, 1, collect_words=True)
        assert fam.count == 4
        assert fam.min_len == fam.max_len == 2
        assert fam.members.members == {w(1, 1), w(1, 2), w(2, 1), w(2, 2)}

    def test_uniform_closed_form_counts(self, cantor1):
        for j in range(1, 11):
            assert level_family(cantor1, j).count == 2 ** (j + 1)

    def test_mass_partition_exact(self, cantor1, asym1):
        for cs in (cantor1, asym1):
            for j in (1, 2, 4):
                fam = level_family(cs, j, collect_words=True)
                assert mass_partition_sum(cs, fam.members) == 1

    def test_j_validation(self, cantor1):
        with pytest.raises(ValueError):
            level_family(cantor1, 0)

    def test_cap_error_names_bound(self, asym1):
        with pytest.raises(CardinalityCapExceeded, match="predicted"):
            level_family(asym1, 40, cap=1000)


class TestCase2Families:
    def test_cantor2_level1(self, cantor2):
        fam = level_family(cantor2, 1, collect_words=True)
        assert cantor2.q_floor() == F(1, 4)
        assert fam.count == 4                      # the level antichain is the full level 2
        assert fam.min_len == fam.max_len == 2
        assert {e.word for e in fam.psi_entries} == {w(), w(1), w(2)}
        assert fam.m_total == 16
        assert fam.q_closure == 1

    def test_inner_count_at_root(self, cantor2):
        # inner antichain at the empty ancestor: weights halve per level, so
        # the threshold 1/4 forces depth 3 and count 8
        stats = threshold_stats(cantor2.t, cantor2.inner_ratios, F(1, 4) / F(1))
        assert stats.count == 8
        brute = [
            rho
            for depth in range(1, 7)
            for rho in _all_words(2, depth)
            if _tw(cantor2.t, rho.parent()) >= F(1, 4) > _tw(cantor2.t, rho)
        ]
        assert stats.count == len(brute)

    def test_m2_window(self, cantor2):
        fam = level_family(cantor2, 2)
        assert fam.m_total == 64
        assert 8 <= fam.m_total <= 192

    def test_growth(self, cantor2):
        prev = level_family(cantor2, 1)
        for j in range(2, 7):
            fam = level_family(cantor2, j)
            for chk in check_count_growth(cantor2, prev, fam):
                assert chk.ok, chk.detail
            prev = fam


def _all_words(n, depth):
    out = [Word((), n)]
    for _ in range(depth):
        out = [v.child(i) for v in out for i in range(1, n + 1)]
    return out


def _tw(weights, word):
    out = F(1)
    for s in word.symbols:
        out *= weights[s - 1]
    return out


class TestCountBounds:
    @pytest.mark.parametrize("jmax", [6])
    def test_builtin_systems(self, cantor1, asym1, cantor2, jmax):
        for cs in (cantor1, asym1, cantor2):
            for j in range(1, jmax + 1):
                for chk in check_count_bounds(cs, level_family(cs, j)):
                    assert chk.ok, f"{chk.name}: {chk.detail}"

    def test_random_systems(self):
        for seed in range(3):
            cs = random_case1_system(seed)
            for j in (1, 3, 5):
                for chk in check_count_bounds(cs, level_family(cs, j)):
                    assert chk.ok, f"case I seed {seed}: {chk.name}: {chk.detail}"
            cs2 = random_case2_system(seed)
            for j in (1, 3, 5):
                for chk in check_count_bounds(cs2, level_family(cs2, j)):
                    assert chk.ok, f"case II seed {seed}: {chk.name}: {chk.detail}"


class TestRatios:
    def test_cantor_collapse_exact(self, cantor1):
        for k in (1, 3, 7):
            r = ratio_dk(cantor1, k)
            assert r.deviation_is_exactly_zero
            assert r.value == pytest.approx(LOG2 / LOG3, abs=1e-12)
        for j in (1, 4):
            r = ratio_eta_j(cantor1, j)
            assert r.deviation_is_exactly_zero

    def test_asym_d1_value(self, asym1):
        r = ratio_dk(asym1, 1)
        expected = ((7 / 15) * math.log(1 / 3) + (8 / 15) * math.log(2 / 3)) / math.log(1 / 3)
        assert r.value == pytest.approx(expected, abs=1e-12)

    def test_asym_dk_scaled_deviation_bounded(self, asym1):
        # the scaled deviations rise toward a finite limit (~0.4206 by the
        # level-sum closed form); 0.45 is the frozen regression ceiling
        d0 = u0_l0_d0(asym1)[2]
        devs = [k * abs(ratio_dk(asym1, k).value - d0) for k in range(1, 13)]
        assert max(devs) <= 0.45
        assert devs == sorted(devs)  # monotone approach from below

    def test_xi_values(self, cantor2):
        r = ratio_xi_j(cantor2, 1)
        assert r.value == pytest.approx(0.41276185706961666, abs=1e-9)
        assert r.count == 16
        assert set(r.components) >= {"t1", "t2", "t3", "r1", "r2", "r3"}

    def test_case_dispatch(self, cantor1, cantor2):
        with pytest.raises(ValueError):
            ratio_xi_j(cantor1, 1)
        with pytest.raises(ValueError):
            ratio_eta_j(cantor2, 1)
        with pytest.raises(ValueError):
            ratio_dk(cantor2, 1)


class TestLogIdentity:
    def test_uniform_collapse(self):
        t = [F(1, 2), F(1, 2)]
        c = [F(1, 10), F(1, 10)]
        gamma = Antichain.from_members(_all_words(2, 2))
        lhs, rhs, exact = antichain_log_identity(t, c, gamma)
        assert exact
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_three_member_example(self):
        gamma = Antichain.from_members([w(1), w(2, 1), w(2, 2)])
        lhs, rhs, exact = antichain_log_identity([F(1, 3), F(2, 3)], [F(1, 4), F(1, 2)], gamma)
        assert exact
        assert lhs == pytest.approx(0.98044, abs=1e-4)
        assert abs(lhs - rhs) < 1e-10

    def test_full_level_closed_form(self):
        t = [F(1, 3), F(2, 3)]
        c = [F(1, 4), F(1, 2)]
        u0 = sum(float(ti) * math.log(float(ti)) for ti in t)
        l0 = sum(float(ti) * math.log(float(ci)) for ti, ci in zip(t, c))
        for k in (1, 2, 3):
            gamma = Antichain.from_members(_all_words(2, k))
            lhs, rhs, exact = antichain_log_identity(t, c, gamma)
            assert exact
            assert lhs == pytest.approx(l0 * k * u0, abs=1e-10)
            assert rhs == pytest.approx(u0 * k * l0, abs=1e-10)

    def test_non_maximal_rejected(self):
        gamma = Antichain.from_members([w(1), w(2, 1)])
        with pytest.raises(ValueError, match="maximal"):
            antichain_log_identity([F(1, 3), F(2, 3)], [F(1, 4), F(1, 2)], gamma)

    def test_random_battery(self):
        rng = np.random.default_rng(7)
        for seed in range(5):
            cs = random_case2_system(seed)
            for _ in range(5):
                gamma = random_maximal_antichain(cs.inner.n, rng)
                lhs, rhs, exact = antichain_log_identity(cs.t, cs.inner_ratios, gamma)
                assert exact
                assert abs(lhs - rhs) < 1e-10


class TestConvergence:
    def test_cantor_identically_zero(self, cantor1):
        rows = convergence_report(cantor1, 6)
        assert all(r.deviation == 0.0 for r in rows)
        assert all(r.passed for r in rows)

    def test_cantor2_passes(self, cantor2):
        rows = convergence_report(cantor2, 8)
        assert all(r.passed for r in rows)
        assert {r.kind for r in rows} == {"xi_j"}

    def test_row_fields(self, cantor1):
        rows = convergence_report(cantor1, 3)
        r = rows[0]
        assert r.kind == "d_k" and r.j == 1 and r.count == 2


class TestCoverFamily:
    def test_uniform_quarter(self, cantor2):
        cf = cover_family(cantor2, F(1, 4))
        assert {str(v) for v in cf.outer.members} == {"11", "12", "21", "22"}

    def test_eps_above_ratio(self, cantor2):
        cf = cover_family(cantor2, F(3, 10))
        assert {str(v) for v in cf.outer.members} == {"1", "2"}

    def test_diameter_windows(self, cantor2):
        eps = F(1, 10)
        cf = cover_family(cantor2, eps)
        s_floor = min(cantor2.outer_ratios)
        c_floor = min(cantor2.inner_ratios)
        for word in cf.outer.members:
            s = _tw(cantor2.outer_ratios, word)
            assert eps * s_floor <= s < eps
        for sigma in cf.psi:
            s_sigma = _tw(cantor2.outer_ratios, sigma)
            for rho in cf.inner[sigma]:
                sc = s_sigma * _tw(cantor2.inner_ratios, rho)
                assert eps * c_floor <= sc < eps

    def test_inner_families_maximal(self, cantor2):
        cf = cover_family(cantor2, F(1, 8))
        for sigma in cf.psi:
            assert cf.inner[sigma].is_maximal()

    def test_eps_validation(self, cantor2):
        with pytest.raises(ValueError):
            cover_family(cantor2, F(3, 2))
        with pytest.raises(ValueError):
            cover_family(cantor2, F(0))

    def test_case_dispatch(self, cantor1):
        with pytest.raises(ValueError):
            cover_family(cantor1, F(1, 8))
