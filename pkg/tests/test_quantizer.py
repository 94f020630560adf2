import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from fqz.quantizer import (
    Codebook,
    ErrorBracket,
    codebook_from_antichain,
    coefficient_table,
    hat_e_lower_table,
    lloyd0,
    log_dist_integral,
    monte_carlo_integral,
    oracle_lower_bound,
    oracle_optimal_1d,
    refine_to_count,
    refine_to_diameter,
    sample_ism,
    sandwich_check,
)
from fqz.systems import parse_config, u0_l0_d0

LOG3 = math.log(3)


class TestCodebook:
    def test_dedupes_and_sorts(self):
        cb = Codebook.from_points([(0.5,), (0.1,), (0.5,)])
        assert cb.points == ((0.1,), (0.5,))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Codebook.from_points([])

    def test_bracket_validation(self):
        with pytest.raises(ValueError):
            ErrorBracket(1.0, 0.0)


class TestPieces:
    def test_refinement_masses_sum_to_one(self, cantor1, cantor2):
        for cs in (cantor1, cantor2):
            pieces = refine_to_count(cs, 100)
            assert sum(p.mass for p in pieces) == pytest.approx(1.0, abs=1e-12)
            pieces = refine_to_diameter(cs, 0.05)
            assert sum(p.mass for p in pieces) == pytest.approx(1.0, abs=1e-12)
            assert all(p.width <= 0.05 for p in pieces)


class TestBracket:
    def test_containment_bound(self, cantor1):
        # support inside [0,1]: a single point at the center sees log d <= log(1/2)
        cb = Codebook.from_points([(0.5,)])
        br = log_dist_integral(cantor1, cb, 1e-3)
        assert br.upper <= math.log(0.5) + 1e-9
        assert math.exp(br.upper) <= 1.0  # diameter of the enclosure

    def test_antichain_codebook_beats_construction_bound(self, cantor1):
        cb, fam = codebook_from_antichain(cantor1, 1)
        assert cb.points == ((F(1, 18),), (F(5, 18),), (F(13, 18),), (F(17, 18),))
        br = log_dist_integral(cantor1, cb, 1e-3)
        assert br.upper <= math.log(1 / 9) + 1e-3

    def test_monte_carlo_consistency(self, cantor1, cantor2):
        rng = np.random.default_rng(0)
        for cs in (cantor1, cantor2):
            lo, hi = cs.support_box().lo[0], cs.support_box().hi[0]
            for trial in range(3):
                n = int(rng.integers(1, 7))
                pts = rng.uniform(lo - 0.1, hi + 0.1, size=n)
                cb = Codebook.from_points([(float(v),) for v in pts])
                br = log_dist_integral(cs, cb, 5e-3)
                mc = monte_carlo_integral(cs, cb, 40_000, seed=trial)
                assert br.lower - 3 * mc.stderr <= mc.lower <= br.upper + 3 * mc.stderr

    def test_tolerance_honored(self, cantor1):
        cb = Codebook.from_points([(0.2,), (0.8,)])
        br = log_dist_integral(cantor1, cb, 1e-4)
        assert br.width <= 1e-4

    def test_monotone_in_codebook_extension(self, cantor1):
        base = [(0.1,), (0.9,)]
        cb1 = Codebook.from_points(base)
        cb2 = Codebook.from_points(base + [(0.35,)])
        b1 = log_dist_integral(cantor1, cb1, 1e-4)
        b2 = log_dist_integral(cantor1, cb2, 1e-4)
        assert b2.upper <= b1.upper + 1e-4

    def test_point_on_support_is_finite(self, cantor1):
        # an attractor point (0 is the fixed point of the left map) still
        # yields a finite bracket: the measure carries no atoms
        cb = Codebook.from_points([(0.0,)])
        br = log_dist_integral(cantor1, cb, 5e-3)
        assert math.isfinite(br.lower) and math.isfinite(br.upper)

    def test_scale_equivariance(self, cantor1):
        doc = {
            "dimension": 1, "case": "I",
            "outer": {"maps": [{"ratio": "1/3", "translation": ["0"]},
                               {"ratio": "1/3", "translation": ["4/3"]}],
                      "p": ["1/2", "1/4", "1/4"],
                      "witness_box": [["0"], ["2"]]},
            "inner": {"t": ["1/2", "1/2"]},
        }
        scaled = parse_config(doc)
        cb = Codebook.from_points([(0.5,)])
        cb2 = Codebook.from_points([(1.0,)])
        b1 = log_dist_integral(cantor1, cb, 1e-3)
        b2 = log_dist_integral(scaled, cb2, 1e-3)
        assert b2.midpoint == pytest.approx(b1.midpoint + math.log(2), abs=5e-3)


class TestSampler:
    def test_cylinder_frequency(self, cantor1):
        xs = sample_ism(cantor1, seed=3, count=100_000)
        frac = float(np.mean(xs[:, 0] <= 1 / 3))
        sigma = math.sqrt(0.25 / 100_000)
        assert abs(frac - 0.5) <= 3 * sigma

    def test_case2_map_piece_frequency(self, cantor2):
        xs = sample_ism(cantor2, seed=5, count=100_000)
        frac = float(np.mean(xs[:, 0] <= 0.25))
        sigma = math.sqrt(0.25 * 0.75 / 100_000)
        assert abs(frac - 0.25) <= 3 * sigma

    def test_degenerate_mixture_is_aux_sampler(self, cantor2):
        nu = cantor2.nu_only()
        xs = sample_ism(nu, seed=1, count=5000)
        box = cantor2.inner_attractor_box()
        assert np.all(xs[:, 0] >= box.lo[0] - 1e-6)
        assert np.all(xs[:, 0] <= box.hi[0] + 1e-6)

    def test_trunc_tol_validation(self, cantor1):
        with pytest.raises(ValueError):
            sample_ism(cantor1, 0, 10, trunc_tol=0.0)


class TestMonteCarlo:
    def test_covering_codebook_bound(self, cantor1):
        grid = np.linspace(0, 1, 65)
        cb = Codebook.from_points([(float(v),) for v in grid])
        mc = monte_carlo_integral(cantor1, cb, 20_000, seed=2)
        spacing = 1 / 64
        assert mc.lower <= math.log(spacing) + 3 * mc.stderr + 0.05

    def test_stderr_scaling(self, cantor1):
        cb = Codebook.from_points([(0.3,), (0.7,)])
        a = monte_carlo_integral(cantor1, cb, 20_000, seed=3)
        b = monte_carlo_integral(cantor1, cb, 40_000, seed=4)
        assert b.stderr == pytest.approx(a.stderr / math.sqrt(2), rel=0.2)

    def test_sample_validation(self, cantor1):
        cb = Codebook.from_points([(0.5,)])
        with pytest.raises(ValueError):
            monte_carlo_integral(cantor1, cb, 0)


class TestCodebookConstruction:
    def test_case2_count_matches_family(self, cantor2):
        cb, fam = codebook_from_antichain(cantor2, 1)
        assert fam.m_total == 16
        assert cb.n == 16

    def test_j_zero_rejected(self, cantor1):
        with pytest.raises(ValueError):
            codebook_from_antichain(cantor1, 0)

    def test_fixed_point_anchor(self, cantor1):
        cb, _ = codebook_from_antichain(cantor1, 1, anchor_rule="attractor_fixed_point")
        assert cb.n == 4
        with pytest.raises(ValueError):
            codebook_from_antichain(cantor1, 1, anchor_rule="bogus")


class TestLloyd:
    def test_improves_antichain_codebook(self, cantor1):
        cb, _ = codebook_from_antichain(cantor1, 2)
        base = log_dist_integral(cantor1, cb, 1e-3)
        _, br = lloyd0(cantor1, cb.n, init=cb, iterations=8, tol=1e-3)
        assert br.upper <= base.upper + 1e-9

    def test_init_size_checked(self, cantor1):
        cb = Codebook.from_points([(0.5,)])
        with pytest.raises(ValueError):
            lloyd0(cantor1, 2, init=cb)


class TestOracle:
    def test_objective_symmetry(self, cantor1):
        a = log_dist_integral(cantor1, Codebook.from_points([(0.3,)]), 1e-3)
        b = log_dist_integral(cantor1, Codebook.from_points([(0.7,)]), 1e-3)
        assert a.midpoint == pytest.approx(b.midpoint, abs=2e-3)

    def test_n1_bracket_contains_best_value(self, cantor1):
        cb, br = oracle_optimal_1d(cantor1, 1)
        # the optimum sits inside a mass block and beats the center point
        center = log_dist_integral(cantor1, Codebook.from_points([(0.5,)]), 1e-3)
        assert br.upper <= center.upper
        assert br.lower <= br.upper

    def test_n2_symmetric_pair(self, cantor1):
        cb, br = oracle_optimal_1d(cantor1, 2)
        assert abs(cb.points[0][0] + cb.points[1][0] - 1.0) < 0.05

    def test_lloyd_agreement(self, cantor1):
        for n in (1, 2, 3, 4):
            lcb, lbr = lloyd0(cantor1, n, iterations=15, tol=2e-3)
            ocb, obr = oracle_optimal_1d(cantor1, n)
            assert lbr.midpoint >= obr.lower - 1e-9
            assert lbr.upper <= obr.upper + lbr.width + obr.width + 1e-9

    def test_size_limit(self, cantor1):
        with pytest.raises(ValueError):
            oracle_optimal_1d(cantor1, 5)

    def test_capped_lower_monotone_in_n(self, cantor1):
        vals = [oracle_lower_bound(cantor1, n) for n in (1, 2, 3)]
        assert vals == sorted(vals, reverse=True)


class TestLowerTable:
    def test_consistent_with_oracle(self, cantor1):
        table = hat_e_lower_table(cantor1, 16)
        for n in (1, 2, 3, 4):
            _, br = oracle_optimal_1d(cantor1, n)
            assert table[n] <= br.upper + 1e-9
        assert all(table[k + 1] <= table[k] + 1e-12 for k in range(1, 16))

    def test_case2_route(self, cantor2):
        table = hat_e_lower_table(cantor2, 8)
        assert np.all(np.isfinite(table[1:]))
        cb, fam = codebook_from_antichain(cantor2, 1)
        br = log_dist_integral(cantor2, cb, 1e-2)
        assert table[cb.n] <= br.upper


class TestCoefficientTable:
    def test_cantor_band(self, cantor1):
        rows = coefficient_table(cantor1, [1, 2, 3], method="antichain", tol=5e-3)
        for r in rows:
            assert r.coef_lower > 0
            assert r.coef_upper / r.coef_lower <= 50
            prod = r.n ** (1 / u0_l0_d0(cantor1)[2]) * math.exp(r.construction_bound)
            assert prod == pytest.approx(1.0, abs=1e-6)

    def test_lloyd_tightens(self, cantor1):
        base = coefficient_table(cantor1, [2], method="antichain", tol=5e-3)[0]
        tight = coefficient_table(cantor1, [2], method="lloyd", tol=5e-3)[0]
        assert tight.coef_upper <= base.coef_upper + 1e-12


class TestSandwich:
    def test_cantor_rows_hold(self, cantor1):
        rows = sandwich_check(cantor1, [4, 8])
        assert rows
        for r in rows:
            assert r.ok, f"{r.check} at n={r.n}: lhs={r.lhs} rhs={r.rhs}"
        assert {r.check for r in rows} == {"lower_recursion", "upper_recursion"}
        assert all(r.ratio_reading == "outer contraction ratios" for r in rows)
