from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqz.symbolic import (
    Antichain,
    Relation,
    Word,
    descendants,
    empty_word,
    has_proper_descendant_in,
    lambda_star,
    parse_word,
    random_maximal_antichain,
    relate,
    threshold_antichain,
    threshold_stats,
)


def w(*syms, n=2):
    return Word(tuple(syms), n)


class TestWordOps:
    def test_concat(self):
        assert w(1, 2).concat(w(1)) == w(1, 2, 1)
        assert empty_word(2).concat(w(2, 2)) == w(2, 2)
        assert w(1).concat(empty_word(2)) == w(1)

    def test_concat_alphabet_mismatch(self):
        with pytest.raises(ValueError, match="alphabet"):
            w(1).concat(Word((1,), 3))

    def test_truncate_suffix(self):
        assert w(1, 2, 1).truncate(2) == w(1, 2)
        assert w(1, 2, 1).suffix(1) == w(2, 1)
        assert w(1, 2, 1).suffix(0) == w(1, 2, 1)
        assert w(1, 2, 1).truncate(0) == empty_word(2)

    def test_truncate_out_of_range(self):
        with pytest.raises(ValueError):
            w(1).truncate(2)
        with pytest.raises(ValueError):
            w(1, 2).suffix(2)

    def test_parent(self):
        assert w(1, 2).parent() == w(1)
        with pytest.raises(ValueError):
            empty_word(2).parent()

    def test_symbol_validation(self):
        with pytest.raises(ValueError):
            Word((0,), 2)
        with pytest.raises(ValueError):
            Word((3,), 2)

    def test_relate(self):
        assert relate(w(1), w(1, 2)) is Relation.PREDECESSOR_OF
        assert relate(w(1, 2), w(2, 1)) is Relation.INCOMPARABLE
        assert relate(w(1, 2), w(1, 2)) is Relation.EQUAL
        assert relate(w(1, 2), w(1)) is Relation.DESCENDANT_OF

    def test_serialization_roundtrip(self):
        assert str(w(1, 2, 1)) == "121"
        assert parse_word("121", 2) == w(1, 2, 1)
        big = Word((1, 2, 11), 12)
        assert str(big) == "1-2-11"
        assert parse_word("1-2-11", 12) == big
        assert parse_word("", 2) == empty_word(2)


class TestDescendants:
    def test_depth_one(self):
        assert set(descendants(w(1), 1)) == {w(1, 1), w(1, 2)}

    def test_cardinality(self):
        assert len(descendants(w(1), 3)) == 8

    def test_lambda_star_full_level_is_empty(self):
        ups = Antichain.from_members([w(1, 1), w(1, 2), w(2, 1), w(2, 2)])
        assert lambda_star(ups) == set()
        for member in ups.members:
            assert not has_proper_descendant_in(member, ups)

    def test_lambda_star_mixed_depth(self):
        ups = Antichain.from_members([w(1), w(2, 1), w(2, 2, 1), w(2, 2, 2)])
        # strict prefixes of members with length >= min member length 1
        assert lambda_star(ups) == {w(2), w(2, 2)}
        assert has_proper_descendant_in(w(2), ups)
        assert not has_proper_descendant_in(w(1), ups)


class TestAntichain:
    def test_comparable_members_rejected(self):
        with pytest.raises(ValueError, match="comparable"):
            Antichain.from_members([w(1), w(1, 2)])

    def test_maximality(self):
        assert Antichain.from_members([w(1), w(2, 1), w(2, 2)]).is_maximal()
        assert not Antichain.from_members([w(1), w(2, 1)]).is_maximal()

    def test_weight_sum_exact(self):
        a = Antichain.from_members([w(1), w(2, 1), w(2, 2)])
        assert a.weight_sum([F(1, 3), F(2, 3)]) == 1


class TestThresholdAntichain:
    def test_uniform_half(self):
        a = threshold_antichain([F(1, 2), F(1, 2)], F(1, 2))
        assert a.members == {w(1, 1), w(1, 2), w(2, 1), w(2, 2)}

    def test_eps_just_above_first_level(self):
        a = threshold_antichain([F(1, 2), F(1, 2)], F(1, 2) + F(1, 1000))
        assert a.members == {w(1), w(2)}

    def test_asymmetric_vs_brute_force(self):
        weights = [F(1, 3), F(2, 3)]
        eps = F(1, 3)
        a = threshold_antichain(weights, eps)

        def wt(word):
            out = F(1)
            for s in word.symbols:
                out *= weights[s - 1]
            return out

        brute = set()
        level = [empty_word(2)]
        for _ in range(6):
            level = [v.child(i) for v in level for i in (1, 2)]
            for word in level:
                if wt(word.parent()) >= eps > wt(word):
                    brute.add(word)
        assert a.members == brute

    def test_member_weight_window(self):
        weights = [F(1, 3), F(2, 3)]
        eps = F(1, 5)
        a = threshold_antichain(weights, eps)
        for word in a.members:
            v = F(1)
            for s in word.symbols:
                v *= weights[s - 1]
            assert eps * F(1, 3) <= v < eps

    def test_eps_validation(self):
        with pytest.raises(ValueError):
            threshold_antichain([F(1, 2), F(1, 2)], F(0))
        with pytest.raises(ValueError):
            threshold_antichain([F(1, 2), F(1, 2)], F(1))
        with pytest.raises(ValueError):
            threshold_antichain([F(1, 2), F(1, 2)], F(3, 2))

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            threshold_antichain([F(1, 2), F(1)], F(1, 4))

    def test_backends_agree(self):
        weights = [F(1, 5), F(2, 5), F(2, 5)]
        eps = F(1, 23)
        exact = threshold_antichain(weights, eps, backend="exact")
        fl = threshold_antichain(weights, eps, backend="float")
        assert exact.members == fl.members

    def test_every_long_word_has_one_predecessor(self):
        weights = [F(1, 3), F(2, 3)]
        a = threshold_antichain(weights, F(1, 7))
        length = a.max_len + 2
        level = [empty_word(2)]
        for _ in range(length):
            level = [v.child(i) for v in level for i in (1, 2)]
        for word in level:
            preds = [m for m in a.members if m.is_prefix_of(word)]
            assert len(preds) == 1


@settings(max_examples=40, deadline=None)
@given(
    num1=st.integers(2, 9),
    den=st.just(10),
    eps_den=st.integers(3, 40),
    depth_seed=st.integers(0, 10_000),
)
def test_threshold_antichain_properties(num1, den, eps_den, depth_seed):
    weights = [F(num1, den), F(den - num1, den)]
    eps = F(1, eps_den)
    a = threshold_antichain(weights, eps)
    assert a.is_maximal()
    assert a.weight_sum(weights) == 1
    stats = threshold_stats(weights, weights, eps)
    assert stats.count == len(a)
    assert stats.min_len == a.min_len
    assert stats.max_len == a.max_len
    assert stats.weight_sum == 1


def test_threshold_stats_full_first_level_at_eps_one():
    stats = threshold_stats([F(1, 2), F(1, 2)], [F(1, 3), F(1, 3)], F(1))
    assert stats.count == 2
    assert stats.min_len == stats.max_len == 1


def test_random_maximal_antichain_is_maximal():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_maximal_antichain(3, rng)
        assert a.is_maximal()
