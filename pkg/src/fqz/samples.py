"""Seeded generators for random 1-D condensation systems.

The diagnostic suites run lemma identities and bound checks on batches of
random systems.  Generated systems keep their weight floors away from zero so
level families stay enumerable, and their maps are packed into [0,1] with
positive gaps so separation conditions hold by construction.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .systems import Box, CondensationSystem, Similitude, SimilitudeSystem

__all__ = ["random_case1_system", "random_case2_system", "random_probability_vector"]


def random_probability_vector(
    rng: np.random.Generator, n: int, floor: Fraction, denom: int = 24
) -> tuple[Fraction, ...]:
    """A random exact probability vector with every entry >= floor."""
    floor = Fraction(floor)
    if n * floor >= 1:
        raise ValueError("floor too large for the vector length")
    # draw integer masses on a common denominator, then push up to the floor
    while True:
        raw = rng.integers(1, denom, size=n)
        total = int(raw.sum())
        vec = [Fraction(int(v), total) for v in raw]
        deficit = Fraction(0)
        for i, v in enumerate(vec):
            if v < floor:
                deficit += floor - v
                vec[i] = floor
        k = max(range(n), key=lambda i: vec[i])
        vec[k] -= deficit
        if vec[k] >= floor and sum(vec) == 1:
            return tuple(vec)


def _packed_maps(
    rng: np.random.Generator, n: int, ratio_lo: Fraction, ratio_hi: Fraction
) -> tuple[tuple[Similitude, ...], Box]:
    """n contractions on [0,1] with equal positive gaps between their images."""
    denom = 60
    ratios = []
    for _ in range(n):
        lo_i = int(ratio_lo * denom)
        hi_i = int(ratio_hi * denom)
        ratios.append(Fraction(int(rng.integers(lo_i, hi_i + 1)), denom))
    total = sum(ratios)
    if total >= 1:
        scale = Fraction(9, 10) / total
        ratios = [r * scale for r in ratios]
        total = sum(ratios)
    gap = (1 - total) / n  # n gaps: between images and before the last endpoint
    maps = []
    offset = Fraction(0)
    for i, r in enumerate(ratios):
        maps.append(Similitude(r, (float(offset),)))
        offset += r + gap
    return tuple(maps), Box((0.0,), (1.0,))


def random_case1_system(seed: int) -> CondensationSystem:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    maps, witness = _packed_maps(rng, n, Fraction(1, 5), Fraction(1, 3))
    t_floor = Fraction(3, 10) if n == 2 else Fraction(11, 50)
    t = random_probability_vector(rng, n, t_floor)
    p_all = random_probability_vector(rng, n + 1, Fraction(1, 8))
    inner = SimilitudeSystem(maps, t, witness)
    return CondensationSystem(
        outer=maps, p0=p_all[0], p=tuple(p_all[1:]), case="I", inner=inner,
        outer_witness=witness,
    )


def random_case2_system(seed: int) -> CondensationSystem:
    rng = np.random.default_rng(seed)
    n = 2
    # outer maps pinned at the ends of [0,1]; the middle gap hosts the inner set
    denom = 40
    r1 = Fraction(int(rng.integers(8, 13)), denom)
    r2 = Fraction(int(rng.integers(8, 13)), denom)
    maps = (
        Similitude(r1, (0.0,)),
        Similitude(r2, (float(1 - r2),)),
    )
    witness = Box((0.0,), (1.0,))
    # inner witness strictly inside the middle gap, with padding on both sides
    pad = (1 - r2 - r1) * Fraction(1, 10)
    lo = r1 + pad
    hi = 1 - r2 - pad
    width = hi - lo
    c = Fraction(int(rng.integers(4, 9)), 100)
    # two inner images of (lo, hi), width c*width each, equal gaps between them
    gp = (width - 2 * c * width) / 3
    b1 = lo + gp - c * lo
    b2 = lo + 2 * gp + c * width - c * lo
    g1 = Similitude(c, (float(b1),))
    g2 = Similitude(c, (float(b2),))
    t = random_probability_vector(rng, 2, Fraction(3, 10))
    p_all = random_probability_vector(rng, n + 1, Fraction(1, 4))
    inner = SimilitudeSystem((g1, g2), t, Box((float(lo),), (float(hi),)))
    return CondensationSystem(
        outer=maps, p0=p_all[0], p=tuple(p_all[1:]), case="II", inner=inner,
        outer_witness=witness,
    )
