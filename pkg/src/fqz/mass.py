"""Exact mass calculus for condensation measures.

Cylinder masses obey closed-form identities in both system flavours; this
module evaluates them with a dual backend (exact rationals, or log-space
floats for words too deep for rational arithmetic) and provides the
brute-force enumerations used to cross-check every closed form.

Quantities that mix rational masses with logarithms of rational numbers are
represented exactly by :class:`LogLinear`: a rational linear combination of
``log`` symbols, so hereditary identities can be verified symbolically
instead of at float precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import exp, inf, log
from typing import Iterable, Sequence

import numpy as np

from .symbolic import Word, descendants, empty_word, threshold_antichain
from .systems import CondensationSystem, compose_map

__all__ = [
    "MassValue",
    "LogLinear",
    "mass_case1",
    "mu1",
    "mu1_direct",
    "mass_case2",
    "gamma_sum_mu1",
    "gamma_sum_mu1_enumerated",
    "delta1",
    "delta2",
    "hereditary_log_sum",
    "hereditary_log_sum_enumerated",
    "ball_mass_exponent",
    "certified_ball_constants",
    "empirical_ball_sup",
    "RATIONAL_DEPTH_CAP",
    "ENUMERATION_CAP",
]

# Rational masses are exact but denominators grow with depth; beyond this the
# caller should use the float backend.
RATIONAL_DEPTH_CAP = 64
# Direct enumeration cross-checks are attempted only below this subtree size.
ENUMERATION_CAP = 4096


@dataclass(frozen=True)
class MassValue:
    """A probability mass with a tagged backend.

    ``exact`` carries a Fraction; the float backend stores the natural log of
    the mass (so deep cylinder masses do not underflow).
    """

    log_value: float
    exact: Fraction | None = None

    @classmethod
    def from_fraction(cls, f: Fraction) -> "MassValue":
        if f < 0 or f > 1:
            raise ValueError(f"mass outside [0,1]: {f}")
        lv = -inf if f == 0 else log(f.numerator) - log(f.denominator)
        return cls(lv, f)

    @classmethod
    def from_log(cls, lv: float) -> "MassValue":
        if lv > 1e-12:
            raise ValueError(f"log-mass must be <= 0, got {lv}")
        return cls(min(lv, 0.0), None)

    @property
    def backend(self) -> str:
        return "rational" if self.exact is not None else "log-float"

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return exp(self.log_value)


class LogLinear:
    """An exact rational combination of log-symbols, e.g. 3/4 * log(t_2).

    Symbols are hashable keys (here ("t", i), ("s", i), ("c", i)); values are
    Fractions.  Supports addition, scaling by rationals, exact equality and
    float evaluation against a symbol table.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        self.coeffs: dict = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v != 0:
                    self.coeffs[k] = v

    def __add__(self, other: "LogLinear") -> "LogLinear":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            nv = out.get(k, Fraction(0)) + v
            if nv == 0:
                out.pop(k, None)
            else:
                out[k] = nv
        return LogLinear(out)

    def __sub__(self, other: "LogLinear") -> "LogLinear":
        return self + other.scale(Fraction(-1))

    def scale(self, c: Fraction) -> "LogLinear":
        c = Fraction(c)
        return LogLinear({k: v * c for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LogLinear) and self.coeffs == other.coeffs

    def value(self, table: dict) -> float:
        """Evaluate against {symbol: Fraction-or-float argument of the log}."""
        total = 0.0
        for k, v in self.coeffs.items():
            arg = table[k]
            if isinstance(arg, Fraction):
                lg = log(arg.numerator) - log(arg.denominator)
            else:
                lg = log(arg)
            total += float(v) * lg
        return total

    def __repr__(self) -> str:
        parts = [f"{v}*log{k}" for k, v in sorted(self.coeffs.items())]
        return " + ".join(parts) if parts else "0"


def _require_case(cs: CondensationSystem, case: str) -> None:
    if cs.case != case:
        raise ValueError(f"operation requires a case {case} system, got case {cs.case}")


def _word_products(cs: CondensationSystem, sigma: Word) -> tuple[Fraction, Fraction]:
    """(p_sigma, t_sigma) over the outer alphabet."""
    p = Fraction(1)
    t = Fraction(1)
    for s in sigma.symbols:
        p *= cs.p[s - 1]
        t *= cs.t[s - 1]
    return p, t


def mu1_direct(cs: CondensationSystem, sigma: Word) -> Fraction:
    """Auxiliary-part mass of a cylinder, by its defining sum over split points."""
    _require_case(cs, "I")
    k = len(sigma)
    total = Fraction(0)
    p_prefix = Fraction(1)
    for h in range(k):
        # weight of the suffix starting after position h
        t_suffix = Fraction(1)
        for s in sigma.symbols[h:]:
            t_suffix *= cs.t[s - 1]
        total += cs.p0 * p_prefix * t_suffix
        p_prefix *= cs.p[sigma.symbols[h] - 1]
    return total


def mu1(cs: CondensationSystem, sigma: Word) -> MassValue:
    """Auxiliary-part cylinder mass via the one-step recursion.

    Satisfies mu1(sigma * i) = mu1(sigma) t_i + p0 p_sigma t_i with mu1 of the
    empty word equal to 0, and mass(sigma) = mu1(sigma) + p_sigma.
    """
    _require_case(cs, "I")
    if len(sigma) > RATIONAL_DEPTH_CAP:
        raise ValueError(f"rational backend capped at depth {RATIONAL_DEPTH_CAP}")
    m = Fraction(0)
    p = Fraction(1)
    for s in sigma.symbols:
        ti = cs.t[s - 1]
        m = m * ti + cs.p0 * p * ti
        p *= cs.p[s - 1]
    return MassValue.from_fraction(m)


def mass_case1(cs: CondensationSystem, sigma: Word) -> MassValue:
    """Mass of the cylinder indexed by a nonempty outer word (case I)."""
    _require_case(cs, "I")
    if sigma.is_empty:
        raise ValueError("cylinder word must be nonempty")
    p_sigma, _ = _word_products(cs, sigma)
    m = mu1(cs, sigma)
    assert m.exact is not None
    return MassValue.from_fraction(m.exact + p_sigma)


def mass_case1_log(cs: CondensationSystem, sigma: Word) -> MassValue:
    """Float backend for deep words: the same recursion on log-masses."""
    _require_case(cs, "I")
    lp = 0.0
    lm = -inf
    lp0 = log(float(cs.p0))
    lt = [log(float(v)) for v in cs.t]
    lpv = [log(float(v)) if v > 0 else -inf for v in cs.p]
    for s in sigma.symbols:
        a = lm + lt[s - 1]
        b = lp0 + lp + lt[s - 1]
        lm = max(a, b) + log1p_exp(-abs(a - b)) if min(a, b) > -inf else max(a, b)
        lp = lp + lpv[s - 1]
    total = max(lm, lp) + (log1p_exp(-abs(lm - lp)) if min(lm, lp) > -inf else 0.0)
    return MassValue.from_log(total)


def log1p_exp(x: float) -> float:
    """log(1 + e^x) for x <= 0, stable."""
    return float(np.log1p(np.exp(x)))


def mass_case2(
    cs: CondensationSystem, sigma: Word, omega: Word | None = None
) -> MassValue:
    """Mass of f_sigma(K) (no inner word) or of f_sigma(g_omega(C)) (case II)."""
    _require_case(cs, "II")
    if sigma.alphabet_size != cs.n_outer:
        raise ValueError("sigma must be a word over the outer alphabet")
    p_sigma = Fraction(1)
    for s in sigma.symbols:
        p_sigma *= cs.p[s - 1]
    if omega is None:
        return MassValue.from_fraction(p_sigma)
    if omega.alphabet_size != cs.inner.n:
        raise ValueError("omega must be a word over the inner alphabet")
    t_omega = Fraction(1)
    for s in omega.symbols:
        t_omega *= cs.t[s - 1]
    return MassValue.from_fraction(cs.p0 * p_sigma * t_omega)


def gamma_sum_mu1(
    cs: CondensationSystem, sigma: Word, h: int, verify: bool = False
) -> tuple[Fraction, bool | None]:
    """Sum of the auxiliary-part masses over all depth-h extensions of sigma.

    Closed form: mu1(sigma) + p_sigma (1-p0)(1-(1-p0)^(h-1)) + p0 p_sigma.
    With ``verify`` the sum is re-enumerated when the subtree is small enough;
    the second element reports the cross-check (None when skipped).
    """
    _require_case(cs, "I")
    if h < 1:
        raise ValueError("h must be >= 1")
    p_sigma, _ = _word_products(cs, sigma)
    m = mu1(cs, sigma).exact
    q = 1 - cs.p0
    closed = m + p_sigma * q * (1 - q ** (h - 1)) + cs.p0 * p_sigma
    checked: bool | None = None
    if verify:
        if cs.n_outer**h <= ENUMERATION_CAP:
            brute = sum(
                (mu1(cs, w).exact for w in descendants(sigma, h)), Fraction(0)
            )
            checked = brute == closed
        else:
            checked = None
    return closed, checked


def gamma_sum_mu1_enumerated(cs: CondensationSystem, sigma: Word, h: int) -> Fraction:
    return sum((mu1(cs, w).exact for w in descendants(sigma, h)), Fraction(0))


# ---------------------------------------------------------------------------
# hereditary identities for mass-weighted log sums


def _t_symbols(cs: CondensationSystem) -> list:
    return [("t", i) for i in range(1, cs.n_outer + 1)]


def _log_word(symbol_kind: str, sigma: Word) -> LogLinear:
    coeffs: dict = {}
    for s in sigma.symbols:
        k = (symbol_kind, s)
        coeffs[k] = coeffs.get(k, Fraction(0)) + 1
    return LogLinear(coeffs)


def _u0_like(cs: CondensationSystem, symbol_kind: str) -> LogLinear:
    """sum_i t_i log(x_i) as a LogLinear over the chosen symbol family."""
    return LogLinear({(symbol_kind, i + 1): cs.t[i] for i in range(cs.n_outer)})


def _p_log_sum(cs: CondensationSystem, symbol_kind: str) -> LogLinear:
    """sum_i p_i log(x_i)."""
    return LogLinear({(symbol_kind, i + 1): cs.p[i] for i in range(cs.n_outer)})


def delta_terms(
    cs: CondensationSystem, sigma: Word, h: int, symbol_kind: str
) -> LogLinear:
    """The hereditary correction added to mu1(sigma) log x_sigma when summing
    mu1 log x over the depth-h extensions of sigma.

    ``symbol_kind`` "t" gives the inner-weight flavour, "s" the contraction
    flavour (same expression with the log family swapped).
    """
    _require_case(cs, "I")
    if h < 1:
        raise ValueError("h must be >= 1")
    p_sigma, _ = _word_products(cs, sigma)
    m_sigma = mu1(cs, sigma).exact
    q = 1 - cs.p0
    u_like = _u0_like(cs, symbol_kind)
    log_x_sigma = _log_word(symbol_kind, sigma)
    p_log = _p_log_sum(cs, symbol_kind)

    # sum_{l=2..h} (mu1 + p_sigma(1-p0)(1-(1-p0)^(l-2)) + p0 p_sigma)
    acc = Fraction(0)
    for l in range(2, h + 1):
        acc += m_sigma + p_sigma * q * (1 - q ** (l - 2)) + cs.p0 * p_sigma
    out = u_like.scale(acc)
    out = out + u_like.scale(m_sigma + cs.p0 * p_sigma)
    out = out + log_x_sigma.scale(p_sigma * q * (1 - q ** (h - 1)))
    out = out + log_x_sigma.scale(cs.p0 * p_sigma)
    geom = sum((Fraction(l - 1) * q ** (l - 2) for l in range(2, h + 1)), Fraction(0))
    out = out + p_log.scale(cs.p0 * p_sigma * geom)
    out = out + u_like.scale(p_sigma * q * (1 - q ** (h - 1)))
    return out


def delta1(cs: CondensationSystem, sigma: Word, h: int) -> LogLinear:
    return delta_terms(cs, sigma, h, "t")


def delta2(cs: CondensationSystem, sigma: Word, h: int) -> LogLinear:
    return delta_terms(cs, sigma, h, "s")


def hereditary_log_sum(
    cs: CondensationSystem, sigma: Word, h: int, symbol_kind: str
) -> LogLinear:
    """mu1(sigma) log x_sigma + delta(sigma, h): the closed form for the
    descendant sum of mu1 log x."""
    m_sigma = mu1(cs, sigma).exact
    return _log_word(symbol_kind, sigma).scale(m_sigma) + delta_terms(
        cs, sigma, h, symbol_kind
    )


def hereditary_log_sum_enumerated(
    cs: CondensationSystem, sigma: Word, h: int, symbol_kind: str
) -> LogLinear:
    """The same sum by direct enumeration of the depth-h extensions."""
    total = LogLinear()
    for w in descendants(sigma, h):
        total = total + _log_word(symbol_kind, w).scale(mu1(cs, w).exact)
    return total


def log_symbol_table(cs: CondensationSystem) -> dict:
    """Log-argument values for evaluating LogLinear expressions numerically."""
    table: dict = {}
    for i in range(cs.n_outer):
        table[("s", i + 1)] = cs.outer_ratios[i]
        table[("p", i + 1)] = cs.p[i]
    for i, ti in enumerate(cs.t):
        table[("t", i + 1)] = ti
    if cs.case == "II":
        for i, ci in enumerate(cs.inner_ratios):
            table[("c", i + 1)] = ci
    return table


# ---------------------------------------------------------------------------
# ball-mass exponents


def ball_mass_exponent(cs: CondensationSystem) -> tuple[float, float, float]:
    """(eta1, delta3, delta4): the mass-decay exponent of closed balls.

    Case II uses delta3 = min contraction of either family and delta4 = the
    largest of the inner weights and the outer p_i.  Case I has no printed
    counterpart; we use the one-step mass recursion, whose per-level factor is
    max_i max(t_i, p_i + p0 t_i), against the outer minimum contraction.
    This choice is validated empirically, not quoted from a formula.
    """
    if cs.case == "II":
        delta3 = min(float(min(cs.outer_ratios)), float(min(cs.inner_ratios)))
        delta4 = max(max(float(v) for v in cs.t), max(float(v) for v in cs.p))
    else:
        delta3 = float(min(cs.outer_ratios))
        delta4 = max(
            max(float(t), float(p) + float(cs.p0) * float(t))
            for t, p in zip(cs.t, cs.p)
        )
    eta1 = log(delta4) / log(delta3)
    return eta1, delta3, delta4


def certified_ball_constants(cs: CondensationSystem) -> tuple[float, float]:
    """(lambda1, eta1) with mu(B(x, eps)) <= lambda1 * eps^eta1 certified in 1-D.

    Same-depth refinement pieces are intervals with disjoint interiors and
    length at least dlow * delta3^level, while their masses decay like
    delta4^level; a ball of radius dlow * delta3^l meets at most 5 of them.
    """
    if cs.dim != 1:
        raise ValueError("certified ball constants implemented for dimension 1")
    eta1, delta3, delta4 = ball_mass_exponent(cs)
    if cs.case == "I":
        dlow = _diameter_lower_bound(cs)
    else:
        k_low = _diameter_lower_bound(cs)
        c_low = _inner_diameter_lower_bound(cs)
        dlow = min(k_low, c_low)
    if dlow <= 0:
        raise ValueError("support diameter lower bound is degenerate")
    # mu(B(x, dlow * delta3^l)) <= 5 delta4^l  =>  lambda1 = 5 / (dlow^eta1 * delta4)
    lam = 5.0 / (dlow**eta1 * delta4)
    return max(lam, 1.0), eta1


def _diameter_lower_bound(cs: CondensationSystem) -> float:
    pts = [m.fixed_point()[0] for m in cs.outer]
    if cs.case == "II":
        pts += [m.fixed_point()[0] for m in cs.inner.maps]
    return max(pts) - min(pts)


def _inner_diameter_lower_bound(cs: CondensationSystem) -> float:
    pts = [m.fixed_point()[0] for m in cs.inner.maps]
    return max(pts) - min(pts)


def _support_atoms(cs: CondensationSystem, piece_diam: float):
    """Discretize the measure into cylinder pieces of diameter <= piece_diam.

    Returns (centers, masses) float arrays; masses sum to 1 exactly up to
    float rounding.  1-D only.
    """
    from .quantizer import refine_to_diameter  # local import, no cycle at runtime

    pieces = refine_to_diameter(cs, piece_diam)
    centers = np.array([p.box.center[0] for p in pieces])
    masses = np.array([float(p.mass) for p in pieces])
    order = np.argsort(centers)
    return centers[order], masses[order]


def empirical_ball_sup(
    cs: CondensationSystem, eps: float, grid_resolution: int = 512
) -> float:
    """max over grid centers of the discretized mass of the closed eps-ball.

    The measure is discretized into cylinder pieces of diameter <= eps/10;
    grid centers are the piece centers plus midpoints between neighbours.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0,1)")
    if grid_resolution < 16:
        raise ValueError(f"grid resolution {grid_resolution} too coarse for eps={eps}")
    centers, masses = _support_atoms(cs, eps / 10.0)
    mids = (centers[1:] + centers[:-1]) / 2.0
    grid = np.unique(np.concatenate([centers, mids]))
    if grid.size > grid_resolution:
        idx = np.linspace(0, grid.size - 1, grid_resolution).astype(int)
        grid = np.union1d(grid[idx], centers[np.argsort(masses)[-64:]])
    csum = np.concatenate([[0.0], np.cumsum(masses)])
    lo = np.searchsorted(centers, grid - eps, side="left")
    hi = np.searchsorted(centers, grid + eps, side="right")
    return float(np.max(csum[hi] - csum[lo]))


def fitted_lambda1(
    cs: CondensationSystem, eps_grid: Sequence[float] | None = None
) -> tuple[float, float, list[tuple[float, float]]]:
    """Fit lambda1 as the max of sup/eps^eta1 over an eps grid.

    Returns (lambda1, eta1, [(eps, sup)...]).
    """
    eta1, _, _ = ball_mass_exponent(cs)
    if eps_grid is None:
        eps_grid = [2.0**-k for k in range(3, 13)]
    rows = [(e, empirical_ball_sup(cs, e)) for e in eps_grid]
    lam = max(s / e**eta1 for e, s in rows)
    return lam, eta1, rows
