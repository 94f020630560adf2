"""Antichain level families and the ratio sequences that certify convergence.

For case I systems the families are threshold antichains in the inner weights;
for case II they are threshold antichains in the outer branch masses, together
with one inner antichain per proper ancestor.  Cardinalities, depth statistics
and mass-weighted log sums are gathered during a single descent; inner
antichain statistics are memoized per residual threshold, which collapses the
per-ancestor work to a small number of distinct subproblems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Iterable, Sequence

from .mass import mu1
from .symbolic import (
    Antichain,
    ThresholdStats,
    Word,
    threshold_antichain,
    threshold_stats,
)
from .systems import CondensationSystem

__all__ = [
    "CardinalityCapExceeded",
    "LevelFamily",
    "RatioSequence",
    "level_family",
    "check_count_bounds",
    "check_count_growth",
    "ratio_dk",
    "ratio_eta_j",
    "ratio_xi_j",
    "antichain_log_identity",
    "convergence_report",
    "cover_family",
    "mass_partition_sum",
    "DEFAULT_CARDINALITY_CAP",
]

DEFAULT_CARDINALITY_CAP = 2**24


class CardinalityCapExceeded(RuntimeError):
    """A family's predicted cardinality exceeds the configured cap."""

    def __init__(self, predicted: float, cap: int, what: str):
        self.predicted = predicted
        self.cap = cap
        super().__init__(
            f"{what}: predicted cardinality bound {predicted:.4g} exceeds cap {cap}"
        )


def _flog(f: Fraction) -> float:
    return log(f.numerator) - log(f.denominator)


@dataclass
class _PsiEntry:
    """One proper ancestor in a case II family."""

    depth: int
    p: Fraction
    log_p: float
    log_s: float
    word: Word | None = None


@dataclass(frozen=True)
class LevelFamily:
    """Level-j antichain family with cached counts, depths and weighted sums."""

    case: str
    j: int
    count: int                       # phi_j (case I) or psi_j = card Gamma_j (case II)
    min_len: int
    max_len: int
    p_sum: Fraction                  # sum of p_sigma over the antichain
    mu_logt: float                   # case I: sum mu(E_sigma) log t_sigma
    mu_logs: float                   # case I: sum mu(E_sigma) log s_sigma
    mu_sum: float
    p_logt: float
    p_logs: float
    members: Antichain | None = None
    # case II extras
    m_total: int = 0                 # M_j = psi_j + sum psi_j(sigma)
    psi_inner_count: int = 0         # sum over ancestors of card of inner antichain
    psi_p_sum: Fraction = Fraction(0)  # sum of p_sigma over the ancestor set
    q_closure: Fraction = Fraction(0)  # p_sum + p0 * psi_p_sum
    t_parts: tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_parts: tuple[float, float, float] = (0.0, 0.0, 0.0)
    inner_diameter: float = 0.0      # |C| used inside the r-part logs
    psi_entries: tuple[_PsiEntry, ...] = ()

    @property
    def codebook_size(self) -> int:
        return self.count if self.case == "I" else self.m_total


def _predicted_bound(cs: CondensationSystem, j: int) -> float:
    if cs.case == "I":
        t_floor = float(min(cs.t))
        return t_floor ** -(j + 1)
    qf = float(cs.q_floor())
    n1 = (2.0 - float(cs.p0)) / (float(cs.p0) * qf)
    return n1 * qf**-j


def level_family(
    cs: CondensationSystem,
    j: int,
    collect_words: bool = False,
    cap: int = DEFAULT_CARDINALITY_CAP,
) -> LevelFamily:
    """Build the level-j family for either case.

    ``collect_words`` additionally materializes the antichain members (and,
    for case II, the ancestor words), which larger callers avoid.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    predicted = _predicted_bound(cs, j)
    if predicted > cap:
        raise CardinalityCapExceeded(predicted, cap, f"level family j={j}")
    if cs.case == "I":
        return _case1_family(cs, j, collect_words)
    return _case2_family(cs, j, collect_words)


def _case1_family(cs: CondensationSystem, j: int, collect_words: bool) -> LevelFamily:
    t = cs.t
    n = cs.n_outer
    eps = min(t) ** j
    p0 = cs.p0
    p0f = float(p0)
    pf = [float(v) for v in cs.p]
    log_t = [_flog(v) for v in t]
    log_s = [_flog(r) for r in cs.outer_ratios]

    count = 0
    min_len: int | None = None
    max_len = 0
    p_sum = Fraction(0)
    mu_logt = mu_logs = mu_sum = 0.0
    p_logt = p_logs = 0.0
    words: list[Word] = []

    # Iterative DFS; each stack entry is (symbols, t-weight, p exact, p float,
    # mu1 float, log t, log s).
    stack = [((), Fraction(1), Fraction(1), 1.0, 0.0, 0.0, 0.0)]
    while stack:
        syms, tw, p_ex, p_fl, m1, lt, ls = stack.pop()
        for i in range(n - 1, -1, -1):
            ctw = tw * t[i]
            c_m1 = (m1 + p0f * p_fl) * float(t[i])
            c_p_fl = p_fl * pf[i]
            c_lt = lt + log_t[i]
            c_ls = ls + log_s[i]
            if ctw < eps:
                count += 1
                depth = len(syms) + 1
                min_len = depth if min_len is None else min(min_len, depth)
                max_len = max(max_len, depth)
                c_p_ex = p_ex * cs.p[i]
                p_sum += c_p_ex
                mass = c_m1 + c_p_fl
                mu_sum += mass
                mu_logt += mass * c_lt
                mu_logs += mass * c_ls
                p_logt += c_p_fl * c_lt
                p_logs += c_p_fl * c_ls
                if collect_words:
                    words.append(Word(syms + (i + 1,), n))
            else:
                stack.append(
                    (syms + (i + 1,), ctw, p_ex * cs.p[i], c_p_fl, c_m1, c_lt, c_ls)
                )
    members = Antichain.from_members(words, n) if collect_words else None
    return LevelFamily(
        case="I",
        j=j,
        count=count,
        min_len=min_len or 0,
        max_len=max_len,
        p_sum=p_sum,
        mu_logt=mu_logt,
        mu_logs=mu_logs,
        mu_sum=mu_sum,
        p_logt=p_logt,
        p_logs=p_logs,
        members=members,
    )


def _case2_family(cs: CondensationSystem, j: int, collect_words: bool) -> LevelFamily:
    n = cs.n_outer
    qf = cs.q_floor()
    eps = qf**j
    p0 = cs.p0
    log_p = [_flog(v) for v in cs.p]
    log_s = [_flog(r) for r in cs.outer_ratios]

    count = 0
    min_len: int | None = None
    max_len = 0
    p_sum = Fraction(0)
    p_logp = p_logs = 0.0
    words: list[Word] = []
    psi: list[_PsiEntry] = []

    stack = [((), Fraction(1), 0.0, 0.0)]
    while stack:
        syms, p_ex, lp, ls = stack.pop()
        psi.append(
            _PsiEntry(
                depth=len(syms),
                p=p_ex,
                log_p=lp,
                log_s=ls,
                word=Word(syms, n) if collect_words else None,
            )
        )
        for i in range(n - 1, -1, -1):
            c_p = p_ex * cs.p[i]
            c_lp = lp + log_p[i]
            c_ls = ls + log_s[i]
            if c_p < eps:
                count += 1
                depth = len(syms) + 1
                min_len = depth if min_len is None else min(min_len, depth)
                max_len = max(max_len, depth)
                p_sum += c_p
                p_logp += float(c_p) * c_lp
                p_logs += float(c_p) * c_ls
                if collect_words:
                    words.append(Word(syms + (i + 1,), n))
            else:
                stack.append((syms + (i + 1,), c_p, c_lp, c_ls))

    l1j = min_len or 0
    inner_diam = cs.inner_attractor_box().diameter
    log_c_diam = log(inner_diam)
    lp0 = _flog(p0)

    memo: dict = {}
    t1 = t2 = r1 = r2 = 0.0
    inner_count_total = 0
    psi_p_sum = Fraction(0)
    for entry in psi:
        psi_p_sum += entry.p
        stats = threshold_stats(cs.t, cs.inner_ratios, eps / entry.p, _memo=memo)
        inner_count_total += stats.count
        w = float(p0 * entry.p)
        # inner member weights sum to 1, so the sigma-level log factors enter once
        t_term = w * ((lp0 + entry.log_p) + stats.weight_log_weight)
        r_term = w * ((entry.log_s + log_c_diam) + stats.weight_log_aux)
        if entry.depth < l1j:
            t1 += t_term
            r1 += r_term
        else:
            t2 += t_term
            r2 += r_term
    q_closure = p_sum + p0 * psi_p_sum

    members = Antichain.from_members(words, n) if collect_words else None
    return LevelFamily(
        case="II",
        j=j,
        count=count,
        min_len=l1j,
        max_len=max_len,
        p_sum=p_sum,
        mu_logt=0.0,
        mu_logs=0.0,
        mu_sum=float(p_sum),
        p_logt=p_logp,
        p_logs=p_logs,
        members=members,
        m_total=count + inner_count_total,
        psi_inner_count=inner_count_total,
        psi_p_sum=psi_p_sum,
        q_closure=q_closure,
        t_parts=(t1, t2, p_logp),
        r_parts=(r1, r2, p_logs),
        inner_diameter=inner_diam,
        psi_entries=tuple(psi) if collect_words else (),
    )


def mass_partition_sum(cs: CondensationSystem, antichain: Antichain) -> Fraction:
    """Exact sum of cylinder masses over a maximal antichain (case I)."""
    from .mass import mass_case1

    total = Fraction(0)
    for w in antichain.members:
        total += mass_case1(cs, w).exact
    return total


# ---------------------------------------------------------------------------
# cardinality / depth bound checks


@dataclass(frozen=True)
class BoundCheck:
    name: str
    ok: bool
    detail: str
    slack: float


def check_count_bounds(cs: CondensationSystem, fam: LevelFamily) -> list[BoundCheck]:
    """All per-level cardinality and depth bounds, checked exactly."""
    out: list[BoundCheck] = []
    j = fam.j
    if fam.case == "I":
        t_floor = min(cs.t)
        t_ceil = max(cs.t)
        lo = t_floor**-j
        hi = t_floor ** -(j + 1)
        ok = lo <= fam.count <= hi
        out.append(
            BoundCheck(
                "count_window",
                ok,
                f"{float(lo):.6g} <= {fam.count} <= {float(hi):.6g}",
                min(fam.count - float(lo), float(hi) - fam.count),
            )
        )
        ok = j <= fam.min_len <= fam.max_len
        out.append(
            BoundCheck("depth_floor", ok, f"j={j} <= {fam.min_len} <= {fam.max_len}", fam.min_len - j)
        )
        # max depth vs 2 j log(t_floor)/log(t_ceil), compared via powers
        ok = t_ceil**fam.max_len >= t_floor ** (2 * j)
        b1 = 2 * _flog(t_floor) / _flog(t_ceil)
        out.append(
            BoundCheck("depth_ceiling", ok, f"{fam.max_len} <= {b1:.4g}*j", b1 * j - fam.max_len)
        )
        rhs = (1 - cs.p0) ** fam.min_len
        ok = fam.p_sum <= rhs
        out.append(
            BoundCheck(
                "branch_mass_tail",
                ok,
                f"sum p_sigma = {float(fam.p_sum):.6g} <= (1-p0)^{fam.min_len} = {float(rhs):.6g}",
                float(rhs - fam.p_sum),
            )
        )
        s_ceil = float(max(cs.outer_ratios))
        lhs = abs(fam.mu_logs)
        rhs_f = float(cs.p0) * j * (-log(s_ceil))
        out.append(
            BoundCheck(
                "log_contraction_growth",
                lhs >= rhs_f,
                f"|sum mu log s| = {lhs:.6g} >= p0*j*log(1/s_max) = {rhs_f:.6g}",
                lhs - rhs_f,
            )
        )
    else:
        qf = cs.q_floor()
        p_ceil = max(max(cs.p), max(cs.t))
        ok = j <= fam.min_len <= fam.max_len
        out.append(
            BoundCheck("depth_floor", ok, f"j={j} <= {fam.min_len} <= {fam.max_len}", fam.min_len - j)
        )
        ok = p_ceil**fam.max_len >= qf ** (2 * j)
        b = 2 * _flog(qf) / _flog(p_ceil)
        out.append(
            BoundCheck("depth_ceiling", ok, f"{fam.max_len} <= {b:.4g}*j", b * j - fam.max_len)
        )
        n1 = (2 - cs.p0) / (cs.p0 * qf)
        lo = cs.p0 * qf**-j
        hi = n1 * qf**-j
        ok = lo <= fam.m_total <= hi
        out.append(
            BoundCheck(
                "codebook_count_window",
                ok,
                f"{float(lo):.6g} <= M_j={fam.m_total} <= {float(hi):.6g}",
                min(fam.m_total - float(lo), float(hi) - fam.m_total),
            )
        )
        ok = fam.q_closure == 1
        out.append(
            BoundCheck(
                "mass_closure",
                ok,
                f"antichain mass + p0 * ancestor mass = {float(fam.q_closure):.12g}",
                abs(1.0 - float(fam.q_closure)),
            )
        )
        ok = cs.p0 <= fam.q_closure <= 2 - cs.p0
        out.append(
            BoundCheck(
                "closure_window",
                ok,
                f"p0 <= {float(fam.q_closure):.6g} <= 2 - p0",
                float(min(fam.q_closure - cs.p0, 2 - cs.p0 - fam.q_closure)),
            )
        )
    return out


def check_count_growth(
    cs: CondensationSystem, fam_j: LevelFamily, fam_j1: LevelFamily
) -> list[BoundCheck]:
    """Monotone growth of the level counts between consecutive j."""
    out = []
    if fam_j.case == "I":
        t_floor = min(cs.t)
        ok = fam_j.count <= fam_j1.count <= t_floor**-2 * fam_j.count
        out.append(
            BoundCheck(
                "count_growth",
                ok,
                f"{fam_j.count} <= {fam_j1.count} <= {float(t_floor ** -2):.4g}*{fam_j.count}",
                float(t_floor**-2 * fam_j.count - fam_j1.count),
            )
        )
    else:
        qf = cs.q_floor()
        n1 = (2 - cs.p0) / (cs.p0 * qf)
        n2 = n1 / (cs.p0 * qf)
        ok = fam_j.m_total <= fam_j1.m_total <= n2 * fam_j.m_total
        out.append(
            BoundCheck(
                "codebook_count_growth",
                ok,
                f"{fam_j.m_total} <= {fam_j1.m_total} <= {float(n2):.4g}*{fam_j.m_total}",
                float(n2 * fam_j.m_total - fam_j1.m_total),
            )
        )
    return out


# ---------------------------------------------------------------------------
# ratio sequences


@dataclass(frozen=True)
class RatioSequence:
    kind: str                  # "d_k", "eta_j" or "xi_j"
    index: int
    numerator: float
    denominator: float
    value: float
    deviation_is_exactly_zero: bool
    count: int
    min_len: int
    max_len: int
    components: dict | None = None

    @classmethod
    def build(cls, kind, index, num, den, exact_zero, count, lens, components=None):
        if not (num < 0 and den < 0):
            raise ArithmeticError(
                f"{kind}[{index}]: numerator/denominator must both be negative, "
                f"got {num:.6g}/{den:.6g}"
            )
        return cls(kind, index, num, den, num / den, exact_zero, count, lens[0], lens[1], components)


def _uniform_collapse(cs: CondensationSystem) -> bool:
    """True when all inner weights coincide and all carrier ratios coincide;
    then every mass-weighted log ratio collapses to the dimension exactly."""
    ratios = cs.outer_ratios if cs.case == "I" else cs.inner_ratios
    return len(set(cs.t)) == 1 and len(set(ratios)) == 1


def ratio_dk(cs: CondensationSystem, k: int, cap: int = DEFAULT_CARDINALITY_CAP) -> RatioSequence:
    """Mass-weighted log ratio over the full level k (case I)."""
    if cs.case != "I":
        raise ValueError("d_k is defined for case I systems")
    if k < 1:
        raise ValueError("k must be >= 1")
    n = cs.n_outer
    if n**k > cap:
        raise CardinalityCapExceeded(n**k, cap, f"full level k={k}")
    p0f = float(cs.p0)
    pf = [float(v) for v in cs.p]
    tf = [float(v) for v in cs.t]
    log_t = [_flog(v) for v in cs.t]
    log_s = [_flog(r) for r in cs.outer_ratios]
    num = den = 0.0
    stack = [(0, 1.0, 0.0, 0.0, 0.0)]
    while stack:
        depth, p_fl, m1, lt, ls = stack.pop()
        for i in range(n):
            c_m1 = (m1 + p0f * p_fl) * tf[i]
            c_p = p_fl * pf[i]
            c_lt = lt + log_t[i]
            c_ls = ls + log_s[i]
            if depth + 1 == k:
                mass = c_m1 + c_p
                num += mass * c_lt
                den += mass * c_ls
            else:
                stack.append((depth + 1, c_p, c_m1, c_lt, c_ls))
    return RatioSequence.build(
        "d_k", k, num, den, _uniform_collapse(cs), n**k, (k, k)
    )


def ratio_eta_j(
    cs: CondensationSystem, j: int, fam: LevelFamily | None = None,
    cap: int = DEFAULT_CARDINALITY_CAP,
) -> RatioSequence:
    """Mass-weighted log ratio over the level-j antichain (case I)."""
    if cs.case != "I":
        raise ValueError("eta_j is defined for case I systems")
    fam = fam or level_family(cs, j, cap=cap)
    return RatioSequence.build(
        "eta_j", j, fam.mu_logt, fam.mu_logs, _uniform_collapse(cs),
        fam.count, (fam.min_len, fam.max_len),
    )


def ratio_xi_j(
    cs: CondensationSystem, j: int, fam: LevelFamily | None = None,
    cap: int = DEFAULT_CARDINALITY_CAP,
) -> RatioSequence:
    """The case II ratio built from the three numerator and denominator parts."""
    if cs.case != "II":
        raise ValueError("xi_j is defined for case II systems")
    fam = fam or level_family(cs, j, cap=cap)
    num = sum(fam.t_parts)
    den = sum(fam.r_parts)
    comps = {
        "t1": fam.t_parts[0], "t2": fam.t_parts[1], "t3": fam.t_parts[2],
        "r1": fam.r_parts[0], "r2": fam.r_parts[1], "r3": fam.r_parts[2],
        "inner_diameter": fam.inner_diameter,
    }
    return RatioSequence.build(
        "xi_j", j, num, den, False, fam.m_total, (fam.min_len, fam.max_len), comps
    )


# ---------------------------------------------------------------------------
# the antichain log identity


def antichain_log_identity(
    t_weights: Sequence[Fraction],
    c_weights: Sequence[Fraction],
    gamma: Antichain,
) -> tuple[float, float, bool]:
    """Both sides of the weighted log identity over a maximal antichain.

    Returns (lhs, rhs, exact) where lhs uses sum t log c as outer factor of
    the member t-log sum, rhs the mirrored pairing, and ``exact`` reports the
    symbol-level identity t_b * A_a == t_a * A_b for the member symbol-count
    coefficients A (equivalent to lhs == rhs as an exact combination of logs).
    """
    t = [Fraction(v) for v in t_weights]
    c = [Fraction(v) for v in c_weights]
    if len(t) != len(c):
        raise ValueError("weight vectors must have equal length")
    if len(t) != gamma.alphabet_size:
        raise ValueError("weights do not match the antichain alphabet")
    if not gamma.is_maximal():
        raise ValueError("identity requires a maximal antichain")
    m = len(t)
    # A[i] = sum over members of t_rho * (occurrences of symbol i+1)
    A = [Fraction(0)] * m
    sum_t_log_t = 0.0
    sum_t_log_c = 0.0
    log_t = [_flog(v) for v in t]
    log_c = [_flog(v) for v in c]
    for w in gamma.members:
        t_rho = Fraction(1)
        for s in w.symbols:
            t_rho *= t[s - 1]
        lt = sum(log_t[s - 1] for s in w.symbols)
        lc = sum(log_c[s - 1] for s in w.symbols)
        ft = float(t_rho)
        sum_t_log_t += ft * lt
        sum_t_log_c += ft * lc
        for s in w.symbols:
            A[s - 1] += t_rho
    u0 = sum(float(ti) * log_t[i] for i, ti in enumerate(t))
    l0 = sum(float(ti) * log_c[i] for i, ti in enumerate(t))
    lhs = l0 * sum_t_log_t
    rhs = u0 * sum_t_log_c
    exact = all(
        t[b] * A[a] == t[a] * A[b] for a in range(m) for b in range(a + 1, m)
    )
    return lhs, rhs, exact


# ---------------------------------------------------------------------------
# convergence diagnostics


@dataclass(frozen=True)
class ConvergenceRow:
    kind: str
    j: int
    count: int
    min_depth: int
    max_depth: int
    value: float
    deviation: float
    scaled_deviation: float
    passed: bool


def _stabilizes(scaled: list[float], ratio: float = 1.2) -> bool:
    """Running-max stabilization: the late-half max must not exceed the
    early-half max by more than the given factor (identically-zero passes)."""
    if all(v == 0.0 for v in scaled):
        return True
    jmax = len(scaled)
    half = max(1, jmax // 2)
    early = max(scaled[:half])
    late = max(scaled[half - 1:])
    if early == 0.0:
        return late == 0.0
    return late <= ratio * early


def convergence_report(
    cs: CondensationSystem,
    jmax: int,
    cap: int = DEFAULT_CARDINALITY_CAP,
) -> list[ConvergenceRow]:
    """Rows (kind, j, ..., j*|value - d0|, pass) for each ratio family.

    The pass flag is per kind: the scaled deviations must stabilize in the
    running-max sense, or vanish identically.
    """
    from .systems import u0_l0_d0

    _, _, d0 = u0_l0_d0(cs)
    rows: list[ConvergenceRow] = []
    kinds: list[tuple[str, list[RatioSequence]]] = []
    if cs.case == "I":
        kinds.append(("d_k", [ratio_dk(cs, k, cap=cap) for k in range(1, jmax + 1)]))
        fams = [level_family(cs, j, cap=cap) for j in range(1, jmax + 1)]
        kinds.append(("eta_j", [ratio_eta_j(cs, j, fam=f) for j, f in enumerate(fams, 1)]))
    else:
        fams = [level_family(cs, j, cap=cap) for j in range(1, jmax + 1)]
        kinds.append(("xi_j", [ratio_xi_j(cs, j, fam=f) for j, f in enumerate(fams, 1)]))
    for kind, seq in kinds:
        devs = []
        for rs in seq:
            dev = 0.0 if rs.deviation_is_exactly_zero else abs(rs.value - d0)
            devs.append(dev * rs.index)
        passed = _stabilizes(devs)
        for rs, sd in zip(seq, devs):
            dev = 0.0 if rs.deviation_is_exactly_zero else abs(rs.value - d0)
            rows.append(
                ConvergenceRow(
                    kind, rs.index, rs.count, rs.min_len, rs.max_len,
                    rs.value, dev, sd, passed,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# scale-eps cover families (case II support decomposition)


@dataclass(frozen=True)
class CoverFamily:
    eps: Fraction
    outer: Antichain                    # words where the contraction first drops below eps
    psi: tuple[Word, ...]               # proper ancestors, by increasing depth
    inner: dict[Word, Antichain]        # per-ancestor inner antichains


def cover_family(
    cs: CondensationSystem, eps: Fraction | float, cap: int = DEFAULT_CARDINALITY_CAP
) -> CoverFamily:
    """The eps-scale decomposition of a case II support into map pieces."""
    if cs.case != "II":
        raise ValueError("cover families are defined for case II systems")
    eps_f = Fraction(eps) if not isinstance(eps, Fraction) else eps
    if not (0 < eps_f < 1):
        raise ValueError("eps must lie in (0, 1)")
    # conservative cap guard via the count bound 1/eps per unit dimension
    if 1.0 / float(eps_f) > cap:
        raise CardinalityCapExceeded(1.0 / float(eps_f), cap, "cover family")
    s_weights = cs.outer_ratios
    outer = threshold_antichain(s_weights, eps_f)
    psi: list[Word] = []
    seen: set[tuple[int, ...]] = set()
    for w in outer.members:
        for k in range(len(w)):
            if w.symbols[:k] not in seen:
                seen.add(w.symbols[:k])
                psi.append(w.truncate(k))
    psi.sort(key=lambda w: (len(w), w.symbols))
    inner: dict[Word, Antichain] = {}
    for w in psi:
        s_sigma = Fraction(1)
        for s in w.symbols:
            s_sigma *= s_weights[s - 1]
        target = eps_f / s_sigma
        members = _threshold_members_allow_one(cs.inner_ratios, target, cs.inner.n)
        inner[w] = Antichain.from_members(members, cs.inner.n)
    return CoverFamily(eps_f, outer, tuple(psi), inner)


def _threshold_members_allow_one(
    weights: Sequence[Fraction], eps: Fraction, n: int
) -> list[Word]:
    """Threshold antichain allowing eps = 1 (full first level)."""
    if eps == 1:
        return [Word((i,), n) for i in range(1, n + 1)]
    members: list[Word] = []

    def walk(prefix: tuple[int, ...], w: Fraction) -> None:
        for i in range(1, n + 1):
            cw = w * weights[i - 1]
            if cw < eps:
                members.append(Word(prefix + (i,), n))
            else:
                walk(prefix + (i,), cw)

    walk((), Fraction(1))
    return members
