"""Geometric-mean-error machinery for condensation measures.

The central engineering fact: any discrete approximation of the measure has
geometric mean error zero (a codebook point on an atom drives the log
integral to minus infinity), so every error evaluation here brackets the
integral against the *continuous* measure.  A worklist of cylinder pieces is
refined until the bracket width meets the requested tolerance; pieces whose
enclosure touches a codebook point are finished off with a certified
ball-mass tail bound instead of being refined forever.

Lower bounds on the optimal error come from two certified sources: an
exhaustive 1-D oracle for tiny codebooks (assignment relaxation over pieces,
globally minimized with Lipschitz-safe grid search), and a recursive
splitting bound over cylinders for larger sizes, anchored at the oracle
values.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import exp, inf, log, sqrt
from typing import Iterable, Sequence

import numpy as np

from .asymptotics import LevelFamily, level_family
from .symbolic import Word
from .systems import Box, CondensationSystem, Similitude, compose_map

logger = logging.getLogger(__name__)

__all__ = [
    "Codebook",
    "ErrorBracket",
    "BracketBudgetExceeded",
    "log_dist_integral",
    "monte_carlo_integral",
    "sample_ism",
    "codebook_from_antichain",
    "lloyd0",
    "oracle_optimal_1d",
    "oracle_lower_bound",
    "hat_e_lower_table",
    "coefficient_table",
    "sandwich_check",
    "refine_to_diameter",
    "refine_to_count",
]

DEFAULT_BRACKET_TOL = 1e-3
DEFAULT_MC_SAMPLES = 100_000
DEFAULT_LLOYD_ITERATIONS = 30
MAX_PIECES = 600_000


class BracketBudgetExceeded(RuntimeError):
    def __init__(self, message: str, best: "ErrorBracket"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Codebook:
    """A finite set of distinct points in R^q, kept sorted in 1-D."""

    points: tuple[tuple[float, ...], ...]

    @classmethod
    def from_points(cls, pts: Iterable[Sequence[float]]) -> "Codebook":
        uniq = sorted({tuple(float(v) for v in p) for p in pts})
        if not uniq:
            raise ValueError("codebook needs at least one point")
        return cls(tuple(uniq))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def coords_1d(self) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("1-D coordinates requested from a higher-dim codebook")
        return np.asarray([p[0] for p in self.points], dtype=float)


@dataclass(frozen=True)
class ErrorBracket:
    """Certified interval for a log-distance integral (natural log)."""

    lower: float
    upper: float
    method: str = "rigorous"      # or "monteCarlo"
    stderr: float | None = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"bracket inverted: [{self.lower}, {self.upper}]")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


# ---------------------------------------------------------------------------
# cylinder pieces


class Piece:
    """One cylinder piece of the support decomposition: an affine image of a
    base enclosure box, with its exact measure share."""

    __slots__ = ("pid", "kind", "scale", "rot", "offset", "lo", "hi", "mass", "m1", "p")

    def __init__(self, pid, kind, scale, rot, offset, lo, hi, mass, m1=0.0, p=0.0):
        self.pid = pid          # tuple of ints; -1 separates outer from inner symbols
        self.kind = kind        # "E" (case I), "K" or "C" (case II)
        self.scale = scale      # composed contraction ratio (float)
        self.rot = rot          # composed rotation matrix or None
        self.offset = offset    # tuple of floats
        self.lo = lo            # enclosure corners (tuples of floats)
        self.hi = hi
        self.mass = mass
        self.m1 = m1            # case I auxiliary mass part
        self.p = p              # branch product part

    @property
    def box(self) -> Box:
        return Box(self.lo, self.hi)

    @property
    def width(self) -> float:
        return max(h - l for l, h in zip(self.lo, self.hi))


def _apply_affine(scale, rot, offset, base_lo, base_hi):
    """Bounding box of the affine image of the base box."""
    q = len(base_lo)
    if rot is None:
        lo = []
        hi = []
        for k in range(q):
            a = scale * base_lo[k] + offset[k]
            b = scale * base_hi[k] + offset[k]
            lo.append(min(a, b))
            hi.append(max(a, b))
        return tuple(lo), tuple(hi)
    A = scale * np.asarray(rot)
    blo = np.asarray(base_lo)
    bhi = np.asarray(base_hi)
    c1 = A * blo[None, :]
    c2 = A * bhi[None, :]
    lo = np.minimum(c1, c2).sum(axis=1) + np.asarray(offset)
    hi = np.maximum(c1, c2).sum(axis=1) + np.asarray(offset)
    return tuple(lo.tolist()), tuple(hi.tolist())


def _compose(scale, rot, offset, m: Similitude):
    """Compose the running affine map with one similitude (map applied last)."""
    r = float(m.ratio)
    b = m.translation
    if rot is None and m.rotation is None:
        new_offset = tuple(scale * bv + ov for bv, ov in zip(b, offset))
        return scale * r, None, new_offset
    q = len(offset)
    A = (np.eye(q) if rot is None else np.asarray(rot)) * scale
    M = m.matrix()
    new_lin = A @ M
    new_off = A @ np.asarray(b) + np.asarray(offset)
    new_scale = scale * r
    return new_scale, (new_lin / new_scale), tuple(new_off.tolist())


class PieceContext:
    """Caches the base enclosure boxes and mass data needed to split pieces."""

    def __init__(self, cs: CondensationSystem):
        self.cs = cs
        self.q = cs.dim
        self.p0 = float(cs.p0)
        self.p = [float(v) for v in cs.p]
        self.t = [float(v) for v in cs.t]
        if cs.case == "I":
            ebox = cs.attractor_box()
            self.base_lo = {"E": ebox.lo}
            self.base_hi = {"E": ebox.hi}
        else:
            kbox = cs.support_box()
            cbox = cs.inner_attractor_box()
            self.base_lo = {"K": kbox.lo, "C": cbox.lo}
            self.base_hi = {"K": kbox.hi, "C": cbox.hi}

    def root(self) -> Piece:
        zero = tuple([0.0] * self.q)
        kind = "E" if self.cs.case == "I" else "K"
        lo = self.base_lo[kind]
        hi = self.base_hi[kind]
        return Piece((), kind, 1.0, None, zero, lo, hi, 1.0, m1=0.0, p=1.0)

    def children(self, piece: Piece) -> list[Piece]:
        cs = self.cs
        out: list[Piece] = []
        if piece.kind == "E":
            for i, m in enumerate(cs.outer):
                sc, rot, off = _compose(piece.scale, piece.rot, piece.offset, m)
                m1 = (piece.m1 + self.p0 * piece.p) * self.t[i]
                p = piece.p * self.p[i]
                mass = m1 + p
                if mass == 0.0:
                    continue
                lo, hi = _apply_affine(sc, rot, off, self.base_lo["E"], self.base_hi["E"])
                out.append(Piece(piece.pid + (i + 1,), "E", sc, rot, off, lo, hi, mass, m1, p))
        elif piece.kind == "K":
            cmass = self.p0 * piece.p
            if cmass > 0.0:
                lo, hi = _apply_affine(
                    piece.scale, piece.rot, piece.offset, self.base_lo["C"], self.base_hi["C"]
                )
                out.append(
                    Piece(piece.pid + (-1,), "C", piece.scale, piece.rot, piece.offset,
                          lo, hi, cmass, p=piece.p)
                )
            for i, m in enumerate(cs.outer):
                p = piece.p * self.p[i]
                if p == 0.0:
                    continue
                sc, rot, off = _compose(piece.scale, piece.rot, piece.offset, m)
                lo, hi = _apply_affine(sc, rot, off, self.base_lo["K"], self.base_hi["K"])
                out.append(Piece(piece.pid + (i + 1,), "K", sc, rot, off, lo, hi, p, p=p))
        else:  # "C"
            for i, m in enumerate(cs.inner.maps):
                sc, rot, off = _compose(piece.scale, piece.rot, piece.offset, m)
                mass = piece.mass * self.t[i]
                lo, hi = _apply_affine(sc, rot, off, self.base_lo["C"], self.base_hi["C"])
                out.append(Piece(piece.pid + (i + 1,), "C", sc, rot, off, lo, hi, mass, p=piece.p))
        return out


def refine_to_diameter(cs: CondensationSystem, diam: float, cap: int = MAX_PIECES) -> list[Piece]:
    """Split the support into pieces whose enclosures have width <= diam."""
    ctx = PieceContext(cs)
    done: list[Piece] = []
    work = [ctx.root()]
    while work:
        piece = work.pop()
        if piece.width <= diam:
            done.append(piece)
        else:
            work.extend(ctx.children(piece))
        if len(done) + len(work) > cap:
            raise BracketBudgetExceeded(
                f"piece cap {cap} exceeded while refining to diameter {diam}",
                ErrorBracket(-inf, inf),
            )
    done.sort(key=lambda p: p.pid)
    return done


def refine_to_count(cs: CondensationSystem, count: int, cap: int = MAX_PIECES) -> list[Piece]:
    """Split the heaviest pieces until at least ``count`` pieces exist."""
    ctx = PieceContext(cs)
    heap: list[tuple[float, tuple, Piece]] = []
    root = ctx.root()
    heapq.heappush(heap, (-root.mass, root.pid, root))
    n = 1
    while n < count and heap:
        _, _, piece = heapq.heappop(heap)
        kids = ctx.children(piece)
        n += len(kids) - 1
        for k in kids:
            heapq.heappush(heap, (-k.mass, k.pid, k))
        if n > cap:
            raise BracketBudgetExceeded(f"piece cap {cap} exceeded", ErrorBracket(-inf, inf))
    pieces = [p for _, _, p in heap]
    pieces.sort(key=lambda p: p.pid)
    return pieces


# ---------------------------------------------------------------------------
# distances between boxes and codebooks


def _box_point_bounds_1d(lo: float, hi: float, pts: np.ndarray) -> tuple[float, float]:
    """(dmin, dmax) of the nearest-codebook-point distance over a 1-D box."""
    idx = np.searchsorted(pts, lo)
    dmin = 0.0
    best = inf
    if idx < pts.size and pts[idx] <= hi:
        dmin = 0.0
    else:
        left = pts[idx - 1] if idx > 0 else None
        right = pts[idx] if idx < pts.size else None
        dl = lo - left if left is not None else inf
        dr = right - hi if right is not None else inf
        dmin = min(dl, dr)
    # upper bound: the minimizing point for max-distance is nearest the center
    c = 0.5 * (lo + hi)
    j = np.searchsorted(pts, c)
    for k in (j - 1, j, j + 1):
        if 0 <= k < pts.size:
            a = pts[k]
            best = min(best, max(abs(lo - a), abs(hi - a)))
    return dmin, best


def _box_point_bounds(piece: Piece, pts: np.ndarray) -> tuple[float, float]:
    if pts.shape[1] == 1:
        return _box_point_bounds_1d(piece.lo[0], piece.hi[0], pts[:, 0])
    lo = np.asarray(piece.lo)
    hi = np.asarray(piece.hi)
    below = np.maximum(lo[None, :] - pts, 0.0)
    above = np.maximum(pts - hi[None, :], 0.0)
    dmin = float(np.min(np.sqrt(((below + above) ** 2).sum(axis=1))))
    far = np.maximum(np.abs(lo[None, :] - pts), np.abs(hi[None, :] - pts))
    dmax = float(np.min(np.sqrt((far**2).sum(axis=1))))
    return dmin, dmax


def _points_within(piece: Piece, pts: np.ndarray, radius: float) -> int:
    if pts.shape[1] == 1:
        x = pts[:, 0]
        return int(np.count_nonzero((x >= piece.lo[0] - radius) & (x <= piece.hi[0] + radius)))
    lo = np.asarray(piece.lo) - radius
    hi = np.asarray(piece.hi) + radius
    inside = np.all((pts >= lo[None, :]) & (pts <= hi[None, :]), axis=1)
    return int(np.count_nonzero(inside))


# ---------------------------------------------------------------------------
# ball-mass tail constants


def tail_constants(cs: CondensationSystem) -> tuple[float, float]:
    """(lambda1, eta1) for the tail bound; certified in 1-D, inflated-fit otherwise."""
    from .mass import ball_mass_exponent, certified_ball_constants

    if cs.dim == 1:
        return certified_ball_constants(cs)
    from .mass import fitted_lambda1

    lam, eta, _ = fitted_lambda1(cs)
    logger.warning("dimension %d > 1: using inflated fitted ball constant", cs.dim)
    return 4.0 * lam, eta


def _tail_term(mass: float, rho: float, lam: float, eta: float) -> float:
    """Upper bound for the integral of log(rho/d(x,a)) over a mass-``mass``
    piece intersected with B(a, rho), for any point a.

    Layer-cake with the ball bound capped at the piece mass itself:
    min(lam rho^eta, mass)-style, which keeps small pieces from being charged
    the full global ball constant.
    """
    cap = lam * rho**eta
    if cap <= mass:
        return cap / eta
    return (mass / eta) * (1.0 + log(cap / mass))


def _tail_lower(piece: Piece, n_near: int, lam: float, eta: float) -> float:
    """Certified lower bound for the piece's log-distance integral when the
    enclosure touches codebook points."""
    rho = max(piece.width, 1e-300)
    return piece.mass * log(rho) - n_near * _tail_term(piece.mass, rho, lam, eta)


# ---------------------------------------------------------------------------
# the rigorous bracket


def log_dist_integral(
    cs: CondensationSystem,
    codebook: Codebook,
    tol: float = DEFAULT_BRACKET_TOL,
    max_pieces: int = MAX_PIECES,
) -> ErrorBracket:
    """Certified [lower, upper] for the mean log distance to the codebook.

    Pieces are refined worst-gap-first; a piece whose enclosure contains a
    codebook point is either refined further or closed with the ball-mass
    tail bound, whichever already meets its share of the tolerance.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if codebook.dim != cs.dim:
        raise ValueError("codebook dimension mismatch")
    ctx = PieceContext(cs)
    pts = codebook.array()
    lam, eta = tail_constants(cs)

    def bounds(piece: Piece) -> tuple[float, float, float]:
        """(lo_contrib, hi_contrib, priority_gap)"""
        dmin, dmax = _box_point_bounds(piece, pts)
        hi = piece.mass * log(max(dmax, 1e-300))
        if dmin > 0.0:
            lo = piece.mass * log(dmin)
            return lo, hi, hi - lo
        n_near = max(1, _points_within(piece, pts, piece.width))
        lo = _tail_lower(piece, n_near, lam, eta)
        return lo, hi, hi - lo

    root = ctx.root()
    lo0, hi0, gap0 = bounds(root)
    store: dict[tuple, tuple[Piece, float, float]] = {root.pid: (root, lo0, hi0)}
    heap: list[tuple[float, tuple]] = [(-gap0, root.pid)]
    total_lo = lo0
    total_hi = hi0

    while total_hi - total_lo > tol and heap:
        neg_gap, pid = heapq.heappop(heap)
        entry = store.get(pid)
        if entry is None:
            continue
        piece, plo, phi = entry
        if len(store) >= max_pieces:
            raise BracketBudgetExceeded(
                f"bracket needs more than {max_pieces} pieces for tol {tol}",
                ErrorBracket(total_lo, total_hi),
            )
        del store[pid]
        total_lo -= plo
        total_hi -= phi
        for child in ctx.children(piece):
            clo, chi, cgap = bounds(child)
            store[child.pid] = (child, clo, chi)
            total_lo += clo
            total_hi += chi
            if cgap > 1e-15:
                heapq.heappush(heap, (-cgap, child.pid))
    if total_hi - total_lo > tol:
        raise BracketBudgetExceeded(
            f"bracket stalled at width {total_hi - total_lo:.3g} > tol {tol}",
            ErrorBracket(total_lo, total_hi),
        )
    return ErrorBracket(total_lo, total_hi, "rigorous")


# ---------------------------------------------------------------------------
# sampling and Monte Carlo


def sample_ism(
    cs: CondensationSystem,
    seed: int,
    count: int,
    trunc_tol: float = 1e-9,
) -> np.ndarray:
    """Draw samples by stochastically unrolling the defining equation.

    Each sample composes outer maps with probability p_i, switches to the
    auxiliary measure with probability p0 (after which inner maps compose with
    the t weights), and stops at the composed map's fixed point once the
    composed ratio drops below trunc_tol.
    """
    if trunc_tol <= 0:
        raise ValueError("trunc_tol must be positive")
    if cs.dim != 1:
        return _sample_ism_general(cs, seed, count, trunc_tol)
    rng = np.random.default_rng(seed)
    outer_scale = np.array([float(m.ratio) * _rot_sign(m) for m in cs.outer])
    outer_off = np.array([m.translation[0] for m in cs.outer])
    inner_scale = np.array([float(m.ratio) * _rot_sign(m) for m in cs.inner.maps])
    inner_off = np.array([m.translation[0] for m in cs.inner.maps])
    p_cum = np.cumsum([float(cs.p0)] + [float(v) for v in cs.p])
    t_cum = np.cumsum([float(v) for v in cs.t])

    scale = np.ones(count)
    offset = np.zeros(count)
    in_aux = np.zeros(count, dtype=bool)
    active = np.ones(count, dtype=bool)
    guard = 0
    while np.any(active):
        guard += 1
        if guard > 10_000:
            raise RuntimeError("sampler failed to truncate; check contraction ratios")
        idx = np.flatnonzero(active)
        u = rng.random(idx.size)
        was_aux = in_aux[idx].copy()
        # outer-mode draws; a sample that switches modes draws its first
        # inner map next round, with a fresh uniform
        outer_idx = idx[~was_aux]
        if outer_idx.size:
            uu = u[~was_aux]
            choice = np.searchsorted(p_cum, uu * p_cum[-1], side="right")
            to_aux = choice == 0
            in_aux[outer_idx[to_aux]] = True
            take = outer_idx[~to_aux]
            ci = choice[~to_aux] - 1
            offset[take] = scale[take] * outer_off[ci] + offset[take]
            scale[take] = scale[take] * outer_scale[ci]
        # inner-mode draws
        aux_idx = idx[was_aux]
        if aux_idx.size:
            uu = u[was_aux]
            ci = np.searchsorted(t_cum, uu * t_cum[-1], side="right")
            ci = np.minimum(ci, len(inner_scale) - 1)
            offset[aux_idx] = scale[aux_idx] * inner_off[ci] + offset[aux_idx]
            scale[aux_idx] = scale[aux_idx] * inner_scale[ci]
        active &= np.abs(scale) >= trunc_tol
    # finish at the composed map's fixed point
    return (offset / (1.0 - scale)).reshape(-1, 1)


def _rot_sign(m: Similitude) -> float:
    if m.rotation is None:
        return 1.0
    return float(np.asarray(m.rotation)[0, 0])


def _sample_ism_general(cs, seed, count, trunc_tol):
    rng = np.random.default_rng(seed)
    q = cs.dim
    p_weights = [float(cs.p0)] + [float(v) for v in cs.p]
    t_weights = [float(v) for v in cs.t]
    out = np.empty((count, q))
    for k in range(count):
        scale = 1.0
        rot = None
        offset = tuple([0.0] * q)
        aux = False
        while scale >= trunc_tol:
            if not aux:
                i = rng.choice(len(p_weights), p=np.array(p_weights) / sum(p_weights))
                if i == 0:
                    aux = True
                    continue
                scale, rot, offset = _compose(scale, rot, offset, cs.outer[i - 1])
            else:
                i = rng.choice(len(t_weights), p=np.array(t_weights) / sum(t_weights))
                scale, rot, offset = _compose(scale, rot, offset, cs.inner.maps[i])
        A = scale * (np.eye(q) if rot is None else np.asarray(rot))
        out[k] = np.linalg.solve(np.eye(q) - A, np.asarray(offset))
    return out


def monte_carlo_integral(
    cs: CondensationSystem,
    codebook: Codebook,
    samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
) -> ErrorBracket:
    """Sample mean and standard error of the log distance to the codebook."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    xs = sample_ism(cs, seed, samples)
    if cs.dim == 1:
        pts = codebook.coords_1d()
        x = xs[:, 0]
        idx = np.clip(np.searchsorted(pts, x), 1, pts.size - 1) if pts.size > 1 else None
        if pts.size == 1:
            d = np.abs(x - pts[0])
        else:
            left = np.abs(x - pts[idx - 1])
            right = np.abs(x - pts[idx])
            d = np.minimum(left, right)
    else:
        pts = codebook.array()
        d = np.min(
            np.sqrt(((xs[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)), axis=1
        )
    vals = np.log(np.maximum(d, 1e-300))
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / sqrt(samples)) if samples > 1 else inf
    return ErrorBracket(mean, mean, "monteCarlo", stderr=stderr)


# ---------------------------------------------------------------------------
# codebooks from antichain constructions


def codebook_from_antichain(
    cs: CondensationSystem,
    j: int,
    anchor_rule: str = "cylinder_center",
    cap: int = 2**22,
) -> tuple[Codebook, LevelFamily]:
    """One point per level-j antichain piece (plus, in case II, one per
    ancestor/inner-antichain cell)."""
    if anchor_rule not in ("cylinder_center", "attractor_fixed_point"):
        raise ValueError(f"unknown anchor rule {anchor_rule!r}")
    fam = level_family(cs, j, collect_words=True, cap=cap)
    pts: list[tuple[float, ...]] = []
    if cs.case == "I":
        base = cs.attractor_box()
        anchor = base.center
        for w in fam.members:
            m = compose_map(cs.outer, w)
            if anchor_rule == "cylinder_center":
                pts.append(tuple(m.apply(anchor).tolist()))
            else:
                pts.append(tuple(m.fixed_point().tolist()))
    else:
        from .asymptotics import _threshold_members_allow_one

        kbox = cs.support_box()
        cbox = cs.inner_attractor_box()
        qf = cs.q_floor()
        eps = qf**j
        for w in fam.members:
            m = compose_map(cs.outer, w)
            if anchor_rule == "cylinder_center":
                pts.append(tuple(m.apply(kbox.center).tolist()))
            else:
                pts.append(tuple((m.fixed_point() if len(w) else kbox.center).tolist()))
        for entry in fam.psi_entries:
            sigma = entry.word
            outer_map = compose_map(cs.outer, sigma)
            inner_words = _threshold_members_allow_one(
                cs.t, eps / entry.p, cs.inner.n
            )
            for rho in inner_words:
                gmap = compose_map(cs.inner.maps, rho)
                full = outer_map.compose(gmap)
                pts.append(tuple(full.apply(cbox.center).tolist()))
    return Codebook.from_points(pts), fam


# ---------------------------------------------------------------------------
# Lloyd-style descent for the order-zero objective


def _atoms(cs: CondensationSystem, n_target: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pieces = refine_to_count(cs, n_target)
    centers = np.array([0.5 * (p.lo[0] + p.hi[0]) for p in pieces])
    radii = np.array([0.5 * (p.hi[0] - p.lo[0]) for p in pieces])
    masses = np.array([p.mass for p in pieces])
    order = np.argsort(centers, kind="stable")
    return centers[order], radii[order], masses[order]


def _nearest_index(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index of the nearest codebook point, ties to the lower index."""
    if points.size == 1:
        return np.zeros(x.size, dtype=int)
    idx = np.clip(np.searchsorted(points, x), 1, points.size - 1)
    left = np.abs(x - points[idx - 1])
    right = np.abs(x - points[idx])
    return np.where(left <= right, idx - 1, idx)


def _golden_min(f, a: float, b: float, iters: int = 40) -> float:
    phi = (sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def lloyd0(
    cs: CondensationSystem,
    n: int,
    init: Codebook | None = None,
    iterations: int = DEFAULT_LLOYD_ITERATIONS,
    tol: float = DEFAULT_BRACKET_TOL,
    atom_count: int | None = None,
) -> tuple[Codebook, ErrorBracket]:
    """Alternates nearest-piece assignment with per-cell 1-D refits.

    The working objective uses piece centers smoothed by piece radii; an
    iteration is accepted only if the rigorous bracket midpoint improves, so
    the returned value never falls below the initial codebook's quality.
    """
    if cs.dim != 1:
        raise ValueError("the descent is implemented for dimension 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    centers, radii, masses = _atoms(cs, atom_count or max(256, 8 * n))
    if init is None:
        init = _quantile_codebook(centers, masses, n)
    if init.n != n:
        raise ValueError(f"init codebook has {init.n} points, expected {n}")

    best_cb = init
    best_bracket = log_dist_integral(cs, init, tol)
    current = init.coords_1d().copy()
    for it in range(iterations):
        assign = _nearest_index(current, centers)
        new_pts = current.copy()
        for cell in range(current.size):
            mask = assign == cell
            if not np.any(mask):
                # reseed on the heaviest badly-served atom
                d = np.abs(centers - current[assign])
                k = int(np.argmax(masses * d))
                logger.info("lloyd0: reseeding empty cell %d at atom %d", cell, k)
                new_pts[cell] = centers[k]
                continue
            cm, cr, cw = centers[mask], radii[mask], masses[mask]
            lo, hi = float(cm.min()), float(cm.max())
            if lo == hi:
                new_pts[cell] = lo
                continue

            def cell_obj(a):
                return float(np.sum(cw * np.log(np.abs(cm - a) + cr + 1e-300)))

            new_pts[cell] = _golden_min(cell_obj, lo, hi)
        new_pts = np.sort(new_pts)
        cb = Codebook.from_points([(float(v),) for v in new_pts])
        if cb.n < n:
            # merged duplicates: respread the missing points
            extra = _quantile_codebook(centers, masses, n - cb.n, jitter=it + 1)
            cb = Codebook.from_points(list(cb.points) + list(extra.points))
        br = log_dist_integral(cs, cb, tol)
        if br.midpoint < best_bracket.midpoint:
            best_cb, best_bracket = cb, br
            current = cb.coords_1d().copy()
        else:
            break
    return best_cb, best_bracket


def _quantile_codebook(centers: np.ndarray, masses: np.ndarray, n: int, jitter: int = 0) -> Codebook:
    csum = np.cumsum(masses)
    csum /= csum[-1]
    qs = (np.arange(n) + 0.5 + 0.01 * jitter) / n
    idx = np.searchsorted(csum, np.clip(qs, 0, 1))
    idx = np.clip(idx, 0, centers.size - 1)
    pts = sorted(set(float(centers[i]) for i in idx))
    # ensure n distinct points
    k = 0
    while len(pts) < n:
        pts.append(pts[-1] + (k + 1) * 1e-6)
        k += 1
    return Codebook.from_points([(v,) for v in pts[:n]])


# ---------------------------------------------------------------------------
# certified 1-D oracle (small codebooks)


def _piece_floor_terms(widths, masses, lam, eta, cap):
    """Per-piece certified floor: valid lower bound of the piece's charge for
    any point position, via the capped layer-cake tail."""
    rho = np.minimum(widths, cap) if cap is not None else widths
    rho = np.maximum(rho, 1e-300)
    ball = lam * rho**eta
    tail = np.where(
        ball <= masses, ball / eta, (masses / eta) * (1.0 + np.log(np.maximum(ball / np.maximum(masses, 1e-300), 1.0)))
    )
    return masses * np.log(rho) - tail


def oracle_lower_bound(
    cs: CondensationSystem,
    n: int,
    cap_distance: float | None = None,
    piece_count: int = 128,
    grid_size: int = 2048,
) -> float:
    """Certified lower bound for the optimal mean log distance with n points.

    Relaxation: each piece is charged its best-case log distance to the point
    of its group, and groups are contiguous in 1-D.  Each group's point is
    minimized over grid cells, charging every piece its closest approach to
    the whole cell (so the bound holds for arbitrary real points, not only
    grid points).  ``cap_distance`` switches to the capped objective
    log(min(d, cap)).
    """
    if cs.dim != 1:
        raise ValueError("oracle bounds are 1-D only")
    from .mass import certified_ball_constants

    lam, eta = certified_ball_constants(cs)
    pieces = refine_to_count(cs, piece_count)
    pieces.sort(key=lambda p: p.lo[0])
    P = len(pieces)
    los = np.array([p.lo[0] for p in pieces])
    his = np.array([p.hi[0] for p in pieces])
    masses = np.array([p.mass for p in pieces])
    widths = np.maximum(his - los, 1e-300)
    floors = _piece_floor_terms(widths, masses, lam, eta, cap_distance)

    span_lo = float(los.min())
    span_hi = float(his.max())
    pad = cap_distance if cap_distance is not None else (span_hi - span_lo) + 1e-3
    cells = np.linspace(span_lo - pad, span_hi + pad, grid_size + 1)
    cell_lo = cells[:-1]
    cell_hi = cells[1:]

    # D[p, c]: closest distance from piece p to cell c (0 when they meet)
    D = np.maximum(los[:, None] - cell_hi[None, :], 0.0) + np.maximum(
        cell_lo[None, :] - his[:, None], 0.0
    )
    if cap_distance is not None:
        D = np.minimum(D, cap_distance)
    with np.errstate(divide="ignore"):
        phi = masses[:, None] * np.log(np.maximum(D, 1e-300))
    np.maximum(phi, floors[:, None], out=phi)
    # a point beyond the padded span is never better than the nearest grid
    # edge: distances to every piece only shrink moving inward (or the cap
    # freezes them), so the edge cells dominate those positions

    phi_pref = np.concatenate([np.zeros((1, grid_size)), np.cumsum(phi, axis=0)])

    # cost[i][j]: certified min over the point position of the group i..j
    cost = np.full((P, P), inf)
    chunk = max(1, int(4e6 // grid_size))
    for i in range(P):
        seg = phi_pref[i + 1 : P + 1] - phi_pref[i]
        cost[i, i:] = seg.min(axis=1)

    big = inf
    F = np.full((n + 1, P + 1), big)
    F[0, 0] = 0.0
    for k in range(1, n + 1):
        F[k, 0] = 0.0
        for jj in range(1, P + 1):
            best = F[k - 1, jj]  # a point may go unused
            cand = F[k - 1, :jj] + cost[:jj, jj - 1]
            m = cand.min() if cand.size else big
            F[k, jj] = min(best, m)
    return float(F[n, P])


def oracle_optimal_1d(
    cs: CondensationSystem,
    n: int,
    grid_step: float | None = None,
    tol: float = DEFAULT_BRACKET_TOL,
) -> tuple[Codebook, ErrorBracket]:
    """Reference optimum for tiny codebooks: certified lower bound plus the
    best rigorously evaluated candidate codebook.

    The returned bracket encloses the optimal value itself (not merely the
    returned codebook's value).
    """
    if cs.dim != 1:
        raise ValueError("the oracle is 1-D only")
    if n > 4:
        raise ValueError("the exhaustive oracle is limited to n <= 4")
    lower = oracle_lower_bound(cs, n)
    centers, radii, masses = _atoms(cs, 512)

    def smooth_obj(points: np.ndarray) -> float:
        d = np.min(np.abs(centers[:, None] - points[None, :]), axis=1)
        return float(np.sum(masses * np.log(d + radii + 1e-300)))

    candidates: list[np.ndarray] = []
    candidates.append(_quantile_codebook(centers, masses, n).coords_1d())
    for shift in (0.25, 0.5, 0.75):
        q = _quantile_codebook(centers, masses, n, jitter=int(40 * shift))
        candidates.append(q.coords_1d())
    span = np.linspace(centers.min(), centers.max(), n + 2)[1:-1]
    candidates.append(span.copy())
    # local coordinate polish of the best smooth candidates
    scored = sorted(candidates, key=smooth_obj)[:3]
    polished = []
    for cand in scored:
        pts = cand.copy()
        for _ in range(3):
            for k in range(n):
                lo = centers.min() if k == 0 else pts[k - 1]
                hi = centers.max() if k == n - 1 else pts[k + 1]
                if hi <= lo:
                    continue

                def obj(a, k=k):
                    trial = pts.copy()
                    trial[k] = a
                    return smooth_obj(np.sort(trial))

                pts[k] = _golden_min(obj, lo, hi, iters=30)
        polished.append(np.sort(pts))
    best_cb = None
    best_upper = inf
    for cand in polished + scored:
        cb = Codebook.from_points([(float(v),) for v in np.sort(cand)])
        if cb.n != n:
            continue
        br = log_dist_integral(cs, cb, tol)
        if br.upper < best_upper:
            best_upper = br.upper
            best_cb = cb
    assert best_cb is not None
    # descent polish from the best candidate tightens the witness
    lcb, lbr = lloyd0(cs, n, init=best_cb, iterations=12, tol=tol)
    if lbr.upper < best_upper:
        best_cb, best_upper = lcb, lbr.upper
    if lower > best_upper:  # numeric safety: lower can never exceed a witness
        lower = best_upper - 1e-9
    return best_cb, ErrorBracket(lower, best_upper, "rigorous")


# ---------------------------------------------------------------------------
# recursive lower bounds for large n


def _depth1_gaps(maps: Sequence[Similitude], base: Box) -> list[float]:
    """Per-child distance to the nearest sibling image, in absolute units."""
    imgs = [m.image_box(base) for m in maps]
    gaps = []
    for i, bi in enumerate(imgs):
        g = min(bi.gap_to(bj) for j, bj in enumerate(imgs) if j != i)
        gaps.append(g)
    return gaps


def hat_e_lower_table(
    cs: CondensationSystem,
    n_max: int,
    oracle_base: int = 4,
    oracle_tol: float = DEFAULT_BRACKET_TOL,
) -> np.ndarray:
    """Certified lower bounds L[0..n_max] for the optimal mean log distance.

    Case I: a coupled recursion over cylinder splittings.  Any codebook
    induces an allocation of its points to the level-1 cylinders; charging
    each cylinder the capped sub-problem (the cap encodes half the gap to the
    sibling cylinders) yields a valid bound.  The auxiliary/branch mix that a
    cylinder carries is handled by concavity: the mixed value is bounded below
    by the mixture of the pure tables.  Base cases come from the oracle.

    Case II: bound via the auxiliary-measure table plus the mixing shift
    p0^{-1} sum p_i log s_i, the auxiliary table built the same way over the
    inner maps.
    """
    if cs.dim != 1:
        raise ValueError("lower tables are 1-D only")
    if cs.case == "II":
        nu_inner = CondensationSystem(
            outer=cs.inner.maps,
            p0=Fraction(1),
            p=tuple(Fraction(0) for _ in cs.inner.maps),
            case="I",
            inner=cs.inner,
            outer_witness=cs.inner.witness_box,
            degenerate=True,
        )
        table_nu = hat_e_lower_table(nu_inner, n_max, oracle_base, oracle_tol)
        kappa = float(cs.p0) ** -1 * sum(
            float(p) * (log(float(r))) for p, r in zip(cs.p, cs.outer_ratios)
        )
        return table_nu + kappa

    base_box = cs.attractor_box()
    diam = base_box.diameter
    gaps = _depth1_gaps(cs.outer, base_box)
    s = [float(r) for r in cs.outer_ratios]
    if min(gaps) <= 0:
        raise ValueError("level-1 images overlap; recursive lower bound unavailable")
    c_hat = min(1.0, min(g / (2.0 * si * diam) for g, si in zip(gaps, s)))
    cap_abs = c_hat * diam

    nu = cs.nu_only()
    k_base = min(oracle_base, n_max)
    base_nu = [log(cap_abs)]
    base_mu = [log(cap_abs)]
    for k in range(1, k_base + 1):
        base_nu.append(oracle_lower_bound(nu, k, cap_distance=cap_abs))
        base_mu.append(oracle_lower_bound(cs, k, cap_distance=cap_abs))

    t = np.array([float(v) for v in cs.t])
    p0 = float(cs.p0)
    p = np.array([float(v) for v in cs.p])
    w = p0 * t + p
    lam_mix = np.divide(p0 * t, w, out=np.zeros_like(w), where=w > 0)
    log_s = np.log(np.array(s))

    L_nu = np.full(n_max + 1, np.nan)
    L_mu = np.full(n_max + 1, np.nan)
    L_nu[: k_base + 1] = base_nu
    L_mu[: k_base + 1] = base_mu

    nmaps = len(s)
    if nmaps != 2:
        # generic (slow) allocation enumeration for 3+ maps
        return _lower_table_generic(cs, n_max, L_nu, L_mu, cap_abs, k_base)

    lg0 = sum(float(ti) * lsi for ti, lsi in zip(t, log_s))
    for k in range(k_base + 1, n_max + 1):
        # nu table: allocations (k1, k - k1); the self-referential split
        # (k, 0)/(0, k) is solved in closed form
        k1 = np.arange(1, k)
        cand = (
            t[0] * (log_s[0] + L_nu[k1]) + t[1] * (log_s[1] + L_nu[k - k1])
        ).min() if k > 1 else inf
        for i_self, i_other in ((0, 1), (1, 0)):
            a = (
                t[i_self] * log_s[i_self]
                + t[i_other] * (log_s[i_other] + L_nu[0])
            )
            cand = min(cand, a / (1.0 - t[i_self]))
        L_nu[k] = min(cand, L_nu[k - 1])

    def mix(i: int, idx) -> np.ndarray:
        return lam_mix[i] * L_nu[idx] + (1.0 - lam_mix[i]) * L_mu[idx]

    for k in range(k_base + 1, n_max + 1):
        k1 = np.arange(1, k)
        cand = (
            w[0] * (log_s[0] + mix(0, k1)) + w[1] * (log_s[1] + mix(1, k - k1))
        ).min() if k > 1 else inf
        for i_self, i_other in ((0, 1), (1, 0)):
            # x = w_i(log s_i + lam L_nu[k] + (1-lam) x) + other(0)
            const = (
                w[i_self] * (log_s[i_self] + lam_mix[i_self] * L_nu[k])
                + w[i_other] * (log_s[i_other] + mix(i_other, 0))
            )
            coef = w[i_self] * (1.0 - lam_mix[i_self])
            cand = min(cand, const / (1.0 - coef))
        L_mu[k] = min(cand, L_mu[k - 1])
    return L_mu


def _lower_table_generic(cs, n_max, L_nu, L_mu, cap_abs, k_base):
    """Allocation enumeration for systems with 3+ maps (cubic in n)."""
    import itertools

    t = [float(v) for v in cs.t]
    p0 = float(cs.p0)
    p = [float(v) for v in cs.p]
    w = [p0 * ti + pi for ti, pi in zip(t, p)]
    lam = [p0 * ti / wi if wi > 0 else 0.0 for ti, wi in zip(t, w)]
    log_s = [log(float(r)) for r in cs.outer_ratios]
    m = len(t)

    def allocations(k):
        if m == 2:
            return [(a, k - a) for a in range(k + 1)]
        out = []
        for a in range(k + 1):
            for b in range(k - a + 1):
                out.append((a, b, k - a - b))
        return out

    for table, weights, mixer in (
        (L_nu, t, lambda i, v: L_nu[v]),
        (L_mu, w, lambda i, v: lam[i] * L_nu[v] + (1 - lam[i]) * L_mu[v]),
    ):
        for k in range(k_base + 1, n_max + 1):
            best = table[k - 1]
            for alloc in allocations(k):
                if any(v == k for v in alloc):
                    i_self = alloc.index(k)
                    const = sum(
                        weights[i] * (log_s[i] + mixer(i, 0))
                        for i in range(m)
                        if i != i_self
                    ) + weights[i_self] * (
                        log_s[i_self]
                        + (lam[i_self] * L_nu[k] if table is L_mu else 0.0)
                    )
                    coef = weights[i_self] * (
                        (1 - lam[i_self]) if table is L_mu else 1.0
                    )
                    best = min(best, const / (1 - coef))
                else:
                    val = sum(
                        weights[i] * (log_s[i] + mixer(i, alloc[i])) for i in range(m)
                    )
                    best = min(best, val)
            table[k] = best
    return L_mu


# ---------------------------------------------------------------------------
# coefficient tables and the mixing-recursion consistency check


@dataclass(frozen=True)
class CoefficientRow:
    j: int
    n: int
    method: str
    e_lower: float
    e_upper: float
    coef_lower: float
    coef_upper: float
    seconds: float
    construction_bound: float   # the antichain-construction upper bound (log scale)
    hat_lower: float
    hat_upper: float


def construction_bound(cs: CondensationSystem, fam: LevelFamily) -> float:
    """Log-scale upper bound on the optimal error at the antichain codebook size."""
    if cs.case == "I":
        # cylinder diameters are ratio * |support|; the log diameter correction
        # vanishes for unit-diameter supports and is kept only when it hurts
        diam = cs.attractor_box().diameter
        bound = fam.mu_logs
        if diam > 1.0:
            bound += fam.mu_sum * log(diam)
        return bound
    from .asymptotics import ratio_xi_j

    xi = ratio_xi_j(cs, fam.j, fam=fam)
    qf = float(cs.q_floor())
    l1j = fam.min_len
    p0 = float(cs.p0)
    return (1.0 / xi.value) * (1.0 - (1.0 - p0) ** l1j) * fam.j * log(qf)


def coefficient_table(
    cs: CondensationSystem,
    j_values: Sequence[int],
    method: str = "antichain",
    tol: float = DEFAULT_BRACKET_TOL,
    lloyd_iterations: int = 4,
    oracle_tol: float = DEFAULT_BRACKET_TOL,
) -> list[CoefficientRow]:
    """Certified coefficient band n^(1/d0) * error along the antichain sizes.

    Upper side: the antichain construction, optionally tightened by the
    descent ("lloyd") or the tiny-codebook oracle.  Lower side: the oracle
    for n <= 4, the recursive splitting table beyond.
    """
    import time as _time

    from .systems import u0_l0_d0

    if method not in ("antichain", "lloyd", "oracle"):
        raise ValueError(f"unknown method {method!r}")
    _, _, d0 = u0_l0_d0(cs)
    rows: list[CoefficientRow] = []
    needed = []
    fams: dict[int, tuple[Codebook, LevelFamily]] = {}
    for j in j_values:
        cb, fam = codebook_from_antichain(cs, j)
        fams[j] = (cb, fam)
        needed.append(cb.n)
    n_big = [n for n in needed if n > 4]
    table = None
    if n_big:
        try:
            table = hat_e_lower_table(cs, max(n_big), oracle_tol=oracle_tol)
        except ValueError as exc:
            logger.warning("lower table unavailable: %s", exc)
    for j in j_values:
        start = _time.perf_counter()
        cb, fam = fams[j]
        n = cb.n
        bracket = log_dist_integral(cs, cb, tol)
        hat_upper = bracket.upper
        used = "antichain"
        if method == "lloyd" and cs.dim == 1:
            _, lb = lloyd0(cs, n, init=cb, iterations=lloyd_iterations, tol=tol)
            if lb.upper < hat_upper:
                hat_upper = lb.upper
            used = "lloyd"
        if method == "oracle" and n <= 4:
            _, ob = oracle_optimal_1d(cs, n, tol=oracle_tol)
            hat_upper = min(hat_upper, ob.upper)
            used = "oracle"
        if n <= 4:
            hat_lower = oracle_optimal_1d(cs, n, tol=oracle_tol)[1].lower
        elif table is not None:
            hat_lower = float(table[n])
        else:
            hat_lower = -inf
        scale = n ** (1.0 / d0)
        rows.append(
            CoefficientRow(
                j=j,
                n=n,
                method=used,
                e_lower=exp(hat_lower) if hat_lower > -inf else 0.0,
                e_upper=exp(hat_upper),
                coef_lower=scale * exp(hat_lower) if hat_lower > -inf else 0.0,
                coef_upper=scale * exp(hat_upper),
                seconds=_time.perf_counter() - start,
                construction_bound=construction_bound(cs, fam),
                hat_lower=hat_lower,
                hat_upper=hat_upper,
            )
        )
    return rows


@dataclass(frozen=True)
class SandwichRow:
    n: int
    m: int
    check: str
    lhs: float
    rhs: float
    slack: float
    ok: bool
    ratio_reading: str


def _best_upper_at(cs: CondensationSystem, n: int, tol: float) -> float:
    """Bracket upper of some codebook with at most n points."""
    best_j = None
    for j in range(1, 40):
        try:
            from .asymptotics import level_family as lf

            fam = lf(cs, j)
        except Exception:
            break
        if fam.codebook_size <= n:
            best_j = j
        else:
            break
    if best_j is None:
        centers, radii, masses = _atoms(cs, 256)
        cb = _quantile_codebook(centers, masses, min(n, centers.size))
        return log_dist_integral(cs, cb, tol).upper
    cb, _ = codebook_from_antichain(cs, best_j)
    return log_dist_integral(cs, cb, tol).upper


def sandwich_check(
    cs: CondensationSystem, n_list: Sequence[int], tol: float = DEFAULT_BRACKET_TOL
) -> list[SandwichRow]:
    """Bracket-consistent checks of the mixing recursion between the measure
    and its auxiliary part.

    The contraction factors in the additive terms are read as the outer maps'
    ratios in both cases (the natural reading for the splitting argument);
    each row records that reading.
    """
    reading = "outer contraction ratios"
    kappa_terms = sum(float(p) * log(float(r)) for p, r in zip(cs.p, cs.outer_ratios))
    p0 = float(cs.p0)
    nu = cs.nu_only()
    rows: list[SandwichRow] = []
    nmax = max(n_list)
    try:
        nu_table = hat_e_lower_table(nu, nmax)
    except ValueError:
        nu_table = None
    try:
        mu_table = hat_e_lower_table(cs, nmax)
    except ValueError:
        mu_table = None
    for n in n_list:
        u_mu_n = _best_upper_at(cs, n, tol)
        if nu_table is not None:
            l_nu_n = float(nu_table[n]) if not cs.degenerate else u_mu_n
            rhs = l_nu_n + kappa_terms / p0
            ok = u_mu_n >= rhs - 1e-9
            rows.append(
                SandwichRow(n, n, "lower_recursion", u_mu_n, rhs, u_mu_n - rhs, ok, reading)
            )
        m = n // (cs.n_outer + 1)
        if m >= 1:
            u_nu_m = _best_upper_at(nu, m, tol)
            u_mu_m = _best_upper_at(cs, m, tol)
            rhs = p0 * u_nu_m + (1 - p0) * u_mu_m + kappa_terms
            l_mu_n = float(mu_table[n]) if mu_table is not None else -inf
            ok = l_mu_n <= rhs + 1e-9
            rows.append(
                SandwichRow(n, m, "upper_recursion", l_mu_n, rhs, rhs - l_mu_n, ok, reading)
            )
    return rows
