"""Similitudes, iterated function systems and condensation-system assembly.

A condensation system couples a finite family of contractive similitudes
``(f_i)`` with a probability vector ``(p_0, ..., p_N)`` and an auxiliary
self-similar probability measure.  Two flavours are supported:

* case I  - the auxiliary measure lives on the attractor of the outer maps
  themselves, driven by a weight vector ``(t_i)`` over the same maps;
* case II - the auxiliary measure is generated by a second map family
  ``(g_i)`` with weights ``(t_i)``, and the assembly is required to satisfy
  an in-homogeneous open set condition.

All numeric fields accept exact rationals ("2/3"), decimal strings or
numbers; probability-like quantities are kept as :class:`fractions.Fraction`
so identities can be checked exactly, while geometry uses floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import log
from typing import Any, Sequence

import numpy as np

from .symbolic import Word

__all__ = [
    "Similitude",
    "SimilitudeSystem",
    "CondensationSystem",
    "Box",
    "ConfigError",
    "compose_map",
    "attractor_points",
    "invariant_box",
    "u0_l0_d0",
    "quantization_dimension",
    "dimension_kr",
    "validate_osc",
    "validate_iosc",
    "load_config",
    "parse_config",
    "builtin_config_path",
    "BUILTIN_CONFIGS",
]

_ORTHO_TOL = 1e-12
_PROB_TOL = 1e-12


class ConfigError(ValueError):
    """Raised for malformed system configuration, with the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"config field '{path}': {message}")


def _rational(value: Any, path: str) -> Fraction:
    try:
        if isinstance(value, float):
            # json parses decimals to float; go through the literal text form
            return Fraction(repr(value))
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(path, f"not a number or 'a/b' rational: {value!r}") from exc


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by lower/upper corners (floats)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimension mismatch")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("box has lo > hi")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def diameter(self) -> float:
        d = np.asarray(self.hi) - np.asarray(self.lo)
        return float(np.sqrt(np.sum(d * d)))

    def contains_box(self, other: "Box", strict: bool = False) -> bool:
        if strict:
            return all(s < o for s, o in zip(self.lo, other.lo)) and all(
                o < s for o, s in zip(other.hi, self.hi)
            )
        return all(s <= o for s, o in zip(self.lo, other.lo)) and all(
            o <= s for o, s in zip(other.hi, self.hi)
        )

    def contains_point(self, x: np.ndarray) -> bool:
        return all(l <= v <= h for l, v, h in zip(self.lo, x, self.hi))

    def disjoint(self, other: "Box") -> bool:
        return any(
            h < ol or oh < l
            for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def gap_to(self, other: "Box") -> float:
        """Euclidean distance between the two boxes (0 if they touch)."""
        d = 0.0
        for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi):
            if oh < l:
                d += (l - oh) ** 2
            elif h < ol:
                d += (ol - h) ** 2
        return float(np.sqrt(d))

    def hull(self, other: "Box") -> "Box":
        return Box(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )


@dataclass(frozen=True)
class Similitude:
    """x -> ratio * R x + b with orthogonal R; scales every distance by ratio."""

    ratio: Fraction
    translation: tuple[float, ...]
    rotation: tuple[tuple[float, ...], ...] | None = None  # None = identity

    def __post_init__(self):
        r = float(self.ratio)
        if not (0 < r < 1 or r == 1.0):
            raise ValueError(f"ratio must lie in (0,1), got {self.ratio}")
        if self.rotation is not None:
            R = np.asarray(self.rotation, dtype=float)
            q = len(self.translation)
            if R.shape != (q, q):
                raise ValueError("rotation shape does not match translation dim")
            err = np.max(np.abs(R.T @ R - np.eye(q)))
            if err > _ORTHO_TOL:
                raise ValueError(f"rotation not orthogonal (deviation {err:.2e})")

    @property
    def dim(self) -> int:
        return len(self.translation)

    @property
    def is_contractive(self) -> bool:
        return self.ratio < 1

    def matrix(self) -> np.ndarray:
        q = self.dim
        R = np.eye(q) if self.rotation is None else np.asarray(self.rotation, float)
        return float(self.ratio) * R

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        b = np.asarray(self.translation, dtype=float)
        if self.rotation is None:
            return float(self.ratio) * x + b
        # supports both a single point (q,) and a batch (n, q)
        return float(self.ratio) * (x @ np.asarray(self.rotation, float).T) + b

    def compose(self, other: "Similitude") -> "Similitude":
        """The map x -> self(other(x))."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        A = self.matrix() @ other.matrix()
        ratio = self.ratio * other.ratio
        b = self.apply(np.asarray(other.translation, float))
        rot = None
        if self.rotation is not None or other.rotation is not None:
            rot = tuple(map(tuple, (A / float(ratio)).tolist()))
        return Similitude(ratio, tuple(float(v) for v in b), rot)

    def fixed_point(self) -> np.ndarray:
        q = self.dim
        A = self.matrix()
        b = np.asarray(self.translation, float)
        return np.linalg.solve(np.eye(q) - A, b)

    def image_box(self, box: Box) -> Box:
        """The bounding box of the image of ``box`` (exact for the identity
        rotation, a certified superset otherwise)."""
        A = self.matrix()
        b = np.asarray(self.translation, float)
        lo = np.asarray(box.lo, float)
        hi = np.asarray(box.hi, float)
        c1 = A * lo[None, :]
        c2 = A * hi[None, :]
        new_lo = np.minimum(c1, c2).sum(axis=1) + b
        new_hi = np.maximum(c1, c2).sum(axis=1) + b
        return Box(tuple(new_lo.tolist()), tuple(new_hi.tolist()))


def compose_map(maps: Sequence[Similitude], sigma: Word) -> Similitude:
    """f_{sigma_1} ∘ ... ∘ f_{sigma_n}; the empty word gives the identity."""
    if len(maps) < sigma.alphabet_size:
        raise ValueError("word symbols exceed available maps")
    q = maps[0].dim
    out = Similitude(Fraction(1), tuple([0.0] * q))
    for s in sigma.symbols:
        out = out.compose(maps[s - 1])
    return out


def _check_probability_vector(ps: Sequence[Fraction], path: str, allow_zero=False):
    for i, p in enumerate(ps):
        if p < 0 or (p == 0 and not allow_zero):
            raise ConfigError(f"{path}[{i}]", f"must be positive, got {p}")
    if sum(ps, Fraction(0)) != 1:
        raise ConfigError(path, f"must sum to 1, got {sum(map(Fraction, ps))}")


@dataclass(frozen=True)
class SimilitudeSystem:
    """A finite family of contractive similitudes with a probability vector."""

    maps: tuple[Similitude, ...]
    weights: tuple[Fraction, ...]
    witness_box: Box | None = None

    def __post_init__(self):
        if not self.maps:
            raise ValueError("system needs at least one map")
        dims = {m.dim for m in self.maps}
        if len(dims) != 1:
            raise ValueError("maps mix dimensions")
        if len(self.weights) != len(self.maps):
            raise ValueError("weights length must match maps")
        for m in self.maps:
            if not m.is_contractive:
                raise ValueError("all maps must be strictly contractive")
        _check_probability_vector(self.weights, "weights")

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def ratios(self) -> tuple[Fraction, ...]:
        return tuple(m.ratio for m in self.maps)

    def min_ratio(self) -> Fraction:
        return min(self.ratios)

    def max_ratio(self) -> Fraction:
        return max(self.ratios)


@dataclass(frozen=True)
class CondensationSystem:
    """Outer maps + mixing vector (p_0..p_N) + inner self-similar measure."""

    outer: tuple[Similitude, ...]
    p0: Fraction
    p: tuple[Fraction, ...]               # p_1..p_N, one per outer map
    case: str                             # "I" or "II"
    inner: SimilitudeSystem               # case I: same maps as outer, weights t
    outer_witness: Box | None = None
    degenerate: bool = False              # p0 = 1 auxiliary-only system

    def __post_init__(self):
        if self.case not in ("I", "II"):
            raise ValueError(f"case must be 'I' or 'II', got {self.case!r}")
        if len(self.p) != len(self.outer):
            raise ValueError("p must have one entry per outer map")
        allp = (self.p0,) + self.p
        if self.degenerate:
            if self.p0 != 1:
                raise ValueError("degenerate system requires p0 = 1")
        else:
            for i, v in enumerate(allp):
                if v <= 0:
                    raise ValueError(f"p[{i}] must be > 0, got {v}")
        if sum(allp, Fraction(0)) != 1:
            raise ValueError(f"p vector must sum to 1, got {sum(allp, Fraction(0))}")
        if self.case == "I" and self.inner.n != len(self.outer):
            raise ValueError("case I needs one inner weight per outer map")
        dims = {m.dim for m in self.outer} | {self.inner.dim}
        if len(dims) != 1:
            raise ValueError("outer and inner dimensions disagree")

    @property
    def dim(self) -> int:
        return self.outer[0].dim

    @property
    def n_outer(self) -> int:
        return len(self.outer)

    @property
    def t(self) -> tuple[Fraction, ...]:
        return self.inner.weights

    @property
    def outer_ratios(self) -> tuple[Fraction, ...]:
        return tuple(m.ratio for m in self.outer)

    @property
    def inner_ratios(self) -> tuple[Fraction, ...]:
        return self.inner.ratios

    def q_floor(self) -> Fraction:
        """min over the outer p_i and the inner t_i (case II level threshold base)."""
        return min(min(self.p), min(self.t))

    def attractor_box(self) -> Box:
        return invariant_box(self.outer)

    def inner_attractor_box(self) -> Box:
        return invariant_box(self.inner.maps)

    def support_box(self) -> Box:
        """Certified enclosure of the support of the condensation measure."""
        if self.case == "I":
            return self.attractor_box()
        # case II support satisfies K = C ∪ f_1(K) ∪ ... ∪ f_N(K)
        box = self.attractor_box().hull(self.inner_attractor_box())
        for _ in range(200):
            new = self.inner_attractor_box()
            for m in self.outer:
                new = new.hull(m.image_box(box))
            if new == box:
                break
            box = new
        return box

    def nu_only(self) -> "CondensationSystem":
        """The auxiliary measure alone, as a degenerate system (p0 = 1)."""
        return CondensationSystem(
            outer=self.outer,
            p0=Fraction(1),
            p=tuple(Fraction(0) for _ in self.outer),
            case=self.case,
            inner=self.inner,
            outer_witness=self.outer_witness,
            degenerate=True,
        )


def attractor_points(
    maps: Sequence[Similitude], depth: int, anchor: np.ndarray | None = None
) -> np.ndarray:
    """{f_sigma(anchor) : |sigma| = depth}; anchor defaults to the first map's
    fixed point.  Hausdorff-close to the attractor for moderate depth."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if anchor is None:
        anchor = maps[0].fixed_point()
    pts = np.asarray(anchor, float).reshape(1, -1)
    for _ in range(depth):
        pts = np.concatenate([m.apply(pts) for m in maps], axis=0)
    return pts


def invariant_box(maps: Sequence[Similitude], iterations: int = 200) -> Box:
    """A certified axis-aligned superset of the attractor.

    Starts from a ball that provably contains the attractor (radius
    max|f_i(0)| / (1 - max ratio) around the origin) and iterates the
    box map B -> hull of the f_i(B), which keeps containing the attractor
    while shrinking toward the minimal invariant box.
    """
    q = maps[0].dim
    smax = max(float(m.ratio) for m in maps)
    bnorm = max(float(np.linalg.norm(np.asarray(m.translation))) for m in maps)
    radius = bnorm / (1.0 - smax) + 1.0
    box = Box(tuple([-radius] * q), tuple([radius] * q))
    for _ in range(iterations):
        imgs = [m.image_box(box) for m in maps]
        new = imgs[0]
        for b in imgs[1:]:
            new = new.hull(b)
        if new == box:
            break
        box = new
    return box


def _log(f: Fraction) -> float:
    return log(f.numerator) - log(f.denominator)


def u0_l0_d0(cs: CondensationSystem) -> tuple[float, float, float]:
    """(sum t_i log t_i, sum t_i log r_i, their ratio) with r the contraction
    ratios that carry the inner measure (outer maps in case I, inner in case II)."""
    t = cs.t
    ratios = cs.outer_ratios if cs.case == "I" else cs.inner_ratios
    u0 = sum(float(ti) * _log(ti) for ti in t)
    l0 = sum(float(ti) * _log(ri) for ti, ri in zip(t, ratios))
    return u0, l0, u0 / l0


def quantization_dimension(cs: CondensationSystem) -> float:
    """The order-zero quantization dimension d0 of the condensation measure."""
    return u0_l0_d0(cs)[2]


def dimension_kr(
    weights: Sequence[Fraction | float],
    ratios: Sequence[Fraction | float],
    r: float,
    tol: float = 1e-12,
    max_steps: int = 200,
) -> float:
    """Quantization dimension of order r for a self-similar measure.

    r = 0 uses the closed form sum(q log q)/sum(q log s); r > 0 solves
    sum (q_i s_i^r)^x = 1 for x = k/(k+r) by bisection on (0,1).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    q = [float(Fraction(w)) for w in weights]
    s = [float(Fraction(x)) for x in ratios]
    if abs(sum(q) - 1.0) > _PROB_TOL:
        raise ValueError("weights must sum to 1")
    if any(not (0 < si < 1) for si in s):
        raise ValueError("ratios must lie in (0,1)")
    if r == 0:
        num = sum(qi * log(qi) for qi in q)
        den = sum(qi * log(si) for qi, si in zip(q, s))
        return num / den

    bases = [qi * si**r for qi, si in zip(q, s)]

    def g(x: float) -> float:
        return sum(b**x for b in bases) - 1.0

    lo, hi = 0.0, 1.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) <= tol:
            return mid * r / (1.0 - mid)
        if val > 0:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError(
        f"k_r bisection did not reach |sum-1| <= {tol} in {max_steps} steps"
    )


# ---------------------------------------------------------------------------
# separation conditions


def _map_images(maps: Sequence[Similitude], box: Box) -> list[Box]:
    return [m.image_box(box) for m in maps]


def validate_osc(maps: Sequence[Similitude], witness: Box | None) -> dict:
    """Check the open set condition against an axis-aligned witness box.

    Image boxes are certified supersets of the true images, so containment
    and disjointness verdicts are sound ('pass' means proven).
    """
    report: dict[str, Any] = {"checks": [], "verdict": None}
    if witness is None:
        report["verdict"] = "unverifiable"
        report["checks"].append(
            {"name": "witness", "status": "missing", "detail": "no witness box supplied"}
        )
        return report
    imgs = _map_images(maps, witness)
    ok_contain = all(witness.contains_box(b) for b in imgs)
    report["checks"].append(
        {"name": "images_inside_witness", "status": "pass" if ok_contain else "fail"}
    )
    ok_disjoint = True
    for i in range(len(imgs)):
        for j in range(i + 1, len(imgs)):
            if not imgs[i].disjoint(imgs[j]):
                ok_disjoint = False
    report["checks"].append(
        {"name": "images_pairwise_disjoint", "status": "pass" if ok_disjoint else "fail"}
    )
    report["verdict"] = "pass" if (ok_contain and ok_disjoint) else "fail"
    return report


def validate_iosc(cs: CondensationSystem) -> dict:
    """Check the in-homogeneous open set condition for a case II system.

    Conditions: (1) f_i(U) inside U, (2) the images pairwise disjoint,
    (3) the inner support inside U and the outer attractor meeting U,
    (4) inner support at positive distance from every f_i(cl U), and the
    boundary of U carrying no inner mass.  The last is verified only in the
    geometric special case where the inner enclosure stays clear of the
    boundary faces; otherwise it is reported as declared, not verified.
    """
    if cs.case != "II":
        raise ValueError("IOSC validation applies to case II systems")
    report: dict[str, Any] = {"checks": [], "verdict": None}
    U = cs.outer_witness
    if U is None:
        report["verdict"] = "unverifiable"
        report["checks"].append(
            {"name": "witness", "status": "missing", "detail": "no outer witness box"}
        )
        return report
    imgs = _map_images(cs.outer, U)
    c1 = all(U.contains_box(b) for b in imgs)
    report["checks"].append({"name": "1_images_inside", "status": "pass" if c1 else "fail"})
    c2 = all(
        imgs[i].disjoint(imgs[j])
        for i in range(len(imgs))
        for j in range(i + 1, len(imgs))
    )
    report["checks"].append({"name": "2_images_disjoint", "status": "pass" if c2 else "fail"})

    cbox = cs.inner_attractor_box()
    c3a = U.contains_box(cbox, strict=True)
    pts = attractor_points(cs.outer, depth=6)
    c3b = any(U.contains_point(p) for p in pts)
    report["checks"].append(
        {"name": "3_inner_support_inside", "status": "pass" if c3a else "fail"}
    )
    report["checks"].append(
        {"name": "3_attractor_meets_witness", "status": "pass" if c3b else "fail",
         "detail": "sample test on depth-6 attractor points"}
    )

    cl_imgs = imgs  # image of cl(U) has the same bounding box
    gaps = [cbox.gap_to(b) for b in cl_imgs]
    c4b = all(g > 0 for g in gaps)
    report["checks"].append(
        {"name": "4_inner_support_clear_of_images", "status": "pass" if c4b else "fail",
         "detail": f"min gap {min(gaps):.3g}"}
    )
    # boundary mass: sufficient condition is the inner enclosure strictly
    # inside U, which keeps supp(nu) off every boundary face
    if c3a:
        report["checks"].append({"name": "4_boundary_mass_zero", "status": "pass",
                                 "detail": "inner enclosure strictly interior"})
        c4a = True
    else:
        report["checks"].append({"name": "4_boundary_mass_zero", "status": "declared",
                                 "detail": "not verified geometrically"})
        c4a = True  # declared, not a failure
    report["verdict"] = "pass" if (c1 and c2 and c3a and c3b and c4b and c4a) else "fail"
    return report


# ---------------------------------------------------------------------------
# configuration


def _parse_box(node: Any, q: int, path: str) -> Box:
    try:
        lo, hi = node
        lo = tuple(float(_rational(v, path)) for v in lo)
        hi = tuple(float(_rational(v, path)) for v in hi)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, "expected [[lo...],[hi...]]") from exc
    if len(lo) != q or len(hi) != q:
        raise ConfigError(path, f"box dimension must be {q}")
    return Box(lo, hi)


def _parse_map(node: Any, q: int, path: str) -> Similitude:
    if not isinstance(node, dict) or "ratio" not in node:
        raise ConfigError(path, "map needs at least a 'ratio'")
    ratio = _rational(node["ratio"], f"{path}.ratio")
    trans = node.get("translation", [0] * q)
    if len(trans) != q:
        raise ConfigError(f"{path}.translation", f"must have {q} entries")
    translation = tuple(float(_rational(v, f"{path}.translation")) for v in trans)
    rotation = None
    if node.get("rotation") is not None:
        rows = node["rotation"]
        rotation = tuple(
            tuple(float(_rational(v, f"{path}.rotation")) for v in row) for row in rows
        )
    try:
        return Similitude(ratio, translation, rotation)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_config(doc: dict) -> CondensationSystem:
    """Build a condensation system from one parsed configuration document."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be a mapping")
    q = doc.get("dimension", 1)
    if not isinstance(q, int) or q < 1:
        raise ConfigError("dimension", f"must be a positive integer, got {q!r}")
    outer_node = doc.get("outer")
    if not isinstance(outer_node, dict):
        raise ConfigError("outer", "missing outer system")
    maps_node = outer_node.get("maps")
    if not maps_node:
        raise ConfigError("outer.maps", "needs at least one map")
    maps = tuple(
        _parse_map(m, q, f"outer.maps[{i}]") for i, m in enumerate(maps_node)
    )
    p_node = outer_node.get("p")
    if not p_node or len(p_node) != len(maps) + 1:
        raise ConfigError("outer.p", f"needs {len(maps) + 1} entries (p0..p{len(maps)})")
    pvec = [_rational(v, f"outer.p[{i}]") for i, v in enumerate(p_node)]
    if any(v <= 0 for v in pvec):
        raise ConfigError("outer.p", "entries must be positive")
    if sum(pvec, Fraction(0)) != 1:
        raise ConfigError("outer.p", f"must sum to 1 exactly, got {sum(pvec, Fraction(0))}")
    witness = None
    if outer_node.get("witness_box") is not None:
        witness = _parse_box(outer_node["witness_box"], q, "outer.witness_box")

    case = doc.get("case")
    if case not in ("I", "II"):
        raise ConfigError("case", f"must be 'I' or 'II', got {case!r}")
    inner_node = doc.get("inner")
    if not isinstance(inner_node, dict):
        raise ConfigError("inner", "missing inner section")
    t_node = inner_node.get("t")
    if not t_node:
        raise ConfigError("inner.t", "missing inner weights")
    t = tuple(_rational(v, f"inner.t[{i}]") for i, v in enumerate(t_node))
    if any(v <= 0 for v in t):
        raise ConfigError("inner.t", "entries must be positive")
    if sum(t, Fraction(0)) != 1:
        raise ConfigError("inner.t", f"must sum to 1 exactly, got {sum(t, Fraction(0))}")

    if case == "I":
        if len(t) != len(maps):
            raise ConfigError("inner.t", "case I needs one weight per outer map")
        inner = SimilitudeSystem(maps, t, witness)
    else:
        imaps_node = inner_node.get("maps")
        if not imaps_node:
            raise ConfigError("inner.maps", "case II needs inner maps")
        imaps = tuple(
            _parse_map(m, q, f"inner.maps[{i}]") for i, m in enumerate(imaps_node)
        )
        if len(t) != len(imaps):
            raise ConfigError("inner.t", "needs one weight per inner map")
        iwitness = None
        if inner_node.get("witness_box") is not None:
            iwitness = _parse_box(inner_node["witness_box"], q, "inner.witness_box")
        inner = SimilitudeSystem(imaps, t, iwitness)

    try:
        return CondensationSystem(
            outer=maps, p0=pvec[0], p=tuple(pvec[1:]), case=case, inner=inner,
            outer_witness=witness,
        )
    except ValueError as exc:
        raise ConfigError("$", str(exc)) from exc


BUILTIN_CONFIGS = ("cantor-i", "asym-i", "cantor-ii")


def builtin_config_path(name: str):
    key = name.lower()
    if key not in BUILTIN_CONFIGS:
        raise ConfigError("$", f"unknown builtin config {name!r}; have {BUILTIN_CONFIGS}")
    return resources.files("fqz").joinpath(f"configs/{key}.json")


def load_config(source: str) -> tuple[CondensationSystem, str]:
    """Load a system from a file path or a builtin name.

    Returns the system and the raw config text (used for manifest hashing).
    """
    import os

    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif source.lower() in BUILTIN_CONFIGS:
        text = builtin_config_path(source).read_text(encoding="utf-8")
    else:
        raise ConfigError("$", f"no such config file or builtin name: {source!r}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return parse_config(doc), text
