"""Finite-word algebra over the symbolic code spaces of an iterated function system.

Words are finite strings of symbols from {1..N}.  The alphabet size travels
with each word, so words over the outer alphabet and words over an inner
alphabet cannot be mixed by accident.  Everything here is an immutable value;
construction validates, after which objects are safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Word",
    "Relation",
    "Antichain",
    "empty_word",
    "relate",
    "descendants",
    "has_proper_descendant_in",
    "lambda_star",
    "threshold_antichain",
    "threshold_stats",
    "ThresholdStats",
    "random_maximal_antichain",
    "parse_word",
]


@dataclass(frozen=True, order=True)
class Word:
    """A finite word over {1..alphabet_size}; the empty word is allowed."""

    symbols: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self) -> None:
        if self.alphabet_size < 1:
            raise ValueError(f"alphabet_size must be >= 1, got {self.alphabet_size}")
        for s in self.symbols:
            if not (1 <= s <= self.alphabet_size):
                raise ValueError(
                    f"symbol {s} outside alphabet 1..{self.alphabet_size}"
                )

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def is_empty(self) -> bool:
        return not self.symbols

    def concat(self, other: "Word") -> "Word":
        if other.alphabet_size != self.alphabet_size:
            raise ValueError(
                f"alphabet mismatch: {self.alphabet_size} vs {other.alphabet_size}"
            )
        return Word(self.symbols + other.symbols, self.alphabet_size)

    def truncate(self, n: int) -> "Word":
        """First n symbols."""
        if not (0 <= n <= len(self.symbols)):
            raise ValueError(f"truncate length {n} outside 0..{len(self.symbols)}")
        return Word(self.symbols[:n], self.alphabet_size)

    def suffix(self, h: int) -> "Word":
        """Drop the first h symbols; h = 0 returns the word itself."""
        if not (0 <= h < len(self.symbols) or (h == 0 and not self.symbols)):
            raise ValueError(f"suffix offset {h} outside 0..{max(len(self) - 1, 0)}")
        return Word(self.symbols[h:], self.alphabet_size)

    def parent(self) -> "Word":
        """The word with the last symbol removed."""
        if not self.symbols:
            raise ValueError("the empty word has no parent")
        return Word(self.symbols[:-1], self.alphabet_size)

    def child(self, i: int) -> "Word":
        return Word(self.symbols + (i,), self.alphabet_size)

    def is_prefix_of(self, other: "Word") -> bool:
        return (
            len(self.symbols) <= len(other.symbols)
            and other.symbols[: len(self.symbols)] == self.symbols
        )

    def __str__(self) -> str:
        # Compact digit string for small alphabets, dash-separated otherwise.
        if self.alphabet_size <= 9:
            return "".join(str(s) for s in self.symbols)
        return "-".join(str(s) for s in self.symbols)


def empty_word(alphabet_size: int) -> Word:
    return Word((), alphabet_size)


def parse_word(text: str, alphabet_size: int) -> Word:
    """Inverse of str(word): digit string if alphabet <= 9, else dash-separated."""
    text = text.strip()
    if not text:
        return empty_word(alphabet_size)
    if alphabet_size <= 9:
        syms = tuple(int(ch) for ch in text)
    else:
        syms = tuple(int(part) for part in text.split("-"))
    return Word(syms, alphabet_size)


class Relation(enum.Enum):
    PREDECESSOR_OF = "predecessor_of"
    DESCENDANT_OF = "descendant_of"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def relate(a: Word, b: Word) -> Relation:
    if a.alphabet_size != b.alphabet_size:
        raise ValueError("alphabet mismatch")
    if a.symbols == b.symbols:
        return Relation.EQUAL
    if a.is_prefix_of(b):
        return Relation.PREDECESSOR_OF
    if b.is_prefix_of(a):
        return Relation.DESCENDANT_OF
    return Relation.INCOMPARABLE


def descendants(sigma: Word, h: int) -> list[Word]:
    """All words extending sigma by exactly h symbols, in lexicographic order."""
    if h < 0:
        raise ValueError("h must be >= 0")
    out = [sigma]
    for _ in range(h):
        out = [w.child(i) for w in out for i in range(1, sigma.alphabet_size + 1)]
    return out


@dataclass(frozen=True)
class Antichain:
    """A finite set of pairwise-incomparable words.

    ``min_len``/``max_len`` are the extreme member lengths.  Use
    :meth:`is_maximal` to test whether every infinite symbol stream passes
    through a member.
    """

    alphabet_size: int
    members: frozenset[Word] = field(repr=False)
    min_len: int
    max_len: int

    @classmethod
    def from_members(cls, members: Iterable[Word], alphabet_size: int | None = None) -> "Antichain":
        mset = frozenset(members)
        if not mset:
            raise ValueError("an antichain here must be nonempty")
        sizes = {w.alphabet_size for w in mset}
        if len(sizes) != 1:
            raise ValueError("members mix alphabets")
        n = sizes.pop()
        if alphabet_size is not None and alphabet_size != n:
            raise ValueError("alphabet_size disagrees with members")
        # Pairwise incomparability: no member may be a proper prefix of another.
        key_set = {w.symbols for w in mset}
        for w in mset:
            for k in range(len(w.symbols)):
                if w.symbols[:k] in key_set:
                    raise ValueError(f"members comparable: {w.truncate(k)} precedes {w}")
        lens = [len(w) for w in mset]
        return cls(n, mset, min(lens), max(lens))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Word]:
        return iter(sorted(self.members))

    def __contains__(self, w: Word) -> bool:
        return w in self.members

    def is_maximal(self) -> bool:
        """True iff every word of length max_len has a predecessor in the set."""
        key_set = {w.symbols for w in self.members}

        def covered(prefix: tuple[int, ...]) -> bool:
            if prefix in key_set:
                return True
            if len(prefix) >= self.max_len:
                return False
            return all(
                covered(prefix + (i,)) for i in range(1, self.alphabet_size + 1)
            )

        return covered(())

    def weight_sum(self, weights: Sequence[Fraction]) -> Fraction:
        """Sum of multiplicative member weights, exact."""
        _check_weights_len(weights, self.alphabet_size)
        total = Fraction(0)
        for w in self.members:
            prod = Fraction(1)
            for s in w.symbols:
                prod *= weights[s - 1]
            total += prod
        return total


def has_proper_descendant_in(sigma: Word, antichain: Antichain) -> bool:
    """True iff some member strictly extends sigma."""
    return any(
        len(m) > len(sigma) and sigma.is_prefix_of(m) for m in antichain.members
    )


def lambda_star(antichain: Antichain) -> set[Word]:
    """Words of length >= min_len having a proper descendant in the antichain.

    Computed as the set of strict prefixes of members cut at min_len or longer.
    """
    out: set[Word] = set()
    lo = antichain.min_len
    for m in antichain.members:
        for k in range(lo, len(m)):
            out.add(m.truncate(k))
    return out


def _check_weights_len(weights: Sequence, n: int) -> None:
    if len(weights) != n:
        raise ValueError(f"expected {n} weights, got {len(weights)}")


def _as_fractions(weights: Sequence[Fraction | int | str]) -> list[Fraction]:
    out = []
    for w in weights:
        f = Fraction(w)
        if not (0 < f < 1):
            raise ValueError(f"weights must lie strictly in (0,1), got {w}")
        out.append(f)
    return out


def threshold_antichain(
    weights: Sequence[Fraction | int | str],
    eps: Fraction | float,
    backend: str = "exact",
) -> Antichain:
    """The antichain {w : weight(parent) >= eps > weight(w)} for multiplicative weights.

    The boundary comparison is weak on the left and strict on the right,
    with no tolerance fudging.  ``backend="exact"`` compares exact rationals;
    ``backend="float"`` runs the same descent on accumulated log-weights and
    is intended for depths where rational arithmetic becomes heavy.  Both
    produce the same member set for rational inputs away from float ties.
    """
    fw = _as_fractions(weights)
    if isinstance(eps, float):
        eps_f = Fraction(eps)
    else:
        eps_f = Fraction(eps)
    if not (Fraction(0) < eps_f < 1):
        raise ValueError(f"eps must lie in (0,1), got {eps}")
    n = len(fw)
    members: list[Word] = []

    if backend == "exact":
        def walk(prefix: tuple[int, ...], w: Fraction) -> None:
            for i in range(1, n + 1):
                cw = w * fw[i - 1]
                if cw < eps_f:
                    members.append(Word(prefix + (i,), n))
                else:
                    walk(prefix + (i,), cw)

        walk((), Fraction(1))
    elif backend == "float":
        log_w = [log(float(f)) for f in fw]
        log_eps = log(float(eps_f))

        def walkf(prefix: tuple[int, ...], lw: float) -> None:
            for i in range(1, n + 1):
                clw = lw + log_w[i - 1]
                if clw < log_eps:
                    members.append(Word(prefix + (i,), n))
                else:
                    walkf(prefix + (i,), clw)

        walkf((), 0.0)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    return Antichain.from_members(members, n)


@dataclass(frozen=True)
class ThresholdStats:
    """Aggregate statistics of a threshold antichain, gathered without
    materializing the member words."""

    count: int
    min_len: int
    max_len: int
    weight_sum: Fraction          # sum of member weights (exact)
    weight_log_weight: float      # sum of weight * log(weight)
    weight_log_aux: float         # sum of weight * log(aux weight), aux per symbol
    weight_len: float             # sum of weight * length


def threshold_stats(
    weights: Sequence[Fraction],
    aux: Sequence[Fraction],
    eps: Fraction,
    _memo: dict | None = None,
) -> ThresholdStats:
    """Statistics of {w : weight(parent) >= eps > weight(w)} via a memoized
    subtree recursion.

    The subtree below a node depends only on eps divided by the node weight,
    so results are cached per residual threshold.  ``eps`` may equal 1, in
    which case the antichain is the full first level.  ``aux`` supplies a
    second per-symbol weight whose log is accumulated alongside.
    """
    fw = [Fraction(w) for w in weights]
    fa = [Fraction(a) for a in aux]
    _check_weights_len(fa, len(fw))
    for f in fw:
        if not (0 < f < 1):
            raise ValueError("weights must lie strictly in (0,1)")
    if not (Fraction(0) < eps <= 1):
        raise ValueError(f"eps must lie in (0,1], got {eps}")
    logs_w = [log(f.numerator) - log(f.denominator) for f in fw]
    logs_a = [log(f.numerator) - log(f.denominator) for f in fa]
    memo: dict[Fraction, ThresholdStats] = {} if _memo is None else _memo

    def solve(e: Fraction) -> ThresholdStats:
        hit = memo.get(e)
        if hit is not None:
            return hit
        count = 0
        min_len = None
        max_len = 0
        wsum = Fraction(0)
        wlw = 0.0
        wla = 0.0
        wlen = 0.0
        for i, wi in enumerate(fw):
            if wi < e:
                count += 1
                min_len = 1 if min_len is None else min(min_len, 1)
                max_len = max(max_len, 1)
                wsum += wi
                wf = float(wi)
                wlw += wf * logs_w[i]
                wla += wf * logs_a[i]
                wlen += wf
            else:
                sub = solve(e / wi)
                count += sub.count
                min_len = (
                    sub.min_len + 1 if min_len is None else min(min_len, sub.min_len + 1)
                )
                max_len = max(max_len, sub.max_len + 1)
                wsum += wi * sub.weight_sum
                wf = float(wi)
                ws = float(sub.weight_sum)
                wlw += wf * (sub.weight_log_weight + logs_w[i] * ws)
                wla += wf * (sub.weight_log_aux + logs_a[i] * ws)
                wlen += wf * (sub.weight_len + ws)
        stats = ThresholdStats(count, min_len or 0, max_len, wsum, wlw, wla, wlen)
        memo[e] = stats
        return stats

    return solve(Fraction(eps))


def random_maximal_antichain(alphabet_size: int, rng, max_depth: int = 8) -> Antichain:
    """A random finite maximal antichain, built by repeatedly expanding leaves.

    Starts from the first level and expands randomly chosen leaves into their
    children, so maximality holds by construction.
    """
    leaves = [Word((i,), alphabet_size) for i in range(1, alphabet_size + 1)]
    n_steps = int(rng.integers(0, 3 * alphabet_size + 4))
    for _ in range(n_steps):
        expandable = [i for i, w in enumerate(leaves) if len(w) < max_depth]
        if not expandable:
            break
        k = expandable[int(rng.integers(0, len(expandable)))]
        w = leaves.pop(k)
        leaves.extend(w.child(i) for i in range(1, alphabet_size + 1))
    return Antichain.from_members(leaves, alphabet_size)
