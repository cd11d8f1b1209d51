"""Free groups, their Cayley trees and the visual boundary.

Letters of F_k are integers ``0 .. 2k-1``: generator ``i`` is ``2i`` and its
inverse is ``2i + 1``, so inversion is ``letter ^ 1``. Printed words use
``a, b, c, ...`` for generators and upper case for inverses. The global
letter order ``a < A < b < B < ...`` is the integer order, and every
enumeration of cylinders in this package is lexicographic in it.

All distances, derivatives and measures are exact: distances and metric
derivatives are integer exponents (:class:`ScaleExponent`), measures are
:class:`fractions.Fraction`. Floats appear only when a value is materialised
through :meth:`TreeBoundarySpace.scale`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import DepthTooShallow, NeedsRefinement, NonConstantDistance

INFINITE = math.inf


def letter_name(letter: int) -> str:
    ch = chr(ord("a") + letter // 2)
    return ch.upper() if letter & 1 else ch


def parse_letter(ch: str) -> int:
    base = ord(ch.lower()) - ord("a")
    if not 0 <= base < 26:
        raise ValueError(f"not a letter: {ch!r}")
    return 2 * base + (1 if ch.isupper() else 0)


def free_reduce(letters: Sequence[int]) -> tuple[int, ...]:
    """Cancel adjacent inverse pairs until none remain."""
    out: list[int] = []
    for x in letters:
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def common_prefix_length(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


@dataclass(frozen=True)
class ReducedWord:
    """A reduced word, i.e. an element of the free group (and a vertex of its tree)."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        for x, y in zip(self.letters, self.letters[1:]):
            if x == y ^ 1:
                raise ValueError(f"word is not reduced: {self.letters}")
        if any(x < 0 for x in self.letters):
            raise ValueError("letters must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "ReducedWord":
        return cls(tuple(parse_letter(ch) for ch in text))

    @classmethod
    def from_letters(cls, letters: Sequence[int]) -> "ReducedWord":
        """Build the reduced form of an arbitrary letter sequence."""
        return cls(free_reduce(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return "".join(letter_name(x) for x in self.letters) or "1"

    def __repr__(self) -> str:
        return f"ReducedWord({str(self)!r})"

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return ReducedWord(free_reduce(self.letters + other.letters))

    def __pow__(self, n: int) -> "ReducedWord":
        if n < 0:
            return self.inverse() ** (-n)
        out = ReducedWord()
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(x ^ 1 for x in reversed(self.letters)))

    def max_letter(self) -> int:
        return max(self.letters, default=-1)


IDENTITY = ReducedWord()


@dataclass(frozen=True)
class BoundaryPoint:
    """An eventually periodic infinite reduced word ``preperiod + period + period + ...``."""

    preperiod: ReducedWord
    period: ReducedWord

    def __post_init__(self) -> None:
        if len(self.period) == 0:
            raise ValueError("period must be non-empty")
        # the concatenation pre + per + per is reduced iff the whole ray is
        ReducedWord(self.preperiod.letters + self.period.letters + self.period.letters)

    @classmethod
    def parse(cls, preperiod: str, period: str) -> "BoundaryPoint":
        return cls(ReducedWord.parse(preperiod), ReducedWord.parse(period))

    def prefix(self, n: int) -> tuple[int, ...]:
        pre, per = self.preperiod.letters, self.period.letters
        if n <= len(pre):
            return pre[:n]
        reps = (n - len(pre)) // len(per) + 1
        return (pre + per * reps)[:n]

    def __str__(self) -> str:
        return f"{self.preperiod if len(self.preperiod) else ''}({self.period})^inf"


@dataclass(frozen=True)
class Cylinder:
    """All boundary rays extending ``word``; depth 0 is the whole boundary."""

    word: ReducedWord

    @classmethod
    def parse(cls, text: str) -> "Cylinder":
        return cls(ReducedWord.parse(text))

    @property
    def depth(self) -> int:
        return len(self.word)

    def contains(self, other: Union["Cylinder", BoundaryPoint]) -> bool:
        letters = self.word.letters
        if isinstance(other, BoundaryPoint):
            return other.prefix(len(letters)) == letters
        return other.word.letters[: len(letters)] == letters

    def __str__(self) -> str:
        return f"C_{self.word}"


@dataclass(frozen=True, order=True)
class ScaleExponent:
    """The exact positive number ``exp(-epsilon * m)``.

    Multiplication adds exponents. Ordering compares exponents, so a larger
    exponent is a *smaller* value.
    """

    m: Union[int, float]

    def __mul__(self, other: "ScaleExponent") -> "ScaleExponent":
        return ScaleExponent(self.m + other.m)

    def __truediv__(self, other: "ScaleExponent") -> "ScaleExponent":
        return ScaleExponent(self.m - other.m)

    def __pow__(self, n: int) -> "ScaleExponent":
        return ScaleExponent(self.m * n)


class TreeBoundarySpace:
    """The boundary of the Cayley tree of F_k with its visual metric and measure.

    ``epsilon`` defaults to ``ln(2k-1)``, which makes the Hausdorff dimension
    ``D = 1`` and every distance to a power ``1/D`` a power of ``q = 2k-1``.
    """

    def __init__(self, k: int = 2, epsilon: float | None = None):
        if k < 2:
            raise ValueError("k must be at least 2")
        self.k = int(k)
        self.q = 2 * self.k - 1
        self.is_default = epsilon is None
        self.epsilon = math.log(self.q) if epsilon is None else float(epsilon)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.D = 1.0 if self.is_default else math.log(self.q) / self.epsilon

    def __repr__(self) -> str:
        return f"TreeBoundarySpace(k={self.k}, epsilon={self.epsilon:.6g}, D={self.D:.6g})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TreeBoundarySpace)
            and self.k == other.k
            and self.epsilon == other.epsilon
        )

    def __hash__(self) -> int:
        return hash((self.k, self.epsilon))

    @property
    def diam(self) -> float:
        return 1.0

    @property
    def ahlfors_constant(self) -> Fraction:
        """``nu(B(xi, exp(-epsilon n))) / exp(-epsilon n D)`` for integer ``n >= 1``."""
        return Fraction(self.q, 2 * self.k)

    def scale(self, exponent: ScaleExponent | float) -> float:
        m = exponent.m if isinstance(exponent, ScaleExponent) else exponent
        return math.exp(-self.epsilon * m)

    def power_of_scale(self, m: float, power: float) -> float:
        """``exp(-epsilon * m) ** power`` as a float."""
        return math.exp(-self.epsilon * m * power)

    def exact_q_power(self, exponent: Fraction | int) -> Fraction | None:
        """``q ** exponent`` as a Fraction when it is rational, else ``None``."""
        exponent = Fraction(exponent)
        if exponent.denominator != 1:
            return None
        return Fraction(self.q) ** int(exponent)

    # -- cylinder bookkeeping -------------------------------------------------

    def cylinder_count(self, depth: int) -> int:
        if depth == 0:
            return 1
        return 2 * self.k * self.q ** (depth - 1)

    def cell_measure(self, depth: int) -> Fraction:
        if depth == 0:
            return Fraction(1)
        return Fraction(1, 2 * self.k * self.q ** (depth - 1))

    def check_word(self, word: ReducedWord) -> None:
        if word.max_letter() >= 2 * self.k:
            raise ValueError(f"{word} uses letters outside F_{self.k}")

    def words(self, depth: int) -> list[ReducedWord]:
        return [ReducedWord(tuple(row)) for row in self.word_array(depth)]

    def cylinders(self, depth: int) -> list[Cylinder]:
        return [Cylinder(w) for w in self.words(depth)]

    def word_array(self, depth: int) -> np.ndarray:
        """All reduced words of length ``depth`` as rows of an int array, in lex order."""
        return _word_array(self.k, depth)

    def radices(self, depth: int) -> tuple[int, ...]:
        """Mixed radix of the lex index: ``2k`` for the first letter, then ``q``."""
        if depth == 0:
            return ()
        return (2 * self.k,) + (self.q,) * (depth - 1)

    def index_of(self, word: ReducedWord | Sequence[int]) -> int:
        letters = word.letters if isinstance(word, ReducedWord) else tuple(word)
        return int(self.indices_of(np.asarray([letters], dtype=np.int64).reshape(1, len(letters)))[0])

    def indices_of(self, letters: np.ndarray) -> np.ndarray:
        """Lex indices of the rows of ``letters`` among the words of that length."""
        letters = np.asarray(letters, dtype=np.int64)
        n_rows, depth = letters.shape
        if depth == 0:
            return np.zeros(n_rows, dtype=np.int64)
        index = letters[:, 0].copy()
        for i in range(1, depth):
            prev_inv = letters[:, i - 1] ^ 1
            digit = letters[:, i] - (letters[:, i] > prev_inv)
            index = index * self.q + digit
        return index

    def divergence_matrix(self, depth: int) -> np.ndarray:
        """``cp(c, c')`` for all pairs of depth-``depth`` cylinders (diagonal = depth)."""
        words = self.word_array(depth)
        n = len(words)
        out = np.zeros((n, n), dtype=np.int16)
        alive = np.ones((n, n), dtype=bool)
        for i in range(depth):
            alive &= words[:, i][:, None] == words[:, i][None, :]
            out += alive
        return out

    def prefix_profile(self, depth: int, word: ReducedWord | Sequence[int], cap: int | None = None) -> np.ndarray:
        """``min(cp(c, word), cap)`` for every depth-``depth`` cylinder ``c``, in lex order.

        Cylinders sharing the prefix ``word[:m]`` form one contiguous block of
        the lex order, so this costs one slice per prefix length.
        """
        letters = word.letters if isinstance(word, ReducedWord) else tuple(word)
        top = min(len(letters), depth, len(letters) if cap is None else cap)
        out = np.zeros(self.cylinder_count(depth), dtype=np.int16)
        for m in range(1, top + 1):
            size = self.q ** (depth - m)
            start = self.index_of(letters[:m]) * size
            out[start : start + size] += 1
        return out

    def derivative_exponents(self, g: ReducedWord, depth: int, orientation: str = "inverse") -> np.ndarray:
        """Exponents of ``D_g`` on all depth-``depth`` cylinders (``depth >= |g|``)."""
        if depth < len(g):
            raise NeedsRefinement(f"D_{g} varies on depth-{depth} cylinders")
        ref = derivative_reference(g, orientation)
        return len(g) - 2 * self.prefix_profile(depth, ref, cap=len(g))

    def block_measures(self, depth: int) -> list[Fraction]:
        """Measure of the depth-``j`` ancestor block of any cell, ``j = 0..depth``."""
        return [self.cell_measure(j) for j in range(depth + 1)]


@lru_cache(maxsize=32)
def _word_array(k: int, depth: int) -> np.ndarray:
    alphabet = 2 * k
    if depth == 0:
        arr = np.zeros((1, 0), dtype=np.int8)
    else:
        allowed = np.array(
            [[x for x in range(alphabet) if x != last ^ 1] for last in range(alphabet)],
            dtype=np.int8,
        )
        arr = np.arange(alphabet, dtype=np.int8).reshape(alphabet, 1)
        for _ in range(depth - 1):
            q = alphabet - 1
            ext = allowed[arr[:, -1]].reshape(-1, 1)
            arr = np.hstack([np.repeat(arr, q, axis=0), ext])
    arr.setflags(write=False)
    return arr


# -- Gromov products and distances ---------------------------------------------

Point = Union[ReducedWord, BoundaryPoint]


def gromov_product(a: Point, b: Point) -> Union[int, float]:
    """Gromov product based at the identity: the common prefix length.

    Two identical boundary rays give ``math.inf``.
    """
    if isinstance(a, BoundaryPoint) and isinstance(b, BoundaryPoint):
        lp, lq = len(a.period), len(b.period)
        horizon = max(len(a.preperiod), len(b.preperiod)) + lp * lq // math.gcd(lp, lq)
        n = common_prefix_length(a.prefix(horizon), b.prefix(horizon))
        return INFINITE if n == horizon else n
    if isinstance(a, BoundaryPoint):
        a, b = b, a
    if isinstance(b, BoundaryPoint):
        return common_prefix_length(a.letters, b.prefix(len(a)))
    return common_prefix_length(a.letters, b.letters)


def visual_distance(
    x: Union[Cylinder, BoundaryPoint, ReducedWord], y: Union[Cylinder, BoundaryPoint, ReducedWord]
) -> ScaleExponent:
    """Visual distance ``exp(-epsilon <x, y>)`` as an exponent.

    Cylinders stand for any of their points, so the distance must be constant
    on the pair: disjoint cylinders, or a point outside a cylinder. A
    :class:`ReducedWord` is a tree vertex and uses the extended distance.
    """
    if isinstance(x, Cylinder) and isinstance(y, Cylinder):
        if x.contains(y) or y.contains(x):
            raise NonConstantDistance(f"{x} and {y} are nested")
        return ScaleExponent(common_prefix_length(x.word.letters, y.word.letters))
    if isinstance(y, Cylinder):
        x, y = y, x
    if isinstance(x, Cylinder):
        if isinstance(y, BoundaryPoint) and x.contains(y):
            raise NonConstantDistance(f"{y} lies in {x}")
        if isinstance(y, ReducedWord):
            n = common_prefix_length(x.word.letters, y.letters)
            if n == len(x.word):
                raise NonConstantDistance(f"{x} lies in the shadow of {y}")
            return ScaleExponent(n)
        return ScaleExponent(gromov_product(x.word, y))
    return ScaleExponent(gromov_product(x, y))


def cylinder_measure(space: TreeBoundarySpace, c: Cylinder) -> Fraction:
    space.check_word(c.word)
    return space.cell_measure(c.depth)


# -- metric derivative and action ----------------------------------------------

def derivative_reference(g: ReducedWord, orientation: str = "inverse") -> ReducedWord:
    """The vertex whose Gromov product with xi drives ``D_g(xi)``.

    ``"inverse"`` (the default) uses ``g^{-1} o`` and satisfies the geometric
    mean value identity; ``"forward"`` uses ``g o`` and exists only as a
    negative control.
    """
    if orientation == "inverse":
        return g.inverse()
    if orientation == "forward":
        return g
    raise ValueError(f"unknown orientation {orientation!r}")


def derivative_exponent_of_prefix(g: ReducedWord, prefix: Sequence[int], orientation: str = "inverse") -> int:
    """Exponent of ``D_g`` on the set of rays starting with ``prefix``.

    Requires ``D_g`` to be constant there.
    """
    ref = derivative_reference(g, orientation).letters
    n = len(g)
    m = common_prefix_length(prefix, ref)
    if m >= min(len(prefix), n) and len(prefix) < n:
        raise NeedsRefinement(f"D_{g} varies on C_{ReducedWord(tuple(prefix))}")
    return n - 2 * min(m, n)


def metric_derivative(g: ReducedWord, c: Cylinder, orientation: str = "inverse") -> ScaleExponent:
    """``D_g`` on ``c`` as an exponent: ``|g| - 2 min(<c, g^{-1}>, |g|)``.

    ``D_g(xi) = exp(epsilon (2 <xi, g^{-1} o> - |g|))``; raises
    :class:`NeedsRefinement` when ``c`` is too shallow for this to be constant.
    """
    return ScaleExponent(derivative_exponent_of_prefix(g, c.word.letters, orientation))


def act(g: ReducedWord, c: Cylinder) -> Cylinder:
    """Image ``g . c``; defined when ``depth(c) > |g|``."""
    if c.depth <= len(g):
        raise DepthTooShallow(f"depth({c}) = {c.depth} must exceed |{g}| = {len(g)}")
    return Cylinder(g * c.word)


def act_point(g: ReducedWord, xi: BoundaryPoint) -> BoundaryPoint:
    per = xi.period.letters
    reps = (len(g) + len(per)) // len(per) + 1
    head = free_reduce(g.letters + xi.preperiod.letters + per * reps)
    return BoundaryPoint(ReducedWord(head), xi.period)


def annuli(space: TreeBoundarySpace, g: ReducedWord) -> list[tuple[int, Fraction]]:
    """Masses of ``A_m = {xi : <xi, g o> = m}`` for ``m = 0..|g|``."""
    n = len(g)
    if n < 1:
        raise ValueError("annuli need |g| >= 1")
    space.check_word(g)
    nested = [space.cell_measure(j) for j in range(n + 1)]
    return [(m, nested[m] - nested[m + 1]) for m in range(n)] + [(n, nested[n])]


def closest_boundary_ray(g: ReducedWord) -> BoundaryPoint:
    """A ray through ``g o``: ``g`` followed by the least letter that does not cancel, forever."""
    if len(g) < 1:
        raise ValueError("need |g| >= 1")
    last = g.letters[-1]
    nxt = 0 if last != 1 else 1
    return BoundaryPoint(g, ReducedWord((nxt,)))


def random_word(rng: np.random.Generator, k: int, length: int) -> ReducedWord:
    letters: list[int] = []
    for _ in range(length):
        choices = [x for x in range(2 * k) if not letters or x != letters[-1] ^ 1]
        letters.append(int(rng.choice(choices)))
    return ReducedWord(tuple(letters))


def words_up_to(k: int, max_length: int) -> Iterator[ReducedWord]:
    for n in range(max_length + 1):
        for row in _word_array(k, n):
            yield ReducedWord(tuple(int(x) for x in row))
