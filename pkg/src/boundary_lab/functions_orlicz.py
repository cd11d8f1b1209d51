"""Locally constant functions on the tree boundary, L^p and Zygmund-class norms.

A :class:`CylinderFunction` stores one value per depth-``n`` cylinder in lex
order. Values are either a float/complex array or an object array of
:class:`fractions.Fraction` ("exact"); exact functions keep L^p powers and
energies rational.

Norms accept a :class:`CylinderFunction` or a
:class:`~boundary_lab.ahlfors_sampled.SampledFunction`; both reduce to point
weights plus values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .ahlfors_sampled import SampledFunction
from .errors import ZeroFunction
from .word_tree import ReducedWord, TreeBoundarySpace

LUXEMBURG_ATOL = 1e-10
LUXEMBURG_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    space: TreeBoundarySpace
    depth: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        expected = self.space.cylinder_count(self.depth)
        if values.shape != (expected,):
            raise ValueError(f"depth {self.depth} needs {expected} values, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, space: TreeBoundarySpace, value=1, depth: int = 0, exact: bool = True) -> "CylinderFunction":
        n = space.cylinder_count(depth)
        if exact:
            return cls(space, depth, np.array([Fraction(value)] * n, dtype=object))
        return cls(space, depth, np.full(n, value, dtype=complex if isinstance(value, complex) else float))

    @classmethod
    def indicator(cls, space: TreeBoundarySpace, word: ReducedWord | str, exact: bool = True) -> "CylinderFunction":
        """``chi_{C_word}`` at depth ``|word|``."""
        w = ReducedWord.parse(word) if isinstance(word, str) else word
        space.check_word(w)
        n = space.cylinder_count(len(w))
        idx = space.index_of(w)
        if exact:
            vals = np.array([Fraction(0)] * n, dtype=object)
            vals[idx] = Fraction(1)
        else:
            vals = np.zeros(n)
            vals[idx] = 1.0
        return cls(space, len(w), vals)

    @classmethod
    def random_normal(
        cls, space: TreeBoundarySpace, depth: int, rng: np.random.Generator, complex_values: bool = False
    ) -> "CylinderFunction":
        n = space.cylinder_count(depth)
        vals = rng.standard_normal(n)
        if complex_values:
            vals = vals + 1j * rng.standard_normal(n)
        return cls(space, depth, vals)

    @classmethod
    def random_rational(
        cls, space: TreeBoundarySpace, depth: int, rng: np.random.Generator, denominator: int = 6, span: int = 10
    ) -> "CylinderFunction":
        """Exact values ``a / b`` with ``|a| <= span`` and ``1 <= b <= denominator``."""
        n = space.cylinder_count(depth)
        nums = rng.integers(-span, span + 1, size=n)
        dens = rng.integers(1, denominator + 1, size=n)
        return cls(space, depth, np.array([Fraction(int(a), int(b)) for a, b in zip(nums, dens)], dtype=object))

    # -- structure ----------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def cell_measure(self) -> Fraction:
        return self.space.cell_measure(self.depth)

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self.values), float(self.cell_measure))

    def numeric(self) -> np.ndarray:
        """Values as a float or complex array."""
        if not self.exact:
            return self.values
        if any(isinstance(v, complex) for v in self.values):
            return self.values.astype(complex)
        return self.values.astype(float)

    def to_float(self) -> "CylinderFunction":
        return CylinderFunction(self.space, self.depth, self.numeric())

    def refine(self, n: int) -> "CylinderFunction":
        """Copy each value onto the descendants at depth ``n``."""
        if n < self.depth:
            raise ValueError(f"cannot refine depth {self.depth} to {n}")
        reps = self.space.cylinder_count(n) // self.space.cylinder_count(self.depth)
        return CylinderFunction(self.space, n, np.repeat(self.values, reps))

    def _binary(self, other: "CylinderFunction | complex | float | Fraction", op) -> "CylinderFunction":
        if isinstance(other, CylinderFunction):
            if other.space != self.space:
                raise ValueError("functions live on different spaces")
            depth = max(self.depth, other.depth)
            a, b = self.refine(depth).values, other.refine(depth).values
            if a.dtype == object and b.dtype != object:
                a = a.astype(b.dtype)
            elif b.dtype == object and a.dtype != object:
                b = b.astype(a.dtype)
            return CylinderFunction(self.space, depth, op(a, b))
        return CylinderFunction(self.space, self.depth, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return CylinderFunction(self.space, self.depth, -self.values)

    def abs_power(self, p: float) -> "CylinderFunction":
        """``|f|^p``, exact when possible."""
        return CylinderFunction(self.space, self.depth, _abs_power(self.values, p))


Function = Union[CylinderFunction, SampledFunction]


def _abs_power(values: np.ndarray, p: float) -> np.ndarray:
    if values.dtype == object and float(p).is_integer():
        return np.array([abs(v) ** int(p) for v in values], dtype=object)
    return np.abs(values.astype(complex) if values.dtype == object else values) ** p


def _weights_values(f: Function) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(f, CylinderFunction):
        return f.weights, np.abs(f.numeric())
    return f.weights, np.abs(f.values)


# -- L^p --------------------------------------------------------------------


def lp_power(f: Function, p: float) -> Union[Fraction, float]:
    """``int |f|^p dnu``; a Fraction for exact cylinder functions and integer ``p``."""
    if isinstance(f, CylinderFunction) and f.exact and float(p).is_integer():
        powers = _abs_power(f.values, p)
        if all(isinstance(v, (int, Fraction)) for v in powers):
            return sum(powers, Fraction(0)) * f.cell_measure
    w, v = _weights_values(f)
    return float(w @ v**p)


def lp_norm(f: Function, p: float) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(lp_power(f, p)) ** (1.0 / p)


def sup_norm(f: Function) -> float:
    _, v = _weights_values(f)
    return float(v.max(initial=0.0))


# -- Young functions and Luxemburg norms --------------------------------------


@dataclass(frozen=True)
class YoungFunction:
    """``Phi_p(x) = |x|^p log+ |x|^p`` (tag "phi") or the exponential class ``Psi`` (tag "psi")."""

    tag: str
    p: float = 1.0

    def __post_init__(self) -> None:
        if self.tag not in ("phi", "psi"):
            raise ValueError(f"unknown Young function {self.tag!r}")
        if self.tag == "phi" and self.p < 1:
            raise ValueError("p must be >= 1")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        if self.tag == "phi":
            xp = x**self.p
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(xp > 1.0, xp * np.log(np.where(xp > 1.0, xp, 1.0)), 0.0)
        with np.errstate(over="ignore"):
            return np.where(x < 1.0, x, np.exp(np.maximum(x, 1.0) - 1.0))


def Phi(p: float = 1.0) -> YoungFunction:
    return YoungFunction("phi", p)


PSI = YoungFunction("psi")
LLOGL = Phi(1.0)


def modular(f: Function, Y: YoungFunction, k: float) -> float:
    """``int Y(|f| / k) dnu``."""
    w, v = _weights_values(f)
    if k <= 0:
        return math.inf if np.any(v > 0) else 0.0
    return float(w @ Y(v / k))


def luxemburg_norm(f: Function, Y: YoungFunction) -> float:
    """``inf{k > 0 : int Y(|f|/k) dnu <= 1}`` by bisection.

    The bracket is ``[0, ||f||_inf]``: at ``k = ||f||_inf`` every argument is
    at most 1, where both Young functions are at most 1, and the total mass
    is 1. The returned upper end is feasible and lies within the absolute
    tolerance of an infeasible point.
    """
    w, v = _weights_values(f)
    return luxemburg_norm_weighted(w, v, Y)


def luxemburg_norm_weighted(w: np.ndarray, v: np.ndarray, Y: YoungFunction) -> float:
    """Luxemburg norm of the distribution putting mass ``w[i]`` on value ``|v[i]|``."""
    w, v = np.asarray(w, dtype=float), np.abs(np.asarray(v))
    hi = float(v.max(initial=0.0))
    if hi == 0.0:
        return 0.0
    total = float(w.sum())
    if total > 1 + 1e-12:
        # at k = sup|f| the modular is at most the total mass; widen to keep feasibility
        hi *= total
    lo = 0.0
    for _ in range(LUXEMBURG_MAX_ITER):
        if hi - lo <= LUXEMBURG_ATOL * 1e-2:
            break
        mid = 0.5 * (lo + hi)
        if float(w @ Y(v / mid)) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def llogl_norm(f: Function) -> float:
    return luxemburg_norm(f, LLOGL)


def lexp_norm(f: Function) -> float:
    return luxemburg_norm(f, PSI)


def lplogl_norm(f: Function, p: float) -> float:
    return luxemburg_norm(f, Phi(p))


def power_function(f: Function, p: float) -> Function:
    """``|f|^p`` with the same carrier."""
    if isinstance(f, CylinderFunction):
        return f.abs_power(p)
    return SampledFunction(f.space, np.abs(f.values) ** p)


# -- entropy and Hoelder --------------------------------------------------------


def entropy_functional(f: Function, p: float) -> float:
    """``int |f|^p log+(|f|^p / ||f||_p^p) dnu``."""
    w, v = _weights_values(f)
    vp = v**p
    mass = float(w @ vp)
    if mass == 0.0:
        raise ZeroFunction("entropy of the zero function")
    ratio = vp / mass
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(ratio > 1.0, np.log(np.where(ratio > 1.0, ratio, 1.0)), 0.0)
    return float(w @ (vp * logs))


HOLDER_FACTOR = 2.0


def holder_pair(f: Function, g: Function) -> tuple[float, float]:
    """``(int |f g| dnu, ||f|LlogL|| * ||g|L_exp||)``.

    The pair satisfies ``lhs <= HOLDER_FACTOR * rhs``; the factor 2 is needed
    because the Luxemburg norms of ``(Phi_1, Psi)`` do not give constant 1
    (``f = g = 1`` has ``lhs = 1`` and ``rhs ~ 0.567``).
    """
    if isinstance(f, CylinderFunction) and isinstance(g, CylinderFunction):
        depth = max(f.depth, g.depth)
        f, g = f.refine(depth), g.refine(depth)
        w = f.weights
        prod = np.abs(f.numeric()) * np.abs(g.numeric())
    elif isinstance(f, SampledFunction) and isinstance(g, SampledFunction):
        if f.space is not g.space:
            raise ValueError("sampled functions live on different spaces")
        w = f.weights
        prod = np.abs(f.values) * np.abs(g.values)
    else:
        raise TypeError("holder_pair needs two functions of the same kind")
    return float(w @ prod), llogl_norm(f) * lexp_norm(g)
