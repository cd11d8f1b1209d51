"""Weighted point samples of bounded Ahlfors-regular spaces.

A :class:`SampledAhlforsSpace` is a finite quadrature for a compact metric
measure space: point weights summing to the total mass, a distance oracle
returning one row of the distance matrix at a time, the dimension ``D`` and
declared regularity constants ``c_low r^D <= nu(B(xi, r)) <= c_high r^D``.

Quadrature convention. Integrals over ``{d(xi, .) > r}`` give full weight to
points strictly outside radius ``r`` and ``boundary_weight`` to points at
distance exactly ``r``. Samples of a continuum (circle, Cantor set) use 1/2,
which is the trapezoid rule: ball masses on the circle then come out as
``2r`` exactly and the quadrature of the convex integrand ``d^{-D}`` sits
above its integral. Tree samples are exact cell sums and use weight 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .word_tree import TreeBoundarySpace

# exact-distance ties are decided with this relative slack
_TIE = 1e-12


@dataclass(frozen=True, eq=False)
class SampledAhlforsSpace:
    name: str
    weights: np.ndarray
    dist_row: Callable[[int], np.ndarray] = field(repr=False)
    D: float
    diam: float
    c_low: float
    c_high: float
    resolution: float
    boundary_weight: float = 0.5
    grid: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_row(i)[j])

    def distance_matrix(self, max_points: int = 8192) -> np.ndarray:
        if self.n > max_points:
            from .errors import DimensionTooLarge

            raise DimensionTooLarge(f"{self.n} points exceed the dense cap {max_points}")
        return np.vstack([self.dist_row(i) for i in range(self.n)])

    def _outside(self, row: np.ndarray, r: float) -> np.ndarray:
        """Quadrature membership of each point in ``{d > r}``; empty once ``r >= diam``."""
        if r >= self.diam * (1 - _TIE):
            return np.zeros_like(row, dtype=float)
        tol = _TIE * max(r, 1e-300)
        out = (row > r + tol).astype(float)
        out[np.abs(row - r) <= tol] = 1.0 - self.boundary_weight
        return out

    def ball_mass(self, i: int, r: float) -> float:
        """Quadrature mass of the closed ball ``B(xi_i, r)``."""
        row = self.dist_row(i)
        return float(self.weights @ (1.0 - self._outside(row, r)))

    def ball_mask(self, i: int, r: float) -> np.ndarray:
        return 1.0 - self._outside(self.dist_row(i), r)

    def dyadic_radii(self) -> np.ndarray:
        """``diam * 2^-j`` down to ``4 * resolution``."""
        radii = []
        r = self.diam
        while r >= 4 * self.resolution:
            radii.append(r)
            r /= 2
        return np.asarray(radii)

    def regularity_ratios(self, points: np.ndarray | None = None) -> np.ndarray:
        """``nu(B(xi, r)) / r^D`` over sample points and the dyadic radius grid."""
        idx = np.arange(self.n) if points is None else np.asarray(points)
        radii = self.dyadic_radii()
        out = np.empty((len(idx), len(radii)))
        for a, i in enumerate(idx):
            row = self.dist_row(int(i))
            for b, r in enumerate(radii):
                out[a, b] = self.weights @ (1.0 - self._outside(row, r)) / r**self.D
        return out


@dataclass(frozen=True, eq=False)
class SampledFunction:
    space: SampledAhlforsSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (self.space.n,):
            raise ValueError(f"expected {self.space.n} values, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights


def make_circle(n: int) -> SampledAhlforsSpace:
    """``n`` equispaced points on the circle of circumference 1, arc-length metric."""
    if n < 8:
        raise ValueError("need n >= 8")
    x = np.arange(n) / n

    def row(i: int) -> np.ndarray:
        d = np.abs(x - x[i])
        return np.minimum(d, 1.0 - d)

    return SampledAhlforsSpace(
        name="circle",
        weights=np.full(n, 1.0 / n),
        dist_row=row,
        D=1.0,
        diam=0.5,
        c_low=2.0,
        c_high=2.0,
        resolution=1.0 / n,
        boundary_weight=0.5,
        grid=x,
    )


def make_cantor(level: int) -> SampledAhlforsSpace:
    """Midpoints of the ``2^level`` intervals of the middle-thirds construction."""
    if level < 3:
        raise ValueError("need level >= 3")
    digits = (np.arange(2**level)[:, None] >> np.arange(level - 1, -1, -1)[None, :]) & 1
    left = (2 * digits * 3.0 ** -np.arange(1, level + 1)[None, :]).sum(axis=1)
    x = left + 0.5 * 3.0**-level

    def row(i: int) -> np.ndarray:
        return np.abs(x - x[i])

    return SampledAhlforsSpace(
        name="cantor",
        weights=np.full(2**level, 2.0**-level),
        dist_row=row,
        D=math.log(2) / math.log(3),
        diam=float(x[-1] - x[0]),
        c_low=0.5,
        c_high=4.0,
        resolution=3.0**-level,
        boundary_weight=0.5,
        grid=x,
    )


def make_tree_sample(space: TreeBoundarySpace, depth: int) -> SampledAhlforsSpace:
    """Depth-``depth`` cylinders as points, ``d = exp(-epsilon cp)`` and exact cell weights.

    Ball masses are exact cylinder masses for every radius at or above
    ``exp(-epsilon depth)``, which is declared as four times the resolution.
    """
    words = space.word_array(depth)
    n = len(words)

    def row(i: int) -> np.ndarray:
        eq = np.logical_and.accumulate(words == words[i][None, :], axis=1)
        cp = eq.sum(axis=1)
        d = np.exp(-space.epsilon * cp)
        d[i] = 0.0
        return d

    return SampledAhlforsSpace(
        name=f"tree(k={space.k},depth={depth})",
        weights=np.full(n, float(space.cell_measure(depth))),
        dist_row=row,
        D=space.D,
        diam=1.0,
        c_low=1.0 / (2 * space.k),
        c_high=1.0,
        resolution=math.exp(-space.epsilon * depth) / 4,
        boundary_weight=1.0,
    )


def tail_integral(space: SampledAhlforsSpace, i: int, r: float) -> float:
    """Quadrature of ``int_{d(xi, .) > r} d^{-D} dnu``; zero once ``r >= diam``."""
    if r <= 0:
        raise ValueError("r must be positive")
    row = space.dist_row(i)
    outside = space._outside(row, r)
    with np.errstate(divide="ignore"):
        kernel = np.where(row > 0, row, np.inf) ** -space.D
    return float(np.sum(space.weights * outside * kernel))


def complement_tail_integral(space: SampledAhlforsSpace, i: int, E: np.ndarray) -> float:
    """Quadrature of ``int_{Z - E} d(xi, .)^{-D} dnu`` off the diagonal.

    ``E`` is a membership mask in ``[0, 1]`` (fractional on ball boundaries).
    """
    E = np.asarray(E, dtype=float)
    row = space.dist_row(i)
    with np.errstate(divide="ignore"):
        kernel = np.where(row > 0, row, np.inf) ** -space.D
    return float(np.sum(space.weights * (1.0 - E) * kernel))


def tail_bounds(space: SampledAhlforsSpace, r: float) -> tuple[float, float]:
    """Two-sided bound ``c D log(diam/r) <= tail <= C (1 + D log(diam/r))``."""
    L = space.D * math.log(space.diam / r)
    return space.c_low * L, space.c_high * (1.0 + L)


def complement_lower_bound(space: SampledAhlforsSpace, mass: float) -> float:
    """``-c log(nu(E)) + c D log(diam) + c log(c)`` with ``c = c_low``."""
    c = space.c_low
    return -c * math.log(mass) + c * space.D * math.log(space.diam) + c * math.log(c)


def random_ball_union(
    space: SampledAhlforsSpace, rng: np.random.Generator, max_balls: int = 3
) -> np.ndarray:
    """Membership mask of a union of 1..max_balls balls on the dyadic radius grid."""
    radii = space.dyadic_radii()
    radii = radii[radii < space.diam]
    count = int(rng.integers(1, max_balls + 1))
    mask = np.zeros(space.n)
    for _ in range(count):
        centre = int(rng.integers(space.n))
        r = float(radii[rng.integers(len(radii))])
        mask = np.maximum(mask, space.ball_mask(centre, r))
    return mask


def circle_tail_closed_form(r: float) -> float:
    return 2.0 * math.log(1.0 / (2.0 * r)) if r < 0.5 else 0.0
