"""Logarithmic energy, W^{log,p} norms, cutoff kernels and the embedding spectrum.

On the tree boundary the kernel ``d^{-D}`` equals ``q^{cp}`` for every
epsilon (``epsilon D = ln q``), so for a depth-``n`` function

    E(phi) = nu_n^2 * sum_{c != c'} |phi_c - phi_c'|^p q^{cp(c, c')}.

The aggregated evaluation groups ordered pairs by their divergence node.
With ``P_j`` the sum over depth-``j`` nodes of the within-node pair sums,
pairs diverging exactly at depth ``m`` contribute ``P_m - P_{m+1}``. Each
``P_j`` is a per-block reduction over contiguous lex blocks.

Exact mode: rational values are scaled to integers by their common
denominator, so every pair sum is an integer and totals are Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Union

import numpy as np

from .ahlfors_sampled import SampledAhlforsSpace, SampledFunction
from .errors import DimensionTooLarge
from .functions_orlicz import CylinderFunction, lp_power
from .word_tree import TreeBoundarySpace

Number = Union[Fraction, float]

DENSE_CAP = 3000
EXACT_PAIR_DEPTH_CAP = 8
FAST_DEPTH_CAP = 12
_CHUNK = 1 << 22


@dataclass
class EnergyBreakdown:
    total: Number
    by_divergence_depth: list[tuple[int, Number]] = field(default_factory=list)

    def __float__(self) -> float:
        return float(self.total)


# -- exact scaling ----------------------------------------------------------------


def _integer_scaled(values: np.ndarray) -> tuple[np.ndarray, int] | None:
    """Integer numerators and the common denominator, or ``None`` if not rational."""
    if values.dtype != object:
        return None
    if not all(isinstance(v, (int, Fraction)) for v in values):
        return None
    fr = [Fraction(v) for v in values]
    L = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in fr), 1)
    ints = [v.numerator * (L // v.denominator) for v in fr]
    bound = max((abs(x) for x in ints), default=0)
    arr = np.array(ints, dtype=np.int64) if bound < 2**20 else np.array(ints, dtype=object)
    return arr, L


def _exact_ok(phi: CylinderFunction, p: float) -> tuple[np.ndarray, int] | None:
    if not float(p).is_integer():
        return None
    return _integer_scaled(phi.values)


def _fits_int64(max_abs: int, p: int, q: int, n: int, count: int) -> bool:
    return (2 * max_abs) ** p * q**n * count < 2**62


# -- pair sums --------------------------------------------------------------------


def _pair_power(diff: np.ndarray, p: float, exact: bool) -> np.ndarray:
    if exact:
        return np.abs(diff) ** int(p)
    a = np.abs(diff)
    return a * a if p == 2 else a**p


def _block_pair_sums(x: np.ndarray, blocks: int, p: float, exact: bool) -> Union[int, float]:
    """Sum over contiguous blocks of ``sum_{i, j in block} |x_i - x_j|^p``."""
    B = len(x) // blocks
    if B <= 1:
        return 0
    X = x.reshape(blocks, B)
    if p == 2:
        s1 = X.sum(axis=1)
        s2 = (np.abs(X) ** 2).sum(axis=1) if not exact else (X * X).sum(axis=1)
        if exact:
            return int((2 * B * s2 - 2 * s1 * s1).sum())
        return float((2 * B * s2 - 2 * np.abs(s1) ** 2).sum())
    if p == 1 and not np.iscomplexobj(X):
        S = np.sort(X, axis=1)
        coef = 2 * np.arange(B) - B + 1
        tot = (S * coef[None, :]).sum()
        return int(2 * tot) if exact else float(2 * tot)
    # generic: dense within blocks, chunked
    total = 0 if exact else 0.0
    rows_per = max(1, _CHUNK // (B * B))
    for start in range(0, blocks, rows_per):
        Y = X[start : start + rows_per]
        diff = Y[:, :, None] - Y[:, None, :]
        s = _pair_power(diff, p, exact).sum()
        total += int(s) if exact else float(s)
    return total


def _hist_pair_sums(codes: np.ndarray, uniq: np.ndarray, blocks: int, p: float, exact: bool):
    """Block pair sums for a function taking few distinct values."""
    U = len(uniq)
    B = len(codes) // blocks
    node = np.repeat(np.arange(blocks), B)
    counts = np.bincount(node * U + codes, minlength=blocks * U).reshape(blocks, U)
    M = _pair_power(uniq[:, None] - uniq[None, :], p, exact)
    if exact:
        counts = counts.astype(object)
        return int(((counts @ M) * counts).sum())
    return float(((counts @ M) * counts).sum())


def _level_sums(space: TreeBoundarySpace, x: np.ndarray, depth: int, p: float, exact: bool) -> list:
    """``P_j`` for ``j = 0..depth``."""
    moments = p == 2 or (p == 1 and not np.iscomplexobj(x))
    few = False
    if not moments:
        uniq, codes = np.unique(x, return_inverse=True)
        few = len(uniq) <= 64
    P = []
    for j in range(depth + 1):
        blocks = space.cylinder_count(j)
        if few:
            P.append(_hist_pair_sums(codes, uniq, blocks, p, exact))
        else:
            P.append(_block_pair_sums(x, blocks, p, exact))
    return P


def _assemble(space: TreeBoundarySpace, depth: int, P: list, scale) -> EnergyBreakdown:
    """Contributions ``nu^2 q^m (P_m - P_{m+1}) * scale``."""
    nu = space.cell_measure(depth)
    parts = []
    exact = isinstance(scale, Fraction)
    for m in range(depth):
        S = P[m] - P[m + 1]
        if exact:
            val = nu * nu * space.q**m * S * scale
        else:
            val = float(nu) ** 2 * space.q**m * float(S) * scale
        parts.append((m, val))
    total = sum((v for _, v in parts), Fraction(0) if exact else 0.0)
    return EnergyBreakdown(total, parts)


def log_energy(phi: CylinderFunction, p: float, method: str = "aggregated") -> EnergyBreakdown:
    """``E_{log,p}(phi)`` with its split by divergence depth.

    ``method`` is ``"aggregated"`` (per-node reductions) or ``"naive"``
    (all ordered pairs). Exact rational input with integer ``p`` gives an
    exact Fraction total either way.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    space, depth = phi.space, phi.depth
    if depth == 0:
        zero = Fraction(0) if phi.exact else 0.0
        return EnergyBreakdown(zero, [])
    scaled = _exact_ok(phi, p)
    if scaled is not None:
        x, L = scaled
        exact = True
        scale = Fraction(1, L ** int(p))
        if x.dtype != object and not _fits_int64(int(np.abs(x).max(initial=0)), int(p), space.q, depth, len(x) ** 2):
            x = x.astype(object)
    else:
        x = phi.numeric()
        exact = False
        scale = 1.0
    if method == "naive":
        return _naive(space, depth, x, p, exact, scale)
    if method != "aggregated":
        raise ValueError(f"unknown method {method!r}")
    if depth > FAST_DEPTH_CAP:
        raise DimensionTooLarge(f"depth {depth} exceeds the cap {FAST_DEPTH_CAP}")
    return _assemble(space, depth, _level_sums(space, x, depth, p, exact), scale)


def _naive(space: TreeBoundarySpace, depth: int, x: np.ndarray, p: float, exact: bool, scale) -> EnergyBreakdown:
    if depth > EXACT_PAIR_DEPTH_CAP:
        raise DimensionTooLarge(f"naive pair sums are capped at depth {EXACT_PAIR_DEPTH_CAP}")
    words = space.word_array(depth)
    n = len(x)
    S = [0 if exact else 0.0 for _ in range(depth + 1)]
    rows_per = max(1, _CHUNK // n)
    for start in range(0, n, rows_per):
        sl = slice(start, start + rows_per)
        cp = np.logical_and.accumulate(words[sl, None, :] == words[None, :, :], axis=2).sum(axis=2)
        w = _pair_power(x[sl, None] - x[None, :], p, exact)
        for m in range(depth):
            s = w[cp == m].sum()
            S[m] += int(s) if exact else float(s)
    nu = space.cell_measure(depth)
    parts = []
    for m in range(depth):
        if exact:
            parts.append((m, nu * nu * space.q**m * S[m] * scale))
        else:
            parts.append((m, float(nu) ** 2 * space.q**m * S[m]))
    total = sum((v for _, v in parts), Fraction(0) if exact else 0.0)
    return EnergyBreakdown(total, parts)


def wlogp_power(phi: CylinderFunction, p: float) -> Number:
    """``||phi||_p^p + E_{log,p}(phi)``."""
    e = log_energy(phi, p).total
    lp = lp_power(phi, p)
    if isinstance(e, Fraction) and isinstance(lp, Fraction):
        return lp + e
    return float(lp) + float(e)


def wlogp_norm(phi: CylinderFunction, p: float) -> float:
    return float(wlogp_power(phi, p)) ** (1.0 / p)


# -- sampled spaces -----------------------------------------------------------------


def kernel_matrix(space: SampledAhlforsSpace) -> np.ndarray:
    """``w_i w_j d_ij^{-D}`` off the diagonal, zero on it."""
    d = space.distance_matrix()
    with np.errstate(divide="ignore"):
        K = np.where(d > 0, d, np.inf) ** -space.D
    return K * space.weights[:, None] * space.weights[None, :]


def log_energy_sampled(space: SampledAhlforsSpace, f: SampledFunction | np.ndarray, p: float) -> float:
    """Quadrature of the energy double integral, diagonal excluded."""
    values = f.values if isinstance(f, SampledFunction) else np.asarray(f)
    return float(log_energy_sampled_batch(space, values[None, :], p)[0])


def log_energy_sampled_batch(
    space: SampledAhlforsSpace, F: np.ndarray, p: float, K: np.ndarray | None = None
) -> np.ndarray:
    """Energies of every row of ``F``; pass ``K`` from :func:`kernel_matrix` to reuse it."""
    if K is None:
        K = kernel_matrix(space)
    F = np.asarray(F)
    if p == 2:
        deg = K.sum(axis=1)
        quad = np.einsum("fi,ij,fj->f", F.conj(), K, F).real
        # the expanded form cancels to round-off for near-constant rows; energies are nonnegative
        return np.maximum(2 * (np.abs(F) ** 2 @ deg) - 2 * quad, 0.0)
    out = np.empty(len(F))
    for a, row in enumerate(F):
        out[a] = float((np.abs(row[:, None] - row[None, :]) ** p * K).sum())
    return out


def sample_energy_from_cells(phi: CylinderFunction, p: float, sample: SampledAhlforsSpace) -> float:
    return log_energy_sampled(sample, SampledFunction(sample, phi.numeric()), p)


def circle_half_indicator_energy() -> float:
    """Energy of the indicator of a half circle at p = 1 (any p): exactly 2."""
    return 2.0


# -- cutoff kernels -------------------------------------------------------------------


@dataclass
class CutoffKernelOperator:
    """``K(xi, eta) = 1{d > eps_cut} d^{-D}`` on cells or sample points.

    ``matrix`` holds ``K`` between distinct carriers (no weights) and
    ``N_values`` the row integrals ``int K(xi, .) dnu`` (for trees these are
    exact continuum integrals, including the part inside the carrier cell).
    """

    epsilon_cut: float
    weights: np.ndarray
    matrix: np.ndarray
    N_values: np.ndarray
    self_weight: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``(T phi)(xi) = int K(xi, eta) phi(eta) dnu(eta)`` for locally constant ``phi``."""
        return self.matrix @ (self.weights * values) + self.self_weight * values

    def approximation_error(self, values: np.ndarray, p: float) -> float:
        """``|| phi - T phi / N ||_p^p``."""
        N = self.N_values
        safe = np.where(N > 0, N, 1.0)
        resid = np.where(N > 0, values - self.apply(values) / safe, values)
        return float(self.weights @ np.abs(resid) ** p)

    def approximation_bound(self, energy: float) -> float:
        """``E(phi) / ess inf N``."""
        m = float(self.N_values.min())
        return math.inf if m <= 0 else energy / m


def tree_cutoff_N(space: TreeBoundarySpace, epsilon_cut: float) -> Number:
    """``int_{d(xi, .) > eps_cut} d^{-D} dnu``, the same for every xi."""
    if epsilon_cut >= 1.0:
        return Fraction(0) if space.is_default else 0.0
    # d > eps_cut  <=>  cp < M with M = ceil(-ln(eps_cut)/epsilon) (strict at integer points)
    x = -math.log(epsilon_cut) / space.epsilon
    M = math.ceil(x - 1e-12)
    total = Fraction(0)
    for m in range(M):
        mass = space.cell_measure(m) - space.cell_measure(m + 1)
        total += mass * space.q**m
    return total


def cutoff_operator(source: Union[tuple[TreeBoundarySpace, int], SampledAhlforsSpace], epsilon_cut: float) -> CutoffKernelOperator:
    """Cutoff kernel on depth-``n`` cells (``source = (space, n)``) or on a sample."""
    if epsilon_cut <= 0:
        raise ValueError("epsilon_cut must be positive")
    if isinstance(source, SampledAhlforsSpace):
        d = source.distance_matrix()
        outside = np.vstack([source._outside(d[i], epsilon_cut) for i in range(source.n)])
        with np.errstate(divide="ignore"):
            K = np.where(d > 0, d, np.inf) ** -source.D * outside
        N = K @ source.weights
        return CutoffKernelOperator(epsilon_cut, source.weights, K, N, np.zeros(source.n))
    space, depth = source
    n = space.cylinder_count(depth)
    if n > DENSE_CAP * 3:
        raise DimensionTooLarge(f"{n} cells exceed the dense cap")
    words = space.word_array(depth)
    cp = np.logical_and.accumulate(words[:, None, :] == words[None, :, :], axis=2).sum(axis=2)
    dist = np.exp(-space.epsilon * cp)
    K = np.where((cp < depth) & (dist > epsilon_cut * (1 + 1e-12)), float(space.q) ** cp, 0.0)
    N_total = float(tree_cutoff_N(space, epsilon_cut))
    w = np.full(n, float(space.cell_measure(depth)))
    off_cell = K @ w
    return CutoffKernelOperator(epsilon_cut, w, K, np.full(n, N_total), (N_total - off_cell) / 1.0)


# -- p = 2 spectral tools -------------------------------------------------------------


def energy_matrix(space: TreeBoundarySpace, depth: int) -> np.ndarray:
    """``L`` with ``E_{log,2}(phi) = phi^H L phi`` on depth-``depth`` functions."""
    n = space.cylinder_count(depth)
    if n > DENSE_CAP:
        raise DimensionTooLarge(f"{n} cells exceed the dense cap {DENSE_CAP}")
    words = space.word_array(depth)
    cp = np.logical_and.accumulate(words[:, None, :] == words[None, :, :], axis=2).sum(axis=2)
    nu = float(space.cell_measure(depth))
    W = nu * nu * np.where(cp < depth, float(space.q) ** cp, 0.0)
    return 2 * (np.diag(W.sum(axis=1)) - W)


def embedding_spectrum(space: TreeBoundarySpace, depth: int, count: int) -> np.ndarray:
    """Largest ``count`` values of ``||phi||_2^2 / ||phi||_{W^{log,2}}^2``, descending."""
    from scipy.linalg import eigh

    L = energy_matrix(space, depth)
    n = len(L)
    if count > n:
        raise ValueError(f"count {count} exceeds the dimension {n}")
    nu = float(space.cell_measure(depth))
    M = nu * np.eye(n)
    vals = eigh(M, M + L, eigvals_only=True, subset_by_index=[n - count, n - 1])
    return vals[::-1]


def wavelet_spectrum(space: TreeBoundarySpace, depth: int) -> list[tuple[Fraction, int]]:
    """Closed-form embedding values with multiplicities, descending.

    A function supported on a depth-``m`` node ``v``, constant on the
    children of ``v`` and of mean zero, is an eigenvector of the energy with
    ``lambda / nu_n = 2 (sum_{j<m} q^j (nu_j - nu_{j+1}) + q^m nu(v))``; its
    embedding value is ``1 / (1 + lambda / nu_n)``.
    """
    q, k = space.q, space.k
    out: list[tuple[Fraction, int]] = [(Fraction(1), 1)]
    for m in range(depth):
        outer = sum(
            (space.q**j * (space.cell_measure(j) - space.cell_measure(j + 1)) for j in range(m)),
            Fraction(0),
        )
        lam = 2 * (outer + q**m * space.cell_measure(m))
        mult = (2 * k - 1) if m == 0 else space.cylinder_count(m) * (q - 1)
        out.append((1 / (1 + lam), mult))
    out.sort(key=lambda t: -t[0])
    return out
