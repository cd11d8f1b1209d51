"""Boundary representations on cylinder functions and the quantities that control them.

``(pi(g) phi)(xi) = D_{g^{-1}}(xi)^{D/p - s - i t} phi(g^{-1} xi)``.

On a depth-``n`` output cell ``w`` the exponent of ``D_{g^{-1}}`` is
``|g| - 2 c`` with ``c = min(cp(w, g), |g|)``, and ``g^{-1} w`` starts with
``g^{-1}[:|g| - c] + w[c:]``. Evaluating ``phi`` there needs the first
``depth(phi)`` letters, so the working depth is ``depth(phi) + |g|``.

Powers of metric derivatives are ``exp(-epsilon e (D/p - s - i t))``; since
``epsilon D = ln q`` they become ``q^{-e/p}`` at ``s = t = 0``, which keeps
exact inputs exact whenever ``p`` divides every exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import DimensionTooLarge
from .energy_forms import DENSE_CAP, energy_matrix, wlogp_power
from .functions_orlicz import CylinderFunction, Phi, lp_power, luxemburg_norm_weighted
from .word_tree import ReducedWord, TreeBoundarySpace, annuli

Number = Union[Fraction, float]


@dataclass(frozen=True)
class RepParams:
    p: float = 2.0
    s: float = 0.0
    t: float = 0.0

    def __post_init__(self) -> None:
        if not self.p >= 1:
            raise ValueError("p must be >= 1")

    def d_over_p(self, space: TreeBoundarySpace) -> float:
        return 0.0 if math.isinf(self.p) else space.D / self.p

    def check(self, space: TreeBoundarySpace) -> None:
        bound = self.d_over_p(space)
        if abs(self.s) > bound + 1e-12:
            raise ValueError(f"s = {self.s} outside [-D/p, D/p] = [-{bound}, {bound}]")

    def dual(self) -> "RepParams":
        """Parameters of the adjoint: conjugate exponent and ``-conj(z)``."""
        q = math.inf if self.p == 1 else self.p / (self.p - 1)
        return RepParams(q, -self.s, self.t)


def _as_word(g: ReducedWord | str) -> ReducedWord:
    return ReducedWord.parse(g) if isinstance(g, str) else g


def _power_values(space: TreeBoundarySpace, e: np.ndarray, params: RepParams, exact: bool):
    """``exp(-epsilon e (D/p - s - i t))`` per entry; Fractions when possible."""
    if exact and params.s == 0 and params.t == 0 and not math.isinf(params.p) and float(params.p).is_integer():
        p = int(params.p)
        if np.all(e % p == 0):
            table = {int(x): Fraction(space.q) ** (-int(x) // p) for x in np.unique(e)}
            return np.array([table[int(x)] for x in e], dtype=object)
    if exact and params.s == 0 and params.t == 0 and math.isinf(params.p):
        return np.array([Fraction(1)] * len(e), dtype=object)
    expo = -space.epsilon * e * (params.d_over_p(space) - params.s)
    if params.t == 0:
        return np.exp(expo)
    return np.exp(expo + 1j * space.epsilon * e * params.t)


def preimage_indices(space: TreeBoundarySpace, g: ReducedWord, out_depth: int, in_depth: int) -> tuple[np.ndarray, np.ndarray]:
    """For each depth-``out_depth`` cell ``w``: index of ``g^{-1} w`` at ``in_depth`` and ``cp(w, g)``.

    Requires ``out_depth >= in_depth + |g|``.
    """
    L = len(g)
    if out_depth < in_depth + L:
        raise ValueError("output depth too shallow for the preimage prefix")
    c = space.prefix_profile(out_depth, g, cap=L).astype(np.int64)
    if in_depth == 0:
        return np.zeros(space.cylinder_count(out_depth), dtype=np.int64), c
    W = space.word_array(out_depth)
    ginv = np.asarray(g.inverse().letters, dtype=np.int8)
    pos = np.arange(in_depth)[None, :]
    keep = (L - c)[:, None]
    src = np.clip(pos - L + 2 * c[:, None], 0, out_depth - 1)
    head = np.take_along_axis(W, src, axis=1)
    if L:
        head = np.where(pos < keep, ginv[np.clip(np.arange(in_depth), 0, L - 1)][None, :], head)
    return space.indices_of(head), c


def apply_rep(
    params: RepParams,
    g: ReducedWord | str,
    phi: CylinderFunction,
    depth: int | None = None,
    check_strip: bool = True,
) -> CylinderFunction:
    """``pi(g) phi`` as a cylinder function at depth ``depth(phi) + |g|`` (or deeper).

    ``check_strip`` rejects ``|s| > D/p``; the formula itself makes sense for
    any ``s`` and adjoints may leave the strip.
    """
    g = _as_word(g)
    space = phi.space
    if check_strip:
        params.check(space)
    space.check_word(g)
    n = phi.depth + len(g)
    if depth is not None:
        if depth < n:
            raise ValueError(f"depth {depth} below the working depth {n}")
        phi = phi.refine(phi.depth + depth - n)
        n = depth
    idx, c = preimage_indices(space, g, n, phi.depth)
    e = len(g) - 2 * c
    mult = _power_values(space, e, params, phi.exact)
    vals = phi.values[idx]
    if mult.dtype == object and phi.exact:
        out = vals * mult
    else:
        out = (phi.numeric()[idx]) * mult
    return CylinderFunction(space, n, out)


def inner(phi: CylinderFunction, psi: CylinderFunction) -> Union[Fraction, complex]:
    """``int phi conj(psi) dnu`` at the common refinement."""
    depth = max(phi.depth, psi.depth)
    a, b = phi.refine(depth), psi.refine(depth)
    nu = phi.space.cell_measure(depth)
    if a.exact and b.exact:
        vals = [x * (y.conjugate() if hasattr(y, "conjugate") else y) for x, y in zip(a.values, b.values)]
        return sum(vals, Fraction(0)) * nu
    return complex(np.sum(a.numeric() * np.conj(b.numeric())) * float(nu))


def matrix_coefficient(
    params: RepParams, g: ReducedWord | str, phi: CylinderFunction, psi: CylinderFunction
) -> Union[Fraction, complex]:
    """``<pi(g) phi, psi>``; constant ``phi`` is integrated over annuli without refining."""
    g = _as_word(g)
    if phi.depth == 0 and len(g) > 0:
        return _constant_coefficient(params, g, phi.values[0], psi)
    return inner(apply_rep(params, g, phi), psi)


def _constant_coefficient(params: RepParams, g: ReducedWord, value, psi: CylinderFunction):
    """``value * sum_c conj(psi_c) int_c D_{g^{-1}}^{D/p - z} dnu`` cell by cell."""
    space = psi.space
    params.check(space)
    n, d = len(g), psi.depth
    exact = psi.exact and isinstance(value, (int, Fraction))
    prof = space.prefix_profile(d, g, cap=n).astype(np.int64)
    mult = _power_values(space, n - 2 * prof, params, exact)
    nu = [space.cell_measure(j) for j in range(max(n, d) + 2)]
    integrals = list(mult * nu[d]) if mult.dtype == object else mult * float(nu[d])
    if d <= n and d > 0:
        # the one cell that is a prefix of g sees every annulus from d to n
        m = np.arange(d, n + 1)
        inner_mult = _power_values(space, n - 2 * m, params, exact)
        rho = [nu[j] - nu[j + 1] for j in range(d, n)] + [nu[n]]
        if inner_mult.dtype != object:
            rho = np.array([float(r) for r in rho])
        idx = space.index_of(g.letters[:d])
        integrals[idx] = sum((r * x for r, x in zip(rho, inner_mult)), Fraction(0) if inner_mult.dtype == object else 0.0)
    if d == 0:
        m = np.arange(n + 1)
        inner_mult = _power_values(space, n - 2 * m, params, exact)
        rho = [nu[j] - nu[j + 1] for j in range(n)] + [nu[n]]
        if inner_mult.dtype != object:
            rho = np.array([float(r) for r in rho])
        integrals = [sum((r * x for r, x in zip(rho, inner_mult)), Fraction(0) if inner_mult.dtype == object else 0.0)]
    conj = [v.conjugate() if hasattr(v, "conjugate") else v for v in psi.values]
    if exact and all(isinstance(x, Fraction) for x in integrals):
        return value * sum((c * x for c, x in zip(conj, integrals)), Fraction(0))
    return complex(value) * complex(np.sum(np.asarray(conj, dtype=complex) * np.asarray(integrals, dtype=complex)))


def duality_check(
    params: RepParams, g: ReducedWord | str, phi: CylinderFunction, psi: CylinderFunction
) -> tuple[Union[Fraction, complex], Union[Fraction, complex]]:
    """``(<pi^{(p)}_z(g) phi, psi>, <phi, pi^{(p')}_{-conj z}(g^{-1}) psi>)``."""
    g = _as_word(g)
    lhs = matrix_coefficient(params, g, phi, psi)
    rhs = inner(phi, apply_rep(params.dual(), g.inverse(), psi, check_strip=False))
    return lhs, rhs


# -- Xi integrals ---------------------------------------------------------------


def xi_integral(space: TreeBoundarySpace, g: ReducedWord | str | int, T: Union[float, Fraction]) -> Number:
    """``Xi_T(g) = int D_g^T dnu`` summed over annuli; exact when every power is rational."""
    n = g if isinstance(g, int) else len(_as_word(g))
    if n == 0:
        return Fraction(1) if isinstance(T, (int, Fraction)) else 1.0
    masses = [space.cell_measure(m) - space.cell_measure(m + 1) for m in range(n)] + [space.cell_measure(n)]
    if space.is_default and isinstance(T, (int, Fraction)):
        T = Fraction(T)
        powers = [T * (2 * m - n) for m in range(n + 1)]
        if all(x.denominator == 1 for x in powers):
            return sum((mass * Fraction(space.q) ** int(x) for mass, x in zip(masses, powers)), Fraction(0))
    Tf = float(T)
    return float(sum(float(mass) * math.exp(space.epsilon * Tf * (2 * m - n)) for m, mass in enumerate(masses)))


def xi_normalizer(space: TreeBoundarySpace, n: int, T: float) -> float:
    """The expected size of ``Xi_T`` at ``|g| = n`` in each regime."""
    D, eps = space.D, space.epsilon
    if abs(T - D / 2) < 1e-12:
        return max(n, 1) * math.exp(-eps * T * n)
    if T < D / 2:
        return math.exp(-eps * T * n)
    return math.exp(-eps * (D - T) * n)


# -- multipliers -------------------------------------------------------------------


def _theta_F(space: TreeBoundarySpace, delta: int, p: float, t: float, exact: bool):
    if exact:
        return abs(Fraction(space.q) ** delta - 1)
    z = math.exp(math.log(space.q) * delta / p) * complex(math.cos(2 * space.epsilon * t * delta), math.sin(2 * space.epsilon * t * delta))
    return abs(z - 1) ** p


def theta_table(space: TreeBoundarySpace, n: int, p: float, t: float) -> list[Number]:
    """``Theta`` on cells whose prefix agrees with the reference word for exactly ``a`` letters, ``a = 0..n``."""
    exact = p == 1 and t == 0
    q = space.q
    nu = [space.cell_measure(j) for j in range(n + 1)]
    mu = [nu[j] - nu[j + 1] for j in range(n)]
    rho = mu + [nu[n]]
    out = []
    for a in range(n + 1):
        total = Fraction(0) if exact else 0.0
        for j in range(a):
            w = q**j * mu[j]
            total += (w if exact else float(w)) * _theta_F(space, j - a, p, t, exact)
        if a < n:
            for m in range(a + 1, n + 1):
                w = q**a * rho[m]
                total += (w if exact else float(w)) * _theta_F(space, m - a, p, t, exact)
        out.append(total)
    return out


def theta_multiplier(space: TreeBoundarySpace, g: ReducedWord | str, p: float, t: float) -> CylinderFunction:
    """``Theta_{g,t}`` on depth-``|g|`` cells (exact at ``p = 1, t = 0``)."""
    g = _as_word(g)
    n = len(g)
    if n == 0:
        return CylinderFunction.constant(space, 0, exact=(p == 1 and t == 0))
    table = theta_table(space, n, p, t)
    a = space.prefix_profile(n, g.inverse(), cap=n)
    vals = np.array([table[int(x)] for x in a], dtype=object if isinstance(table[0], Fraction) else float)
    return CylinderFunction(space, n, vals)


def theta_bruteforce(space: TreeBoundarySpace, g: ReducedWord | str, p: float, t: float) -> np.ndarray:
    """Direct sum over ordered pairs of depth-``|g|`` cells (oracle, floats)."""
    g = _as_word(g)
    n = len(g)
    if n == 0:
        return np.zeros(1)
    W = space.word_array(n)
    m = space.prefix_profile(n, g.inverse(), cap=n).astype(float)
    cp = np.logical_and.accumulate(W[:, None, :] == W[None, :, :], axis=2).sum(axis=2)
    ratio = np.exp(2 * space.epsilon * (m[None, :] - m[:, None]) * (space.D / (2 * p) + 1j * t))
    F = np.abs(ratio - 1) ** p
    K = np.where(cp < n, float(space.q) ** cp, 0.0)
    return (K * F).sum(axis=1) * float(space.cell_measure(n))


# -- norms and bounds -------------------------------------------------------------------


def rep_wlogp_power(params: RepParams, g: ReducedWord | str, phi: CylinderFunction) -> Number:
    return wlogp_power(apply_rep(params, g, phi), params.p)


def _level_node_sums(values: np.ndarray, R: int, space: TreeBoundarySpace) -> list[np.ndarray]:
    """Sums of ``values`` over depth-``j`` nodes, each broadcast back to depth-``R`` cells."""
    out = []
    N = len(values)
    for j in range(R + 1):
        blocks = space.cylinder_count(j)
        sums = values.reshape(blocks, N // blocks).sum(axis=1)
        out.append(np.repeat(sums, N // blocks))
    return out


def rep_quadratic_forms(
    space: TreeBoundarySpace, params: RepParams, g: ReducedWord | str, depth: int
) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian ``A, B`` with ``||pi(g) phi||_W^2 = phi^H A phi`` and ``||phi||_W^2 = phi^H B phi`` at p = 2.

    Works in the coordinates ``omega = g^{-1} xi``: with ``h = D_g^{z - D/2} phi``
    and ``s = D_g^{D/2}`` the energy is a ``q^{cp}``-weighted pair sum of
    ``|h(omega) - h(zeta)|^2 s(omega) s(zeta)`` over cells at depth
    ``R = max(depth, |g|)``.
    """
    g = _as_word(g)
    if params.p != 2:
        raise ValueError("quadratic forms exist only at p = 2")
    params.check(space)
    d = depth
    Nd = space.cylinder_count(d)
    if Nd > DENSE_CAP:
        raise DimensionTooLarge(f"{Nd} cells exceed the dense cap {DENSE_CAP}")
    R = max(d, len(g))
    NR = space.cylinder_count(R)
    e = space.derivative_exponents(g, R).astype(float)
    logD = -space.epsilon * e  # log of D_g per cell
    s_cell = np.exp(logD * space.D / 2)
    z = complex(params.s, params.t)
    r = np.exp(logD * (z - space.D / 2))
    y = s_cell * r
    nuR = float(space.cell_measure(R))
    q = float(space.q)
    per = NR // Nd
    group = np.repeat(np.arange(Nd), per)

    # deg_c = s_c * sum_{c' != c} nu_R^2 q^{cp} s_c'
    S = _level_node_sums(s_cell, R, space)
    T = np.zeros(NR)
    for j in range(R):
        T += q**j * (S[j] - S[j + 1])
    deg = nuR**2 * s_cell * T
    diag = 2 * np.bincount(group, weights=np.abs(r) ** 2 * deg, minlength=Nd)

    # cross terms between distinct depth-d cells
    u = np.bincount(group, weights=y.real, minlength=Nd) + 1j * np.bincount(group, weights=y.imag, minlength=Nd)
    Wd = space.word_array(d)
    cpd = np.logical_and.accumulate(Wd[:, None, :] == Wd[None, :, :], axis=2).sum(axis=2)
    Q = np.where(cpd < d, q**cpd, 0.0)
    X_T = nuR**2 * Q * np.outer(np.conj(u), u)

    # pairs inside one depth-d cell (only when |g| > d)
    inside = np.zeros(Nd)
    if R > d:
        G = []
        for j in range(d, R + 1):
            blocks = space.cylinder_count(j)
            sums = y.reshape(blocks, NR // blocks).sum(axis=1)
            G.append(np.bincount(np.repeat(np.arange(Nd), blocks // Nd), weights=np.abs(sums) ** 2, minlength=Nd))
        for idx, j in enumerate(range(d, R)):
            inside += q**j * (G[idx] - G[idx + 1])
        inside *= nuR**2

    H = np.diag(diag) - 2 * X_T - 2 * np.diag(inside)
    mass = np.bincount(group, weights=nuR * np.exp(logD * 2 * params.s), minlength=Nd)
    A = np.diag(mass) + H
    A = 0.5 * (A + A.conj().T)
    B = float(space.cell_measure(d)) * np.eye(Nd) + energy_matrix(space, d)
    return A, B


def op_norm_lower(
    space: TreeBoundarySpace,
    params: RepParams,
    g: ReducedWord | str,
    depth: int,
    rng: np.random.Generator | None = None,
    candidates: int = 16,
) -> float:
    """Lower bound for the operator norm of ``pi(g)`` on ``W^{log,p}``.

    At p = 2 this is the exact maximum over depth-``depth`` functions (a
    generalized Hermitian eigenproblem). Otherwise it is the best ratio over
    the constant, every cell indicator and seeded random functions.
    """
    g = _as_word(g)
    if len(g) == 0:
        return 1.0
    if params.p == 2:
        from scipy.linalg import eigh

        A, B = rep_quadratic_forms(space, params, g, depth)
        n = len(A)
        top = eigh(A, B, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0]
        return math.sqrt(max(top, 0.0))
    rng = rng if rng is not None else np.random.default_rng(0)
    p = params.p
    trials = [CylinderFunction.constant(space, 1.0, depth, exact=False)]
    for i in range(space.cylinder_count(depth)):
        v = np.zeros(space.cylinder_count(depth))
        v[i] = 1.0
        trials.append(CylinderFunction(space, depth, v))
    for _ in range(candidates):
        trials.append(CylinderFunction.random_normal(space, depth, rng))
    best = 0.0
    for phi in trials:
        num = float(wlogp_power(apply_rep(params, g, phi), p))
        den = float(wlogp_power(phi, p))
        best = max(best, (num / den) ** (1.0 / p))
    return best


@dataclass
class BasicCalcBound:
    C1: float
    C2: float
    theta_sup: Number
    log_sobolev_constant: float
    holder_factor: float
    composite: float


def basic_calc_upper(
    space: TreeBoundarySpace, params: RepParams, g: ReducedWord | str, log_sobolev_constant: float, holder_factor: float = 2.0
) -> BasicCalcBound:
    """Upper bound for ``||pi(g)||^p`` on ``W^{log,p}`` assembled from the basic calculation.

    ``||pi(g) phi||_W^p <= max(1, C1) ||phi||_W^p + C2 * h * ||Theta||_inf * C_LS^p ||phi||_W^p``
    where ``h`` is the Hoelder factor for the (LlogL, L_exp) pairing and
    ``C_LS`` bounds ``||phi|L^p log L|| / ||phi||_W``.
    """
    if params.s != 0:
        raise ValueError("the basic calculation needs s = 0")
    g = _as_word(g)
    p = params.p
    C1 = 3.0 ** (p - 1)
    C2 = 2 * 3.0 ** (p - 1)
    theta = theta_multiplier(space, g, p, params.t)
    sup = max(theta.values) if len(theta.values) else 0
    composite = max(1.0, C1) + C2 * holder_factor * float(sup) * log_sobolev_constant**p
    return BasicCalcBound(C1, C2, sup, log_sobolev_constant, holder_factor, composite)


def lr_growth(space: TreeBoundarySpace, p: float, r: float, g: ReducedWord | str | int) -> tuple[float, float]:
    """``(certified lower, upper)`` bounds for the norm of ``pi^{(p)}_{it}(g)`` on ``L^r``.

    For ``p < r`` the lower bound is ``||pi(g) 1||_r = Xi_{Dr/p}^{1/r}``; for
    ``p > r`` it is the same quantity for the adjoint on ``L^{r'}``. The
    upper bound is ``sup D_g^{D |1/p - 1/r|}``.
    """
    if p == r:
        return 1.0, 1.0
    n = g if isinstance(g, int) else len(_as_word(g))
    if p > r:
        p, r = p / (p - 1), r / (r - 1)
    lower = float(xi_integral(space, n, space.D * r / p)) ** (1.0 / r)
    upper = math.exp(space.epsilon * space.D * abs(1 / p - 1 / r) * n)
    return lower, upper


def llogl_of_power(space: TreeBoundarySpace, params: RepParams, g: ReducedWord | str) -> float:
    """``|| |pi(g) 1|^p | L log L ||``.

    ``|pi(g) 1|^p = D_{g^{-1}}^{D - ps}`` is constant on the annuli around
    ``g``, so the norm is taken over the annulus distribution.
    """
    n = len(_as_word(g))
    masses = np.array([float(m) for _, m in annuli(space, _as_word(g))]) if n else np.ones(1)
    m = np.arange(n + 1)
    vals = np.exp(space.epsilon * (2 * m - n) * (space.D - params.p * params.s))
    return luxemburg_norm_weighted(masses, vals, Phi(1.0))


def lp_isometry_defect(params: RepParams, g: ReducedWord | str, phi: CylinderFunction) -> Number:
    """``||pi(g) phi||_p^p - ||phi||_p^p`` (zero at s = 0)."""
    a = lp_power(apply_rep(params, g, phi), params.p)
    b = lp_power(phi, params.p)
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a - b
    return float(a) - float(b)
