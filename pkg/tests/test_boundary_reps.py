from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundary_lab.boundary_reps import (
    RepParams,
    apply_rep,
    basic_calc_upper,
    duality_check,
    inner,
    llogl_of_power,
    lp_isometry_defect,
    lr_growth,
    matrix_coefficient,
    op_norm_lower,
    rep_quadratic_forms,
    theta_bruteforce,
    theta_multiplier,
    theta_table,
    xi_integral,
)
from boundary_lab.energy_forms import wlogp_power
from boundary_lab.functions_orlicz import CylinderFunction, llogl_norm, lp_power
from boundary_lab.word_tree import ReducedWord, TreeBoundarySpace, random_word

S = TreeBoundarySpace(2)
W = ReducedWord.parse
ONE = CylinderFunction.constant(S, 1)


def words(max_size: int):
    return st.lists(st.integers(0, 3), max_size=max_size).map(ReducedWord.from_letters)


def rational_function(depth_max: int = 2):
    return st.tuples(st.integers(0, depth_max), st.integers(0, 2**32 - 1)).map(
        lambda t: CylinderFunction.random_rational(S, t[0], np.random.default_rng(t[1]))
    )


def _close(a, b, tol=1e-10):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(a)))


def _same_function(f, g, tol=1e-10):
    d = max(f.depth, g.depth)
    a, b = f.refine(d), g.refine(d)
    if a.exact and b.exact:
        return all(a.values == b.values)
    return np.allclose(a.numeric(), b.numeric(), rtol=tol, atol=tol)


class TestApplyRep:
    def test_generator_on_constant(self):
        f = apply_rep(RepParams(1), "a", ONE)
        assert f.depth == 1
        assert list(f.values) == [3, Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)]
        assert lp_power(f, 1) == 1

    def test_identity(self):
        phi = CylinderFunction.random_rational(S, 2, np.random.default_rng(0))
        assert _same_function(apply_rep(RepParams(2, 0.1, 0.3), ReducedWord(), phi), phi)

    def test_strip_is_enforced(self):
        with pytest.raises(ValueError):
            apply_rep(RepParams(2, 0.6), "a", ONE)

    def test_explicit_depth(self):
        f = apply_rep(RepParams(1), "a", ONE, depth=3)
        assert f.depth == 3 and _same_function(f, apply_rep(RepParams(1), "a", ONE))
        with pytest.raises(ValueError):
            apply_rep(RepParams(1), "ab", ONE, depth=1)

    @given(words(3), words(3), rational_function())
    def test_group_law_exact(self, g, h, phi):
        P = RepParams(1)
        assert _same_function(apply_rep(P, g * h, phi), apply_rep(P, g, apply_rep(P, h, phi)))

    @given(words(3), words(3), rational_function(), st.sampled_from([1.0, 2.0, 3.0]))
    def test_group_law_complex(self, g, h, phi, p):
        P = RepParams(p, 0.5 * S.D / p, 0.7)
        phi = phi.to_float()
        assert _same_function(apply_rep(P, g * h, phi), apply_rep(P, g, apply_rep(P, h, phi)))

    def test_group_law_length_four(self):
        rng = np.random.default_rng(1)
        P = RepParams(2, 0.1, 1.0)
        for _ in range(5):
            g, h = random_word(rng, 2, 4), random_word(rng, 2, 4)
            phi = CylinderFunction.random_normal(S, 1, rng, complex_values=True)
            assert _same_function(apply_rep(P, g * h, phi), apply_rep(P, g, apply_rep(P, h, phi)))

    @given(words(4), rational_function(), st.sampled_from([1, 2, 3]), st.floats(-2, 2))
    def test_lp_isometry(self, g, phi, p, t):
        defect = lp_isometry_defect(RepParams(p, 0.0, t), g, phi)
        if p == 1 and t == 0:
            assert defect == 0
        else:
            assert abs(float(defect)) <= 1e-10 * max(1.0, float(lp_power(phi, p)))


class TestDuality:
    def test_identity(self):
        phi = CylinderFunction.random_rational(S, 1, np.random.default_rng(2))
        psi = CylinderFunction.random_rational(S, 2, np.random.default_rng(3))
        lhs, rhs = duality_check(RepParams(2), ReducedWord(), phi, psi)
        assert lhs == rhs == inner(phi, psi)

    @given(words(4), rational_function(), rational_function(), st.floats(-3, 3))
    def test_p2_imaginary(self, g, phi, psi, t):
        lhs, rhs = duality_check(RepParams(2, 0.0, t), g, phi.to_float(), psi.to_float())
        assert _close(lhs, rhs)

    @given(words(4), rational_function(), rational_function(), st.floats(-3, 3))
    def test_p3_with_real_part(self, g, phi, psi, t):
        lhs, rhs = duality_check(RepParams(3, S.D / 6, t), g, phi.to_float(), psi.to_float())
        assert _close(lhs, rhs)

    def test_p1_exact(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            g = random_word(rng, 2, 3)
            phi, psi = CylinderFunction.random_rational(S, 1, rng), CylinderFunction.random_rational(S, 2, rng)
            lhs, rhs = duality_check(RepParams(1), g, phi, psi)
            assert lhs == rhs


class TestCoefficientsAndXi:
    def test_examples(self):
        assert matrix_coefficient(RepParams(2), "abab", ONE, ONE) == Fraction(1, 3)
        assert xi_integral(S, W("abab"), Fraction(1, 2)) == Fraction(1, 3)
        for g in ("a", "abAB", "aaaaaaa"):
            assert matrix_coefficient(RepParams(1), g, ONE, ONE) == 1
        phi = CylinderFunction.random_rational(S, 2, np.random.default_rng(5))
        assert matrix_coefficient(RepParams(2), ReducedWord(), phi, ONE) == inner(phi, ONE)

    def test_xi_endpoints(self):
        for n in range(0, 12):
            assert xi_integral(S, n, Fraction(0)) == 1
            assert xi_integral(S, n, Fraction(1)) == 1

    @given(words(6).filter(lambda g: len(g) > 0), st.floats(0, 2))
    def test_xi_against_cells(self, g, T):
        e = S.derivative_exponents(g, len(g)).astype(float)
        brute = float(np.sum(np.exp(-S.epsilon * T * e))) * float(S.cell_measure(len(g)))
        assert float(xi_integral(S, g, T)) == pytest.approx(brute, rel=1e-12)

    @given(st.integers(0, 15), st.floats(0, 1))
    def test_xi_reflection(self, n, T):
        assert float(xi_integral(S, n, T)) == pytest.approx(float(xi_integral(S, n, S.D - T)), rel=1e-12)

    def test_xi_half_closed_form(self):
        for n in range(0, 21, 2):
            assert xi_integral(S, n, Fraction(1, 2)) == Fraction(n + 2, 2) * Fraction(1, 3) ** (n // 2)

    @given(words(5).filter(lambda g: len(g) > 0), st.integers(0, 3), st.sampled_from([1, 2]), st.floats(-1, 1))
    def test_constant_coefficient_closed_form(self, g, d, p, t):
        psi = CylinderFunction.random_rational(S, d, np.random.default_rng(len(g) * 7 + d))
        P = RepParams(p, 0.0, t)
        a = matrix_coefficient(P, g, ONE, psi)
        b = inner(apply_rep(P, g, ONE), psi)
        assert _close(a, b, 1e-12)

    def test_weak_mixing_value(self):
        assert matrix_coefficient(RepParams(1), "aa", ONE, CylinderFunction.indicator(S, "b")) == Fraction(1, 36)


class TestTheta:
    def test_spot_value(self):
        assert all(v == Fraction(1, 2) for v in theta_multiplier(S, "a", 1, 0).values)

    def test_identity(self):
        assert theta_multiplier(S, ReducedWord(), 2, 1.0).values[0] == 0

    @pytest.mark.parametrize("k,epsilon", [(2, None), (3, None), (2, 0.6)])
    def test_closed_form_against_pair_sum(self, k, epsilon):
        space = TreeBoundarySpace(k, epsilon)
        rng = np.random.default_rng(6)
        for n in range(1, 5 if k == 2 else 4):
            for p, t in ((1, 0), (2, 0.5), (1.5, 1.0)):
                g = random_word(rng, k, n)
                closed = theta_multiplier(space, g, p, t).numeric()
                assert np.allclose(closed, theta_bruteforce(space, g, p, t), rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("k", [2, 3])
    def test_pointwise_log_bound(self, k):
        space = TreeBoundarySpace(k)
        # Theta(omega) <= C (epsilon <omega, ref> + |g| + 1) with one constant C = 1
        for n in range(1, 9):
            for p in (1, 2):
                for t in (0.0, 1.0):
                    for a, v in enumerate(theta_table(space, n, p, t)):
                        assert float(v) <= space.epsilon * a + n + 1


class TestNorms:
    def test_identity_norm(self):
        assert op_norm_lower(S, RepParams(2), ReducedWord(), 3) == 1.0

    def test_quadratic_forms_match_explicit_norms(self):
        rng = np.random.default_rng(7)
        for n, d, s, t in ((1, 2, 0, 0), (3, 2, 0, 0.5), (2, 2, 0.2, 1.0), (4, 3, 0, 0), (2, 3, -0.3, 0.2)):
            g = random_word(rng, 2, n)
            P = RepParams(2, s, t)
            A, B = rep_quadratic_forms(S, P, g, d)
            for _ in range(3):
                phi = CylinderFunction.random_normal(S, d, rng, complex_values=True)
                v = phi.values
                assert np.real(np.conj(v) @ A @ v) == pytest.approx(float(wlogp_power(apply_rep(P, g, phi), 2)), rel=1e-10)
                assert np.real(np.conj(v) @ B @ v) == pytest.approx(float(wlogp_power(phi, 2)), rel=1e-10)

    def test_monotone_in_depth(self):
        for g in ("a", "ab", "abA"):
            vals = [op_norm_lower(S, RepParams(2, 0, 1.0), g, d) for d in (2, 3, 4)]
            assert vals[0] <= vals[1] + 1e-12 and vals[1] <= vals[2] + 1e-12

    def test_dominates_constant_ratio(self):
        for n in (1, 3, 5):
            g = random_word(np.random.default_rng(n), 2, n)
            one = CylinderFunction.constant(S, 1.0, exact=False)
            for p in (1, 2):
                ratio = float(wlogp_power(apply_rep(RepParams(p), g, one), p)) ** (1 / p)
                assert op_norm_lower(S, RepParams(p), g, 2, candidates=4) >= ratio - 1e-12

    def test_basic_calculation(self):
        b = basic_calc_upper(S, RepParams(1), ReducedWord(), 1.0)
        assert b.theta_sup == 0 and b.composite == 1.0
        b = basic_calc_upper(S, RepParams(3), ReducedWord(), 1.0)
        assert b.composite == 9.0
        b = basic_calc_upper(S, RepParams(1), "a", 1.0)
        assert b.theta_sup == Fraction(1, 2) and b.C1 == 1 and b.C2 == 2
        with pytest.raises(ValueError):
            basic_calc_upper(S, RepParams(2, 0.1), "a", 1.0)

    def test_upper_bound_dominates_exact_norm(self):
        rng = np.random.default_rng(8)
        for n in range(1, 7):
            g = random_word(rng, 2, n)
            for t in (0.0, 1.0):
                lower = op_norm_lower(S, RepParams(2, 0, t), g, 4) ** 2
                # a log-Sobolev Luxemburg constant of 0.5 is below every measured value
                assert basic_calc_upper(S, RepParams(2, 0, t), g, 0.5).composite >= lower

    def test_lr_growth(self):
        assert lr_growth(S, 2, 2, 5) == (1.0, 1.0)
        for p, r in ((2, 4), (4, 2), (2, 3), (3, 1.5)):
            for n in range(0, 15):
                lo, hi = lr_growth(S, p, r, n)
                assert lo <= hi * (1 + 1e-12)

    def test_lr_lower_is_attained_by_constant(self):
        g = W("abA")
        f = apply_rep(RepParams(2), g, CylinderFunction.constant(S, 1.0, exact=False))
        assert lp_power(f, 4) ** 0.25 == pytest.approx(lr_growth(S, 2, 4, g)[0], rel=1e-12)

    def test_llogl_of_power_matches_cells(self):
        for g in ("a", "abA", "abab"):
            for p in (1, 2):
                f = apply_rep(RepParams(p), g, CylinderFunction.constant(S, 1.0, exact=False))
                direct = llogl_norm(f.abs_power(p))
                assert llogl_of_power(S, RepParams(p), g) == pytest.approx(direct, rel=1e-9)

    def test_llogl_lower_is_linear(self):
        vals = [llogl_of_power(S, RepParams(1), "a" * n) for n in range(8, 30)]
        assert all(v >= 0.25 * S.epsilon * S.D * n for v, n in zip(vals, range(8, 30)))
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_dual_params():
    d = RepParams(3, 0.2, 0.5).dual()
    assert d.p == pytest.approx(1.5) and d.s == -0.2 and d.t == 0.5
    assert math.isinf(RepParams(1).dual().p)
