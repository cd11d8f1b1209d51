from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundary_lab.ahlfors_sampled import SampledFunction, make_circle, make_tree_sample
from boundary_lab.energy_forms import (
    circle_half_indicator_energy,
    cutoff_operator,
    embedding_spectrum,
    energy_matrix,
    log_energy,
    log_energy_sampled,
    sample_energy_from_cells,
    tree_cutoff_N,
    wavelet_spectrum,
    wlogp_norm,
    wlogp_power,
)
from boundary_lab.errors import DimensionTooLarge
from boundary_lab.functions_orlicz import CylinderFunction, lp_power
from boundary_lab.word_tree import TreeBoundarySpace

S = TreeBoundarySpace(2)
ONE = CylinderFunction.constant(S, 1)
CHI_A = CylinderFunction.indicator(S, "a")


def rationals(depth: int):
    n = S.cylinder_count(depth)
    frac = st.fractions(min_value=-20, max_value=20, max_denominator=7)
    return st.lists(frac, min_size=n, max_size=n).map(lambda v: CylinderFunction(S, depth, np.array(v, dtype=object)))


class TestExactValues:
    def test_constant_has_zero_energy(self):
        assert log_energy(ONE.refine(3), 2).total == 0
        assert wlogp_norm(ONE, 1) == 1.0

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_indicator(self, p):
        assert log_energy(CHI_A, p).total == Fraction(3, 8)
        assert log_energy(CHI_A, p, method="naive").total == Fraction(3, 8)

    def test_difference_of_indicators(self):
        assert log_energy(CHI_A - CylinderFunction.indicator(S, "A"), 1).total == Fraction(3, 4)

    def test_sobolev_norm(self):
        assert wlogp_power(CHI_A, 1) == Fraction(5, 8)

    def test_homogeneity(self):
        rng = np.random.default_rng(0)
        f = CylinderFunction.random_normal(S, 4, rng)
        assert wlogp_norm(f * 2.0, 2) == pytest.approx(2 * wlogp_norm(f, 2), rel=1e-12)


class TestAggregation:
    @given(st.integers(1, 3).flatmap(rationals), st.sampled_from([1, 2, 3]))
    def test_naive_equals_aggregated_exactly(self, f, p):
        a, b = log_energy(f, p), log_energy(f, p, method="naive")
        assert a.total == b.total
        assert a.by_divergence_depth == b.by_divergence_depth

    @pytest.mark.parametrize("p", [1, 1.5, 2, 3.5])
    def test_float_agreement(self, p):
        rng = np.random.default_rng(int(p * 10))
        f = CylinderFunction.random_normal(S, 5, rng, complex_values=p != 2)
        a, b = log_energy(f, p).total, log_energy(f, p, method="naive").total
        assert a == pytest.approx(b, rel=1e-12)

    def test_breakdown_sums_to_total(self):
        f = CylinderFunction.random_rational(S, 4, np.random.default_rng(1))
        br = log_energy(f, 2)
        assert sum(v for _, v in br.by_divergence_depth) == br.total
        assert [m for m, _ in br.by_divergence_depth] == list(range(4))

    @given(st.integers(1, 3).flatmap(rationals), st.integers(0, 2))
    def test_refinement_invariance(self, f, extra):
        assert log_energy(f.refine(f.depth + extra), 2).total == log_energy(f, 2).total

    def test_depth_caps(self):
        f = CylinderFunction.constant(S, 1.0, 9, exact=False)
        with pytest.raises(DimensionTooLarge):
            log_energy(f, 2, method="naive")

    def test_energy_matrix_is_the_p2_form(self):
        rng = np.random.default_rng(2)
        L = energy_matrix(S, 3)
        for _ in range(5):
            f = CylinderFunction.random_normal(S, 3, rng)
            assert f.values @ L @ f.values == pytest.approx(log_energy(f, 2).total, rel=1e-12)


class TestSampled:
    def test_half_circle_indicator(self):
        C = make_circle(1024)
        f = SampledFunction(C, (C.grid < 0.5).astype(float))
        assert log_energy_sampled(C, f, 1) == pytest.approx(circle_half_indicator_energy(), rel=0.05)
        assert log_energy_sampled(C, SampledFunction(C, np.ones(C.n)), 2) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("p", [1, 2, 2.5])
    def test_tree_sample_matches_cells(self, p):
        f = CylinderFunction.random_normal(S, 4, np.random.default_rng(3))
        sample = make_tree_sample(S, 4)
        assert sample_energy_from_cells(f, p, sample) == pytest.approx(float(log_energy(f, p).total), rel=1e-12)


class TestCutoff:
    def test_closed_form_values(self):
        for j in range(1, 11):
            assert tree_cutoff_N(S, 3.0**-j) == Fraction(3, 4) + Fraction(j - 1, 2)
        assert tree_cutoff_N(S, 1.0) == 0

    def test_zero_operator_beyond_diameter(self):
        op = cutoff_operator((S, 3), 1.0)
        assert not op.matrix.any() and not np.any(op.N_values)
        C = make_circle(64)
        assert not np.any(cutoff_operator(C, C.diam).N_values)

    def test_symmetric(self):
        op = cutoff_operator((S, 4), 3.0**-2)
        assert np.array_equal(op.matrix, op.matrix.T)
        C = cutoff_operator(make_circle(128), 0.05)
        assert np.array_equal(C.matrix, C.matrix.T)

    @pytest.mark.parametrize("p", [1, 2])
    def test_approximation_bound(self, p):
        rng = np.random.default_rng(4)
        for j in (1, 2, 3):
            op = cutoff_operator((S, 4), 3.0**-j)
            for _ in range(5):
                f = CylinderFunction.random_normal(S, 4, rng)
                energy = float(log_energy(f, p).total)
                assert op.approximation_error(f.values, p) <= op.approximation_bound(energy) + 1e-12


class TestSpectrum:
    @pytest.mark.parametrize("depth", [2, 3, 4])
    def test_matches_wavelet_closed_form(self, depth):
        expected = [float(v) for v, m in wavelet_spectrum(S, depth) for _ in range(m)]
        got = embedding_spectrum(S, depth, 30 if depth > 2 else 12)
        assert np.allclose(got, expected[: len(got)], atol=1e-12)

    def test_first_value_is_constant(self):
        vals = embedding_spectrum(S, 3, 5)
        assert vals[0] == pytest.approx(1.0) and np.all(vals[1:] < 1)

    def test_count_checked(self):
        with pytest.raises(ValueError):
            embedding_spectrum(S, 1, 5)


def test_lp_part_of_sobolev_norm():
    f = CylinderFunction.random_rational(S, 2, np.random.default_rng(5))
    assert wlogp_power(f, 2) == lp_power(f, 2) + log_energy(f, 2).total
