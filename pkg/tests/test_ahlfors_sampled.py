from __future__ import annotations

import math

import numpy as np
import pytest

from boundary_lab.ahlfors_sampled import (
    circle_tail_closed_form,
    complement_lower_bound,
    complement_tail_integral,
    make_cantor,
    make_circle,
    make_tree_sample,
    random_ball_union,
    tail_bounds,
    tail_integral,
)
from boundary_lab.word_tree import TreeBoundarySpace


def test_circle_examples():
    C = make_circle(8)
    assert C.ball_mass(0, 1 / 8) == pytest.approx(1 / 4)
    assert C.dist(0, 4) == pytest.approx(0.5) == C.diam
    assert C.total_mass == pytest.approx(1.0)


def test_cantor_examples():
    K = make_cantor(3)
    assert K.n == 8
    assert K.ball_mass(0, 1 / 3) == pytest.approx(0.5)


def test_cantor_regularity_constants_straddle_measured_ratios():
    K = make_cantor(8)
    ratios = K.regularity_ratios(np.arange(0, K.n, 7))
    assert K.c_low <= ratios.min() and ratios.max() <= K.c_high
    assert K.c_low < 1 < K.c_high


def test_circle_ratios_exact():
    C = make_circle(256)
    assert np.allclose(C.regularity_ratios(np.arange(0, 256, 17)), 2.0)


def test_tree_sample_ratios():
    S = TreeBoundarySpace(2)
    T = make_tree_sample(S, 5)
    ratios = T.regularity_ratios(np.arange(0, T.n, 11))
    assert T.c_low <= ratios.min() and ratios.max() <= T.c_high


def test_circle_tail_closed_form():
    C = make_circle(4096)
    for r in C.dyadic_radii()[1:]:
        assert tail_integral(C, 5, r) == pytest.approx(circle_tail_closed_form(r), rel=1e-3)
    assert tail_integral(C, 0, C.diam) == 0.0


def test_tree_tail_cross_check():
    S = TreeBoundarySpace(2)
    T = make_tree_sample(S, 8)
    for j in range(1, 7):
        assert tail_integral(T, 3, 3.0**-j) == pytest.approx(0.75 + (j - 1) / 2, rel=1e-12)


def test_complement_tail_extremes():
    C = make_circle(1024)
    everything = np.ones(C.n)
    assert complement_tail_integral(C, 0, everything) == 0.0
    nothing = np.zeros(C.n)
    # empty E: the whole punctured integral, i.e. the tail at the sampling resolution
    r_min = 1 / C.n
    assert complement_tail_integral(C, 0, nothing) == pytest.approx(circle_tail_closed_form(r_min / 2), rel=0.05)


def test_complement_lower_bound_on_quarter_ball():
    C = make_circle(1024)
    E = C.ball_mask(0, 1 / 8)
    mass = float(C.weights @ E)
    assert mass == pytest.approx(0.25)
    for i in (0, 100, 512):
        assert complement_tail_integral(C, i, E) >= complement_lower_bound(C, mass)


@pytest.mark.parametrize("maker", [lambda: make_circle(512), lambda: make_cantor(7),
                                   lambda: make_tree_sample(TreeBoundarySpace(2), 5)])
def test_lemma_bounds_on_random_subsets(maker):
    S = maker()
    rng = np.random.default_rng(0)
    radii = S.dyadic_radii()
    for _ in range(50):
        i, r = int(rng.integers(S.n)), float(radii[rng.integers(len(radii))])
        lo, hi = tail_bounds(S, r)
        assert lo - 1e-12 <= tail_integral(S, i, r) <= hi + 1e-12
        E = random_ball_union(S, rng)
        mass = float(S.weights @ E)
        assert complement_tail_integral(S, i, E) >= complement_lower_bound(S, mass) - 1e-12


def test_tail_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        tail_integral(make_circle(8), 0, 0.0)


def test_closed_form_vanishes_at_diameter():
    assert circle_tail_closed_form(0.5) == 0.0
    assert circle_tail_closed_form(0.25) == pytest.approx(2 * math.log(2))
