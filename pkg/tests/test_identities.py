from __future__ import annotations

import pytest

from boundary_lab.identities import (
    canonical_form,
    change_of_variables_suite,
    cocycle_suite,
    gmv_suite,
    orbit_representatives,
)
from boundary_lab.word_tree import ReducedWord, TreeBoundarySpace, words_up_to

S2 = TreeBoundarySpace(2)


def test_canonical_form_examples():
    assert canonical_form(ReducedWord.parse("B")) == ReducedWord.parse("a")
    assert canonical_form(ReducedWord.parse("bAb")) == ReducedWord.parse("aba")


def test_orbits_cover_every_word():
    reps = set(orbit_representatives(2, 4))
    for g in words_up_to(2, 4):
        assert canonical_form(g) in reps
        assert canonical_form(canonical_form(g)) == canonical_form(g)


def test_suites_pass_without_symmetry_reduction():
    # the reduction is exact: the full enumeration gives the same verdicts
    assert gmv_suite(S2, max_depth=4, max_length=2, use_symmetry=False).passed
    assert cocycle_suite(S2, max_length=2, use_symmetry=False, budget=None).passed
    assert change_of_variables_suite(S2, max_length=4, use_symmetry=False).passed


@pytest.mark.parametrize("epsilon", [None, 0.37])
def test_suites_at_other_epsilon(epsilon):
    S = TreeBoundarySpace(2, epsilon)
    assert gmv_suite(S, max_depth=4, max_length=2).passed
    assert change_of_variables_suite(S, max_length=5).passed


def test_forward_orientation_is_caught():
    assert not gmv_suite(S2, max_depth=4, max_length=2, orientation="forward").passed
    assert not cocycle_suite(S2, max_length=2, orientation="forward", budget=None).passed


def test_cocycle_budget_marks_sampling():
    res = cocycle_suite(S2, max_length=3, budget=10_000)
    assert res.sampled and res.passed
    full = cocycle_suite(S2, max_length=2, budget=None)
    assert not full.sampled and full.passed
