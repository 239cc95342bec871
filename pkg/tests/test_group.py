from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from shiftforge.core.group import (FiniteSet, boundary, folner_window, interior,
                                   invariance_defect, product_set, translate)
from shiftforge.errors import RefusalError

sites_1d = st.lists(st.integers(-6, 6), min_size=1, max_size=8)
sites_2d = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=8)


@given(sites_2d, sites_2d)
@settings(max_examples=200)
def test_interior_and_boundary_partition(k, f):
    K, F = FiniteSet.of(k), FiniteSet.of(f)
    inner, border = interior(K, F), boundary(K, F)
    assert not inner.intersection(border)
    assert inner.union(border) == F


@given(sites_1d, st.integers(-10, 10))
def test_translate_keeps_size_and_order(k, g):
    K = FiniteSet.of(k)
    moved = translate(K, g)
    assert len(moved) == len(K)
    assert list(moved.sites) == sorted(moved.sites)
    assert translate(moved, -g) == K


def test_difference_set_of_a_step():
    K = FiniteSet.interval(0, 2)
    assert K.difference_set() == FiniteSet.interval(-1, 2)


def test_boundary_of_an_interval():
    KK = FiniteSet.interval(-1, 2)
    assert boundary(KK, FiniteSet.interval(0, 6)).sites == ((0,), (5,))
    assert len(interior(KK, FiniteSet.interval(0, 6))) == 4


def test_invariance_defect_is_exact():
    KK = FiniteSet.interval(-1, 2)
    assert invariance_defect(KK, FiniteSet.interval(0, 10)) == Fraction(2, 10)
    square = FiniteSet.box((0, 0), (4, 4))
    step = FiniteSet.of([(0, 0), (0, 1), (1, 0)])
    # KF adds one row and one column, minus the corner
    assert invariance_defect(step, square) == Fraction(8, 16)


def test_product_set_sizes():
    K = FiniteSet.interval(0, 3)
    F = FiniteSet.interval(10, 15)
    assert product_set(K, F) == FiniteSet.interval(10, 17)


def test_folner_windows_shrink_their_defect():
    KK = FiniteSet.box((-1, -1), (2, 2))
    defects = [invariance_defect(KK, folner_window(n, 2).box) for n in (4, 8, 16, 32)]
    assert defects == sorted(defects, reverse=True)
    assert defects[-1] < Fraction(1, 4)


def test_refusals():
    with pytest.raises(RefusalError):
        FiniteSet.of([(0, 0, 0)])
    with pytest.raises(RefusalError):
        invariance_defect(FiniteSet.interval(0, 1), FiniteSet.empty(1))
    with pytest.raises(RefusalError):
        product_set(FiniteSet.interval(0, 1), FiniteSet.box((0, 0), (1, 1)))
    with pytest.raises(RefusalError):
        folner_window(0, 1)


def _with_origin(sites, dim):
    return FiniteSet.of(list(sites) + [(0,) * dim], dim)


@given(sites_2d, sites_2d)
@settings(max_examples=300)
def test_boundary_is_sandwiched_by_the_defect(k, f):
    K, F = _with_origin(k, 2), FiniteSet.of(f)
    moved_off = len(product_set(K, F).symmetric_difference(F))
    border = len(boundary(K, F))
    assert Fraction(moved_off, len(K)) <= border <= len(K) * moved_off


@given(sites_1d, sites_1d, st.integers(-12, 12))
@settings(max_examples=300)
def test_translates_are_inside_or_miss_the_interior(k, f, g):
    K, F = FiniteSet.of(k), FiniteSet.of(f)
    moved = translate(K, g)
    inner = interior(K.difference_set(), F)
    assert moved.issubset(F) or not moved.intersection(inner)


@given(sites_2d, sites_2d, st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
@settings(max_examples=300)
def test_defect_ignores_translation(k, f, g):
    K, F = FiniteSet.of(k), FiniteSet.of(f)
    assert invariance_defect(K, translate(F, g)) == invariance_defect(K, F)
