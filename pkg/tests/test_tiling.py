from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Pattern
from shiftforge.core.shifts import pattern_count
from shiftforge.errors import RefusalError
from shiftforge.tiling.periodic import (PeriodicTiling, approximation_bounds, encode_tiling,
                                        frame, tile_approximations, tiling_sft)
from shiftforge.tiling.shapes import (ShapeSystem, Tile, centers_to_encoding, check_rule_R1,
                                      convert_encoding, decode_tiling, torus_r1_labellings,
                                      torus_tilings)


def test_box_tiling_encoding_satisfies_r1(box2):
    F = FiniteSet.box((0, 0), (4, 4))
    t = encode_tiling(box2, F)
    assert check_rule_R1(t, box2.system) == []
    tiles = decode_tiling(t, box2.system)
    assert [tile.center for tile in tiles] == [(0, 0), (0, 2), (2, 0), (2, 2)]


def test_offset_windows_see_partial_tiles(box2):
    t = encode_tiling(box2, FiniteSet.box((1, 1), (4, 4)))
    assert check_rule_R1(t, box2.system) == []
    assert len(decode_tiling(t, box2.system)) == 4


def test_broken_label_is_reported(box2):
    t = encode_tiling(box2, FiniteSet.box((0, 0), (2, 2)))
    labels = list(t.labels)
    labels[0], labels[1] = labels[1], labels[0]
    bad = Pattern(t.domain, tuple(labels))
    assert check_rule_R1(bad, box2.system)
    with pytest.raises(RefusalError):
        decode_tiling(bad, box2.system)


def test_center_encoding_round_trip(box2, dominoes):
    F = FiniteSet.box((0, 0), (4, 4))
    t = encode_tiling(box2, F)
    centers, target = convert_encoding(t, box2.system)
    assert target.symbols == ('0', 'S0')
    assert sum(centers.labels) == 4
    assert centers_to_encoding(centers, box2.system) == t
    line = encode_tiling(dominoes, FiniteSet.interval(0, 10))
    centers, _ = convert_encoding(line, dominoes.system)
    assert centers.labels == (1, 0, 2, 0, 0, 1, 0, 2, 0, 0)
    assert centers_to_encoding(centers, dominoes.system) == line


def test_tile_lookup_on_an_irregular_lattice(dominoes):
    assert dominoes.tile_of(7) == (Tile(1, (7,)), (0,))
    assert dominoes.tile_of(-1) == (Tile(1, (-3,)), (2,))
    assert dominoes.period_extents() == (5,)


@pytest.mark.parametrize('n,expected', [(4, 12), (2, 4)])
def test_torus_r1_labellings_are_exact_covers_2d(n, expected):
    system = ShapeSystem.box(2, 2)
    r1 = torus_r1_labellings(system, n)
    assert r1 == torus_tilings(system, n)
    assert len(r1) == expected


@pytest.mark.parametrize('n,expected', [(4, 2), (5, 5), (6, 5), (7, 7)])
def test_torus_r1_labellings_are_exact_covers_1d(dominoes, n, expected):
    r1 = torus_r1_labellings(dominoes.system, n)
    assert r1 == torus_tilings(dominoes.system, n)
    assert len(r1) == expected


def test_shape_system_refusals():
    with pytest.raises(RefusalError):
        ShapeSystem((FiniteSet.interval(1, 3),))
    with pytest.raises(RefusalError):
        ShapeSystem((FiniteSet.interval(0, 2), FiniteSet.interval(-1, 1)))
    with pytest.raises(RefusalError):
        PeriodicTiling(ShapeSystem.box(2), ((3,),), (Tile(0, (0,)),))


@pytest.mark.parametrize('L', [1, 2, 3, 5])
def test_box_tiling_sft_has_L_phases(L):
    T = tiling_sft(PeriodicTiling.box(L))
    for n in (1, L, 3 * L + 1):
        assert pattern_count(T, FiniteSet.interval(0, n)) == L


def test_irregular_tiling_sft_has_covolume_phases(dominoes):
    T = tiling_sft(dominoes)
    assert pattern_count(T, FiniteSet.interval(0, 12)) == 5


def test_box_tiling_sft_2d_phases():
    T = tiling_sft(PeriodicTiling.box(2, 2))
    assert pattern_count(T, FiniteSet.box((0, 0), (3, 3))) == 4


def test_inner_and_outer_approximations(box2):
    F = FiniteSet.box((1, 0), (6, 4))
    approx = tile_approximations(box2, F)
    assert len(approx.outer) == 6
    assert len(approx.inner) == 4
    assert approx.inner_sites.issubset(F) and F.issubset(approx.outer_sites)
    K = FiniteSet.box((-1, -1), (2, 2))
    # every site of a 2x2 box is on its own border
    assert frame(box2, K, F) == approx.inner_sites


def test_approximation_bounds_numbers():
    T = PeriodicTiling.box(2)
    b = approximation_bounds(T, FiniteSet.interval(1, 41))
    assert (b.size, b.inner, b.outer) == (40, 38, 42)
    assert b.defect == Fraction(2, 40)
    assert b.eps0 == Fraction(3, 10)
    assert all(b.holds(Fraction(1, 3)).values())
    assert not b.holds(Fraction(1, 40))['gap']


@st.composite
def tiling_and_window(draw):
    d = draw(st.sampled_from((1, 2)))
    L = draw(st.integers(1, 3))
    n = draw(st.integers(L, 40 if d == 1 else 12))
    offset = tuple(draw(st.integers(-7, 7)) for _ in range(d))
    lo = offset
    hi = tuple(c + n for c in offset)
    return PeriodicTiling.box(L, d), FiniteSet.box(lo, hi)


@given(tiling_and_window())
@settings(max_examples=500, deadline=None)
def test_bounds_hold_above_the_invariance_threshold(case):
    T, F = case
    b = approximation_bounds(T, F)
    checks = b.holds(b.eps0 + Fraction(1, 1000))
    assert checks == {'gap': True, 'inner': True, 'outer': True}
    assert b.inner <= b.size <= b.outer
