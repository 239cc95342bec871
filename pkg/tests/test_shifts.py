import itertools
import math

import networkx as nx
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from shiftforge.core.group import FiniteSet, boundary, product_set
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.core.sft import BlockCode, SftSpec
from shiftforge.core.shifts import (apply_block_code, entropy_estimate, entropy_exact_1d,
                                    excise_and_replace, image_count, image_entropy_1d, occurs_in,
                                    pattern_count, pattern_list, product_shift, projection_codes,
                                    sft_outer_approximation, union_count, window_sft,
                                    window_violations)
from shiftforge.core.transfer import essential_vertices, transfer_graph
from shiftforge.errors import RefusalError

PHI = (1 + math.sqrt(5)) / 2


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def no_adjacent_ones(n):
    return sum(1 for w in itertools.product((0, 1), repeat=n)
               if all(not (a and b) for a, b in zip(w, w[1:])))


def independent_sets(rows, cols):
    cells = [(i, j) for i in range(rows) for j in range(cols)]
    total = 0
    for bits in itertools.product((0, 1), repeat=len(cells)):
        on = {c for c, b in zip(cells, bits) if b}
        if all((i + 1, j) not in on and (i, j + 1) not in on for i, j in on):
            total += 1
    return total


# ---------------- counting ---------------- #


@pytest.mark.parametrize('n', range(1, 31))
def test_golden_mean_counts_are_fibonacci(golden, n):
    assert pattern_count(golden, FiniteSet.interval(0, n)) == fib(n + 2)


@pytest.mark.parametrize('n', range(1, 13))
def test_golden_mean_counts_match_brute_force(golden, n):
    assert pattern_count(golden, FiniteSet.interval(0, n)) == no_adjacent_ones(n)


def test_counts_do_not_depend_on_position(golden):
    assert pattern_count(golden, FiniteSet.interval(-7, 3)) == fib(12)


def test_full_shift_counts(full2):
    assert pattern_count(full2, FiniteSet.interval(0, 20)) == 2 ** 20
    assert entropy_exact_1d(full2).value == pytest.approx(math.log(2))


def test_golden_mean_entropy(golden):
    assert entropy_exact_1d(golden).value == pytest.approx(math.log(PHI), abs=1e-9)
    est = entropy_estimate(golden, FiniteSet.interval(0, 30))
    assert est.value == pytest.approx(math.log(fib(32)) / 30)
    assert abs(est.value - math.log(PHI)) < 0.01
    assert est.mode == 'exact-1D'


def test_pattern_list_is_sorted_and_admissible(golden):
    F = FiniteSet.interval(0, 6)
    labels = pattern_list(golden, F)
    assert labels == sorted(labels)
    assert len(labels) == fib(8)
    assert all(not window_violations(golden, Pattern(F, p)) for p in labels)


def test_empty_sft_has_no_patterns():
    E = SftSpec.empty('01')
    assert pattern_count(E, FiniteSet.interval(0, 4)) == 0
    est = entropy_estimate(E, FiniteSet.interval(0, 4))
    assert est.empty and est.value == 0.0


@pytest.mark.parametrize('side,count', [(1, 2), (2, 7), (3, 63)])
def test_hard_square_counts(hard_square, side, count):
    F = FiniteSet.box((0, 0), (side, side))
    assert pattern_count(hard_square, F) == count
    assert count == independent_sets(side, side)


def test_hard_square_estimate_is_tagged(hard_square):
    est = entropy_estimate(hard_square, FiniteSet.box((0, 0), (3, 3)))
    assert est.mode.startswith('local-margin')
    assert est.value == pytest.approx(math.log(63) / 9)


def test_window_violations_locate_the_failure(golden):
    p = Pattern.word((0, 1, 1, 0, 1, 1))
    assert window_violations(golden, p) == [(1,), (4,)]
    assert not occurs_in(golden, p)
    assert occurs_in(golden, Pattern.word((1, 0, 1)))


def test_refusals(golden, hard_square):
    with pytest.raises(RefusalError):
        pattern_count(golden, FiniteSet.empty(1))
    with pytest.raises(RefusalError):
        pattern_count(golden, FiniteSet.box((0, 0), (2, 2)))
    with pytest.raises(RefusalError):
        entropy_exact_1d(hard_square)


# ---------------- excision ---------------- #


def random_sft(allowed_bits):
    allowed = frozenset(p for p, keep in zip(itertools.product(range(3), repeat=2), allowed_bits)
                        if keep)
    return SftSpec(Alphabet.of('abc'), FiniteSet.interval(0, 2), allowed)


def _check_excision(X, data):
    n = data.draw(st.integers(4, 12), label='n')
    a = data.draw(st.integers(1, n - 3), label='a')
    b = data.draw(st.integers(a + 1, n - 1), label='b')
    D, F = FiniteSet.interval(0, n), FiniteSet.interval(a, b)
    assert product_set(X.window.difference_set(), F).issubset(D)
    xs = pattern_list(X, D)
    assume(xs)
    x = Pattern(D, xs[data.draw(st.integers(0, len(xs) - 1), label='x')])
    border = boundary(X.window.difference_set(), F)
    pinned = {s: (x.at(s),) for s in border.sites}
    ys = pattern_list(X, D, allowed_at=pinned)
    y = Pattern(D, ys[data.draw(st.integers(0, len(ys) - 1), label='y')])
    z = excise_and_replace(X, x, y, F)
    assert window_violations(X, z) == []
    assert occurs_in(X, z)
    assert z.restrict(F) == y.restrict(F)
    assert z.restrict(D.difference(F)) == x.restrict(D.difference(F))


@given(st.data())
@settings(max_examples=500, deadline=None,
          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
def test_excision_keeps_golden_mean_points_admissible(golden, data):
    _check_excision(golden, data)


@given(st.lists(st.booleans(), min_size=9, max_size=9), st.data())
@settings(max_examples=500, deadline=None,
          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
def test_excision_keeps_random_sft_points_admissible(allowed_bits, data):
    X = random_sft(allowed_bits)
    assume(X.allowed)
    _check_excision(X, data)


def test_excision_refuses_disagreeing_borders(golden):
    D, F = FiniteSet.interval(0, 8), FiniteSet.interval(2, 6)
    x = Pattern.word((0,) * 8)
    y = Pattern.word((0, 0, 1, 0, 0, 0, 0, 0))
    with pytest.raises(RefusalError):
        excise_and_replace(golden, x, y, F)
    with pytest.raises(RefusalError):
        excise_and_replace(golden, x, x, FiniteSet.interval(0, 4))


# ---------------- products, images, approximations ---------------- #


def test_product_with_full_shift_multiplies_counts(golden, full2):
    Z = product_shift(golden, full2)
    F = FiniteSet.interval(0, 10)
    assert pattern_count(Z, F) == fib(12) * 2 ** 10
    pi_x, pi_t = projection_codes(golden, full2)
    assert image_count(Z, pi_x, F) == fib(12)
    assert image_count(Z, pi_t, F) == 2 ** 10


def test_even_shift_entropy_is_log_phi(even):
    assert even.entropy_exact_1d().value == pytest.approx(math.log(PHI), abs=1e-9)
    # on [0, 4) the only excluded words are the four containing 101
    assert image_count(even.cover, even.code, FiniteSet.interval(0, 4)) == 12


def test_image_entropy_of_an_identity_code(golden):
    code = BlockCode.identity(golden.alphabet)
    assert image_entropy_1d(golden, code).value == pytest.approx(math.log(PHI), abs=1e-9)


def test_outer_approximation_contains_the_handle(golden):
    X = golden.handle().forbid(Pattern.word((1, 0, 1)))
    Y = sft_outer_approximation(X, 1)
    F = FiniteSet.interval(0, 9)
    assert set(pattern_list(X, F)) <= set(pattern_list(Y, F))
    assert set(pattern_list(Y, F)) <= set(pattern_list(golden, F))
    assert sft_outer_approximation(X, 0) == golden


def test_window_sft_recovers_golden(golden):
    W = window_sft(golden, FiniteSet.interval(0, 3))
    F = FiniteSet.interval(0, 12)
    assert pattern_count(W, F) == pattern_count(golden, F)


def test_union_count_rule(golden, full2):
    fixed = SftSpec(golden.alphabet, FiniteSet.interval(0, 1), frozenset({(0,)}))
    out = union_count(golden, fixed, FiniteSet.interval(0, 8))
    assert out == {'count_x': fib(10), 'count_y': 1, 'union': fib(10), 'within_rule': True}
    out = union_count(golden, full2, FiniteSet.interval(0, 8))
    assert out['union'] == 2 ** 8 and out['within_rule']


def test_apply_block_code():
    bits = Alphabet.of('01')
    word = Pattern.word((0, 1, 1, 0, 1))
    assert apply_block_code(BlockCode.identity(bits), word) == word

    flip = BlockCode.one_block(bits, bits, {'0': '1', '1': '0'})
    assert apply_block_code(flip, word).labels == (1, 0, 0, 1, 0)

    # y_i = x_i xor x_{i+1}: the domain loses its last site
    xor = BlockCode(bits, bits, FiniteSet.interval(0, 2),
                    {(a, b): a ^ b for a in (0, 1) for b in (0, 1)})
    out = apply_block_code(xor, word)
    assert out.domain == FiniteSet.interval(0, 4)
    assert out.labels == (1, 0, 1, 1)
    with pytest.raises(RefusalError):
        apply_block_code(xor, Pattern.word((1,)))
    with pytest.raises(RefusalError):
        apply_block_code(flip, Pattern.word((0, 2)))


def test_union_count_by_brute_force(golden):
    no_zeros_pair = SftSpec.from_forbidden(golden.alphabet, FiniteSet.interval(0, 2), [(0, 0)])
    words = list(itertools.product((0, 1), repeat=8))
    a = {w for w in words if (1, 1) not in zip(w, w[1:])}
    b = {w for w in words if (0, 0) not in zip(w, w[1:])}
    out = union_count(golden, no_zeros_pair, FiniteSet.interval(0, 8))
    assert (out['count_x'], out['count_y'], out['union']) == (len(a), len(b), len(a | b))


def test_union_count_on_a_window_too_large_to_list(golden, full2):
    out = union_count(golden, full2, FiniteSet.interval(0, 200))
    assert out['count_x'] == fib(202)
    assert out['union'] == out['count_y'] == 2 ** 200
    assert out['within_rule']


# ---------------- d=2 window properties ---------------- #

cells = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 3)), min_size=1, max_size=6,
                 unique=True)


@given(cells)
@settings(max_examples=40, deadline=None)
def test_hard_square_margin_only_tightens(hard_square, f):
    F = FiniteSet.of(f)
    counts = [pattern_count(hard_square, F, margin=m) for m in range(4)]
    assert counts == sorted(counts, reverse=True)
    assert counts[2] == pattern_count(hard_square, F)


@given(cells, cells)
@settings(max_examples=40, deadline=None)
def test_hard_square_counts_are_subadditive(hard_square, f, g):
    F = FiniteSet.of(f)
    G = FiniteSet.of(g).difference(F)
    assume(G)
    joint = pattern_count(hard_square, F.union(G))
    assert joint <= pattern_count(hard_square, F) * pattern_count(hard_square, G)


@given(cells, cells)
@settings(max_examples=40, deadline=None)
def test_hard_square_counts_grow_with_the_window(hard_square, f, g):
    F = FiniteSet.of(f)
    bigger = F.union(FiniteSet.of(g))
    assert pattern_count(hard_square, F) <= pattern_count(hard_square, bigger)


def test_margin_search_handles_large_domains():
    zeros = SftSpec(Alphabet.of('01'), FiniteSet.box((0, 0), (1, 1)), frozenset({(0,)}))
    F = FiniteSet.box((0, 0), (40, 40))
    assert pattern_count(zeros, F, margin=1) == 1
    line = SftSpec(Alphabet.of('01'), FiniteSet.interval(0, 1), frozenset({(0,)}))
    assert pattern_count(line, FiniteSet.interval(0, 2500), margin=3) == 1


def test_essential_vertices_drop_dangling_paths():
    G = nx.DiGraph([('c', 'a'), ('a', 'b'), ('b', 'b'), ('b', 'd'), ('b', 'e'),
                    ('e', 'f'), ('f', 'e'), ('f', 'g')])
    assert essential_vertices(G) == {'b', 'e', 'f'}
    assert essential_vertices(nx.DiGraph([(0, 1), (1, 2)])) == set()
    assert essential_vertices(nx.DiGraph()) == set()


def test_transfer_graph_of_a_periodic_handle(golden):
    # forbidding 00 as well leaves nothing in the golden mean but (01)^oo
    X = golden.handle().forbid(Pattern.word((0, 0)))
    G = transfer_graph(X)
    assert G.spectral_radius() == pytest.approx(1.0)
    assert pattern_count(X, FiniteSet.interval(0, 10)) == 2
