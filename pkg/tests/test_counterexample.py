from fractions import Fraction

import numpy as np
import pytest

from shiftforge.core.group import FiniteSet
from shiftforge.counterexample.lift import (PRIME, enumerate_lifts, lift_array, lift_count,
                                            lift_window, project)
from shiftforge.counterexample import periodize
from shiftforge.counterexample.periodize import lifted_window, periodize_and_refute
from shiftforge.counterexample.words import WordSystem
from shiftforge.errors import CapExceededError, RefusalError

words = WordSystem()


def factors(bits, N):
    s = ''.join('1' if b else '0' for b in bits)
    return {s[i:i + N] for i in range(len(s) - N + 1)}


# ---------------- level tables ---------------- #


def test_level_tables():
    assert [words.T(n) for n in (1, 2, 3)] == [41, 161, 481]
    assert [words.L(n) for n in (1, 2, 3, 4)] == [3, 126, 20291, 9759978]
    assert [words.ones(n) for n in (1, 2, 3, 4)] == [1, 42, 6763, 3253004]
    assert [len(words.word(n)) for n in (1, 2, 3)] == [3, 126, 20291]
    assert [int(words.word(n).sum()) for n in (1, 2, 3)] == [1, 42, 6763]


def test_second_word_is_a_power_of_the_first():
    assert words.word(2).tolist() == [0, 1, 0] * 42


def test_frequency_drops_stay_small():
    rows = words.frequency_table(4)
    assert all(r['above_bound'] for r in rows)
    assert all(r['drop_ok'] for r in rows[:-1])
    assert 'drop' not in rows[-1]


def test_words_are_read_only():
    with pytest.raises(ValueError):
        words.word(2)[0] = 1


def test_bad_systems_are_refused():
    with pytest.raises(RefusalError):
        WordSystem(delta=Fraction(3, 2))
    with pytest.raises(RefusalError):
        words.T(0)
    with pytest.raises(CapExceededError):
        WordSystem(max_level=2).word(3)


# ---------------- reading w-infinity ---------------- #


def test_omega_matches_the_materialized_word():
    w = words.word(4)
    rng = np.random.default_rng(7)
    for i in rng.integers(0, len(w), size=10 ** 4).tolist():
        assert words.omega_at(i) == w[i]
    assert words.omega_at(123) == 0
    assert words.omega_at(124) == 1


def test_x_star_is_symmetric():
    x = words.x_window(-500, 501)
    assert x.tolist() == x[::-1].tolist()
    assert words.x_star(-124) == words.x_star(124) == 1


def test_prefix_past_the_materialized_level():
    shallow = WordSystem(max_level=2)
    assert shallow.prefix(5000).tolist() == words.word(3)[:5000].tolist()
    with pytest.raises(RefusalError):
        words.omega_at(-1)


# ---------------- isolated ones ---------------- #


@pytest.mark.parametrize('n,center,word', [(1, 1, '010'), (2, 4, '00100'),
                                           (3, 20288, '0001000')])
def test_isolated_one_nearest_the_origin(n, center, word):
    found = words.check_P3_window(n, words.L(n + 1))
    assert found['center'] == center
    assert found['start'] == center - n
    assert found['word'] == word


def test_isolated_one_needs_a_large_enough_radius():
    with pytest.raises(RefusalError):
        words.check_P3_window(1, 2)


# ---------------- the orbit-closure language ---------------- #


def test_short_subwords():
    assert words.subwords(1) == ['0', '1']
    assert words.subwords(2) == ['00', '01', '10']
    assert words.subwords(3) == ['000', '001', '010', '100', '101']


@pytest.mark.parametrize('N', [1, 2, 3])
def test_subwords_match_a_long_window(N):
    assert set(words.subwords(N)) == factors(words.x_window(-200000, 200000), N)


def test_subword_cap():
    with pytest.raises(CapExceededError):
        words.subwords(5)


@pytest.mark.parametrize('n,distance', [(1, 3), (2, 3), (3, 4)])
def test_ones_in_distinct_blocks_are_separated(n, distance):
    spans = words.block_spans(n, n + 1)
    assert len(spans) == words.T(n) + 1
    assert spans.min_cross_distance(words.word(n + 1)) == distance


def test_block_spans_refuse_bad_levels():
    with pytest.raises(RefusalError):
        words.block_spans(3, 3)


def test_density_at_the_second_level():
    report = words.density_report(63)
    assert report['ones'] == 42
    assert report['above_tenth']
    assert report['lift_log2_count'] == 127 * 42


# ---------------- lifts ---------------- #


def test_lifts_of_a_small_box():
    F = FiniteSet.box((0, 0), (4, 2))
    lifts = list(enumerate_lifts(F))
    assert len(lifts) == 4 == lift_count(words.x_window(0, 4), 2)
    assert len(set(lifts)) == 4
    with pytest.raises(RefusalError):
        lift_window(F, frozenset({(0, 0)}))


@pytest.mark.parametrize('width,height', [(2, 3), (5, 2), (8, 2), (11, 3)])
def test_lift_count_is_two_to_the_ones(width, height):
    F = FiniteSet.box((-width // 2, 0), (width - width // 2, height))
    (i0, _), (i1, _) = F.bounds()
    cols = words.x_window(i0, i1 + 1)
    k = int(cols.sum()) * height
    assert k <= 20
    assert sum(1 for _ in enumerate_lifts(F)) == 2 ** k == lift_count(cols, height)


def test_lift_projects_back_to_the_columns():
    cols = words.x_window(-10, 11)
    z = lift_array(cols, 6, seed=3)
    assert (z == PRIME).any()
    assert (project(z) == np.tile(cols, (6, 1))).all()


# ---------------- periodization ---------------- #


def test_refutes_window_three_at_level_three():
    z, origin = lifted_window(3, 4096)
    assert origin == (20279, 0)
    res = periodize_and_refute(z, 3, 2, origin)
    assert res.refuted
    assert res.column == 20288
    assert res.period == (7, 4)
    assert res.rows == (0, 4)


def test_refutes_window_one_at_level_two():
    z, origin = lifted_window(2, 64)
    res = periodize_and_refute(z, 2, 1, origin)
    assert res.refuted
    assert res.column == 4
    assert res.period == (5, 3)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_random_lifts_are_refuted_too(seed):
    z, origin = lifted_window(3, 4096, seed=seed)
    res = periodize_and_refute(z, 3, 2, origin)
    assert res.refuted
    again = periodize_and_refute(lifted_window(3, 4096, seed=seed)[0], 3, 2, origin)
    assert again.to_json() == res.to_json()


def test_seams_catch_a_mismatched_repeat(monkeypatch):
    z, origin = lifted_window(2, 64, seed=0)
    c = periodize_and_refute(z, 2, 1, origin).column - origin[0]
    col = z[:, c]
    l2 = next(ell for ell in range(3, 62) if not np.array_equal(col[ell:ell + 2], col[:2]))
    monkeypatch.setattr(periodize, '_repeat', lambda column, n: (0, l2))
    res = periodize_and_refute(z, 2, 1, origin)
    assert not res.row_period_ok
    assert not res.refuted


def test_refutation_refusals():
    z, origin = lifted_window(3, 64)
    with pytest.raises(RefusalError):
        periodize_and_refute(z, 3, 3, origin)
    with pytest.raises(RefusalError):
        periodize_and_refute(np.zeros((16, 16), dtype=np.int64), 3, 2)
    with pytest.raises(RefusalError):
        lifted_window(3, 0)
