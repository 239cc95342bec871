import itertools
import math

import pytest

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.core.sft import BlockCode, SftSpec
from shiftforge.core.shifts import (apply_block_code, entropy_exact_1d, higher_block_recode,
                                    image_patterns, occurs_in, pattern_count)
from shiftforge.combing.config import CombingConfig
from shiftforge.errors import RefusalError, TargetMissedError
from shiftforge.sofic.cover import (build_cover, cover_matches_relabelling, cover_surjective_on,
                                    merged_alphabet, typing_violations)
from shiftforge.sofic.dense import entropy_target_nest, preimage_handle, sofic_dense_family
from shiftforge.sofic.gaps import estimate_max_gap, product_gap_report
from shiftforge.sofic.presentation import SoficPresentation

F9 = FiniteSet.interval(0, 9)


@pytest.fixture(scope='module')
def cover_config(even):
    return CombingConfig.derive(even.cover, 1.0, 3, 9)


@pytest.fixture(scope='module')
def even_cover(even, cover_config):
    return build_cover(even, cover_config)


def test_bundled_even_shift_matches_the_builtin(even):
    assert SoficPresentation.even_shift() == even
    assert even.image_alphabet.symbols == ('0', '1')


def test_merged_alphabet_renames_on_clash():
    merged, renamed = merged_alphabet(Alphabet.of('01'), Alphabet.of('01'))
    assert renamed
    assert merged.symbols == ('x.0', 'x.1', '0', '1')
    merged, renamed = merged_alphabet(Alphabet.of('efg'), Alphabet.of('01'))
    assert not renamed
    assert merged.symbols == ('e', 'f', 'g', '0', '1')


def test_cover_is_the_relabelled_product(even_cover):
    assert cover_matches_relabelling(even_cover, F9)
    assert typing_violations(even_cover, F9) == []


def test_cover_maps_onto_the_sofic_shift(even_cover):
    assert cover_surjective_on(even_cover, F9)


def test_cover_refuses_a_config_of_another_dimension(even, hard_square):
    with pytest.raises(RefusalError):
        build_cover(even, CombingConfig.derive(hard_square, 1.0, 3, 6))


def test_preimage_of_the_zero_point(even_cover):
    zero = SftSpec(Alphabet.of('01'), FiniteSet.interval(0, 1), frozenset({(0,)}))
    # (fg)^oo in two phases, times three tiling phases
    assert pattern_count(preimage_handle(even_cover, zero), F9) == 6


def test_sampled_cover_gaps_respect_the_window_bound(even_cover):
    report = estimate_max_gap(even_cover, 3, F9)
    assert report.within_window_bound
    assert len(report.samples) == 5
    assert report.proof_bound > 0
    assert report.samples[0]['label'] == 'full'


def test_product_gap_is_capped_by_the_tiling_entropy(golden, full2):
    report = product_gap_report(golden, full2, FiniteSet.interval(0, 12), 4)
    assert report.within_window_bound
    assert report.window_bound == pytest.approx(math.log(2))
    full = report.samples[0]
    assert full['gap'] == pytest.approx(math.log(2))


def test_nest_reuses_members_already_in_their_bracket(even, cover_config):
    h0 = even.entropy_estimate(F9).value
    nest = entropy_target_nest(even, h0 - 0.01, 2, [0.5, 0.25], cover_config, cover_config)
    assert len(nest.entries) == 3
    assert all(e['reused'] for e in nest.entries[1:])
    assert nest.brackets_monotone and not nest.partial


def test_nest_refusals(even, cover_config):
    with pytest.raises(RefusalError):
        entropy_target_nest(even, 5.0, 1, [0.5], cover_config, cover_config)
    with pytest.raises(RefusalError):
        entropy_target_nest(even, 0.1, 3, [0.5], cover_config, cover_config)


# ---------------- higher-block recoding ---------------- #

PHI = (1 + math.sqrt(5)) / 2


def _first_of_pair(golden):
    return BlockCode(golden.alphabet, golden.alphabet, FiniteSet.interval(0, 2),
                     {(a, b): a for a in (0, 1) for b in (0, 1)})


def test_higher_block_recode_of_the_golden_mean(golden):
    Xt, conj, composed = higher_block_recode(golden, _first_of_pair(golden))
    assert Xt.alphabet.symbols == ('00', '01', '10')
    assert entropy_exact_1d(Xt).value == pytest.approx(math.log(PHI), abs=1e-9)
    assert pattern_count(Xt, FiniteSet.interval(0, 6)) == \
        pattern_count(golden, FiniteSet.interval(0, 7))
    for w in itertools.product((0, 1), repeat=7):
        if (1, 1) in zip(w, w[1:]):
            continue
        recoded = Pattern.word(tuple(Xt.alphabet.index(f'{a}{b}') for a, b in zip(w, w[1:])))
        assert occurs_in(Xt, recoded)
        assert apply_block_code(conj, recoded) == Pattern.word(w[:6])
        assert apply_block_code(composed, recoded) == Pattern.word(w[:6])


def test_presentation_from_a_block_code(golden, even):
    P = SoficPresentation.from_block_code(golden, _first_of_pair(golden))
    assert len(P.cover.alphabet) == 3
    assert P.code.is_one_block
    assert P.entropy_exact_1d().value == pytest.approx(math.log(PHI), abs=1e-9)
    assert P.entropy_estimate(F9).count == 89
    assert SoficPresentation.from_block_code(even.cover, even.code) == even


# ---------------- sofic dense family ---------------- #


@pytest.fixture(scope='module')
def chain_config(even_cover):
    return CombingConfig.derive(even_cover.sft, 1.0, 5, 9, max_steps=2)


def test_sofic_dense_family_lands_below_eps(even, even_cover, cover_config, chain_config):
    eps = even.entropy_estimate(F9).value + 0.05
    res = sofic_dense_family(even, None, (0.0, eps), cover_config, chain_config,
                             C=even_cover, half_open=True)
    assert 0.0 <= res.entropy < eps
    assert res.gap_ok
    assert res.presentation.image_alphabet.symbols == ('0', '1')


def test_sofic_dense_family_keeps_the_subsystem(even, even_cover, cover_config, chain_config):
    zero = SftSpec(Alphabet.of('01'), FiniteSet.interval(0, 1), frozenset({(0,)}))
    eps = even.entropy_estimate(F9).value + 0.05
    res = sofic_dense_family(even, zero, (0.0, eps), cover_config, chain_config, C=even_cover)
    images = image_patterns(res.presentation.cover, res.presentation.code, F9)
    assert (0,) * 9 in images
    assert res.gap_ok


def test_sofic_dense_family_reports_a_miss(even, even_cover, cover_config, chain_config):
    with pytest.raises(TargetMissedError) as info:
        sofic_dense_family(even, None, (3.0, 4.0), cover_config, chain_config, C=even_cover)
    assert info.value.nearest


def test_half_open_targets_exclude_their_upper_end(even, even_cover, cover_config, chain_config):
    h = even.entropy_estimate(F9).value
    res = sofic_dense_family(even, None, (0.0, h), cover_config, chain_config, C=even_cover)
    assert res.entropy == pytest.approx(h)
    with pytest.raises(TargetMissedError):
        sofic_dense_family(even, None, (h, h), cover_config, chain_config, C=even_cover,
                           half_open=True)
