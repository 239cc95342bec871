"""Counting-bound diagnostic for one chain step.

For each tiling-layer restriction t on F, the frame is the union of the
borders of the tiles inside F. Summing over frame labellings f of Z_0 that
carry t, the product over inner tiles of the interior counts of f's borders
in Z_n bounds |P(F, Z_n)| from below; multiplying each phase term by
|A|^{|F minus F_t|} (sites outside the inner tiles) bounds it from above.
"""

from __future__ import annotations

import logging
import math

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import SubshiftHandle, as_handle
from shiftforge.core.shifts import pattern_count, pattern_list
from shiftforge.core.transfer import transfer_graph
from shiftforge.combing.chain import (TileGeometry, _margin, aligned_blocks, box_tiling,
                                      group_by_border)
from shiftforge.combing.config import CombingConfig
from shiftforge.errors import CapExceededError
from shiftforge.tiling.periodic import tiling_sft
from shiftforge.tiling.shapes import decode_tiling, encoding_alphabet
from shiftforge.utils import log_count

log = logging.getLogger(__name__)


def _inner_tiles(t: Pattern, system, F: FiniteSet):
    members = F.members
    return [tile for tile in decode_tiling(t, system)
            if all(s in members for s in tile.sites(system).sites)]


def _tile_borders(tiles, geometry: TileGeometry):
    """Per inner tile, its border sites in canonical order."""
    return [geometry.border.translate(tile.center).sites for tile in tiles]


def _frame_sum_scan(Z0, t, borders, geometry, weight):
    """d=1: one weighted pass over Z_0's transfer graph."""
    qt = geometry.qt
    lookup = t.as_dict()
    allowed_at, collect, flush = {}, {}, {}

    def x_of(a):
        return a // qt

    def weight_of(part):
        return weight.get(part, 0)

    for sites in borders:
        for s in sites:
            allowed_at[s[0]] = tuple(a * qt + lookup[s] for a in range(geometry.q))
            collect[s[0]] = x_of
        flush[sites[-1][0]] = weight_of
    return transfer_graph(Z0).weighted_count(allowed_at, collect, flush)


def _frame_sum_enumerate(Z0, t, borders, geometry, weight, margin, cap):
    """Enumerate frame labellings and multiply interior counts tile by tile."""
    if not borders:
        return 1
    qt = geometry.qt
    lookup = t.as_dict()
    frame = FiniteSet.of([s for sites in borders for s in sites], t.domain.dim)
    allowed_at = {s: tuple(a * qt + lookup[s] for a in range(geometry.q)) for s in frame.sites}
    pos = frame.index_of()
    index = [[pos[s] for s in sites] for sites in borders]
    total = 0
    for f in pattern_list(Z0, frame, margin, cap, allowed_at=allowed_at):
        prod = 1
        for idx in index:
            prod *= weight.get(tuple(f[i] // qt for i in idx), 0)
            if not prod:
                break
        total += prod
    return total


def count_decomposition(Z: SubshiftHandle, F: FiniteSet, config: CombingConfig, K: FiniteSet,
                        step=None, enumerate_frames=False, cap=None) -> dict:
    """Both sides of the lower and upper counting bounds for |P(F, Z)|.

    Declines (returns a record with 'declined') when a cap is hit.
    """
    Z = as_handle(Z)
    Z0 = SubshiftHandle(Z.base)
    geometry = TileGeometry.of(Z, K, config.L)
    margin = _margin(Z, config)
    tiling = box_tiling(config)
    system = tiling.system
    symbols = encoding_alphabet(system)
    q = geometry.q
    record = {'step': step, 'window': len(F), 'exact': Z.dim == 1}
    try:
        total = pattern_count(Z, F, margin)
        weight = {k: len(v) for k, v in
                  group_by_border(aligned_blocks(Z, geometry, margin), geometry).items()}
        phases = []
        for labels in pattern_list(tiling_sft(tiling), F, margin, cap):
            t = Pattern(F, labels)
            tiles = _inner_tiles(t, system, F)
            borders = _tile_borders(tiles, geometry)
            if Z.dim == 1 and not enumerate_frames:
                lower = _frame_sum_scan(Z0, t, borders, geometry, weight)
            else:
                lower = _frame_sum_enumerate(Z0, t, borders, geometry, weight, margin, cap)
            covered = len(tiles) * len(geometry.shape)
            outside = len(F) - covered
            phases.append({
                'phase': list(symbols[labels[0]].offset),
                'inner_tiles': len(tiles),
                'outside': outside,
                'lower': lower,
                'upper': q ** outside * lower,
            })
    except CapExceededError as exc:
        log.warning("[decomp] step %s declined: %s", step, exc)
        record['declined'] = str(exc)
        return record

    lower = sum(p['lower'] for p in phases)
    upper = sum(p['upper'] for p in phases)
    # delta|F| form; the combing argument only guarantees it under the window condition
    delta_form = log_count(total) <= config.delta * len(F) * math.log(q) + log_count(lower) + 1e-9
    record.update({
        'count': str(total),
        'lower': str(lower),
        'upper': str(upper),
        'lower_holds': lower <= total,
        'upper_holds': total <= upper,
        'holds': lower <= total <= upper,
        'delta_form': delta_form,
        'phases': [{**p, 'lower': str(p['lower']), 'upper': str(p['upper'])} for p in phases],
    })
    log.info("[decomp] step %s: %s <= %s <= %s (%s)", step, lower, total, upper,
             'ok' if record['holds'] else 'VIOLATED')
    return record
