"""Small-gap SFT cover of a sofic shift.

The cover lives over (A_X + A_W) x Sigma where Sigma is the L-box tiling
alphabet. Its rules, read at the origin of the window S + K + K_T:

* the tiling layer follows the box tiling, and a K-window made only of A_X
  symbols is allowed in X;
* where a tile starts, the tile carries some b in P(S, X) with b's symbols on
  the border of S and their images under Phi on the interior.

Border sites therefore always hold A_X symbols and interior sites A_W
symbols. Phi~ maps A_X through Phi and fixes A_W.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

from shiftforge import params
from shiftforge.core.group import FiniteSet, boundary, origin
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.core.sft import BlockCode, SftSpec
from shiftforge.core.shifts import image_patterns, pattern_list, product_shift
from shiftforge.combing.config import CombingConfig
from shiftforge.errors import CapExceededError, RefusalError
from shiftforge.sofic.presentation import SoficPresentation
from shiftforge.tiling.periodic import PeriodicTiling, tiling_sft
from shiftforge.tiling.shapes import decode_tiling

log = logging.getLogger(__name__)


def merged_alphabet(A_X: Alphabet, A_W: Alphabet):
    """(A_X + A_W, renamed); A_X symbols get an 'x.' prefix while the two clash."""
    names = list(A_X.symbols)
    renamed = False
    taken = set(A_W.symbols)
    while taken.intersection(names):
        names = ['x.' + s for s in names]
        renamed = True
    return Alphabet(tuple(names) + A_W.symbols), renamed


@dataclass(frozen=True)
class CoverConstruction:
    presentation: SoficPresentation
    config: CombingConfig
    tiling: PeriodicTiling
    merged: Alphabet
    renamed: bool
    sft: SftSpec
    phi_tilde: BlockCode
    phi_t: BlockCode
    product: SftSpec
    border_offsets: frozenset

    @property
    def qx(self):
        return len(self.presentation.cover.alphabet)

    @property
    def qt(self):
        return len(self.tiling.system.shapes[0])

    def is_border_symbol(self, c):
        return c // self.qt < self.qx

    def as_presentation(self) -> SoficPresentation:
        return SoficPresentation(self.sft, self.phi_tilde)

    def to_json(self):
        return {
            'kind': 'cover',
            'L': self.config.L,
            'delta': self.config.delta,
            'merged_alphabet': list(self.merged.symbols),
            'renamed': self.renamed,
            'window': self.sft.window.to_json(),
            'allowed': len(self.sft.allowed),
            'alphabet_size': len(self.sft.alphabet),
            'tiling_sft': 'periodic box orbit',
        }


def _r2_labels(X: SftSpec, S: FiniteSet, border_idx, smap, qx):
    """Merged-alphabet labellings of S allowed where a tile starts."""
    out = set()
    for b in pattern_list(X, S):
        out.add(tuple(a if i in border_idx else qx + smap[a] for i, a in enumerate(b)))
    return sorted(out)


def build_cover(W: SoficPresentation, config: CombingConfig) -> CoverConstruction:
    X = W.cover
    d = X.dim
    if config.dim != d:
        raise RefusalError("configuration and presentation dimensions differ")
    K = X.window
    if K.diameter() >= config.L:
        raise RefusalError(f"cover window does not fit the box of side {config.L}")
    tiling = PeriodicTiling.box(config.L, d)
    T = tiling_sft(tiling)
    S = tiling.system.shapes[0]
    border = boundary(K.difference_set(), S)
    spos = S.index_of()
    border_idx = frozenset(spos[s] for s in border.sites)
    qx, qw, qt = len(X.alphabet), len(W.code.target), len(T.alphabet)
    smap = W.code.symbol_map()
    merged, renamed = merged_alphabet(X.alphabet, W.code.target)
    if renamed:
        log.info("[cover] A_X and A_W share symbols; A_X renamed with an 'x.' prefix")

    window = S.union(K).union(T.window)
    wpos = window.index_of()
    at_origin = wpos[origin(d)]
    kidx = [wpos[k] for k in K.sites]
    sidx = [wpos[s] for s in S.sites]
    rest = [j for j in range(len(window)) if j not in set(sidx)]
    xs = tuple(range(qx))
    ws = tuple(range(qx, qx + qw))
    r2 = _r2_labels(X, S, border_idx, smap, qx)

    allowed = set()
    for tl in pattern_list(T, window):
        choices = [xs if tl[j] in border_idx else ws for j in range(len(window))]
        r1_applies = all(tl[j] in border_idx for j in kidx)
        if tl[at_origin] == 0:
            heads = r2
            free = rest
        else:
            heads = [()]
            free = list(range(len(window)))
        size = len(heads) * math.prod(len(choices[j]) for j in free)
        if len(allowed) + size > params.ALLOWED_CAP:
            raise CapExceededError("cover allowed set", params.ALLOWED_CAP)
        for head in heads:
            m = [None] * len(window)
            for j, a in zip(sidx, head):
                m[j] = a
            for tail in itertools.product(*(choices[j] for j in free)):
                for j, a in zip(free, tail):
                    m[j] = a
                if r1_applies and tuple(m[j] for j in kidx) not in X.allowed:
                    continue
                allowed.add(tuple(a * qt + t for a, t in zip(m, tl)))

    pair = merged.product(T.alphabet)
    sft = SftSpec(pair, window, frozenset(allowed))
    tilde = {}
    for c in range(len(pair)):
        m = c // qt
        tilde[c] = smap[m] if m < qx else m - qx
    phi_tilde = BlockCode.one_block(pair, W.code.target, tilde, d)
    product = product_shift(X, T)
    psi = {}
    for c in range(len(product.alphabet)):
        x, t = divmod(c, qt)
        psi[c] = (x if t in border_idx else qx + smap[x]) * qt + t
    phi_t = BlockCode.one_block(product.alphabet, pair, psi, d)
    log.info("[cover] L=%d window=%d allowed=%d", config.L, len(window), len(allowed))
    return CoverConstruction(W, config, tiling, merged, renamed, sft, phi_tilde, phi_t, product,
                             border_idx)


# ============================================================================ #
# Window-level checks
# ============================================================================ #


def _margin(C, margin):
    return None if C.sft.dim == 1 else margin


def cover_matches_relabelling(C: CoverConstruction, F: FiniteSet, margin=None) -> bool:
    """The local-rule cover agrees on F with the relabelled product X x T."""
    margin = _margin(C, margin)
    relabelled = image_patterns(C.product, C.phi_t, F, margin)
    return relabelled == pattern_list(C.sft, F, margin)


def cover_surjective_on(C: CoverConstruction, F: FiniteSet, margin=None) -> bool:
    """Phi~ maps P(F, cover) onto P(F, W)."""
    margin = _margin(C, margin)
    W = C.presentation
    return image_patterns(C.sft, C.phi_tilde, F, margin) == image_patterns(W.cover, W.code, F, margin)


def typing_violations(C: CoverConstruction, F: FiniteSet, margin=None, cap=None) -> list:
    """Sites in full tiles of F whose symbol type disagrees with their place in the tile."""
    margin = _margin(C, margin)
    system = C.tiling.system
    qt = C.qt
    out = []
    for labels in pattern_list(C.sft, F, margin, cap):
        p = Pattern(F, labels)
        tiling_layer = Pattern(F, tuple(c % qt for c in labels))
        lookup = p.as_dict()
        for tile in decode_tiling(tiling_layer, system):
            sites = tile.sites(system)
            if not sites.issubset(F):
                continue
            for i, s in enumerate(sites.sites):
                if (i in C.border_offsets) != C.is_border_symbol(lookup[s]):
                    out.append({'pattern': list(labels), 'site': list(s)})
    return out
