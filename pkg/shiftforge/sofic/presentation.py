"""Sofic shifts presented as one-block images of SFTs."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Alphabet
from shiftforge.core.sft import (BlockCode, SftSpec, code_from_json, code_to_json, sft_from_json,
                                 sft_to_json)
from shiftforge.core.shifts import higher_block_recode, image_entropy_1d, image_entropy_estimate
from shiftforge.errors import RefusalError, SpecFormatError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SoficPresentation:
    cover: SftSpec
    code: BlockCode

    def __post_init__(self):
        if not self.code.is_one_block:
            raise RefusalError("presentation codes must be one-block; recode with from_block_code")
        if self.code.source.symbols != self.cover.alphabet.symbols:
            raise RefusalError("code source alphabet differs from the cover alphabet")

    @property
    def dim(self):
        return self.cover.dim

    @property
    def image_alphabet(self) -> Alphabet:
        return self.code.target

    @classmethod
    def from_block_code(cls, cover: SftSpec, code: BlockCode):
        """Recode a block code with a larger neighborhood into a one-block presentation."""
        if code.is_one_block:
            return cls(cover, code)
        recoded, _, composed = higher_block_recode(cover, code)
        log.info("[sofic] recoded a %d-site code onto %d higher-block symbols",
                 len(code.neighborhood), len(recoded.alphabet))
        return cls(recoded, composed)

    @classmethod
    def even_shift(cls):
        """The even shift: 1s separated by an even number of 0s, as a 3-state cover."""
        A = Alphabet.of('efg')
        window = FiniteSet.interval(0, 2)
        edges = ['ee', 'ef', 'fg', 'ge', 'gf']
        allowed = frozenset((A.index(a), A.index(b)) for a, b in edges)
        code = BlockCode.one_block(A, Alphabet.of('01'), {'e': '1', 'f': '0', 'g': '0'})
        return cls(SftSpec(A, window, allowed), code)

    def entropy_estimate(self, F, margin=None):
        return image_entropy_estimate(self.cover, self.code, F, margin)

    def entropy_exact_1d(self):
        return image_entropy_1d(self.cover, self.code)

    def to_json(self):
        return {'cover': sft_to_json(self.cover), 'code': code_to_json(self.code)}

    @classmethod
    def from_json(cls, data, diagnostics=None):
        try:
            cover = sft_from_json(data['cover'], diagnostics)
            code = code_from_json(data['code'], cover.alphabet, dim=cover.dim)
        except KeyError as exc:
            raise SpecFormatError(f"sofic presentation is missing {exc}") from None
        return cls.from_block_code(cover, code)


def presentation_violations(data) -> list:
    """Validation findings for a presentation document (no exceptions)."""
    out = []
    code = data.get('code', {}) if isinstance(data, dict) else {}
    if 'map' not in code:
        out.append({'level': 'warning', 'code': 'code-not-one-block',
                    'message': "code is not one-block; it will be recoded on higher blocks"})
    try:
        SoficPresentation.from_json(data)
    except RefusalError as exc:
        out.append({'level': 'error', 'code': 'presentation-invalid', 'message': str(exc)})
    return out
