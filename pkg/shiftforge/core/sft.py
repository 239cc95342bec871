"""SFT specifications, subshift handles, block codes and their JSON forms.

An SFT is given by a window K (containing the origin) and the allowed set
P(K, X), stored as label tuples in K's canonical site order. A handle adds an
ordered list of extra forbidden patterns on top of a base SFT; the combing
chain Z_n is exactly such a handle.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from shiftforge.core.group import FiniteSet, origin
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.errors import RefusalError, SpecFormatError
from shiftforge.utils import log_count

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SftSpec:
    alphabet: Alphabet
    window: FiniteSet
    allowed: frozenset
    _last_index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if origin(self.window.dim) not in self.window:
            raise RefusalError("SFT window must contain the origin")
        n = len(self.window)
        q = len(self.alphabet)
        for p in self.allowed:
            if len(p) != n or any(a < 0 or a >= q for a in p):
                raise RefusalError(f"allowed pattern {p} does not fit the window/alphabet")

    @property
    def dim(self):
        return self.window.dim

    @classmethod
    def full(cls, alphabet, dim=1):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet.of(alphabet)
        return cls(alphabet, FiniteSet.box(origin(dim), (1,) * dim),
                   frozenset((a,) for a in range(len(alphabet))))

    @classmethod
    def empty(cls, alphabet, dim=1):
        """The empty SFT: nothing is allowed on the one-site window."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet.of(alphabet)
        return cls(alphabet, FiniteSet.box(origin(dim), (1,) * dim), frozenset())

    @classmethod
    def from_forbidden(cls, alphabet, window, forbidden):
        """Allowed = A^K minus the forbidden label tuples."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet.of(alphabet)
        forbidden = {tuple(p) for p in forbidden}
        allowed = frozenset(p for p in itertools.product(range(len(alphabet)), repeat=len(window))
                            if p not in forbidden)
        return cls(alphabet, window, allowed)

    def last_index(self):
        """prefix labels (all sites but the last) -> allowed labels of the last site."""
        if self._last_index is None:
            index = {}
            for p in self.allowed:
                index.setdefault(p[:-1], set()).add(p[-1])
            object.__setattr__(self, '_last_index',
                               {k: tuple(sorted(v)) for k, v in index.items()})
        return self._last_index

    def handle(self):
        return SubshiftHandle(self, ())


@dataclass(frozen=True)
class SubshiftHandle:
    base: SftSpec
    extra_forbidden: tuple = ()

    def __post_init__(self):
        for p in self.extra_forbidden:
            if p.domain.dim != self.base.dim:
                raise RefusalError("forbidden pattern dimension differs from the base SFT")

    @property
    def dim(self):
        return self.base.dim

    @property
    def alphabet(self):
        return self.base.alphabet

    def forbid(self, *patterns):
        return SubshiftHandle(self.base, self.extra_forbidden + tuple(patterns))

    def head(self, budget):
        return SubshiftHandle(self.base, self.extra_forbidden[:budget])

    def forbidden_index(self):
        """normalized shape -> set of forbidden label tuples on that shape."""
        out = {}
        for p in self.extra_forbidden:
            q = p.normalized()
            out.setdefault(q.domain, set()).add(q.labels)
        return out


def as_handle(X):
    if isinstance(X, SubshiftHandle):
        return X
    if isinstance(X, SftSpec):
        return X.handle()
    raise RefusalError(f"expected an SFT or a subshift handle, got {type(X).__name__}")


@dataclass(frozen=True)
class BlockCode:
    """A sliding block code; `rule` maps neighborhood label tuples to target indices."""
    source: Alphabet
    target: Alphabet
    neighborhood: FiniteSet
    rule: dict = field(compare=False, hash=False)

    def __post_init__(self):
        for key, b in self.rule.items():
            if len(key) != len(self.neighborhood) or not 0 <= b < len(self.target):
                raise RefusalError(f"code rule entry {key} -> {b} does not fit")

    @property
    def is_one_block(self):
        return len(self.neighborhood) == 1 and origin(self.neighborhood.dim) in self.neighborhood

    @classmethod
    def one_block(cls, source, target, mapping, dim=1):
        """`mapping` is symbol -> symbol (or index -> index)."""
        rule = {}
        for a, b in mapping.items():
            ai = source.index(a) if isinstance(a, str) else int(a)
            bi = target.index(b) if isinstance(b, str) else int(b)
            rule[(ai,)] = bi
        missing = [source.symbols[i] for i in range(len(source)) if (i,) not in rule]
        if missing:
            raise RefusalError(f"one-block code leaves symbols unmapped: {missing}")
        return cls(source, target, FiniteSet.box(origin(dim), (1,) * dim), rule)

    @classmethod
    def identity(cls, alphabet, dim=1):
        return cls.one_block(alphabet, alphabet, {i: i for i in range(len(alphabet))}, dim)

    def symbol_map(self):
        if not self.is_one_block:
            raise RefusalError("symbol map requested for a code with a larger neighborhood")
        return tuple(self.rule[(a,)] for a in range(len(self.source)))


@dataclass(frozen=True)
class CountResult:
    count: int
    mode: str

    @property
    def log_count(self):
        return log_count(self.count)

    @property
    def empty(self):
        return self.count == 0

    def to_json(self):
        return {'count': str(self.count), 'log_count': self.log_count, 'mode': self.mode}


# ============================================================================ #
# JSON ingestion
# ============================================================================ #


def _sites(raw, dim):
    return [tuple(s) if isinstance(s, (list, tuple)) else (s,) for s in raw]


def sft_from_json(data, diagnostics=None) -> SftSpec:
    """Parse {dim, alphabet, window, allowed|forbidden}. Windows that miss the
    origin are translated so their least site becomes the origin."""
    notes = diagnostics if diagnostics is not None else []
    try:
        dim = int(data.get('dim', 1))
        alphabet = Alphabet.of(data['alphabet'])
        raw_window = _sites(data['window'], dim)
    except (KeyError, TypeError) as exc:
        raise SpecFormatError(f"SFT spec is missing or mistypes a field: {exc}") from None
    window_order = list(raw_window)
    window = FiniteSet.of(raw_window, dim)
    if len(window) != len(window_order):
        raise SpecFormatError("SFT window lists a site twice")
    perm = [window_order.index(s) for s in window.sites]
    shift = None
    if origin(dim) not in window:
        shift = tuple(-c for c in window.sites[0])
        notes.append({'level': 'warning', 'code': 'window-translated',
                      'message': f"window does not contain the origin; translated by {shift}"})
        window = window.translate(shift)

    def reorder(raw):
        if len(raw) != len(perm):
            raise SpecFormatError(f"pattern {raw} does not match the window size {len(perm)}")
        return tuple(int(raw[i]) for i in perm)

    if 'allowed' in data:
        seen = set()
        for raw in data['allowed']:
            p = reorder(raw)
            if p in seen:
                notes.append({'level': 'warning', 'code': 'duplicate-allowed-pattern',
                              'message': f"allowed pattern {list(raw)} listed more than once"})
            seen.add(p)
        spec = SftSpec(alphabet, window, frozenset(seen))
    elif 'forbidden' in data:
        spec = SftSpec.from_forbidden(alphabet, window, [reorder(raw) for raw in data['forbidden']])
    else:
        raise SpecFormatError("SFT spec needs an 'allowed' or 'forbidden' list")
    for note in notes:
        log.debug("[ingest] %s", note['message'])
    return spec


def sft_to_json(X: SftSpec):
    return {
        'dim': X.dim,
        'alphabet': list(X.alphabet.symbols),
        'window': X.window.to_json(),
        'allowed': [list(p) for p in sorted(X.allowed)],
    }


def handle_from_json(data, diagnostics=None) -> SubshiftHandle:
    base = sft_from_json(data, diagnostics)
    extra = []
    for entry in data.get('extra_forbidden', []):
        extra.append(Pattern.from_json(entry, base.dim))
    return SubshiftHandle(base, tuple(extra))


def code_from_json(data, source: Alphabet, target: Alphabet = None, dim=1) -> BlockCode:
    """Either {map: {symbol: symbol}} for a one-block code or
    {neighborhood: [...], rule: [[symbol, ..., image], ...]} for a block code."""
    if target is None and 'target' in data:
        target = Alphabet.of(data['target'])
    mapping = data.get('map')
    if isinstance(mapping, dict):
        if target is None:
            target = Alphabet.of(sorted(set(mapping.values())))
        return BlockCode.one_block(source, target, mapping, dim)
    if 'neighborhood' not in data or 'rule' not in data:
        raise SpecFormatError("code needs a 'map' object or a 'neighborhood' with a 'rule' list")
    neighborhood = FiniteSet.of(_sites(data['neighborhood'], dim), dim)
    entries = [(tuple(row[:-1]), row[-1]) for row in data['rule']]
    if target is None:
        target = Alphabet.of(sorted({b for _, b in entries}))
    rule = {}
    for key, b in entries:
        if len(key) != len(neighborhood):
            raise SpecFormatError(f"code rule {list(key)} does not match the neighborhood size")
        rule[tuple(source.index(a) for a in key)] = target.index(b)
    return BlockCode(source, target, neighborhood, rule)


def code_to_json(code: BlockCode):
    if code.is_one_block:
        return {'map': {code.source.symbols[a]: code.target.symbols[b]
                        for (a,), b in sorted(code.rule.items())}}
    return {'neighborhood': code.neighborhood.to_json(),
            'target': list(code.target.symbols),
            'rule': [[code.source.symbols[a] for a in key] + [code.target.symbols[b]]
                     for key, b in sorted(code.rule.items())]}
