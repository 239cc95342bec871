"""Alphabets and patterns (finite labellings p : F -> A)."""

from __future__ import annotations

from dataclasses import dataclass, field

from shiftforge.core.group import FiniteSet
from shiftforge.errors import RefusalError


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple
    _index: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.symbols:
            raise RefusalError("alphabet must be nonempty")
        index = {}
        for i, s in enumerate(self.symbols):
            if not isinstance(s, str) or not s.isprintable() or not s:
                raise RefusalError(f"symbol {s!r} is not a printable token")
            if s in index:
                raise RefusalError(f"duplicate symbol {s!r}")
            index[s] = i
        object.__setattr__(self, '_index', index)

    @classmethod
    def of(cls, symbols):
        return cls(tuple(str(s) for s in symbols))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def index(self, symbol):
        try:
            return self._index[symbol]
        except KeyError:
            raise RefusalError(f"symbol {symbol!r} is not in the alphabet") from None

    def product(self, other, sep='|'):
        """Pair alphabet; the pair (a, b) has index a * |other| + b."""
        return Alphabet(tuple(f"{a}{sep}{b}" for a in self.symbols for b in other.symbols))


@dataclass(frozen=True)
class Pattern:
    """Labels are alphabet indices listed in the domain's canonical site order."""
    domain: FiniteSet
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != len(self.domain):
            raise RefusalError(
                f"pattern has {len(self.labels)} labels for {len(self.domain)} sites")

    @classmethod
    def from_map(cls, mapping, dim=None):
        domain = FiniteSet.of(mapping.keys(), dim)
        return cls(domain, tuple(mapping[s] for s in domain.sites))

    @classmethod
    def word(cls, labels, start=0):
        """A d=1 pattern on [start, start + len(labels))."""
        return cls(FiniteSet.interval(start, start + len(labels)), tuple(labels))

    def as_dict(self):
        return dict(zip(self.domain.sites, self.labels))

    def at(self, g):
        if isinstance(g, int):
            g = (g,)
        for s, a in zip(self.domain.sites, self.labels):
            if s == g:
                return a
        raise RefusalError(f"site {g} is outside the pattern's domain")

    def restrict(self, sub_domain: FiniteSet):
        lookup = self.as_dict()
        missing = [s for s in sub_domain.sites if s not in lookup]
        if missing:
            raise RefusalError(f"restriction domain leaves the pattern at {missing[0]}")
        return Pattern(sub_domain, tuple(lookup[s] for s in sub_domain.sites))

    def translate(self, g):
        return Pattern(self.domain.translate(g), self.labels)

    def normalized(self):
        """Translate so the lexicographically least site sits at the origin."""
        if not self.domain:
            return self
        return self.translate(tuple(-c for c in self.domain.sites[0]))

    def render(self, alphabet, sep=''):
        return sep.join(alphabet.symbols[a] for a in self.labels)

    def to_json(self):
        return {'shape': self.domain.to_json(), 'pattern': list(self.labels)}

    @classmethod
    def from_json(cls, data, dim=None):
        shape = [tuple(s) if isinstance(s, (list, tuple)) else (s,) for s in data['shape']]
        labels = [int(a) for a in data['pattern']]
        if len(shape) != len(labels):
            raise RefusalError("pattern and shape lengths differ")
        return cls.from_map(dict(zip(shape, labels)), dim)
