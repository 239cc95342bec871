"""The group Z^d (d in {1, 2}): sites, finite sets and their geometry.

Sites are plain integer tuples; the identity is the zero tuple. Finite sets
keep their sites in lexicographic order so every enumeration built on them is
deterministic. Invariance defects are exact Fractions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from shiftforge.errors import RefusalError

Site = tuple


def origin(dim):
    return (0,) * dim


def add(g, h):
    return tuple(a + b for a, b in zip(g, h))


def sub(g, h):
    return tuple(a - b for a, b in zip(g, h))


def neg(g):
    return tuple(-a for a in g)


@dataclass(frozen=True)
class FiniteSet:
    dim: int
    sites: tuple
    _members: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise RefusalError(f"dimension must be 1 or 2, got {self.dim}")
        for s in self.sites:
            if len(s) != self.dim:
                raise RefusalError(f"site {s} does not have dimension {self.dim}")
        object.__setattr__(self, '_members', frozenset(self.sites))

    # ---------------- construction ---------------- #

    @classmethod
    def of(cls, sites, dim=None):
        sites = [tuple(int(c) for c in s) if not isinstance(s, int) else (int(s),) for s in sites]
        if dim is None:
            if not sites:
                raise RefusalError("cannot infer the dimension of an empty set")
            dim = len(sites[0])
        return cls(dim, tuple(sorted(set(sites))))

    @classmethod
    def empty(cls, dim):
        return cls(dim, ())

    @classmethod
    def box(cls, lo, hi):
        """The box prod [lo_i, hi_i) ; `lo`/`hi` are ints (d=1) or tuples."""
        if isinstance(lo, int):
            lo, hi = (lo,), (hi,)
        ranges = [range(a, b) for a, b in zip(lo, hi)]
        return cls(len(lo), tuple(itertools.product(*ranges)))

    @classmethod
    def interval(cls, a, b):
        return cls.box(a, b)

    # ---------------- container protocol ---------------- #

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, g):
        return g in self._members

    def __bool__(self):
        return bool(self.sites)

    @property
    def members(self):
        return self._members

    # ---------------- set algebra ---------------- #

    def union(self, other):
        _check_dims(self, other)
        return FiniteSet(self.dim, tuple(sorted(self._members | other._members)))

    def intersection(self, other):
        _check_dims(self, other)
        return FiniteSet(self.dim, tuple(s for s in self.sites if s in other._members))

    def difference(self, other):
        _check_dims(self, other)
        return FiniteSet(self.dim, tuple(s for s in self.sites if s not in other._members))

    def symmetric_difference(self, other):
        _check_dims(self, other)
        return FiniteSet(self.dim, tuple(sorted(self._members ^ other._members)))

    def issubset(self, other):
        return self._members <= other._members

    def inverse(self):
        """K^{-1} = {-k}."""
        return FiniteSet.of((neg(k) for k in self.sites), self.dim)

    def difference_set(self):
        """K K^{-1} = {k - k'}; always contains the origin when K is nonempty."""
        return product_set(self, self.inverse())

    def translate(self, g):
        return translate(self, g)

    # ---------------- geometry ---------------- #

    def bounds(self):
        """(lo, hi) with the hull being prod [lo_i, hi_i]."""
        if not self.sites:
            raise RefusalError("empty set has no bounds")
        lo = tuple(min(s[i] for s in self.sites) for i in range(self.dim))
        hi = tuple(max(s[i] for s in self.sites) for i in range(self.dim))
        return lo, hi

    def diameter(self):
        if not self.sites:
            return 0
        lo, hi = self.bounds()
        return max(b - a for a, b in zip(lo, hi))

    def is_box(self):
        if not self.sites:
            return False
        lo, hi = self.bounds()
        size = 1
        for a, b in zip(lo, hi):
            size *= b - a + 1
        return size == len(self.sites)

    def index_of(self):
        """site -> position in canonical order."""
        return {s: i for i, s in enumerate(self.sites)}

    # ---------------- serialization ---------------- #

    def to_json(self):
        return [list(s) for s in self.sites]

    @classmethod
    def from_json(cls, data, dim=None):
        sites = [tuple(int(c) for c in s) if isinstance(s, (list, tuple)) else (int(s),)
                 for s in data]
        return cls.of(sites, dim)


def _check_dims(a, b):
    if a.dim != b.dim:
        raise RefusalError(f"dimension mismatch: {a.dim} vs {b.dim}")


# ============================================================================ #
# Operations
# ============================================================================ #


def translate(K: FiniteSet, g) -> FiniteSet:
    """Kg = {k + g}."""
    if isinstance(g, int):
        g = (g,)
    if len(g) != K.dim:
        raise RefusalError(f"dimension mismatch: set is {K.dim}-dimensional, site is {g}")
    # translation preserves lexicographic order
    return FiniteSet(K.dim, tuple(add(k, g) for k in K.sites))


def product_set(K: FiniteSet, F: FiniteSet) -> FiniteSet:
    """Minkowski sum KF."""
    _check_dims(K, F)
    out = {add(k, f) for k in K.sites for f in F.sites}
    return FiniteSet(K.dim, tuple(sorted(out)))


def interior(K: FiniteSet, F: FiniteSet) -> FiniteSet:
    """{f in F : K + f is inside F}."""
    _check_dims(K, F)
    members = F.members
    return FiniteSet(F.dim, tuple(f for f in F.sites
                                  if all(add(k, f) in members for k in K.sites)))


def boundary(K: FiniteSet, F: FiniteSet) -> FiniteSet:
    """{f in F : K + f escapes F}; F is the disjoint union of this and interior(K, F)."""
    inner = interior(K, F).members
    return FiniteSet(F.dim, tuple(f for f in F.sites if f not in inner))


def invariance_defect(K: FiniteSet, F: FiniteSet) -> Fraction:
    """|KF symmetric-difference F| / |F|, exactly."""
    if not F:
        raise RefusalError("invariance defect of an empty set is undefined")
    KF = product_set(K, F)
    return Fraction(len(KF.symmetric_difference(F)), len(F))


@dataclass(frozen=True)
class FolnerWindow:
    box: FiniteSet
    n: int


def folner_window(n: int, d: int) -> FolnerWindow:
    if n < 1:
        raise RefusalError(f"window size must be positive, got {n}")
    return FolnerWindow(FiniteSet.box((0,) * d, (n,) * d), n)
