"""Periodic exact tilings of Z^d, their encodings and window approximations.

A periodic tiling is a lattice plus tiles (shape, center) covering one
fundamental domain. Residues are taken in exact rational lattice coordinates,
so tile_of(g) is a table lookup after reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from shiftforge.core.group import FiniteSet, add, boundary, invariance_defect, origin, sub
from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import SftSpec
from shiftforge.errors import RefusalError, SpecFormatError
from shiftforge.tiling.shapes import ShapeSystem, Tile, encoding_symbols, symbol_index


def _det(B):
    if len(B) == 1:
        return B[0][0]
    return B[0][0] * B[1][1] - B[0][1] * B[1][0]


@dataclass(frozen=True)
class PeriodicTiling:
    system: ShapeSystem
    lattice: tuple
    tiles: tuple
    _residues: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        d = self.system.dim
        if len(self.lattice) != d or any(len(v) != d for v in self.lattice):
            raise RefusalError(f"lattice needs {d} vectors of dimension {d}")
        covol = abs(_det(self.lattice))
        if covol == 0:
            raise RefusalError("lattice vectors are dependent")
        total = sum(len(self.system.shapes[t.shape_index]) for t in self.tiles)
        if total != covol:
            raise RefusalError(f"tiles cover {total} sites but the lattice covolume is {covol}")
        residues = {}
        for t in self.tiles:
            S = self.system.shapes[t.shape_index]
            for s in S.sites:
                g = add(s, t.center)
                u = self.reduce(g)
                if u in residues:
                    raise RefusalError(f"tiles overlap modulo the lattice at {g}")
                residues[u] = (t.shape_index, s, add(t.center, sub(u, g)))
        object.__setattr__(self, '_residues', residues)

    # ---------------- construction ---------------- #

    @classmethod
    def box(cls, L, d=1):
        system = ShapeSystem.box(L, d)
        lattice = tuple(tuple(L if i == j else 0 for j in range(d)) for i in range(d))
        return cls(system, lattice, (Tile(0, origin(d)),))

    @property
    def dim(self):
        return self.system.dim

    @property
    def is_box(self):
        """Single L-box shape on the lattice (L Z)^d."""
        if len(self.system.shapes) != 1 or len(self.tiles) != 1:
            return False
        S = self.system.shapes[0]
        if not S.is_box() or S.sites[0] != origin(self.dim):
            return False
        L = S.diameter() + 1
        return all(self.lattice[i][j] == (L if i == j else 0)
                   for i in range(self.dim) for j in range(self.dim))

    # ---------------- residues ---------------- #

    def reduce(self, g):
        """Fundamental representative of g modulo the lattice."""
        B = self.lattice
        d = self.dim
        if d == 1:
            p = B[0][0]
            return (g[0] % abs(p),)
        # lattice vectors are rows: g = l0 * B[0] + l1 * B[1]
        det = _det(B)
        l0 = Fraction(g[0] * B[1][1] - g[1] * B[1][0], det)
        l1 = Fraction(B[0][0] * g[1] - B[0][1] * g[0], det)
        f0, f1 = math.floor(l0), math.floor(l1)
        return (g[0] - f0 * B[0][0] - f1 * B[1][0], g[1] - f0 * B[0][1] - f1 * B[1][1])

    def tile_of(self, g):
        """(Tile containing g, offset of g in that tile)."""
        if isinstance(g, int):
            g = (g,)
        u = self.reduce(g)
        shape_index, s, cu = self._residues[u]
        return Tile(shape_index, add(cu, sub(g, u))), s

    def period_extents(self):
        """Smallest P_i > 0 with P_i e_i in the lattice."""
        d = self.dim
        out = []
        covol = abs(_det(self.lattice))
        for i in range(d):
            for P in range(1, covol + 1):
                e = tuple(P if j == i else 0 for j in range(d))
                if self.reduce(e) == origin(d):
                    out.append(P)
                    break
        return tuple(out)

    def to_json(self):
        return {'shapes': self.system.to_json()['shapes'],
                'lattice': [list(v) for v in self.lattice],
                'tiles': [t.to_json() for t in self.tiles]}

    @classmethod
    def from_json(cls, data, system=None):
        try:
            if system is None:
                system = ShapeSystem.from_json(data)
            lattice = tuple(tuple(int(c) for c in v) for v in data['lattice'])
            tiles = tuple(Tile(int(t['shape']), tuple(int(c) for c in t['center']))
                          for t in data['tiles'])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecFormatError(f"periodic tiling is malformed: {exc}") from None
        return cls(system, lattice, tiles)


# ============================================================================ #
# Operations
# ============================================================================ #


def encode_tiling(tiling: PeriodicTiling, F: FiniteSet) -> Pattern:
    """t(F): each site labelled with its tile's shape and its offset in that tile."""
    index = symbol_index(tiling.system)
    labels = []
    for g in F.sites:
        tile, s = tiling.tile_of(g)
        labels.append(index[(tile.shape_index, s)])
    return Pattern(F, tuple(labels))


@dataclass(frozen=True)
class TileApproximation:
    outer: tuple
    inner: tuple
    outer_sites: FiniteSet
    inner_sites: FiniteSet


def tile_approximations(tiling: PeriodicTiling, F: FiniteSet) -> TileApproximation:
    """Tiles meeting F (outer) and tiles inside F (inner)."""
    outer = sorted({tiling.tile_of(g)[0] for g in F.sites},
                   key=lambda t: (t.center, t.shape_index))
    members = F.members
    inner = [t for t in outer if all(s in members for s in t.sites(tiling.system).sites)]

    def union(tiles):
        sites = set()
        for t in tiles:
            sites.update(t.sites(tiling.system).sites)
        return FiniteSet(F.dim, tuple(sorted(sites)))

    return TileApproximation(tuple(outer), tuple(inner), union(outer), union(inner))


def frame(tiling: PeriodicTiling, K: FiniteSet, F: FiniteSet) -> FiniteSet:
    """Union of the K-boundaries of the tiles inside F."""
    approx = tile_approximations(tiling, F)
    sites = set()
    for t in approx.inner:
        sites.update(boundary(K, t.sites(tiling.system)).sites)
    return FiniteSet(F.dim, tuple(sorted(sites)))


def tiling_sft(tiling: PeriodicTiling) -> SftSpec:
    """The SFT whose points are exactly the translates of the tiling's encoding.

    Box tilings use the successor rule on {0, e_1, ..., e_d}; other tilings use
    the window [0, P_1] x ... from the lattice extents.
    """
    d = tiling.dim
    alphabet = encoding_symbols(tiling.system)
    if tiling.is_box:
        L = tiling.system.shapes[0].diameter() + 1
        steps = [tuple(1 if i == j else 0 for j in range(d)) for i in range(d)]
        window = FiniteSet.of([origin(d)] + steps, d)
        pos = window.index_of()
        index = symbol_index(tiling.system)
        allowed = set()
        for s in tiling.system.shapes[0].sites:
            labels = [None] * len(window)
            labels[pos[origin(d)]] = index[(0, s)]
            for e in steps:
                nxt = tuple((a + b) % L for a, b in zip(s, e))
                labels[pos[e]] = index[(0, nxt)]
            allowed.add(tuple(labels))
        return SftSpec(alphabet, window, frozenset(allowed))
    extents = tiling.period_extents()
    window = FiniteSet.box(origin(d), tuple(P + 1 for P in extents))
    covol = abs(_det(tiling.lattice))
    shifts = FiniteSet.box(origin(d), extents)
    allowed = set()
    for g in shifts.sites:
        allowed.add(encode_tiling(tiling, window.translate(g)).labels)
    if len(allowed) > covol:
        raise RefusalError("tiling window patterns exceed the covolume")
    return SftSpec(alphabet, window, frozenset(allowed))


# ============================================================================ #
# Approximation bounds for windows
# ============================================================================ #


@dataclass(frozen=True)
class ApproximationBounds:
    size: int
    inner: int
    outer: int
    defect: Fraction
    eps0: Fraction

    def holds(self, eps) -> dict:
        """The three window bounds at tolerance eps (strict where stated)."""
        eps = Fraction(eps)
        n = self.size
        return {
            'gap': self.outer - self.inner < eps * n,
            'inner': (1 - eps) * n < self.inner <= n,
            'outer': n <= self.outer < (1 + eps) * n,
        }

    def to_json(self):
        return {'size': self.size, 'inner': self.inner, 'outer': self.outer,
                'defect': str(self.defect), 'eps0': str(self.eps0)}


def approximation_bounds(tiling: PeriodicTiling, F: FiniteSet) -> ApproximationBounds:
    """Inner/outer sizes of F together with eps0 = defect(UU^-1, F) |U| |UU^-1|;
    every eps > eps0 satisfies the three bounds."""
    U = tiling.system.union()
    UU = U.difference_set()
    defect = invariance_defect(UU, F)
    approx = tile_approximations(tiling, F)
    return ApproximationBounds(len(F), len(approx.inner_sites), len(approx.outer_sites),
                               defect, defect * len(U) * len(UU))
