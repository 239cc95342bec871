"""Shape systems and the encoding alphabet Sigma(S) = {(S, s) : s in S}.

A point over Sigma(S) encodes an exact tiling when it satisfies the local rule
R1: a site labelled (S0, s0) has center c = g - s0, and every s in S0 must read
(S0, s) at s + c. Centers are exactly the sites labelled (S, origin).
"""

from __future__ import annotations

from dataclasses import dataclass

from shiftforge.core.group import FiniteSet, add, origin, sub
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.errors import RefusalError, SpecFormatError


def _offset_name(s):
    return ','.join(str(c) for c in s)


@dataclass(frozen=True)
class TilingSymbol:
    shape_index: int
    offset: tuple

    @property
    def name(self):
        return f"S{self.shape_index}:{_offset_name(self.offset)}"


@dataclass(frozen=True)
class Tile:
    shape_index: int
    center: tuple

    def sites(self, system):
        return system.shapes[self.shape_index].translate(self.center)

    def to_json(self):
        return {'shape': self.shape_index, 'center': list(self.center)}


@dataclass(frozen=True)
class ShapeSystem:
    shapes: tuple

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise RefusalError(problems[0]['message'])

    def violations(self):
        """Every broken requirement (origin membership, translate-uniqueness)."""
        out = []
        if not self.shapes:
            out.append({'code': 'no-shapes', 'message': "a shape system needs at least one shape"})
            return out
        dims = {S.dim for S in self.shapes}
        if len(dims) > 1:
            out.append({'code': 'dimension-mismatch', 'message': "shapes differ in dimension"})
            return out
        for i, S in enumerate(self.shapes):
            if not S:
                out.append({'code': 'empty-shape', 'message': f"shape {i} is empty"})
            elif origin(S.dim) not in S:
                out.append({'code': 'shape-missing-origin',
                            'message': f"shape {i} does not contain the origin; "
                                       "every shape must contain the identity"})
        seen = {}
        for i, S in enumerate(self.shapes):
            if not S:
                continue
            key = S.translate(tuple(-c for c in S.sites[0]))
            if key in seen:
                out.append({'code': 'shape-translate-duplicate',
                            'message': f"shape {i} is a translate of shape {seen[key]}"})
            else:
                seen[key] = i
        return out

    @classmethod
    def box(cls, L, d=1):
        return cls((FiniteSet.box(origin(d), (L,) * d),))

    @property
    def dim(self):
        return self.shapes[0].dim

    def union(self):
        """U = union of all shapes."""
        U = self.shapes[0]
        for S in self.shapes[1:]:
            U = U.union(S)
        return U

    def to_json(self):
        return {'shapes': [S.to_json() for S in self.shapes]}

    @classmethod
    def from_json(cls, data, check=True):
        try:
            shapes = tuple(FiniteSet.from_json(s) for s in data['shapes'])
        except (KeyError, TypeError) as exc:
            raise SpecFormatError(f"shape system is malformed: {exc}") from None
        if check:
            return cls(shapes)
        obj = object.__new__(cls)
        object.__setattr__(obj, 'shapes', shapes)
        return obj


def encoding_alphabet(system: ShapeSystem) -> list:
    return [TilingSymbol(i, s) for i, S in enumerate(system.shapes) for s in S.sites]


def encoding_symbols(system: ShapeSystem) -> Alphabet:
    return Alphabet(tuple(t.name for t in encoding_alphabet(system)))


def symbol_index(system: ShapeSystem) -> dict:
    return {(t.shape_index, t.offset): i for i, t in enumerate(encoding_alphabet(system))}


def check_rule_R1(t: Pattern, system: ShapeSystem) -> list:
    """All R1 failures inside t's domain; violations are data."""
    symbols = encoding_alphabet(system)
    index = symbol_index(system)
    lookup = t.as_dict()
    out = []
    for g, a in zip(t.domain.sites, t.labels):
        if not 0 <= a < len(symbols):
            out.append({'site': list(g), 'neighbor': list(g), 'expected': None, 'found': a})
            continue
        sym = symbols[a]
        c = sub(g, sym.offset)
        for s in system.shapes[sym.shape_index].sites:
            h = add(s, c)
            if h in lookup and lookup[h] != index[(sym.shape_index, s)]:
                out.append({'site': list(g), 'neighbor': list(h),
                            'expected': index[(sym.shape_index, s)], 'found': lookup[h]})
    return out


def decode_tiling(t: Pattern, system: ShapeSystem) -> list:
    """Tiles (shape, center) meeting t's domain, read off the labels."""
    problems = check_rule_R1(t, system)
    if problems:
        raise RefusalError(f"labelling breaks rule R1 at {len(problems)} place(s), "
                           f"first at {problems[0]['site']}")
    symbols = encoding_alphabet(system)
    tiles = set()
    for g, a in zip(t.domain.sites, t.labels):
        sym = symbols[a]
        tiles.add(Tile(sym.shape_index, sub(g, sym.offset)))
    return sorted(tiles, key=lambda x: (x.center, x.shape_index))


def convert_encoding(t: Pattern, system: ShapeSystem):
    """(S, s) labels -> center labels over {0, S0, S1, ...}: S_i at centers, 0 elsewhere."""
    symbols = encoding_alphabet(system)
    target = Alphabet(('0',) + tuple(f"S{i}" for i in range(len(system.shapes))))
    zero = origin(system.dim)
    labels = tuple(symbols[a].shape_index + 1 if symbols[a].offset == zero else 0
                   for a in t.labels)
    return Pattern(t.domain, labels), target


def centers_to_encoding(c: Pattern, system: ShapeSystem) -> Pattern:
    """Inverse of convert_encoding on the sites whose tile center lies in the domain."""
    index = symbol_index(system)
    found = {}
    for g, a in zip(c.domain.sites, c.labels):
        if a == 0:
            continue
        i = a - 1
        for s in system.shapes[i].sites:
            h = add(g, s)
            if h in c.domain:
                if h in found:
                    raise RefusalError(f"tiles overlap at {h}")
                found[h] = index[(i, s)]
    return Pattern.from_map(found, system.dim) if found else Pattern(FiniteSet.empty(system.dim), ())


# ============================================================================ #
# Torus checks (R1 brute force against exact cover)
# ============================================================================ #


def _torus_sites(n, d):
    return FiniteSet.box(origin(d), (n,) * d).sites


def _mod(g, n):
    return tuple(c % n for c in g)


def torus_r1_labellings(system: ShapeSystem, n: int) -> list:
    """Labellings of (Z/n)^d satisfying R1 everywhere, each as a label tuple in
    canonical site order. Assigning a symbol forces its whole tile."""
    d = system.dim
    sites = _torus_sites(n, d)
    pos = {g: i for i, g in enumerate(sites)}
    symbols = encoding_alphabet(system)
    index = symbol_index(system)
    labels = [None] * len(sites)
    out = []

    def place(g, a):
        sym = symbols[a]
        c = sub(g, sym.offset)
        writes = {}
        for s in system.shapes[sym.shape_index].sites:
            h = pos[_mod(add(s, c), n)]
            want = index[(sym.shape_index, s)]
            if writes.get(h, want) != want:
                return None
            if labels[h] is not None and labels[h] != want:
                return None
            writes[h] = want
        return [h for h in writes if labels[h] is None], writes

    def dfs(p):
        while p < len(sites) and labels[p] is not None:
            p += 1
        if p == len(sites):
            out.append(tuple(labels))
            return
        for a in range(len(symbols)):
            res = place(sites[p], a)
            if res is None:
                continue
            fresh, writes = res
            for h in fresh:
                labels[h] = writes[h]
            dfs(p + 1)
            for h in fresh:
                labels[h] = None

    dfs(0)
    return sorted(out)


def torus_tilings(system: ShapeSystem, n: int) -> list:
    """Exact covers of (Z/n)^d by tile placements, returned as their encodings."""
    d = system.dim
    sites = _torus_sites(n, d)
    pos = {g: i for i, g in enumerate(sites)}
    index = symbol_index(system)
    # every placement covering each cell: (cells, labels written)
    covering = [[] for _ in sites]
    for i, S in enumerate(system.shapes):
        for c in sites:
            cells = [pos[_mod(add(s, c), n)] for s in S.sites]
            if len(set(cells)) != len(cells):
                continue
            placement = tuple(zip(cells, (index[(i, s)] for s in S.sites)))
            for cell in cells:
                covering[cell].append(placement)
    labels = [None] * len(sites)
    out = set()

    def dfs():
        try:
            p = labels.index(None)
        except ValueError:
            out.add(tuple(labels))
            return
        for placement in covering[p]:
            if all(labels[cell] is None for cell, _ in placement):
                for cell, a in placement:
                    labels[cell] = a
                dfs()
                for cell, _ in placement:
                    labels[cell] = None

    dfs()
    return sorted(out)
