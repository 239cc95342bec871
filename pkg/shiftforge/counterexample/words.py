"""The recursive words w^n, their limit w-infinity and the symmetric point x*.

    w^1 = 010,   w^{n+1} = (w^n)^{T_n} 0^n 1 0^n,   x*_i = w-infinity_{|i|}

Level tables (T_n, L_n, ones_n) are exact Python integers. Words up to
MATERIALIZE_LEVEL come back as read-only uint8 arrays; deeper positions are
read with `omega_at`, which descends the levels without building anything.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from shiftforge import params
from shiftforge.errors import CapExceededError, RefusalError
from shiftforge.utils import frac_json

log = logging.getLogger(__name__)


def _readonly(a):
    a.flags.writeable = False
    return a


def _render(bits):
    return ''.join('1' if b else '0' for b in bits)


@dataclass(frozen=True)
class WordSystem:
    delta: Fraction = params.WORD_DELTA
    max_level: int = params.MATERIALIZE_LEVEL

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise RefusalError(f"delta must lie in (0, 1), got {self.delta}")
        if self.max_level < 1:
            raise RefusalError("materialization level must be at least 1")

    # ---------------- level tables ---------------- #

    @staticmethod
    def _level(n):
        if n < 1:
            raise RefusalError(f"levels start at 1, got {n}")

    def T(self, n) -> int:
        self._level(n)
        reps = Fraction(2 * n * 2 ** n) / Fraction(self.delta)
        if reps.denominator != 1:
            raise RefusalError(f"2n 2^n / delta is not an integer at level {n}")
        return int(reps) + 1

    @functools.lru_cache(maxsize=None)
    def L(self, n) -> int:
        self._level(n)
        if n == 1:
            return 3
        return self.T(n - 1) * self.L(n - 1) + 2 * (n - 1) + 1

    @functools.lru_cache(maxsize=None)
    def ones(self, n) -> int:
        self._level(n)
        if n == 1:
            return 1
        return self.T(n - 1) * self.ones(n - 1) + 1

    def frequency(self, n) -> Fraction:
        return Fraction(self.ones(n), self.L(n))

    def level_covering(self, i) -> int:
        """Smallest level n with L_n > i."""
        n = 1
        while self.L(n) <= i:
            n += 1
        return n

    # ---------------- words ---------------- #

    @functools.lru_cache(maxsize=None)
    def word(self, n) -> np.ndarray:
        self._level(n)
        if n > self.max_level:
            raise CapExceededError(f"w^{n} (length {self.L(n)})", f"level {self.max_level}")
        if n == 1:
            return _readonly(np.array([0, 1, 0], dtype=np.uint8))
        w = np.concatenate([np.tile(self.word(n - 1), self.T(n - 1)), self.suffix(n - 1)])
        log.debug("[words] materialized w^%d (%d cells)", n, len(w))
        return _readonly(w)

    @staticmethod
    def suffix(n) -> np.ndarray:
        """0^n 1 0^n."""
        s = np.zeros(2 * n + 1, dtype=np.uint8)
        s[n] = 1
        return s

    def prefix(self, length) -> np.ndarray:
        """w-infinity[0, length) as a uint8 array."""
        if length < 0:
            raise RefusalError("prefix length must be nonnegative")
        if length > params.PREFIX_CAP:
            raise CapExceededError(f"prefix of length {length}", params.PREFIX_CAP)
        if length == 0:
            return np.zeros(0, dtype=np.uint8)
        m = self.level_covering(length - 1)
        if m <= self.max_level:
            return self.word(m)[:length]
        base = self.word(m - 1)
        reps = min(self.T(m - 1), -(-length // len(base)))
        body = np.tile(base, reps)
        if len(body) < length:
            body = np.concatenate([body, self.suffix(m - 1)])
        return body[:length]

    def omega_at(self, i) -> int:
        if i < 0:
            raise RefusalError("w-infinity is indexed by nonnegative integers")
        n = self.level_covering(i)
        while n > 1:
            body = self.T(n - 1) * self.L(n - 1)
            if i < body:
                i %= self.L(n - 1)
            else:
                return int(i - body == n - 1)
            n -= 1
        return (0, 1, 0)[i]

    def x_star(self, i) -> int:
        return self.omega_at(abs(i))

    def x_window(self, lo, hi) -> np.ndarray:
        """x*[lo, hi) as a uint8 array."""
        if hi <= lo:
            return np.zeros(0, dtype=np.uint8)
        reach = max(abs(lo), abs(hi - 1)) + 1
        return self.prefix(reach)[np.abs(np.arange(lo, hi))]

    # ---------------- isolated ones ---------------- #

    def check_P3_window(self, n, radius) -> dict:
        """Locate 0^n 1 0^n inside x*[-radius, radius], closest to the origin.

        Ties between an occurrence and its mirror go to the nonnegative side.
        """
        if n < 1:
            raise RefusalError("n must be positive")
        need = self.L(n + 1)
        if radius < need:
            raise RefusalError(f"radius {radius} is below L_{n + 1} = {need}")
        half = np.flatnonzero(self.prefix(radius + 1)).astype(np.int64)
        ones = np.concatenate([-half[::-1], half])
        gaps = np.diff(ones)
        left = np.concatenate([[radius + 1], gaps])
        right = np.concatenate([gaps, [radius + 1]])
        ok = (left > n) & (right > n) & (ones - n >= -radius) & (ones + n <= radius)
        hits = ones[ok]
        if len(hits) == 0:
            raise AssertionError(f"0^{n}10^{n} missing from x*[-{radius}, {radius}]")
        center = int(min(hits.tolist(), key=lambda j: (abs(j), j < 0)))
        log.info("[words] 0^%d10^%d centred at %d (radius %d)", n, n, center, radius)
        return {'n': n, 'radius': radius, 'center': center, 'start': center - n,
                'occurrences': int(len(hits)),
                'word': _render(self.x_window(center - n, center + n + 1))}

    # ---------------- language ---------------- #

    def subwords(self, N) -> list:
        """The length-N language of the orbit closure of x*, as '0'/'1' strings."""
        if N < 1:
            raise RefusalError("subword length must be positive")
        if N > params.SUBWORD_CAP:
            raise CapExceededError(f"subwords of length {N}", params.SUBWORD_CAP)
        w = self.word(N)
        zeros = np.zeros(N, dtype=np.uint8)
        head, tail = w[:N - 1], w[len(w) - (N - 1):]
        pieces = [
            w,
            np.concatenate([tail, head]),
            np.concatenate([tail, zeros]),
            self.suffix(N),
            np.concatenate([zeros, head]),
            self.x_window(-(N - 1), N),
        ]
        found = set()
        for piece in pieces:
            found |= _factors(piece, N)
            found |= _factors(piece[::-1], N)
        return sorted(found)

    # ---------------- block decomposition ---------------- #

    def block_spans(self, n, level) -> BlockSpans:
        """w^level cut into copies of w^n and separators 0^m 1 0^m (m >= n)."""
        if not 1 <= n < level:
            raise RefusalError(f"need 1 <= n < level, got n={n}, level={level}")
        count = 1
        for m in range(n, level):
            count = count * self.T(m) + 1
        if count > params.SPAN_CAP:
            raise CapExceededError(f"block decomposition of w^{level} into w^{n}", params.SPAN_CAP)
        starts = np.array([0], dtype=np.int64)
        kinds = np.array([0], dtype=np.int64)
        for m in range(n, level):
            size = self.L(m)
            reps = np.arange(self.T(m), dtype=np.int64) * size
            starts = np.concatenate([(reps[:, None] + starts[None, :]).ravel(),
                                     [self.T(m) * size]])
            kinds = np.concatenate([np.tile(kinds, self.T(m)), [m]])
        return BlockSpans(n, level, starts, kinds, self.L(level))

    # ---------------- density ---------------- #

    def density_report(self, radius) -> dict:
        """Ones density of x*[-radius, radius] and the lift-count bound on [-radius, radius]^2."""
        if radius < 0:
            raise RefusalError("radius must be nonnegative")
        p = self.prefix(radius + 1)
        ones = 2 * int(p[1:].sum()) + int(p[0])
        side = 2 * radius + 1
        density = Fraction(ones, side)
        return {
            'radius': radius,
            'ones': ones,
            'density': frac_json(density),
            'lift_log2_count': side * ones,
            'lift_bits_per_site': frac_json(density),
            'above_tenth': density >= Fraction(1, 10),
        }

    def frequency_table(self, levels) -> list:
        rows = []
        for n in range(1, levels + 1):
            f = self.frequency(n)
            row = {'level': n, 'T': self.T(n), 'L': self.L(n), 'ones': self.ones(n),
                   'frequency': frac_json(f), 'above_bound': f > Fraction(1, 3) - self.delta}
            if n < levels:
                drop = f - self.frequency(n + 1)
                row['drop'] = frac_json(drop)
                row['drop_ok'] = drop <= Fraction(2 * n, self.T(n)) and \
                    drop < self.delta / 2 ** n
            rows.append(row)
        return rows

    def witness_densities(self, levels) -> list:
        """Density at the witness radii L_n - 1 that fit under the prefix cap."""
        out = []
        for n in range(1, levels + 1):
            if self.L(n) > params.PREFIX_CAP:
                break
            out.append({'level': n, **self.density_report(self.L(n) - 1)})
        return out


def _factors(bits, N) -> set:
    if len(bits) < N:
        return set()
    span = len(bits) - N + 1
    codes = np.zeros(span, dtype=np.int64)
    for j in range(N):
        codes = (codes << 1) | bits[j:j + span]
    codes = np.unique(codes)
    return {format(int(c), f'0{N}b') for c in codes}


@dataclass
class BlockSpans:
    """Block starts in w^level; kind 0 is a copy of w^n, kind m a separator 0^m 1 0^m."""
    n: int
    level: int
    starts: np.ndarray
    kinds: np.ndarray
    length: int

    def __len__(self):
        return len(self.starts)

    def block_of(self, positions) -> np.ndarray:
        return np.searchsorted(self.starts, positions, side='right') - 1

    def min_cross_distance(self, word) -> int | None:
        """Least index distance between 1s lying in distinct blocks."""
        ones = np.flatnonzero(word[:self.length])
        blocks = self.block_of(ones)
        cross = np.diff(blocks) != 0
        if not cross.any():
            return None
        return int(np.diff(ones)[cross].min())

    def to_json(self):
        return {'n': self.n, 'level': self.level, 'blocks': len(self),
                'separators': int((self.kinds > 0).sum())}
