"""Periodizing a lifted window to refute a nontrivial SFT subsystem.

Given a window z over {0, 1, 1'} holding a column of 1/1' cells with n zero
columns on each side, a vertical n-word repeating in that column bounds a
rectangle r. Tiling the plane by r gives z' whose k x k blocks all occur in
z, while every row of z' has period 2n+1 and so never shows 0^{3n} 1 0^{3n}.
An SFT on [0,k)^2 containing z would contain z', whose rows miss an
isolated one that x* shows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from shiftforge.counterexample.lift import LIFT_ALPHABET, PRIME, ZERO, lift_array
from shiftforge.counterexample.words import WordSystem
from shiftforge.errors import RefusalError

log = logging.getLogger(__name__)


@dataclass
class Refutation:
    n: int
    k: int
    column: int
    rows: tuple
    repeated_word: tuple
    period: tuple
    blocks_checked: int
    blocks_ok: bool
    row_period_ok: bool
    forbidden_word_absent: bool
    window: dict

    @property
    def refuted(self):
        return self.blocks_ok and self.row_period_ok and self.forbidden_word_absent

    def to_json(self):
        return {
            'kind': 'refutation',
            'n': self.n,
            'k': self.k,
            'column': self.column,
            'rows': list(self.rows),
            'repeated_word': list(self.repeated_word),
            'rectangle': {'columns': [self.column - self.n, self.column + self.n],
                          'rows': [self.rows[0], self.rows[1] - 1]},
            'period': list(self.period),
            'blocks_checked': self.blocks_checked,
            'blocks_ok': self.blocks_ok,
            'row_period_ok': self.row_period_ok,
            'forbidden_word_absent': self.forbidden_word_absent,
            'refuted': self.refuted,
            'window': self.window,
        }


def _isolated_column(z, n):
    """First column that is all 1/1' with n all-zero columns on each side."""
    full = (z != ZERO).all(axis=0)
    empty = (z == ZERO).all(axis=0)
    width = z.shape[1]
    for c in np.flatnonzero(full):
        c = int(c)
        if c - n < 0 or c + n >= width:
            continue
        if empty[c - n:c].all() and empty[c + 1:c + n + 1].all():
            return c
    return None


def _repeat(column, n):
    """(l1, l2) with l2 - l1 > n and equal vertical n-words, l2 least."""
    bits = (column == PRIME).astype(np.int64)
    span = len(bits) - n + 1
    if span <= 0:
        return None
    codes = np.zeros(span, dtype=np.int64)
    for j in range(n):
        codes = (codes << 1) | bits[j:j + span]
    first = {}
    for ell, code in enumerate(codes.tolist()):
        if code in first and ell - first[code] > n:
            return first[code], ell
        first.setdefault(code, ell)
    return None


def _block_codes(a, k):
    """Base-3 codes of every k x k block of `a`."""
    rows, cols = a.shape[0] - k + 1, a.shape[1] - k + 1
    if rows <= 0 or cols <= 0:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros((rows, cols), dtype=np.int64)
    for di in range(k):
        for dj in range(k):
            codes = codes * 3 + a[di:di + rows, dj:dj + cols]
    return np.unique(codes)


def _contains(row_bits, word_bits):
    n = len(word_bits)
    view = np.lib.stride_tricks.sliding_window_view(row_bits, n)
    return bool((view == word_bits).all(axis=1).any())


def periodize_and_refute(z: np.ndarray, n: int, k: int, origin=(0, 0)) -> Refutation:
    """Run the periodization on the window `z` (rows x columns) for SFT window size k.

    `origin` gives the Z^2 coordinates (column, row) of z[0, 0] for reporting.
    """
    if k < 1:
        raise RefusalError("SFT window size k must be positive")
    if n <= k:
        raise RefusalError(f"n must exceed k (got n={n}, k={k})")
    if 3 ** (k * k) >= 2 ** 62:
        raise RefusalError(f"k={k} blocks do not fit a 64-bit block code")
    z = np.asarray(z, dtype=np.int64)
    if z.ndim != 2 or z.min(initial=0) < 0 or z.max(initial=0) >= len(LIFT_ALPHABET):
        raise RefusalError("window must be a 2-d array over {0, 1, 1'}")
    c = _isolated_column(z, n)
    if c is None:
        raise RefusalError(f"no column of 1/1' cells with {n} zero columns on each side")
    found = _repeat(z[:, c], n)
    if found is None:
        raise RefusalError(f"no vertical {n}-word repeats more than {n} rows apart in "
                           f"{z.shape[0]} rows")
    l1, l2 = found
    if l2 + n > z.shape[0]:
        raise RefusalError("window too short to read the rows above the repeat")
    r = z[l1:l2, c - n:c + n + 1]
    width, height = 2 * n + 1, l2 - l1

    # one period plus k - 1 cells of overlap covers every block of z'
    zp = np.tile(r, (2 + (k - 1) // height, 2 + (k - 1) // width))
    zp = zp[:height + k - 1, :width + k - 1]
    mine = _block_codes(zp, k)
    ok = bool(np.isin(mine, _block_codes(z, k)).all())

    # seams of z': rows past the vertical seam read as z does past l2, and the
    # columns straddling the horizontal seam are zero
    seam = np.tile(r, (2, 2))
    period_ok = bool(np.array_equal(seam[height:height + n, :width], z[l2:l2 + n, c - n:c + n + 1])
                     and (seam[:height, width - n:width + n] == ZERO).all())
    forbidden = np.concatenate([np.zeros(3 * n, np.int64), [1], np.zeros(3 * n, np.int64)])
    reps = -(-(len(forbidden) + width) // width) + 1
    absent = not any(_contains(np.tile((row != ZERO).astype(np.int64), reps), forbidden)
                     for row in r)

    ci, cj = origin
    word = tuple(LIFT_ALPHABET.symbols[int(a)] for a in z[l1:l1 + n, c])
    out = Refutation(n, k, ci + c, (cj + l1, cj + l2), word, (width, height), int(len(mine)),
                     ok, period_ok, absent,
                     {'origin': list(origin), 'columns': int(z.shape[1]), 'rows': int(z.shape[0])})
    log.info("[refute] n=%d k=%d column %d rows [%d, %d): %s", n, k, out.column, out.rows[0],
             out.rows[1], 'refuted' if out.refuted else 'NOT refuted')
    return out


def lifted_window(n: int, height: int, seed=None, half_width=None, words: WordSystem = None):
    """A window of the lifted x* around the occurrence of 0^n 1 0^n nearest the origin.

    Returns (z, origin). Without a seed every 1-cell holds 1.
    """
    words = words or WordSystem()
    if height < 1:
        raise RefusalError("height must be positive")
    center = words.check_P3_window(n, words.L(n + 1))['center']
    half = 3 * n if half_width is None else half_width
    if half < n:
        raise RefusalError("half width must cover the n zero columns on each side")
    cols = words.x_window(center - half, center + half + 1)
    return lift_array(cols, height, seed), (center - half, 0)
