"""Lifting x* to Z^2 over {0, 1, 1'}.

Columns of the lift are constant under pi: 1' -> 1, and every 1-cell
independently holds 1 or 1'. Arrays are indexed [row, column] with rows
going up the second coordinate.
"""

from __future__ import annotations

import itertools

import numpy as np

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.counterexample.words import WordSystem
from shiftforge.errors import RefusalError

LIFT_ALPHABET = Alphabet(('0', '1', "1'"))
ZERO, ONE, PRIME = 0, 1, 2


def _columns(F: FiniteSet, words: WordSystem):
    if F.dim != 2 or not F.is_box():
        raise RefusalError("lifts are taken on boxes in Z^2")
    (i0, j0), (i1, j1) = F.bounds()
    return words.x_window(i0, i1 + 1), (i0, j0), (i1 - i0 + 1, j1 - j0 + 1)


def lift_window(F: FiniteSet, primes=frozenset(), words: WordSystem = None) -> Pattern:
    """The lift of x* on the box F with 1' exactly on the sites in `primes`."""
    words = words or WordSystem()
    cols, (i0, _), _ = _columns(F, words)
    labels = []
    for (i, j) in F.sites:
        x = int(cols[i - i0])
        if (i, j) in primes:
            if not x:
                raise RefusalError(f"site {(i, j)} is a 0-cell and cannot carry 1'")
            labels.append(PRIME)
        else:
            labels.append(x)
    return Pattern(F, tuple(labels))


def lift_array(cols, height: int, seed=None) -> np.ndarray:
    """Stack `height` copies of the 0/1 row `cols`; with a seed, 1-cells turn 1' at random."""
    cols = np.asarray(cols, dtype=np.uint8)
    z = np.tile(cols, (height, 1))
    if seed is not None:
        rng = np.random.default_rng(seed)
        flip = rng.integers(0, 2, size=z.shape, dtype=np.uint8).astype(bool)
        z[(z == ONE) & flip] = PRIME
    return z


def lift_count(cols, height: int) -> int:
    """Number of lifts of the column pattern on `height` rows: 2^(ones * height)."""
    return 2 ** (int(np.count_nonzero(cols)) * height)


def enumerate_lifts(F: FiniteSet, words: WordSystem = None):
    """Every lift of x* on F, one Pattern per choice of primes."""
    words = words or WordSystem()
    cols, (i0, _), _ = _columns(F, words)
    ones = [s for s in F.sites if cols[s[0] - i0]]
    for chosen in itertools.product((False, True), repeat=len(ones)):
        yield lift_window(F, frozenset(s for s, c in zip(ones, chosen) if c), words)


def project(z: np.ndarray) -> np.ndarray:
    """pi on arrays: 1' -> 1."""
    return np.where(z == PRIME, ONE, z).astype(np.uint8)
