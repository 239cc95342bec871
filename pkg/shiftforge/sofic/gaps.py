"""Sampling the entropy gap of a one-block factor map over subsystems.

The maximal gap is a supremum over all subsystems; sampling only bounds it
from below. Each report therefore carries two upper bounds next to the
samples: a window bound that holds exactly for every subsystem on the run
window, and the asymptotic bound from the cover's parameters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from shiftforge.core.group import FiniteSet, origin
from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import BlockCode, SftSpec, as_handle
from shiftforge.core.shifts import (entropy_estimate, entropy_exact_1d, image_entropy_1d,
                                    image_entropy_estimate, pattern_list, product_shift,
                                    projection_codes)
from shiftforge.core.transfer import transfer_graph
from shiftforge.errors import RefusalError
from shiftforge.pool import parallel_map
from shiftforge.sofic.cover import CoverConstruction
from shiftforge.tiling.periodic import tiling_sft

log = logging.getLogger(__name__)

GAP_TOLERANCE = 1e-9


@dataclass
class GapReport:
    samples: list
    max_gap: float
    window_bound: float
    proof_bound: float | None = None
    max_exact_gap: float | None = None
    warnings: list = field(default_factory=list)

    @property
    def within_window_bound(self):
        return self.max_gap <= self.window_bound + GAP_TOLERANCE

    @property
    def within_proof_bound(self):
        if self.proof_bound is None:
            return None
        return self.max_gap <= self.proof_bound + GAP_TOLERANCE

    def to_json(self):
        return {
            'kind': 'gap',
            'samples': self.samples,
            'max_gap': self.max_gap,
            'max_exact_gap': self.max_exact_gap,
            'window_bound': self.window_bound,
            'proof_bound': self.proof_bound,
            'within_window_bound': self.within_window_bound,
            'within_proof_bound': self.within_proof_bound,
            'warnings': list(self.warnings),
        }


# ============================================================================ #
# Subsystems
# ============================================================================ #


def periodic_orbit_sft(X) -> SftSpec | None:
    """The orbit of one periodic point of a d=1 handle, as an SFT (None if X is empty)."""
    X = as_handle(X)
    if X.dim != 1:
        raise RefusalError("periodic orbits are only sampled in one dimension")
    G = transfer_graph(X)
    if G.is_empty:
        return None
    seen = {}
    path = []
    v = 0
    while v not in seen:
        seen[v] = len(path)
        a = min(G.succ[v])
        path.append(a)
        v = G.succ[v][a]
    word = path[seen[v]:]
    p = len(word)
    allowed = frozenset(tuple(word[(i + j) % p] for j in range(p + 1)) for i in range(p))
    return SftSpec(X.alphabet, FiniteSet.interval(0, p + 1), allowed)


def random_subsystem(X, seed: int, forbid=2, side=2, margin=None):
    """X with `forbid` randomly chosen admissible patterns on a small box forbidden."""
    X = as_handle(X)
    rng = np.random.default_rng(seed)
    box = FiniteSet.box(origin(X.dim), (side,) * X.dim)
    candidates = pattern_list(X, box, None if X.dim == 1 else margin)
    if not candidates:
        return X
    k = min(forbid, len(candidates))
    picks = sorted(int(i) for i in rng.choice(len(candidates), size=k, replace=False))
    return X.forbid(*(Pattern(box, candidates[i]) for i in picks))


def _measure(args):
    label, Y, code, F, margin = args
    h = entropy_estimate(Y, F, margin)
    hi = image_entropy_estimate(Y, code, F, margin)
    row = {'label': label, 'entropy': h.value, 'image_entropy': hi.value,
           'gap': h.value - hi.value, 'empty': h.empty}
    if as_handle(Y).dim == 1:
        he = entropy_exact_1d(Y)
        hie = image_entropy_1d(Y, code)
        row['exact_gap'] = he.value - hie.value
    return row


def sample_gaps(X, code: BlockCode, F: FiniteSet, samples: int, seed: int = 0,
                margin=None, extra=(), forbid=2, workers=None) -> list:
    """Gap rows for the full system, a periodic orbit (d=1), extra handles and
    `samples` seeded random subsystems, in that order."""
    X = as_handle(X)
    margin = None if X.dim == 1 else margin
    jobs = [('full', X, code, F, margin)]
    if X.dim == 1:
        orbit = periodic_orbit_sft(X)
        if orbit is not None:
            jobs.append(('periodic-orbit', orbit, code, F, margin))
    for i, Y in enumerate(extra):
        jobs.append((f"extra-{i}", Y, code, F, margin))
    for i in range(samples):
        jobs.append((f"random-{seed + i}", random_subsystem(X, seed + i, forbid, margin=margin),
                     code, F, margin))
    return parallel_map(_measure, jobs, workers)


def _summarize(rows, window_bound, proof_bound=None, warnings=()):
    max_gap = max(r['gap'] for r in rows)
    exact = [r['exact_gap'] for r in rows if 'exact_gap' in r]
    report = GapReport(rows, max_gap, window_bound, proof_bound,
                       max(exact) if exact else None, list(warnings))
    if not report.within_window_bound:
        report.warnings.append(f"sampled gap {max_gap:.6g} exceeds the window bound "
                               f"{window_bound:.6g}")
    return report


# ============================================================================ #
# Cover and product reports
# ============================================================================ #


def cover_window_bound(C: CoverConstruction, F: FiniteSet) -> float:
    """h(F, T) + max over tiling phases of |border sites in F| log|A_X| / |F|.

    Given the tiling layer, a cover pattern is fixed by its image except at
    border-typed sites, which hold one of |A_X| symbols.
    """
    T_patterns = pattern_list(tiling_sft(C.tiling), F)
    worst = 0
    for t in T_patterns:
        worst = max(worst, sum(1 for a in t if a in C.border_offsets))
    n = len(F)
    return math.log(len(T_patterns)) / n + worst * math.log(C.qx) / n


def proof_bound(C: CoverConstruction) -> float:
    """4 delta + delta (1 + delta) log|A_X|."""
    delta = C.config.delta
    return 4 * delta + delta * (1 + delta) * math.log(C.qx)


def estimate_max_gap(C: CoverConstruction, samples: int, F: FiniteSet, seed: int = 0,
                     margin=None, extra=(), workers=None) -> GapReport:
    rows = sample_gaps(C.sft.handle(), C.phi_tilde, F, samples, seed, margin, extra,
                       workers=workers)
    report = _summarize(rows, cover_window_bound(C, F), proof_bound(C))
    log.info("[gap] %d subsystems, max gap %.6f (window bound %.6f, asymptotic %.6f)",
             len(rows), report.max_gap, report.window_bound, report.proof_bound)
    return report


def product_gap_report(X: SftSpec, T: SftSpec, F: FiniteSet, samples: int, seed: int = 0,
                       margin=None, workers=None) -> GapReport:
    """Gap of the projection X x T -> X; no subsystem exceeds h(F, T) on F."""
    Z = product_shift(X, T)
    pi_x, _ = projection_codes(X, T)
    rows = sample_gaps(Z.handle(), pi_x, F, samples, seed, margin, workers=workers)
    bound = entropy_estimate(T, F, None if X.dim == 1 else margin).value
    report = _summarize(rows, bound)
    log.info("[gap] product control: max gap %.6f against h(F, T)=%.6f", report.max_gap, bound)
    return report

