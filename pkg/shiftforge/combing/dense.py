"""Projecting a combing chain to the X layer and picking SFTs at target entropies."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from shiftforge import params
from shiftforge.core.group import FiniteSet, origin
from shiftforge.core.sft import SftSpec, as_handle
from shiftforge.core.shifts import (entropy_estimate, entropy_exact_1d, forbid_missing,
                                    image_entropy_estimate, image_patterns, pattern_list,
                                    projection_codes, sft_outer_approximation, union_count)
from shiftforge.combing.chain import ChainReport, _margin, box_tiling, run_chain
from shiftforge.combing.config import CombingConfig
from shiftforge.errors import RefusalError, TargetMissedError
from shiftforge.tiling.periodic import tiling_sft

log = logging.getLogger(__name__)


def projection_window(config: CombingConfig) -> FiniteSet:
    """Largest box of side at most 2L whose site count stays under the window cap."""
    d = config.dim
    side = 2 * config.L
    while side > 1 and side ** d > params.WINDOW_CAP:
        side -= 1
    return FiniteSet.box(origin(d), (side,) * d)


@dataclass
class Projection:
    step: int
    sft: SftSpec
    entropy_z: float
    entropy_x: float
    gap: float
    gap_ok: bool
    exact_entropy: float | None = None

    def to_json(self):
        return {'step': self.step, 'entropy_z': self.entropy_z, 'entropy_x': self.entropy_x,
                'gap': self.gap, 'gap_ok': self.gap_ok, 'exact_entropy': self.exact_entropy,
                'window': self.sft.window.to_json(), 'allowed': len(self.sft.allowed)}


def project_step(report: ChainReport, n: int, W: FiniteSet = None) -> Projection:
    config = report.config
    X = report.source
    Z = report.handles[n]
    W = projection_window(config) if W is None else W
    F = config.window_set()
    margin = _margin(Z, config)
    pi_x, _ = projection_codes(X, tiling_sft(box_tiling(config)))
    images = image_patterns(Z, pi_x, W, margin)
    Y = _outer(X, images, W)
    hz = report.steps[n].entropy
    hx = image_entropy_estimate(Z, pi_x, F, margin).value
    gap = hz - hx
    exact = entropy_exact_1d(Y).value if X.dim == 1 else None
    return Projection(n, Y, hz, hx, gap, gap <= report.tiling_entropy + 1e-12, exact)


def _outer(X, images, W):
    handle = forbid_missing(X, images, W)
    return sft_outer_approximation(handle, len(handle.extra_forbidden))


def union_step(report: ChainReport, n: int, y_patterns, W: FiniteSet, pi_x) -> SftSpec:
    """Outer SFT on W of Y union the X-layer projection of Z_n."""
    Z = report.handles[n]
    images = image_patterns(Z, pi_x, W, _margin(Z, report.config))
    return _outer(report.source, sorted(set(y_patterns) | set(images)), W)


def project_chain(report: ChainReport, W: FiniteSet = None, steps=None) -> list:
    """Outer SFTs Y_n of the X-layer projections, with paired window entropies."""
    if report.source is None or not report.handles:
        raise RefusalError("chain report carries no subshift handles to project")
    steps = range(len(report.handles)) if steps is None else steps
    out = []
    for n in steps:
        p = project_step(report, n, W)
        log.debug("[project] step %d: h(F,Z)=%.6f h(F,pi Z)=%.6f", n, p.entropy_z, p.entropy_x)
        out.append(p)
    return out


# ============================================================================ #
# Relative dense family
# ============================================================================ #


@dataclass
class DenseFamilyResult:
    sft: SftSpec
    entropy: float
    exact_entropy: float | None
    step: int
    target: tuple
    projected_entropy: float
    union: dict
    chain: ChainReport = field(repr=False)

    def to_json(self):
        return {
            'kind': 'dense',
            'step': self.step,
            'target': list(self.target),
            'entropy': self.entropy,
            'exact_entropy': self.exact_entropy,
            'projected_entropy': self.projected_entropy,
            'union': self.union,
            'window': self.sft.window.to_json(),
            'allowed': len(self.sft.allowed),
            'chain_length': self.chain.length,
        }


def contained_at_window(Y, X, W: FiniteSet, margin=None) -> bool:
    return set(pattern_list(Y, W, margin)).issubset(pattern_list(X, W, margin))


def relative_dense_family(X: SftSpec, Y, target, config: CombingConfig,
                          report: ChainReport = None) -> DenseFamilyResult:
    """An SFT between Y and X whose window entropy lies in `target` = (lo, hi).

    Steps are tried in chain order; the first whose union SFT itself lands wins.
    """
    Y = as_handle(Y)
    lo, hi = float(target[0]), float(target[1])
    if lo > hi:
        raise RefusalError(f"target interval [{lo}, {hi}] is empty")
    W = projection_window(config)
    F = config.window_set()
    margin = None if X.dim == 1 else config.margin
    if not contained_at_window(Y, X, W, margin):
        raise RefusalError("Y is not contained in X at window level")
    if report is None:
        report = run_chain(X, config, decompose=False)
    pi_x, _ = projection_codes(X, tiling_sft(box_tiling(config)))
    y_patterns = pattern_list(Y, W, margin)
    nearest = []
    for n in range(len(report.handles)):
        union_sft = union_step(report, n, y_patterns, W, pi_x)
        h = entropy_estimate(union_sft, F, margin)
        nearest.append((abs(h.value - (lo + hi) / 2), n, h.value))
        if not lo <= h.value <= hi:
            continue
        Z = report.handles[n]
        hx = image_entropy_estimate(Z, pi_x, F, _margin(Z, config)).value
        projected = union_step(report, n, (), W, pi_x)
        # d=2 checks the rule on W
        check = union_count(Y, projected, F if X.dim == 1 else W, margin)
        exact = entropy_exact_1d(union_sft).value if X.dim == 1 else None
        log.info("[dense] step %d lands at %.6f (target [%g, %g])", n, h.value, lo, hi)
        return DenseFamilyResult(union_sft, h.value, exact, n, (lo, hi), hx, check, report)
    nearest.sort()
    best = [{'step': n, 'entropy': v} for _, n, v in nearest[:3]]
    raise TargetMissedError(f"no chain step lands in [{lo}, {hi}]; nearest: "
                            + ', '.join(f"{b['entropy']:.6f}@{b['step']}" for b in best), best)
