"""Sofic subsystems at target entropies, built upstairs on the small-gap cover."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import BlockCode, SubshiftHandle, as_handle
from shiftforge.core.shifts import (entropy_estimate, image_entropy_1d, image_entropy_estimate,
                                    pattern_list, projection_codes)
from shiftforge.combing.chain import ChainReport, box_tiling, run_chain
from shiftforge.combing.config import CombingConfig
from shiftforge.combing.dense import projection_window, union_step
from shiftforge.errors import RefusalError, TargetMissedError
from shiftforge.sofic.cover import CoverConstruction, build_cover
from shiftforge.sofic.gaps import cover_window_bound
from shiftforge.sofic.presentation import SoficPresentation
from shiftforge.tiling.periodic import tiling_sft

log = logging.getLogger(__name__)


def preimage_handle(C: CoverConstruction, V, margin=None) -> SubshiftHandle:
    """Phi~^-1(V): cover patterns whose image is not allowed in V become forbidden."""
    V = as_handle(V)
    if V.alphabet.symbols != C.phi_tilde.target.symbols:
        raise RefusalError("V is not over the sofic shift's alphabet")
    margin = None if C.sft.dim == 1 else margin
    smap = C.phi_tilde.symbol_map()
    extra = []
    window = V.base.window
    for p in pattern_list(C.sft, window, margin):
        if tuple(smap[a] for a in p) not in V.base.allowed:
            extra.append(Pattern(window, p))
    for q in V.extra_forbidden:
        q = q.normalized()
        for p in pattern_list(C.sft, q.domain, margin):
            if tuple(smap[a] for a in p) == q.labels:
                extra.append(Pattern(q.domain, p))
    log.debug("[preimage] %d forbidden cover patterns", len(extra))
    return SubshiftHandle(C.sft, tuple(extra))


def _compose(first: BlockCode, second: BlockCode) -> BlockCode:
    a, b = first.symbol_map(), second.symbol_map()
    return BlockCode.one_block(first.source, second.target,
                               {i: b[a[i]] for i in range(len(first.source))},
                               first.neighborhood.dim)


@dataclass
class SoficDenseResult:
    presentation: SoficPresentation
    entropy: float
    upstairs_entropy: float
    exact_entropy: float | None
    step: int
    target: tuple
    gap_bound: float
    cover: CoverConstruction = field(repr=False)
    chain: ChainReport = field(repr=False)

    @property
    def gap_ok(self):
        return self.entropy <= self.upstairs_entropy + 1e-12 and \
            self.upstairs_entropy <= self.entropy + self.gap_bound + 1e-12

    def to_json(self):
        return {
            'kind': 'sofic-dense',
            'step': self.step,
            'target': list(self.target),
            'entropy': self.entropy,
            'upstairs_entropy': self.upstairs_entropy,
            'exact_entropy': self.exact_entropy,
            'gap_bound': self.gap_bound,
            'gap_ok': self.gap_ok,
            'cover_window': self.presentation.cover.window.to_json(),
            'cover_allowed': len(self.presentation.cover.allowed),
            'chain_length': self.chain.length,
        }


def sofic_dense_family(W: SoficPresentation, V, target, cover_config: CombingConfig,
                       chain_config: CombingConfig, C: CoverConstruction = None,
                       report: ChainReport = None, start_step=0,
                       half_open=False) -> SoficDenseResult:
    """A sofic U with V inside U inside W and h(F, U) in `target`.

    V = None stands for the empty subsystem. `C` and `report` may be passed in
    to reuse a cover and its chain; candidates start at `start_step`. With
    `half_open` the target excludes its upper end.
    """
    lo, hi = float(target[0]), float(target[1])
    if lo > hi:
        raise RefusalError(f"target interval [{lo}, {hi}] is empty")
    if C is None:
        C = build_cover(W, cover_config)
    X = C.sft
    margin = None if X.dim == 1 else chain_config.margin
    window = projection_window(chain_config)
    F = chain_config.window_set()
    if V is None:
        y_patterns = []
    else:
        y_patterns = pattern_list(preimage_handle(C, V, margin), window, margin)
    if report is None:
        report = run_chain(X, chain_config, decompose=False)
    if report.source != X:
        raise RefusalError("chain report was not run on this cover")
    pi_x, _ = projection_codes(X, tiling_sft(box_tiling(chain_config)))
    pushed = _compose(pi_x, C.phi_tilde)
    bound = cover_window_bound(C, F)
    nearest = []
    for n in range(start_step, len(report.handles)):
        floor = image_entropy_estimate(report.handles[n], pushed, F, margin).value
        if floor > hi:
            nearest.append((floor - hi, n, floor))
            continue
        Z = union_step(report, n, y_patterns, window, pi_x)
        h = image_entropy_estimate(Z, C.phi_tilde, F, margin).value
        nearest.append((min(abs(h - lo), abs(h - hi)), n, h))
        if not (lo <= h < hi if half_open else lo <= h <= hi):
            continue
        up = entropy_estimate(Z, F, margin).value
        exact = image_entropy_1d(Z, C.phi_tilde).value if X.dim == 1 else None
        log.info("[sofic] step %d pushes forward to %.6f (upstairs %.6f)", n, h, up)
        return SoficDenseResult(SoficPresentation(Z, C.phi_tilde), h, up, exact, n, (lo, hi),
                                bound, C, report)
    nearest.sort()
    best = [{'step': n, 'entropy': v} for _, n, v in nearest[:3]]
    raise TargetMissedError(f"no pushed-forward step lands in [{lo}, {hi}]", best)


# ============================================================================ #
# Nest of sofic subsystems bracketing a target entropy
# ============================================================================ #


@dataclass
class NestReport:
    r: float
    schedule: list
    entries: list = field(default_factory=list)
    partial: bool = False
    warnings: list = field(default_factory=list)
    presentations: list = field(default_factory=list, repr=False)

    @property
    def brackets_monotone(self):
        gaps = [e['entropy'] - self.r for e in self.entries]
        return all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))

    def to_json(self):
        return {
            'kind': 'nest',
            'r': self.r,
            'schedule': list(self.schedule),
            'entries': self.entries,
            'partial': self.partial,
            'brackets_monotone': self.brackets_monotone,
            'warnings': list(self.warnings),
        }


def entropy_target_nest(W: SoficPresentation, r: float, budget: int, schedule,
                        cover_config: CombingConfig, chain_config: CombingConfig,
                        C: CoverConstruction = None) -> NestReport:
    """W = W_0 > W_1 > ... > W_budget with r <= h(F, W_n) < r + eps_n on the chain window.

    All steps read one combing chain on one cover, so later members come from
    later chain steps and the nest is descending.
    """
    schedule = [float(e) for e in schedule]
    if budget < 0 or len(schedule) < budget:
        raise RefusalError(f"schedule needs at least {budget} entries")
    F = chain_config.window_set()
    h0 = W.entropy_estimate(F, chain_config.margin).value
    if not 0 <= r <= h0:
        raise RefusalError(f"r={r} lies outside [0, h(F, W)={h0:.6f}]")
    nest = NestReport(r, schedule[:budget])
    nest.entries.append({'index': 0, 'entropy': h0, 'eps': None, 'step': None, 'reused': False})
    nest.presentations.append(W)
    current, h_cur, step = W, h0, 0
    report = None
    for k in range(budget):
        eps = schedule[k]
        if r <= h_cur < r + eps:
            nest.entries.append({'index': k + 1, 'entropy': h_cur, 'eps': eps,
                                 'step': None if step == 0 else step, 'reused': True})
            nest.presentations.append(current)
            continue
        if report is None:
            if C is None:
                C = build_cover(W, cover_config)
            report = run_chain(C.sft, chain_config, decompose=False)
        try:
            res = sofic_dense_family(W, None, (r, r + eps), cover_config, chain_config,
                                     C=C, report=report, start_step=step,
                                     half_open=True)
        except TargetMissedError as exc:
            nest.partial = True
            nest.warnings.append(f"bracket {k + 1} [{r}, {r + eps}) not reached: {exc}")
            log.warning("[nest] stopped after %d members", len(nest.entries))
            break
        current, h_cur, step = res.presentation, res.entropy, res.step
        nest.entries.append({'index': k + 1, 'entropy': h_cur, 'eps': eps, 'step': step,
                             'reused': False})
        nest.presentations.append(current)
    log.info("[nest] %d members for r=%g", len(nest.entries), r)
    return nest

