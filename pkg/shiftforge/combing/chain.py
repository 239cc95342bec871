"""The entropy-combing chain Z_0 > Z_1 > ... > Z_N over Z_0 = X x Sigma_0.

Sigma_0 is the orbit of the periodic L-box tiling. A block on the box S is
aligned when its tiling layer reads (S, s) at every s; its border is the
restriction to the KK^-1-boundary of S and its interiors are the admissible
aligned blocks with the same border. Each step forbids the canonically least
aligned block that shares its border with another one, until every border has
a single interior.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from shiftforge.core.group import FiniteSet, boundary, origin
from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import SftSpec, SubshiftHandle, as_handle
from shiftforge.core.shifts import entropy_estimate, pattern_list, product_shift, tier
from shiftforge.core.local import default_margin
from shiftforge.combing.config import CombingConfig
from shiftforge.errors import RefusalError
from shiftforge.tiling.periodic import PeriodicTiling, tiling_sft

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlignedBlock:
    shape: FiniteSet
    x_layer: tuple

    def pattern(self, qt):
        """The block as a pattern over the pair alphabet of Z_0."""
        return Pattern(self.shape, tuple(a * qt + i for i, a in enumerate(self.x_layer)))

    def border(self, border_positions):
        return tuple(self.x_layer[i] for i in border_positions)

    def render(self, alphabet):
        names = [alphabet.symbols[a] for a in self.x_layer]
        return ''.join(names) if all(len(n) == 1 for n in names) else ','.join(names)

    def to_json(self):
        return {'shape': self.shape.to_json(), 'x_layer': list(self.x_layer)}


# ============================================================================ #
# Z_0 and the geometry of one tile
# ============================================================================ #


def box_tiling(config: CombingConfig) -> PeriodicTiling:
    return PeriodicTiling.box(config.L, config.dim)


def build_Z0(X: SftSpec, config: CombingConfig) -> SubshiftHandle:
    """X x Sigma_0 with no extra forbidden patterns."""
    if X.dim != config.dim:
        raise RefusalError("configuration and SFT dimensions differ")
    if X.window.diameter() >= config.L:
        raise RefusalError(f"SFT window does not fit the box of side {config.L}")
    T = tiling_sft(box_tiling(config))
    return product_shift(X, T).handle()


@dataclass(frozen=True)
class TileGeometry:
    """The box S, its border positions (canonical indices) and pair-alphabet sizes."""
    shape: FiniteSet
    border: FiniteSet
    border_positions: tuple
    qt: int
    q: int

    @classmethod
    def of(cls, Z: SubshiftHandle, K: FiniteSet, L: int):
        d = Z.dim
        S = FiniteSet.box(origin(d), (L,) * d)
        border = boundary(K.difference_set(), S)
        pos = S.index_of()
        qt = L ** d
        if len(Z.alphabet) % qt:
            raise RefusalError("handle alphabet is not a product with the L-box tiling alphabet")
        return cls(S, border, tuple(pos[s] for s in border.sites), qt, len(Z.alphabet) // qt)

    def aligned_at(self, offset=None):
        """site -> pair symbols whose tiling layer is (S, s), for the tile placed at `offset`."""
        out = {}
        for i, s in enumerate(self.shape.sites):
            g = s if offset is None else tuple(a + b for a, b in zip(s, offset))
            out[g] = tuple(a * self.qt + i for a in range(self.q))
        return out


def _margin(Z, config):
    if Z.dim == 1:
        return None
    return default_margin(Z) if config.margin is None else config.margin


# ============================================================================ #
# Aligned blocks and interiors
# ============================================================================ #


def aligned_blocks(Z: SubshiftHandle, geometry: TileGeometry, margin=None, cap=None) -> list:
    """All aligned blocks admissible in Z, in canonical x-layer order."""
    Z = as_handle(Z)
    if Z.dim == 1:
        margin = None
    labels = pattern_list(Z, geometry.shape, margin, cap, allowed_at=geometry.aligned_at())
    return [AlignedBlock(geometry.shape, tuple(a // geometry.qt for a in p)) for p in labels]


def group_by_border(blocks, geometry: TileGeometry) -> dict:
    """border x-tuple -> sorted x-layers of the blocks with that border."""
    groups = {}
    for b in blocks:
        groups.setdefault(b.border(geometry.border_positions), []).append(b.x_layer)
    return {k: sorted(v) for k, v in groups.items()}


def interiors(Z: SubshiftHandle, b: AlignedBlock, geometry: TileGeometry, margin=None) -> list:
    """Admissible aligned blocks sharing b's border; contains b whenever b is admissible."""
    key = b.border(geometry.border_positions)
    return [c for c in aligned_blocks(Z, geometry, margin)
            if c.border(geometry.border_positions) == key]


def comb_step(Z: SubshiftHandle, geometry: TileGeometry, margin=None, blocks=None):
    """(beta, Z minus beta) for the least multi-interior aligned block, or None if terminal."""
    if blocks is None:
        blocks = aligned_blocks(Z, geometry, margin)
    groups = group_by_border(blocks, geometry)
    for b in blocks:
        if len(groups[b.border(geometry.border_positions)]) >= 2:
            return b, Z.forbid(b.pattern(geometry.qt))
    return None


# ============================================================================ #
# Chain report
# ============================================================================ #


FIELDNAMES = [
    'step',
    'census',
    'entropy',
    'forbidden',
    'drop',
    'u1',
    'interiors_ok',
]


@dataclass
class StepRecord:
    step: int
    census: int
    entropy: float
    empty: bool
    forbidden: str | None = None
    drop: float | None = None
    u1: bool | None = None
    u1_tight: bool | None = None
    entropy_monotone: bool | None = None
    census_decrease: bool | None = None
    interior_ratio: bool | None = None
    loss_of_one: bool | None = None

    def to_json(self):
        return dict(self.__dict__)

    def csv_row(self):
        return {
            'step': self.step,
            'census': self.census,
            'entropy': f"{self.entropy:.12g}",
            'forbidden': self.forbidden or '',
            'drop': '' if self.drop is None else f"{self.drop:.12g}",
            'u1': '' if self.u1 is None else self.u1,
            'interiors_ok': '' if self.loss_of_one is None else (self.loss_of_one and self.interior_ratio),
        }


@dataclass
class ChainReport:
    config: CombingConfig
    mode: str
    window_size: int
    tiling_entropy: float
    steps: list = field(default_factory=list)
    terminal: bool = False
    truncated: bool = False
    u2: bool | None = None
    u2_tight: bool | None = None
    decompositions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    handles: list = field(default_factory=list, repr=False)
    forbidden_blocks: list = field(default_factory=list, repr=False)
    source: SftSpec | None = field(default=None, repr=False)

    @property
    def length(self):
        return len(self.steps) - 1

    @property
    def terminal_entropy(self):
        return self.steps[-1].entropy

    def checks(self):
        """Every recorded boolean check; None entries were not applicable."""
        out = {
            'census_strictly_decreasing': all(s.census_decrease for s in self.steps[1:]),
            'entropy_non_increasing': all(s.entropy_monotone for s in self.steps[1:]),
            'u1': all(s.u1 for s in self.steps[1:]),
            'interior_ratio': all(s.interior_ratio for s in self.steps[1:]),
            'loss_of_one_block': all(s.loss_of_one for s in self.steps[1:]),
            'u2': self.u2,
            'window_condition': self.tiling_entropy < self.config.delta,
            'decomposition': all(d.get('holds', True) for d in self.decompositions),
        }
        return out

    def to_json(self):
        return {
            'kind': 'chain',
            'config': self.config.to_json(),
            'mode': self.mode,
            'window': self.window_size,
            'tiling_entropy': self.tiling_entropy,
            'length': self.length,
            'terminal': self.terminal,
            'truncated': self.truncated,
            'terminal_entropy': self.terminal_entropy,
            'u2': self.u2,
            'u2_tight': self.u2_tight,
            'checks': self.checks(),
            'steps': [s.to_json() for s in self.steps],
            'decompositions': self.decompositions,
            'warnings': list(self.warnings),
        }


def _interior_checks(before: dict, after: dict, beta):
    """Loss-of-one-block and the ratio-at-most-two bound between consecutive steps."""
    loss_ok = True
    ratio_ok = True
    for border, old in before.items():
        new = after.get(border, [])
        expected = [b for b in old if b != beta]
        if new != expected:
            loss_ok = False
        if new and len(old) > 2 * len(new):
            ratio_ok = False
        if not new:
            ratio_ok = False
    return loss_ok, ratio_ok


def run_chain(X: SftSpec, config: CombingConfig, decompose=True) -> ChainReport:
    """Comb Z_0 down to a terminal subshift (or max_steps), checking every step."""
    from shiftforge.combing.decomposition import count_decomposition

    Z = build_Z0(X, config)
    geometry = TileGeometry.of(Z, X.window, config.L)
    margin = _margin(Z, config)
    F = config.window_set()
    T = tiling_sft(box_tiling(config))
    h_tiling = entropy_estimate(T, F, margin).value
    report = ChainReport(config=config, mode=tier(config.dim, margin), window_size=len(F),
                         tiling_entropy=h_tiling, warnings=list(config.warnings), source=X)
    if h_tiling >= config.delta:
        report.warnings.append(f"window condition not met: h(F, Sigma_0)={h_tiling:.6g} "
                               f">= delta={config.delta:.6g}")

    q = config.alphabet_size
    u1_eps = config.eps
    u1_tight = config.u1_bound()
    blocks = aligned_blocks(Z, geometry, margin)
    groups = group_by_border(blocks, geometry)
    h = entropy_estimate(Z, F, margin)
    report.steps.append(StepRecord(step=0, census=len(blocks), entropy=h.value, empty=h.empty))
    report.handles.append(Z)
    log.info("[comb] Z_0 census %d, h(F)=%.6f, delta=%.6g", len(blocks), h.value, config.delta)

    n = 0
    while True:
        if n >= config.max_steps:
            report.truncated = True
            report.warnings.append(f"max_steps={config.max_steps} reached before termination")
            log.warning("[comb] truncated at step %d", n)
            break
        step = comb_step(Z, geometry, margin, blocks)
        if step is None:
            report.terminal = True
            break
        beta, Z = step
        n += 1
        prev = report.steps[-1]
        new_blocks = aligned_blocks(Z, geometry, margin)
        new_groups = group_by_border(new_blocks, geometry)
        h = entropy_estimate(Z, F, margin)
        loss_ok, ratio_ok = _interior_checks(groups, new_groups, beta.x_layer)
        drop = prev.entropy - h.value
        rendered = beta.render(X.alphabet)
        report.steps.append(StepRecord(
            step=n, census=len(new_blocks), entropy=h.value, empty=h.empty,
            forbidden=rendered, drop=drop,
            u1=drop < u1_eps, u1_tight=drop < u1_tight,
            entropy_monotone=h.value <= prev.entropy + 1e-12,
            census_decrease=len(new_blocks) < prev.census,
            interior_ratio=ratio_ok, loss_of_one=loss_ok))
        report.handles.append(Z)
        report.forbidden_blocks.append(beta)
        log.info("[comb] step %d forbids block %s (census %d)", n, rendered, len(new_blocks))
        if not (loss_ok and ratio_ok):
            log.warning("[comb] interior check failed at step %d", n)
        blocks, groups = new_blocks, new_groups

    terminal_h = report.terminal_entropy
    report.u2 = terminal_h < config.eps
    report.u2_tight = terminal_h < config.u2_bound()
    log.info("[comb] %s after %d steps, h(F, Z_N)=%.6f (u2=%s)",
             'terminal' if report.terminal else 'stopped', report.length, terminal_h, report.u2)
    if decompose and config.decomposition_samples > 0:
        for k in _sample_steps(report.length, config.decomposition_samples):
            report.decompositions.append(
                count_decomposition(report.handles[k], F, config, X.window, step=k))
    return report


def _sample_steps(N, samples):
    if samples == 1:
        return [N]
    picks = {round(i * N / (samples - 1)) for i in range(samples)}
    return sorted(picks)
