"""Combing run configuration: epsilon, the derived delta, and the geometric
hypotheses of the combing argument evaluated on the chosen box sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from shiftforge import params
from shiftforge.core.group import FiniteSet, boundary, invariance_defect, origin
from shiftforge.core.sft import SftSpec
from shiftforge.errors import RefusalError


def delta_bound(delta, q):
    """2 delta + delta log 2 + 2 delta log q."""
    return 2 * delta + delta * math.log(2) + 2 * delta * math.log(q)


@dataclass(frozen=True)
class CombingConfig:
    eps: float
    delta: float
    L: int
    dim: int
    window: int
    alphabet_size: int
    eta: Fraction
    theta: Fraction
    kk_size: int
    border_size: int
    margin: int | None = None
    max_steps: int = params.DEFAULT_MAX_STEPS
    strict: bool = False
    decomposition_samples: int = params.DECOMPOSITION_SAMPLES
    warnings: tuple = field(default=())

    @classmethod
    def derive(cls, X: SftSpec, eps, L, window, margin=None, delta=None,
               max_steps=params.DEFAULT_MAX_STEPS, strict=False,
               decomposition_samples=params.DECOMPOSITION_SAMPLES):
        eps = float(eps)
        if eps <= 0:
            raise RefusalError("eps must be positive")
        if L < 1 or window < 1:
            raise RefusalError("tile side and window size must be positive")
        q = len(X.alphabet)
        if delta is None:
            delta = params.DELTA_SAFETY * eps / (2 + math.log(2) + 2 * math.log(q))
        delta = float(delta)
        if delta <= 0 or not delta_bound(delta, q) < eps:
            raise RefusalError(f"delta={delta} violates 2d + d log 2 + 2d log|A| < eps={eps}")
        d = X.dim
        K = X.window
        if K.diameter() >= L:
            raise RefusalError(f"SFT window of diameter {K.diameter()} does not fit the box of side {L}")
        S = FiniteSet.box(origin(d), (L,) * d)
        KK = K.difference_set()
        F = FiniteSet.box(origin(d), (window,) * d)
        U = S
        UU = U.difference_set()
        cfg = cls(eps=eps, delta=delta, L=L, dim=d, window=window, alphabet_size=q,
                  eta=invariance_defect(KK, S), theta=invariance_defect(UU, F),
                  kk_size=len(KK), border_size=len(boundary(KK, S)), margin=margin,
                  max_steps=max_steps, strict=strict,
                  decomposition_samples=decomposition_samples)
        failed = [name for name, ok in cfg.hypotheses().items() if not ok]
        if failed and strict:
            raise RefusalError(f"invariance conditions unsatisfiable for L={L}, delta={delta:.6g}: "
                               + ', '.join(failed))
        notes = tuple(f"hypothesis not met: {name}" for name in failed)
        return cls(**{**cfg.__dict__, 'warnings': notes})

    @property
    def box_size(self):
        return self.L ** self.dim

    def hypotheses(self) -> dict:
        """Which of the combing argument's size conditions hold for this run."""
        S = self.box_size
        return {
            'shape_invariance': float(self.eta) * self.kk_size < self.delta,
            'shape_border': self.border_size < self.delta * S,
            'shape_size': S > 1 / self.delta,
            'window_invariance': float(self.theta) * S * (2 * self.L - 1) ** self.dim < self.delta,
        }

    def window_set(self):
        """The run window F = [0, n)^d."""
        return FiniteSet.box(origin(self.dim), (self.window,) * self.dim)

    def u1_bound(self):
        """Per-step gap allowance delta log|A| + delta log 2."""
        return self.delta * math.log(self.alphabet_size) + self.delta * math.log(2)

    def u2_bound(self):
        """Terminal allowance 2 delta + 2 delta log|A|."""
        return 2 * self.delta + 2 * self.delta * math.log(self.alphabet_size)

    def to_json(self):
        return {
            'eps': self.eps, 'delta': self.delta, 'L': self.L, 'dim': self.dim,
            'window': self.window, 'alphabet_size': self.alphabet_size,
            'eta': str(self.eta), 'theta': str(self.theta), 'margin': self.margin,
            'max_steps': self.max_steps, 'strict': self.strict,
            'decomposition_samples': self.decomposition_samples,
            'hypotheses': self.hypotheses(), 'warnings': list(self.warnings),
        }
