"""Margin engine: m-locally-admissible patterns.

A pattern on F is m-locally-admissible when it extends to the padded domain
D = F + [-m, m]^d so that every window translate fully inside D is allowed and
no extra forbidden pattern occurs fully inside D. This is a superset of P(F, X)
that shrinks as m grows. The search is depth-first over F in canonical order
(symbols in alphabet order), then over the padding; each placement is checked
when its last site is assigned, and extension existence is memoized on the F
labels that the padding constraints can see.
"""

from __future__ import annotations

import logging

from shiftforge import params
from shiftforge.core.group import FiniteSet, product_set, translate
from shiftforge.core.sft import SubshiftHandle, as_handle
from shiftforge.errors import CapExceededError, RefusalError

log = logging.getLogger(__name__)


def default_margin(X) -> int:
    return 2 * as_handle(X).base.window.diameter()


def placements(shape: FiniteSet, domain: FiniteSet):
    """Translates g with shape + g fully inside `domain`."""
    members = domain.members
    anchor = shape.sites[0]
    out = []
    for d in domain.sites:
        g = tuple(a - b for a, b in zip(d, anchor))
        moved = translate(shape, g)
        if all(s in members for s in moved.sites):
            out.append(moved)
    return out


class MarginSearch:
    def __init__(self, handle: SubshiftHandle, F: FiniteSet, margin: int,
                 node_budget=None, allowed_at=None):
        if not F:
            raise RefusalError("window must be nonempty")
        if margin < 0:
            raise RefusalError("margin must be nonnegative")
        if F.dim != handle.dim:
            raise RefusalError("window and SFT dimensions differ")
        self.handle = handle
        self.F = F
        self.margin = margin
        self.q = len(handle.alphabet)
        self.budget = params.NODE_BUDGET if node_budget is None else node_budget
        self.nodes = 0
        dim = F.dim
        pad = FiniteSet.box((-margin,) * dim, (margin + 1,) * dim)
        D = product_set(F, pad)
        padding = D.difference(F)
        self.order = list(F.sites) + list(padding.sites)
        self.n_inner = len(F)
        pos = {s: i for i, s in enumerate(self.order)}
        self.symbols = []
        for s in self.order:
            restrict = None if allowed_at is None else allowed_at.get(s)
            self.symbols.append(tuple(range(self.q)) if restrict is None else tuple(restrict))

        # checks[p] = list of (site positions in shape order, label set, is_allowed_set)
        self.checks = [[] for _ in self.order]
        base = handle.base
        for moved in placements(base.window, D):
            idx = tuple(pos[s] for s in moved.sites)
            self.checks[max(idx)].append((idx, base.allowed, True))
        for shape, labels in handle.forbidden_index().items():
            labels = frozenset(labels)
            for moved in placements(shape, D):
                idx = tuple(pos[s] for s in moved.sites)
                self.checks[max(idx)].append((idx, labels, False))

        seen = set()
        for p in range(self.n_inner, len(self.order)):
            for idx, _, _ in self.checks[p]:
                seen.update(i for i in idx if i < self.n_inner)
        self.frontier = tuple(sorted(seen))
        self._memo = {}

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise CapExceededError("enumeration node budget", self.budget)

    def _ok(self, labels, p):
        for idx, table, is_allowed in self.checks[p]:
            key = tuple(labels[i] for i in idx)
            if (key in table) != is_allowed:
                return False
        return True

    def _advance(self, labels, p, nxt):
        """Assign the next symbol at p that passes its checks; False when exhausted."""
        symbols = self.symbols[p]
        while nxt[p] < len(symbols):
            labels[p] = symbols[nxt[p]]
            nxt[p] += 1
            self._tick()
            if self._ok(labels, p):
                return True
        labels[p] = None
        return False

    def _extends(self, labels):
        key = tuple(labels[i] for i in self.frontier)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        total = len(self.order)
        nxt = [0] * (total + 1)
        p = self.n_inner
        while self.n_inner <= p < total:
            if self._advance(labels, p, nxt):
                p += 1
                nxt[p] = 0
            else:
                p -= 1
        result = p == total
        for i in range(self.n_inner, total):
            labels[i] = None
        self._memo[key] = result
        return result

    def run(self, collect=False, cap=None):
        cap = params.PATTERN_CAP if cap is None else cap
        labels = [None] * len(self.order)
        found = []
        count = 0
        nxt = [0] * (self.n_inner + 1)
        p = 0
        while p >= 0:
            if p == self.n_inner:
                if self._extends(labels):
                    count += 1
                    if collect:
                        if count > cap:
                            raise CapExceededError("pattern list", cap)
                        found.append(tuple(labels[:self.n_inner]))
                p -= 1
            elif self._advance(labels, p, nxt):
                p += 1
                nxt[p] = 0
            else:
                p -= 1
        log.debug("[margin] |F|=%d m=%d count=%d nodes=%d",
                  self.n_inner, self.margin, count, self.nodes)
        return count, found


def margin_count(X, F, margin, node_budget=None, allowed_at=None):
    return MarginSearch(as_handle(X), F, margin, node_budget, allowed_at).run()[0]


def margin_patterns(X, F, margin, cap=None, node_budget=None, allowed_at=None):
    return MarginSearch(as_handle(X), F, margin, node_budget, allowed_at).run(True, cap)[1]
