"""Pattern counts, entropy estimates and constructions on SFTs.

d=1 goes through the exact transfer engine; d=2 through the margin engine,
whose figures are upper-bound estimates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from shiftforge import params
from shiftforge.core.group import FiniteSet, add, boundary, origin, product_set
from shiftforge.core.local import default_margin, margin_count, margin_patterns, placements
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.core.sft import BlockCode, CountResult, SftSpec, SubshiftHandle, as_handle
from shiftforge.core.transfer import spectral_radius, transfer_graph
from shiftforge.errors import CapExceededError, RefusalError
from shiftforge.utils import window_entropy

log = logging.getLogger(__name__)


def tier(dim, margin=None):
    if dim == 1:
        return params.TIER_EXACT
    return f"{params.TIER_MARGIN}({margin})"


def _ints(F):
    return [s[0] for s in F.sites]


def _int_keys(allowed_at):
    if allowed_at is None:
        return None
    return {s[0] if isinstance(s, tuple) else s: tuple(v) for s, v in allowed_at.items()}


# ============================================================================ #
# Counting
# ============================================================================ #


def pattern_count(X, F: FiniteSet, margin=None, allowed_at=None) -> int:
    """|P(F, X)|, optionally with per-site symbol restrictions."""
    X = as_handle(X)
    if not F:
        raise RefusalError("window must be nonempty")
    if F.dim != X.dim:
        raise RefusalError(f"window is {F.dim}-dimensional, SFT is {X.dim}-dimensional")
    if X.dim == 1 and margin is None:
        return transfer_graph(X).count(_ints(F), _int_keys(allowed_at))
    m = default_margin(X) if margin is None else margin
    return margin_count(X, F, m, allowed_at=allowed_at)


def pattern_list(X, F: FiniteSet, margin=None, cap=None, allowed_at=None) -> list:
    """Canonically sorted label tuples of P(F, X)."""
    X = as_handle(X)
    if not F:
        raise RefusalError("window must be nonempty")
    if X.dim == 1 and margin is None:
        return transfer_graph(X).patterns(_ints(F), cap, _int_keys(allowed_at))
    m = default_margin(X) if margin is None else margin
    return margin_patterns(X, F, m, cap, allowed_at=allowed_at)


def enumerate_patterns(X, F: FiniteSet, margin=None, want_list=False, cap=None):
    """(CountResult, patterns or None). d=1 ignores `margin` and is exact."""
    X = as_handle(X)
    if X.dim == 1:
        margin = None
    elif margin is None:
        margin = default_margin(X)
    mode = tier(X.dim, margin)
    if want_list:
        labels = pattern_list(X, F, margin, cap)
        return CountResult(len(labels), mode), [Pattern(F, p) for p in labels]
    return CountResult(pattern_count(X, F, margin), mode), None


def occurs_in(X, p: Pattern, margin=None) -> bool:
    allowed_at = {s: (a,) for s, a in zip(p.domain.sites, p.labels)}
    return pattern_count(X, p.domain, margin, allowed_at) > 0


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    empty: bool
    mode: str
    count: int | None = None

    def __float__(self):
        return self.value

    def to_json(self):
        out = {'entropy': self.value, 'empty': self.empty, 'mode': self.mode}
        if self.count is not None:
            out['count'] = str(self.count)
        return out


def entropy_estimate(X, F: FiniteSet, margin=None) -> EntropyEstimate:
    """h(F, X) = log|P(F, X)| / |F|; an upper-bound estimate when d=2."""
    result, _ = enumerate_patterns(X, F, margin)
    if result.empty:
        return EntropyEstimate(0.0, True, result.mode, 0)
    return EntropyEstimate(window_entropy(result.count, len(F)), False, result.mode, result.count)


def entropy_exact_1d(X) -> EntropyEstimate:
    X = as_handle(X)
    if X.dim != 1:
        raise RefusalError("exact entropy is only available in one dimension")
    G = transfer_graph(X)
    if G.is_empty:
        return EntropyEstimate(0.0, True, params.TIER_EXACT)
    rho = G.spectral_radius()
    return EntropyEstimate(math.log(rho) if rho > 0 else 0.0, False, params.TIER_EXACT)


# ---------------- images under one-block codes ---------------- #


def image_count(X, code: BlockCode, F: FiniteSet, margin=None) -> int:
    """|Phi_F(P(F, X))|."""
    X = as_handle(X)
    smap = code.symbol_map()
    if X.dim == 1 and margin is None:
        return transfer_graph(X).image_count(_ints(F), smap)
    return len(image_patterns(X, code, F, margin))


def image_patterns(X, code: BlockCode, F: FiniteSet, margin=None, cap=None) -> list:
    X = as_handle(X)
    smap = code.symbol_map()
    if X.dim == 1 and margin is None:
        return transfer_graph(X).image_patterns(_ints(F), smap, cap)
    return sorted({tuple(smap[a] for a in p) for p in pattern_list(X, F, margin, cap)})


def image_entropy_estimate(X, code, F, margin=None) -> EntropyEstimate:
    X = as_handle(X)
    n = image_count(X, code, F, margin)
    mode = tier(X.dim, default_margin(X) if margin is None and X.dim == 2 else margin)
    if n == 0:
        return EntropyEstimate(0.0, True, mode, 0)
    return EntropyEstimate(window_entropy(n, len(F)), False, mode, n)


def image_entropy_1d(X, code: BlockCode) -> EntropyEstimate:
    """Exact entropy of the one-block image of a d=1 handle (a sofic shift),
    read off the right-resolving subset presentation."""
    X = as_handle(X)
    G = transfer_graph(X)
    if G.is_empty:
        return EntropyEstimate(0.0, True, params.TIER_EXACT)
    smap = code.symbol_map()
    start = frozenset(range(len(G.vertices)))
    ids = {start: 0}
    adj = [[]]
    todo = [start]
    while todo:
        S = todo.pop()
        grouped = {}
        for v in S:
            for a, t in G.succ[v].items():
                grouped.setdefault(smap[a], set()).add(t)
        for b in sorted(grouped):
            T = frozenset(grouped[b])
            if T not in ids:
                ids[T] = len(ids)
                adj.append([])
                todo.append(T)
                if len(ids) > params.SUBSET_CAP:
                    raise CapExceededError("subset construction", params.SUBSET_CAP)
            adj[ids[S]].append(ids[T])
    rho = spectral_radius(len(adj), adj)
    return EntropyEstimate(math.log(rho) if rho > 0 else 0.0, False, params.TIER_EXACT)


# ============================================================================ #
# Window checks and excision
# ============================================================================ #


def window_violations(X, p: Pattern) -> list:
    """Window translates (and forbidden placements) fully inside p's domain that fail."""
    X = as_handle(X)
    lookup = p.as_dict()
    bad = []
    for moved in placements(X.base.window, p.domain):
        key = tuple(lookup[s] for s in moved.sites)
        if key not in X.base.allowed:
            bad.append(moved.sites[0])
    for shape, labels in X.forbidden_index().items():
        for moved in placements(shape, p.domain):
            if tuple(lookup[s] for s in moved.sites) in labels:
                bad.append(moved.sites[0])
    return bad


def excise_and_replace(X: SftSpec, x: Pattern, y: Pattern, F: FiniteSet) -> Pattern:
    """z = y on F and x elsewhere, for x, y agreeing on the KK^-1-boundary of F."""
    if x.domain != y.domain:
        raise RefusalError("x and y must share their domain")
    K = X.window
    KK = K.difference_set()
    if not product_set(KK, F).issubset(x.domain):
        raise RefusalError("domain too small: it must contain (KK^-1)F")
    xs, ys = x.as_dict(), y.as_dict()
    for s in boundary(KK, F).sites:
        if xs[s] != ys[s]:
            raise RefusalError(f"x and y disagree on the boundary at {s}")
    members = F.members
    return Pattern(x.domain, tuple(ys[s] if s in members else xs[s] for s in x.domain.sites))


# ============================================================================ #
# Codes
# ============================================================================ #


def apply_block_code(code: BlockCode, p: Pattern) -> Pattern:
    q = len(code.source)
    if any(a < 0 or a >= q for a in p.labels):
        raise RefusalError("pattern uses a symbol outside the code's source alphabet")
    if code.is_one_block:
        return Pattern(p.domain, tuple(code.rule[(a,)] for a in p.labels))
    lookup = p.as_dict()
    N = code.neighborhood
    sites = []
    out = []
    for g in p.domain.sites:
        moved = [add(n, g) for n in N.sites]
        if all(s in lookup for s in moved):
            key = tuple(lookup[s] for s in moved)
            if key not in code.rule:
                raise RefusalError(f"code has no rule for {key}")
            sites.append(g)
            out.append(code.rule[key])
    if not sites:
        raise RefusalError("pattern domain vanishes under the code's neighborhood")
    return Pattern(FiniteSet(p.domain.dim, tuple(sites)), tuple(out))


def _symbol_name(alphabet, labels):
    names = [alphabet.symbols[a] for a in labels]
    return ''.join(names) if all(len(n) == 1 for n in names) else ','.join(names)


def locally_admissible(X, W: FiniteSet, cap=None) -> list:
    """Label tuples on W (canonical order) whose fully-contained window translates
    are allowed and that contain no extra forbidden pattern."""
    X = as_handle(X)
    cap = params.ALLOWED_CAP if cap is None else cap
    pos = W.index_of()
    checks = [[] for _ in W.sites]
    for moved in placements(X.base.window, W):
        idx = tuple(pos[s] for s in moved.sites)
        checks[max(idx)].append((idx, X.base.allowed, True))
    for shape, labels in X.forbidden_index().items():
        for moved in placements(shape, W):
            idx = tuple(pos[s] for s in moved.sites)
            checks[max(idx)].append((idx, frozenset(labels), False))
    q = len(X.alphabet)
    out = []
    labels = [0] * len(W)

    def dfs(p):
        if p == len(W):
            out.append(tuple(labels))
            if len(out) > cap:
                raise CapExceededError("allowed set", cap)
            return
        for a in range(q):
            labels[p] = a
            if all((tuple(labels[i] for i in idx) in table) == ok for idx, table, ok in checks[p]):
                dfs(p + 1)

    dfs(0)
    return out


def higher_block_recode(X: SftSpec, code: BlockCode):
    """(X~, conjugacy X~ -> X, one-block code X~ -> image) for a block code on X.

    X~ lives over the alphabet P(K, X) and is specified on K^-1 K; its symbol at
    g is the K-pattern of x read at g. When X's own window is not inside K, K is
    enlarged by it and the code ignores the extra sites.
    """
    K0 = code.neighborhood
    dim = K0.dim
    if origin(dim) not in K0:
        raise RefusalError("the code's neighborhood must contain the origin")
    K = K0.union(X.window)
    sub = [K.sites.index(s) for s in K0.sites]
    blocks = pattern_list(X, K)
    alphabet = Alphabet(tuple(_symbol_name(X.alphabet, b) for b in blocks))
    W = product_set(K.inverse(), K)
    kpos = K.index_of()
    # pairs of W sites whose K-translates overlap, with the overlapping offsets
    overlaps = []
    wsites = W.sites
    for i, w in enumerate(wsites):
        for j in range(i):
            w2 = wsites[j]
            pairs = []
            for k in K.sites:
                s = add(k, w)
                k2 = tuple(a - b for a, b in zip(s, w2))
                if k2 in kpos:
                    pairs.append((kpos[k], kpos[k2]))
            if pairs:
                overlaps.append((i, j, tuple(pairs)))
    by_last = [[] for _ in wsites]
    for i, j, pairs in overlaps:
        by_last[i].append((j, pairs))
    allowed = []
    labels = [0] * len(wsites)

    def dfs(p):
        if p == len(wsites):
            allowed.append(tuple(labels))
            if len(allowed) > params.ALLOWED_CAP:
                raise CapExceededError("recoded allowed set", params.ALLOWED_CAP)
            return
        for a, block in enumerate(blocks):
            ok = True
            for j, pairs in by_last[p]:
                other = blocks[labels[j]]
                if any(block[u] != other[v] for u, v in pairs):
                    ok = False
                    break
            if ok:
                labels[p] = a
                dfs(p + 1)

    dfs(0)
    Xt = SftSpec(alphabet, W, frozenset(allowed))
    at_origin = kpos[origin(dim)]
    conj = BlockCode.one_block(alphabet, X.alphabet,
                               {i: b[at_origin] for i, b in enumerate(blocks)}, dim)
    composed = {}
    for i, b in enumerate(blocks):
        key = tuple(b[u] for u in sub)
        if key not in code.rule:
            raise RefusalError(f"code has no rule for the admissible block {key}")
        composed[i] = code.rule[key]
    return Xt, conj, BlockCode.one_block(alphabet, code.target, composed, dim)


def product_shift(X: SftSpec, T: SftSpec) -> SftSpec:
    """X x T over the pair alphabet (index x * |T| + t) on the union window."""
    if X.dim != T.dim:
        raise RefusalError("product factors must share their dimension")
    W = X.window.union(T.window)
    xs = locally_admissible(X, W)
    ts = locally_admissible(T, W)
    if len(xs) * len(ts) > params.ALLOWED_CAP:
        raise CapExceededError("product allowed set", params.ALLOWED_CAP)
    qt = len(T.alphabet)
    allowed = frozenset(tuple(a * qt + b for a, b in zip(px, pt)) for px in xs for pt in ts)
    return SftSpec(X.alphabet.product(T.alphabet), W, allowed)


def projection_codes(X: SftSpec, T: SftSpec):
    """(pi_X, pi_T) on the pair alphabet of product_shift(X, T)."""
    pair = X.alphabet.product(T.alphabet)
    qt = len(T.alphabet)
    pi_x = BlockCode.one_block(pair, X.alphabet, {i: i // qt for i in range(len(pair))}, X.dim)
    pi_t = BlockCode.one_block(pair, T.alphabet, {i: i % qt for i in range(len(pair))}, X.dim)
    return pi_x, pi_t


# ============================================================================ #
# SFT approximations
# ============================================================================ #


def enlarged_window(X: SubshiftHandle, budget=None) -> FiniteSet:
    X = as_handle(X)
    budget = len(X.extra_forbidden) if budget is None else budget
    W = X.base.window
    for p in X.extra_forbidden[:budget]:
        W = W.union(p.normalized().domain)
    return W


def sft_outer_approximation(X, budget: int) -> SftSpec:
    """Base SFT plus the first `budget` extra forbidden patterns, re-expressed on
    the union of all shapes involved. X is contained in the result, which is
    contained in the base."""
    X = as_handle(X)
    if budget < 0:
        raise RefusalError("budget must be nonnegative")
    if budget == 0:
        return X.base
    W = enlarged_window(X, budget)
    if len(W) > params.WINDOW_CAP:
        raise CapExceededError(f"enlarged window of {len(W)} sites", params.WINDOW_CAP)
    allowed = locally_admissible(X.head(budget), W)
    log.debug("[approx] budget=%d window=%d allowed=%d", budget, len(W), len(allowed))
    return SftSpec(X.alphabet, W, frozenset(allowed))


def window_sft(X, W: FiniteSet, margin=None) -> SftSpec:
    """The SFT specified by the admissible patterns P(W, X); W must contain the origin."""
    X = as_handle(X)
    if origin(W.dim) not in W:
        raise RefusalError("window must contain the origin")
    return SftSpec(X.alphabet, W, frozenset(pattern_list(X, W, margin)))


def forbid_missing(X: SftSpec, patterns, W: FiniteSet) -> SubshiftHandle:
    """X plus, as extra forbidden patterns, every W-pattern of X outside `patterns`."""
    keep = set(patterns)
    extra = tuple(Pattern(W, p) for p in pattern_list(X, W) if p not in keep)
    return SubshiftHandle(X, extra)


def union_count(X, Y, F: FiniteSet, margin=None) -> dict:
    """|P(F, X) union P(F, Y)| against the max/sum rule.

    d=1 works from counts alone (the overlap comes from a joint scan), so the
    window may be far larger than any pattern list.
    """
    X, Y = as_handle(X), as_handle(Y)
    if X.dim == 1 and margin is None:
        a, b = pattern_count(X, F), pattern_count(Y, F)
        u = a + b - transfer_graph(X).common_count(transfer_graph(Y), _ints(F))
    else:
        xs = set(pattern_list(X, F, margin))
        ys = set(pattern_list(Y, F, margin))
        a, b, u = len(xs), len(ys), len(xs | ys)
    return {'count_x': a, 'count_y': b, 'union': u,
            'within_rule': max(a, b) <= u <= a + b}

