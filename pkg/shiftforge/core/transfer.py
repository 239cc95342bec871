"""Exact d=1 engine: the essential higher-block transfer graph of a handle.

Vertices are the locally admissible (M-1)-words and edges the locally
admissible M-words, where M covers the base window and every extra forbidden
shape. Vertices without in- or out-edges are deleted until none remain; a
finite word is admissible iff it reads along the remaining (essential) graph.
Counting on an arbitrary finite F scans F's hull with a determinized
subset automaton: F sites branch on their symbol, gap sites take the union.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import networkx as nx
import numpy as np

from shiftforge import params
from shiftforge.core.sft import SubshiftHandle, as_handle
from shiftforge.errors import CapExceededError, RefusalError

log = logging.getLogger(__name__)


def _offsets(shape):
    return tuple(s[0] for s in shape.sites)


class TransferGraph:
    def __init__(self, handle: SubshiftHandle):
        if handle.dim != 1:
            raise RefusalError("the exact transfer engine is one-dimensional")
        self.handle = handle
        self.q = len(handle.alphabet)
        base = handle.base
        self._window = _offsets(base.window)
        self._last = base.last_index()
        self._forbidden = [(_offsets(shape), frozenset(labels))
                           for shape, labels in handle.forbidden_index().items()]
        spans = [self._window[-1] - self._window[0] + 1]
        spans += [offs[-1] + 1 for offs, _ in self._forbidden]
        self.M = max(2, max(spans))
        self._build()

    # ---------------- construction ---------------- #

    def _admissible_symbols(self, word):
        """Symbols a such that word + (a,) passes every check ending at the new site."""
        p = len(word)
        k0, kr = self._window[0], self._window[-1]
        j = p - kr
        if j + k0 >= 0:
            prefix = tuple(word[j + k] for k in self._window[:-1])
            cands = self._last.get(prefix, ())
        else:
            cands = range(self.q)
        if not self._forbidden:
            return cands
        out = []
        for a in cands:
            ok = True
            for offs, labels in self._forbidden:
                start = p - offs[-1]
                if start < 0:
                    continue
                key = tuple(word[start + d] for d in offs[:-1]) + (a,)
                if key in labels:
                    ok = False
                    break
            if ok:
                out.append(a)
        return out

    def _words(self, length):
        words = [()]
        for _ in range(length):
            nxt = []
            for w in words:
                for a in self._admissible_symbols(w):
                    nxt.append(w + (a,))
            words = nxt
            if len(words) > params.PATTERN_CAP:
                raise CapExceededError("higher-block edge list", params.PATTERN_CAP)
        return words

    def _build(self):
        edges = self._words(self.M)
        G = nx.DiGraph()
        for w in edges:
            G.add_edge(w[:-1], w[1:], symbol=w[-1])
        alive = essential_vertices(G)
        words = sorted(alive)
        self.vertices = words
        index = {w: i for i, w in enumerate(words)}
        self.succ = [dict() for _ in words]
        for u, v, symbol in G.edges(data='symbol'):
            if u in index and v in index:
                self.succ[index[u]][symbol] = index[v]
        self.n_edges = sum(len(s) for s in self.succ)
        log.debug("[transfer] M=%d vertices=%d edges=%d", self.M, len(words), self.n_edges)

    @property
    def is_empty(self):
        return not self.vertices

    # ---------------- scans ---------------- #

    def _start(self):
        return frozenset(range(len(self.vertices)))

    def _step(self, state, symbols, memo):
        """state -> {symbol: next state} restricted to `symbols` (None = all)."""
        key = (state, symbols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        nxt = {}
        for v in state:
            for a, t in self.succ[v].items():
                if symbols is None or a in symbols:
                    nxt.setdefault(a, set()).add(t)
        hit = {a: frozenset(s) for a, s in nxt.items()}
        memo[key] = hit
        return hit

    @staticmethod
    def _hull(positions):
        positions = sorted(positions)
        return positions[0], positions[-1]

    def count(self, positions, allowed_at=None):
        """|P(F, X)| for F = `positions`; `allowed_at` optionally restricts symbols per site."""
        positions = set(positions)
        if not positions:
            raise RefusalError("window must be nonempty")
        if self.is_empty:
            return 0
        lo, hi = self._hull(positions)
        memo = {}
        states = {self._start(): 1}
        for i in range(lo, hi + 1):
            nxt = {}
            restrict = None if allowed_at is None else allowed_at.get(i)
            for state, c in states.items():
                moves = self._step(state, restrict, memo)
                if i in positions:
                    for a in sorted(moves):
                        s = moves[a]
                        nxt[s] = nxt.get(s, 0) + c
                elif moves:
                    s = frozenset().union(*moves.values())
                    nxt[s] = nxt.get(s, 0) + c
            states = nxt
            if len(states) > params.SCAN_STATE_CAP:
                raise CapExceededError("subset scan states", params.SCAN_STATE_CAP)
        return sum(states.values())

    def patterns(self, positions, cap=None, allowed_at=None):
        """Canonically sorted label tuples of P(F, X)."""
        cap = params.PATTERN_CAP if cap is None else cap
        positions = set(positions)
        if not positions:
            raise RefusalError("window must be nonempty")
        if self.is_empty:
            return []
        lo, hi = self._hull(positions)
        memo = {}
        states = {self._start(): [()]}
        for i in range(lo, hi + 1):
            nxt = {}
            restrict = None if allowed_at is None else allowed_at.get(i)
            for state, prefixes in states.items():
                moves = self._step(state, restrict, memo)
                if i in positions:
                    for a in sorted(moves):
                        nxt.setdefault(moves[a], []).extend(p + (a,) for p in prefixes)
                elif moves:
                    s = frozenset().union(*moves.values())
                    nxt.setdefault(s, []).extend(prefixes)
            states = nxt
            if sum(len(v) for v in states.values()) > cap:
                raise CapExceededError("pattern list", cap)
        return sorted(p for ps in states.values() for p in ps)

    def common_count(self, other, positions):
        """|P(F, X) intersect P(F, Y)|: both subset scans run in lockstep and only
        symbols readable in both branch."""
        if self.q != other.q:
            raise RefusalError("shifts over different alphabets")
        positions = set(positions)
        if not positions:
            raise RefusalError("window must be nonempty")
        if self.is_empty or other.is_empty:
            return 0
        lo, hi = self._hull(positions)
        memo, other_memo = {}, {}
        states = {(self._start(), other._start()): 1}
        for i in range(lo, hi + 1):
            nxt = {}
            for (mine, theirs), c in states.items():
                a_moves = self._step(mine, None, memo)
                b_moves = other._step(theirs, None, other_memo)
                if i in positions:
                    for a in sorted(a_moves.keys() & b_moves.keys()):
                        key = (a_moves[a], b_moves[a])
                        nxt[key] = nxt.get(key, 0) + c
                elif a_moves and b_moves:
                    key = (frozenset().union(*a_moves.values()),
                           frozenset().union(*b_moves.values()))
                    nxt[key] = nxt.get(key, 0) + c
            states = nxt
            if len(states) > params.SCAN_STATE_CAP:
                raise CapExceededError("joint scan states", params.SCAN_STATE_CAP)
        return sum(states.values())

    def image_states(self, positions, symbol_map):
        """Determinized scan over image symbols; returns {state: count of image words}."""
        positions = set(positions)
        lo, hi = self._hull(positions)
        memo = {}
        states = {self._start(): 1}
        for i in range(lo, hi + 1):
            nxt = {}
            for state, c in states.items():
                moves = self._step(state, None, memo)
                if i in positions:
                    grouped = {}
                    for a, s in moves.items():
                        grouped.setdefault(symbol_map[a], set()).update(s)
                    for b in sorted(grouped):
                        key = frozenset(grouped[b])
                        nxt[key] = nxt.get(key, 0) + c
                elif moves:
                    s = frozenset().union(*moves.values())
                    nxt[s] = nxt.get(s, 0) + c
            states = nxt
        return states

    def image_count(self, positions, symbol_map):
        """|Phi_F(P(F, X))| for a one-block symbol map."""
        if not positions:
            raise RefusalError("window must be nonempty")
        if self.is_empty:
            return 0
        return sum(self.image_states(positions, symbol_map).values())

    def image_patterns(self, positions, symbol_map, cap=None):
        cap = params.PATTERN_CAP if cap is None else cap
        positions = set(positions)
        if self.is_empty:
            return []
        lo, hi = self._hull(positions)
        memo = {}
        states = {self._start(): [()]}
        for i in range(lo, hi + 1):
            nxt = {}
            for state, prefixes in states.items():
                moves = self._step(state, None, memo)
                if i in positions:
                    grouped = {}
                    for a, s in moves.items():
                        grouped.setdefault(symbol_map[a], set()).update(s)
                    for b in sorted(grouped):
                        nxt.setdefault(frozenset(grouped[b]), []).extend(p + (b,) for p in prefixes)
                elif moves:
                    s = frozenset().union(*moves.values())
                    nxt.setdefault(s, []).extend(prefixes)
            states = nxt
            if sum(len(v) for v in states.values()) > cap:
                raise CapExceededError("image pattern list", cap)
        return sorted({p for ps in states.values() for p in ps})

    def weighted_count(self, allowed_at, collect, flush):
        """Sum over labellings of the sites in `allowed_at` (site -> symbols) that
        read along the graph, of the product of flush weights.

        `collect` maps a site to a label extractor whose output is appended to the
        running tuple; `flush` maps a site to a weight function of that tuple,
        after which the tuple restarts.
        """
        if not allowed_at or self.is_empty:
            return 0 if self.is_empty else 1
        lo, hi = self._hull(allowed_at.keys())
        memo = {}
        states = {(self._start(), ()): 1}
        weights = {}
        for i in range(lo, hi + 1):
            nxt = {}
            restrict = allowed_at.get(i)
            for (state, partial), c in states.items():
                moves = self._step(state, restrict, memo)
                if restrict is None:
                    if moves:
                        s = frozenset().union(*moves.values())
                        key = (s, partial)
                        nxt[key] = nxt.get(key, 0) + c
                    continue
                for a in sorted(moves):
                    part = partial
                    value = c
                    if i in collect:
                        part = part + (collect[i](a),)
                    if i in flush:
                        wkey = (i, part)
                        if wkey not in weights:
                            weights[wkey] = flush[i](part)
                        value = value * weights[wkey]
                        part = ()
                    if value:
                        key = (moves[a], part)
                        nxt[key] = nxt.get(key, 0) + value
            states = nxt
            if len(states) > params.SCAN_STATE_CAP:
                raise CapExceededError("weighted scan states", params.SCAN_STATE_CAP)
        return sum(states.values())

    # ---------------- spectra ---------------- #

    def spectral_radius(self):
        return spectral_radius(len(self.vertices), [list(m.values()) for m in self.succ])


def essential_vertices(G: nx.DiGraph) -> set:
    """Vertices lying on a bi-infinite path: reachable from a cycle and reaching one."""
    if not G:
        return set()
    C = nx.condensation(G)
    cyclic = set()
    for c, members in C.nodes(data='members'):
        v = next(iter(members))
        if len(members) > 1 or G.has_edge(v, v):
            cyclic.add(c)
    order = list(nx.topological_sort(C))
    after = set()
    for c in order:
        if c in cyclic or any(p in after for p in C.predecessors(c)):
            after.add(c)
    before = set()
    for c in reversed(order):
        if c in cyclic or any(s in before for s in C.successors(c)):
            before.add(c)
    return {v for c in after & before for v in C.nodes[c]['members']}


def spectral_radius(n, adj):
    """Largest eigenvalue modulus of a 0/1-multigraph, taken per strongly
    connected component so reducible graphs stay well conditioned."""
    G = nx.DiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from((v, t) for v in range(n) for t in adj[v])
    best = 0.0
    for comp in nx.strongly_connected_components(G):
        comp = sorted(comp)
        pos = {v: i for i, v in enumerate(comp)}
        A = np.zeros((len(comp), len(comp)), dtype=float)
        for v in comp:
            for t in adj[v]:
                if t in pos:
                    A[pos[v], pos[t]] += 1.0
        if not A.any():
            continue
        if len(comp) == 1:
            rho = A[0, 0]
        else:
            rho = float(np.max(np.abs(np.linalg.eigvals(A))))
        best = max(best, rho)
    return best


@lru_cache(maxsize=256)
def transfer_graph(X) -> TransferGraph:
    return TransferGraph(as_handle(X))
