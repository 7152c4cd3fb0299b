"""Greedy merging of hyper-rectangles under the MDL criterion, plus pruning.

`mine` starts from the elementary cells of a discretized dataset and
repeatedly replaces two patterns by their join while this shortens the total
description length. Candidate pairs are first restricted to k nearest
neighbours; every merged pattern is then paired with all live patterns, and
the gains of those pairs are only evaluated once the current batch of
candidates is exhausted.

`prune` looks for groups of patterns that do not compress well pairwise but
do when merged together: a pair whose join contains other patterns is grown
by absorbing them while this improves the gain.

Internally patterns live in flat numpy arrays indexed by creation id; ids of
the elementary cells follow their lexicographic order.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from .dataset import DiscretizedDataset, ElementaryCell, elementary_cells, resolve_count
from .mdl import (
    EncodingContext,
    HyperRectangle,
    LengthBreakdown,
    PatternSet,
    join,
    log2_gamma,
    pair_gains,
    replacement_gain,
    total_bits,
    universal_int,
)

__all__ = [
    "CandidateStore",
    "MergeStep",
    "MinerConfig",
    "MiningResult",
    "initial_candidates",
    "join",
    "mine",
    "prune",
]

log = logging.getLogger(__name__)

_BLOCK = 1 << 14


@dataclass(frozen=True)
class MinerConfig:
    """Parameters of a mining run.

    ``k_neighbors`` may be ``"sqrt"``, resolved against the number of objects.
    ``prune_top_n=None`` examines every pruning candidate.
    """

    k_neighbors: Union[int, str] = "sqrt"
    prune_top_n: Optional[int] = None
    epsilon: float = 0.5
    enable_pruning: bool = True
    prune_at_end: bool = False
    knn_propagate: bool = False

    def __post_init__(self):
        if not isinstance(self.k_neighbors, str) and self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if self.prune_top_n is not None and self.prune_top_n < 1:
            raise ValueError("prune_top_n must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class MergeStep:
    kind: str  # "merge" or "prune"
    parts: tuple
    new_id: int
    gain: float
    n_patterns: int
    n_candidates: int
    total_bits: float


@dataclass
class MiningResult:
    patterns: PatternSet
    pattern_ids: tuple
    total_bits: LengthBreakdown
    baseline: LengthBreakdown
    trace: list
    elapsed: float
    n_initial_candidates: int = 0

    @property
    def compression_ratio(self) -> float:
        return self.total_bits.total_bits / self.baseline.total_bits


@dataclass
class CandidateStore:
    """Candidate pairs with cached gains, popped by decreasing gain.

    Equal gains are resolved in favour of the larger ``(j, k)`` pair, i.e.
    candidates involving more recently created patterns come first.
    """

    j: np.ndarray
    k: np.ndarray
    gain: np.ndarray
    _order: np.ndarray = field(init=False, repr=False)
    _pos: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        self.j = np.asarray(self.j, dtype=np.int64)
        self.k = np.asarray(self.k, dtype=np.int64)
        self.gain = np.asarray(self.gain, dtype=float)
        self._order = np.lexsort((-self.k, -self.j, -self.gain))

    def __len__(self):
        return self._order.size - self._pos

    def pairs(self) -> set:
        return {(int(a), int(b)) for a, b in zip(self.j, self.k)}

    def pop_largest_gain(self):
        """Return ``(j, k, gain)`` of the best remaining entry, or ``None``."""
        if self._pos >= self._order.size:
            return None
        i = self._order[self._pos]
        self._pos += 1
        return int(self.j[i]), int(self.k[i]), float(self.gain[i])


class _Patterns:
    """Flat storage of all patterns ever created during a run."""

    def __init__(self, cells, n_objects: int, bins: np.ndarray):
        c = len(cells)
        cap = 2 * c + 1
        dim = len(bins)
        self.lower = np.zeros((cap, dim), dtype=np.int64)
        self.upper = np.zeros((cap, dim), dtype=np.int64)
        self.usage = np.zeros(cap, dtype=np.int64)
        self.log_size = np.zeros(cap)
        self.alive = np.zeros(cap, dtype=bool)
        self.covers = [None] * cap
        self.n = 0
        self.m = 0
        self.n_objects = n_objects
        self.log2_table = np.log2(np.arange(1, int(bins.max()) + 2, dtype=float))
        self.log2_table = np.concatenate([[0.0], self.log2_table])
        for cell in cells:
            self.add(np.array(cell.coords), np.array(cell.coords), cell.cover)

    def grow(self):
        extra = self.lower.shape[0]
        self.lower = np.concatenate([self.lower, np.zeros_like(self.lower)])
        self.upper = np.concatenate([self.upper, np.zeros_like(self.upper)])
        self.usage = np.concatenate([self.usage, np.zeros(extra, dtype=np.int64)])
        self.log_size = np.concatenate([self.log_size, np.zeros(extra)])
        self.alive = np.concatenate([self.alive, np.zeros(extra, dtype=bool)])
        self.covers.extend([None] * extra)

    def side_log(self, lower, upper):
        return self.log2_table[upper - lower + 1].sum(axis=-1)

    def add(self, lower, upper, cover) -> int:
        if self.n == self.lower.shape[0]:
            self.grow()
        i = self.n
        self.lower[i] = lower
        self.upper[i] = upper
        self.covers[i] = cover
        self.usage[i] = cover.size
        self.log_size[i] = self.side_log(np.asarray(lower), np.asarray(upper))
        self.alive[i] = True
        self.n += 1
        self.m += 1
        return i

    def replace(self, ids, lower, upper) -> int:
        cover = np.concatenate([self.covers[i] for i in ids])
        for i in ids:
            self.alive[i] = False
            self.covers[i] = None
        self.m -= len(ids)
        return self.add(lower, upper, cover)

    def live_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive[: self.n])

    def gains(self, m, j, k, ctx) -> np.ndarray:
        lo = np.minimum(self.lower[j], self.lower[k])
        hi = np.maximum(self.upper[j], self.upper[k])
        s_join = self.side_log(lo, hi)
        return pair_gains(m, self.usage[j], self.usage[k], self.log_size[j], self.log_size[k], s_join, ctx)

    def breakdown(self, ctx) -> LengthBreakdown:
        ids = self.live_ids()
        return LengthBreakdown(
            model_bits=ctx.grid_bits + universal_int(len(ids)) + len(ids) * ctx.pattern_bits,
            header_bits=universal_int(self.n_objects),
            data_bits=_plugin_bits(self.usage[ids], ctx.epsilon),
            residual_bits=float(np.dot(self.usage[ids], self.log_size[ids])),
        )

    def rectangle(self, i) -> HyperRectangle:
        return HyperRectangle(tuple(self.lower[i]), tuple(self.upper[i]), self.covers[i])


def _plugin_bits(usages, eps) -> float:
    u = np.asarray(usages, dtype=float)
    m = u.size
    return float(log2_gamma(u.sum() + eps * m) - log2_gamma(eps * m) - np.sum(log2_gamma(u + eps) - log2_gamma(eps)))


def _knn_pairs(coords: np.ndarray, k: int):
    """Unordered pairs (i, j), i < j, linking each point to its k nearest others.

    Distance ties are broken by the smaller index, so the result does not depend
    on the search structure.
    """
    c = coords.shape[0]
    if c < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    k = min(k, c - 1)
    pts = coords.astype(float)
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=k + 1)
    radius = np.atleast_2d(dist)[:, -1] * (1 + 1e-9) + 1e-9
    balls = tree.query_ball_point(pts, r=radius)
    src, dst = [], []
    for i, ball in enumerate(balls):
        ball = np.asarray(ball, dtype=np.int64)
        ball = ball[ball != i]
        d2 = ((coords[ball] - coords[i]) ** 2).sum(axis=1)
        nearest = ball[np.lexsort((ball, d2))[:k]]
        src.append(np.full(nearest.size, i, dtype=np.int64))
        dst.append(nearest)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    keys = np.unique(lo * c + hi)
    return keys // c, keys % c


def initial_candidates(cells, k: int, ctx: Optional[EncodingContext] = None) -> CandidateStore:
    """Candidate pairs between each elementary cell and its k nearest cells.

    Gains are filled in when ``ctx`` is given, otherwise left at zero.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    coords = np.array([cell.coords for cell in cells], dtype=np.int64).reshape(len(cells), -1)
    j, kk = _knn_pairs(coords, k)
    if ctx is None or j.size == 0:
        return CandidateStore(j, kk, np.zeros(j.size))
    store = _Patterns(cells, ctx.n_objects, ctx.bins)
    return CandidateStore(j, kk, store.gains(store.m, j, kk, ctx))


class _Neighbours:
    """Neighbour sets inherited through merges (optional candidate restriction)."""

    def __init__(self, n_cells, j, k):
        self.sets = {i: set() for i in range(n_cells)}
        for a, b in zip(j.tolist(), k.tolist()):
            self.sets[a].add(b)
            self.sets[b].add(a)
        self.parent = {}

    def find(self, i):
        root = i
        while root in self.parent:
            root = self.parent[root]
        while i in self.parent and self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def merge(self, parts, new):
        merged = set()
        for p in parts:
            merged |= self.sets.pop(p, set())
            self.parent[p] = new
        self.sets[new] = {self.find(x) for x in merged} - {new}
        for x in self.sets[new]:
            if x in self.sets:
                self.sets[x] = {self.find(y) for y in self.sets[x]}
                self.sets[x].add(new)
        return np.array(sorted(self.sets[new]), dtype=np.int64)


class _Run:
    skip_hopeless = True

    def __init__(self, ctx: EncodingContext, cfg: MinerConfig, cells, patterns=None):
        self.cfg = cfg
        self.ctx = ctx
        self.cells = cells
        self.pats = _Patterns(cells, ctx.n_objects, ctx.bins)
        for i, h in enumerate(patterns or ()):
            self.pats.upper[i] = h.upper
            self.pats.log_size[i] = h.log_size
        self.baseline = self.pats.breakdown(self.ctx)
        self.total = self.baseline.total_bits
        self.trace = []
        self.neighbours = None
        self._lnm_cache = {}

    def record(self, kind, parts, new, gain, n_candidates):
        self.total -= gain
        self.trace.append(MergeStep(kind, tuple(int(p) for p in parts), int(new), float(gain),
                                    self.pats.m, int(n_candidates), self.total))

    def merge_pending(self, pending):
        """Turn buffered ``(new_id, partner_ids)`` entries into a scored store."""
        pats = self.pats
        if not pending:
            return CandidateStore([], [], [])
        a = np.concatenate([np.full(p.size, i, dtype=np.int64) for i, p in pending])
        b = np.concatenate([p for _, p in pending])
        keep = pats.alive[a] & pats.alive[b] & (a != b)
        a, b = a[keep], b[keep]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = np.unique(lo * pats.n + hi)
        j, k = keys // pats.n, keys % pats.n
        if j.size == 0 or pats.m < 2:
            return CandidateStore([], [], [])
        return CandidateStore(j, k, pats.gains(pats.m, j, k, self.ctx))

    def run(self) -> MiningResult:
        cfg = self.cfg
        pats = self.pats
        start = time.perf_counter()
        k = resolve_count(cfg.k_neighbors, pats.n_objects)
        store = initial_candidates(self.cells, k, self.ctx)
        n_initial = len(store)
        if cfg.knn_propagate:
            self.neighbours = _Neighbours(len(self.cells), store.j, store.k)
        log.debug("%d elementary cells, %d initial candidates", pats.m, n_initial)

        while len(store) > 0:
            pending = []
            n_cand = len(store)
            while True:
                entry = store.pop_largest_gain()
                if entry is None or entry[2] <= 0:
                    break
                j, kk, _ = entry
                if not (pats.alive[j] and pats.alive[kk]):
                    continue
                gain = float(pats.gains(pats.m, np.array([j]), np.array([kk]), self.ctx)[0])
                if gain <= 0:
                    continue
                lo = np.minimum(pats.lower[j], pats.lower[kk])
                hi = np.maximum(pats.upper[j], pats.upper[kk])
                new = pats.replace([j, kk], lo, hi)
                pending.append((new, self.partners_after_merge([j, kk], new)))
                self.record("merge", (j, kk), new, gain, n_cand)
            if cfg.enable_pruning and not cfg.prune_at_end:
                for parts, new in self.prune():
                    pending.append((new, self.partners_after_merge(parts, new)))
            store = self.merge_pending(pending)
            log.debug("|H| = %d, %d new candidates", pats.m, len(store))

        if cfg.enable_pruning and cfg.prune_at_end:
            for _ in self.prune():
                pass

        ids = pats.live_ids()
        patterns = PatternSet([pats.rectangle(i) for i in ids])
        breakdown = total_bits(patterns, self.ctx)
        return MiningResult(
            patterns=patterns,
            pattern_ids=tuple(int(i) for i in ids),
            total_bits=breakdown,
            baseline=self.baseline,
            trace=self.trace,
            elapsed=time.perf_counter() - start,
            n_initial_candidates=n_initial,
        )

    def partners_after_merge(self, parts, new):
        if self.neighbours is not None:
            return self.neighbours.merge(parts, new)
        ids = self.pats.live_ids()
        return ids[ids != new]

    # -- pruning -----------------------------------------------------------

    def _gain_headroom(self, m):
        """Largest value, over set sizes 2..m, of the size-dependent part of a pair gain."""
        if m in self._lnm_cache:
            return self._lnm_cache[m]
        eps, n = self.ctx.epsilon, self.ctx.n_objects
        ms = np.arange(2, m + 1, dtype=float)
        ln = np.array([universal_int(int(x)) - universal_int(int(x) - 1) for x in ms])
        f = (log2_gamma(n + eps * ms) - log2_gamma(n + eps * (ms - 1))
             + log2_gamma(eps * (ms - 1)) - log2_gamma(eps * ms))
        c = ln + f
        out = (float(c[-1]), float(c.max()), float(ln.max()), float(f.max()))
        self._lnm_cache[m] = out
        return out

    def prune(self):
        """Run pruning passes until the pattern count stops decreasing.

        Yields ``(replaced_ids, new_id)`` for every committed replacement.
        """
        pats = self.pats
        while pats.m >= 3:
            m_before = pats.m
            yield from self._prune_pass()
            if pats.m >= m_before:
                break

    def _prune_pass(self):
        pats, ctx, cfg = self.pats, self.ctx, self.cfg
        ids = pats.live_ids()
        p = ids.size
        m0 = pats.m
        lower, upper = pats.lower[ids], pats.upper[ids]
        contains = _ContainmentIndex(lower, upper, ctx.bins)

        # all pairs, by decreasing gain at the start of the pass
        a, b = np.triu_indices(p, k=1)
        gains = pats.gains(m0, ids[a], ids[b], ctx)
        order = np.lexsort((-ids[b], -ids[a], -gains))
        a, b, gains = a[order], b[order], gains[order]

        c_now, c_max, ln_max, f_max = self._gain_headroom(m0)
        # upper bound on what absorbing one pattern h can add, as A(h) - usg(h) * log size(join)
        bound = _AbsorbBound(self._absorb_potential(ids, ln_max, f_max), pats.usage[ids].astype(float))

        budget = cfg.prune_top_n
        pos = 0
        while pos < a.size and (budget is None or budget > 0):
            sl = slice(pos, min(pos + _BLOCK, a.size))
            ba, bb, bg = a[sl], b[sl], gains[sl]
            lo = np.minimum(lower[ba], lower[bb])
            hi = np.maximum(upper[ba], upper[bb])
            member = contains.count(lo, hi) >= 3
            pos = sl.stop
            if budget is not None or not self.skip_hopeless:
                hit = np.flatnonzero(member)[:budget]
                if budget is not None:
                    budget -= hit.size
                for t in hit:
                    j, k = int(ids[ba[t]]), int(ids[bb[t]])
                    if pats.alive[j] and pats.alive[k]:
                        committed = self._extend_and_commit(j, k, lo[t], hi[t])
                        if committed is not None:
                            yield committed
                continue
            # skip candidates that cannot reach a positive gain whatever they absorb
            s_join = pats.side_log(lo, hi)
            ub = bg - c_now + c_max + bound.total(s_join)
            t = -1
            while True:
                nxt = np.flatnonzero(member[t + 1:] & (ub[t + 1:] > 0))
                if nxt.size == 0:
                    break
                t += 1 + int(nxt[0])
                j, k = int(ids[ba[t]]), int(ids[bb[t]])
                if not (pats.alive[j] and pats.alive[k]):
                    continue
                committed = self._extend_and_commit(j, k, lo[t], hi[t])
                if committed is not None:
                    yield committed
                    new = committed[1]
                    ub += np.maximum(0.0, self._absorb_potential(new, ln_max, f_max) - pats.usage[new] * s_join)

    def _absorb_potential(self, ids, ln_max, f_max):
        """A(h) such that absorbing h into a join of log size s adds at most A(h) - usg(h) * s."""
        pats, ctx = self.pats, self.ctx
        eps, n = ctx.epsilon, ctx.n_objects
        u = pats.usage[ids].astype(float)
        return (ln_max + ctx.pattern_bits + f_max + log2_gamma(n + eps) - log2_gamma(n - u + eps)
                - log2_gamma(u + eps) + log2_gamma(eps) + u * pats.log_size[ids])

    def _extend_and_commit(self, j, k, lo, hi):
        pats, ctx = self.pats, self.ctx
        live = pats.live_ids()
        inside = np.all((pats.lower[live] >= lo) & (pats.upper[live] <= hi), axis=1)
        inside = live[inside]
        inside = inside[(inside != j) & (inside != k)]
        s_join = float(pats.side_log(lo, hi))
        m = pats.m
        usages = [int(pats.usage[j]), int(pats.usage[k])]
        sizes = [float(pats.log_size[j]), float(pats.log_size[k])]
        best = replacement_gain(m, usages, sizes, s_join, ctx)
        absorbed = []
        for h in inside.tolist():
            trial = replacement_gain(m, usages + [int(pats.usage[h])], sizes + [float(pats.log_size[h])], s_join, ctx)
            if trial > best:
                usages.append(int(pats.usage[h]))
                sizes.append(float(pats.log_size[h]))
                absorbed.append(h)
                best = trial
        if best <= 0:
            return None
        parts = [j, k] + absorbed
        new = pats.replace(parts, lo, hi)
        self.record("prune", parts, new, best, 0)
        return parts, new


class _AbsorbBound:
    """Sum over patterns of max(0, A(h) - usg(h) * s) for a query threshold s."""

    def __init__(self, absorb, usage):
        thresh = absorb / usage
        order = np.argsort(-thresh)
        self.thresh = thresh[order]
        self.cum_a = np.concatenate([[0.0], np.cumsum(absorb[order])])
        self.cum_u = np.concatenate([[0.0], np.cumsum(usage[order])])
        self._neg = -self.thresh

    def total(self, s):
        cnt = np.searchsorted(self._neg, -s, side="left")
        return self.cum_a[cnt] - s * self.cum_u[cnt]


class _ContainmentIndex:
    """Counts, for many query boxes at once, the patterns lying inside each box."""

    def __init__(self, lower, upper, bins):
        p = lower.shape[0]
        self.words = (p + 63) // 64
        pad = self.words * 64 - p
        self.geq = []
        self.leq = []
        for i, b in enumerate(bins):
            b = int(b)
            vals = np.arange(b)
            ge = lower[:, i][None, :] >= vals[:, None]
            le = upper[:, i][None, :] <= vals[:, None]
            self.geq.append(self._pack(ge, pad))
            self.leq.append(self._pack(le, pad))

    @staticmethod
    def _pack(mask, pad):
        if pad:
            mask = np.concatenate([mask, np.zeros((mask.shape[0], pad), dtype=bool)], axis=1)
        return np.packbits(mask, axis=1, bitorder="little").view(np.uint64)

    def count(self, lo, hi) -> np.ndarray:
        acc = self.geq[0][lo[:, 0]] & self.leq[0][hi[:, 0]]
        for i in range(1, len(self.geq)):
            acc &= self.geq[i][lo[:, i]]
            acc &= self.leq[i][hi[:, i]]
        return np.bitwise_count(acc).sum(axis=1)


def mine(d: DiscretizedDataset, cfg: Optional[MinerConfig] = None) -> MiningResult:
    """Mine a set of hyper-rectangles minimising the total description length."""
    cfg = cfg or MinerConfig()
    ctx = EncodingContext(d.grid, d.n_objects, cfg.epsilon)
    return _Run(ctx, cfg, elementary_cells(d)).run()


def prune(d: DiscretizedDataset, patterns: PatternSet, top_n: Optional[int] = None,
          ctx: Optional[EncodingContext] = None) -> PatternSet:
    """Apply only the multi-pattern merging step to an existing pattern set.

    Returns the input unchanged (same order) when nothing is merged; otherwise
    untouched patterns keep their order and new ones are appended.
    """
    ctx = ctx or EncodingContext(d.grid, d.n_objects)
    patterns = PatternSet(patterns)
    if not patterns.is_partition(d.n_objects):
        raise ValueError("pattern covers do not partition the objects")
    cells = [ElementaryCell(h.lower, h.cover) for h in patterns]
    run = _Run(ctx, MinerConfig(prune_top_n=top_n, epsilon=ctx.epsilon), cells, patterns)
    for _ in run.prune():
        pass
    ids = run.pats.live_ids()
    return PatternSet([patterns[i] if i < len(patterns) else run.pats.rectangle(i) for i in ids])
