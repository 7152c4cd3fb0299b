"""Quality measures for mined pattern sets."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .dataset import DiscretizationGrid, DiscretizedDataset
from .mdl import LengthBreakdown, PatternSet


@dataclass
class EvalReport:
    compression_ratio: Optional[float]
    n_patterns: int
    pairwise_cover_jaccard: Optional[float] = None
    accuracy: Optional[float] = None
    jcd_h_t: Optional[float] = None
    jcd_t_h: Optional[float] = None
    runtime_seconds: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def csv_header(cls) -> list:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list:
        return ["" if v is None else v for v in asdict(self).values()]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.csv_header())
        w.writerow(self.csv_row())
        return buf.getvalue()


def compression_ratio(result, baseline: Optional[LengthBreakdown] = None) -> float:
    """Mined total length over the elementary-model total length.

    ``result`` is a `MiningResult` (its own baseline is used by default) or a
    `LengthBreakdown`.
    """
    total = getattr(result, "total_bits", result)
    if baseline is None:
        baseline = result.baseline
    total = total.total_bits if isinstance(total, LengthBreakdown) else float(total)
    base = baseline.total_bits if isinstance(baseline, LengthBreakdown) else float(baseline)
    assert base > 0, "baseline length must be positive"
    return total / base


def _area(lo, hi, eta):
    return float(np.prod(np.maximum(hi - lo, eta)))


def rect_jaccard(h1, h2, eta: float = 0.0) -> float:
    """Intersection area over the area of the join (smallest enclosing box).

    Boxes are ``(k, 2)`` arrays of ``[low, high]`` per dimension. Sides
    shorter than ``eta`` count as ``eta`` wide.
    """
    a = np.asarray(h1, dtype=float)
    b = np.asarray(h2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("boxes differ in dimension")
    if np.array_equal(a, b):
        return 1.0
    ilo = np.maximum(a[:, 0], b[:, 0])
    ihi = np.minimum(a[:, 1], b[:, 1])
    if np.any(ihi < ilo) or (eta == 0 and np.any(ihi <= ilo)):
        return 0.0
    jlo = np.minimum(a[:, 0], b[:, 0])
    jhi = np.maximum(a[:, 1], b[:, 1])
    denom = _area(jlo, jhi, eta)
    if denom == 0:
        return 0.0
    return _area(ilo, ihi, eta) / denom


def jcd(a: Sequence, b: Sequence, eta: float = 0.0) -> float:
    """Mean over boxes of ``a`` of the best Jaccard match in ``b``."""
    if len(a) == 0:
        raise ValueError("first box set is empty")
    if len(b) == 0:
        return 0.0
    return float(np.mean([max(rect_jaccard(x, y, eta) for y in b) for x in a]))


def real_boxes(patterns: PatternSet, grid: DiscretizationGrid) -> list:
    """Map index boxes back to ``(k, 2)`` arrays of real interval endpoints."""
    return [grid.bounds(h.lower, h.upper) for h in patterns]


def occurrence_sets(patterns: PatternSet, d: DiscretizedDataset) -> sparse.csr_matrix:
    """Boolean pattern-by-object matrix: objects whose cell lies inside each box."""
    rows = []
    for h in patterns:
        inside = np.all((d.cells >= np.array(h.lower)) & (d.cells <= np.array(h.upper)), axis=1)
        rows.append(sparse.csr_matrix(inside))
    if not rows:
        return sparse.csr_matrix((0, d.n_objects), dtype=bool)
    return sparse.vstack(rows).tocsr()


def _jaccard_matrix(occ: sparse.csr_matrix) -> np.ndarray:
    occ = occ.astype(np.int64)
    inter = (occ @ occ.T).toarray().astype(float)
    sizes = np.asarray(occ.sum(axis=1)).ravel().astype(float)
    union = sizes[:, None] + sizes[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, inter / union, 0.0)


def pairwise_cover_jaccard(patterns: PatternSet, d: DiscretizedDataset, top: int = 10) -> Optional[float]:
    """Average Jaccard similarity of occurrence sets over each pattern's closest partners.

    For every pattern the ``top`` most similar other patterns are taken; the
    resulting unordered pairs are deduplicated before averaging. ``None`` for
    fewer than two patterns.
    """
    if len(patterns) < 2:
        return None
    sim = _jaccard_matrix(occurrence_sets(patterns, d))
    p = sim.shape[0]
    pairs = set()
    for i in range(p):
        others = np.delete(np.arange(p), i)
        # most similar first, lower index on ties
        ranked = others[np.lexsort((others, -sim[i, others]))][:top]
        pairs.update((min(i, j), max(i, j)) for j in ranked.tolist())
    return float(np.mean([sim[i, j] for i, j in sorted(pairs)]))


def pattern_accuracy(patterns: PatternSet, labels, weighted: bool = False) -> float:
    """Share of a pattern's objects carrying its majority class, averaged over patterns."""
    if labels is None:
        raise ValueError("class labels are required")
    labels = np.asarray(labels)
    accs, weights = [], []
    for h in patterns:
        if h.usage == 0:
            continue
        _, counts = np.unique(labels[h.cover], return_counts=True)
        accs.append(counts.max() / h.usage)
        weights.append(h.usage)
    if not accs:
        raise ValueError("no non-empty patterns")
    return float(np.average(accs, weights=weights if weighted else None))


def evaluate(
    patterns: PatternSet,
    d: DiscretizedDataset,
    total: Optional[LengthBreakdown] = None,
    baseline: Optional[LengthBreakdown] = None,
    truth: Optional[Sequence] = None,
    labels=None,
    weighted: bool = False,
    runtime: Optional[float] = None,
) -> EvalReport:
    ratio = None
    if total is not None and baseline is not None:
        ratio = compression_ratio(total, baseline)
    report = EvalReport(ratio, len(patterns), pairwise_cover_jaccard(patterns, d), runtime_seconds=runtime)
    if labels is not None:
        report.accuracy = pattern_accuracy(patterns, labels, weighted)
    if truth is not None and len(truth) and len(patterns):
        mined = real_boxes(patterns, d.grid)
        report.jcd_h_t = jcd(mined, truth)
        report.jcd_t_h = jcd(truth, mined)
    return report
