"""Description lengths, in bits, of hyper-rectangle pattern sets.

The total length of a dataset encoded with a pattern set is

    model bits                 grid shape + number of patterns + their boundaries
  + L_N(n)                     number of objects
  + plug-in data bits          which pattern encodes each object (prequential code)
  + residual bits              position of each object inside its pattern

Every quantity is a real number of bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .dataset import DiscretizationGrid

LOG2_C0 = math.log2(2.865064)
_LN2 = math.log(2.0)


@lru_cache(maxsize=65536)
def universal_int(n: int) -> float:
    """Rissanen's universal code length for a positive integer.

    Sums log2 n, log2 log2 n, ... while the terms stay positive, plus log2 c0.

    >>> round(universal_int(8), 4)
    6.7678
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"universal code needs a positive integer, got {n!r}")
    bits = LOG2_C0
    term = math.log2(n)
    while term > 0:
        bits += term
        term = math.log2(term)
    return bits


def log2_gamma(x):
    return gammaln(x) / _LN2


def plugin_data_bits(usages: Iterable[int], epsilon: float = 0.5) -> float:
    """Length of the sequence of pattern codes under the prequential plug-in code.

    Parameters
    ----------
    usages : iterable of int
        Usage of every pattern in the set, zeros allowed.
    epsilon : float
        Pseudo-count given to each pattern before the first symbol.
    """
    u = np.asarray(list(usages), dtype=float)
    if u.size == 0:
        raise ValueError("need at least one pattern")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if np.any(u < 0):
        raise ValueError("usages must be non-negative")
    m = u.size
    bits = (
        log2_gamma(u.sum() + epsilon * m)
        - log2_gamma(epsilon * m)
        - np.sum(log2_gamma(u + epsilon) - log2_gamma(epsilon))
    )
    return max(float(bits), 0.0)


@dataclass(frozen=True)
class HyperRectangle:
    """Box of interval indices, inclusive on both ends, with the objects it encodes."""

    lower: tuple
    upper: tuple
    cover: np.ndarray

    def __post_init__(self):
        lower = tuple(int(v) for v in self.lower)
        upper = tuple(int(v) for v in self.upper)
        if len(lower) != len(upper):
            raise ValueError("lower and upper bounds differ in dimension")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"empty box {lower}..{upper}")
        cover = np.unique(np.asarray(self.cover, dtype=np.int64))
        cover.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "cover", cover)

    @property
    def usage(self) -> int:
        return int(self.cover.size)

    @property
    def sizes(self) -> tuple:
        return tuple(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))

    @property
    def log_size(self) -> float:
        return float(sum(math.log2(s) for s in self.sizes))

    def contains(self, other: "HyperRectangle") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lower, self.upper, other.lower, other.upper))

    def same_box(self, other: "HyperRectangle") -> bool:
        return self.lower == other.lower and self.upper == other.upper

    def __eq__(self, other):
        if not isinstance(other, HyperRectangle):
            return NotImplemented
        return self.same_box(other) and np.array_equal(self.cover, other.cover)

    def __hash__(self):
        return hash((self.lower, self.upper, self.cover.tobytes()))


class PatternSet(tuple):
    """An ordered collection of hyper-rectangles; a plain tuple with helpers."""

    def __new__(cls, patterns: Sequence[HyperRectangle] = ()):
        return super().__new__(cls, tuple(patterns))

    @property
    def usages(self) -> np.ndarray:
        return np.array([h.usage for h in self], dtype=np.int64)

    def is_partition(self, n_objects: int) -> bool:
        if not self:
            return n_objects == 0
        allcov = np.concatenate([h.cover for h in self])
        return allcov.size == n_objects and np.array_equal(np.sort(allcov), np.arange(n_objects))

    def replace(self, removed: Sequence[HyperRectangle], added: HyperRectangle) -> "PatternSet":
        gone = {id(h) for h in removed}
        if len(gone) != len(removed) or not all(any(h is p for p in self) for h in removed):
            raise ValueError("pattern not in set")
        return PatternSet([h for h in self if id(h) not in gone] + [added])


@dataclass(frozen=True)
class EncodingContext:
    grid: DiscretizationGrid
    n_objects: int
    epsilon: float = 0.5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_objects < 1:
            raise ValueError("need at least one object")

    @property
    def bins(self) -> np.ndarray:
        return self.grid.bins

    @property
    def grid_bits(self) -> float:
        return universal_int(self.grid.n_attributes) + sum(universal_int(int(b)) for b in self.bins)

    @property
    def pattern_bits(self) -> float:
        """Cost of one pattern's boundaries: one of B(B+1)/2 positions per side."""
        b = self.bins.astype(float)
        return float(np.sum(np.log2(b * (b + 1) / 2)))


@dataclass(frozen=True)
class LengthBreakdown:
    model_bits: float
    header_bits: float
    data_bits: float
    residual_bits: float

    @property
    def total_bits(self) -> float:
        return self.model_bits + self.header_bits + self.data_bits + self.residual_bits

    def as_dict(self) -> dict:
        return {
            "model_bits": self.model_bits,
            "header_bits": self.header_bits,
            "data_bits": self.data_bits,
            "residual_bits": self.residual_bits,
            "total_bits": self.total_bits,
        }


def model_bits(patterns, ctx: EncodingContext) -> float:
    """Bits for the grid plus the pattern count and every pattern's boundaries.

    ``patterns`` may be a pattern set or just its size.
    """
    m = patterns if isinstance(patterns, (int, np.integer)) else len(patterns)
    if m < 1:
        raise ValueError("pattern set is empty")
    return ctx.grid_bits + universal_int(int(m)) + m * ctx.pattern_bits


def residual_bits(patterns: Iterable[HyperRectangle]) -> float:
    return float(sum(h.usage * h.log_size for h in patterns))


def total_bits(patterns: PatternSet, ctx: EncodingContext) -> LengthBreakdown:
    patterns = PatternSet(patterns)
    if not patterns.is_partition(ctx.n_objects):
        raise ValueError("pattern covers do not partition the objects")
    return LengthBreakdown(
        model_bits=model_bits(patterns, ctx),
        header_bits=universal_int(ctx.n_objects),
        data_bits=plugin_data_bits(patterns.usages, ctx.epsilon),
        residual_bits=residual_bits(patterns),
    )


def replacement_gain(
    m: int,
    usages: Sequence[int],
    log_sizes: Sequence[float],
    joined_log_size: float,
    ctx: EncodingContext,
) -> float:
    """Bits saved by replacing ``r`` patterns of an ``m``-pattern set with one box.

    The new box encodes the union of the replaced covers. ``usages`` and
    ``log_sizes`` describe the replaced patterns.
    """
    r = len(usages)
    if r < 1 or r > m:
        raise ValueError("invalid replacement")
    eps = ctx.epsilon
    n = ctx.n_objects
    after = m - r + 1
    u = np.asarray(usages, dtype=float)
    total_u = float(u.sum())
    gain = universal_int(m) - universal_int(after) + (r - 1) * ctx.pattern_bits
    gain += (log2_gamma(n + eps * m) - log2_gamma(eps * m)) - (log2_gamma(n + eps * after) - log2_gamma(eps * after))
    gain -= float(np.sum(log2_gamma(u + eps))) - (r - 1) * log2_gamma(eps)
    gain += log2_gamma(total_u + eps)
    gain += float(np.dot(u, np.asarray(log_sizes, dtype=float))) - total_u * joined_log_size
    return float(gain)


def pair_gains(m: int, uj, uk, sj, sk, s_join, ctx: EncodingContext) -> np.ndarray:
    """Vectorised gain of merging pairs in a set of ``m`` patterns.

    ``uj, uk`` are usages, ``sj, sk`` log2 sizes of the two patterns and
    ``s_join`` the log2 size of their join.
    """
    if m < 2:
        raise ValueError("merging needs at least two patterns")
    eps = ctx.epsilon
    n = ctx.n_objects
    const = (
        universal_int(m)
        - universal_int(m - 1)
        + ctx.pattern_bits
        + log2_gamma(n + eps * m)
        - log2_gamma(n + eps * (m - 1))
        + log2_gamma(eps * (m - 1))
        - log2_gamma(eps * m)
        + log2_gamma(eps)
    )
    uj = np.asarray(uj, dtype=float)
    uk = np.asarray(uk, dtype=float)
    data = log2_gamma(uj + uk + eps) - log2_gamma(uj + eps) - log2_gamma(uk + eps)
    resid = uj * np.asarray(sj) + uk * np.asarray(sk) - (uj + uk) * np.asarray(s_join)
    return const + data + resid


def join(h_j: HyperRectangle, h_k: HyperRectangle) -> HyperRectangle:
    """Smallest box containing both, encoding the union of their covers."""
    if len(h_j.lower) != len(h_k.lower):
        raise ValueError("dimension mismatch")
    lower = tuple(min(a, b) for a, b in zip(h_j.lower, h_k.lower))
    upper = tuple(max(a, b) for a, b in zip(h_j.upper, h_k.upper))
    return HyperRectangle(lower, upper, np.union1d(h_j.cover, h_k.cover))


def merge_gain(h_j: HyperRectangle, h_k: HyperRectangle, patterns: PatternSet, ctx: EncodingContext) -> float:
    """Bits saved by replacing ``h_j`` and ``h_k`` with their join. Positive is better."""
    if h_j is h_k:
        raise ValueError("cannot merge a pattern with itself")
    if not any(h is h_j for h in patterns) or not any(h is h_k for h in patterns):
        raise ValueError("pattern not in set")
    joined = join(h_j, h_k)
    return replacement_gain(len(patterns), [h_j.usage, h_k.usage], [h_j.log_size, h_k.log_size], joined.log_size, ctx)
