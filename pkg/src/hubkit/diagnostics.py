"""Hubness measurement: k-occurrence counts, their skewness, and an EMD
estimator for distribution gaps between embedding sets.

``N_k(t_j)`` counts how many queries retrieve target j inside their top-k.
Under hub-free retrieval the counts are near-uniform; hubs concentrate mass
on a few targets and push the distribution's skewness up.  The EMD estimator
quantifies how far apart two embedding clouds sit, which is what decides
whether a bank is a usable stand-in for unavailable queries.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import EmbeddingSet, RankMatrix, SimilarityMatrix
from .errors import DataError, DimMismatch, KOutOfRange, ZeroVarianceWarning
from .variants import hn


@dataclass(frozen=True)
class KOccurrence:
    """Per-target retrieval counts at neighborhood size k."""

    k: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 1:
            raise DataError(f"counts must be a nonempty vector, got shape {counts.shape}")
        if np.any(counts < 0):
            raise DataError("counts must be nonnegative")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if self.k < 1:
            raise KOutOfRange(self.k, counts.size)


@dataclass(frozen=True)
class EmdConfig:
    """Subsampled-assignment EMD estimator settings.

    Each repeat draws equal-size subsamples from both sets (without
    replacement), solves the assignment exactly, and reports cost per point;
    the estimate is the mean over repeats.  Per-repeat RNG streams are
    derived from (seed, repeat index), so the estimate is deterministic.
    """

    subsample: int = 256
    repeats: int = 8
    seed: int = 0
    ground_cost: str = "euclidean"

    def __post_init__(self):
        if self.subsample < 1:
            raise DataError(f"subsample must be >= 1, got {self.subsample}")
        if self.repeats < 1:
            raise DataError(f"repeats must be >= 1, got {self.repeats}")
        if self.ground_cost not in ("euclidean", "one_minus_cosine"):
            raise DataError(f"unknown ground cost {self.ground_cost!r}")


def k_occurrence(ranks: RankMatrix, k: int) -> KOccurrence:
    """Count, per target, the queries whose top-k contains it."""
    if not 1 <= k <= ranks.cols:
        raise KOutOfRange(k, ranks.cols)
    counts = np.bincount(ranks.order[:, :k].ravel(), minlength=ranks.cols)
    return KOccurrence(k=k, counts=counts)


def skewness(occ: KOccurrence) -> float:
    """Third standardized moment of the counts (population convention).

    A constant distribution has no defined skewness; by convention it is
    reported as 0 with a ZeroVarianceWarning.
    """
    x = occ.counts.astype(np.float64)
    centered = x - x.mean()
    m2 = np.mean(centered**2)
    if m2 == 0.0:
        warnings.warn("constant k-occurrence counts; skewness reported as 0", ZeroVarianceWarning)
        return 0.0
    m3 = np.mean(centered**3)
    return float(m3 / m2**1.5)


def _ground_cost(X: np.ndarray, Y: np.ndarray, kind: str) -> np.ndarray:
    if kind == "euclidean":
        return cdist(X, Y)
    Xn = X / np.linalg.norm(X, axis=1, keepdims=True)
    Yn = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    return 1.0 - Xn @ Yn.T


def emd(X: EmbeddingSet, Y: EmbeddingSet, cfg: EmdConfig = EmdConfig()) -> float:
    """Average per-point optimal-assignment cost between subsamples of X and Y.

    The assignment is solved exactly on the min-cost orientation by the
    variants module's Hungarian solver.
    """
    if X.dim != Y.dim:
        raise DimMismatch(X.dim, Y.dim)
    size = min(cfg.subsample, X.count, Y.count)
    total = 0.0
    for repeat in range(cfg.repeats):
        rng = np.random.default_rng((cfg.seed, repeat))
        xi = rng.choice(X.count, size=size, replace=False)
        yi = rng.choice(Y.count, size=size, replace=False)
        cost = _ground_cost(X.data[xi], Y.data[yi], cfg.ground_cost)
        plan = hn(SimilarityMatrix(-cost, row_role=X.role, col_role=Y.role))
        total += float((plan.pi * cost).sum()) / size
    return total / cfg.repeats
