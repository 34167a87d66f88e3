"""Softmax-family normalizations of a similarity matrix.

The inverted softmax rescales each target column by the column's softmax
denominator over queries.  Written additively, that is the same as adding a
per-target compensation ``h(t_j) = -tau * logsumexp_i(S_ij / tau)`` to every
score and exponentiating, so a popular ("hub") target with a large
denominator is demoted for every query at once.  The dynamic and dual
variants replace the query set in the denominator with query/target banks.

Sign convention used throughout hubkit: compensations are stored so that the
normalized score is ``S + h``.  Subtractive presentations of the same
quantity are the identical number with the opposite stored sign.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .core import RankMatrix, SimilarityMatrix, row_argsort_desc
from .errors import ColMismatch, KOutOfRange, LengthMismatch, NonFiniteInput, NonPositiveTau


@dataclass(frozen=True)
class HubnessVector:
    """Per-target (or per-query) additive compensation scalars.

    ``values[j]`` is added to column j of a similarity matrix; the additive
    convention is recorded explicitly so serialized vectors cannot be applied
    with the wrong sign.
    """

    values: np.ndarray
    temperature: float
    convention: str = "additive"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise NonFiniteInput(f"hubness values must be 1-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteInput("hubness values contain NaN or Inf")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.convention != "additive":
            raise NonFiniteInput(f"unsupported convention {self.convention!r}")


@dataclass(frozen=True)
class DualISConfig:
    """Temperatures for the two inverted-softmax factors.

    The product of the factors collapses to a single softmax at the harmonic
    scale ``lam = tau1*tau2/(tau1+tau2)``, always below min(tau1, tau2).
    """

    tau1: float = 0.02
    tau2: float = 0.02

    def __post_init__(self):
        if self.tau1 <= 0:
            raise NonPositiveTau(self.tau1)
        if self.tau2 <= 0:
            raise NonPositiveTau(self.tau2)

    @property
    def lam(self) -> float:
        return self.tau1 * self.tau2 / (self.tau1 + self.tau2)


@dataclass(frozen=True)
class DISConfig:
    """Neighborhood size for selecting the compensated target subset."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise KOutOfRange(self.k, self.k)


def inverted_softmax(S: SimilarityMatrix, tau: float = 0.02) -> SimilarityMatrix:
    """Column-wise softmax over queries at temperature ``tau``.

    Output entry (i, j) is exp(S_ij/tau) / sum_u exp(S_uj/tau); every column
    sums to 1.  Columns are max-shifted before exponentiation so no positive
    argument ever reaches exp.
    """
    if tau <= 0:
        raise NonPositiveTau(tau)
    return S.with_values(softmax(S.values / tau, axis=0))


def is_hubness(S_bank_targets: SimilarityMatrix, tau: float = 0.02) -> HubnessVector:
    """Per-target compensation from bank-vs-target similarities.

    ``values[j] = -tau * logsumexp_i(S_ij / tau)``: adding it to a column and
    exponentiating at the same temperature reproduces the inverted softmax
    with the bank in the denominator.
    """
    if tau <= 0:
        raise NonPositiveTau(tau)
    values = -tau * logsumexp(S_bank_targets.values / tau, axis=0)
    return HubnessVector(values, temperature=tau)


def apply_hubness(S: SimilarityMatrix, h: HubnessVector) -> SimilarityMatrix:
    """Add a per-target compensation to every row of S."""
    if h.values.shape[0] != S.cols:
        raise LengthMismatch(f"hubness vector length {h.values.shape[0]} vs {S.cols} columns")
    return S.with_values(S.values + h.values[None, :])


def dis_subset(S_bank_targets: SimilarityMatrix, cfg: DISConfig = DISConfig()) -> np.ndarray:
    """Mark the targets appearing in the top-k of at least one bank row.

    Returns a boolean mask of length n.  Ties inside a row are broken by
    ascending column index, the same convention as ranking.
    """
    n = S_bank_targets.cols
    if cfg.k > n:
        raise KOutOfRange(cfg.k, n)
    order = row_argsort_desc(S_bank_targets).order
    mask = np.zeros(n, dtype=bool)
    mask[np.unique(order[:, : cfg.k])] = True
    return mask


def dynamic_inverted_softmax(
    S: SimilarityMatrix,
    S_bank_targets: SimilarityMatrix,
    cfg: DISConfig = DISConfig(),
    tau: float = 0.02,
) -> SimilarityMatrix:
    """Inverted softmax restricted to bank-frequent targets.

    Columns in the selected subset are scaled by the bank column's softmax
    denominator; the rest keep the raw similarity.  The two column families
    therefore live on different scales inside one row; that is how the
    formula is defined and it is applied as such.
    """
    if tau <= 0:
        raise NonPositiveTau(tau)
    if S.cols != S_bank_targets.cols:
        raise ColMismatch(f"{S.cols} target columns vs {S_bank_targets.cols} bank columns")
    mask = dis_subset(S_bank_targets, cfg)
    # exp(S/tau) / colsum(exp(S_bank/tau)), evaluated as a single shifted exp.
    # The query scores are not part of the bank denominator, so the ratio may
    # exceed 1; at the supported temperatures the exponent stays well inside
    # float64 range.
    log_denominator = logsumexp(S_bank_targets.values / tau, axis=0)
    scaled = np.exp(S.values / tau - log_denominator[None, :])
    out = S.values.copy()
    out[:, mask] = scaled[:, mask]
    return S.with_values(out)


def dual_inverted_softmax(
    S: SimilarityMatrix,
    S_qbank_targets: SimilarityMatrix,
    S_tbank_targets: SimilarityMatrix,
    cfg: DualISConfig = DualISConfig(),
) -> SimilarityMatrix:
    """Product of two inverted-softmax factors, one per bank.

    Factor one scales column j by the query-bank denominator at tau1, factor
    two by the target-bank denominator at tau2.  The product equals
    ``exp((S - h_bq - h_bt)/lam)`` where the ``h`` terms are lam-scaled
    logsumexp compensations, so rankings match the additive form at scale
    ``cfg.lam``.
    """
    if S_qbank_targets.cols != S.cols:
        raise ColMismatch(f"{S.cols} target columns vs {S_qbank_targets.cols} query-bank columns")
    if S_tbank_targets.cols != S.cols:
        raise ColMismatch(f"{S.cols} target columns vs {S_tbank_targets.cols} target-bank columns")
    log_q = logsumexp(S_qbank_targets.values / cfg.tau1, axis=0)
    log_t = logsumexp(S_tbank_targets.values / cfg.tau2, axis=0)
    log_out = (S.values / cfg.tau1 - log_q[None, :]) + (S.values / cfg.tau2 - log_t[None, :])
    return S.with_values(np.exp(log_out))


def dual_is_compensations(
    S_qbank_targets: SimilarityMatrix,
    S_tbank_targets: SimilarityMatrix,
    cfg: DualISConfig = DualISConfig(),
) -> tuple[HubnessVector, HubnessVector]:
    """The additive decomposition of the dual inverted softmax.

    Returns per-target vectors (h_bq, h_bt) with
    ``h[j] = -lam * logsumexp(bank column j / tau)``; the product form above
    equals ``exp((S + h_bq + h_bt) / lam)`` entrywise.
    """
    lam = cfg.lam
    h_q = -lam * logsumexp(S_qbank_targets.values / cfg.tau1, axis=0)
    h_t = -lam * logsumexp(S_tbank_targets.values / cfg.tau2, axis=0)
    return HubnessVector(h_q, temperature=lam), HubnessVector(h_t, temperature=lam)
