"""Entropy-regularized optimal transport and Sinkhorn normalization.

The solver maximizes ``<S, pi> + tau * H(pi)`` over plans with prescribed row
and column marginals, where ``H(pi) = sum -pi_ij (log pi_ij - 1)``.  The
optimum has the form ``pi_ij = exp((S_ij + f_i + g_j) / tau)`` with dual
potentials f, g fixed by alternating row/column balancing.

Everything runs in the log domain: the multiplicative form exponentiates
``S / tau`` up front, which at the default tau = 0.01 means e^100-scale
intermediates; the log-domain updates only ever exponentiate max-shifted,
non-positive arguments.  The plan itself is materialized once at the end,
when every entry is bounded by its column marginal.

Ranking use: per row, ``pi`` is a monotone transform of ``S + g``, so adding
the column potential to the similarity matrix reproduces the plan's ranking
while the row potential cancels inside each row.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import SimilarityMatrix
from .errors import (
    ColMismatch,
    DataError,
    NonPositiveTau,
    RowMismatch,
    ShapeMismatch,
    ZeroMarginalEntry,
)
from .scaling import HubnessVector, apply_hubness


@dataclass(frozen=True)
class Marginals:
    """Row distribution ``a`` (length m) and column distribution ``b`` (length n).

    ``a=None`` leaves the rows unconstrained: the feasible set is then only
    the column constraint, the degenerate case whose entropic optimum is the
    inverted softmax.
    """

    a: np.ndarray | None
    b: np.ndarray

    def __post_init__(self):
        for name in ("a", "b"):
            vec = getattr(self, name)
            if vec is None:
                if name == "b":
                    raise DataError("column marginal b is required")
                continue
            vec = np.asarray(vec, dtype=np.float64)
            if vec.ndim != 1 or vec.size < 1:
                raise ShapeMismatch(f"marginal {name} must be a nonempty vector")
            if np.any(vec <= 0.0) or not np.all(np.isfinite(vec)):
                raise ZeroMarginalEntry(f"marginal {name} must have finite entries > 0")
            if abs(vec.sum() - 1.0) > 1e-12:
                raise DataError(f"marginal {name} must sum to 1, got {vec.sum()!r}")
            vec = vec.copy()
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)

    @classmethod
    def uniform(cls, m: int, n: int) -> "Marginals":
        return cls(a=np.full(m, 1.0 / m), b=np.full(n, 1.0 / n))

    @classmethod
    def column_only(cls, n: int) -> "Marginals":
        return cls(a=None, b=np.full(n, 1.0 / n))


@dataclass(frozen=True)
class SinkhornConfig:
    """Solver settings.

    tol = 0 runs exactly ``max_iters`` sweeps; a positive tol stops early
    once the plan's marginal violation drops below it.  Feasibility-critical
    callers use tol=1e-8 with a few thousand sweeps; the 10-sweep default is
    the normalization operating point.
    """

    tau: float = 0.01
    max_iters: int = 10
    tol: float = 0.0
    log_domain: bool = True

    def __post_init__(self):
        if self.tau <= 0:
            raise NonPositiveTau(self.tau)
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol < 0:
            raise DataError(f"tol must be >= 0, got {self.tol}")
        if not self.log_domain:
            raise DataError("only the log-domain solver is provided")


@dataclass(frozen=True)
class TransportPlan:
    """A nonnegative plan with the dual potentials that produced it.

    For entropic plans, ``pi = exp((S + f + g) / tau)`` exactly as stored
    (the free normalizing constant is absorbed into f).  Plans from
    non-entropic solvers carry ``f = g = None`` and ``tau = 0``.
    """

    pi: np.ndarray
    f: np.ndarray | None
    g: np.ndarray | None
    tau: float
    iterations_run: int
    marginal_violation: float
    converged: bool = True

    def __post_init__(self):
        pi = np.ascontiguousarray(self.pi, dtype=np.float64)
        if pi.ndim != 2 or pi.size < 1:
            raise ShapeMismatch(f"plan must be a nonempty 2-D matrix, got shape {pi.shape}")
        pi = pi.copy() if pi is self.pi else pi
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        for name in ("f", "g"):
            vec = getattr(self, name)
            if vec is not None:
                vec = np.asarray(vec, dtype=np.float64).copy()
                vec.setflags(write=False)
                object.__setattr__(self, name, vec)


def _check_shapes(S: SimilarityMatrix, marg: Marginals) -> None:
    if marg.a is not None and marg.a.shape[0] != S.rows:
        raise ShapeMismatch(f"row marginal length {marg.a.shape[0]} vs {S.rows} rows")
    if marg.b.shape[0] != S.cols:
        raise ShapeMismatch(f"column marginal length {marg.b.shape[0]} vs {S.cols} columns")


def sinkhorn(S: SimilarityMatrix, marg: Marginals, cfg: SinkhornConfig = SinkhornConfig()) -> TransportPlan:
    """Alternating log-domain balancing of rows and columns.

    One sweep updates ``f <- tau*log a - tau*LSE_j((S+g)/tau)`` then
    ``g <- tau*log b - tau*LSE_i((S+f)/tau)``, starting from g = 0 (the
    all-ones column scaling).  Each sweep ends on the column update, so the
    returned plan meets the column marginal to machine precision and the
    reported violation is dominated by the row residual.
    """
    _check_shapes(S, marg)
    V = S.values
    tau = cfg.tau
    a, b = marg.a, marg.b
    log_b = np.log(b)
    f = np.zeros(V.shape[0])
    g = np.zeros(V.shape[1])
    log_a = np.log(a) if a is not None else None

    iterations = 0
    converged = cfg.tol <= 0.0
    f_pending = None
    for sweep in range(cfg.max_iters):
        if a is not None:
            if f_pending is None:
                f = tau * log_a - tau * logsumexp((V + g[None, :]) / tau, axis=1)
            else:
                f = f_pending
                f_pending = None
        g = tau * log_b - tau * logsumexp((V + f[:, None]) / tau, axis=0)
        iterations = sweep + 1
        if cfg.tol > 0.0:
            if a is None:
                converged = True
                break
            # The next f-update's logsumexp doubles as the current row sums:
            # row_sum_i = a_i * exp((f_i - f_next_i)/tau), which never exceeds
            # the unit total mass, so the exponent stays non-positive.
            f_pending = tau * log_a - tau * logsumexp((V + g[None, :]) / tau, axis=1)
            row_sums = np.exp(log_a + (f - f_pending) / tau)
            if np.abs(row_sums - a).sum() <= cfg.tol:
                converged = True
                break

    pi = np.exp((V + f[:, None] + g[None, :]) / tau)
    violation = float(np.abs(pi.sum(axis=0) - b).sum())
    if a is not None:
        violation += float(np.abs(pi.sum(axis=1) - a).sum())
    return TransportPlan(
        pi=pi,
        f=f,
        g=g,
        tau=tau,
        iterations_run=iterations,
        marginal_violation=violation,
        converged=converged,
    )


def sn_normalize(S: SimilarityMatrix, cfg: SinkhornConfig = SinkhornConfig()) -> SimilarityMatrix:
    """Sinkhorn normalization: add the column dual potential to every row.

    Uses uniform marginals over the matrix's own rows and columns.  The row
    potential shifts all scores of a row equally and cannot change its
    ranking, so only ``g`` is applied.
    """
    plan = sinkhorn(S, Marginals.uniform(S.rows, S.cols), cfg)
    return S.with_values(S.values + plan.g[None, :])


def estimate_target_hubness(
    S_bank_targets: SimilarityMatrix, cfg: SinkhornConfig = SinkhornConfig()
) -> HubnessVector:
    """Per-target compensation from balancing bank rows against targets.

    Runs the solver with uniform marginals on the bank-vs-target matrix and
    returns the column potential ``g`` in the additive convention (the
    normalized score is ``S + g``).
    """
    plan = sinkhorn(S_bank_targets, Marginals.uniform(S_bank_targets.rows, S_bank_targets.cols), cfg)
    return HubnessVector(plan.g, temperature=cfg.tau)


def dbsn(
    S: SimilarityMatrix,
    S_bq_targets: SimilarityMatrix,
    S_bq_tbank: SimilarityMatrix | None,
    cfg: SinkhornConfig = SinkhornConfig(),
) -> SimilarityMatrix:
    """Dual-bank Sinkhorn normalization.

    Extends the target columns with target-bank columns before estimating
    hubness against the query bank, then applies only the first n entries of
    the estimate (the true targets' share) to S.  The bank extension narrows
    the distribution gap between the query bank and the column set it is
    balanced against.  ``S_bq_tbank=None`` means an empty target bank, which
    reduces to single-bank estimation.
    """
    if S_bq_targets.cols != S.cols:
        raise ColMismatch(f"{S.cols} target columns vs {S_bq_targets.cols} bank-target columns")
    if S_bq_tbank is None:
        extended = S_bq_targets
    else:
        if S_bq_tbank.rows != S_bq_targets.rows:
            raise RowMismatch(
                f"bank similarity rows disagree: {S_bq_targets.rows} vs {S_bq_tbank.rows}"
            )
        extended = SimilarityMatrix(
            np.hstack([S_bq_targets.values, S_bq_tbank.values]),
            row_role=S_bq_targets.row_role,
            col_role=S_bq_targets.col_role,
        )
    h_extended = estimate_target_hubness(extended, cfg)
    h_targets = HubnessVector(h_extended.values[: S.cols], temperature=cfg.tau)
    return apply_hubness(S, h_targets)


def plan_entropy(plan: TransportPlan) -> float:
    """``sum -pi_ij (log pi_ij - 1)`` with the 0 log 0 = 0 convention."""
    pi = plan.pi
    positive = pi > 0.0
    terms = np.zeros_like(pi)
    terms[positive] = -pi[positive] * (np.log(pi[positive]) - 1.0)
    return float(terms.sum())


def marginal_violation(plan: TransportPlan, marg: Marginals) -> float:
    """L1 distance of the plan's row and column sums from (a, b)."""
    pi = plan.pi
    if marg.b.shape[0] != pi.shape[1] or (marg.a is not None and marg.a.shape[0] != pi.shape[0]):
        raise ShapeMismatch(
            f"plan shape {pi.shape} vs marginals "
            f"({'free' if marg.a is None else marg.a.shape[0]}, {marg.b.shape[0]})"
        )
    violation = float(np.abs(pi.sum(axis=0) - marg.b).sum())
    if marg.a is not None:
        violation += float(np.abs(pi.sum(axis=1) - marg.a).sum())
    return violation
