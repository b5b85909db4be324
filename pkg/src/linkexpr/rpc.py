"""Reliability-checked paired comparison of link embeddings.

Two Hotelling T^2 tests share one scaled-F threshold: the major procedure on
the differences between the two links' embeddings across q permuted copies,
and a reliability check on the differences between one link's embeddings and
the same link's embeddings under an extra permutation. A pair counts as
distinguished only when T^2_reliability < threshold < T^2_test.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import betaincinv

from .errors import (
    DegreesOfFreedomError,
    NumericalError,
    ParseError,
    SingularCovarianceError,
    ValidationError,
)

# relative spectral cutoff below which the sample covariance counts as singular
SINGULAR_RTOL = 1e-10

RidgeSpec = Union[None, float, str]


@dataclass
class EmbeddingBatch:
    """Embeddings of one instance across q permuted graph copies.

    ``rows_a`` and ``rows_b`` hold the two links' embeddings per copy;
    ``rows_pi`` holds link a's embeddings under one extra permutation for the
    reliability check. Requires q > d for the covariance to be invertible at
    all; q <= d + 4 only earns a warning (estimates get unstable).
    """

    rows_a: np.ndarray
    rows_b: np.ndarray
    rows_pi: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.rows_a, dtype=float)
        b = np.asarray(self.rows_b, dtype=float)
        p = np.asarray(self.rows_pi, dtype=float)
        for name, arr in (("rows_a", a), ("rows_b", b), ("rows_pi", p)):
            if arr.ndim != 2:
                raise ValidationError(f"{name} must be a q x d matrix")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
        if a.shape != b.shape or a.shape != p.shape:
            raise ValidationError(
                f"row blocks disagree in shape: {a.shape}, {b.shape}, {p.shape}"
            )
        q, d = a.shape
        if q <= d:
            raise DegreesOfFreedomError(
                f"need q > d for the T^2 statistic, got q={q}, d={d}"
            )
        if q <= d + 4:
            warnings.warn(
                f"q={q} barely exceeds d={d}; covariance estimates will be noisy",
                stacklevel=2,
            )
        self.rows_a, self.rows_b, self.rows_pi = a, b, p

    @property
    def q(self) -> int:
        return self.rows_a.shape[0]

    @property
    def d(self) -> int:
        return self.rows_a.shape[1]


@dataclass(frozen=True)
class RpcVerdict:
    """Outcome of one reliability-checked paired comparison."""

    t2_test: Optional[float]
    t2_reliability: Optional[float]
    threshold: float
    reliable: bool
    distinguishable: bool
    alpha: float
    status: str = "ok"


def hotelling_t2(diffs, ridge: RidgeSpec = None) -> float:
    """q * mean(d)' S^{-1} mean(d) with S the (q-1)-normalized covariance.

    The inverse is applied through an SVD of S (stable solve, no explicit
    inverse). S counts as singular when its smallest singular value drops
    below ``SINGULAR_RTOL`` times the largest; ``ridge`` adds eps * I first
    (``"auto"`` picks eps = 1e-8 * trace(S)/d).
    """
    arr = np.asarray(diffs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValidationError("diffs must be a q x d matrix")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("diffs contain non-finite values")
    q, d = arr.shape
    if q <= d:
        raise DegreesOfFreedomError(
            f"need q > d for the T^2 statistic, got q={q}, d={d}"
        )
    dbar = arr.mean(axis=0)
    centered = arr - dbar
    cov = centered.T @ centered / (q - 1)
    if ridge is not None:
        if ridge == "auto":
            eps = 1e-8 * float(np.trace(cov)) / d
        else:
            eps = float(ridge)
        if eps < 0:
            raise ValidationError("ridge must be non-negative")
        cov = cov + eps * np.eye(d)
    u, s, vt = np.linalg.svd(cov)
    if s[0] <= 0.0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularCovarianceError(
            f"sample covariance is singular (smallest/largest singular value "
            f"= {0.0 if s[0] <= 0 else s[-1] / s[0]:.3e})"
        )
    sol = vt.T @ ((u.T @ dbar) / s)
    return float(q * dbar @ sol)


def f_upper_quantile(d1: int, d2: int, alpha: float) -> float:
    """x with P[F_{d1,d2} > x] = alpha, via the inverse incomplete beta."""
    if d1 < 1 or d2 < 1:
        raise ValidationError("degrees of freedom must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise ValidationError("alpha must lie in (0, 1)")
    x = float(betaincinv(d1 / 2.0, d2 / 2.0, 1.0 - alpha))
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise NumericalError(
            f"inverse incomplete beta failed for d1={d1}, d2={d2}, alpha={alpha}"
        )
    if x >= 1.0:
        return math.inf
    return d2 * x / (d1 * (1.0 - x))


def rpc_threshold(q: int, d: int, alpha: float) -> float:
    """Scaled-F threshold ((q-1) d / (q-d)) * F_{d, q-d}(alpha)."""
    if q <= d:
        raise DegreesOfFreedomError(f"need q > d, got q={q}, d={d}")
    return (q - 1) * d / (q - d) * f_upper_quantile(d, q - d, alpha)


def rpc_verdict(
    batch: EmbeddingBatch, alpha: float = 0.05, ridge: RidgeSpec = None
) -> RpcVerdict:
    """Run the major procedure and the reliability check on one batch.

    Degenerate covariances never abort a batch run: a singular test side
    (including exactly identical a/b embeddings) yields an undistinguishable
    verdict with an explicit status, and a singular reliability side marks
    the instance unreliable.
    """
    threshold = rpc_threshold(batch.q, batch.d, alpha)
    problems: List[str] = []

    test_diffs = batch.rows_a - batch.rows_b
    t2_test: Optional[float] = None
    try:
        t2_test = hotelling_t2(test_diffs, ridge=ridge)
    except SingularCovarianceError:
        if np.all(test_diffs == 0.0):
            problems.append("degenerate: identical embeddings")
        else:
            problems.append("singular: test covariance")

    rel_diffs = batch.rows_a - batch.rows_pi
    t2_rel: Optional[float] = None
    try:
        t2_rel = hotelling_t2(rel_diffs, ridge=ridge)
    except SingularCovarianceError:
        problems.append("singular: reliability covariance")

    reliable = t2_rel is not None and t2_rel < threshold
    distinguishable = reliable and t2_test is not None and t2_test > threshold
    return RpcVerdict(
        t2_test=t2_test,
        t2_reliability=t2_rel,
        threshold=threshold,
        reliable=reliable,
        distinguishable=distinguishable,
        alpha=alpha,
        status="; ".join(problems) if problems else "ok",
    )


def rpc_precision(
    batches: Sequence[EmbeddingBatch],
    alpha: float = 0.05,
    ridge: RidgeSpec = None,
) -> Tuple[float, List[RpcVerdict]]:
    """Fraction of batches judged distinguishable, plus per-instance verdicts.

    Degenerate instances count as not distinguished and stay flagged in their
    verdict's status.
    """
    if not batches:
        raise ValidationError("no batches to evaluate")
    verdicts = [rpc_verdict(b, alpha=alpha, ridge=ridge) for b in batches]
    precision = sum(v.distinguishable for v in verdicts) / len(verdicts)
    return precision, verdicts


def contrastive_loss(e1, e2) -> float:
    """Hinged cosine similarity max(0, cos(e1, e2)) of two embeddings."""
    a = np.asarray(e1, dtype=float).ravel()
    b = np.asarray(e2, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValidationError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("contrastive loss is undefined for zero vectors")
    return max(0.0, float(a @ b) / (na * nb))


def read_embeddings(path) -> List[Tuple[str, EmbeddingBatch]]:
    """Parse the JSON-lines interchange format for external embeddings.

    One record per instance: ``{instance_id, q, d, rows_a, rows_b, rows_pi}``
    with each ``rows_*`` a q x d array. Returns (instance_id, batch) pairs in
    file order.
    """
    out: List[Tuple[str, EmbeddingBatch]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"not valid JSON: {exc}", lineno) from None
            try:
                instance_id = str(rec["instance_id"])
                batch = EmbeddingBatch(
                    rows_a=np.array(rec["rows_a"], dtype=float),
                    rows_b=np.array(rec["rows_b"], dtype=float),
                    rows_pi=np.array(rec["rows_pi"], dtype=float),
                )
            except KeyError as exc:
                raise ParseError(f"missing field {exc}", lineno) from None
            declared_q, declared_d = rec.get("q"), rec.get("d")
            if declared_q is not None and int(declared_q) != batch.q:
                raise ParseError(
                    f"declared q={declared_q} but rows have q={batch.q}", lineno
                )
            if declared_d is not None and int(declared_d) != batch.d:
                raise ParseError(
                    f"declared d={declared_d} but rows have d={batch.d}", lineno
                )
            out.append((instance_id, batch))
    if not out:
        raise ParseError("embeddings file contains no records")
    return out
