"""Mahalanobis metric learned online from similarity constraints.

The metric is a symmetric positive semi-definite d x d matrix M defining
the distance d_M(x, y) = sqrt((x - y)^T M (x - y)). Supervision arrives as
pairs labelled same-class or different-class; each pair contributes the
outer product of its difference vector to a running sum. The metric is the
difference of the inverted per-group mean covariances, projected onto the
PSD cone by clipping negative eigenvalues to zero.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientConstraintsError,
    NumericError,
)

# Relative ridge applied before each covariance inversion when no explicit
# ridge is given: eps = RIDGE_FACTOR * trace(cov) / d.
RIDGE_FACTOR = 1e-6

# Quadratic forms this far below zero are treated as round-off and clamped.
_NEGATIVE_QUAD_TOLERANCE = 1e-12


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a 1-D vector, got shape {v.shape}")
    return v


def mahalanobis_distance(metric: np.ndarray, x, y) -> float:
    """Distance between x and y under the given PSD matrix.

    Quadratic-form values in [-1e-12, 0) are clamped to zero; anything more
    negative means the matrix is not PSD and raises NumericError.
    """
    m = np.asarray(metric, dtype=np.float64)
    vx = _as_vector(x, "x")
    vy = _as_vector(y, "y")
    if vx.shape != vy.shape:
        raise DimensionMismatchError(f"x has dim {vx.shape[0]}, y has dim {vy.shape[0]}")
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != vx.shape[0]:
        raise DimensionMismatchError(
            f"metric shape {m.shape} incompatible with vectors of dim {vx.shape[0]}"
        )
    if not (np.isfinite(vx).all() and np.isfinite(vy).all() and np.isfinite(m).all()):
        raise NumericError("non-finite input to mahalanobis_distance")
    diff = vx - vy
    quad = float(diff @ m @ diff)
    if quad < 0.0:
        if quad < -_NEGATIVE_QUAD_TOLERANCE:
            raise NumericError(f"quadratic form {quad} is negative; metric is not PSD")
        quad = 0.0
    return float(np.sqrt(quad))


class ConstraintAccumulator:
    """Running outer-product sums of same-class and different-class pairs.

    Attributes:
        dim: feature dimension d.
        similar_sum / dissimilar_sum: d x d sums of (x - y)(x - y)^T.
        similar_count / dissimilar_count: number of accumulated pairs.
    """

    __slots__ = ("dim", "similar_sum", "dissimilar_sum", "similar_count", "dissimilar_count")

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise DimensionMismatchError("accumulator dimension must be >= 1")
        self.dim = int(dim)
        self.similar_sum = np.zeros((dim, dim), dtype=np.float64)
        self.dissimilar_sum = np.zeros((dim, dim), dtype=np.float64)
        self.similar_count = 0
        self.dissimilar_count = 0

    def accumulate_pair(self, x, y, same_class: bool) -> None:
        """Add one pair's outer product to the matching sum."""
        vx = _as_vector(x, "x")
        vy = _as_vector(y, "y")
        if vx.shape[0] != self.dim or vy.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"pair dims ({vx.shape[0]}, {vy.shape[0]}) do not match accumulator dim {self.dim}"
            )
        if not (np.isfinite(vx).all() and np.isfinite(vy).all()):
            raise NumericError("non-finite pair passed to accumulate_pair")
        diff = vx - vy
        if same_class:
            self.similar_sum += np.outer(diff, diff)
            self.similar_count += 1
        else:
            self.dissimilar_sum += np.outer(diff, diff)
            self.dissimilar_count += 1

    def accumulate_batch(self, diffs: np.ndarray, same_class: bool) -> None:
        """Add many difference vectors at once (rows of diffs).

        Equivalent to accumulate_pair per row up to floating-point
        association; used on the hot path of the classifier.
        """
        d = np.asarray(diffs, dtype=np.float64)
        if d.ndim != 2 or d.shape[1] != self.dim:
            raise DimensionMismatchError(f"batch shape {d.shape} does not match dim {self.dim}")
        if d.shape[0] == 0:
            return
        if not np.isfinite(d).all():
            raise NumericError("non-finite batch passed to accumulate_batch")
        if same_class:
            self.similar_sum += d.T @ d
            self.similar_count += d.shape[0]
        else:
            self.dissimilar_sum += d.T @ d
            self.dissimilar_count += d.shape[0]

    def copy(self) -> "ConstraintAccumulator":
        dup = ConstraintAccumulator(self.dim)
        dup.similar_sum = self.similar_sum.copy()
        dup.dissimilar_sum = self.dissimilar_sum.copy()
        dup.similar_count = self.similar_count
        dup.dissimilar_count = self.dissimilar_count
        return dup

    def clear(self) -> None:
        self.similar_sum.fill(0.0)
        self.dissimilar_sum.fill(0.0)
        self.similar_count = 0
        self.dissimilar_count = 0


def _regularized_inverse(cov: np.ndarray, ridge: float | None) -> np.ndarray:
    d = cov.shape[0]
    if ridge is None:
        scale = float(np.trace(cov)) / d
        eps = RIDGE_FACTOR * scale if scale > 0.0 else RIDGE_FACTOR
    else:
        eps = float(ridge)
    try:
        inv = np.linalg.inv(cov + eps * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance inversion failed: {exc}") from exc
    if not np.isfinite(inv).all():
        raise NumericError("non-finite covariance inverse; ridge too small for input scale")
    return inv


def compute_metric(acc: ConstraintAccumulator, ridge: float | None = None) -> np.ndarray:
    """Metric matrix from the accumulated constraints.

    Steps: normalize each sum by its pair count, add ridge * I, invert,
    subtract the dissimilar inverse from the similar inverse, then clip the
    spectrum at zero via a symmetric eigendecomposition. With ridge=None a
    relative default of 1e-6 * trace/d per side is used.

    Raises InsufficientConstraintsError unless both pair counts are >= 1.
    """
    if acc.similar_count < 1 or acc.dissimilar_count < 1:
        raise InsufficientConstraintsError(
            f"insufficient constraints: {acc.similar_count} similar, "
            f"{acc.dissimilar_count} dissimilar pairs"
        )
    sim_cov = acc.similar_sum / acc.similar_count
    dis_cov = acc.dissimilar_sum / acc.dissimilar_count
    raw = _regularized_inverse(sim_cov, ridge) - _regularized_inverse(dis_cov, ridge)
    # symmetrize before eigh to kill asymmetric round-off from the inversions
    sym = (raw + raw.T) / 2.0
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    clipped = np.maximum(eigenvalues, 0.0)
    metric = (eigenvectors * clipped) @ eigenvectors.T
    metric = (metric + metric.T) / 2.0  # exact elementwise symmetry
    if not np.isfinite(metric).all():
        raise NumericError("non-finite metric; ridge too small for input scale")
    return metric


def log_likelihood_ratio(sigma_similar, sigma_dissimilar, x, y) -> float:
    """Log density ratio of the dissimilar model over the similar model.

    Evaluates both zero-mean Gaussians at the difference x - y; a high
    value supports the pair being dissimilar. Diagnostic only, not used on
    the classification path.
    """
    s1 = np.asarray(sigma_similar, dtype=np.float64)
    s0 = np.asarray(sigma_dissimilar, dtype=np.float64)
    vx = _as_vector(x, "x")
    vy = _as_vector(y, "y")
    d = vx.shape[0]
    for name, s in (("similar", s1), ("dissimilar", s0)):
        if s.shape != (d, d):
            raise DimensionMismatchError(f"{name} covariance shape {s.shape}, expected ({d}, {d})")
    diff = vx - vy
    terms = []
    for name, s in (("similar", s1), ("dissimilar", s0)):
        sign, logdet = np.linalg.slogdet(s)
        if sign <= 0:
            raise NumericError(f"{name} covariance is not positive definite")
        try:
            quad = float(diff @ np.linalg.solve(s, diff))
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular {name} covariance: {exc}") from exc
        terms.append((quad, logdet))
    (quad_sim, logdet_sim), (quad_dis, logdet_dis) = terms
    delta = 0.5 * (quad_sim - quad_dis + logdet_sim - logdet_dis)
    if not np.isfinite(delta):
        raise NumericError("non-finite log-likelihood ratio")
    return delta
