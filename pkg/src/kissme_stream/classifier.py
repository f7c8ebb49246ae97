"""Streaming k-NN classifier with online Mahalanobis metric learning.

Each instance is processed test-then-train. Until the base first fills,
the model predicts with its initial identity matrix while collecting
same-class / different-class pairs from every arriving instance against
the stored ones; when the base reaches capacity (and both pair kinds have
been seen) the metric is computed and the model switches to learned mode.
In learned mode the prediction outcome feeds a drift detector: a warning
recomputes the metric from the accumulated constraints, an out-of-control
signal clears the base and the accumulator and drops back to the learning
phase while keeping the current metric. After a correct prediction the
retrieved neighbours sharing the true label are deleted; the arriving
instance is always inserted and the oldest ones are evicted down to
capacity.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .drift import DdmDetector, DriftLevel
from .errors import NumericError, SchemaError
from .instance_base import Instance, InstanceBase
from .metric import ConstraintAccumulator, compute_metric

VOTING_INVERSE_DISTANCE = "inverse-distance"
VOTING_MAJORITY = "majority"

# Additive constant in the inverse-distance vote weight 1 / (distance + eps).
VOTE_EPSILON = 1e-8


@dataclass
class Prediction:
    """Outcome of classifying one instance.

    distribution maps class id to a normalized vote weight; it is empty and
    abstained is True when the base held no neighbours. correct is filled
    in by process() once the true label has been consulted.
    """

    predicted_label: int | None
    distribution: Dict[int, float] = field(default_factory=dict)
    correct: bool = False
    abstained: bool = False


class OnlineKissmeStream:
    """k-NN stream classifier over a learned Mahalanobis metric.

    Args:
        dim: encoded feature dimension of the stream.
        k: neighbours per query.
        max_base: instance base capacity (also the learning trigger).
        ridge: covariance regularizer passed to compute_metric; None keeps
            the relative default.
        voting: "inverse-distance" (default) or "majority".
        learn_metric: False freezes the metric at identity and disables all
            constraint bookkeeping, leaving an otherwise identical
            Euclidean k-NN pipeline (the ablation baseline).
        ddm_*: drift detector constants.
    """

    def __init__(
        self,
        dim: int,
        *,
        k: int = 10,
        max_base: int = 500,
        ridge: float | None = None,
        voting: str = VOTING_INVERSE_DISTANCE,
        learn_metric: bool = True,
        ddm_min_observations: int = 30,
        ddm_warning_level: float = 2.0,
        ddm_drift_level: float = 3.0,
        ddm_warn_edges_only: bool = False,
    ) -> None:
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if k < 1:
            raise ValueError("k must be >= 1")
        if max_base < 1:
            raise ValueError("max_base must be >= 1")
        if voting not in (VOTING_INVERSE_DISTANCE, VOTING_MAJORITY):
            raise ValueError(f"unknown voting mode: {voting!r}")
        self.dim = int(dim)
        self.k = int(k)
        self.max_base = int(max_base)
        self.ridge = ridge
        self.voting = voting
        self.learn_metric = bool(learn_metric)
        self.base = InstanceBase(max_base)
        self.accumulator = ConstraintAccumulator(dim)
        self.metric = np.eye(dim)
        self.learned = False
        self.detector = DdmDetector(
            min_observations=ddm_min_observations,
            warning_level=ddm_warning_level,
            drift_level=ddm_drift_level,
            warn_edges_only=ddm_warn_edges_only,
        )
        # level observed during the most recent process() step, kept across
        # the detector reset that an out-of-control signal triggers
        self.last_step_drift_level = DriftLevel.IN_CONTROL

    @property
    def drift_level(self) -> DriftLevel:
        return self.detector.level

    def _vote(self, neighbours: List[Tuple[Instance, float]]) -> Tuple[int, Dict[int, float]]:
        weights: Dict[int, float] = {}
        if self.voting == VOTING_INVERSE_DISTANCE:
            for inst, dist in neighbours:
                weights[inst.label] = weights.get(inst.label, 0.0) + 1.0 / (dist + VOTE_EPSILON)
        else:
            for inst, _ in neighbours:
                weights[inst.label] = weights.get(inst.label, 0.0) + 1.0
        total = sum(weights.values())
        distribution = {label: w / total for label, w in weights.items()}
        # ties resolve towards the smallest class id
        winner = min(distribution.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        return winner, distribution

    def _predict_with_neighbours(
        self, inst: Instance
    ) -> Tuple[Prediction, List[Tuple[Instance, float]]]:
        if len(self.base) == 0:
            return Prediction(predicted_label=None, abstained=True), []
        neighbours = self.base.knn(inst.encoded, self.k, self.metric)
        label, distribution = self._vote(neighbours)
        return Prediction(predicted_label=label, distribution=distribution), neighbours

    def predict(self, inst: Instance) -> Prediction:
        """Classify one instance without updating any model state."""
        self._check_schema(inst)
        prediction, _ = self._predict_with_neighbours(inst)
        return prediction

    def _check_schema(self, inst: Instance) -> None:
        encoded = np.asarray(inst.encoded)
        if encoded.ndim != 1 or encoded.shape[0] != self.dim:
            raise SchemaError(
                f"instance encoded dim {encoded.shape} does not match model dim {self.dim}"
            )

    def reset_learning(self) -> None:
        """Drop the base, the constraints and the detector; keep the metric."""
        self.base.clear()
        self.accumulator.clear()
        self.detector.reset()
        self.learned = False

    def process(self, inst: Instance) -> Prediction:
        """Run one test-then-train step and return the scored prediction.

        A numeric failure inside the metric computation aborts the step and
        restores the model to its pre-step state before re-raising.
        """
        self._check_schema(inst)
        prediction, neighbours = self._predict_with_neighbours(inst)
        prediction.correct = (
            not prediction.abstained and prediction.predicted_label == inst.label
        )
        if not self.learned:
            self.last_step_drift_level = DriftLevel.IN_CONTROL
            self._bootstrap_step(inst)
        else:
            self.last_step_drift_level = self._learned_step(inst, prediction, neighbours)
        return prediction

    def _accumulate_against(self, inst: Instance, vectors: np.ndarray, labels: np.ndarray) -> None:
        diffs = vectors - inst.encoded
        same = labels == inst.label
        if same.any():
            self.accumulator.accumulate_batch(diffs[same], same_class=True)
        if not same.all():
            self.accumulator.accumulate_batch(diffs[~same], same_class=False)

    def _bootstrap_step(self, inst: Instance) -> None:
        acc = self.accumulator
        if self.learn_metric and len(self.base) > 0:
            snapshot = acc.copy()
            self._accumulate_against(inst, self.base.encoded_matrix(), self.base.labels())
        else:
            snapshot = None
        if len(self.base) + 1 >= self.max_base:
            if self.learn_metric:
                # defer until both pair kinds exist, otherwise the
                # covariance difference is undefined
                if acc.similar_count >= 1 and acc.dissimilar_count >= 1:
                    try:
                        self.metric = compute_metric(acc, self.ridge)
                    except NumericError:
                        if snapshot is not None:
                            self.accumulator = snapshot
                        raise
                    self.learned = True
            else:
                self.learned = True
        self.base.insert(inst)
        self.base.evict_to_capacity()

    def _learned_step(
        self,
        inst: Instance,
        prediction: Prediction,
        neighbours: List[Tuple[Instance, float]],
    ) -> DriftLevel:
        if self.learn_metric:
            # snapshots make the step transactional: the warning-level
            # recomputation is the only mutation that can fail
            acc_snapshot = self.accumulator.copy()
            detector_snapshot = copy.copy(self.detector)
            if neighbours:
                vectors = np.stack([n.encoded for n, _ in neighbours])
                labels = np.array([n.label for n, _ in neighbours], dtype=np.int64)
                self._accumulate_against(inst, vectors, labels)
        level = self.detector.update(prediction.correct)
        if level is DriftLevel.WARNING and self.learn_metric:
            try:
                self.metric = compute_metric(self.accumulator, self.ridge)
            except NumericError:
                self.accumulator = acc_snapshot
                self.detector = detector_snapshot
                raise
        elif level is DriftLevel.OUT_OF_CONTROL:
            self.reset_learning()
        if prediction.correct:
            self.base.edit_after_correct(inst, [n for n, _ in neighbours])
        self.base.insert(inst)
        self.base.evict_to_capacity()
        return level
