"""Drift detection over the stream of prediction correctness.

Monitors the running error rate p and its standard error
s = sqrt(p(1-p)/n) against the recorded minima (p_min, s_min): a warning
fires when p + s exceeds p_min + 2*s_min and an out-of-control signal when
it exceeds p_min + 3*s_min. Minima are tracked only after a warm-up of
min_observations samples, and everything is reset when the consumer
decides to relearn.
"""

from __future__ import annotations

import math
from enum import Enum


class DriftLevel(Enum):
    IN_CONTROL = 0
    WARNING = 1
    OUT_OF_CONTROL = 2


class DdmDetector:
    """Error-rate drift detector with warning and out-of-control levels.

    Args:
        min_observations: warm-up sample count before any signal.
        warning_level: multiplier on s_min for the warning threshold.
        drift_level: multiplier on s_min for the out-of-control threshold.
        warn_edges_only: when True, WARNING is reported only on entry into
            the warning zone instead of on every observation inside it.
    """

    def __init__(
        self,
        min_observations: int = 30,
        warning_level: float = 2.0,
        drift_level: float = 3.0,
        warn_edges_only: bool = False,
    ) -> None:
        if min_observations < 1:
            raise ValueError("min_observations must be >= 1")
        if not 0 < warning_level <= drift_level:
            raise ValueError("need 0 < warning_level <= drift_level")
        self.min_observations = int(min_observations)
        self.warning_level = float(warning_level)
        self.drift_level = float(drift_level)
        self.warn_edges_only = bool(warn_edges_only)
        self.reset()

    def reset(self) -> None:
        """Clear counters and minima; level returns to IN_CONTROL."""
        self.n = 0
        self.errors = 0
        self.p = 0.0
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf
        self.level = DriftLevel.IN_CONTROL
        self._in_warning_zone = False

    def update(self, correct: bool) -> DriftLevel:
        """Consume one prediction outcome and return the current level."""
        self.n += 1
        if not correct:
            self.errors += 1
        self.p = self.errors / self.n
        self.s = math.sqrt(self.p * (1.0 - self.p) / self.n)

        if self.n < self.min_observations:
            self.level = DriftLevel.IN_CONTROL
            self._in_warning_zone = False
            return self.level

        ps = self.p + self.s
        if ps < self.p_min + self.s_min:
            self.p_min = self.p
            self.s_min = self.s

        if ps > self.p_min + self.drift_level * self.s_min:
            self.level = DriftLevel.OUT_OF_CONTROL
            self._in_warning_zone = False
        elif ps > self.p_min + self.warning_level * self.s_min:
            entering = not self._in_warning_zone
            self._in_warning_zone = True
            if self.warn_edges_only and not entering:
                self.level = DriftLevel.IN_CONTROL
            else:
                self.level = DriftLevel.WARNING
        else:
            self.level = DriftLevel.IN_CONTROL
            self._in_warning_zone = False
        return self.level
