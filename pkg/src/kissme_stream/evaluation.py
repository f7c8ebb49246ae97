"""Prequential estimators and paired-comparison statistics.

All estimators are one-pass: they consume one loss (or one outcome pair)
per stream instance and expose the current value. Forgetting uses fading
factors, a geometric down-weighting of old losses by alpha per step.
"""

from __future__ import annotations

import math


class FadingEstimator:
    """Prequential loss estimate with fading-factor forgetting.

    Maintains S = loss + alpha * S and B = 1 + alpha * B; the estimate is
    S / B. With alpha = 1 this is exactly the cumulative mean loss. For 0/1
    misclassification losses, prequential accuracy is 1 - estimate.
    """

    def __init__(self, alpha: float) -> None:
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = float(alpha)
        self.loss_sum = 0.0
        self.weight_sum = 0.0

    def update(self, loss: float) -> float:
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must be in [0, 1], got {loss}")
        self.loss_sum = loss + self.alpha * self.loss_sum
        self.weight_sum = 1.0 + self.alpha * self.weight_sum
        return self.loss_sum / self.weight_sum

    @property
    def estimate(self) -> float | None:
        if self.weight_sum == 0.0:
            return None
        return self.loss_sum / self.weight_sum


class QTracker:
    """Log-ratio of two algorithms' fading accumulated losses.

    Negative values mean algorithm A has the smaller accumulated loss. The
    ratio is undefined (None) while either side's accumulation is zero,
    which is common early on with 0/1 losses.
    """

    def __init__(self, alpha: float) -> None:
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = float(alpha)
        self.loss_sum_a = 0.0
        self.loss_sum_b = 0.0

    def update(self, loss_a: float, loss_b: float) -> float | None:
        if loss_a < 0.0 or loss_b < 0.0:
            raise ValueError(f"losses must be nonnegative, got ({loss_a}, {loss_b})")
        self.loss_sum_a = loss_a + self.alpha * self.loss_sum_a
        self.loss_sum_b = loss_b + self.alpha * self.loss_sum_b
        return self.value

    @property
    def value(self) -> float | None:
        if self.loss_sum_a <= 0.0 or self.loss_sum_b <= 0.0:
            return None
        return math.log(self.loss_sum_a / self.loss_sum_b)


class McNemarCounter:
    """Cumulative McNemar test over paired prediction outcomes.

    n01 counts steps where A was wrong and B right, n10 the opposite. The
    statistic (n01 - n10)^2 / (n01 + n10) is 0 while no disagreements have
    been seen; the null is rejected when it exceeds the threshold (6.635,
    the 0.99 quantile of chi-squared with one degree of freedom). No
    continuity correction is applied.
    """

    def __init__(self, threshold: float = 6.635) -> None:
        self.threshold = float(threshold)
        self.n01 = 0
        self.n10 = 0

    def update(self, correct_a: bool, correct_b: bool) -> tuple[float, bool]:
        if not correct_a and correct_b:
            self.n01 += 1
        elif correct_a and not correct_b:
            self.n10 += 1
        return self.statistic, self.reject

    @property
    def statistic(self) -> float:
        disagreements = self.n01 + self.n10
        if disagreements == 0:
            return 0.0
        return (self.n01 - self.n10) ** 2 / disagreements

    @property
    def reject(self) -> bool:
        return self.statistic > self.threshold
