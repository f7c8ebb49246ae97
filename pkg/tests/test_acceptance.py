"""Acceptance suite.

One test per criterion; each prints a single "criterion N (...): PASS/FAIL"
line with the measured numbers (run pytest -s to see the lines for passing
criteria). Every tolerance is pinned here, not configurable.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from kissme_stream import (
    ConstraintAccumulator,
    DdmDetector,
    DriftLevel,
    FadingEstimator,
    Instance,
    McNemarCounter,
    OnlineKissmeStream,
    QTracker,
    compute_metric,
    mahalanobis_distance,
)
from kissme_stream.experiment import ExperimentConfig, run_experiment
from kissme_stream.metric import RIDGE_FACTOR
from kissme_stream.rng import Xoshiro256StarStar
from kissme_stream.streams import (
    HyperplaneGenerator,
    RandomTreeGenerator,
    RbfGenerator,
    SeaGenerator,
    WaveformGenerator,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


def report(number, label, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"criterion {number} ({label}): {status}{suffix}")
    return ok


# ----------------------------------------------------------------------
# criterion 1: online/batch oracle equivalence


def batch_kissme_oracle(X, y):
    """Independent batch route: all pairwise differences at once."""
    i_idx, j_idx = np.triu_indices(len(X), k=1)
    diffs = X[i_idx] - X[j_idx]
    same = y[i_idx] == y[j_idx]
    d = X.shape[1]

    def inverse(cov):
        scale = np.trace(cov) / d
        eps = RIDGE_FACTOR * scale if scale > 0 else RIDGE_FACTOR
        return np.linalg.inv(cov + eps * np.eye(d))

    cov_sim = diffs[same].T @ diffs[same] / same.sum()
    cov_dis = diffs[~same].T @ diffs[~same] / (~same).sum()
    raw = inverse(cov_sim) - inverse(cov_dis)
    sym = (raw + raw.T) / 2
    w, v = np.linalg.eigh(sym)
    return (v * np.maximum(w, 0.0)) @ v.T


def test_criterion_1_online_batch_equivalence():
    rng = np.random.RandomState(100)
    n, d = 500, 5
    y = rng.randint(0, 2, size=n)
    X = rng.randn(n, d)
    X[y == 1, 0] += 1.5
    X[y == 1, 1] += 1.0
    started = time.perf_counter()
    acc = ConstraintAccumulator(d)
    for i in range(n):
        for j in range(i + 1, n):
            acc.accumulate_pair(X[i], X[j], same_class=y[i] == y[j])
    streamed = compute_metric(acc)
    elapsed = time.perf_counter() - started
    oracle = batch_kissme_oracle(X, y)
    max_err = float(np.abs(streamed - oracle).max())
    ok = max_err <= 1e-8 and elapsed < 5.0
    assert report(1, "online/batch oracle equivalence", ok,
                  f"max elementwise error {max_err:.2e}, {elapsed:.2f}s")


# ----------------------------------------------------------------------
# criteria 2 and 3 share one paired experiment


def noisy_gaussian_stream(seed, n):
    """2 informative dims (class means +-1, unit spread) + 8 noise dims (spread 3)."""
    rng = Xoshiro256StarStar(seed)
    for i in range(n):
        label = rng.randint(2)
        mu = 1.0 if label == 1 else -1.0
        values = [rng.normal(mu, 1.0), rng.normal(mu, 1.0)]
        values += [rng.normal(0.0, 3.0) for _ in range(8)]
        encoded = np.array(values)
        yield Instance(raw=tuple(values), encoded=encoded, label=label, arrival_index=i)


@pytest.fixture(scope="module")
def benefit_runs():
    results = []
    started = time.perf_counter()
    for seed in range(1, 11):
        learned = OnlineKissmeStream(10, k=10, max_base=200)
        identity = OnlineKissmeStream(10, k=10, max_base=200, learn_metric=False)
        fading_a = FadingEstimator(0.999)
        fading_b = FadingEstimator(0.999)
        q_tracker = QTracker(0.999)
        negative = defined = 0
        for inst in noisy_gaussian_stream(seed, 20_000):
            loss_a = 0 if learned.process(inst).correct else 1
            loss_b = 0 if identity.process(inst).correct else 1
            err_a = fading_a.update(loss_a)
            err_b = fading_b.update(loss_b)
            value = q_tracker.update(loss_a, loss_b)
            if value is not None:
                defined += 1
                negative += value < 0
        results.append((1.0 - err_a, 1.0 - err_b, negative / defined))
    return results, time.perf_counter() - started


def test_criterion_2_metric_learning_benefit(benefit_runs):
    results, elapsed = benefit_runs
    wins = sum(acc_a > acc_b for acc_a, acc_b, _ in results)
    ok = wins >= 9 and elapsed < 120.0
    mean_a = np.mean([r[0] for r in results])
    mean_b = np.mean([r[1] for r in results])
    assert report(2, "metric-learning benefit", ok,
                  f"{wins}/10 seeds, mean acc {mean_a:.3f} vs {mean_b:.3f}, {elapsed:.0f}s")


def test_criterion_3_q_statistic_sign_profile(benefit_runs):
    results, _ = benefit_runs
    hits = sum(neg_frac >= 0.60 for _, _, neg_frac in results)
    ok = hits >= 8
    assert report(3, "Q-statistic sign profile", ok,
                  f"{hits}/10 seeds with >= 60% negative Q")


# ----------------------------------------------------------------------
# criterion 4: drift reaction


def test_criterion_4_drift_reaction():
    detected = 0
    for seed in range(100):
        rng = Xoshiro256StarStar(seed)
        detector = DdmDetector()
        for _ in range(2000):
            if detector.update(rng.random() >= 0.1) is DriftLevel.OUT_OF_CONTROL:
                detector.reset()  # consumed the way the classifier consumes it
        for _ in range(300):
            if detector.update(rng.random() >= 0.4) is DriftLevel.OUT_OF_CONTROL:
                detected += 1
                break
    false_seeds = 0
    for seed in range(100):
        rng = Xoshiro256StarStar(1000 + seed)
        detector = DdmDetector()
        if any(
            detector.update(rng.random() >= 0.1) is DriftLevel.OUT_OF_CONTROL
            for _ in range(10_000)
        ):
            false_seeds += 1
    ok = detected >= 95 and false_seeds <= 5
    assert report(4, "drift reaction", ok,
                  f"detected {detected}/100 (need >= 95), "
                  f"false-alarm seeds {false_seeds}/100 (need <= 5)")


# ----------------------------------------------------------------------
# criterion 5: McNemar calibration


def test_criterion_5_mcnemar_calibration():
    counter = McNemarCounter()
    for _ in range(10):
        statistic, rejected = counter.update(False, True)
    arithmetic_ok = statistic == pytest.approx(10.0) and rejected

    steps = rejected_steps = 0
    for seed in range(100):
        rng = Xoshiro256StarStar(5000 + seed)
        counter = McNemarCounter()
        for i in range(10_000):
            _, reject = counter.update(rng.random() >= 0.3, rng.random() >= 0.3)
            if i >= 2000:  # steady state
                steps += 1
                rejected_steps += reject
    rate = rejected_steps / steps
    calibration_ok = abs(rate - 0.01) <= 0.015
    ok = arithmetic_ok and calibration_ok
    assert report(5, "McNemar calibration", ok,
                  f"steady-state reject rate {rate:.4f} (want 0.010 +/- 0.015), "
                  f"n01=10/n10=0 -> statistic 10.0 reject")


# ----------------------------------------------------------------------
# criteria 6 and 8 share one full-scale waveform run


@pytest.fixture(scope="module")
def waveform_run():
    generator = WaveformGenerator(2024)
    model = OnlineKissmeStream(21, k=10, max_base=500)
    fading = FadingEstimator(0.999)
    samples = []
    elapsed = 0.0
    for i in range(1, 100_001):
        t0 = time.perf_counter()
        inst = next(generator)
        prediction = model.process(inst)
        elapsed += time.perf_counter() - t0
        estimate = fading.update(0 if prediction.correct else 1)
        if i % 1000 == 0:
            asymmetry = float(np.abs(model.metric - model.metric.T).max())
            min_eig = float(np.linalg.eigvalsh(model.metric).min())
            samples.append((asymmetry, min_eig, len(model.base), estimate))
    return model, samples, elapsed


def test_criterion_6_invariant_suite(waveform_run):
    model, samples, _ = waveform_run
    asymmetry = max(s[0] for s in samples)
    min_eig = min(s[1] for s in samples)
    max_size = max(s[2] for s in samples)
    estimates_ok = all(0.0 <= s[3] <= 1.0 for s in samples)

    rng = np.random.RandomState(7)
    triangle_slack = 0.0
    for _ in range(1000):
        x, y, z = rng.randn(3, 21) * 4.0
        dxz = mahalanobis_distance(model.metric, x, z)
        dxy = mahalanobis_distance(model.metric, x, y)
        dyz = mahalanobis_distance(model.metric, y, z)
        triangle_slack = max(triangle_slack, dxz - (dxy + dyz))
    ok = (
        asymmetry == 0.0
        and min_eig >= -1e-10
        and max_size <= 500
        and estimates_ok
        and triangle_slack <= 1e-9
    )
    assert report(6, "invariant suite over 100k waveform run", ok,
                  f"asymmetry {asymmetry:.1e}, min eig {min_eig:.1e}, "
                  f"max base {max_size}, triangle slack {triangle_slack:.1e}")


# ----------------------------------------------------------------------
# criterion 7: determinism and golden files


def test_criterion_7_determinism_and_golden_files(tmp_path):
    config_one = ExperimentConfig(
        stream="sea", out_dir=tmp_path / "one", instances=2000, seed=17, stride=100
    )
    config_two = ExperimentConfig(
        stream="sea", out_dir=tmp_path / "two", instances=2000, seed=17, stride=100
    )
    run_experiment(config_one)
    run_experiment(config_two)
    identical = (tmp_path / "one" / "series.csv").read_bytes() == (
        tmp_path / "two" / "series.csv"
    ).read_bytes()

    generators = {
        "sea": SeaGenerator(7),
        "hyperplane": HyperplaneGenerator(7),
        "rbf": RbfGenerator(7),
        "tree": RandomTreeGenerator(7),
        "waveform": WaveformGenerator(7),
    }
    golden_ok = True
    for name, generator in generators.items():
        lines = (GOLDEN_DIR / f"{name}.csv").read_text().splitlines()[1:]
        for line in lines:
            inst = next(generator)
            cells = [f"{v:.6f}" if isinstance(v, float) else str(v) for v in inst.raw]
            cells.append(str(inst.label))
            if ",".join(cells) != line:
                golden_ok = False
                break
    ok = identical and golden_ok
    assert report(7, "determinism and golden files", ok,
                  f"byte-identical series.csv: {identical}, golden generators: {golden_ok}")


# ----------------------------------------------------------------------
# criterion 8: desk-scale performance


def test_criterion_8_desk_scale_performance(waveform_run):
    _, _, elapsed = waveform_run
    ok = elapsed < 60.0
    assert report(8, "desk-scale performance", ok,
                  f"100k waveform instances in {elapsed:.1f}s (budget 60s)")


# ----------------------------------------------------------------------
# criterion 9: evaluation-unit exactness


def test_criterion_9_evaluation_unit_exactness():
    rng = np.random.RandomState(3)
    estimator = FadingEstimator(alpha=1.0)
    running = 0.0
    mean_exact = True
    for i, loss in enumerate(rng.randint(0, 2, size=1000), start=1):
        running += loss
        mean_exact &= estimator.update(float(loss)) == running / i

    tracker = QTracker(alpha=0.999)
    q_zero = True
    for loss in rng.randint(0, 2, size=1000):
        value = tracker.update(float(loss), float(loss))
        if value is not None:
            q_zero &= value == 0.0

    fading = FadingEstimator(alpha=0.5)
    fading.update(1.0)
    hand_fading = abs(fading.update(0.0) - 1.0 / 3.0) <= 1e-12
    paired = QTracker(alpha=0.5)
    paired.update(1.0, 1.0)
    hand_q = abs(paired.update(1.0, 0.0) - math.log(3.0)) <= 1e-12

    ok = mean_exact and q_zero and hand_fading and hand_q
    assert report(9, "evaluation-unit exactness", ok,
                  f"alpha=1 cumulative-mean exact: {mean_exact}, Q(A,A)=0: {q_zero}, "
                  f"half-life hand examples: {hand_fading and hand_q}")
