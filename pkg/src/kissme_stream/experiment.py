"""Experiment driver: paired prequential runs with file outputs.

run_experiment drives one stream through one or two classifiers in
lockstep (the optional second one is the identity-metric ablation of the
same pipeline), updates all estimators per instance and writes series.csv,
summary.json and optional SVG figures into the output directory. A fixed
configuration always produces byte-identical series.csv.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np

from .classifier import VOTING_INVERSE_DISTANCE, VOTING_MAJORITY, OnlineKissmeStream
from .errors import ConfigError, StreamExhaustedError
from .evaluation import FadingEstimator, McNemarCounter, QTracker
from .streams import (
    HyperplaneGenerator,
    RandomTreeGenerator,
    RbfGenerator,
    SeaGenerator,
    WaveformGenerator,
    load_csv,
    parse_schema_file,
)

BASELINE_IDENTITY = "identity"
BASELINE_NONE = "none"

GENERATOR_KINDS = ("sea", "hyperplane", "rbf", "tree", "waveform")

SERIES_FILENAME = "series.csv"
SUMMARY_FILENAME = "summary.json"


@dataclass
class ExperimentConfig:
    """Everything a run needs; unset stream_params fall back to generator defaults."""

    stream: str
    out_dir: Path
    instances: int = 100_000
    seed: int = 1
    alpha: float = 0.999
    k: int = 10
    max_base: int = 500
    ridge: float | None = None
    voting: str = VOTING_INVERSE_DISTANCE
    baseline: str = BASELINE_IDENTITY
    plot: bool = False
    stride: int = 100
    schema: Path | None = None
    class_column: str | None = None
    columns: tuple[str, ...] | None = None
    ddm_min_observations: int = 30
    ddm_warning_level: float = 2.0
    ddm_drift_level: float = 3.0
    stream_params: Dict[str, object] = field(default_factory=dict)

    def validate(self) -> None:
        if self.instances < 1:
            raise ConfigError("instances must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0, 1]")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.baseline not in (BASELINE_IDENTITY, BASELINE_NONE):
            raise ConfigError(f"baseline must be 'identity' or 'none', got {self.baseline!r}")
        if self.voting not in (VOTING_INVERSE_DISTANCE, VOTING_MAJORITY):
            raise ConfigError(f"unknown voting mode {self.voting!r}")
        kind = self.stream.split(":", 1)[0]
        if kind != "csv" and self.stream not in GENERATOR_KINDS:
            raise ConfigError(
                f"stream must be one of {GENERATOR_KINDS} or 'csv:<path>', got {self.stream!r}"
            )
        if kind == "csv" and self.schema is None:
            raise ConfigError("csv streams require a schema file")


@dataclass
class ExperimentReport:
    """Full-resolution per-instance series plus the run summary."""

    config: ExperimentConfig
    index: np.ndarray
    loss_a: np.ndarray
    acc_a: np.ndarray
    err_a: np.ndarray
    drift_a: np.ndarray
    loss_b: np.ndarray | None
    acc_b: np.ndarray | None
    err_b: np.ndarray | None
    drift_b: np.ndarray | None
    q: np.ndarray | None
    mcnemar: np.ndarray | None
    reject: np.ndarray | None
    drift_events_a: List[int]
    drift_events_b: List[int]
    wall_clock_seconds: float
    series_path: Path | None = None
    summary_path: Path | None = None
    plot_paths: List[Path] = field(default_factory=list)

    @property
    def has_baseline(self) -> bool:
        return self.loss_b is not None

    def sampled_positions(self) -> np.ndarray:
        """Array positions of the reported rows (every stride-th instance plus the last)."""
        n = len(self.index)
        stride = self.config.stride
        positions = list(range(stride - 1, n, stride))
        if not positions or positions[-1] != n - 1:
            positions.append(n - 1)
        return np.asarray(positions, dtype=np.int64)

    def summary(self) -> Dict[str, object]:
        last = len(self.index) - 1
        out: Dict[str, object] = {
            "instances": int(self.index[-1]),
            "wall_clock_seconds": round(self.wall_clock_seconds, 6),
            "final_loss_a": int(self.loss_a[last]),
            "final_acc_a": round(float(self.acc_a[last]), 6),
            "final_err_a": round(float(self.err_a[last]), 6),
            "drift_events_a": self.drift_events_a,
        }
        if self.has_baseline:
            out["final_loss_b"] = int(self.loss_b[last])
            out["final_acc_b"] = round(float(self.acc_b[last]), 6)
            out["final_err_b"] = round(float(self.err_b[last]), 6)
            out["final_q"] = None if np.isnan(self.q[last]) else round(float(self.q[last]), 6)
            out["final_mcnemar"] = round(float(self.mcnemar[last]), 6)
            out["final_reject"] = bool(self.reject[last])
            out["drift_events_b"] = self.drift_events_b
        cfg = self.config
        out.update(
            {
                "config_stream": cfg.stream,
                "config_instances": cfg.instances,
                "config_seed": cfg.seed,
                "config_alpha": cfg.alpha,
                "config_k": cfg.k,
                "config_max_base": cfg.max_base,
                "config_ridge": cfg.ridge,
                "config_voting": cfg.voting,
                "config_baseline": cfg.baseline,
                "config_stride": cfg.stride,
                "config_stream_params": {k: v for k, v in sorted(cfg.stream_params.items())},
            }
        )
        return out


def build_stream(config: ExperimentConfig):
    """Instantiate the configured generator or CSV stream."""
    params = dict(config.stream_params)
    if config.stream.startswith("csv:"):
        path = config.stream[len("csv:"):]
        columns = parse_schema_file(config.schema)
        return load_csv(
            path,
            columns,
            class_column=config.class_column,
            feature_columns=config.columns,
        )

    def take(mapping: Dict[str, str], **defaults):
        unknown = set(params) - set(mapping)
        if unknown:
            raise ConfigError(
                f"unknown stream parameters for {config.stream!r}: {sorted(unknown)}"
            )
        kwargs = dict(defaults)
        for key, target in mapping.items():
            if key in params:
                kwargs[target] = params[key]
        return kwargs

    if config.stream == "sea":
        kwargs = take({"noise": "noise", "thresholds": "thresholds", "block_size": "block_size"})
        return SeaGenerator(config.seed, **kwargs)
    if config.stream == "hyperplane":
        kwargs = take(
            {
                "noise": "noise",
                "drift_magnitude": "drift_magnitude",
                "flip_probability": "flip_probability",
            }
        )
        return HyperplaneGenerator(config.seed, **kwargs)
    if config.stream == "rbf":
        kwargs = take(
            {"centroids": "n_centroids", "centroid_speed": "centroid_speed"},
            centroid_speed=0.0001,
        )
        return RbfGenerator(config.seed, **kwargs)
    if config.stream == "tree":
        kwargs = take({"tree_depth": "depth"})
        return RandomTreeGenerator(config.seed, **kwargs)
    if config.stream == "waveform":
        take({})
        return WaveformGenerator(config.seed)
    raise ConfigError(f"unknown stream kind {config.stream!r}")


def _build_classifier(config: ExperimentConfig, dim: int, learn_metric: bool) -> OnlineKissmeStream:
    return OnlineKissmeStream(
        dim,
        k=config.k,
        max_base=config.max_base,
        ridge=config.ridge,
        voting=config.voting,
        learn_metric=learn_metric,
        ddm_min_observations=config.ddm_min_observations,
        ddm_warning_level=config.ddm_warning_level,
        ddm_drift_level=config.ddm_drift_level,
    )


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Drive the stream once and write all outputs.

    Raises on configuration or stream errors; partially written output
    files are removed before the error propagates.
    """
    config.validate()
    stream = build_stream(config)
    dim = stream.schema.encoded_dim
    model_a = _build_classifier(config, dim, learn_metric=True)
    model_b = (
        _build_classifier(config, dim, learn_metric=False)
        if config.baseline == BASELINE_IDENTITY
        else None
    )

    n = config.instances
    loss_a = np.zeros(n, dtype=np.int64)
    acc_a = np.zeros(n)
    err_a = np.zeros(n)
    drift_a = np.zeros(n, dtype=np.int64)
    fading_a = FadingEstimator(config.alpha)
    drift_events_a: List[int] = []

    if model_b is not None:
        loss_b = np.zeros(n, dtype=np.int64)
        acc_b = np.zeros(n)
        err_b = np.zeros(n)
        drift_b = np.zeros(n, dtype=np.int64)
        q = np.zeros(n)
        mcnemar = np.zeros(n)
        reject = np.zeros(n, dtype=np.int64)
        fading_b = FadingEstimator(config.alpha)
        q_tracker = QTracker(config.alpha)
        mcnemar_counter = McNemarCounter()
        drift_events_b: List[int] = []
    else:
        loss_b = acc_b = err_b = drift_b = q = mcnemar = reject = None
        drift_events_b = []

    started = time.perf_counter()
    iterator = iter(stream)
    for i in range(n):
        try:
            inst = next(iterator)
        except StopIteration:
            raise StreamExhaustedError(
                f"stream ended after {i} instances, budget was {n}"
            ) from None
        pred_a = model_a.process(inst)
        la = 0 if pred_a.correct else 1
        loss_a[i] = la
        estimate = fading_a.update(la)
        err_a[i] = estimate
        acc_a[i] = 1.0 - estimate
        level_a = model_a.last_step_drift_level
        drift_a[i] = level_a.value
        if level_a.value == 2:
            drift_events_a.append(i + 1)
        if model_b is not None:
            pred_b = model_b.process(inst)
            lb = 0 if pred_b.correct else 1
            loss_b[i] = lb
            estimate_b = fading_b.update(lb)
            err_b[i] = estimate_b
            acc_b[i] = 1.0 - estimate_b
            level_b = model_b.last_step_drift_level
            drift_b[i] = level_b.value
            if level_b.value == 2:
                drift_events_b.append(i + 1)
            q_value = q_tracker.update(la, lb)
            q[i] = np.nan if q_value is None else q_value
            statistic, rejected = mcnemar_counter.update(pred_a.correct, pred_b.correct)
            mcnemar[i] = statistic
            reject[i] = int(rejected)
    wall_clock = time.perf_counter() - started

    report = ExperimentReport(
        config=config,
        index=np.arange(1, n + 1, dtype=np.int64),
        loss_a=loss_a,
        acc_a=acc_a,
        err_a=err_a,
        drift_a=drift_a,
        loss_b=loss_b,
        acc_b=acc_b,
        err_b=err_b,
        drift_b=drift_b,
        q=q,
        mcnemar=mcnemar,
        reject=reject,
        drift_events_a=drift_events_a,
        drift_events_b=drift_events_b,
        wall_clock_seconds=wall_clock,
    )
    _write_outputs(report)
    return report


def _format6(value: float) -> str:
    return f"{value:.6f}"


def write_series_csv(report: ExperimentReport, path: Path) -> None:
    """Write the sampled series rows with fixed 6-digit formatting."""
    lines = []
    if report.has_baseline:
        lines.append(
            "index,loss_a,loss_b,acc_a,acc_b,err_a,err_b,q,mcnemar,reject,drift_a,drift_b"
        )
        for pos in report.sampled_positions():
            q_value = report.q[pos]
            q_text = "" if np.isnan(q_value) else _format6(q_value)
            lines.append(
                ",".join(
                    [
                        str(int(report.index[pos])),
                        str(int(report.loss_a[pos])),
                        str(int(report.loss_b[pos])),
                        _format6(report.acc_a[pos]),
                        _format6(report.acc_b[pos]),
                        _format6(report.err_a[pos]),
                        _format6(report.err_b[pos]),
                        q_text,
                        _format6(report.mcnemar[pos]),
                        str(int(report.reject[pos])),
                        str(int(report.drift_a[pos])),
                        str(int(report.drift_b[pos])),
                    ]
                )
            )
    else:
        lines.append("index,loss_a,acc_a,err_a,drift_a")
        for pos in report.sampled_positions():
            lines.append(
                ",".join(
                    [
                        str(int(report.index[pos])),
                        str(int(report.loss_a[pos])),
                        _format6(report.acc_a[pos]),
                        _format6(report.err_a[pos]),
                        str(int(report.drift_a[pos])),
                    ]
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_outputs(report: ExperimentReport) -> None:
    out_dir = Path(report.config.out_dir)
    created: List[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        series_path = out_dir / SERIES_FILENAME
        created.append(series_path)
        write_series_csv(report, series_path)
        report.series_path = series_path
        summary_path = out_dir / SUMMARY_FILENAME
        created.append(summary_path)
        summary_path.write_text(
            json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        report.summary_path = summary_path
        if report.config.plot:
            from .plots import emit_plots

            report.plot_paths = emit_plots(report, out_dir, created=created)
    except BaseException:
        for path in created:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass
        raise
