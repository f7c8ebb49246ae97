"""Command line experiment runner.

Flags configure the stream, the classifier and the evaluation; a key=value
config file can carry the same settings plus generator-specific parameters,
with explicit flags taking precedence. Exit code 0 means the full instance
budget was processed and every output file was written.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .classifier import VOTING_INVERSE_DISTANCE, VOTING_MAJORITY
from .errors import ConfigError, KissmeStreamError
from .experiment import (
    BASELINE_IDENTITY,
    BASELINE_NONE,
    ExperimentConfig,
    run_experiment,
)

# config-file keys that map straight onto ExperimentConfig fields
_SCALAR_KEYS = {
    "stream": str,
    "schema": str,
    "instances": int,
    "seed": int,
    "alpha": float,
    "k": int,
    "max_base": int,
    "baseline": str,
    "out": str,
    "stride": int,
    "voting": str,
    "ridge": float,
    "class_column": str,
    "ddm_min_observations": int,
    "ddm_warning_level": float,
    "ddm_drift_level": float,
}

# generator parameters, forwarded through ExperimentConfig.stream_params
_STREAM_PARAM_KEYS = {
    "noise": float,
    "block_size": int,
    "drift_magnitude": float,
    "flip_probability": float,
    "centroids": int,
    "centroid_speed": float,
    "tree_depth": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kissme-stream",
        description=(
            "Run a prequential stream-classification experiment with an online "
            "Mahalanobis-metric k-NN classifier, optionally paired against the "
            "identity-metric baseline."
        ),
    )
    parser.add_argument("--config", type=Path, help="key=value config file; flags override it")
    parser.add_argument(
        "--stream",
        help="sea | hyperplane | rbf | tree | waveform | csv:<path>",
    )
    parser.add_argument("--schema", type=Path, help="schema file for csv streams")
    parser.add_argument("--instances", type=int, help="instance budget (default 100000)")
    parser.add_argument("--seed", type=int, help="64-bit generator seed (default 1)")
    parser.add_argument("--alpha", type=float, help="fading factor in (0, 1] (default 0.999)")
    parser.add_argument("--k", type=int, help="neighbours per query (default 10)")
    parser.add_argument("--max-base", type=int, help="instance base capacity (default 500)")
    parser.add_argument(
        "--baseline",
        choices=[BASELINE_IDENTITY, BASELINE_NONE],
        help="paired identity-metric run, or single-classifier mode (default identity)",
    )
    parser.add_argument("--out", type=Path, help="output directory (default ./runs/<stream>)")
    parser.add_argument(
        "--plot", action="store_const", const=True, help="also render SVG figures"
    )
    parser.add_argument("--stride", type=int, help="series row every N instances (default 100)")
    parser.add_argument(
        "--voting",
        choices=[VOTING_INVERSE_DISTANCE, VOTING_MAJORITY],
        help="neighbour voting mode (default inverse-distance)",
    )
    return parser


def parse_config_file(path: Path) -> dict:
    """Read key=value lines; '#' starts a comment, blank lines are skipped."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _SCALAR_KEYS:
            converter = _SCALAR_KEYS[key]
        elif key in _STREAM_PARAM_KEYS:
            converter = _STREAM_PARAM_KEYS[key]
        elif key in ("plot",):
            converter = _parse_bool
        elif key in ("thresholds",):
            converter = _parse_float_list
        elif key in ("columns",):
            converter = _parse_name_list
        else:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = converter(value)
        except ValueError as exc:
            raise ConfigError(f"{path}: line {lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_float_list(value: str) -> tuple:
    return tuple(float(part) for part in value.split(",") if part.strip())


def _parse_name_list(value: str) -> tuple:
    return tuple(part.strip() for part in value.split(",") if part.strip())


def _merged_settings(args: argparse.Namespace) -> dict:
    settings = parse_config_file(args.config) if args.config else {}
    flag_map = {
        "stream": args.stream,
        "schema": args.schema,
        "instances": args.instances,
        "seed": args.seed,
        "alpha": args.alpha,
        "k": args.k,
        "max_base": args.max_base,
        "baseline": args.baseline,
        "out": args.out,
        "plot": args.plot,
        "stride": args.stride,
        "voting": args.voting,
    }
    for key, value in flag_map.items():
        if value is not None:
            settings[key] = value
    return settings


def config_from_settings(settings: dict) -> ExperimentConfig:
    if "stream" not in settings:
        raise ConfigError("a stream must be given (--stream or config file)")
    stream = str(settings["stream"])
    out = settings.get("out")
    if out is None:
        out = Path("runs") / stream.replace(":", "_").replace("/", "_")
    stream_params = {
        key: settings[key]
        for key in (*_STREAM_PARAM_KEYS, "thresholds")
        if key in settings
    }
    return ExperimentConfig(
        stream=stream,
        out_dir=Path(out),
        instances=int(settings.get("instances", 100_000)),
        seed=int(settings.get("seed", 1)),
        alpha=float(settings.get("alpha", 0.999)),
        k=int(settings.get("k", 10)),
        max_base=int(settings.get("max_base", 500)),
        ridge=settings.get("ridge"),
        voting=str(settings.get("voting", VOTING_INVERSE_DISTANCE)),
        baseline=str(settings.get("baseline", BASELINE_IDENTITY)),
        plot=bool(settings.get("plot", False)),
        stride=int(settings.get("stride", 100)),
        schema=Path(settings["schema"]) if settings.get("schema") else None,
        class_column=settings.get("class_column"),
        columns=settings.get("columns"),
        ddm_min_observations=int(settings.get("ddm_min_observations", 30)),
        ddm_warning_level=float(settings.get("ddm_warning_level", 2.0)),
        ddm_drift_level=float(settings.get("ddm_drift_level", 3.0)),
        stream_params=stream_params,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_settings(_merged_settings(args))
        report = run_experiment(config)
    except (KissmeStreamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = report.summary()
    print(f"wrote {report.series_path}")
    print(f"wrote {report.summary_path}")
    for path in report.plot_paths:
        print(f"wrote {path}")
    line = f"final prequential accuracy A={summary['final_acc_a']:.6f}"
    if report.has_baseline:
        line += f" B={summary['final_acc_b']:.6f}"
    print(line)
    if report.drift_events_a:
        print(f"drift events A at instances {report.drift_events_a}")
    if report.has_baseline and report.drift_events_b:
        print(f"drift events B at instances {report.drift_events_b}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
