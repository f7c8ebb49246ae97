"""Instance-based data stream classification with online metric learning.

The package combines a k-NN classifier over a bounded, edited instance
base with a Mahalanobis metric learned on the fly from same-class and
different-class instance pairs, drift-triggered relearning, the matching
prequential evaluation machinery (fading factors, Q statistic, McNemar
test) and reproducible synthetic stream generators.
"""

from .classifier import (
    VOTING_INVERSE_DISTANCE,
    VOTING_MAJORITY,
    OnlineKissmeStream,
    Prediction,
)
from .drift import DdmDetector, DriftLevel
from .errors import (
    ConfigError,
    CsvFormatError,
    DimensionMismatchError,
    EmptyBaseError,
    InsufficientConstraintsError,
    KissmeStreamError,
    NumericError,
    SchemaError,
    StreamExhaustedError,
)
from .evaluation import FadingEstimator, McNemarCounter, QTracker
from .experiment import (
    BASELINE_IDENTITY,
    BASELINE_NONE,
    ExperimentConfig,
    ExperimentReport,
    run_experiment,
)
from .instance_base import Instance, InstanceBase
from .metric import (
    ConstraintAccumulator,
    compute_metric,
    log_likelihood_ratio,
    mahalanobis_distance,
)
from .rng import Xoshiro256StarStar
from .streams import (
    AttributeSpec,
    CsvStream,
    HyperplaneGenerator,
    RandomTreeGenerator,
    RbfGenerator,
    SeaGenerator,
    StreamSchema,
    WaveformGenerator,
    load_csv,
    parse_schema_file,
    sea_label,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "BASELINE_IDENTITY",
    "BASELINE_NONE",
    "ConfigError",
    "ConstraintAccumulator",
    "CsvFormatError",
    "CsvStream",
    "DdmDetector",
    "DimensionMismatchError",
    "DriftLevel",
    "EmptyBaseError",
    "ExperimentConfig",
    "ExperimentReport",
    "FadingEstimator",
    "HyperplaneGenerator",
    "Instance",
    "InstanceBase",
    "InsufficientConstraintsError",
    "KissmeStreamError",
    "McNemarCounter",
    "NumericError",
    "OnlineKissmeStream",
    "Prediction",
    "QTracker",
    "RandomTreeGenerator",
    "RbfGenerator",
    "SchemaError",
    "SeaGenerator",
    "StreamExhaustedError",
    "StreamSchema",
    "VOTING_INVERSE_DISTANCE",
    "VOTING_MAJORITY",
    "WaveformGenerator",
    "Xoshiro256StarStar",
    "compute_metric",
    "load_csv",
    "log_likelihood_ratio",
    "mahalanobis_distance",
    "parse_schema_file",
    "run_experiment",
    "sea_label",
]
