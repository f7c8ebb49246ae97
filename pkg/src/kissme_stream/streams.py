"""Stream schemas, synthetic generators and a labelled-CSV loader.

Schemas declare each attribute as numeric or nominal over a fixed category
list; encoding copies numerics verbatim and one-hot expands nominals, so
every instance yields a real vector of the schema's encoded dimension.

All generators draw from the package's own portable RNG, which makes the
instance sequence for a given seed a pure function of the configuration.
The generator families and their conventions are documented on each class.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .errors import CsvFormatError, NumericError, SchemaError
from .instance_base import Instance
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class AttributeSpec:
    """One column: numeric when categories is None, else nominal."""

    name: str
    categories: Tuple[str, ...] | None = None

    @property
    def is_nominal(self) -> bool:
        return self.categories is not None

    @property
    def width(self) -> int:
        return 1 if self.categories is None else len(self.categories)


class StreamSchema:
    """Attribute layout and class set of a stream."""

    def __init__(self, attributes: Sequence[AttributeSpec], class_names: Sequence[str]) -> None:
        self.attributes = tuple(attributes)
        self.class_names = tuple(class_names)
        if len(self.class_names) < 2:
            raise SchemaError("a schema needs at least 2 classes")
        if not self.attributes:
            raise SchemaError("a schema needs at least 1 attribute")
        names = [spec.name for spec in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        self.encoded_dim = sum(spec.width for spec in self.attributes)
        self._all_numeric = all(not spec.is_nominal for spec in self.attributes)
        self._category_index = {
            spec.name: {cat: i for i, cat in enumerate(spec.categories)}
            for spec in self.attributes
            if spec.categories is not None
        }

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    def encode(self, raw: Sequence) -> np.ndarray:
        """Real-valued encoding of one raw attribute tuple."""
        if len(raw) != len(self.attributes):
            raise SchemaError(
                f"expected {len(self.attributes)} attributes, got {len(raw)}"
            )
        if self._all_numeric:
            out = np.asarray(raw, dtype=np.float64)
            if not np.isfinite(out).all():
                raise NumericError("non-finite numeric attribute")
            return out
        out = np.zeros(self.encoded_dim, dtype=np.float64)
        pos = 0
        for value, spec in zip(raw, self.attributes):
            if spec.categories is None:
                v = float(value)
                if not math.isfinite(v):
                    raise NumericError(f"non-finite value for attribute {spec.name!r}")
                out[pos] = v
                pos += 1
            else:
                index = self._category_index[spec.name].get(value)
                if index is None:
                    raise SchemaError(
                        f"unknown category {value!r} for attribute {spec.name!r}"
                    )
                out[pos + index] = 1.0
                pos += len(spec.categories)
        return out


def _numeric_attributes(count: int, prefix: str = "x") -> List[AttributeSpec]:
    return [AttributeSpec(f"{prefix}{i}") for i in range(count)]


class _SyntheticStream:
    """Shared machinery: RNG, arrival counter, raw-to-Instance packaging."""

    schema: StreamSchema

    def __init__(self, seed: int) -> None:
        self._rng = Xoshiro256StarStar(seed)
        self._count = 0

    def __iter__(self) -> Iterator[Instance]:
        return self

    def __next__(self) -> Instance:
        raw, label = self._draw()
        inst = Instance(
            raw=tuple(raw),
            encoded=self.schema.encode(raw),
            label=label,
            arrival_index=self._count,
        )
        self._count += 1
        return inst

    def _draw(self) -> Tuple[list, int]:
        raise NotImplementedError


def sea_label(x1: float, x2: float, threshold: float) -> int:
    """Class 0 when x1 + x2 <= threshold, else 1."""
    return 0 if x1 + x2 <= threshold else 1


class SeaGenerator(_SyntheticStream):
    """Three uniform attributes on [0, 10]; the class depends on x0 + x1.

    thresholds lists the per-block decision thresholds; with block_size
    None the first threshold applies forever (stationary stream), else the
    active threshold cycles every block_size instances. A fraction `noise`
    of labels is flipped.
    """

    def __init__(
        self,
        seed: int,
        noise: float = 0.1,
        thresholds: Sequence[float] = (8.0,),
        block_size: int | None = None,
    ) -> None:
        super().__init__(seed)
        if not thresholds:
            raise ValueError("thresholds must not be empty")
        if not 0.0 <= noise < 1.0:
            raise ValueError("noise must be in [0, 1)")
        self.noise = float(noise)
        self.thresholds = tuple(float(t) for t in thresholds)
        self.block_size = int(block_size) if block_size else None
        self.schema = StreamSchema(_numeric_attributes(3), ("0", "1"))

    def current_threshold(self) -> float:
        if self.block_size is None:
            return self.thresholds[0]
        return self.thresholds[(self._count // self.block_size) % len(self.thresholds)]

    def _draw(self) -> Tuple[list, int]:
        rng = self._rng
        raw = [rng.uniform(0.0, 10.0) for _ in range(3)]
        label = sea_label(raw[0], raw[1], self.current_threshold())
        if self.noise and rng.random() < self.noise:
            label = 1 - label
        return raw, label


class HyperplaneGenerator(_SyntheticStream):
    """Rotating-hyperplane stream over uniform attributes on [0, 1].

    The label is 1 when sum(w_i * x_i) exceeds half the weight mass. After
    every instance each weight moves by drift_magnitude in its current
    direction, and each direction flips sign with flip_probability. With
    drift_magnitude 0 the concept is frozen and no drift randomness is
    consumed. A fraction `noise` of labels is flipped.
    """

    def __init__(
        self,
        seed: int,
        n_features: int = 10,
        noise: float = 0.05,
        drift_magnitude: float = 0.001,
        flip_probability: float = 0.1,
    ) -> None:
        super().__init__(seed)
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        self.noise = float(noise)
        self.drift_magnitude = float(drift_magnitude)
        self.flip_probability = float(flip_probability)
        self.weights = [self._rng.random() for _ in range(n_features)]
        self._directions = [1.0] * n_features
        self.schema = StreamSchema(_numeric_attributes(n_features), ("0", "1"))

    def _draw(self) -> Tuple[list, int]:
        rng = self._rng
        n = len(self.weights)
        raw = [rng.random() for _ in range(n)]
        total = sum(self.weights)
        score = sum(w * x for w, x in zip(self.weights, raw))
        label = 1 if score > total / 2.0 else 0
        if self.noise and rng.random() < self.noise:
            label = 1 - label
        if self.drift_magnitude:
            for i in range(n):
                self.weights[i] += self._directions[i] * self.drift_magnitude
                if rng.random() < self.flip_probability:
                    self._directions[i] = -self._directions[i]
        return raw, label


class RbfGenerator(_SyntheticStream):
    """Gaussian-blob stream around randomly placed labelled centroids.

    Each centroid gets a centre uniform in [0, 1]^d, a class label, a
    spread and a sampling weight. An instance picks a centroid with
    probability proportional to its weight and adds an offset along a
    random unit direction with Gaussian magnitude scaled by the spread.
    With centroid_speed > 0 every centroid moves that far per instance
    along its own fixed random direction (the drifting variant).
    """

    def __init__(
        self,
        seed: int,
        n_features: int = 10,
        n_classes: int = 2,
        n_centroids: int = 50,
        centroid_speed: float = 0.0,
    ) -> None:
        super().__init__(seed)
        if n_centroids < 1:
            raise ValueError("n_centroids must be >= 1")
        if n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        rng = self._rng
        self.centroid_speed = float(centroid_speed)
        self._centres = [[rng.random() for _ in range(n_features)] for _ in range(n_centroids)]
        self._labels = [rng.randint(n_classes) for _ in range(n_centroids)]
        self._spreads = [rng.random() for _ in range(n_centroids)]
        self._weights = [rng.random() for _ in range(n_centroids)]
        self._total_weight = sum(self._weights)
        self._drift_directions = [self._random_unit(n_features) for _ in range(n_centroids)]
        self.schema = StreamSchema(
            _numeric_attributes(n_features), tuple(str(c) for c in range(n_classes))
        )

    def _random_unit(self, n: int) -> List[float]:
        while True:
            v = [self._rng.normal() for _ in range(n)]
            norm = math.sqrt(sum(c * c for c in v))
            if norm > 0.0:
                return [c / norm for c in v]

    def _pick_centroid(self) -> int:
        r = self._rng.random() * self._total_weight
        acc = 0.0
        for i, w in enumerate(self._weights):
            acc += w
            if r < acc:
                return i
        return len(self._weights) - 1

    def _draw(self) -> Tuple[list, int]:
        rng = self._rng
        i = self._pick_centroid()
        direction = self._random_unit(len(self._centres[i]))
        magnitude = rng.normal() * self._spreads[i]
        raw = [c + u * magnitude for c, u in zip(self._centres[i], direction)]
        if self.centroid_speed:
            for centre, drift in zip(self._centres, self._drift_directions):
                for j, step in enumerate(drift):
                    centre[j] += step * self.centroid_speed
        return raw, self._labels[i]


class _TreeNode:
    __slots__ = ("attribute", "threshold", "children", "label")

    def __init__(self, attribute=None, threshold=None, children=None, label=None):
        self.attribute = attribute
        self.threshold = threshold
        self.children = children
        self.label = label


class RandomTreeGenerator(_SyntheticStream):
    """Instances labelled by a randomly built decision tree.

    The tree splits on a uniformly chosen attribute at every level down to
    `depth`, where leaves get uniform random classes. Numeric attributes
    split at a uniform threshold in [0, 1] and may be reused along a path;
    nominal attributes branch once per category and are not reused on the
    same path. Instances are sampled uniformly: numerics on [0, 1],
    nominals uniform over their categories.
    """

    def __init__(
        self,
        seed: int,
        n_numeric: int = 5,
        n_nominal: int = 5,
        n_categories: int = 5,
        depth: int = 5,
        n_classes: int = 2,
    ) -> None:
        super().__init__(seed)
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.n_numeric = n_numeric
        self.n_nominal = n_nominal
        self.n_classes = n_classes
        self._categories = tuple(f"v{i}" for i in range(n_categories))
        attributes = _numeric_attributes(n_numeric, prefix="num")
        attributes += [
            AttributeSpec(f"nom{i}", self._categories) for i in range(n_nominal)
        ]
        self.schema = StreamSchema(attributes, tuple(str(c) for c in range(n_classes)))
        self._root = self._build(depth, list(range(n_nominal)))

    def _build(self, remaining: int, free_nominals: List[int]) -> _TreeNode:
        rng = self._rng
        if remaining == 0:
            return _TreeNode(label=rng.randint(self.n_classes))
        pick = rng.randint(self.n_numeric + len(free_nominals))
        if pick < self.n_numeric:
            threshold = rng.random()
            children = [
                self._build(remaining - 1, free_nominals),
                self._build(remaining - 1, free_nominals),
            ]
            return _TreeNode(attribute=pick, threshold=threshold, children=children)
        nominal = free_nominals[pick - self.n_numeric]
        rest = [n for n in free_nominals if n != nominal]
        children = [self._build(remaining - 1, rest) for _ in self._categories]
        return _TreeNode(attribute=self.n_numeric + nominal, children=children)

    def _classify(self, numerics: List[float], nominal_ids: List[int]) -> int:
        node = self._root
        while node.label is None:
            if node.threshold is not None:
                branch = 0 if numerics[node.attribute] <= node.threshold else 1
            else:
                branch = nominal_ids[node.attribute - self.n_numeric]
            node = node.children[branch]
        return node.label

    def _draw(self) -> Tuple[list, int]:
        rng = self._rng
        numerics = [rng.random() for _ in range(self.n_numeric)]
        nominal_ids = [rng.randint(len(self._categories)) for _ in range(self.n_nominal)]
        raw = numerics + [self._categories[i] for i in nominal_ids]
        return raw, self._classify(numerics, nominal_ids)


# Triangular base waves of the classic 3-class waveform task: height-6
# peaks at positions 7, 15 and 11 over 21 sample points (1-indexed).
_WAVEFORM_PEAKS = (7, 15, 11)
_WAVEFORM_COMBOS = ((0, 1), (0, 2), (1, 2))
_WAVEFORM_BASES = [
    [max(6.0 - abs(i + 1 - peak), 0.0) for i in range(21)] for peak in _WAVEFORM_PEAKS
]


class WaveformGenerator(_SyntheticStream):
    """Each instance mixes two of three triangular waves plus unit noise.

    The class (0, 1 or 2) selects the wave pair; a uniform mixing weight u
    combines them, and independent standard-normal noise is added to each
    of the 21 attributes.
    """

    def __init__(self, seed: int) -> None:
        super().__init__(seed)
        self.schema = StreamSchema(_numeric_attributes(21), ("0", "1", "2"))

    def _draw(self) -> Tuple[list, int]:
        rng = self._rng
        label = rng.randint(3)
        u = rng.random()
        first, second = _WAVEFORM_COMBOS[label]
        base_a = _WAVEFORM_BASES[first]
        base_b = _WAVEFORM_BASES[second]
        raw = [
            u * base_a[i] + (1.0 - u) * base_b[i] + rng.normal() for i in range(21)
        ]
        return raw, label


def parse_schema_file(path) -> List[AttributeSpec]:
    """Read a flat key=value schema file.

    Each line declares one column, in file order: `name=numeric` or
    `name=nominal:<cat1|cat2|...>`. Blank lines and lines starting with
    '#' are skipped.
    """
    specs: List[AttributeSpec] = []
    seen = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise SchemaError(f"{path}: line {lineno}: expected name=kind, got {line!r}")
        name, _, kind = stripped.partition("=")
        name = name.strip()
        kind = kind.strip()
        if not name or name in seen:
            raise SchemaError(f"{path}: line {lineno}: missing or duplicate column name")
        seen.add(name)
        if kind == "numeric":
            specs.append(AttributeSpec(name))
        elif kind.startswith("nominal:"):
            categories = tuple(c.strip() for c in kind[len("nominal:"):].split("|"))
            if not categories or any(not c for c in categories):
                raise SchemaError(f"{path}: line {lineno}: empty category list")
            specs.append(AttributeSpec(name, categories))
        else:
            raise SchemaError(
                f"{path}: line {lineno}: kind must be 'numeric' or 'nominal:<cats>', got {kind!r}"
            )
    if not specs:
        raise SchemaError(f"{path}: schema file declares no columns")
    return specs


class CsvStream:
    """Finite labelled stream read from a CSV file.

    The file must have a header naming every schema column in order. The
    class column (default: the last declared column) must be nominal; its
    categories become the class set. feature_columns optionally restricts
    the attribute subset (by name, in the given order), which is how
    reduced real-world setups are expressed without hard-coding columns.
    Iterate once; construct a new object to re-read.
    """

    def __init__(
        self,
        path,
        columns: Sequence[AttributeSpec],
        class_column: str | None = None,
        feature_columns: Sequence[str] | None = None,
    ) -> None:
        self.path = Path(path)
        by_name = {spec.name: spec for spec in columns}
        self._columns = list(columns)
        class_name = class_column if class_column is not None else columns[-1].name
        if class_name not in by_name:
            raise SchemaError(f"class column {class_name!r} is not declared in the schema")
        class_spec = by_name[class_name]
        if not class_spec.is_nominal:
            raise SchemaError(f"class column {class_name!r} must be nominal")
        self.class_column = class_name
        if feature_columns is None:
            features = [spec for spec in columns if spec.name != class_name]
        else:
            features = []
            for name in feature_columns:
                if name not in by_name:
                    raise SchemaError(f"selected column {name!r} is not declared in the schema")
                if name == class_name:
                    raise SchemaError("the class column cannot be a feature column")
                features.append(by_name[name])
        self.schema = StreamSchema(features, class_spec.categories)
        self._class_ids = {cat: i for i, cat in enumerate(class_spec.categories)}

    def __iter__(self) -> Iterator[Instance]:
        with open(self.path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise CsvFormatError(f"{self.path}: empty file, expected a header row")
            expected = [spec.name for spec in self._columns]
            if [h.strip() for h in header] != expected:
                raise CsvFormatError(
                    f"{self.path}: header {header!r} does not match schema columns {expected!r}"
                )
            positions = {name: i for i, name in enumerate(expected)}
            arrival = 0
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(expected):
                    raise CsvFormatError(
                        f"{self.path}: line {lineno}: expected {len(expected)} fields, got {len(row)}"
                    )
                raw = []
                for spec in self.schema.attributes:
                    token = row[positions[spec.name]].strip()
                    if spec.is_nominal:
                        raw.append(token)
                    else:
                        try:
                            value = float(token)
                        except ValueError:
                            raise CsvFormatError(
                                f"{self.path}: line {lineno}: non-numeric value {token!r} "
                                f"in numeric column {spec.name!r}"
                            ) from None
                        if not math.isfinite(value):
                            raise CsvFormatError(
                                f"{self.path}: line {lineno}: non-finite value in column {spec.name!r}"
                            )
                        raw.append(value)
                class_token = row[positions[self.class_column]].strip()
                label = self._class_ids.get(class_token)
                if label is None:
                    raise CsvFormatError(
                        f"{self.path}: line {lineno}: unknown class value {class_token!r}"
                    )
                try:
                    encoded = self.schema.encode(raw)
                except SchemaError as exc:
                    raise CsvFormatError(f"{self.path}: line {lineno}: {exc}") from None
                yield Instance(
                    raw=tuple(raw), encoded=encoded, label=label, arrival_index=arrival
                )
                arrival += 1


def load_csv(
    path,
    columns: Sequence[AttributeSpec],
    class_column: str | None = None,
    feature_columns: Sequence[str] | None = None,
) -> CsvStream:
    """Open a labelled CSV as a finite instance stream."""
    if not Path(path).exists():
        raise CsvFormatError(f"{path}: file does not exist")
    return CsvStream(path, columns, class_column, feature_columns)
