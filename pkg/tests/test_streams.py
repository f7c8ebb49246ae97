from pathlib import Path

import numpy as np
import pytest

from kissme_stream import (
    AttributeSpec,
    CsvFormatError,
    HyperplaneGenerator,
    NumericError,
    RandomTreeGenerator,
    RbfGenerator,
    SchemaError,
    SeaGenerator,
    StreamSchema,
    WaveformGenerator,
    load_csv,
    parse_schema_file,
    sea_label,
)
from kissme_stream.streams import _WAVEFORM_BASES, _WAVEFORM_COMBOS

GOLDEN_DIR = Path(__file__).parent / "golden"
GOLDEN_SEED = 7

GENERATORS = {
    "sea": lambda: SeaGenerator(GOLDEN_SEED),
    "hyperplane": lambda: HyperplaneGenerator(GOLDEN_SEED),
    "rbf": lambda: RbfGenerator(GOLDEN_SEED),
    "tree": lambda: RandomTreeGenerator(GOLDEN_SEED),
    "waveform": lambda: WaveformGenerator(GOLDEN_SEED),
}


def format_instance(inst):
    cells = [f"{v:.6f}" if isinstance(v, float) else str(v) for v in inst.raw]
    cells.append(str(inst.label))
    return ",".join(cells)


class TestEncode:
    def test_one_hot_expansion(self):
        schema = StreamSchema(
            [AttributeSpec("colour", ("red", "green", "blue"))], ("0", "1")
        )
        np.testing.assert_array_equal(schema.encode(["green"]), [0.0, 1.0, 0.0])

    def test_numeric_only_is_identity(self):
        schema = StreamSchema([AttributeSpec("a"), AttributeSpec("b")], ("0", "1"))
        np.testing.assert_array_equal(schema.encode([2.5, -1.0]), [2.5, -1.0])

    def test_mixed_layout(self):
        schema = StreamSchema(
            [AttributeSpec("a"), AttributeSpec("c", ("red", "green", "blue"))], ("0", "1")
        )
        assert schema.encoded_dim == 4
        np.testing.assert_array_equal(schema.encode([2.5, "blue"]), [2.5, 0.0, 0.0, 1.0])

    def test_unknown_category_rejected(self):
        schema = StreamSchema([AttributeSpec("c", ("red", "green"))], ("0", "1"))
        with pytest.raises(SchemaError):
            schema.encode(["blue"])

    def test_arity_mismatch_rejected(self):
        schema = StreamSchema([AttributeSpec("a"), AttributeSpec("b")], ("0", "1"))
        with pytest.raises(SchemaError):
            schema.encode([1.0])

    def test_non_finite_numeric_rejected(self):
        schema = StreamSchema([AttributeSpec("a")], ("0", "1"))
        with pytest.raises(NumericError):
            schema.encode([float("nan")])

    def test_injective_on_distinct_raws(self):
        schema = StreamSchema(
            [AttributeSpec("a"), AttributeSpec("c", ("x", "y", "z"))], ("0", "1")
        )
        raws = [(v, c) for v in (0.0, 1.0, 2.0) for c in ("x", "y", "z")]
        encodings = {tuple(schema.encode(list(r))) for r in raws}
        assert len(encodings) == len(raws)


class TestGeneratorContracts:
    @pytest.mark.parametrize("name", sorted(GENERATORS))
    def test_same_seed_same_first_hundred(self, name):
        first = GENERATORS[name]()
        second = GENERATORS[name]()
        for _ in range(100):
            a, b = next(first), next(second)
            assert a.raw == b.raw
            assert a.label == b.label
            assert a.arrival_index == b.arrival_index

    @pytest.mark.parametrize("name", sorted(GENERATORS))
    def test_golden_first_hundred(self, name):
        golden = (GOLDEN_DIR / f"{name}.csv").read_text().splitlines()
        gen = GENERATORS[name]()
        header = ",".join([spec.name for spec in gen.schema.attributes] + ["class"])
        assert golden[0] == header
        for lineno, line in enumerate(golden[1:], start=1):
            assert format_instance(next(gen)) == line, f"{name} row {lineno} diverged"

    def test_arrival_indices_increment(self):
        gen = SeaGenerator(1)
        assert [next(gen).arrival_index for _ in range(5)] == [0, 1, 2, 3, 4]


class TestSea:
    def test_attributes_in_range(self):
        gen = SeaGenerator(5)
        for _ in range(500):
            inst = next(gen)
            assert all(0.0 <= v <= 10.0 for v in inst.raw)

    def test_adopted_labelling_convention(self):
        assert sea_label(3.0, 4.0, threshold=8.0) == 0
        assert sea_label(5.0, 4.0, threshold=8.0) == 1

    def test_noise_free_labels_match_rule(self):
        gen = SeaGenerator(5, noise=0.0)
        for _ in range(500):
            inst = next(gen)
            assert inst.label == sea_label(inst.raw[0], inst.raw[1], 8.0)

    def test_noise_fraction_close_to_configured_rate(self):
        gen = SeaGenerator(31, noise=0.1)
        flipped = 0
        n = 100_000
        for _ in range(n):
            inst = next(gen)
            flipped += inst.label != sea_label(inst.raw[0], inst.raw[1], 8.0)
        assert abs(flipped / n - 0.1) <= 0.01

    def test_block_thresholds_cycle(self):
        gen = SeaGenerator(5, noise=0.0, thresholds=(8.0, 9.0, 7.0, 9.5), block_size=10)
        thresholds = []
        for i in range(40):
            thresholds.append(gen.current_threshold())
            next(gen)
        assert thresholds[:10] == [8.0] * 10
        assert thresholds[10:20] == [9.0] * 10
        assert thresholds[20:30] == [7.0] * 10
        assert thresholds[30:40] == [9.5] * 10


class TestHyperplane:
    def test_attributes_in_unit_cube(self):
        gen = HyperplaneGenerator(6)
        for _ in range(300):
            assert all(0.0 <= v <= 1.0 for v in next(gen).raw)

    def test_frozen_concept_matches_rule(self):
        gen = HyperplaneGenerator(6, noise=0.0, drift_magnitude=0.0)
        weights = list(gen.weights)
        for _ in range(300):
            inst = next(gen)
            score = sum(w * x for w, x in zip(weights, inst.raw))
            expected = 1 if score > sum(weights) / 2.0 else 0
            assert inst.label == expected

    def test_drift_moves_weights(self):
        gen = HyperplaneGenerator(6, drift_magnitude=0.01)
        before = list(gen.weights)
        for _ in range(100):
            next(gen)
        assert gen.weights != before


class TestRbf:
    def test_dimension_and_labels(self):
        gen = RbfGenerator(9)
        assert gen.schema.encoded_dim == 10
        for _ in range(200):
            assert next(gen).label in (0, 1)

    def test_moving_centroids_change_the_stream(self):
        frozen = RbfGenerator(9, centroid_speed=0.0)
        moving = RbfGenerator(9, centroid_speed=0.01)
        diverged = False
        for _ in range(200):
            if next(frozen).raw != next(moving).raw:
                diverged = True
                break
        assert diverged


class TestRandomTree:
    def test_schema_shape(self):
        gen = RandomTreeGenerator(3)
        assert gen.schema.encoded_dim == 5 + 5 * 5
        inst = next(gen)
        assert len(inst.raw) == 10
        assert all(isinstance(v, float) for v in inst.raw[:5])
        assert all(v in ("v0", "v1", "v2", "v3", "v4") for v in inst.raw[5:])

    def test_labels_within_class_count(self):
        gen = RandomTreeGenerator(3)
        labels = {next(gen).label for _ in range(300)}
        assert labels <= {0, 1}

    def test_tree_is_a_deterministic_function_of_attributes(self):
        gen = RandomTreeGenerator(3)
        numerics = [0.3, 0.7, 0.1, 0.9, 0.5]
        ids = [0, 1, 2, 3, 4]
        assert gen._classify(numerics, ids) == gen._classify(numerics, ids)


class TestWaveform:
    def test_schema_shape_and_classes(self):
        gen = WaveformGenerator(2)
        assert gen.schema.encoded_dim == 21
        labels = {next(gen).label for _ in range(300)}
        assert labels == {0, 1, 2}

    def test_class_conditional_mean_matches_wave_combination(self):
        gen = WaveformGenerator(13)
        sums = {0: np.zeros(21), 1: np.zeros(21), 2: np.zeros(21)}
        counts = {0: 0, 1: 0, 2: 0}
        for _ in range(6000):
            inst = next(gen)
            sums[inst.label] += np.asarray(inst.raw)
            counts[inst.label] += 1
        for label, (a, b) in enumerate(_WAVEFORM_COMBOS):
            expected = (np.array(_WAVEFORM_BASES[a]) + np.array(_WAVEFORM_BASES[b])) / 2.0
            observed = sums[label] / counts[label]
            np.testing.assert_allclose(observed, expected, atol=0.25)


SCHEMA_TEXT = """\
# toy network-flow style layout
duration=numeric
bytes=numeric
protocol=nominal:tcp|udp|icmp
flag=nominal:ok|err
class=nominal:normal|attack
"""

CSV_TEXT = """\
duration,bytes,protocol,flag,class
1.0,200,tcp,ok,normal
2.5,10,udp,err,attack
0.0,0,icmp,ok,normal
"""


@pytest.fixture
def csv_pair(tmp_path):
    schema_path = tmp_path / "flows.schema"
    schema_path.write_text(SCHEMA_TEXT)
    csv_path = tmp_path / "flows.csv"
    csv_path.write_text(CSV_TEXT)
    return schema_path, csv_path


class TestSchemaFile:
    def test_parse_kinds_and_order(self, csv_pair):
        schema_path, _ = csv_pair
        columns = parse_schema_file(schema_path)
        assert [c.name for c in columns] == ["duration", "bytes", "protocol", "flag", "class"]
        assert columns[0].categories is None
        assert columns[2].categories == ("tcp", "udp", "icmp")

    def test_bad_kind_rejected(self, tmp_path):
        path = tmp_path / "bad.schema"
        path.write_text("a=integer\n")
        with pytest.raises(SchemaError, match="line 1"):
            parse_schema_file(path)

    def test_duplicate_column_rejected(self, tmp_path):
        path = tmp_path / "bad.schema"
        path.write_text("a=numeric\na=numeric\n")
        with pytest.raises(SchemaError, match="line 2"):
            parse_schema_file(path)

    def test_empty_category_rejected(self, tmp_path):
        path = tmp_path / "bad.schema"
        path.write_text("a=nominal:x||y\n")
        with pytest.raises(SchemaError):
            parse_schema_file(path)


class TestLoadCsv:
    def test_three_rows_in_order(self, csv_pair):
        schema_path, csv_path = csv_pair
        stream = load_csv(csv_path, parse_schema_file(schema_path))
        instances = list(stream)
        assert len(instances) == 3
        assert [inst.arrival_index for inst in instances] == [0, 1, 2]
        assert [inst.label for inst in instances] == [0, 1, 0]
        assert stream.schema.encoded_dim == 2 + 3 + 2

    def test_feature_subset_selection(self, csv_pair):
        schema_path, csv_path = csv_pair
        stream = load_csv(
            csv_path,
            parse_schema_file(schema_path),
            feature_columns=("duration", "protocol"),
        )
        assert stream.schema.encoded_dim == 1 + 3
        first = next(iter(stream))
        np.testing.assert_array_equal(first.encoded, [1.0, 1.0, 0.0, 0.0])

    def test_non_numeric_token_names_the_line(self, csv_pair, tmp_path):
        schema_path, _ = csv_pair
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "duration,bytes,protocol,flag,class\n"
            "1.0,200,tcp,ok,normal\n"
            "oops,10,udp,err,attack\n"
        )
        with pytest.raises(CsvFormatError, match="line 3"):
            list(load_csv(bad, parse_schema_file(schema_path)))

    def test_arity_mismatch_names_the_line(self, csv_pair, tmp_path):
        schema_path, _ = csv_pair
        bad = tmp_path / "bad.csv"
        bad.write_text("duration,bytes,protocol,flag,class\n1.0,200,tcp,ok\n")
        with pytest.raises(CsvFormatError, match="line 2"):
            list(load_csv(bad, parse_schema_file(schema_path)))

    def test_unknown_class_value_rejected(self, csv_pair, tmp_path):
        schema_path, _ = csv_pair
        bad = tmp_path / "bad.csv"
        bad.write_text("duration,bytes,protocol,flag,class\n1.0,200,tcp,ok,meh\n")
        with pytest.raises(CsvFormatError, match="line 2"):
            list(load_csv(bad, parse_schema_file(schema_path)))

    def test_header_must_match_schema(self, csv_pair, tmp_path):
        schema_path, _ = csv_pair
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c,d,e\n1.0,200,tcp,ok,normal\n")
        with pytest.raises(CsvFormatError, match="header"):
            list(load_csv(bad, parse_schema_file(schema_path)))

    def test_missing_file_rejected(self, csv_pair, tmp_path):
        schema_path, _ = csv_pair
        with pytest.raises(CsvFormatError):
            load_csv(tmp_path / "nope.csv", parse_schema_file(schema_path))

    def test_numeric_class_column_rejected(self, tmp_path):
        path = tmp_path / "s.schema"
        path.write_text("a=numeric\nb=numeric\n")
        csv_path = tmp_path / "x.csv"
        csv_path.write_text("a,b\n1.0,2.0\n")
        with pytest.raises(SchemaError, match="nominal"):
            load_csv(csv_path, parse_schema_file(path))

    def test_kdd_style_subset_dimension(self, tmp_path):
        # 11 numeric + 2 nominal features (3 and 4 categories) + binary class
        lines = [f"n{i}=numeric" for i in range(11)]
        lines.append("proto=nominal:tcp|udp|icmp")
        lines.append("service=nominal:http|smtp|ftp|dns")
        lines.append("label=nominal:normal|attack")
        schema_path = tmp_path / "kdd.schema"
        schema_path.write_text("\n".join(lines) + "\n")
        header = [f"n{i}" for i in range(11)] + ["proto", "service", "label"]
        row = [str(float(i)) for i in range(11)] + ["tcp", "http", "attack"]
        csv_path = tmp_path / "kdd.csv"
        csv_path.write_text(",".join(header) + "\n" + ",".join(row) + "\n")
        stream = load_csv(csv_path, parse_schema_file(schema_path))
        assert stream.schema.encoded_dim == 11 + 3 + 4
        instances = list(stream)
        assert len(instances) == 1
        assert instances[0].label == 1
