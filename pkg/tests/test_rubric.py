"""Rubric loading, validation, defaults, and structure findings."""

from pathlib import Path

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from visgrade.dom import parse_snapshot
from visgrade.errors import (
    DanglingReference,
    RubricError,
    SchemaViolation,
    YamlSyntax,
)
from visgrade.rubric import (
    RubricSpec,
    StructureSpec,
    dump_rubric,
    load_rubric,
    parse_rubric,
    read_csv_dataset,
    to_mapping,
    validate_structure,
)

DATA = Path(__file__).parent / "data"
SAMPLE = (DATA / "sample_rubric.yaml").read_text()


class TestLoadRubric:
    def test_sample_loads(self):
        spec = load_rubric(DATA / "sample_rubric.yaml")
        assert spec.meta.name == "line_chart"
        assert spec.meta.entry_file == "submission.html"
        assert spec.meta.total_points == 3.0
        assert spec.structure.groups == ["circles", "x-axis"]
        assert spec.structure.required[0].min_count == 5
        assert [s.id for s in spec.scales] == ["x", "y"]
        assert [t.id for t in spec.tests] == ["t_struct", "t_pos", "t_hover"]

    def test_missing_file(self):
        with pytest.raises(RubricError):
            load_rubric(DATA / "does_not_exist.yaml")

    def test_points_total_matches(self):
        spec = parse_rubric(SAMPLE)
        assert sum(t.points for t in spec.tests) == spec.meta.total_points

    def test_advisory_defaults_to_zero_points(self):
        spec = parse_rubric(SAMPLE)
        assert spec.test_by_id("t_struct").points == 0.0

    def test_tolerance_defaults(self):
        spec = parse_rubric(SAMPLE)
        assert spec.tolerances.position_px == 2.0
        assert spec.tolerances.size_px == 1.0
        assert spec.tolerances.fit_r2 == 0.999
        assert spec.settle_ms == 300

    def test_tolerance_overrides(self):
        spec = parse_rubric(SAMPLE + "tolerances: {position_px: 5.0}\nsettle_ms: 50\n")
        assert spec.tolerances.position_px == 5.0
        assert spec.tolerances.size_px == 1.0
        assert spec.settle_ms == 50

    def test_min_count_defaults_to_one(self):
        text = SAMPLE.replace(", min_count: 5", "")
        spec = parse_rubric(text)
        assert spec.structure.required[0].min_count == 1

    def test_interaction_fresh_page_default(self):
        spec = parse_rubric(SAMPLE)
        assert spec.test_by_id("t_hover").check["fresh_page"] is True

    def test_sorted_along_defaults_to_auto(self):
        text = SAMPLE.replace(
            "check: {structure: true}",
            "check: {sorted: {marks: rect, key: height, order: ascending}}"
        ).replace("category: advisory", "category: appearance, points: 1"
                  ).replace("total_points: 3", "total_points: 4")
        spec = parse_rubric(text)
        assert spec.tests[0].check["sorted"]["along"] == "auto"

    def test_deterministic(self):
        assert parse_rubric(SAMPLE) == parse_rubric(SAMPLE)

    def test_roundtrip(self):
        spec = parse_rubric(SAMPLE)
        assert parse_rubric(dump_rubric(spec)) == spec

    def test_quantile_color_scale(self):
        text = SAMPLE.replace(
            'scales:',
            'scales:\n'
            '  - {id: color, kind: quantile-color, marks: "g#map path", k: 4}',
        )
        spec = parse_rubric(text)
        color = spec.scale_by_id("color")
        assert color.orientation == "color"
        assert color.k == 4
        assert color.value_attr == "data-value"

    def test_scale_lookup_raises_on_unknown(self):
        spec = parse_rubric(SAMPLE)
        with pytest.raises(KeyError):
            spec.scale_by_id("z")


class TestMalformedCorpus:
    MANIFEST = yaml.safe_load((DATA / "malformed" / "manifest.yaml").read_text())
    ERROR_CLASSES = {
        "YamlSyntax": YamlSyntax,
        "SchemaViolation": SchemaViolation,
        "DanglingReference": DanglingReference,
    }

    def test_corpus_is_large_enough(self):
        assert len(self.MANIFEST) >= 20
        assert set(self.MANIFEST.values()) == set(self.ERROR_CLASSES)

    @pytest.mark.parametrize("name", sorted(MANIFEST))
    def test_malformed_file_raises_declared_class(self, name):
        expected = self.ERROR_CLASSES[self.MANIFEST[name]]
        with pytest.raises(expected):
            load_rubric(DATA / "malformed" / name)

    def test_yaml_syntax_reports_line(self):
        with pytest.raises(YamlSyntax) as exc:
            parse_rubric("schema: 1\nmeta: : broken\n")
        assert exc.value.line == 2

    def test_schema_violation_reports_path(self):
        with pytest.raises(SchemaViolation) as exc:
            parse_rubric(SAMPLE.replace("total_points: 3", "total_points: lots"))
        assert "total_points" in exc.value.path

    def test_points_mismatch_names_both_numbers(self):
        with pytest.raises(SchemaViolation) as exc:
            parse_rubric(SAMPLE.replace("total_points: 3", "total_points: 6"))
        assert exc.value.path == "meta.total_points"
        assert "3" in str(exc.value) and "6" in str(exc.value)

    def test_dangling_reference_names_test_and_target(self):
        with pytest.raises(DanglingReference) as exc:
            parse_rubric(SAMPLE.replace("x_scale: x", "x_scale: time"))
        assert exc.value.test_id == "t_pos"
        assert exc.value.missing == "time"


class TestValidateStructure:
    SNAPSHOT = parse_snapshot("""
        <svg id="chart">
          <g id="circles">
            <circle/><circle/><circle/><circle/><circle/>
          </g>
          <g id="x-axis"></g>
        </svg>
    """)

    def test_all_satisfied(self):
        spec = parse_rubric(SAMPLE).structure
        findings = validate_structure(spec, self.SNAPSHOT)
        assert [f.selector for f in findings] == ["g#circles", "g#x-axis",
                                                  "g#circles circle"]
        assert all(f.satisfied for f in findings)

    def test_missing_group(self):
        spec = StructureSpec(svg_selector="svg", groups=["lines", "circles"])
        findings = validate_structure(spec, self.SNAPSHOT)
        assert [f.satisfied for f in findings] == [False, True]
        assert findings[0].selector == "g#lines"
        assert "Missing" in findings[0].describe()

    def test_count_below_minimum(self):
        from visgrade.rubric import RequiredElement
        spec = StructureSpec(
            svg_selector="svg",
            required=[RequiredElement(selector="g#circles circle", min_count=10)])
        findings = validate_structure(spec, self.SNAPSHOT)
        assert findings[0].found == 5
        assert findings[0].expected_min == 10
        assert not findings[0].satisfied
        assert "5" in findings[0].describe() and "10" in findings[0].describe()

    def test_nine_of_ten_circles(self):
        from visgrade.rubric import RequiredElement
        snapshot = parse_snapshot(
            "<svg><g id='circles'>" + "<circle/>" * 9 + "</g></svg>")
        spec = StructureSpec(
            svg_selector="svg",
            required=[RequiredElement(selector="g#circles circle", min_count=10)])
        finding = validate_structure(spec, snapshot)[0]
        assert (finding.found, finding.expected_min, finding.satisfied) == (9, 10, False)

    def test_missing_svg_scopes_to_root(self):
        spec = StructureSpec(svg_selector="svg#nope", groups=["circles"])
        findings = validate_structure(spec, self.SNAPSHOT)
        assert findings[0].satisfied  # still discoverable from the root

    def test_ordering_matches_declaration(self):
        spec = parse_rubric(SAMPLE).structure
        findings = validate_structure(spec, self.SNAPSHOT)
        assert [f.selector for f in findings] == (
            [f"g#{g}" for g in spec.groups] + [r.selector for r in spec.required])


class TestDatasets:
    def test_read_csv(self, tmp_path):
        csv_file = tmp_path / "ratings.csv"
        csv_file.write_text("year,count,title\n1980,10,Alpha\n1990,20.5,Beta\n")
        rows = read_csv_dataset(csv_file)
        assert rows == [
            {"year": 1980.0, "count": 10.0, "title": "Alpha"},
            {"year": 1990.0, "count": 20.5, "title": "Beta"},
        ]

    def test_blank_lines_skipped(self, tmp_path):
        csv_file = tmp_path / "d.csv"
        csv_file.write_text("a,b\n1,2\n\n3,4\n")
        assert len(read_csv_dataset(csv_file)) == 2

    def test_duplicate_header_binds_first(self, tmp_path):
        csv_file = tmp_path / "d.csv"
        csv_file.write_text("a,a\n1,2\n")
        assert read_csv_dataset(csv_file) == [{"a": 1.0}]

    def test_missing_file(self, tmp_path):
        with pytest.raises(RubricError):
            read_csv_dataset(tmp_path / "nope.csv")

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "e.csv"
        empty.write_text("")
        with pytest.raises(RubricError):
            read_csv_dataset(empty)


class TestProperties:
    @given(st.lists(st.floats(min_value=0, max_value=50, allow_nan=False), min_size=1,
                    max_size=6).map(lambda pts: [round(p, 2) for p in pts]))
    @settings(max_examples=40)
    def test_any_consistent_point_split_loads(self, points):
        tests = "\n".join(
            f"  - {{id: t{i}, category: appearance, points: {p},\n"
            f"     check: {{constant: {{marks: rect, attribute: width}}}}}}"
            for i, p in enumerate(points))
        text = (
            "schema: 1\n"
            f"meta: {{name: n, entry_file: e.html, total_points: {sum(points)}}}\n"
            "structure: {svg_selector: svg}\n"
            "tests:\n" + tests + "\n")
        spec = parse_rubric(text)
        assert spec.meta.total_points == pytest.approx(sum(points))

    @given(st.text(max_size=40))
    @settings(max_examples=60)
    def test_arbitrary_text_never_crashes_uncontrolled(self, text):
        try:
            spec = parse_rubric(text)
        except RubricError:
            return
        assert isinstance(spec, RubricSpec)

    def test_to_mapping_is_plain_yaml_data(self):
        doc = to_mapping(parse_rubric(SAMPLE))
        assert yaml.safe_load(yaml.safe_dump(doc)) == doc
