"""Load and validate grading configurations.

A rubric is a YAML file (``schema: 1``) declaring the required DOM
structure, the mandated scales, the graded tests with their point values,
and dataset bindings. Loading validates shape (JSON-schema), semantics
(category rules, point totals), and cross-references (scale and dataset
ids), and fills documented defaults. A loaded spec is immutable by
convention and safe to share across grading workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

from .dom import ElementNode, parse_selector, select
from .errors import (
    DanglingReference,
    InvalidSelector,
    RubricError,
    SchemaViolation,
    YamlSyntax,
)

SCHEMA_VERSION = 1

CATEGORIES = ("advisory", "appearance", "positioning", "interaction")
SCALE_KINDS = ("linear", "log", "sqrt", "time", "band", "quantile-color")
ORIENTATIONS = ("horizontal", "vertical", "color")
SORT_ORDERS = ("ascending", "descending")
ALONG = ("x", "y", "auto")
ACTION_KINDS = ("move_to", "click", "double_click", "drag_by", "drag_to",
                "select_option", "pause", "scroll_to")
RELATIONS = ("equal", "changed", "unchanged", "greater_than_before",
             "less_than_before", "element_appears", "element_disappears",
             "position_changed")
# second key allowed alongside each interaction discriminator
CHECK_KINDS = ("structure", "layout", "scale_fit", "positions", "sorted",
               "constant", "color_grouping", "axis_ticks", "actions")

MAX_PAUSE_MS = 10_000


# --------------------------------------------------------------------------
# spec types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Tolerances:
    position_px: float = 2.0
    size_px: float = 1.0
    fit_r2: float = 0.999


@dataclass
class MetaSpec:
    name: str
    entry_file: str
    total_points: float


@dataclass
class RequiredElement:
    selector: str
    min_count: int = 1


@dataclass
class StructureSpec:
    svg_selector: str
    groups: list[str] = field(default_factory=list)
    required: list[RequiredElement] = field(default_factory=list)


@dataclass
class ScaleSpec:
    id: str
    kind: str
    orientation: str
    axis_group: str | None = None
    expected_domain: object = None  # [lo, hi] pair, category list, or dataset binding
    marks: str | None = None        # quantile-color: where the colored marks live
    k: int | None = None            # quantile-color: bucket count
    value_attr: str = "data-value"  # quantile-color: attribute carrying the datum


@dataclass
class TestSpec:
    id: str
    category: str
    points: float
    check: dict
    feedback_hint: str | None = None


@dataclass
class RubricSpec:
    meta: MetaSpec
    structure: StructureSpec
    scales: list[ScaleSpec] = field(default_factory=list)
    tests: list[TestSpec] = field(default_factory=list)
    datasets: dict[str, str] = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    settle_ms: int = 300
    ready_selector: str | None = None
    source_dir: str | None = field(default=None, compare=False)

    def scale_by_id(self, scale_id: str) -> ScaleSpec:
        for scale in self.scales:
            if scale.id == scale_id:
                return scale
        raise KeyError(scale_id)

    def test_by_id(self, test_id: str) -> TestSpec:
        for test in self.tests:
            if test.id == test_id:
                return test
        raise KeyError(test_id)


# --------------------------------------------------------------------------
# shape schema
# --------------------------------------------------------------------------

_SELECTOR = {"type": "string", "minLength": 1}

RUBRIC_SCHEMA = {
    "type": "object",
    "required": ["schema", "meta", "structure", "tests"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "meta": {
            "type": "object",
            "required": ["name", "entry_file", "total_points"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string", "minLength": 1},
                "entry_file": {"type": "string", "minLength": 1},
                "total_points": {"type": "number", "minimum": 0},
            },
        },
        "structure": {
            "type": "object",
            "required": ["svg_selector"],
            "additionalProperties": False,
            "properties": {
                "svg_selector": _SELECTOR,
                "groups": {
                    "type": "array",
                    "items": {"type": "string", "minLength": 1},
                    "uniqueItems": True,
                },
                "required": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["selector"],
                        "additionalProperties": False,
                        "properties": {
                            "selector": _SELECTOR,
                            "min_count": {"type": "integer", "minimum": 1},
                        },
                    },
                },
            },
        },
        "datasets": {
            "type": "object",
            "additionalProperties": {"type": "string", "minLength": 1},
        },
        "scales": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": list(SCALE_KINDS)},
                    "orientation": {"enum": list(ORIENTATIONS)},
                    "axis_group": _SELECTOR,
                    "expected_domain": {
                        "anyOf": [
                            {"type": "array", "minItems": 2},
                            {
                                "type": "object",
                                "required": ["from_dataset", "field"],
                                "additionalProperties": False,
                                "properties": {
                                    "from_dataset": {"type": "string"},
                                    "field": {"type": "string"},
                                },
                            },
                        ]
                    },
                    "marks": _SELECTOR,
                    "k": {"type": "integer", "minimum": 2},
                    "value_attr": {"type": "string", "minLength": 1},
                },
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "position_px": {"type": "number", "exclusiveMinimum": 0},
                "size_px": {"type": "number", "exclusiveMinimum": 0},
                "fit_r2": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "settle_ms": {"type": "integer", "minimum": 0, "maximum": MAX_PAUSE_MS},
        "ready_selector": _SELECTOR,
        "tests": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "category", "check"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "category": {"enum": list(CATEGORIES)},
                    "points": {"type": "number", "minimum": 0},
                    "check": {"type": "object", "minProperties": 1},
                    "feedback_hint": {"type": "string"},
                },
            },
        },
    },
}


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------

def load_rubric(path) -> RubricSpec:
    """Read, validate, and normalize a rubric file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise RubricError(f"cannot read rubric {path}: {exc}") from exc
    spec = parse_rubric(text)
    spec.source_dir = str(Path(path).resolve().parent)
    return spec


def parse_rubric(text: str) -> RubricSpec:
    """Validate rubric YAML given as a string. Same contract as load_rubric."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 0
        problem = getattr(exc, "problem", None) or str(exc)
        raise YamlSyntax(line, problem) from exc

    error = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(RUBRIC_SCHEMA).iter_errors(doc))
    if error is not None:
        raise SchemaViolation(_json_path(error.absolute_path), error.message)

    spec = _build_spec(doc)
    _check_semantics(spec)
    _check_references(spec)
    return spec


def _json_path(segments) -> str:
    out = ""
    for seg in segments:
        out += f"[{seg}]" if isinstance(seg, int) else (f".{seg}" if out else str(seg))
    return out or "<document>"


def _selector_or_violation(expr: str, path: str) -> str:
    try:
        parse_selector(expr)
    except InvalidSelector as exc:
        raise SchemaViolation(path, str(exc)) from exc
    return expr


def _build_spec(doc: dict) -> RubricSpec:
    meta = MetaSpec(name=doc["meta"]["name"],
                    entry_file=doc["meta"]["entry_file"],
                    total_points=float(doc["meta"]["total_points"]))

    raw_structure = doc["structure"]
    structure = StructureSpec(
        svg_selector=_selector_or_violation(
            raw_structure["svg_selector"], "structure.svg_selector"),
        groups=list(raw_structure.get("groups", [])),
        required=[
            RequiredElement(
                selector=_selector_or_violation(
                    item["selector"], f"structure.required[{i}].selector"),
                min_count=item.get("min_count", 1),
            )
            for i, item in enumerate(raw_structure.get("required", []))
        ],
    )

    scales = []
    for i, raw in enumerate(doc.get("scales", [])):
        kind = raw["kind"]
        default_orientation = "color" if kind == "quantile-color" else None
        orientation = raw.get("orientation", default_orientation)
        if orientation is None:
            raise SchemaViolation(f"scales[{i}].orientation",
                                  f"orientation is required for kind {kind}")
        scales.append(ScaleSpec(
            id=raw["id"],
            kind=kind,
            orientation=orientation,
            axis_group=raw.get("axis_group"),
            expected_domain=raw.get("expected_domain"),
            marks=raw.get("marks"),
            k=raw.get("k"),
            value_attr=raw.get("value_attr", "data-value"),
        ))

    tests = []
    for i, raw in enumerate(doc.get("tests", [])):
        category = raw["category"]
        if "points" not in raw and category != "advisory":
            raise SchemaViolation(
                f"tests[{i}].points",
                f"points must be explicit for {category} tests")
        tests.append(TestSpec(
            id=raw["id"],
            category=category,
            points=float(raw.get("points", 0)),
            check=_normalize_check(raw["check"], f"tests[{i}].check"),
            feedback_hint=raw.get("feedback_hint"),
        ))

    raw_tol = doc.get("tolerances", {})
    tolerances = Tolerances(
        position_px=float(raw_tol.get("position_px", 2.0)),
        size_px=float(raw_tol.get("size_px", 1.0)),
        fit_r2=float(raw_tol.get("fit_r2", 0.999)),
    )

    return RubricSpec(
        meta=meta,
        structure=structure,
        scales=scales,
        tests=tests,
        datasets=dict(doc.get("datasets", {})),
        tolerances=tolerances,
        settle_ms=int(doc.get("settle_ms", 300)),
        ready_selector=doc.get("ready_selector"),
    )


# --------------------------------------------------------------------------
# check configs
# --------------------------------------------------------------------------

def _fail(path: str, message: str):
    raise SchemaViolation(path, message)


def _need(cfg: dict, keys: tuple[str, ...], path: str):
    for key in keys:
        if key not in cfg:
            _fail(path, f"missing required key {key!r}")


def _allow(cfg: dict, keys: set[str], path: str):
    extra = set(cfg) - keys
    if extra:
        _fail(path, f"unknown keys {sorted(extra)}")


def _sel(cfg: dict, key: str, path: str):
    value = cfg.get(key)
    if not isinstance(value, str) or not value.strip():
        _fail(f"{path}.{key}", "must be a selector string")
    _selector_or_violation(value, f"{path}.{key}")


def _normalize_check(check: dict, path: str) -> dict:
    """Validate the discriminated check config and fill its defaults."""
    kinds = [k for k in CHECK_KINDS if k in check]
    if len(kinds) != 1:
        _fail(path, f"check must contain exactly one of {CHECK_KINDS}, got {sorted(check)}")
    kind = kinds[0]
    out = dict(check)

    if kind in ("structure", "layout"):
        _allow(check, {kind}, path)
        if check[kind] is not True:
            _fail(f"{path}.{kind}", "value must be true")

    elif kind == "scale_fit":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.scale_fit", "must be a mapping")
        _need(cfg, ("scale",), f"{path}.scale_fit")
        _allow(cfg, {"scale"}, f"{path}.scale_fit")
        _allow(check, {kind}, path)

    elif kind == "positions":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.positions", "must be a mapping")
        _need(cfg, ("marks", "x_scale", "y_scale", "dataset", "x_field", "y_field"),
              f"{path}.positions")
        _allow(cfg, {"marks", "x_scale", "y_scale", "dataset", "x_field", "y_field",
                     "tolerance_px", "exact_count", "partial"}, f"{path}.positions")
        _sel(cfg, "marks", f"{path}.positions")
        if "tolerance_px" in cfg and not (isinstance(cfg["tolerance_px"], (int, float))
                                          and cfg["tolerance_px"] > 0):
            _fail(f"{path}.positions.tolerance_px", "must be a positive number")
        if cfg.get("partial") not in (None, "linear"):
            _fail(f"{path}.positions.partial", "only 'linear' is supported")
        _allow(check, {kind}, path)

    elif kind == "sorted":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.sorted", "must be a mapping")
        _need(cfg, ("marks", "key", "order"), f"{path}.sorted")
        _allow(cfg, {"marks", "key", "order", "along"}, f"{path}.sorted")
        _sel(cfg, "marks", f"{path}.sorted")
        if cfg["order"] not in SORT_ORDERS:
            _fail(f"{path}.sorted.order", f"must be one of {SORT_ORDERS}")
        cfg = dict(cfg)
        cfg.setdefault("along", "auto")
        if cfg["along"] not in ALONG:
            _fail(f"{path}.sorted.along", f"must be one of {ALONG}")
        out["sorted"] = cfg

    elif kind == "constant":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.constant", "must be a mapping")
        _need(cfg, ("marks", "attribute"), f"{path}.constant")
        _allow(cfg, {"marks", "attribute", "tolerance"}, f"{path}.constant")
        _sel(cfg, "marks", f"{path}.constant")
        if "tolerance" in cfg and not (isinstance(cfg["tolerance"], (int, float))
                                       and cfg["tolerance"] >= 0):
            _fail(f"{path}.constant.tolerance", "must be a non-negative number")
        _allow(check, {kind}, path)

    elif kind == "color_grouping":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.color_grouping", "must be a mapping")
        _need(cfg, ("groups",), f"{path}.color_grouping")
        _allow(cfg, {"groups"}, f"{path}.color_grouping")
        groups = cfg["groups"]
        if not isinstance(groups, list) or not groups:
            _fail(f"{path}.color_grouping.groups", "must be a non-empty list")
        for i, group in enumerate(groups):
            if not isinstance(group, dict) or set(group) != {"marks"}:
                _fail(f"{path}.color_grouping.groups[{i}]",
                      "each group is a mapping with a single 'marks' selector")
            _sel(group, "marks", f"{path}.color_grouping.groups[{i}]")
        _allow(check, {kind}, path)

    elif kind == "axis_ticks":
        cfg = check[kind]
        if not isinstance(cfg, dict):
            _fail(f"{path}.axis_ticks", "must be a mapping")
        _need(cfg, ("scale",), f"{path}.axis_ticks")
        _allow(cfg, {"scale", "expected_interval", "expected_values"},
               f"{path}.axis_ticks")
        has_interval = "expected_interval" in cfg
        has_values = "expected_values" in cfg
        if has_interval == has_values:
            _fail(f"{path}.axis_ticks",
                  "exactly one of expected_interval / expected_values is required")
        if has_interval and not (isinstance(cfg["expected_interval"], (int, float))
                                 and cfg["expected_interval"] > 0):
            _fail(f"{path}.axis_ticks.expected_interval", "must be a positive number")
        if has_values and (not isinstance(cfg["expected_values"], list)
                           or not cfg["expected_values"]):
            _fail(f"{path}.axis_ticks.expected_values", "must be a non-empty list")
        _allow(check, {kind}, path)

    else:  # actions: an interaction chain
        _allow(check, {"actions", "assert", "fresh_page", "settle_ms"}, path)
        actions = check.get("actions")
        asserts = check.get("assert")
        if not isinstance(actions, list) or not actions:
            _fail(f"{path}.actions", "interaction tests need at least one action")
        if not isinstance(asserts, list) or not asserts:
            _fail(f"{path}.assert", "interaction tests need at least one assertion")
        for i, step in enumerate(actions):
            _check_action(step, f"{path}.actions[{i}]")
        for i, assertion in enumerate(asserts):
            _check_assertion(assertion, f"{path}.assert[{i}]")
        if "settle_ms" in check and not (isinstance(check["settle_ms"], int)
                                         and 0 <= check["settle_ms"] <= MAX_PAUSE_MS):
            _fail(f"{path}.settle_ms", f"must be an integer 0..{MAX_PAUSE_MS}")
        if "fresh_page" in check and not isinstance(check["fresh_page"], bool):
            _fail(f"{path}.fresh_page", "must be a boolean")
        out.setdefault("fresh_page", True)

    return out


def _check_action(step, path: str):
    if not isinstance(step, dict) or len(step) != 1:
        _fail(path, "each action is a single-key mapping")
    kind, payload = next(iter(step.items()))
    if kind not in ACTION_KINDS:
        _fail(path, f"unknown action {kind!r}; expected one of {ACTION_KINDS}")
    if kind in ("move_to", "click", "double_click", "scroll_to"):
        if not isinstance(payload, str) or not payload.strip():
            _fail(f"{path}.{kind}", "must be a selector string")
        _selector_or_violation(payload, f"{path}.{kind}")
    elif kind == "drag_by":
        if not isinstance(payload, dict) or set(payload) != {"target", "dx", "dy"}:
            _fail(f"{path}.drag_by", "needs keys target, dx, dy")
        _sel(payload, "target", f"{path}.drag_by")
        for axis in ("dx", "dy"):
            value = payload[axis]
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                _fail(f"{path}.drag_by.{axis}", "must be a finite number")
    elif kind == "drag_to":
        if not isinstance(payload, dict) or set(payload) != {"target", "x", "y"}:
            _fail(f"{path}.drag_to", "needs keys target, x, y")
        _sel(payload, "target", f"{path}.drag_to")
        for axis in ("x", "y"):
            value = payload[axis]
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                _fail(f"{path}.drag_to.{axis}", "must be a finite number")
    elif kind == "select_option":
        if not isinstance(payload, dict) or set(payload) != {"target", "value"}:
            _fail(f"{path}.select_option", "needs keys target, value")
        _sel(payload, "target", f"{path}.select_option")
    elif kind == "pause":
        if not isinstance(payload, int) or not 0 <= payload <= MAX_PAUSE_MS:
            _fail(f"{path}.pause", f"must be an integer 0..{MAX_PAUSE_MS} ms")


_NO_ATTRIBUTE_RELATIONS = ("element_appears", "element_disappears", "position_changed")


def _check_assertion(assertion, path: str):
    if not isinstance(assertion, dict):
        _fail(path, "each assertion is a mapping")
    _need(assertion, ("target", "relation"), path)
    _allow(assertion, {"target", "relation", "attribute", "value"}, path)
    _sel(assertion, "target", path)
    relation = assertion["relation"]
    if relation not in RELATIONS:
        _fail(f"{path}.relation", f"unknown relation {relation!r}")
    if relation == "equal" and "value" not in assertion:
        _fail(f"{path}.value", "relation 'equal' requires a literal value")
    if relation not in _NO_ATTRIBUTE_RELATIONS and "attribute" not in assertion:
        _fail(f"{path}.attribute", f"relation {relation!r} requires an attribute")


# --------------------------------------------------------------------------
# semantics and cross-references
# --------------------------------------------------------------------------

def _check_semantics(spec: RubricSpec):
    seen_groups = set()
    for gid in spec.structure.groups:
        if gid in seen_groups:
            _fail("structure.groups", f"duplicate group id {gid!r}")
        seen_groups.add(gid)

    for i, scale in enumerate(spec.scales):
        if scale.kind == "quantile-color":
            if scale.orientation != "color":
                _fail(f"scales[{i}].orientation",
                      "quantile-color scales use orientation 'color'")
            if scale.marks is None:
                _fail(f"scales[{i}].marks", "quantile-color scales need a marks selector")
            if scale.k is None:
                _fail(f"scales[{i}].k", "quantile-color scales need a bucket count k")
            _selector_or_violation(scale.marks, f"scales[{i}].marks")
        else:
            if scale.orientation == "color":
                _fail(f"scales[{i}].orientation",
                      f"orientation 'color' is only valid for quantile-color, not {scale.kind}")
            if scale.axis_group is None:
                _fail(f"scales[{i}].axis_group", f"{scale.kind} scales need an axis_group")
            _selector_or_violation(scale.axis_group, f"scales[{i}].axis_group")

    seen_scale_ids = set()
    for i, scale in enumerate(spec.scales):
        if scale.id in seen_scale_ids:
            _fail(f"scales[{i}].id", f"duplicate scale id {scale.id!r}")
        seen_scale_ids.add(scale.id)

    seen_test_ids = set()
    for i, test in enumerate(spec.tests):
        if test.id in seen_test_ids:
            _fail(f"tests[{i}].id", f"duplicate test id {test.id!r}")
        seen_test_ids.add(test.id)
        if test.category == "advisory" and test.points != 0:
            _fail(f"tests[{i}].points", "advisory tests carry 0 points")
        is_interaction_check = "actions" in test.check
        if is_interaction_check != (test.category == "interaction"):
            _fail(f"tests[{i}].category",
                  "action chains and category 'interaction' go together")

    total = sum(t.points for t in spec.tests)
    if not math.isclose(total, spec.meta.total_points, rel_tol=1e-9, abs_tol=1e-9):
        _fail("meta.total_points",
              f"tests sum to {total:g} but total_points is {spec.meta.total_points:g}")


def _check_references(spec: RubricSpec):
    scale_ids = {s.id for s in spec.scales}
    dataset_names = set(spec.datasets)

    for scale in spec.scales:
        domain = scale.expected_domain
        if isinstance(domain, dict) and domain["from_dataset"] not in dataset_names:
            raise DanglingReference(scale.id, domain["from_dataset"])

    for test in spec.tests:
        for ref in _scale_refs(test.check):
            if ref not in scale_ids:
                raise DanglingReference(test.id, ref)
        for ref in _dataset_refs(test.check):
            if ref not in dataset_names:
                raise DanglingReference(test.id, ref)


def _scale_refs(check: dict):
    if "positions" in check:
        yield check["positions"]["x_scale"]
        yield check["positions"]["y_scale"]
    if "axis_ticks" in check:
        yield check["axis_ticks"]["scale"]
    if "scale_fit" in check:
        yield check["scale_fit"]["scale"]


def _dataset_refs(check: dict):
    if "positions" in check:
        yield check["positions"]["dataset"]


# --------------------------------------------------------------------------
# serialization (round-trip support)
# --------------------------------------------------------------------------

def to_mapping(spec: RubricSpec) -> dict:
    """Canonical plain-dict form of a validated spec."""
    doc: dict = {
        "schema": SCHEMA_VERSION,
        "meta": {
            "name": spec.meta.name,
            "entry_file": spec.meta.entry_file,
            "total_points": spec.meta.total_points,
        },
        "structure": {
            "svg_selector": spec.structure.svg_selector,
            "groups": list(spec.structure.groups),
            "required": [
                {"selector": r.selector, "min_count": r.min_count}
                for r in spec.structure.required
            ],
        },
    }
    if spec.datasets:
        doc["datasets"] = dict(spec.datasets)
    if spec.scales:
        doc["scales"] = []
        for scale in spec.scales:
            entry: dict = {"id": scale.id, "kind": scale.kind,
                           "orientation": scale.orientation}
            if scale.axis_group is not None:
                entry["axis_group"] = scale.axis_group
            if scale.expected_domain is not None:
                entry["expected_domain"] = scale.expected_domain
            if scale.marks is not None:
                entry["marks"] = scale.marks
                entry["k"] = scale.k
                entry["value_attr"] = scale.value_attr
            doc["scales"].append(entry)
    doc["tolerances"] = {
        "position_px": spec.tolerances.position_px,
        "size_px": spec.tolerances.size_px,
        "fit_r2": spec.tolerances.fit_r2,
    }
    doc["settle_ms"] = spec.settle_ms
    if spec.ready_selector is not None:
        doc["ready_selector"] = spec.ready_selector
    doc["tests"] = []
    for test in spec.tests:
        entry = {"id": test.id, "category": test.category,
                 "points": test.points, "check": test.check}
        if test.feedback_hint is not None:
            entry["feedback_hint"] = test.feedback_hint
        doc["tests"].append(entry)
    return doc


def dump_rubric(spec: RubricSpec) -> str:
    return yaml.safe_dump(to_mapping(spec), sort_keys=False)


# --------------------------------------------------------------------------
# structure validation over a snapshot
# --------------------------------------------------------------------------

@dataclass
class StructureFinding:
    """One requirement checked against a snapshot."""

    selector: str
    found: int
    expected_min: int

    @property
    def satisfied(self) -> bool:
        return self.found >= self.expected_min

    def describe(self) -> str:
        if self.satisfied:
            return f"Found {self.selector} (count {self.found})"
        return (f"Missing {self.selector}: found {self.found}, "
                f"expected at least {self.expected_min}")


def validate_structure(spec: StructureSpec, root: ElementNode) -> list[StructureFinding]:
    """Check every declared requirement; absence is a finding, not an error."""
    svg_matches = select(root, spec.svg_selector)
    scope = svg_matches[0] if len(svg_matches) == 1 else root
    findings = []
    for gid in spec.groups:
        selector = f"g#{gid}"
        findings.append(StructureFinding(
            selector=selector, found=len(select(scope, selector)), expected_min=1))
    for req in spec.required:
        findings.append(StructureFinding(
            selector=req.selector,
            found=len(select(scope, req.selector)),
            expected_min=req.min_count))
    return findings


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------

def read_csv_dataset(path) -> list[dict]:
    """Rows of a headered CSV; numeric-looking cells become floats.

    Duplicate header names bind to their first column.
    """
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise RubricError(f"cannot read dataset {path}: {exc}") from exc
    if not rows:
        raise RubricError(f"dataset {path} is empty")
    header = rows[0]
    binding: dict[str, int] = {}
    for idx, name in enumerate(header):
        binding.setdefault(name.strip(), idx)
    out = []
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        record = {}
        for name, idx in binding.items():
            cell = row[idx].strip() if idx < len(row) else ""
            try:
                record[name] = float(cell)
            except ValueError:
                record[name] = cell
        out.append(record)
    return out
