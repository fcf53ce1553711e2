"""Graded predicates over parsed snapshots.

Each check returns a CheckResult whose expected/actual strings are written
for the student; detail_lines always start with the assumptions the check
made, so a surprising verdict can be audited from the report alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dom import (
    ElementNode,
    Rgba,
    effective_value,
    parse_color,
    resolve_geometry,
    select,
)
from .errors import (
    DomainViolation,
    InsufficientMarks,
    InsufficientTicks,
    NonNumericAttribute,
    UnknownColor,
)
from .scales import InferredScale, forward


@dataclass
class CheckResult:
    """Outcome of one graded predicate.

    ``fraction`` supports proportional credit where a rubric opts in;
    checks that are all-or-nothing leave it as 1.0/0.0 mirroring ``passed``.
    """

    passed: bool
    expected: str
    actual: str
    detail_lines: list[str] = field(default_factory=list)
    offenders: list[str] = field(default_factory=list)
    fraction: float = 0.0
    matches: list["DatumMatch"] = field(default_factory=list)

    def __post_init__(self):
        if not self.detail_lines:
            self.detail_lines = ["Assumption: none beyond the rubric defaults."]


@dataclass
class DatumMatch:
    """One dataset row paired (or not) with a rendered mark."""

    datum: tuple
    expected_px: tuple[float, float]
    matched_node: str | None
    distance_px: float


def _result(passed, expected, actual, detail, offenders=None, fraction=None,
            matches=None) -> CheckResult:
    return CheckResult(
        passed=passed,
        expected=expected,
        actual=actual,
        detail_lines=detail,
        offenders=offenders or [],
        fraction=(1.0 if passed else 0.0) if fraction is None else fraction,
        matches=matches or [],
    )


def _fmt(value: float | str) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float) and value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return f"{value:g}"


def _fmt_point(point: tuple[float, float]) -> str:
    return f"({point[0]:.1f}, {point[1]:.1f})"


# --------------------------------------------------------------------------
# mark geometry helpers
# --------------------------------------------------------------------------

def _mark_anchor(node: ElementNode) -> tuple[float, float] | None:
    """The pixel the mark 'is at': circle/ellipse center, else the x/y origin."""
    geom = resolve_geometry(node)
    if geom.cx is not None and geom.cy is not None:
        return (geom.cx, geom.cy)
    if geom.x is not None and geom.y is not None:
        return (geom.x, geom.y)
    if geom.path_points:
        xs = [p[0] for p in geom.path_points]
        ys = [p[1] for p in geom.path_points]
        return (sum(xs) / len(xs), sum(ys) / len(ys))
    return None


def _mark_center(node: ElementNode) -> tuple[float, float] | None:
    geom = resolve_geometry(node)
    if geom.cx is not None and geom.cy is not None:
        return (geom.cx, geom.cy)
    if geom.x is not None and geom.y is not None:
        return (geom.x + (geom.width or 0.0) / 2.0,
                geom.y + (geom.height or 0.0) / 2.0)
    return _mark_anchor(node)


def _pick_axis(centers: list[tuple[float, float]]) -> str:
    """Axis the marks are laid out along: the one with the larger spread."""
    xs = [c[0] for c in centers]
    ys = [c[1] for c in centers]
    return "x" if (max(xs) - min(xs)) >= (max(ys) - min(ys)) else "y"


def _numeric_value(node: ElementNode, attribute: str) -> float:
    raw = effective_value(node, attribute)
    if raw is None:
        raise NonNumericAttribute(attribute, "", node.node_id)
    token = raw.strip()
    if token.endswith("px"):
        token = token[:-2]
    try:
        value = float(token)
    except ValueError:
        raise NonNumericAttribute(attribute, raw, node.node_id) from None
    if not math.isfinite(value):
        raise NonNumericAttribute(attribute, raw, node.node_id)
    return value


def _mark_measure(node: ElementNode, key: str, axis: str) -> float:
    """Numeric key per mark; 'length' and 'thickness' are orientation-relative.

    length = extent along the value axis, thickness = extent along the layout
    axis, so one rubric covers vertical and horizontal variants of a chart.
    """
    if key in ("length", "thickness"):
        geom = resolve_geometry(node)
        if geom.r is not None:
            return 2.0 * geom.r
        wants_height = (key == "length") == (axis == "x")
        value = geom.height if wants_height else geom.width
        if value is None:
            raise NonNumericAttribute(key, "", node.node_id)
        return value
    return _numeric_value(node, key)


# --------------------------------------------------------------------------
# positions
# --------------------------------------------------------------------------

def check_positions(root: ElementNode, marks, x_scale: InferredScale,
                    y_scale: InferredScale, dataset: list[dict],
                    fields: tuple[str, str], tolerance_px: float = 2.0,
                    exact_count: bool = False) -> CheckResult:
    """Match every dataset row to a rendered mark via the inferred scales.

    Expected pixel positions are computed through the submission's own
    scales, so any chart size or margin choice yields its own tailored
    solution. Matching is greedy nearest-first and one-to-one.
    """
    x_field, y_field = fields
    expected_points = []
    for i, row in enumerate(dataset):
        vx, vy = row[x_field], row[y_field]
        try:
            expected_points.append((forward(x_scale, vx), forward(y_scale, vy)))
        except DomainViolation as exc:
            raise DomainViolation(
                exc.value, exc.domain,
                detail=f"row {i} ({x_field}={vx!r}, {y_field}={vy!r})") from exc

    nodes = select(root, marks)
    placed = [(node, _mark_anchor(node)) for node in nodes]
    anchors = [(node, pos) for node, pos in placed if pos is not None]

    pairs = []
    for i, point in enumerate(expected_points):
        for j, (_, pos) in enumerate(anchors):
            distance = math.hypot(point[0] - pos[0], point[1] - pos[1])
            if distance <= tolerance_px:
                pairs.append((distance, i, j))
    pairs.sort(key=lambda p: p[0])

    datum_to_mark: dict[int, tuple[int, float]] = {}
    taken: set[int] = set()
    for distance, i, j in pairs:
        if i in datum_to_mark or j in taken:
            continue
        datum_to_mark[i] = (j, distance)
        taken.add(j)

    detail = [
        f"Assumption: marks {marks!r} encode ({x_field}, {y_field}) through the "
        f"chart's own {x_scale.kind}/{y_scale.kind} scales; greedy nearest-first "
        f"matching within {tolerance_px:g}px.",
    ]
    matches = []
    missing = []
    for i, row in enumerate(dataset):
        datum = (row[x_field], row[y_field])
        point = expected_points[i]
        if i in datum_to_mark:
            j, distance = datum_to_mark[i]
            matches.append(DatumMatch(datum, point, anchors[j][0].node_id, distance))
            continue
        nearest = math.inf
        for j, (_, pos) in enumerate(anchors):
            if j in taken:
                continue
            nearest = min(nearest, math.hypot(point[0] - pos[0], point[1] - pos[1]))
        matches.append(DatumMatch(datum, point, None, nearest))
        missing.append(i)
        where = f"nearest free mark {nearest:.1f}px away" if nearest < math.inf \
            else "no free mark anywhere"
        detail.append(
            f"Missing datum ({_fmt(datum[0])}, {_fmt(datum[1])}): expected at "
            f"{_fmt_point(point)}, {where}.")

    matched_ids = {anchors[j][0].node_id for j in taken}
    extras = [node.node_id for node, pos in placed
              if pos is None or node.node_id not in matched_ids]
    if extras:
        line = f"{len(extras)} extra mark(s) beyond the dataset"
        if exact_count:
            detail.append(f"{line}; exact_count is set, so this fails the check.")
        else:
            detail.append(f"Warning: {line}; not penalized.")

    matched = len(dataset) - len(missing)
    passed = not missing and (not exact_count or not extras)
    offenders = extras if (missing or (exact_count and extras)) else []
    expected_text = (f"{len(dataset)} data point(s) at scale-computed positions "
                     f"(tolerance {tolerance_px:g}px)")
    actual_text = f"{matched} of {len(dataset)} matched"
    if extras:
        actual_text += f", {len(extras)} extra mark(s)"
    fraction = (matched / len(dataset)) if dataset else 1.0
    if exact_count and extras:
        fraction = min(fraction, matched / (matched + len(extras)))
    return _result(passed, expected_text, actual_text, detail,
                   offenders=offenders, fraction=fraction, matches=matches)


# --------------------------------------------------------------------------
# ordering / sizing
# --------------------------------------------------------------------------

def check_sorted(root: ElementNode, marks, key: str, order: str,
                 along: str = "auto") -> CheckResult:
    """Marks read off along an axis must have monotone key values."""
    nodes = select(root, marks)
    if len(nodes) < 2:
        raise InsufficientMarks(len(nodes), 2)
    centers = []
    for node in nodes:
        center = _mark_center(node)
        if center is None:
            raise NonNumericAttribute("position", "", node.node_id)
        centers.append(center)

    axis = _pick_axis(centers) if along == "auto" else along
    index = 0 if axis == "x" else 1
    ordered = sorted(zip(nodes, centers), key=lambda pair: pair[1][index])
    values = [(_mark_measure(node, key, axis), node) for node, _ in ordered]

    detail = [
        f"Assumption: reading {len(nodes)} marks left-to-right along "
        f"{axis}{' (auto-detected)' if along == 'auto' else ''}, "
        f"comparing {key!r} {order}.",
    ]
    ascending = order == "ascending"
    for i in range(1, len(values)):
        prev_v, prev_n = values[i - 1]
        cur_v, cur_n = values[i]
        inverted = prev_v > cur_v if ascending else prev_v < cur_v
        if inverted:
            detail.append(
                f"First inversion at position {i}: {_fmt(prev_v)} then "
                f"{_fmt(cur_v)} is not {order}.")
            return _result(
                False,
                f"{key!r} {order} along {axis}",
                f"{_fmt(prev_v)} followed by {_fmt(cur_v)} at position {i}",
                detail, offenders=[prev_n.node_id, cur_n.node_id])
    sequence = ", ".join(_fmt(v) for v, _ in values)
    return _result(True, f"{key!r} {order} along {axis}",
                   f"{order} sequence [{sequence}]", detail)


def check_constant(root: ElementNode, marks, attribute: str,
                   tolerance: float = 1.0) -> CheckResult:
    """All marks agree on a numeric attribute within the tolerance."""
    nodes = select(root, marks)
    if not nodes:
        raise InsufficientMarks(0, 1)
    if attribute in ("length", "thickness"):
        centers = [c for c in (_mark_center(n) for n in nodes) if c is not None]
        axis = _pick_axis(centers) if len(centers) >= 2 else "x"
    else:
        axis = "x"
    values = [(_mark_measure(node, attribute, axis), node) for node in nodes]

    lo_v, lo_n = min(values, key=lambda pair: pair[0])
    hi_v, hi_n = max(values, key=lambda pair: pair[0])
    spread = hi_v - lo_v
    detail = [
        f"Assumption: {attribute!r} read from each of {len(nodes)} marks; "
        f"constant means max - min <= {tolerance:g}.",
    ]
    if spread <= tolerance:
        return _result(True, f"constant {attribute!r} (within {tolerance:g})",
                       f"values span {_fmt(lo_v)}..{_fmt(hi_v)}", detail)
    detail.append(
        f"Extremes: {_fmt(lo_v)} on {lo_n.node_id} and {_fmt(hi_v)} on "
        f"{hi_n.node_id}.")
    return _result(False, f"constant {attribute!r} (within {tolerance:g})",
                   f"values span {_fmt(lo_v)}..{_fmt(hi_v)} "
                   f"(range {_fmt(spread)})",
                   detail, offenders=[lo_n.node_id, hi_n.node_id])


# --------------------------------------------------------------------------
# color grouping
# --------------------------------------------------------------------------

def _effective_fill(node: ElementNode):
    """Fill as rendered: nearest ancestor value, canonicalized when parseable.

    Unparseable paint servers (gradients, patterns) stay string-keyed so they
    compare by identity instead of crashing the check.
    """
    current = node
    while current is not None:
        raw = effective_value(current, "fill")
        if raw is not None and raw.strip():
            try:
                return parse_color(raw)
            except UnknownColor:
                return raw.strip()
        current = current.parent
    return parse_color("black")


def _paint_label(paint) -> str:
    return paint.css() if isinstance(paint, Rgba) else str(paint)


def check_color_grouping(root: ElementNode, groups: list[dict]) -> CheckResult:
    """Within each group one fill color; across groups, all distinct."""
    detail = [
        "Assumption: fill compared after canonicalizing hex/rgb()/named forms; "
        "no specific palette is required.",
    ]
    representatives = []
    for g_index, group in enumerate(groups):
        selector = group["marks"]
        nodes = select(root, selector)
        if not nodes:
            raise InsufficientMarks(0, 1)
        fills = [(node, _effective_fill(node)) for node in nodes]
        first_node, first_fill = fills[0]
        differing = [node for node, fill in fills if fill != first_fill]
        if differing:
            seen = []
            for _, fill in fills:
                label = _paint_label(fill)
                if label not in seen:
                    seen.append(label)
            detail.append(
                f"Group {g_index + 1} ({selector!r}) mixes {len(seen)} colors: "
                f"{', '.join(seen)}.")
            return _result(
                False,
                f"one fill color within group {g_index + 1} ({selector!r})",
                f"{len(seen)} different colors",
                detail, offenders=[node.node_id for node in differing])
        representatives.append((g_index, selector, first_fill))
        detail.append(
            f"Group {g_index + 1} ({selector!r}): {len(nodes)} mark(s), "
            f"fill {_paint_label(first_fill)}.")

    for a in range(len(representatives)):
        for b in range(a + 1, len(representatives)):
            ia, sel_a, fill_a = representatives[a]
            ib, sel_b, fill_b = representatives[b]
            if fill_a == fill_b:
                detail.append(
                    f"Groups {ia + 1} ({sel_a!r}) and {ib + 1} ({sel_b!r}) "
                    f"share fill {_paint_label(fill_a)}.")
                return _result(
                    False, "distinct fill colors across groups",
                    f"groups {ia + 1} and {ib + 1} both use "
                    f"{_paint_label(fill_a)}",
                    detail)
    return _result(True,
                   "one fill per group, distinct across groups",
                   f"{len(groups)} group(s) each uniform, all distinct",
                   detail)


# --------------------------------------------------------------------------
# axis ticks
# --------------------------------------------------------------------------

def _tick_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"


def check_axis_ticks(scale: InferredScale, expected_interval: float | None = None,
                     expected_values: list | None = None) -> CheckResult:
    """Tick values follow a uniform interval or an explicit list."""
    if (expected_interval is None) == (expected_values is None):
        raise ValueError("give exactly one of expected_interval/expected_values")
    found = list(scale.tick_values)
    if len(found) < 2:
        raise InsufficientTicks(len(found), 2)
    detail = [
        f"Assumption: comparing the {len(found)} tick labels parsed from the "
        f"{scale.kind} axis.",
    ]

    if expected_values is not None:
        expected = list(expected_values)
        ok = len(found) == len(expected) and all(
            a == b if isinstance(a, str) or isinstance(b, str)
            else math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)
            for a, b in zip(sorted(found, key=_fmt), sorted(expected, key=_fmt)))
    else:
        numeric = sorted(found)
        lo, hi = numeric[0], numeric[-1]
        steps = max(1, round((hi - lo) / expected_interval))
        expected = [lo + expected_interval * i for i in range(steps + 1)]
        ok = len(numeric) == len(expected) and all(
            math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-6)
            for a, b in zip(numeric, expected))

    display_found = sorted(found) if expected_values is None else found
    if ok:
        return _result(True, f"ticks {_tick_list(expected)}",
                       f"ticks {_tick_list(display_found)}", detail)
    detail.append(
        f"Found ticks {_tick_list(display_found)}, but expected "
        f"{_tick_list(expected)}.")
    return _result(False, f"ticks {_tick_list(expected)}",
                   f"ticks {_tick_list(display_found)}", detail)
