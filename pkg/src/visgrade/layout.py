"""Detect chart dimensions, margins, and the inner plotting area.

Margin detection degrades gracefully: an inner ``<g translate(l,t)>``
(the margin convention) gives explicit margins, axis tick extents give
inferred ones, and otherwise the layout is reported unknown. The result
feeds the advisory feedback shown to students and seeds the assumptions
the scale and positioning checks run under.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dom import (
    ElementNode,
    Transform2D,
    absolute_point,
    parse_transform,
    select,
)
from .errors import MalformedTransform, MultipleSvg, NoSvgFound
from .rubric import StructureSpec

MARGIN_CONVENTION_URL = "https://observablehq.com/@d3/margin-convention"


@dataclass
class Margins:
    top: float = 0.0
    right: float = 0.0
    bottom: float = 0.0
    left: float = 0.0


@dataclass
class LayoutReport:
    svg_width: float
    svg_height: float
    margins: Margins
    inner_width: float
    inner_height: float
    origin_transform: Transform2D
    confidence: str  # explicit | inferred | unknown
    size_source: str = "attributes"  # attributes | viewBox | missing
    notes: list[str] = field(default_factory=list)


def _length(svg: ElementNode, name: str) -> float | None:
    raw = svg.attributes.get(name)
    if raw is None:
        return None
    token = raw.strip()
    if token.endswith("px"):
        token = token[:-2]
    try:
        value = float(token)
    except ValueError:
        return None
    return value if value >= 0 else None


def _viewbox_size(svg: ElementNode) -> tuple[float, float] | None:
    raw = svg.attributes.get("viewBox")
    if raw is None:
        return None
    parts = raw.replace(",", " ").split()
    if len(parts) != 4:
        return None
    try:
        w, h = float(parts[2]), float(parts[3])
    except ValueError:
        return None
    return (w, h)


def _pure_translation(transform: Transform2D) -> bool:
    return (transform.a, transform.b, transform.c, transform.d) == (1.0, 0.0, 0.0, 1.0)


def _looks_like_axis(group: ElementNode) -> bool:
    """Axis groups carry their own translate (the axis offset), which must
    not be mistaken for chart margins."""
    if any("axis" in cls.lower() or cls == "tick" for cls in group.classes):
        return True
    for child in group.children:
        if child.tag == "g" and "tick" in child.classes:
            return True
        if child.tag == "path" and "domain" in child.classes:
            return True
    return False


def _margin_group(svg: ElementNode, notes: list[str]) -> ElementNode | None:
    """First direct child g carrying a transform, if it is a pure translation."""
    for child in svg.children:
        if child.tag != "g" or "transform" not in child.attributes:
            continue
        if _looks_like_axis(child):
            continue
        try:
            transform = parse_transform(child.attributes["transform"])
        except MalformedTransform as exc:
            notes.append(f"Could not read the chart group's transform ({exc}).")
            return None
        if not _pure_translation(transform):
            notes.append("The chart group's transform is not a pure translation; "
                         "margins were inferred instead.")
            return None
        return child
    return None


def _tick_extents(svg: ElementNode):
    """(min_x, max_x, min_y, max_y) over axis tick group origins, or None."""
    xs, ys = [], []
    for tick in select(svg, "g.tick"):
        try:
            x, y = absolute_point(tick, 0.0, 0.0)
        except MalformedTransform:
            continue
        xs.append(x)
        ys.append(y)
    if not xs:
        return None
    return (min(xs), max(xs), min(ys), max(ys))


def detect_layout(root: ElementNode, spec: StructureSpec) -> LayoutReport:
    """Measure the chart named by the rubric's svg selector."""
    matches = select(root, spec.svg_selector)
    if not matches:
        raise NoSvgFound(f"no element matches {spec.svg_selector!r}")
    if len(matches) > 1:
        raise MultipleSvg(len(matches), spec.svg_selector)
    svg = matches[0]

    notes: list[str] = []
    width = _length(svg, "width")
    height = _length(svg, "height")
    size_source = "attributes"
    viewbox = _viewbox_size(svg)
    if width is None or height is None:
        if viewbox is not None:
            width = width if width is not None else viewbox[0]
            height = height if height is not None else viewbox[1]
            size_source = "viewBox"
        else:
            width = width or 0.0
            height = height or 0.0
            size_source = "missing"
            notes.append("The svg declares no usable width/height; sizes reported as 0.")
    elif viewbox is not None and (viewbox[0] != width or viewbox[1] != height):
        notes.append(
            f"width/height attributes ({width:g}x{height:g}) disagree with the "
            f"viewBox ({viewbox[0]:g}x{viewbox[1]:g}); attributes win.")

    extents = _tick_extents(svg)
    group = _margin_group(svg, notes)

    confidence = "unknown"
    margins = Margins()
    if group is not None:
        transform = parse_transform(group.attributes["transform"])
        margins.left, margins.top = transform.e, transform.f
        confidence = "explicit"
        if extents is not None:
            margins.right = width - extents[1]
            margins.bottom = height - extents[3]
        else:
            margins.right = margins.left
            margins.bottom = margins.top
            notes.append("No axis ticks found; right/bottom margins assumed "
                         "symmetric with left/top.")
        if _has_nested_translated_group(group):
            notes.append("Nested translated groups detected; margins reflect "
                         "the outermost group only.")
    elif extents is not None:
        min_x, max_x, min_y, max_y = extents
        margins = Margins(left=min_x, right=width - max_x,
                          top=min_y, bottom=height - max_y)
        confidence = "inferred"
    else:
        notes.append("No translated chart group and no axis ticks; layout unknown.")

    if confidence != "unknown":
        clamped = []
        for side in ("top", "right", "bottom", "left"):
            if getattr(margins, side) < 0:
                clamped.append(f"{side} ({getattr(margins, side):g}px)")
                setattr(margins, side, 0.0)
        if clamped:
            notes.append("Computed negative margins were clamped to 0: "
                         + ", ".join(clamped) + ".")
            confidence = "inferred"

    inner_width = max(0.0, width - margins.left - margins.right)
    inner_height = max(0.0, height - margins.top - margins.bottom)
    return LayoutReport(
        svg_width=width,
        svg_height=height,
        margins=margins,
        inner_width=inner_width,
        inner_height=inner_height,
        origin_transform=Transform2D(e=margins.left, f=margins.top),
        confidence=confidence,
        size_source=size_source,
        notes=notes,
    )


def _has_nested_translated_group(group: ElementNode) -> bool:
    for node in group.iter():
        if node is group or node.tag != "g":
            continue
        try:
            transform = parse_transform(node.attributes.get("transform"))
        except MalformedTransform:
            continue
        if (transform.e, transform.f) != (0.0, 0.0) and _pure_translation(transform):
            return True
    return False


def format_layout_advisory(report: LayoutReport) -> list[str]:
    """Human-readable detection summary; informational only, never graded."""
    lines = [
        f"Detected chart size: {report.svg_width:g}x{report.svg_height:g}px "
        f"(from {'svg attributes' if report.size_source == 'attributes' else report.size_source})"
    ]
    if report.confidence == "explicit":
        origin = "from <g> translate"
        lines.append(f"Detected left margin: {report.margins.left:g}px ({origin})")
        lines.append(f"Detected top margin: {report.margins.top:g}px ({origin})")
        lines.append(f"Detected right margin: {report.margins.right:g}px")
        lines.append(f"Detected bottom margin: {report.margins.bottom:g}px")
    elif report.confidence == "inferred":
        origin = "inferred from axis tick extents"
        for side in ("left", "top", "right", "bottom"):
            lines.append(f"Detected {side} margin: "
                         f"{getattr(report.margins, side):g}px ({origin})")
    else:
        lines.append("Margins could not be detected. Consider laying out the "
                     "chart with the margin convention (an inner <g> translated "
                     f"by the left/top margins): {MARGIN_CONVENTION_URL}")
    lines.append(f"Plottable inner area: {report.inner_width:g}x{report.inner_height:g}px")
    lines.extend(report.notes)
    return lines
