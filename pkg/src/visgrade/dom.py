"""Parse serialized HTML/SVG into a queryable element tree.

Parsing is lenient the way a browser is: unclosed elements are recovered,
case is normalized (with the SVG camelCase fix-ups browsers apply, so
``viewbox`` comes back as ``viewBox``), and stray end tags are ignored.
Trees are immutable after parsing and safe to share across threads.

The tree carries enough resolved information for grading: composed affine
transforms, canonical colors, and pixel geometry for marks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .errors import (
    InvalidSelector,
    MalformedTransform,
    NonNumericAttribute,
    UnknownColor,
    UnparseableDocument,
)
from ._colors import NAMED_COLORS


# --------------------------------------------------------------------------
# element tree
# --------------------------------------------------------------------------

@dataclass
class ElementNode:
    """One element of a parsed document.

    ``text`` holds the element's own character data; use :func:`text_content`
    for the aggregate including descendants. ``computed_style`` is empty for
    static snapshots and populated by the interaction engine for live ones.
    """

    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    computed_style: dict[str, str] = field(default_factory=dict)
    text: str = ""
    children: list["ElementNode"] = field(default_factory=list)
    node_id: str = ""
    parent: "ElementNode | None" = field(default=None, repr=False, compare=False)
    _order: int = field(default=0, repr=False, compare=False)

    def iter(self):
        """Preorder traversal, self first."""
        yield self
        for child in self.children:
            yield from child.iter()

    def find_by_node_id(self, node_id: str) -> "ElementNode | None":
        for node in self.iter():
            if node.node_id == node_id:
                return node
        return None

    @property
    def classes(self) -> list[str]:
        return self.attributes.get("class", "").split()


def text_content(node: ElementNode) -> str:
    """Own text plus all descendant text, in tree order."""
    parts = [node.text]
    for child in node.children:
        parts.append(text_content(child))
    return "".join(parts)


def inline_style(node: ElementNode) -> dict[str, str]:
    """Parse the ``style`` attribute into a property map."""
    out: dict[str, str] = {}
    for decl in node.attributes.get("style", "").split(";"):
        if ":" in decl:
            prop, _, value = decl.partition(":")
            out[prop.strip().lower()] = value.strip()
    return out


def effective_value(node: ElementNode, prop: str) -> str | None:
    """Look up a presentation property the way the rendered page resolves it.

    Live computed style wins, then inline style, then the bare attribute.
    """
    if prop in node.computed_style:
        return node.computed_style[prop]
    styles = inline_style(node)
    if prop in styles:
        return styles[prop]
    return node.attributes.get(prop)


# --------------------------------------------------------------------------
# lenient parser
# --------------------------------------------------------------------------

_VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# implied end tags: starting <key> closes an innermost open element in the set
_CLOSE_BEFORE = {
    "p": {"p"},
    "li": {"li"},
    "dt": {"dt", "dd"},
    "dd": {"dt", "dd"},
    "option": {"option"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
}
_BLOCKS_CLOSING_P = frozenset(
    "address article aside blockquote details div dl fieldset figcaption figure "
    "footer form h1 h2 h3 h4 h5 h6 header hr main menu nav ol pre section table ul".split()
)

# HTML parsing lowercases names, then restores SVG camelCase from these tables
_SVG_TAG_FIXUPS = {
    "altglyph": "altGlyph", "altglyphdef": "altGlyphDef", "altglyphitem": "altGlyphItem",
    "animatecolor": "animateColor", "animatemotion": "animateMotion",
    "animatetransform": "animateTransform", "clippath": "clipPath",
    "feblend": "feBlend", "fecolormatrix": "feColorMatrix",
    "fecomponenttransfer": "feComponentTransfer", "fecomposite": "feComposite",
    "feconvolvematrix": "feConvolveMatrix", "fediffuselighting": "feDiffuseLighting",
    "fedisplacementmap": "feDisplacementMap", "fedistantlight": "feDistantLight",
    "fedropshadow": "feDropShadow", "feflood": "feFlood",
    "fefunca": "feFuncA", "fefuncb": "feFuncB", "fefuncg": "feFuncG", "fefuncr": "feFuncR",
    "fegaussianblur": "feGaussianBlur", "feimage": "feImage",
    "femerge": "feMerge", "femergenode": "feMergeNode", "femorphology": "feMorphology",
    "feoffset": "feOffset", "fepointlight": "fePointLight",
    "fespecularlighting": "feSpecularLighting", "fespotlight": "feSpotLight",
    "fetile": "feTile", "feturbulence": "feTurbulence",
    "foreignobject": "foreignObject", "glyphref": "glyphRef",
    "lineargradient": "linearGradient", "radialgradient": "radialGradient",
    "textpath": "textPath",
}

_SVG_ATTR_FIXUPS = {
    "attributename": "attributeName", "attributetype": "attributeType",
    "basefrequency": "baseFrequency", "baseprofile": "baseProfile",
    "calcmode": "calcMode", "clippathunits": "clipPathUnits",
    "diffuseconstant": "diffuseConstant", "edgemode": "edgeMode",
    "filterunits": "filterUnits", "glyphref": "glyphRef",
    "gradienttransform": "gradientTransform", "gradientunits": "gradientUnits",
    "kernelmatrix": "kernelMatrix", "kernelunitlength": "kernelUnitLength",
    "keypoints": "keyPoints", "keysplines": "keySplines", "keytimes": "keyTimes",
    "lengthadjust": "lengthAdjust", "limitingconeangle": "limitingConeAngle",
    "markerheight": "markerHeight", "markerunits": "markerUnits",
    "markerwidth": "markerWidth", "maskcontentunits": "maskContentUnits",
    "maskunits": "maskUnits", "numoctaves": "numOctaves", "pathlength": "pathLength",
    "patterncontentunits": "patternContentUnits", "patterntransform": "patternTransform",
    "patternunits": "patternUnits", "pointsatx": "pointsAtX", "pointsaty": "pointsAtY",
    "pointsatz": "pointsAtZ", "preservealpha": "preserveAlpha",
    "preserveaspectratio": "preserveAspectRatio", "primitiveunits": "primitiveUnits",
    "refx": "refX", "refy": "refY", "repeatcount": "repeatCount", "repeatdur": "repeatDur",
    "requiredextensions": "requiredExtensions", "requiredfeatures": "requiredFeatures",
    "specularconstant": "specularConstant", "specularexponent": "specularExponent",
    "spreadmethod": "spreadMethod", "startoffset": "startOffset",
    "stddeviation": "stdDeviation", "stitchtiles": "stitchTiles",
    "surfacescale": "surfaceScale", "systemlanguage": "systemLanguage",
    "tablevalues": "tableValues", "targetx": "targetX", "targety": "targetY",
    "textlength": "textLength", "viewbox": "viewBox", "viewtarget": "viewTarget",
    "xchannelselector": "xChannelSelector", "ychannelselector": "yChannelSelector",
    "zoomandpan": "zoomAndPan",
}


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.top_level: list[ElementNode] = []
        self.stack: list[ElementNode] = []
        self.svg_depth = 0  # >0 while inside <svg> foreign content

    # -- context helpers

    def _in_svg(self) -> bool:
        return self.svg_depth > 0

    def _adjust(self, tag: str, attrs) -> tuple[str, dict[str, str]]:
        in_svg = self._in_svg() or tag == "svg"
        if in_svg:
            tag = _SVG_TAG_FIXUPS.get(tag, tag)
        out: dict[str, str] = {}
        for name, value in attrs:
            if in_svg:
                name = _SVG_ATTR_FIXUPS.get(name, name)
            out[name] = value if value is not None else ""
        return tag, out

    def _attach(self, node: ElementNode):
        if self.stack:
            self.stack[-1].children.append(node)
        else:
            self.top_level.append(node)

    def _implied_closes(self, tag: str):
        if not self.stack:
            return
        closers = set(_CLOSE_BEFORE.get(tag, ()))
        if tag in _BLOCKS_CLOSING_P:
            closers.add("p")
        while self.stack and self.stack[-1].tag in closers:
            self._pop()

    def _pop(self):
        node = self.stack.pop()
        if node.tag == "svg":
            self.svg_depth -= 1

    # -- parser callbacks

    def handle_starttag(self, tag, attrs):
        if not self._in_svg():
            self._implied_closes(tag)
        tag, attr_map = self._adjust(tag, attrs)
        node = ElementNode(tag=tag, attributes=attr_map)
        self._attach(node)
        if tag == "svg":
            self.svg_depth += 1
            self.stack.append(node)
        elif self._in_svg() or tag not in _VOID_ELEMENTS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        # "<div/>" in HTML content: browsers ignore the slash; in SVG
        # foreign content the self-close is honored
        if self._in_svg():
            tag, attr_map = self._adjust(tag, attrs)
            self._attach(ElementNode(tag=tag, attributes=attr_map))
        else:
            self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        in_svg = self._in_svg()
        if in_svg:
            tag = _SVG_TAG_FIXUPS.get(tag, tag)
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                while len(self.stack) > i:
                    self._pop()
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if self.stack:
            self.stack[-1].text += data

    def unknown_decl(self, data):
        # CDATA sections are character data in SVG foreign content
        if data.startswith("CDATA[") and self.stack:
            self.stack[-1].text += data[len("CDATA["):]


def parse_snapshot(document: bytes | str) -> ElementNode:
    """Parse an HTML/SVG document into an element tree.

    Returns the document's single top-level element, or a synthetic
    ``#document`` node wrapping them when the input has several. Raises
    :class:`UnparseableDocument` when no element can be recovered.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8", errors="replace")
    builder = _TreeBuilder()
    try:
        builder.feed(document)
        builder.close()
    except Exception as exc:  # HTMLParser rarely raises, but stay lenient
        raise UnparseableDocument(f"parse failed: {exc}") from exc
    roots = builder.top_level
    if not roots:
        raise UnparseableDocument("no root element recovered")
    root = roots[0] if len(roots) == 1 else ElementNode(tag="#document", children=roots)
    _finalize(root)
    return root


def _finalize(root: ElementNode):
    """Assign stable preorder node ids and parent links."""
    for order, node in enumerate(root.iter()):
        node.node_id = f"n{order}"
        node._order = order
        for child in node.children:
            child.parent = node


# --------------------------------------------------------------------------
# serialization (used by the fake-driver test double and for debugging)
# --------------------------------------------------------------------------

def _escape(value: str, quote: bool = False) -> str:
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    if quote:
        value = value.replace('"', "&quot;")
    return value


def to_html(node: ElementNode) -> str:
    """Serialize a tree back to markup. Inverse of parse for generated trees."""
    if node.tag == "#document":
        return "".join(to_html(child) for child in node.children)
    attrs = "".join(f' {name}="{_escape(value, quote=True)}"'
                    for name, value in node.attributes.items())
    inner = _escape(node.text) + "".join(to_html(child) for child in node.children)
    return f"<{node.tag}{attrs}>{inner}</{node.tag}>"


# --------------------------------------------------------------------------
# selectors
# --------------------------------------------------------------------------

_COMPOUND_RE = re.compile(
    r"^(?P<tag>[A-Za-z][-\w]*|\*)?"
    r"(?P<quals>(?:#[-\w]+|\.[-\w]+|:nth\(\d+\))*)$"
)
_QUAL_RE = re.compile(r"#[-\w]+|\.[-\w]+|:nth\(\d+\)")


@dataclass(frozen=True)
class _Compound:
    tag: str | None
    id: str | None
    classes: tuple[str, ...]
    nth: int | None

    def matches(self, node: ElementNode) -> bool:
        if self.tag and self.tag != "*" and node.tag != self.tag:
            return False
        if self.id is not None and node.attributes.get("id") != self.id:
            return False
        node_classes = node.classes
        return all(c in node_classes for c in self.classes)


@dataclass(frozen=True)
class Selector:
    """A parsed CSS-subset selector: tag, #id, .class, descendant combinator,
    and a positional ``:nth(k)`` pseudo-index (zero-based)."""

    expression: str
    parts: tuple[_Compound, ...]

    def __str__(self) -> str:
        return self.expression


def parse_selector(expression) -> Selector:
    if isinstance(expression, Selector):
        return expression
    if not isinstance(expression, str) or not expression.strip():
        raise InvalidSelector(f"empty selector: {expression!r}")
    parts = []
    for chunk in expression.split():
        m = _COMPOUND_RE.match(chunk)
        if not m:
            raise InvalidSelector(f"cannot parse {chunk!r} in {expression!r}")
        tag = m.group("tag")
        sel_id = None
        classes: list[str] = []
        nth = None
        for qual in _QUAL_RE.findall(m.group("quals") or ""):
            if qual.startswith("#"):
                sel_id = qual[1:]
            elif qual.startswith("."):
                classes.append(qual[1:])
            else:
                nth = int(qual[len(":nth("):-1])
        parts.append(_Compound(tag=tag, id=sel_id, classes=tuple(classes), nth=nth))
    return Selector(expression=expression, parts=tuple(parts))


def select(root: ElementNode, sel) -> list[ElementNode]:
    """All elements matching the selector, in document order.

    The root itself participates in matching the first compound. Repeated
    calls over the same snapshot return identical node sequences.
    """
    selector = parse_selector(sel)
    context = [root]
    first = True
    for part in selector.parts:
        seen: set[int] = set()
        matched: list[ElementNode] = []
        for ctx in context:
            candidates = ctx.iter() if first else _strict_descendants(ctx)
            for node in candidates:
                if id(node) not in seen and part.matches(node):
                    seen.add(id(node))
                    matched.append(node)
        matched.sort(key=lambda n: n._order)
        if part.nth is not None:
            matched = matched[part.nth:part.nth + 1]
        context = matched
        first = False
    return context


def _strict_descendants(node: ElementNode):
    for child in node.children:
        yield from child.iter()


def select_one(root: ElementNode, sel) -> ElementNode | None:
    found = select(root, sel)
    return found[0] if found else None


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Transform2D:
    """2x3 affine matrix in SVG order: x' = a·x + c·y + e, y' = b·x + d·y + f."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    e: float = 0.0
    f: float = 0.0

    @staticmethod
    def identity() -> "Transform2D":
        return Transform2D()

    def compose(self, other: "Transform2D") -> "Transform2D":
        """self · other (other applies to the point first)."""
        return Transform2D(
            a=self.a * other.a + self.c * other.b,
            b=self.b * other.a + self.d * other.b,
            c=self.a * other.c + self.c * other.d,
            d=self.b * other.c + self.d * other.d,
            e=self.a * other.e + self.c * other.f + self.e,
            f=self.b * other.e + self.d * other.f + self.f,
        )

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.c * y + self.e,
                self.b * x + self.d * y + self.f)

    @property
    def is_identity(self) -> bool:
        return self == Transform2D()


_TRANSFORM_FUNC_RE = re.compile(r"\s*([a-zA-Z]+)\s*\(([^)]*)\)\s*,?")


def parse_transform(attr: str | None) -> Transform2D:
    """Parse an SVG transform list into one composed matrix.

    Functions apply left to right, i.e. ``translate(10 0) scale(2)`` maps
    (5,5) to (20,10).
    """
    result = Transform2D.identity()
    if not attr or not attr.strip():
        return result
    pos = 0
    for m in _TRANSFORM_FUNC_RE.finditer(attr):
        if m.start() != pos:
            raise MalformedTransform(attr[pos:m.start()].strip())
        pos = m.end()
        name = m.group(1)
        try:
            args = [float(tok) for tok in re.split(r"[\s,]+", m.group(2).strip()) if tok]
        except ValueError:
            raise MalformedTransform(m.group(0).strip()) from None
        result = result.compose(_transform_from(name, args, m.group(0).strip()))
    if pos != len(attr) and attr[pos:].strip():
        raise MalformedTransform(attr[pos:].strip())
    return result


def _transform_from(name: str, args: list[float], token: str) -> Transform2D:
    name = name.lower()
    if name == "translate" and len(args) in (1, 2):
        tx = args[0]
        ty = args[1] if len(args) == 2 else 0.0
        return Transform2D(e=tx, f=ty)
    if name == "scale" and len(args) in (1, 2):
        sx = args[0]
        sy = args[1] if len(args) == 2 else sx
        return Transform2D(a=sx, d=sy)
    if name == "rotate" and len(args) in (1, 3):
        rad = math.radians(args[0])
        cos, sin = math.cos(rad), math.sin(rad)
        rot = Transform2D(a=cos, b=sin, c=-sin, d=cos)
        if len(args) == 3:
            cx, cy = args[1], args[2]
            return (Transform2D(e=cx, f=cy)
                    .compose(rot)
                    .compose(Transform2D(e=-cx, f=-cy)))
        return rot
    if name == "matrix" and len(args) == 6:
        return Transform2D(*args)
    if name == "skewx" and len(args) == 1:
        return Transform2D(c=math.tan(math.radians(args[0])))
    if name == "skewy" and len(args) == 1:
        return Transform2D(b=math.tan(math.radians(args[0])))
    raise MalformedTransform(token)


def own_transform(node: ElementNode) -> Transform2D:
    return parse_transform(node.attributes.get("transform"))


def absolute_transform(node: ElementNode) -> Transform2D:
    """Composition of every ancestor transform plus the node's own."""
    chain = []
    cur: ElementNode | None = node
    while cur is not None:
        chain.append(cur)
        cur = cur.parent
    result = Transform2D.identity()
    for ancestor in reversed(chain):
        result = result.compose(own_transform(ancestor))
    return result


def absolute_point(node: ElementNode, x: float, y: float) -> tuple[float, float]:
    """A node-local point mapped through the full ancestor transform chain."""
    return absolute_transform(node).apply(x, y)


# --------------------------------------------------------------------------
# colors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Rgba:
    """Canonical color: two colors are equal iff all four channels are equal."""

    r: int
    g: int
    b: int
    alpha: float = 1.0

    def css(self) -> str:
        if self.alpha == 1.0:
            return f"rgb({self.r}, {self.g}, {self.b})"
        return f"rgba({self.r}, {self.g}, {self.b}, {self.alpha:g})"


_RGB_FUNC_RE = re.compile(
    r"rgba?\(\s*([^\s,/)]+)[\s,]+([^\s,/)]+)[\s,]+([^\s,/)]+)"
    r"(?:\s*[,/]\s*([^\s)]+))?\s*\)$"
)


def _channel(token: str) -> int:
    token = token.strip()
    if token.endswith("%"):
        value = float(token[:-1]) * 255.0 / 100.0
    else:
        value = float(token)
    return max(0, min(255, round(value)))


def _alpha(token: str | None) -> float:
    if token is None:
        return 1.0
    token = token.strip()
    if token.endswith("%"):
        return max(0.0, min(1.0, float(token[:-1]) / 100.0))
    return max(0.0, min(1.0, float(token)))


def parse_color(value: str) -> Rgba:
    """Parse hex, rgb()/rgba(), or CSS named colors into canonical form.

    ``none`` and ``transparent`` map to alpha 0 so fill comparisons treat
    them as "not painted".
    """
    if not isinstance(value, str):
        raise UnknownColor(f"not a color string: {value!r}")
    token = value.strip().lower()
    if not token:
        raise UnknownColor("empty color string")
    if token in ("none", "transparent"):
        return Rgba(0, 0, 0, 0.0)
    if token.startswith("#"):
        hexpart = token[1:]
        if not re.fullmatch(r"[0-9a-f]+", hexpart or "x"):
            raise UnknownColor(value)
        if len(hexpart) in (3, 4):
            hexpart = "".join(ch * 2 for ch in hexpart)
        if len(hexpart) == 6:
            hexpart += "ff"
        if len(hexpart) != 8:
            raise UnknownColor(value)
        r, g, b, a = (int(hexpart[i:i + 2], 16) for i in (0, 2, 4, 6))
        return Rgba(r, g, b, a / 255.0)
    m = _RGB_FUNC_RE.match(token)
    if m:
        try:
            return Rgba(_channel(m.group(1)), _channel(m.group(2)),
                        _channel(m.group(3)), _alpha(m.group(4)))
        except ValueError:
            raise UnknownColor(value) from None
    if token in NAMED_COLORS:
        r, g, b = NAMED_COLORS[token]
        return Rgba(r, g, b, 1.0)
    raise UnknownColor(value)


# --------------------------------------------------------------------------
# geometry resolution
# --------------------------------------------------------------------------

@dataclass
class ResolvedGeometry:
    """Pixel geometry after applying the full ancestor transform chain."""

    x: float | None = None
    y: float | None = None
    width: float | None = None
    height: float | None = None
    cx: float | None = None
    cy: float | None = None
    r: float | None = None
    path_points: list[tuple[float, float]] | None = None


_NUMERIC_ATTRS = ("x", "y", "width", "height", "cx", "cy", "r")
_XY_DEFAULT_TAGS = frozenset(("rect", "text", "image", "use"))
_CXCY_DEFAULT_TAGS = frozenset(("circle", "ellipse"))


def _numeric_attr(node: ElementNode, name: str) -> float | None:
    raw = node.attributes.get(name)
    if raw is None:
        return None
    token = raw.strip()
    if token.endswith("px"):
        token = token[:-2]
    try:
        value = float(token)
    except ValueError:
        raise NonNumericAttribute(name, raw, node.node_id) from None
    if not math.isfinite(value):
        raise NonNumericAttribute(name, raw, node.node_id)
    return value


def resolve_geometry(node: ElementNode) -> ResolvedGeometry:
    """Raw geometry attributes composed through the ancestor transforms.

    ``path`` elements additionally get ``path_points``: line-command vertices
    plus curve commands flattened at parameter steps of 0.1.
    """
    matrix = absolute_transform(node)
    raw = {name: _numeric_attr(node, name) for name in _NUMERIC_ATTRS}
    geom = ResolvedGeometry()

    if raw["x"] is not None or raw["y"] is not None or node.tag in _XY_DEFAULT_TAGS:
        x0 = raw["x"] if raw["x"] is not None else 0.0
        y0 = raw["y"] if raw["y"] is not None else 0.0
        geom.x, geom.y = matrix.apply(x0, y0)
    if raw["cx"] is not None or raw["cy"] is not None or node.tag in _CXCY_DEFAULT_TAGS:
        cx0 = raw["cx"] if raw["cx"] is not None else 0.0
        cy0 = raw["cy"] if raw["cy"] is not None else 0.0
        geom.cx, geom.cy = matrix.apply(cx0, cy0)

    # lengths scale with the basis vectors; r uses the area-preserving mean
    sx = math.hypot(matrix.a, matrix.b)
    sy = math.hypot(matrix.c, matrix.d)
    if raw["width"] is not None:
        geom.width = raw["width"] * sx
    if raw["height"] is not None:
        geom.height = raw["height"] * sy
    if raw["r"] is not None:
        det = abs(matrix.a * matrix.d - matrix.b * matrix.c)
        geom.r = raw["r"] * math.sqrt(det)

    if node.tag == "path" and "d" in node.attributes:
        local = sample_path(node.attributes["d"])
        geom.path_points = [matrix.apply(px, py) for px, py in local]
    return geom


_PATH_TOKEN_RE = re.compile(r"[A-Za-z]|[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?")

_CURVE_STEPS = [i / 10.0 for i in range(1, 11)]  # flatten curves at t = 0.1 .. 1.0


def sample_path(d: str) -> list[tuple[float, float]]:
    """Vertices of a path's line commands, with curves flattened by sampling.

    Handles absolute and relative M, L, H, V plus flattened C, S, Q, T;
    arcs (A) degrade to chord samples, which is fine for the vertex checks
    this feeds.
    """
    tokens = _PATH_TOKEN_RE.findall(d)
    points: list[tuple[float, float]] = []
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    prev_cubic_ctrl: tuple[float, float] | None = None
    prev_quad_ctrl: tuple[float, float] | None = None
    i = 0
    cmd = ""

    def take(n: int) -> list[float]:
        nonlocal i
        vals = [float(t) for t in tokens[i:i + n]]
        if len(vals) < n:
            raise ValueError(f"truncated path data near {d[-24:]!r}")
        i += n
        return vals

    while i < len(tokens):
        if tokens[i].isalpha():
            cmd = tokens[i]
            i += 1
            if cmd in "Zz":
                cur = start
                prev_cubic_ctrl = prev_quad_ctrl = None
                continue
        rel = cmd.islower()
        op = cmd.upper()
        ox, oy = (cur if rel else (0.0, 0.0))

        if op == "M":
            x, y = take(2)
            cur = (ox + x, oy + y)
            start = cur
            points.append(cur)
            cmd = "l" if rel else "L"  # subsequent pairs are implicit linetos
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op == "L":
            x, y = take(2)
            cur = (ox + x, oy + y)
            points.append(cur)
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op == "H":
            (x,) = take(1)
            cur = ((ox if rel else 0.0) + x, cur[1])
            points.append(cur)
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op == "V":
            (y,) = take(1)
            cur = (cur[0], (oy if rel else 0.0) + y)
            points.append(cur)
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op in ("C", "S"):
            if op == "C":
                x1, y1, x2, y2, x, y = take(6)
                c1 = (ox + x1, oy + y1)
            else:
                x2, y2, x, y = take(4)
                c1 = (2 * cur[0] - prev_cubic_ctrl[0], 2 * cur[1] - prev_cubic_ctrl[1]) \
                    if prev_cubic_ctrl else cur
            c2 = (ox + x2, oy + y2)
            end = (ox + x, oy + y)
            for t in _CURVE_STEPS:
                points.append(_cubic_at(cur, c1, c2, end, t))
            cur = end
            prev_cubic_ctrl = c2
            prev_quad_ctrl = None
        elif op in ("Q", "T"):
            if op == "Q":
                x1, y1, x, y = take(4)
                ctrl = (ox + x1, oy + y1)
            else:
                x, y = take(2)
                ctrl = (2 * cur[0] - prev_quad_ctrl[0], 2 * cur[1] - prev_quad_ctrl[1]) \
                    if prev_quad_ctrl else cur
            end = (ox + x, oy + y)
            for t in _CURVE_STEPS:
                points.append(_quad_at(cur, ctrl, end, t))
            cur = end
            prev_quad_ctrl = ctrl
            prev_cubic_ctrl = None
        elif op == "A":
            _rx, _ry, _rot, _large, _sweep, x, y = take(7)
            end = (ox + x, oy + y)
            for t in _CURVE_STEPS:
                points.append((cur[0] + (end[0] - cur[0]) * t,
                               cur[1] + (end[1] - cur[1]) * t))
            cur = end
            prev_cubic_ctrl = prev_quad_ctrl = None
        else:
            raise ValueError(f"unsupported path command {cmd!r}")
    return points


def _cubic_at(p0, p1, p2, p3, t: float) -> tuple[float, float]:
    mt = 1.0 - t
    return (
        mt ** 3 * p0[0] + 3 * mt ** 2 * t * p1[0] + 3 * mt * t ** 2 * p2[0] + t ** 3 * p3[0],
        mt ** 3 * p0[1] + 3 * mt ** 2 * t * p1[1] + 3 * mt * t ** 2 * p2[1] + t ** 3 * p3[1],
    )


def _quad_at(p0, p1, p2, t: float) -> tuple[float, float]:
    mt = 1.0 - t
    return (
        mt ** 2 * p0[0] + 2 * mt * t * p1[0] + t ** 2 * p2[0],
        mt ** 2 * p0[1] + 2 * mt * t * p1[1] + t ** 2 * p2[1],
    )
