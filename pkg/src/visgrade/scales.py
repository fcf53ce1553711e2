"""Recover data-to-pixel and data-to-color mappings from rendered charts.

The chart is the only input: axis tick positions and labels are read from
the DOM, a least-squares line is fitted through position = slope*g(value)
+ intercept (g being identity, log10, square root, or epoch milliseconds
for the declared scale kind), and the fit is accepted only when r-squared
and the worst residual clear their thresholds. The recovered mapping is
what positioning checks use to build each student's tailored expected
solution, so legitimate design variations (different sizes, margins,
inverted ranges) grade identically.

Scale kind is declared by the rubric and verified here, never guessed;
a best-fitting-kind diagnostic is attached to rejections as a hint.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .dom import ElementNode, Rgba, absolute_point, select, text_content
from .errors import (
    AxisNotFound,
    DomainViolation,
    InsufficientTicks,
    NoTicks,
    PoorFit,
    QuantileMismatch,
    UnknownCategory,
    WrongColorCount,
)

CONTINUOUS_KINDS = ("linear", "log", "sqrt", "time")
DEFAULT_R2 = 0.999
DEFAULT_RESIDUAL_PX = 2.0
EXTRAPOLATION_ALLOWANCE = 0.05  # fraction of domain span


# --------------------------------------------------------------------------
# tick extraction
# --------------------------------------------------------------------------

@dataclass
class TickSample:
    position_px: float
    label: str
    parsed_value: float | None  # numeric reading of the label, if it has one


_NUMERIC_LABEL_RE = re.compile(
    r"^[-+−]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?\s*[%kM]?$")


def parse_numeric_label(label: str) -> float | None:
    """Axis-label grammar: sign, comma groups, decimals, %, k, M suffixes."""
    token = label.strip()
    if not _NUMERIC_LABEL_RE.match(token):
        return None
    factor = 1.0
    if token.endswith("%"):
        factor = 0.01  # "50%" labels a datum of 0.5
        token = token[:-1].strip()
    elif token.endswith("k"):
        factor = 1e3
        token = token[:-1].strip()
    elif token.endswith("M"):
        factor = 1e6
        token = token[:-1].strip()
    token = token.replace(",", "").replace("−", "-")
    return float(token) * factor


_DATE_FORMATS = ("%Y-%m-%d", "%Y-%m", "%b %Y", "%B %Y", "%Y")


def parse_date_label(label: str) -> float | None:
    """Label as epoch milliseconds, accepting YYYY[-MM[-DD]] and Mon YYYY."""
    token = label.strip()
    for fmt in _DATE_FORMATS:
        try:
            parsed = datetime.strptime(token, fmt)
        except ValueError:
            continue
        return parsed.replace(tzinfo=timezone.utc).timestamp() * 1000.0
    return None


def extract_ticks(root: ElementNode, axis_group, orientation: str) -> list[TickSample]:
    """One sample per axis tick, positioned along the given orientation.

    Looks for d3's ``g.tick`` groups first, then translated child groups,
    then bare text labels, so hand-rolled axes still work.
    """
    groups = select(root, axis_group)
    if not groups:
        raise AxisNotFound(f"no element matches {axis_group!r}")
    group = groups[0]
    axis = 0 if orientation == "horizontal" else 1

    candidates: list[tuple[float, str]] = []
    for tick in select(group, "g.tick"):
        candidates.append((absolute_point(tick, 0.0, 0.0)[axis], _tick_label(tick)))
    if not candidates:
        for child in group.children:
            if child.tag == "g" and "transform" in child.attributes:
                label = _tick_label(child)
                if label:
                    candidates.append(
                        (absolute_point(child, 0.0, 0.0)[axis], label))
    if not candidates:
        for text in select(group, "text"):
            label = text_content(text).strip()
            if not label:
                continue
            x = float(text.attributes.get("x", 0) or 0)
            y = float(text.attributes.get("y", 0) or 0)
            candidates.append((absolute_point(text, x, y)[axis], label))
    if not candidates:
        raise NoTicks(f"axis {axis_group!r} contains no recognizable ticks")

    return [
        TickSample(position_px=pos, label=label,
                   parsed_value=parse_numeric_label(label))
        for pos, label in candidates
    ]


def _tick_label(tick: ElementNode) -> str:
    texts = select(tick, "text")
    return text_content(texts[0]).strip() if texts else ""


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

@dataclass
class ScaleFit:
    slope: float
    intercept: float
    residual_max_px: float


@dataclass
class InferredScale:
    kind: str
    domain: list           # [lo, hi], category list, or quantile thresholds
    range_px: list         # [lo, hi] pixels, or ordered colors for quantile
    fit_r2: float
    tick_count: int
    fit: ScaleFit | None = None
    tick_values: list = field(default_factory=list)
    tick_positions: list = field(default_factory=list)
    band_positions: dict | None = None
    bandwidth: float | None = None


def _g_of(kind: str):
    if kind in ("linear", "time"):
        return lambda v: v
    if kind == "log":
        return math.log10
    if kind == "sqrt":
        return math.sqrt
    raise ValueError(f"no transform for scale kind {kind!r}")


def _sample_value(sample: TickSample, kind: str) -> float | None:
    if kind == "time":
        value = parse_date_label(sample.label)
        if value is None and sample.parsed_value is not None:
            value = sample.parsed_value  # bare numbers read as epoch ms
        return value
    return sample.parsed_value


def fit_scale(samples: list[TickSample], kind: str,
              threshold_r2: float = DEFAULT_R2,
              residual_px: float = DEFAULT_RESIDUAL_PX) -> InferredScale:
    """Fit the declared kind to the ticks; reject anything that disagrees."""
    if kind == "band":
        return _fit_band(samples, residual_px)
    if kind not in CONTINUOUS_KINDS:
        raise ValueError(f"fit_scale cannot fit kind {kind!r}")

    pairs = []
    unparseable = 0
    for sample in samples:
        value = _sample_value(sample, kind)
        if value is None:
            unparseable += 1
        else:
            pairs.append((value, sample.position_px))
    if unparseable > len(samples) / 2:
        raise InsufficientTicks(len(pairs), needed=len(samples) - unparseable + 1)

    distinct = len({v for v, _ in pairs})
    if distinct < 3:
        raise InsufficientTicks(distinct)

    if kind == "log" and any(v <= 0 for v, _ in pairs):
        bad = next(v for v, _ in pairs if v <= 0)
        raise PoorFit(0.0, kind, residual_px=math.inf,
                      suggestion=f"a log scale cannot contain tick value {bad:g}")
    if kind == "sqrt" and any(v < 0 for v, _ in pairs):
        bad = next(v for v, _ in pairs if v < 0)
        raise PoorFit(0.0, kind, residual_px=math.inf,
                      suggestion=f"a sqrt scale cannot contain tick value {bad:g}")

    g = _g_of(kind)
    values = np.array([v for v, _ in pairs], dtype=float)
    gv = np.array([g(v) for v, _ in pairs], dtype=float)
    pos = np.array([p for _, p in pairs], dtype=float)

    slope, intercept, r2, residual_max = _least_squares(gv, pos)
    if r2 < threshold_r2 or residual_max > residual_px or slope == 0.0:
        raise PoorFit(r2, kind, residual_px=residual_max,
                      suggestion=_best_kind_hint(pairs, kind))

    lo, hi = float(values.min()), float(values.max())
    fit = ScaleFit(slope=slope, intercept=intercept, residual_max_px=residual_max)
    return InferredScale(
        kind=kind,
        domain=[lo, hi],
        range_px=[slope * g(lo) + intercept, slope * g(hi) + intercept],
        fit_r2=r2,
        tick_count=len(samples),
        fit=fit,
        tick_values=[v for v, _ in pairs],
        tick_positions=[p for _, p in pairs],
    )


def _least_squares(gv: np.ndarray, pos: np.ndarray):
    mx, my = gv.mean(), pos.mean()
    dx, dy = gv - mx, pos - my
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0, my, 0.0, float(np.abs(dy).max()) if len(pos) else 0.0
    slope = sxy / sxx
    intercept = my - slope * mx
    r2 = min(1.0, max(0.0, sxy * sxy / (sxx * syy)))
    residual_max = float(np.abs(pos - (slope * gv + intercept)).max())
    return slope, intercept, r2, residual_max


def _best_kind_hint(pairs: list[tuple[float, float]], rejected_kind: str) -> str:
    """Diagnose which kind the ticks actually follow, for feedback only."""
    best_kind, best_r2 = None, -1.0
    for kind in ("linear", "log", "sqrt"):
        if kind == rejected_kind:
            continue
        if kind == "log" and any(v <= 0 for v, _ in pairs):
            continue
        if kind == "sqrt" and any(v < 0 for v, _ in pairs):
            continue
        g = _g_of(kind)
        gv = np.array([g(v) for v, _ in pairs], dtype=float)
        pos = np.array([p for _, p in pairs], dtype=float)
        _, _, r2, _ = _least_squares(gv, pos)
        if r2 > best_r2:
            best_kind, best_r2 = kind, r2
    if best_kind is None or best_r2 < 0.9:
        return "the tick positions do not follow any supported scale kind"
    return f"the ticks fit a {best_kind} scale better (r2={best_r2:.4f})"


def _fit_band(samples: list[TickSample], residual_px: float) -> InferredScale:
    labeled = [s for s in samples if s.label]
    categories = [s.label for s in labeled]
    if len(set(categories)) < 2:
        raise InsufficientTicks(len(set(categories)), needed=2)
    if len(set(categories)) != len(categories):
        dup = next(c for i, c in enumerate(categories) if c in categories[:i])
        raise PoorFit(0.0, "band", residual_px=0.0,
                      suggestion=f"duplicate category label {dup!r}")

    ordered = sorted(labeled, key=lambda s: s.position_px)
    spacings = [b.position_px - a.position_px for a, b in zip(ordered, ordered[1:])]
    bandwidth = float(np.median(spacings))
    worst = max(abs(s - bandwidth) for s in spacings)
    if worst > residual_px:
        raise PoorFit(0.0, "band", residual_px=worst,
                      suggestion="band spacing is uneven; categories should be "
                                 "evenly spaced")
    return InferredScale(
        kind="band",
        domain=categories,
        range_px=[labeled[0].position_px, labeled[-1].position_px],
        fit_r2=1.0,
        tick_count=len(samples),
        band_positions={s.label: s.position_px for s in labeled},
        bandwidth=bandwidth,
        tick_values=categories,
        tick_positions=[s.position_px for s in labeled],
    )


# --------------------------------------------------------------------------
# forward mapping
# --------------------------------------------------------------------------

def forward(scale: InferredScale, value):
    """Map a data value through the recovered scale.

    Continuous kinds return pixels (5% extrapolation beyond the observed
    domain is tolerated); band returns the category's tick position;
    quantile-color returns the bucket's Rgba.
    """
    if scale.kind == "band":
        key = str(value).strip()
        if scale.band_positions is None or key not in scale.band_positions:
            raise UnknownCategory(f"category {value!r} is not on the axis")
        return scale.band_positions[key]

    if scale.kind == "quantile-color":
        index = bisect_right(scale.domain, float(value))
        return scale.range_px[index]

    if scale.fit is None:
        raise ValueError("scale carries no continuous fit")
    numeric = _coerce_value(scale.kind, value)
    lo, hi = scale.domain
    span = hi - lo
    allowance = EXTRAPOLATION_ALLOWANCE * span
    if numeric < lo - allowance or numeric > hi + allowance:
        raise DomainViolation(numeric, (lo, hi))
    if scale.kind == "log" and numeric <= 0:
        raise DomainViolation(numeric, (lo, hi))
    if scale.kind == "sqrt" and numeric < 0:
        raise DomainViolation(numeric, (lo, hi))
    g = _g_of(scale.kind)
    return scale.fit.slope * g(numeric) + scale.fit.intercept


def _coerce_value(kind: str, value) -> float:
    if kind == "time":
        if isinstance(value, datetime):
            stamped = value if value.tzinfo else value.replace(tzinfo=timezone.utc)
            return stamped.timestamp() * 1000.0
        if isinstance(value, str):
            parsed = parse_date_label(value)
            if parsed is None:
                raise UnknownCategory(f"cannot read {value!r} as a date")
            return parsed
    return float(value)


# --------------------------------------------------------------------------
# quantile color scales
# --------------------------------------------------------------------------

def quantile_thresholds(values: list[float], k: int) -> list[float]:
    """The k-quantile cut points (R-7 interpolation, matching d3.quantile)."""
    data = np.asarray(sorted(values), dtype=float)
    return [float(np.quantile(data, i / k, method="linear")) for i in range(1, k)]


def infer_quantile_colors(values: list[float], mark_colors: list[Rgba],
                          k: int) -> InferredScale:
    """Verify marks are colored by the k-quantile partition of their values."""
    if len(values) != len(mark_colors):
        raise ValueError("values and mark_colors must align one-to-one")
    if not values:
        raise InsufficientTicks(0, needed=k)
    distinct = []
    for color in mark_colors:
        if color not in distinct:
            distinct.append(color)
    if len(distinct) != k:
        raise WrongColorCount(len(distinct), k)

    thresholds = quantile_thresholds(values, k)
    bucket_color: dict[int, Rgba] = {}
    bucket_first: dict[int, float] = {}
    for value, color in zip(values, mark_colors):
        bucket = bisect_right(thresholds, value)
        if bucket not in bucket_color:
            bucket_color[bucket] = color
            bucket_first[bucket] = value
        elif color != bucket_color[bucket]:
            raise QuantileMismatch(
                value, bucket,
                detail=(f"value {value:g} is colored {color.css()} but its "
                        f"quantile bucket (containing {bucket_first[bucket]:g}) "
                        f"uses {bucket_color[bucket].css()}"))

    missing = [i for i in range(k) if i not in bucket_color]
    if missing:
        # a bucket got no data; color count k is then unreachable
        raise WrongColorCount(len(bucket_color), k)
    ordered = [bucket_color[i] for i in range(k)]
    if len(set(ordered)) != k:
        dup_idx = next(i for i, c in enumerate(ordered) if c in ordered[:i])
        raise QuantileMismatch(bucket_first[dup_idx], dup_idx,
                               detail="two quantile buckets share one color")
    return InferredScale(
        kind="quantile-color",
        domain=thresholds,
        range_px=ordered,
        fit_r2=1.0,
        tick_count=len(values),
        tick_values=list(values),
    )
