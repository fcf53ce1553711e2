"""Rubric-driven grading for interactive browser-based data visualizations.

The package splits into a static analysis core (snapshot parsing, scale
inference, rubric checks) and a live layer that drives a browser-automation
session to exercise interactivity, plus an orchestration harness and CLI.
"""

from .checkers import (
    CheckResult,
    check_axis_ticks,
    check_color_grouping,
    check_constant,
    check_positions,
    check_sorted,
)
from .dom import ElementNode, parse_color, parse_snapshot, resolve_geometry, select
from .errors import VisgradeError
from .harness import (
    GradeReport,
    Submission,
    TestOutcome,
    grade,
    grade_batch,
    render_report,
    serve_submission,
)
from .layout import detect_layout
from .rubric import RubricSpec, load_rubric, parse_rubric, validate_structure
from .scales import (
    InferredScale,
    extract_ticks,
    fit_scale,
    forward,
    infer_quantile_colors,
)
from .webdriver import (
    ActionStep,
    BrowserSession,
    DomDelta,
    StateAssertion,
    assert_state,
    close_session,
    open_session,
    run_chain,
    snapshot_dom,
)

__version__ = "0.1.0"

__all__ = [
    "ActionStep",
    "BrowserSession",
    "CheckResult",
    "DomDelta",
    "ElementNode",
    "GradeReport",
    "InferredScale",
    "RubricSpec",
    "StateAssertion",
    "Submission",
    "TestOutcome",
    "VisgradeError",
    "assert_state",
    "check_axis_ticks",
    "check_color_grouping",
    "check_constant",
    "check_positions",
    "check_sorted",
    "close_session",
    "detect_layout",
    "extract_ticks",
    "fit_scale",
    "forward",
    "grade",
    "grade_batch",
    "infer_quantile_colors",
    "load_rubric",
    "open_session",
    "parse_color",
    "parse_rubric",
    "parse_snapshot",
    "render_report",
    "resolve_geometry",
    "run_chain",
    "select",
    "serve_submission",
    "snapshot_dom",
    "validate_structure",
    "__version__",
]
