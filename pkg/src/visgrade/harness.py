"""Grading orchestration: serve a submission, run the rubric, emit reports.

Static mode analyzes a pre-rendered snapshot with no browser anywhere in
the loop, so results are reproducible byte for byte. Live mode drives a
browser-automation session against the same analysis core; interaction
tests only exist there.
"""

from __future__ import annotations

import csv
import functools
import http.server
import io
import json
import logging
import mimetypes
import os
import threading
import time
import traceback
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import checkers, webdriver
from .dom import ElementNode, effective_value, parse_snapshot, select
from .errors import (
    JavascriptFatal,
    PathTraversalAttempt,
    PortExhausted,
    RubricError,
    VisgradeError,
    WebdriverError,
)
from .layout import detect_layout, format_layout_advisory
from .rubric import RubricSpec, TestSpec, read_csv_dataset, validate_structure
from .scales import InferredScale, extract_ticks, fit_scale, forward, \
    infer_quantile_colors
from .webdriver import ActionStep, BrowserSession, StateAssertion, \
    capture_screenshot, close_session, navigate, open_session, run_chain, \
    snapshot_dom

GRADER_VERSION = "0.1.0"
SESSION_ATTEMPTS = 3  # first try plus two retries

_log = logging.getLogger("visgrade")

_CATEGORY_TITLES = {
    "advisory": "Advisory",
    "appearance": "Mark appearance",
    "positioning": "Scales & positioning",
    "interaction": "Interactivity",
}

_GLYPHS = {"pass": "+", "fail": "x", "error": "!", "advisory": "*"}


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Submission:
    root_dir: str
    entry_file: str
    id: str


@dataclass
class TestOutcome:
    test_id: str
    category: str
    points_awarded: float
    points_possible: float
    status: str  # pass | fail | error | advisory
    feedback: list[str] = field(default_factory=list)
    diagnostic: str = ""  # instructor-only; never rendered for students


@dataclass
class GradeReport:
    submission_id: str
    score: float
    max_score: float
    outcomes: list[TestOutcome] = field(default_factory=list)
    screenshot_path: str | None = None
    duration_ms: int = 0
    grader_version: str = GRADER_VERSION
    status: str = "ok"  # ok even for 0 points; error means grader malfunction
    diagnostics: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# submission static server (merged view: submission shadows shared assets)
# --------------------------------------------------------------------------

class _OverlayHandler(http.server.BaseHTTPRequestHandler):
    server_version = "visgrade-static/" + GRADER_VERSION
    error_message_format = (
        "<!DOCTYPE html><html><head><title>%(code)d %(message)s</title>"
        "</head><body><h1>%(code)d %(message)s</h1></body></html>")

    def do_GET(self):  # noqa: N802 (http.server naming)
        raw = urllib.parse.unquote(urllib.parse.urlsplit(self.path).path)
        relative = raw.lstrip("/")
        if not relative:
            self.send_error(404, "Not Found")
            return
        for root in self.server.roots:
            candidate = (root / relative).resolve()
            if not candidate.is_relative_to(root):
                attempt = PathTraversalAttempt(raw)
                self.server.traversal_attempts.append(attempt)
                _log.warning("%s", attempt)
                self.send_error(403, "Forbidden")
                return
            if candidate.is_file():
                self._send_file(candidate)
                return
        self.send_error(404, "Not Found")

    def _send_file(self, path: Path):
        content_type = mimetypes.guess_type(str(path))[0] or \
            "application/octet-stream"
        data = path.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, format, *args):  # noqa: A002 (stdlib signature)
        _log.debug("static server: " + format, *args)


class SubmissionServer:
    """Loopback HTTP server over submission files overlaid on shared assets."""

    def __init__(self, submission_root, shared_assets=None):
        roots = [Path(submission_root).resolve()]
        if shared_assets is not None:
            roots.append(Path(shared_assets).resolve())
        try:
            self._httpd = http.server.ThreadingHTTPServer(
                ("127.0.0.1", 0), _OverlayHandler)
        except OSError as exc:
            raise PortExhausted(f"cannot bind a loopback port: {exc}") from exc
        self._httpd.roots = roots
        self._httpd.traversal_attempts = []
        self._httpd.daemon_threads = True
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        self.base_url = f"http://127.0.0.1:{self._httpd.server_address[1]}"

    @property
    def traversal_attempts(self) -> list[PathTraversalAttempt]:
        return list(self._httpd.traversal_attempts)

    def close(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def serve_submission(sub: Submission, shared_assets=None) -> SubmissionServer:
    return SubmissionServer(sub.root_dir, shared_assets)


# --------------------------------------------------------------------------
# analysis context: one snapshot, cached scales and datasets
# --------------------------------------------------------------------------

class _Analysis:
    def __init__(self, root: ElementNode, rubric: RubricSpec):
        self.root = root
        self.rubric = rubric
        self.findings = validate_structure(rubric.structure, root)
        self.failed_selectors = [
            f.selector for f in self.findings if not f.satisfied]
        self._scales: dict[str, InferredScale | VisgradeError] = {}
        self._datasets: dict[str, list[dict] | VisgradeError] = {}

    def dataset(self, name: str) -> list[dict]:
        if name not in self._datasets:
            path = Path(self.rubric.datasets[name])
            if not path.is_absolute() and self.rubric.source_dir:
                path = Path(self.rubric.source_dir) / path
            try:
                self._datasets[name] = read_csv_dataset(path)
            except VisgradeError as exc:
                self._datasets[name] = exc
        value = self._datasets[name]
        if isinstance(value, VisgradeError):
            raise value
        return value

    def scale(self, scale_id: str) -> InferredScale:
        if scale_id not in self._scales:
            try:
                self._scales[scale_id] = self._infer(scale_id)
            except VisgradeError as exc:
                self._scales[scale_id] = exc
        value = self._scales[scale_id]
        if isinstance(value, VisgradeError):
            raise value
        return value

    def _infer(self, scale_id: str) -> InferredScale:
        spec = self.rubric.scale_by_id(scale_id)
        if spec.kind == "quantile-color":
            nodes = select(self.root, spec.marks or "circle")
            values, colors = [], []
            for node in nodes:
                raw = effective_value(node, spec.value_attr)
                if raw is None:
                    continue
                try:
                    values.append(float(raw))
                except ValueError:
                    continue
                colors.append(checkers._effective_fill(node))
            return infer_quantile_colors(values, colors, spec.k or 4)
        samples = extract_ticks(self.root, spec.axis_group, spec.orientation)
        scale = fit_scale(samples, spec.kind,
                          threshold_r2=self.rubric.tolerances.fit_r2,
                          residual_px=self.rubric.tolerances.position_px)
        return scale

    def gated_by(self, selectors: list[str]) -> str | None:
        """First missing structure prerequisite among the given selectors."""
        for failed in self.failed_selectors:
            for sel in selectors:
                if sel == failed or sel.startswith(failed + " "):
                    return failed
        return None


def _selectors_used(test: TestSpec, rubric: RubricSpec) -> list[str]:
    check = test.check
    selectors = []

    def scale_group(scale_id):
        group = rubric.scale_by_id(scale_id).axis_group
        if group:
            selectors.append(group)

    if "positions" in check:
        config = check["positions"]
        selectors.append(config["marks"])
        scale_group(config["x_scale"])
        scale_group(config["y_scale"])
    if "sorted" in check:
        selectors.append(check["sorted"]["marks"])
    if "constant" in check:
        selectors.append(check["constant"]["marks"])
    if "color_grouping" in check:
        selectors.extend(
            g["marks"] for g in check["color_grouping"]["groups"])
    if "axis_ticks" in check:
        scale_group(check["axis_ticks"]["scale"])
    if "scale_fit" in check:
        scale_group(check["scale_fit"]["scale"])
    return selectors


# --------------------------------------------------------------------------
# individual check dispatch
# --------------------------------------------------------------------------

def _domain_covered(scale: InferredScale, expected, analysis: _Analysis):
    """Lines describing uncovered expected-domain values, empty when fine."""
    problems = []
    if isinstance(expected, dict):
        rows = analysis.dataset(expected["from_dataset"])
        values = [row[expected["field"]] for row in rows
                  if expected["field"] in row]
    else:
        values = list(expected)
    for value in values:
        try:
            forward(scale, value)
        except VisgradeError as exc:
            problems.append(f"expected domain value {value!r} is not covered: "
                            f"{exc}")
            break
    return problems


def _run_structure(analysis: _Analysis) -> checkers.CheckResult:
    findings = analysis.findings
    lines = ["Assumption: required structure checked inside the declared svg "
             "scope."] + [f.describe() for f in findings]
    missing = [f for f in findings if not f.satisfied]
    return checkers.CheckResult(
        passed=not missing,
        expected="all required groups and elements present",
        actual="all present" if not missing else
        f"{len(missing)} requirement(s) missing",
        detail_lines=lines,
        fraction=0.0 if missing else 1.0)


def _run_layout(analysis: _Analysis) -> checkers.CheckResult:
    report = detect_layout(analysis.root, analysis.rubric.structure)
    lines = format_layout_advisory(report)
    return checkers.CheckResult(
        passed=report.confidence != "unknown",
        expected="a detectable margin-convention layout",
        actual=f"margins {report.confidence}",
        detail_lines=lines,
        fraction=1.0 if report.confidence != "unknown" else 0.0)


def _run_scale_fit(analysis: _Analysis, config: dict) -> checkers.CheckResult:
    scale_id = config["scale"]
    spec = analysis.rubric.scale_by_id(scale_id)
    scale = analysis.scale(scale_id)  # VisgradeError propagates to caller
    lines = [f"Assumption: scale {scale_id!r} read from {spec.axis_group!r} "
             f"ticks and fitted as {spec.kind}.",
             f"Fit r2 {scale.fit_r2:.6f} over {scale.tick_count} ticks."]
    problems = []
    if spec.expected_domain is not None:
        problems = _domain_covered(scale, spec.expected_domain, analysis)
        lines.extend(problems)
    return checkers.CheckResult(
        passed=not problems,
        expected=f"{spec.kind} scale covering the expected domain",
        actual="fit accepted" if not problems else "domain not covered",
        detail_lines=lines,
        fraction=0.0 if problems else 1.0)


def _run_check(analysis: _Analysis, test: TestSpec) -> checkers.CheckResult:
    check = test.check
    rubric = analysis.rubric
    if "structure" in check:
        return _run_structure(analysis)
    if "layout" in check:
        return _run_layout(analysis)
    if "scale_fit" in check:
        return _run_scale_fit(analysis, check["scale_fit"])
    if "positions" in check:
        config = check["positions"]
        return checkers.check_positions(
            analysis.root, config["marks"],
            analysis.scale(config["x_scale"]),
            analysis.scale(config["y_scale"]),
            analysis.dataset(config["dataset"]),
            (config["x_field"], config["y_field"]),
            tolerance_px=config.get("tolerance_px",
                                    rubric.tolerances.position_px),
            exact_count=config.get("exact_count", False))
    if "sorted" in check:
        config = check["sorted"]
        return checkers.check_sorted(
            analysis.root, config["marks"], config["key"], config["order"],
            along=config.get("along", "auto"))
    if "constant" in check:
        config = check["constant"]
        return checkers.check_constant(
            analysis.root, config["marks"], config["attribute"],
            tolerance=config.get("tolerance", rubric.tolerances.size_px))
    if "color_grouping" in check:
        return checkers.check_color_grouping(
            analysis.root, check["color_grouping"]["groups"])
    if "axis_ticks" in check:
        config = check["axis_ticks"]
        return checkers.check_axis_ticks(
            analysis.scale(config["scale"]),
            expected_interval=config.get("expected_interval"),
            expected_values=config.get("expected_values"))
    raise RubricError(f"test {test.id!r} has no runnable check")


def _feedback_lines(result: checkers.CheckResult, test: TestSpec) -> list[str]:
    lines = [f"expected: {result.expected}", f"actual: {result.actual}"]
    lines.extend(result.detail_lines)
    if not result.passed and test.feedback_hint:
        lines.append(f"hint: {test.feedback_hint}")
    return lines


def _outcome_for(analysis: _Analysis, test: TestSpec) -> TestOutcome:
    advisory = test.category == "advisory"
    gate = analysis.gated_by(_selectors_used(test, analysis.rubric))
    if gate is not None and not advisory:
        return TestOutcome(
            test_id=test.id, category=test.category,
            points_awarded=0.0, points_possible=test.points, status="error",
            feedback=[f"skipped: prerequisite missing {gate}"])
    try:
        result = _run_check(analysis, test)
    except VisgradeError as exc:
        return TestOutcome(
            test_id=test.id, category=test.category, points_awarded=0.0,
            points_possible=0.0 if advisory else test.points,
            status="advisory" if advisory else "error",
            feedback=[f"could not evaluate: {exc}"],
            diagnostic=traceback.format_exc())
    if advisory:
        return TestOutcome(
            test_id=test.id, category=test.category,
            points_awarded=0.0, points_possible=0.0, status="advisory",
            feedback=_feedback_lines(result, test))
    partial = test.check.get("positions", {}).get("partial") == "linear"
    fraction = result.fraction if partial else (1.0 if result.passed else 0.0)
    awarded = round(test.points * fraction, 2)
    return TestOutcome(
        test_id=test.id, category=test.category,
        points_awarded=awarded, points_possible=test.points,
        status="pass" if result.passed else "fail",
        feedback=_feedback_lines(result, test))


# --------------------------------------------------------------------------
# grading entry points
# --------------------------------------------------------------------------

def _ordered_tests(rubric: RubricSpec) -> list[TestSpec]:
    advisory = [t for t in rubric.tests if t.category == "advisory"]
    graded = [t for t in rubric.tests if t.category != "advisory"]
    return advisory + graded


def _error_outcomes(rubric: RubricSpec, message: str) -> list[TestOutcome]:
    outcomes = []
    for test in _ordered_tests(rubric):
        advisory = test.category == "advisory"
        outcomes.append(TestOutcome(
            test_id=test.id, category=test.category, points_awarded=0.0,
            points_possible=0.0 if advisory else test.points,
            status="advisory" if advisory else "error",
            feedback=[message]))
    return outcomes


def _finish(sub: Submission, rubric: RubricSpec, outcomes: list[TestOutcome],
            started: float, screenshot: str | None = None,
            status: str = "ok", diagnostics: dict | None = None) -> GradeReport:
    return GradeReport(
        submission_id=sub.id,
        score=round(sum(o.points_awarded for o in outcomes), 2),
        max_score=rubric.meta.total_points,
        outcomes=outcomes,
        screenshot_path=screenshot,
        duration_ms=int((time.perf_counter() - started) * 1000),
        status=status,
        diagnostics=diagnostics or {})


def grade(sub: Submission, rubric: RubricSpec, mode: str = "static", *,
          webdriver_url: str | None = None, shared_assets=None,
          screenshot_path=None) -> GradeReport:
    """Run every rubric test against one submission; never raises for
    submission faults, only for grader misuse (unknown mode)."""
    if mode not in ("static", "live"):
        raise ValueError(f"unknown mode {mode!r}")
    started = time.perf_counter()
    if mode == "static":
        return _grade_static(sub, rubric, started)
    return _grade_live(sub, rubric, started, webdriver_url=webdriver_url,
                       shared_assets=shared_assets,
                       screenshot_path=screenshot_path)


def _grade_static(sub: Submission, rubric: RubricSpec,
                  started: float) -> GradeReport:
    entry = Path(sub.root_dir) / sub.entry_file
    try:
        root = parse_snapshot(entry.read_text(encoding="utf-8"))
    except (OSError, VisgradeError) as exc:
        # the submission's own fault, so the grading itself still succeeded
        return _finish(
            sub, rubric,
            _error_outcomes(rubric, f"submission could not be loaded: {exc}"),
            started,
            diagnostics={"load": traceback.format_exc()})
    analysis = _Analysis(root, rubric)
    outcomes = []
    diagnostics = {}
    for test in _ordered_tests(rubric):
        if "actions" in test.check:
            outcomes.append(TestOutcome(
                test_id=test.id, category=test.category, points_awarded=0.0,
                points_possible=test.points, status="error",
                feedback=["requires a live session; run with --mode live"]))
            continue
        outcome = _outcome_for(analysis, test)
        if outcome.diagnostic:
            diagnostics[test.id] = outcome.diagnostic
        outcomes.append(outcome)
    return _finish(sub, rubric, outcomes, started, diagnostics=diagnostics)


def _open_with_retries(endpoint: str, entry_url: str, rubric: RubricSpec,
                       diagnostics: dict) -> BrowserSession:
    last: Exception | None = None
    for attempt in range(SESSION_ATTEMPTS):
        try:
            return open_session(endpoint, entry_url,
                                ready_selector=rubric.ready_selector)
        except JavascriptFatal:
            raise  # the submission's own fault; retrying cannot help
        except WebdriverError as exc:
            last = exc
            diagnostics[f"session_attempt_{attempt + 1}"] = str(exc)
            time.sleep(0.2)
    raise last  # SessionFailure/ServerUnreachable/PageLoadTimeout


def _grade_live(sub: Submission, rubric: RubricSpec, started: float, *,
                webdriver_url: str | None, shared_assets,
                screenshot_path) -> GradeReport:
    endpoint = webdriver_url or os.environ.get(
        "VISGRADE_WEBDRIVER_URL", webdriver.DEFAULT_ENDPOINT)
    diagnostics: dict = {}
    try:
        server = serve_submission(sub, shared_assets)
    except VisgradeError as exc:
        return _finish(sub, rubric,
                       _error_outcomes(rubric, f"could not serve: {exc}"),
                       started, status="error",
                       diagnostics={"fatal": str(exc)})
    with server:
        entry_url = f"{server.base_url}/{sub.entry_file}"
        try:
            session = _open_with_retries(endpoint, entry_url, rubric,
                                         diagnostics)
        except JavascriptFatal as exc:
            shot = _best_effort_screenshot(endpoint, screenshot_path)
            return _finish(
                sub, rubric,
                _error_outcomes(rubric, f"page error on load: {exc}"),
                started, screenshot=shot, diagnostics=diagnostics)
        except WebdriverError as exc:
            diagnostics["fatal"] = (f"no session after {SESSION_ATTEMPTS} "
                                    f"attempts: {exc}")
            return _finish(
                sub, rubric,
                _error_outcomes(rubric,
                                "grading session could not be established"),
                started, status="error", diagnostics=diagnostics)
        try:
            return _grade_over_session(sub, rubric, started, session,
                                       entry_url, screenshot_path,
                                       diagnostics)
        finally:
            close_session(session)


def _best_effort_screenshot(endpoint, screenshot_path):
    """Blank placeholder shot for pages that never loaded; never raises."""
    if not screenshot_path:
        return None
    try:
        session = webdriver.open_blank_session(endpoint)
    except Exception:
        return None
    try:
        Path(screenshot_path).write_bytes(capture_screenshot(session))
        return str(screenshot_path)
    except Exception:
        return None
    finally:
        close_session(session)


def _grade_over_session(sub: Submission, rubric: RubricSpec, started: float,
                        session: BrowserSession, entry_url: str,
                        screenshot_path, diagnostics: dict) -> GradeReport:
    analysis = _Analysis(snapshot_dom(session), rubric)
    outcomes = []
    page_is_fresh = True
    for test in _ordered_tests(rubric):
        if "actions" not in test.check:
            outcome = _outcome_for(analysis, test)
            if outcome.diagnostic:
                diagnostics[test.id] = outcome.diagnostic
            outcomes.append(outcome)
            continue
        config = test.check
        fresh = config.get("fresh_page", True)
        settle = config.get("settle_ms", rubric.settle_ms)
        try:
            if fresh and not page_is_fresh:
                navigate(session, entry_url,
                         ready_selector=rubric.ready_selector)
            page_is_fresh = False
            steps = [ActionStep.from_config(s) for s in config["actions"]]
            delta = run_chain(session, steps, settle_ms=settle)
            results = [webdriver.assert_state(
                delta, StateAssertion.from_config(a))
                for a in config["assert"]]
        except WebdriverError as exc:
            outcomes.append(TestOutcome(
                test_id=test.id, category=test.category, points_awarded=0.0,
                points_possible=test.points, status="error",
                feedback=[f"interaction could not run: {exc}"],
                diagnostic=traceback.format_exc()))
            diagnostics[test.id] = str(exc)
            continue
        passed = all(r.passed for r in results)
        feedback = []
        for result in results:
            feedback.extend(_feedback_lines(result, test)
                            if not result.passed else
                            [f"expected: {result.expected}",
                             f"actual: {result.actual}"])
        if not passed and test.feedback_hint and \
                f"hint: {test.feedback_hint}" not in feedback:
            feedback.append(f"hint: {test.feedback_hint}")
        outcomes.append(TestOutcome(
            test_id=test.id, category=test.category,
            points_awarded=test.points if passed else 0.0,
            points_possible=test.points,
            status="pass" if passed else "fail",
            feedback=feedback))
    shot = None
    if screenshot_path:
        try:
            Path(screenshot_path).write_bytes(capture_screenshot(session))
            shot = str(screenshot_path)
        except (OSError, WebdriverError) as exc:
            diagnostics["screenshot"] = str(exc)
    return _finish(sub, rubric, outcomes, started, screenshot=shot,
                   diagnostics=diagnostics)


# --------------------------------------------------------------------------
# batch
# --------------------------------------------------------------------------

def _safe_grade(sub: Submission, rubric: RubricSpec, mode: str,
                kwargs: dict) -> GradeReport:
    try:
        return grade(sub, rubric, mode, **kwargs)
    except Exception as exc:  # one submission never sinks the batch
        return GradeReport(
            submission_id=sub.id, score=0.0,
            max_score=rubric.meta.total_points,
            outcomes=_error_outcomes(rubric, "internal grading error"),
            status="error",
            diagnostics={"fatal": f"{exc}\n{traceback.format_exc()}"})


def grade_batch(submissions: list[Submission], rubric: RubricSpec,
                parallelism: int = 1, mode: str = "static",
                **kwargs) -> tuple[list[GradeReport], str]:
    """Grade all submissions; reports come back in input order.

    Returns (reports, summary_csv). Each worker owns its own server and
    session; a crash in one submission yields an error report for it only.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    worker = functools.partial(_safe_grade, rubric=rubric, mode=mode,
                               kwargs=kwargs)
    if parallelism == 1:
        reports = [worker(sub) for sub in submissions]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            reports = list(pool.map(worker, submissions))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", "score", "max_score", "duration_ms", "status"])
    for report in reports:
        writer.writerow([report.submission_id, f"{report.score:g}",
                         f"{report.max_score:g}", report.duration_ms,
                         report.status])
    return reports, buffer.getvalue()


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def render_report(report: GradeReport, format: str = "json",
                  canonical: bool = False) -> bytes:
    """Serialize a report; canonical form drops wall-clock fields so
    identical grading inputs give identical bytes."""
    if format == "json":
        payload = {
            "schema": 1,
            "submission_id": report.submission_id,
            "score": report.score,
            "max_score": report.max_score,
            "duration_ms": report.duration_ms,
            "grader_version": report.grader_version,
            "screenshot": report.screenshot_path,
            "tests": [
                {
                    "id": o.test_id,
                    "category": o.category,
                    "status": o.status,
                    "score": o.points_awarded,
                    "max_score": o.points_possible,
                    "output": "\n".join(o.feedback),
                }
                for o in report.outcomes
            ],
        }
        if canonical:
            del payload["duration_ms"]
        return (json.dumps(payload, indent=2, sort_keys=False) + "\n").encode()
    if format == "text":
        return _render_text(report, canonical).encode()
    raise ValueError(f"unknown report format {format!r}")


def _render_text(report: GradeReport, canonical: bool) -> str:
    lines = [f"Submission {report.submission_id}: "
             f"{report.score:g}/{report.max_score:g}"]
    if not canonical:
        lines[0] += f"  ({report.duration_ms} ms, grader "\
                    f"{report.grader_version})"
    for category in _CATEGORY_TITLES:
        outcomes = [o for o in report.outcomes if o.category == category]
        if not outcomes:
            continue
        lines.append("")
        lines.append(_CATEGORY_TITLES[category])
        for o in outcomes:
            glyph = _GLYPHS.get(o.status, "?")
            points = "" if o.status == "advisory" else \
                f" ({o.points_awarded:g}/{o.points_possible:g})"
            lines.append(f"  {glyph} {o.test_id}{points}")
            show_all = o.status in ("fail", "error", "advisory")
            for line in o.feedback if show_all else []:
                lines.append(f"      {line}")
    if report.screenshot_path:
        lines.append("")
        lines.append(f"Screenshot: {report.screenshot_path}")
    return "\n".join(lines) + "\n"
