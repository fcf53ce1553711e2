"""Exception hierarchy for the grader.

Every error the library raises derives from :class:`VisgradeError` so the
harness can distinguish "this submission is wrong" from "the grader broke".
Checker-level failures are *results*, not exceptions; exceptions mean a
precondition did not hold (bad rubric, unreachable browser, nonsense input).
"""

from __future__ import annotations


class VisgradeError(Exception):
    """Base class for all grader errors."""


# --- document parsing -------------------------------------------------------

class UnparseableDocument(VisgradeError):
    """No root element could be recovered from the input."""


class InvalidSelector(VisgradeError):
    """Selector expression failed to parse."""


class MalformedTransform(VisgradeError):
    """SVG transform list contained an unrecognized token."""

    def __init__(self, token: str, message: str = ""):
        self.token = token
        super().__init__(message or f"malformed transform at {token!r}")


class UnknownColor(VisgradeError):
    """Color string not in any recognized format."""


class NonNumericAttribute(VisgradeError):
    """An attribute expected to hold a number did not."""

    def __init__(self, attribute: str, value: str = "", node_id: str = ""):
        self.attribute = attribute
        self.value = value
        self.node_id = node_id
        where = f" on {node_id}" if node_id else ""
        super().__init__(f"attribute {attribute!r}{where} is not numeric: {value!r}")


# --- rubric loading ---------------------------------------------------------

class RubricError(VisgradeError):
    """Base for rubric configuration problems."""


class YamlSyntax(RubricError):
    """Rubric file is not valid YAML."""

    def __init__(self, line: int | None, message: str):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class SchemaViolation(RubricError):
    """Rubric document does not match the schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingReference(RubricError):
    """A test references a scale or dataset id that was never declared."""

    def __init__(self, test_id: str, missing: str):
        self.test_id = test_id
        self.missing = missing
        super().__init__(f"test {test_id!r} references undeclared id {missing!r}")


class RubricInvalid(RubricError):
    """Catch-all for a rubric that cannot be used to grade."""


# --- layout detection -------------------------------------------------------

class NoSvgFound(VisgradeError):
    """svg_selector matched nothing."""


class MultipleSvg(VisgradeError):
    """svg_selector matched more than one element."""

    def __init__(self, count: int, selector: str = ""):
        self.count = count
        super().__init__(f"expected one svg for {selector!r}, found {count}")


# --- scale inference --------------------------------------------------------

class AxisNotFound(VisgradeError):
    """Axis group selector matched nothing."""


class NoTicks(VisgradeError):
    """Axis group exists but contains no usable ticks."""


class InsufficientTicks(VisgradeError):
    """Too few parseable ticks to fit the declared scale kind."""

    def __init__(self, count: int, needed: int = 3):
        self.count = count
        self.needed = needed
        super().__init__(f"need at least {needed} parseable ticks, got {count}")


class PoorFit(VisgradeError):
    """Tick positions do not follow the mandated scale kind."""

    def __init__(self, r2: float, kind: str, residual_px: float = float("nan"),
                 suggestion: str = ""):
        self.r2 = r2
        self.kind = kind
        self.residual_px = residual_px
        self.suggestion = suggestion
        msg = f"ticks do not fit a {kind} scale (r²={r2:.6f}, max residual {residual_px:.2f}px)"
        if suggestion:
            msg += f"; {suggestion}"
        super().__init__(msg)


class DomainViolation(VisgradeError):
    """Value falls beyond the inferred domain plus extrapolation allowance."""

    def __init__(self, value, domain, detail: str = ""):
        self.value = value
        self.domain = domain
        msg = f"value {value!r} outside inferred domain {domain!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UnknownCategory(VisgradeError):
    """Category not present in a band scale's domain."""


class WrongColorCount(VisgradeError):
    """Marks use a different number of distinct colors than the rubric's k."""

    def __init__(self, found: int, expected: int):
        self.found = found
        self.expected = expected
        super().__init__(f"found {found} distinct mark colors, expected {expected}")


class QuantileMismatch(VisgradeError):
    """Mark colors do not follow the k-quantile partition of the values."""

    def __init__(self, value, index: int, detail: str = ""):
        self.value = value
        self.index = index
        super().__init__(detail or f"value {value!r} (datum {index}) colored outside its quantile bucket")


# --- checkers ---------------------------------------------------------------

class InsufficientMarks(VisgradeError):
    """Checker needs more marks than the selector matched."""

    def __init__(self, found: int, needed: int):
        self.found = found
        self.needed = needed
        super().__init__(f"need at least {needed} marks, found {found}")


# --- browser automation -----------------------------------------------------

class WebdriverError(VisgradeError):
    """Base for browser-automation failures."""


class ServerUnreachable(WebdriverError):
    """Automation server did not answer."""


class PageLoadTimeout(WebdriverError):
    def __init__(self, seconds: float, url: str = ""):
        self.seconds = seconds
        super().__init__(f"page {url} not ready after {seconds:.0f}s")


class JavascriptFatal(WebdriverError):
    """Page threw an uncaught error before it was ready."""

    def __init__(self, console_message: str):
        self.console_message = console_message
        super().__init__(f"page error: {console_message}")


class TargetNotFound(WebdriverError):
    def __init__(self, selector: str, step_index: int):
        self.selector = selector
        self.step_index = step_index
        super().__init__(f"step {step_index}: no element matches {selector!r}")


class ChainInterrupted(WebdriverError):
    def __init__(self, step_index: int, cause: str):
        self.step_index = step_index
        self.cause = cause
        super().__init__(f"action chain failed at step {step_index}: {cause}")


class ScreenshotFailed(WebdriverError):
    pass


class SessionFailure(WebdriverError):
    """Live session could not be established or died mid-grade."""


# --- submission serving -----------------------------------------------------

class PortExhausted(VisgradeError):
    """No local port available for the static server."""


class PathTraversalAttempt(VisgradeError):
    """A request tried to escape the served directory."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"refused path escaping the served root: {path!r}")
