"""Live-session driver speaking the W3C browser-automation wire protocol.

Talks plain HTTP+JSON to any conforming automation server (chromedriver,
geckodriver, or the bundled jsdom-backed stand-in), so nothing here binds
to a vendor client library. Snapshots are serialized outer markup reparsed
into the same tree type static grading uses, which keeps every assertion
replayable offline.
"""

from __future__ import annotations

import base64
import math
import time
from dataclasses import dataclass, field

import requests

from .checkers import CheckResult
from .dom import (
    ElementNode,
    parse_color,
    parse_selector,
    parse_snapshot,
    select,
    select_one,
)
from .errors import (
    ChainInterrupted,
    JavascriptFatal,
    PageLoadTimeout,
    ScreenshotFailed,
    ServerUnreachable,
    SessionFailure,
    TargetNotFound,
    UnknownColor,
    WebdriverError,
)
from .rubric import ACTION_KINDS, MAX_PAUSE_MS, RELATIONS

DEFAULT_ENDPOINT = "http://localhost:9515"
ELEMENT_KEY = "element-6066-11e4-a52e-4f735466cecf"

_DRAG_STEPS = 6  # pointer-down, 5 intermediate moves, final move, pointer-up


@dataclass
class BrowserSession:
    endpoint: str
    session_id: str
    page_url: str = ""
    implicit_wait_ms: int = 5000
    closed: bool = False


@dataclass
class ActionStep:
    """One input primitive; a test's chain is a list of these."""

    kind: str
    target: str | None = None
    dx: float = 0.0
    dy: float = 0.0
    x: float = 0.0
    y: float = 0.0
    value: str = ""
    ms: int = 0

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "pause":
            if not (0 <= self.ms <= MAX_PAUSE_MS):
                raise ValueError(f"pause must be 0..{MAX_PAUSE_MS} ms")
        elif self.kind == "drag_by":
            if not (math.isfinite(self.dx) and math.isfinite(self.dy)):
                raise ValueError("drag_by offsets must be finite")
        elif self.kind == "drag_to":
            if not (math.isfinite(self.x) and math.isfinite(self.y)):
                raise ValueError("drag_to coordinates must be finite")
        if self.kind != "pause" and not self.target:
            raise ValueError(f"{self.kind} needs a target selector")

    @classmethod
    def from_config(cls, config: dict) -> "ActionStep":
        """Build from the one-key mapping form the rubric uses."""
        (kind, payload), = config.items()
        if kind == "pause":
            return cls(kind=kind, ms=int(payload))
        if kind in ("move_to", "click", "double_click", "scroll_to"):
            return cls(kind=kind, target=payload)
        if kind == "drag_by":
            return cls(kind=kind, target=payload["target"],
                       dx=float(payload["dx"]), dy=float(payload["dy"]))
        if kind == "drag_to":
            return cls(kind=kind, target=payload["target"],
                       x=float(payload["x"]), y=float(payload["y"]))
        if kind == "select_option":
            return cls(kind=kind, target=payload["target"],
                       value=str(payload["value"]))
        raise ValueError(f"unknown action kind {kind!r}")


@dataclass
class StateAssertion:
    target: str
    relation: str
    attribute: str | None = None
    literal: object = None

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.relation == "equal" and self.literal is None:
            raise ValueError("relation 'equal' requires a literal value")

    @classmethod
    def from_config(cls, config: dict) -> "StateAssertion":
        return cls(target=config["target"], relation=config["relation"],
                   attribute=config.get("attribute"),
                   literal=config.get("value"))


@dataclass
class DomDelta:
    """Serialized trees around a chain plus the attribute-level diff."""

    before: ElementNode
    after: ElementNode
    changed_nodes: list[tuple[str, str, str | None, str | None]] = \
        field(default_factory=list)


# --------------------------------------------------------------------------
# wire plumbing
# --------------------------------------------------------------------------

def _wire(endpoint: str, method: str, path: str, payload: dict | None = None,
          timeout: float = 30.0):
    url = endpoint.rstrip("/") + path
    try:
        response = requests.request(method, url, json=payload, timeout=timeout)
    except requests.exceptions.RequestException as exc:
        raise ServerUnreachable(f"automation server at {endpoint}: {exc}") from exc
    try:
        value = response.json().get("value")
    except ValueError:
        raise WebdriverError(
            f"non-JSON reply from {url}: {response.text[:200]!r}") from None
    if response.status_code >= 400 or (
            isinstance(value, dict) and value.get("error")):
        code = value.get("error", "unknown error") if isinstance(value, dict) \
            else "unknown error"
        message = value.get("message", "") if isinstance(value, dict) else str(value)
        if code == "javascript error":
            raise JavascriptFatal(message)
        if code in ("invalid session id", "no such window"):
            raise SessionFailure(f"{code}: {message}")
        raise WebdriverError(f"{code}: {message}")
    return value


def _session_wire(session: BrowserSession, method: str, path: str,
                  payload: dict | None = None):
    return _wire(session.endpoint, method,
                 f"/session/{session.session_id}{path}", payload)


def execute_script(session: BrowserSession, script: str, args: list | None = None):
    return _session_wire(session, "POST", "/execute/sync",
                         {"script": script, "args": args or []})


# --------------------------------------------------------------------------
# session lifecycle
# --------------------------------------------------------------------------

def open_session(endpoint: str, entry_url: str,
                 viewport: dict | None = None,
                 page_timeout_s: float = 10.0,
                 ready_selector: str | None = None,
                 implicit_wait_ms: int = 5000) -> BrowserSession:
    """Create a session, set the viewport, load the page, wait until ready."""
    value = _wire(endpoint, "POST", "/session",
                  {"capabilities": {"alwaysMatch": {}}})
    session_id = value.get("sessionId") if isinstance(value, dict) else None
    if not session_id:
        raise SessionFailure(f"no sessionId in new-session reply: {value!r}")
    session = BrowserSession(endpoint=endpoint, session_id=session_id,
                             implicit_wait_ms=implicit_wait_ms)
    try:
        size = viewport or {"w": 1280, "h": 800}
        try:
            _session_wire(session, "POST", "/window/rect",
                          {"width": size["w"], "height": size["h"]})
        except WebdriverError:
            pass  # viewport is best-effort; some servers fix it
        navigate(session, entry_url, page_timeout_s=page_timeout_s,
                 ready_selector=ready_selector)
    except Exception:
        close_session(session)
        raise
    return session


def open_blank_session(endpoint: str,
                       viewport: dict | None = None) -> BrowserSession:
    """Create a session without loading any page (fresh sessions are blank).

    Used to capture a placeholder screenshot when the submission's own page
    cannot be loaded at all.
    """
    value = _wire(endpoint, "POST", "/session",
                  {"capabilities": {"alwaysMatch": {}}})
    session_id = value.get("sessionId") if isinstance(value, dict) else None
    if not session_id:
        raise SessionFailure(f"no sessionId in new-session reply: {value!r}")
    session = BrowserSession(endpoint=endpoint, session_id=session_id)
    size = viewport or {"w": 1280, "h": 800}
    try:
        _session_wire(session, "POST", "/window/rect",
                      {"width": size["w"], "height": size["h"]})
    except WebdriverError:
        pass
    return session


def navigate(session: BrowserSession, url: str, page_timeout_s: float = 10.0,
             ready_selector: str | None = None) -> None:
    try:
        _session_wire(session, "POST", "/url", {"url": url})
    except (ServerUnreachable, SessionFailure):
        raise
    except WebdriverError as exc:
        raise PageLoadTimeout(0.0, f"{url} [navigation failed: {exc}]") from exc
    session.page_url = url
    deadline = time.monotonic() + page_timeout_s
    while True:
        state = execute_script(session, "return document.readyState")
        if state == "complete":
            if _page_is_error_page(session):
                raise PageLoadTimeout(page_timeout_s,
                                      f"{url} [server returned an error page]")
            if ready_selector is None or _count_matches(
                    session, ready_selector) > 0:
                break
        if time.monotonic() > deadline:
            raise PageLoadTimeout(page_timeout_s, url)
        time.sleep(0.05)
    _raise_on_page_errors(session)


def _page_is_error_page(session: BrowserSession) -> bool:
    title = execute_script(session, "return document.title || ''")
    return isinstance(title, str) and ("404" in title or "403" in title)


def _count_matches(session: BrowserSession, selector: str) -> int:
    found = _session_wire(session, "POST", "/elements",
                          {"using": "css selector", "value": selector})
    return len(found) if isinstance(found, list) else 0


def _raise_on_page_errors(session: BrowserSession) -> None:
    """Surface uncaught page errors via the legacy log endpoint if offered."""
    try:
        entries = _session_wire(session, "POST", "/log", {"type": "browser"})
    except WebdriverError:
        return
    for entry in entries or []:
        if isinstance(entry, dict) and entry.get("level") == "SEVERE":
            raise JavascriptFatal(str(entry.get("message", "")))


def close_session(session: BrowserSession) -> None:
    """Tear down; safe to call any number of times."""
    if session.closed:
        return
    session.closed = True
    try:
        _wire(session.endpoint, "DELETE", f"/session/{session.session_id}")
    except WebdriverError:
        pass


def capture_screenshot(session: BrowserSession) -> bytes:
    if session.closed:
        raise ScreenshotFailed("session already closed")
    try:
        encoded = _session_wire(session, "GET", "/screenshot")
    except WebdriverError as exc:
        raise ScreenshotFailed(str(exc)) from exc
    try:
        png = base64.b64decode(encoded or "", validate=True)
    except (ValueError, TypeError) as exc:
        raise ScreenshotFailed(f"undecodable screenshot payload: {exc}") from exc
    if not png:
        raise ScreenshotFailed("empty screenshot payload")
    return png


# --------------------------------------------------------------------------
# action chains
# --------------------------------------------------------------------------

# Mirrors the snapshot selector semantics (compounds joined by descendant
# combinators, each optionally sliced by a zero-based :nth index) so the
# same rubric selector picks the same element live and offline. Browsers
# do not know :nth(), hence the in-page resolution.
_RESOLVE_SCRIPT = """
var parts = arguments[0];
var ctx = [document];
for (var i = 0; i < parts.length; i++) {
  var p = parts[i];
  var css = (p.tag || "*") +
            (p.id ? "#" + p.id : "") +
            p.classes.map(function (c) { return "." + c; }).join("");
  var matched = [];
  for (var j = 0; j < ctx.length; j++) {
    var found = ctx[j].querySelectorAll(css);
    for (var k = 0; k < found.length; k++) {
      if (matched.indexOf(found[k]) < 0) matched.push(found[k]);
    }
  }
  matched.sort(function (a, b) {
    var pos = a.compareDocumentPosition(b);
    if (pos & 4) return -1;
    if (pos & 2) return 1;
    return 0;
  });
  if (p.nth !== null && p.nth !== undefined) {
    matched = matched.slice(p.nth, p.nth + 1);
  }
  ctx = matched;
}
return ctx.length ? ctx[0] : null;
"""


def _resolve_once(session: BrowserSession, selector: str) -> str | None:
    if ":nth(" not in selector:
        found = _session_wire(session, "POST", "/elements",
                              {"using": "css selector", "value": selector})
        return found[0][ELEMENT_KEY] if found else None
    parts = [{"tag": p.tag, "id": p.id, "classes": list(p.classes),
              "nth": p.nth} for p in parse_selector(selector).parts]
    value = execute_script(session, _RESOLVE_SCRIPT, [parts])
    if isinstance(value, dict) and ELEMENT_KEY in value:
        return value[ELEMENT_KEY]
    return None


def _find_element(session: BrowserSession, selector: str, step_index: int) -> str:
    deadline = time.monotonic() + session.implicit_wait_ms / 1000.0
    while True:
        element_id = _resolve_once(session, selector)
        if element_id is not None:
            return element_id
        if time.monotonic() > deadline:
            raise TargetNotFound(selector, step_index)
        time.sleep(0.05)


def _element_center(session: BrowserSession, element_id: str) -> tuple[float, float]:
    rect = _session_wire(session, "GET", f"/element/{element_id}/rect")
    return (rect["x"] + rect["width"] / 2.0, rect["y"] + rect["height"] / 2.0)


def _pointer(actions: list[dict]) -> dict:
    return {"type": "pointer", "id": "mouse",
            "parameters": {"pointerType": "mouse"}, "actions": actions}


def _move_to_element(element_id: str) -> dict:
    return {"type": "pointerMove", "duration": 50,
            "origin": {ELEMENT_KEY: element_id}, "x": 0, "y": 0}


def _perform(session: BrowserSession, actions: list[dict]) -> None:
    _session_wire(session, "POST", "/actions", {"actions": [_pointer(actions)]})


def _click_actions(element_id: str, clicks: int) -> list[dict]:
    actions = [_move_to_element(element_id)]
    for _ in range(clicks):
        actions.append({"type": "pointerDown", "button": 0})
        actions.append({"type": "pointerUp", "button": 0})
    return actions


def _execute_step(session: BrowserSession, step: ActionStep, index: int) -> None:
    if step.kind == "pause":
        time.sleep(step.ms / 1000.0)
        return
    element_id = _find_element(session, step.target, index)

    if step.kind == "move_to":
        _perform(session, [_move_to_element(element_id)])
    elif step.kind == "click":
        _perform(session, _click_actions(element_id, 1))
    elif step.kind == "double_click":
        _perform(session, _click_actions(element_id, 2))
    elif step.kind == "drag_by":
        actions = [_move_to_element(element_id),
                   {"type": "pointerDown", "button": 0}]
        for _ in range(_DRAG_STEPS):
            actions.append({"type": "pointerMove", "duration": 20,
                            "origin": "pointer",
                            "x": step.dx / _DRAG_STEPS,
                            "y": step.dy / _DRAG_STEPS})
        actions.append({"type": "pointerUp", "button": 0})
        _perform(session, actions)
    elif step.kind == "drag_to":
        cx, cy = _element_center(session, element_id)
        actions = [_move_to_element(element_id),
                   {"type": "pointerDown", "button": 0}]
        for i in range(1, _DRAG_STEPS + 1):
            t = i / _DRAG_STEPS
            actions.append({"type": "pointerMove", "duration": 20,
                            "origin": "viewport",
                            "x": cx + (step.x - cx) * t,
                            "y": cy + (step.y - cy) * t})
        actions.append({"type": "pointerUp", "button": 0})
        _perform(session, actions)
    elif step.kind == "select_option":
        script = (
            "var el = document.querySelector(arguments[0]);"
            "if (!el) return false;"
            "var ok = false;"
            "for (var i = 0; i < el.options.length; i++)"
            "  if (el.options[i].value === arguments[1]) ok = true;"
            "if (!ok) return false;"
            "el.value = arguments[1];"
            "el.dispatchEvent(new Event('input', {bubbles: true}));"
            "el.dispatchEvent(new Event('change', {bubbles: true}));"
            "return true;")
        if execute_script(session, script, [step.target, step.value]) is not True:
            raise ChainInterrupted(index,
                                   f"option {step.value!r} not present in "
                                   f"{step.target!r}")
    elif step.kind == "scroll_to":
        execute_script(
            session,
            "var el = document.querySelector(arguments[0]);"
            "if (el && el.scrollIntoView) el.scrollIntoView();",
            [step.target])
    else:
        raise ChainInterrupted(index, f"unknown action kind {step.kind!r}")


def snapshot_dom(session: BrowserSession) -> ElementNode:
    markup = execute_script(
        session, "return document.documentElement.outerHTML")
    return parse_snapshot(markup)


def run_chain(session: BrowserSession, steps: list[ActionStep],
              settle_ms: int = 300) -> DomDelta:
    """Snapshot, run the steps in order, settle, snapshot again, diff.

    A failure at step k raises ChainInterrupted(k); no assertion should be
    evaluated on a partial chain.
    """
    try:
        before = snapshot_dom(session)
    except WebdriverError as exc:
        raise ChainInterrupted(0, f"before-snapshot failed: {exc}") from exc
    for index, step in enumerate(steps):
        try:
            _execute_step(session, step, index)
        except (TargetNotFound, ChainInterrupted):
            raise
        except WebdriverError as exc:
            raise ChainInterrupted(index, str(exc)) from exc
    time.sleep(settle_ms / 1000.0)
    try:
        after = snapshot_dom(session)
    except WebdriverError as exc:
        raise ChainInterrupted(len(steps), f"after-snapshot failed: {exc}") from exc
    return DomDelta(before=before, after=after,
                    changed_nodes=diff_snapshots(before, after))


# --------------------------------------------------------------------------
# snapshot diffing
# --------------------------------------------------------------------------

def _node_paths(root: ElementNode) -> dict[str, ElementNode]:
    """Structural paths like 'svg[0]/g[1]/circle[3]', stable across reparses."""
    paths: dict[str, ElementNode] = {}

    def walk(node: ElementNode, prefix: str):
        counters: dict[str, int] = {}
        for child in node.children:
            i = counters.get(child.tag, 0)
            counters[child.tag] = i + 1
            path = f"{prefix}/{child.tag}[{i}]" if prefix else f"{child.tag}[{i}]"
            paths[path] = child
            walk(child, path)

    root_path = f"{root.tag}[0]"
    paths[root_path] = root
    walk(root, root_path)
    return paths


def diff_snapshots(before: ElementNode, after: ElementNode
                   ) -> list[tuple[str, str, str | None, str | None]]:
    """Attribute-level differences between two serialized trees."""
    before_paths = _node_paths(before)
    after_paths = _node_paths(after)
    changed = []
    for path in sorted(before_paths.keys() | after_paths.keys()):
        node_b = before_paths.get(path)
        node_a = after_paths.get(path)
        if node_b is None:
            changed.append((path, "#node", None, "present"))
            continue
        if node_a is None:
            changed.append((path, "#node", "present", None))
            continue
        for name in sorted(node_b.attributes.keys() | node_a.attributes.keys()):
            old = node_b.attributes.get(name)
            new = node_a.attributes.get(name)
            if old != new:
                changed.append((path, name, old, new))
        if node_b.text.strip() != node_a.text.strip():
            changed.append((path, "#text", node_b.text.strip(),
                            node_a.text.strip()))
    return changed


# --------------------------------------------------------------------------
# assertions
# --------------------------------------------------------------------------

def _canonical(raw):
    """Comparison form: Rgba for colors, float for numbers, else the string."""
    if raw is None:
        return None
    text = str(raw).strip()
    try:
        return parse_color(text)
    except UnknownColor:
        pass
    token = text[:-2] if text.endswith("px") else text
    try:
        number = float(token)
        if math.isfinite(number):
            return number
    except ValueError:
        pass
    return text


def _canon_eq(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)
    return a == b


def _display(value) -> str:
    if value is None:
        return "(absent)"
    if hasattr(value, "css"):
        return value.css()
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _attr_of(root: ElementNode, selector: str, attribute: str):
    node = select_one(root, selector)
    if node is None:
        return None, None
    from .dom import effective_value
    return node, effective_value(node, attribute)


def _mark_point(root: ElementNode, selector: str):
    from .checkers import _mark_anchor
    node = select_one(root, selector)
    return None if node is None else _mark_anchor(node)


def assert_state(delta: DomDelta, assertion: StateAssertion) -> CheckResult:
    """Evaluate one relation over the before/after snapshots of a chain."""
    target = assertion.target
    relation = assertion.relation
    detail = [
        f"Assumption: {relation} evaluated on the first match of {target!r} in "
        f"the serialized snapshots; colors and numbers compared canonically.",
    ]

    def result(passed, expected, actual, offenders=None):
        return CheckResult(passed=passed, expected=expected, actual=actual,
                           detail_lines=detail, offenders=offenders or [],
                           fraction=1.0 if passed else 0.0)

    if relation in ("element_appears", "element_disappears"):
        count_before = len(select(delta.before, target))
        count_after = len(select(delta.after, target))
        detail.append(f"Matches of {target!r}: {count_before} before, "
                      f"{count_after} after.")
        grew = count_after > count_before
        shrank = count_after < count_before
        passed = grew if relation == "element_appears" else shrank
        verb = "appear" if relation == "element_appears" else "disappear"
        return result(passed,
                      f"{target!r} to {verb} after the interaction",
                      f"count {count_before} -> {count_after}")

    if relation == "position_changed":
        point_before = _mark_point(delta.before, target)
        point_after = _mark_point(delta.after, target)
        if point_before is None or point_after is None:
            missing = "before" if point_before is None else "after"
            return result(False, f"{target!r} present with a position",
                          f"no positioned match in the {missing} snapshot")
        moved = math.hypot(point_after[0] - point_before[0],
                           point_after[1] - point_before[1])
        detail.append(f"Position {_fmt_pt(point_before)} -> "
                      f"{_fmt_pt(point_after)} ({moved:.1f}px).")
        return result(moved > 0.5, f"{target!r} to move",
                      f"moved {moved:.1f}px")

    attribute = assertion.attribute
    node_b, raw_before = _attr_of(delta.before, target, attribute)
    node_a, raw_after = _attr_of(delta.after, target, attribute)
    offenders = [n.node_id for n in (node_a,) if n is not None]

    if relation == "equal":
        if node_a is None:
            return result(False, f"{attribute} of {target!r} to equal "
                          f"{_display(assertion.literal)}",
                          f"{target!r} not found after the chain")
        want = _canonical(assertion.literal)
        got = _canonical(raw_after)
        return result(_canon_eq(got, want),
                      f"{attribute} = {_display(want)}",
                      f"{attribute} = {_display(got)}", offenders)

    if node_b is None or node_a is None:
        missing = "before" if node_b is None else "after"
        return result(False, f"{target!r} present {missing} the chain",
                      f"no match in the {missing} snapshot")

    got_before = _canonical(raw_before)
    got_after = _canonical(raw_after)

    if relation == "changed":
        same = _canon_eq(got_before, got_after)
        return result(not same, f"{attribute} of {target!r} to change",
                      "no change detected "
                      f"({_display(got_before)} before and after)" if same
                      else f"{_display(got_before)} -> {_display(got_after)}",
                      offenders)
    if relation == "unchanged":
        same = _canon_eq(got_before, got_after)
        return result(same, f"{attribute} of {target!r} to stay "
                      f"{_display(got_before)}",
                      f"{_display(got_before)} -> {_display(got_after)}"
                      if not same else f"still {_display(got_after)}",
                      offenders)
    if relation in ("greater_than_before", "less_than_before"):
        if not isinstance(got_before, float) or not isinstance(got_after, float):
            return result(False,
                          f"numeric {attribute} on {target!r} before and after",
                          f"non-numeric values {_display(got_before)} / "
                          f"{_display(got_after)}")
        detail.append(f"{attribute}: {got_before:g} before, {got_after:g} after.")
        if relation == "greater_than_before":
            passed = got_after > got_before
            expected = f"{attribute} greater than its before value"
        else:
            passed = got_after < got_before
            expected = f"{attribute} less than its before value"
        return result(passed, expected,
                      f"{got_before:g} -> {got_after:g}", offenders)

    raise ValueError(f"unknown relation {relation!r}")


def _fmt_pt(point: tuple[float, float]) -> str:
    return f"({point[0]:.1f}, {point[1]:.1f})"
