"""Live-session driver: action chains, snapshot diffing, state assertions.

The live tests run against the bundled jsdom-backed automation server and
a loopback static server; both are spawned per module on OS-chosen ports.
"""

import re
import shutil
import struct
import subprocess
import sys
import time
from pathlib import Path

import pytest

from visgrade.dom import parse_snapshot
from visgrade.errors import (
    ChainInterrupted,
    JavascriptFatal,
    PageLoadTimeout,
    ScreenshotFailed,
    ServerUnreachable,
    TargetNotFound,
)
from visgrade.harness import SubmissionServer
from visgrade.webdriver import (
    ActionStep,
    DomDelta,
    StateAssertion,
    assert_state,
    capture_screenshot,
    close_session,
    diff_snapshots,
    execute_script,
    open_blank_session,
    open_session,
    run_chain,
    snapshot_dom,
)

LIVE_DATA = Path(__file__).parent / "data" / "live"


# --------------------------------------------------------------------------
# step and assertion construction
# --------------------------------------------------------------------------

class TestActionStep:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            ActionStep(kind="triple_click", target="circle")

    def test_target_required_for_pointer_kinds(self):
        with pytest.raises(ValueError):
            ActionStep(kind="move_to")

    def test_pause_needs_no_target(self):
        assert ActionStep(kind="pause", ms=100).ms == 100

    def test_pause_over_limit_rejected(self):
        with pytest.raises(ValueError):
            ActionStep(kind="pause", ms=10_001)

    def test_non_finite_offset_rejected(self):
        with pytest.raises(ValueError):
            ActionStep(kind="drag_by", target="circle",
                       dx=float("nan"), dy=0)
        with pytest.raises(ValueError):
            ActionStep(kind="drag_to", target="circle",
                       x=float("inf"), y=0)

    @pytest.mark.parametrize("config, kind, target", [
        ({"move_to": "g circle"}, "move_to", "g circle"),
        ({"click": "#btn"}, "click", "#btn"),
        ({"double_click": ".dot"}, "double_click", ".dot"),
        ({"scroll_to": "svg"}, "scroll_to", "svg"),
    ])
    def test_from_config_selector_kinds(self, config, kind, target):
        step = ActionStep.from_config(config)
        assert step.kind == kind and step.target == target

    def test_from_config_drag_by(self):
        step = ActionStep.from_config(
            {"drag_by": {"target": ".dot", "dx": 12, "dy": -3}})
        assert (step.kind, step.target, step.dx, step.dy) == \
            ("drag_by", ".dot", 12.0, -3.0)

    def test_from_config_drag_to(self):
        step = ActionStep.from_config(
            {"drag_to": {"target": ".dot", "x": 40, "y": 60}})
        assert (step.x, step.y) == (40.0, 60.0)

    def test_from_config_select_option(self):
        step = ActionStep.from_config(
            {"select_option": {"target": "select#m", "value": "density"}})
        assert step.value == "density"

    def test_from_config_pause(self):
        assert ActionStep.from_config({"pause": 250}).ms == 250


class TestStateAssertion:
    def test_unknown_relation_rejected(self):
        with pytest.raises(ValueError):
            StateAssertion(target="circle", relation="approximately")

    def test_equal_requires_literal(self):
        with pytest.raises(ValueError):
            StateAssertion(target="circle", relation="equal", attribute="r")

    def test_from_config_maps_value_to_literal(self):
        assertion = StateAssertion.from_config(
            {"target": "rect", "relation": "equal", "attribute": "fill",
             "value": "#d62728"})
        assert assertion.literal == "#d62728"

    def test_from_config_positional_relation(self):
        assertion = StateAssertion.from_config(
            {"target": ".dot", "relation": "position_changed"})
        assert assertion.attribute is None


# --------------------------------------------------------------------------
# snapshot diffing (offline)
# --------------------------------------------------------------------------

def delta(before_markup: str, after_markup: str) -> DomDelta:
    before = parse_snapshot(before_markup)
    after = parse_snapshot(after_markup)
    return DomDelta(before=before, after=after,
                    changed_nodes=diff_snapshots(before, after))


class TestDiffSnapshots:
    def test_identical_trees_diff_empty(self):
        markup = '<svg><g id="m"><circle cx="1" r="5"/></g></svg>'
        assert delta(markup, markup).changed_nodes == []

    def test_attribute_change_reported_with_path(self):
        d = delta('<svg><g><circle r="5"/></g></svg>',
                  '<svg><g><circle r="9"/></g></svg>')
        assert d.changed_nodes == [("svg[0]/g[0]/circle[0]", "r", "5", "9")]

    def test_appearing_node(self):
        d = delta("<svg><g></g></svg>",
                  '<svg><g><rect width="3"/></g></svg>')
        assert ("svg[0]/g[0]/rect[0]", "#node", None, "present") in \
            d.changed_nodes

    def test_disappearing_node(self):
        d = delta('<svg><g><rect width="3"/></g></svg>',
                  "<svg><g></g></svg>")
        assert ("svg[0]/g[0]/rect[0]", "#node", "present", None) in \
            d.changed_nodes

    def test_text_change(self):
        d = delta("<svg><text>old</text></svg>",
                  "<svg><text>new</text></svg>")
        assert ("svg[0]/text[0]", "#text", "old", "new") in d.changed_nodes

    def test_same_tag_siblings_counted_separately(self):
        d = delta('<svg><circle r="1"/><circle r="2"/></svg>',
                  '<svg><circle r="1"/><circle r="7"/></svg>')
        assert d.changed_nodes == [("svg[0]/circle[1]", "r", "2", "7")]


# --------------------------------------------------------------------------
# state assertions (offline, on synthetic deltas)
# --------------------------------------------------------------------------

def hover_delta(after_fill='orange', after_r="9"):
    return delta(
        '<svg><g id="m"><circle class="dot" cx="10" cy="10" r="5"'
        ' fill="#1f77b4"/></g></svg>',
        f'<svg><g id="m"><circle class="dot" cx="10" cy="10" r="{after_r}"'
        f' fill="{after_fill}"/></g></svg>')


class TestAssertState:
    def test_equal_passes_on_literal(self):
        d = hover_delta()
        result = assert_state(d, StateAssertion(
            target="circle.dot", relation="equal", attribute="fill",
            literal="orange"))
        assert result.passed

    def test_equal_compares_colors_canonically(self):
        d = hover_delta(after_fill="rgb(255,165,0)")
        result = assert_state(d, StateAssertion(
            target="circle.dot", relation="equal", attribute="fill",
            literal="orange"))
        assert result.passed

    def test_equal_fails_with_both_values_shown(self):
        d = hover_delta(after_fill="red")
        result = assert_state(d, StateAssertion(
            target="circle.dot", relation="equal", attribute="fill",
            literal="orange"))
        assert not result.passed
        assert "fill" in result.expected and "fill" in result.actual

    def test_changed_detects_recolor(self):
        result = assert_state(hover_delta(), StateAssertion(
            target="circle.dot", relation="changed", attribute="fill"))
        assert result.passed

    def test_changed_fails_on_equivalent_color_spellings(self):
        d = delta('<svg><circle fill="#1f77b4"/></svg>',
                  '<svg><circle fill="rgb(31,119,180)"/></svg>')
        result = assert_state(d, StateAssertion(
            target="circle", relation="changed", attribute="fill"))
        assert not result.passed
        assert "no change detected" in result.actual

    def test_unchanged_passes_on_equivalent_numbers(self):
        d = delta('<svg><rect width="40"/></svg>',
                  '<svg><rect width="40.0px"/></svg>')
        result = assert_state(d, StateAssertion(
            target="rect", relation="unchanged", attribute="width"))
        assert result.passed

    def test_unchanged_fails_when_value_moves(self):
        result = assert_state(hover_delta(), StateAssertion(
            target="circle.dot", relation="unchanged", attribute="r"))
        assert not result.passed

    def test_greater_than_before_on_radius(self):
        result = assert_state(hover_delta(), StateAssertion(
            target="circle.dot", relation="greater_than_before",
            attribute="r"))
        assert result.passed

    def test_less_than_before_flags_growth(self):
        result = assert_state(hover_delta(), StateAssertion(
            target="circle.dot", relation="less_than_before", attribute="r"))
        assert not result.passed
        assert "5 -> 9" in result.actual

    def test_ordering_relations_reject_non_numeric(self):
        d = delta('<svg><circle fill="red"/></svg>',
                  '<svg><circle fill="blue"/></svg>')
        result = assert_state(d, StateAssertion(
            target="circle", relation="greater_than_before",
            attribute="fill"))
        assert not result.passed
        assert "non-numeric" in result.actual

    def test_element_appears(self):
        d = delta("<html><body><svg></svg></body></html>",
                  '<html><body><svg></svg><div id="tooltip">x</div>'
                  "</body></html>")
        result = assert_state(d, StateAssertion(
            target="div#tooltip", relation="element_appears"))
        assert result.passed
        assert "0 -> 1" in result.actual

    def test_element_appears_fails_without_new_match(self):
        d = hover_delta()
        result = assert_state(d, StateAssertion(
            target="div#tooltip", relation="element_appears"))
        assert not result.passed

    def test_element_disappears(self):
        d = delta('<svg><circle r="1"/><circle r="2"/></svg>',
                  '<svg><circle r="1"/></svg>')
        result = assert_state(d, StateAssertion(
            target="circle", relation="element_disappears"))
        assert result.passed

    def test_position_changed_above_threshold(self):
        d = delta('<svg><circle class="dot" cx="10" cy="10" r="4"/></svg>',
                  '<svg><circle class="dot" cx="40" cy="10" r="4"/></svg>')
        result = assert_state(d, StateAssertion(
            target="circle.dot", relation="position_changed"))
        assert result.passed
        assert "30.0px" in result.actual

    def test_position_changed_ignores_subpixel_jitter(self):
        d = delta('<svg><circle cx="10" cy="10" r="4"/></svg>',
                  '<svg><circle cx="10.3" cy="10" r="4"/></svg>')
        result = assert_state(d, StateAssertion(
            target="circle", relation="position_changed"))
        assert not result.passed

    def test_missing_target_is_a_failed_result_not_an_error(self):
        result = assert_state(hover_delta(), StateAssertion(
            target="rect#nope", relation="changed", attribute="fill"))
        assert not result.passed
        assert "no match" in result.actual


# --------------------------------------------------------------------------
# live sessions against the bundled automation server
# --------------------------------------------------------------------------

SERVER_JS = Path(__file__).parent.parent / "tools" / "webdriver-lite" / \
    "server.js"


@pytest.fixture(scope="module")
def automation():
    node = shutil.which("node")
    if node is None:
        pytest.skip("node is not installed")
    proc = subprocess.Popen(
        [node, str(SERVER_JS), "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    line = proc.stdout.readline()
    match = re.search(r"WEBDRIVER_LITE_LISTENING port=(\d+)", line)
    if not match:
        proc.kill()
        pytest.fail(f"automation server did not start: {line!r}")
    yield f"http://127.0.0.1:{match.group(1)}"
    proc.terminate()
    proc.wait(timeout=5)


@pytest.fixture(scope="module")
def hover_url():
    with SubmissionServer(LIVE_DATA / "hover") as server:
        yield f"{server.base_url}/index.html"


@pytest.fixture(scope="module")
def widgets_url():
    with SubmissionServer(LIVE_DATA / "widgets",
                          shared_assets=LIVE_DATA / "shared") as server:
        yield f"{server.base_url}/index.html"


@pytest.fixture
def hover_session(automation, hover_url):
    session = open_session(automation, hover_url)
    yield session
    close_session(session)


DOT = "g#marks circle.dot"


class TestLiveSession:
    def test_open_session_loads_the_page(self, hover_session):
        title = execute_script(hover_session, "return document.title")
        assert title == "hover fixture"
        root = snapshot_dom(hover_session)
        from visgrade.dom import select
        assert len(select(root, DOT)) == 3

    def test_empty_chain_changes_nothing(self, hover_session):
        d = run_chain(hover_session, [], settle_ms=0)
        assert d.changed_nodes == []

    def test_hover_recolors_and_enlarges(self, hover_session):
        d = run_chain(hover_session,
                      [ActionStep(kind="move_to", target=f"{DOT}:nth(1)")],
                      settle_ms=0)
        fill = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(1)", relation="changed", attribute="fill"))
        radius = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(1)", relation="greater_than_before",
            attribute="r"))
        assert fill.passed and radius.passed

    def test_hover_then_leave_restores_the_first_dot(self, hover_session):
        d = run_chain(hover_session,
                      [ActionStep(kind="move_to", target=f"{DOT}:nth(0)"),
                       ActionStep(kind="move_to", target=f"{DOT}:nth(2)")],
                      settle_ms=0)
        restored = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(0)", relation="unchanged", attribute="fill"))
        hovered = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(2)", relation="changed", attribute="fill"))
        assert restored.passed and hovered.passed

    def test_click_pins(self, hover_session):
        d = run_chain(hover_session,
                      [ActionStep(kind="click", target=f"{DOT}:nth(0)")],
                      settle_ms=0)
        result = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(0)", relation="equal",
            attribute="data-pinned", literal="true"))
        assert result.passed

    def test_double_click_unpins(self, hover_session):
        run_chain(hover_session,
                  [ActionStep(kind="click", target=f"{DOT}:nth(0)")],
                  settle_ms=0)
        time.sleep(0.6)  # stay outside the double-click pairing window
        d = run_chain(hover_session,
                      [ActionStep(kind="double_click", target=f"{DOT}:nth(0)")],
                      settle_ms=0)
        result = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(0)", relation="changed",
            attribute="data-pinned"))
        assert result.passed

    def test_drag_moves_the_mark_by_the_requested_offset(self, hover_session):
        before = snapshot_dom(hover_session)
        from visgrade.dom import select
        cx_before = float(select(before, f"{DOT}:nth(2)")[0].attributes["cx"])
        d = run_chain(hover_session,
                      [ActionStep(kind="drag_by", target=f"{DOT}:nth(2)",
                                  dx=30, dy=0)],
                      settle_ms=0)
        moved = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(2)", relation="position_changed"))
        assert moved.passed
        cx_after = float(select(d.after, f"{DOT}:nth(2)")[0].attributes["cx"])
        assert cx_after == pytest.approx(cx_before + 30, abs=1e-6)

    def test_drag_does_not_register_a_click(self, hover_session):
        d = run_chain(hover_session,
                      [ActionStep(kind="drag_by", target=f"{DOT}:nth(2)",
                                  dx=30, dy=0)],
                      settle_ms=0)
        result = assert_state(d, StateAssertion(
            target=f"{DOT}:nth(2)", relation="equal",
            attribute="data-pinned", literal="true"))
        assert not result.passed

    def test_target_not_found_carries_the_step_index(self, hover_session):
        hover_session.implicit_wait_ms = 150
        steps = [ActionStep(kind="move_to", target=f"{DOT}:nth(0)"),
                 ActionStep(kind="click", target="rect#missing")]
        with pytest.raises(TargetNotFound) as excinfo:
            run_chain(hover_session, steps, settle_ms=0)
        assert excinfo.value.step_index == 1
        assert excinfo.value.selector == "rect#missing"

    def test_screenshot_is_a_viewport_sized_png(self, hover_session):
        png = capture_screenshot(hover_session)
        assert png[:8] == b"\x89PNG\r\n\x1a\n"
        width, height = struct.unpack(">II", png[16:24])
        assert (width, height) == (1280, 800)

    def test_close_session_is_idempotent(self, automation, hover_url):
        session = open_session(automation, hover_url)
        close_session(session)
        close_session(session)
        with pytest.raises(ScreenshotFailed):
            capture_screenshot(session)

    def test_blank_session_supports_screenshots(self, automation):
        session = open_blank_session(automation)
        try:
            assert capture_screenshot(session)[:4] == b"\x89PNG"
        finally:
            close_session(session)


class TestLiveWidgets:
    def test_ready_selector_waits_for_fetched_data(self, automation,
                                                   widgets_url):
        session = open_session(automation, widgets_url,
                               ready_selector="svg#chart.loaded")
        try:
            root = snapshot_dom(session)
            from visgrade.dom import select
            chart = select(root, "svg#chart")[0]
            assert chart.attributes["data-rows"] == "3"
        finally:
            close_session(session)

    def test_select_option_recolors_and_spawns_tooltip(self, automation,
                                                       widgets_url):
        session = open_session(automation, widgets_url)
        try:
            d = run_chain(session, [ActionStep(
                kind="select_option", target="select#metric",
                value="density")], settle_ms=0)
            recolored = assert_state(d, StateAssertion(
                target="rect#swatch", relation="equal", attribute="fill",
                literal="#d62728"))
            tooltip = assert_state(d, StateAssertion(
                target="div#tooltip", relation="element_appears"))
            assert recolored.passed and tooltip.passed
        finally:
            close_session(session)

    def test_selecting_a_missing_option_interrupts_the_chain(self, automation,
                                                             widgets_url):
        session = open_session(automation, widgets_url)
        try:
            with pytest.raises(ChainInterrupted) as excinfo:
                run_chain(session, [ActionStep(
                    kind="select_option", target="select#metric",
                    value="nope")], settle_ms=0)
            assert "nope" in excinfo.value.cause
        finally:
            close_session(session)


class TestLiveFailureModes:
    def test_throwing_page_raises_javascript_fatal(self, automation):
        with SubmissionServer(LIVE_DATA / "throws") as server:
            with pytest.raises(JavascriptFatal) as excinfo:
                open_session(automation, f"{server.base_url}/index.html")
        assert "exploded" in excinfo.value.console_message

    def test_missing_page_raises_page_load_error(self, automation):
        with SubmissionServer(LIVE_DATA / "hover") as server:
            with pytest.raises(PageLoadTimeout):
                open_session(automation, f"{server.base_url}/absent.html",
                             page_timeout_s=3.0)

    def test_unreachable_server(self):
        with pytest.raises(ServerUnreachable):
            open_session("http://127.0.0.1:1", "http://127.0.0.1:1/x.html")
