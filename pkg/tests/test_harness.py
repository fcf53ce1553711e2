"""Grading orchestration: serving, scoring, batching, report rendering."""

import http.client
import json
import re
import shutil
import subprocess
import urllib.request
from pathlib import Path
from random import Random

import pytest

from synth import random_scatter
from visgrade.cli import main as cli_main
from visgrade.errors import PathTraversalAttempt, PortExhausted
from visgrade.harness import (
    GradeReport,
    Submission,
    SubmissionServer,
    TestOutcome as Outcome,
    grade,
    grade_batch,
    render_report,
    serve_submission,
)
from visgrade.rubric import load_rubric

LIVE_DATA = Path(__file__).parent / "data" / "live"

SCATTER_RUBRIC = """\
schema: 1
meta: {name: scatter, entry_file: submission.html, total_points: 5}
structure:
  svg_selector: "svg#chart"
  groups: [marks, x-axis, y-axis]
  required:
    - {selector: "g#marks circle", min_count: 8}
datasets: {points: points.csv}
scales:
  - {id: x, axis_group: "g#x-axis", kind: linear, orientation: horizontal}
  - {id: y, axis_group: "g#y-axis", kind: linear, orientation: vertical}
tests:
  - {id: t_struct, category: advisory, check: {structure: true}}
  - {id: t_fit, category: positioning, points: 1,
     check: {scale_fit: {scale: x}}}
  - {id: t_pos, category: positioning, points: 3,
     check: {positions: {marks: "g#marks circle", x_scale: x, y_scale: y,
                         dataset: points, x_field: vx, y_field: vy,
                         partial: linear}},
     feedback_hint: "Position circles with your x and y scales."}
  - {id: t_const, category: appearance, points: 1,
     check: {constant: {marks: "g#marks circle", attribute: r}}}
"""


def write_scatter_course(base: Path, seed=7, n_points=8):
    """One rubric + dataset + a correct submission dir; returns the truth."""
    truth = random_scatter(Random(seed), n_points=n_points)
    (base / "rubric.yaml").write_text(SCATTER_RUBRIC)
    rows = "\n".join(f"{r['vx']!r},{r['vy']!r}" for r in truth.rows)
    (base / "points.csv").write_text("vx,vy\n" + rows + "\n")
    correct = base / "correct"
    correct.mkdir()
    (correct / "submission.html").write_text(
        "<!DOCTYPE html><html><body>" + truth.markup + "</body></html>")
    return truth


def write_variant(base: Path, name: str, markup: str) -> Submission:
    directory = base / name
    directory.mkdir()
    (directory / "submission.html").write_text(
        "<!DOCTYPE html><html><body>" + markup + "</body></html>")
    return Submission(str(directory), "submission.html", name)


def displace_first_mark(markup: str, dx: float) -> str:
    first_cx = re.search(r'cx="([^"]+)"', markup).group(1)
    return markup.replace(f'cx="{first_cx}"',
                          f'cx="{float(first_cx) + dx!r}"', 1)


@pytest.fixture
def course(tmp_path):
    truth = write_scatter_course(tmp_path)
    rubric = load_rubric(tmp_path / "rubric.yaml")
    correct = Submission(str(tmp_path / "correct"), "submission.html",
                         "correct")
    return tmp_path, truth, rubric, correct


def outcomes_by_id(report: GradeReport) -> dict[str, Outcome]:
    return {o.test_id: o for o in report.outcomes}


# --------------------------------------------------------------------------
# submission server
# --------------------------------------------------------------------------

class TestServeSubmission:
    def test_serves_the_entry_file(self, tmp_path):
        (tmp_path / "submission.html").write_text("<svg id='chart'></svg>")
        sub = Submission(str(tmp_path), "submission.html", "s1")
        with serve_submission(sub) as server:
            with urllib.request.urlopen(
                    f"{server.base_url}/submission.html") as response:
                assert response.status == 200
                assert b"chart" in response.read()

    def test_missing_file_is_a_404_with_code_in_title(self, tmp_path):
        sub = Submission(str(tmp_path), "submission.html", "s1")
        with serve_submission(sub) as server:
            try:
                urllib.request.urlopen(f"{server.base_url}/absent.html")
                raise AssertionError("expected a 404")
            except urllib.error.HTTPError as err:
                assert err.code == 404
                assert b"<title>404" in err.read()

    def test_traversal_is_refused_and_recorded(self, tmp_path):
        secret = tmp_path / "secret.txt"
        secret.write_text("hands off")
        sub_dir = tmp_path / "sub"
        sub_dir.mkdir()
        sub = Submission(str(sub_dir), "submission.html", "s1")
        with serve_submission(sub) as server:
            host, port = server.base_url.removeprefix("http://").split(":")
            conn = http.client.HTTPConnection(host, int(port))
            conn.request("GET", "/../secret.txt")
            response = conn.getresponse()
            body = response.read()
            conn.close()
            assert response.status == 403
            assert b"hands off" not in body
            attempts = server.traversal_attempts
        assert len(attempts) == 1
        assert isinstance(attempts[0], PathTraversalAttempt)
        assert "secret" in attempts[0].path

    def test_percent_encoded_traversal_is_refused(self, tmp_path):
        sub_dir = tmp_path / "sub"
        sub_dir.mkdir()
        sub = Submission(str(sub_dir), "submission.html", "s1")
        with serve_submission(sub) as server:
            host, port = server.base_url.removeprefix("http://").split(":")
            conn = http.client.HTTPConnection(host, int(port))
            conn.request("GET", "/%2e%2e/%2e%2e/etc/passwd")
            status = conn.getresponse().status
            conn.close()
            assert status == 403
            assert server.traversal_attempts

    def test_shared_assets_fill_gaps_behind_the_submission(self, tmp_path):
        shared = tmp_path / "shared"
        (shared / "data").mkdir(parents=True)
        (shared / "data" / "values.csv").write_text("shared copy")
        (shared / "lib.js").write_text("shared lib")
        sub_dir = tmp_path / "sub"
        sub_dir.mkdir()
        (sub_dir / "lib.js").write_text("submission lib")
        sub = Submission(str(sub_dir), "submission.html", "s1")
        with serve_submission(sub, shared_assets=shared) as server:
            with urllib.request.urlopen(
                    f"{server.base_url}/data/values.csv") as response:
                assert response.read() == b"shared copy"
            with urllib.request.urlopen(
                    f"{server.base_url}/lib.js") as response:
                assert response.read() == b"submission lib"

    def test_bind_failure_becomes_port_exhausted(self, tmp_path, monkeypatch):
        def refuse(*args, **kwargs):
            raise OSError("no ports for you")
        monkeypatch.setattr(http.server, "ThreadingHTTPServer", refuse)
        sub = Submission(str(tmp_path), "submission.html", "s1")
        with pytest.raises(PortExhausted):
            serve_submission(sub)


# --------------------------------------------------------------------------
# static grading
# --------------------------------------------------------------------------

class TestGradeStatic:
    def test_correct_submission_scores_full_marks(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        assert report.status == "ok"
        assert report.score == report.max_score == 5.0
        assert all(o.status in ("pass", "advisory") for o in report.outcomes)

    def test_outcomes_keep_rubric_order_with_advisory_first(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        assert [o.test_id for o in report.outcomes] == \
            ["t_struct", "t_fit", "t_pos", "t_const"]

    def test_score_is_the_sum_of_awarded_points(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        assert report.score == sum(o.points_awarded for o in report.outcomes)
        assert report.max_score == rubric.meta.total_points

    def test_displaced_mark_fails_positions_with_partial_credit(self, course):
        base, truth, rubric, _ = course
        mutant = write_variant(base, "mutant",
                               displace_first_mark(truth.markup, 30.0))
        report = grade(mutant, rubric, "static")
        by_id = outcomes_by_id(report)
        assert by_id["t_pos"].status == "fail"
        assert by_id["t_pos"].points_awarded == round(3 * 7 / 8, 2)
        assert by_id["t_fit"].status == "pass"
        assert by_id["t_const"].status == "pass"
        assert report.score == pytest.approx(2 + round(3 * 7 / 8, 2))

    def test_failed_positions_feedback_names_the_missing_datum(self, course):
        base, truth, rubric, _ = course
        mutant = write_variant(base, "mutant",
                               displace_first_mark(truth.markup, 30.0))
        report = grade(mutant, rubric, "static")
        feedback = "\n".join(outcomes_by_id(report)["t_pos"].feedback)
        assert "Missing datum" in feedback
        assert "hint: Position circles with your x and y scales." in feedback

    def test_missing_axis_gates_dependent_tests(self, course):
        base, truth, rubric, _ = course
        gutted = truth.markup.replace('id="x-axis"', 'id="gone"')
        mutant = write_variant(base, "noaxis", gutted)
        report = grade(mutant, rubric, "static")
        by_id = outcomes_by_id(report)
        for test_id in ("t_fit", "t_pos"):
            assert by_id[test_id].status == "error"
            assert by_id[test_id].feedback == \
                ["skipped: prerequisite missing g#x-axis"]
        assert by_id["t_const"].status == "pass"
        assert by_id["t_struct"].status == "advisory"
        assert report.score == 1.0

    def test_advisory_reports_the_missing_group(self, course):
        base, truth, rubric, _ = course
        gutted = truth.markup.replace('id="x-axis"', 'id="gone"')
        mutant = write_variant(base, "noaxis", gutted)
        report = grade(mutant, rubric, "static")
        feedback = "\n".join(outcomes_by_id(report)["t_struct"].feedback)
        assert "Missing g#x-axis" in feedback

    def test_interaction_tests_need_a_live_session(self, course, tmp_path):
        base, _, _, correct = course
        rubric_text = SCATTER_RUBRIC.replace("total_points: 5",
                                             "total_points: 6")
        rubric_text += (
            "  - {id: t_hover, category: interaction, points: 1,\n"
            "     check: {actions: [{move_to: \"g#marks circle\"}],\n"
            "             assert: [{target: \"g#marks circle\",\n"
            "                       attribute: r,\n"
            "                       relation: greater_than_before}]}}\n")
        path = base / "rubric_live.yaml"
        path.write_text(rubric_text)
        report = grade(correct, load_rubric(path), "static")
        hover = outcomes_by_id(report)["t_hover"]
        assert hover.status == "error"
        assert "live session" in hover.feedback[0]
        assert report.score == 5.0

    def test_unreadable_submission_zero_scores_without_crashing(self, course):
        _, _, rubric, _ = course
        ghost = Submission("/nonexistent/dir", "submission.html", "ghost")
        report = grade(ghost, rubric, "static")
        assert report.status == "ok"
        assert report.score == 0.0
        assert all("could not be loaded" in o.feedback[0]
                   for o in report.outcomes)

    def test_unknown_mode_is_rejected(self, course):
        _, _, rubric, correct = course
        with pytest.raises(ValueError):
            grade(correct, rubric, "telepathy")


# --------------------------------------------------------------------------
# batch grading
# --------------------------------------------------------------------------

class TestGradeBatch:
    def make_three(self, course):
        base, truth, rubric, correct = course
        mutant = write_variant(base, "mutant",
                               displace_first_mark(truth.markup, 30.0))
        broken = base / "broken"
        broken.mkdir()
        (broken / "submission.html").write_text("not markup at all <<<")
        return rubric, [correct, mutant,
                        Submission(str(broken), "submission.html", "broken")]

    def test_reports_keep_input_order(self, course):
        rubric, subs = self.make_three(course)
        reports, _ = grade_batch(subs, rubric, parallelism=2)
        assert [r.submission_id for r in reports] == \
            ["correct", "mutant", "broken"]

    def test_one_bad_submission_never_sinks_the_batch(self, course):
        rubric, subs = self.make_three(course)
        reports, _ = grade_batch(subs, rubric, parallelism=2)
        assert reports[0].score == 5.0
        assert reports[2].score == 0.0

    def test_summary_csv_has_the_contract_columns(self, course):
        rubric, subs = self.make_three(course)
        _, summary = grade_batch(subs, rubric, parallelism=1)
        lines = summary.strip().splitlines()
        assert lines[0] == "id,score,max_score,duration_ms,status"
        assert len(lines) == 4
        assert lines[1].startswith("correct,5,5,")

    def test_parallel_and_serial_agree(self, course):
        rubric, subs = self.make_three(course)
        serial, _ = grade_batch(subs, rubric, parallelism=1)
        parallel, _ = grade_batch(subs, rubric, parallelism=3)
        for a, b in zip(serial, parallel):
            assert render_report(a, "json", canonical=True) == \
                render_report(b, "json", canonical=True)

    def test_same_batch_twice_is_byte_identical(self, course):
        rubric, subs = self.make_three(course)
        first, _ = grade_batch(subs, rubric, parallelism=2)
        second, _ = grade_batch(subs, rubric, parallelism=2)
        for a, b in zip(first, second):
            assert render_report(a, "json", canonical=True) == \
                render_report(b, "json", canonical=True)

    def test_mutating_one_submission_changes_only_its_report(self, course):
        rubric, subs = self.make_three(course)
        before, _ = grade_batch(subs, rubric, parallelism=1)
        entry = Path(subs[1].root_dir) / "submission.html"
        entry.write_text(entry.read_text().replace("circle", "ellipse"))
        after, _ = grade_batch(subs, rubric, parallelism=1)
        changed = [a.submission_id for a, b in zip(before, after)
                   if render_report(a, "json", canonical=True)
                   != render_report(b, "json", canonical=True)]
        assert changed == ["mutant"]

    def test_parallelism_must_be_positive(self, course):
        _, _, rubric, correct = course
        with pytest.raises(ValueError):
            grade_batch([correct], rubric, parallelism=0)


# --------------------------------------------------------------------------
# report rendering
# --------------------------------------------------------------------------

class TestRenderReport:
    def test_json_matches_the_wire_schema(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        payload = json.loads(render_report(report, "json"))
        assert list(payload) == ["schema", "submission_id", "score",
                                 "max_score", "duration_ms", "grader_version",
                                 "screenshot", "tests"]
        assert payload["schema"] == 1
        assert payload["score"] == 5.0
        entry = payload["tests"][1]
        assert list(entry) == ["id", "category", "status", "score",
                               "max_score", "output"]

    def test_canonical_json_omits_wall_clock_fields(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        payload = json.loads(render_report(report, "json", canonical=True))
        assert "duration_ms" not in payload

    def test_text_groups_outcomes_by_category(self, course):
        base, truth, rubric, _ = course
        mutant = write_variant(base, "mutant",
                               displace_first_mark(truth.markup, 30.0))
        text = render_report(grade(mutant, rubric, "static"),
                             "text").decode()
        advisory_at = text.index("Advisory")
        appearance_at = text.index("Mark appearance")
        positioning_at = text.index("Scales & positioning")
        assert advisory_at < appearance_at < positioning_at
        assert "x t_pos" in text
        assert "hint: Position circles with your x and y scales." in text

    def test_text_passes_show_no_feedback_dump(self, course):
        _, _, rubric, correct = course
        text = render_report(grade(correct, rubric, "static"),
                             "text").decode()
        assert "+ t_pos (3/3)" in text
        assert "hint:" not in text

    def test_advisory_rendered_without_a_points_line(self, course):
        _, _, rubric, correct = course
        text = render_report(grade(correct, rubric, "static"),
                             "text").decode()
        assert "* t_struct\n" in text

    def test_unknown_format_rejected(self, course):
        _, _, rubric, correct = course
        report = grade(correct, rubric, "static")
        with pytest.raises(ValueError):
            render_report(report, "pdf")


# --------------------------------------------------------------------------
# live grading through the bundled automation server
# --------------------------------------------------------------------------

HOVER_RUBRIC = """\
schema: 1
meta: {name: hover_chart, entry_file: index.html, total_points: 6}
structure:
  svg_selector: "svg#chart"
  groups: [marks]
  required:
    - {selector: "g#marks circle.dot", min_count: 3}
tests:
  - {id: t_struct, category: advisory, check: {structure: true}}
  - {id: t_hover, category: interaction, points: 2,
     check: {actions: [{move_to: "g#marks circle.dot:nth(1)"}],
             assert: [{target: "g#marks circle.dot:nth(1)", attribute: fill,
                       relation: changed},
                      {target: "g#marks circle.dot:nth(1)", attribute: r,
                       relation: greater_than_before}]},
     feedback_hint: "Enlarge and recolor the hovered dot."}
  - {id: t_pin, category: interaction, points: 2,
     check: {actions: [{click: "g#marks circle.dot:nth(1)"}],
             assert: [{target: "g#marks circle.dot:nth(1)",
                       attribute: data-pinned, relation: equal,
                       value: "true"}]}}
  - {id: t_drag, category: interaction, points: 2,
     check: {actions: [{drag_by: {target: "g#marks circle.dot:nth(2)",
                                  dx: 40, dy: 0}}],
             assert: [{target: "g#marks circle.dot:nth(2)",
                       relation: position_changed}]}}
"""

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


@pytest.fixture
def hover_course(tmp_path):
    (tmp_path / "rubric.yaml").write_text(HOVER_RUBRIC)
    rubric = load_rubric(tmp_path / "rubric.yaml")
    sub_dir = tmp_path / "erin"
    shutil.copytree(LIVE_DATA / "hover", sub_dir)
    return tmp_path, rubric, Submission(str(sub_dir), "index.html", "erin")


class TestGradeLive:
    def test_interactive_submission_scores_full_marks(self, automation,
                                                      hover_course, tmp_path):
        _, rubric, sub = hover_course
        shot = tmp_path / "final.png"
        report = grade(sub, rubric, "live", webdriver_url=automation,
                       screenshot_path=str(shot))
        assert report.status == "ok"
        assert report.score == 6.0
        assert report.screenshot_path == str(shot)
        assert shot.read_bytes()[:4] == b"\x89PNG"

    def test_failed_interaction_keeps_other_points(self, automation,
                                                   hover_course):
        base, _, sub = hover_course
        rubric_text = HOVER_RUBRIC.replace("relation: position_changed",
                                           "attribute: data-pinned,\n"
                                           "                       "
                                           "relation: equal, value: \"true\"")
        path = base / "strict.yaml"
        path.write_text(rubric_text)
        report = grade(sub, load_rubric(path), "live",
                       webdriver_url=automation)
        by_id = outcomes_by_id(report)
        assert by_id["t_drag"].status == "fail"
        assert by_id["t_hover"].status == "pass"
        assert report.score == 4.0

    def test_throwing_page_zero_scores_with_feedback(self, automation,
                                                     hover_course, tmp_path):
        base, rubric, _ = hover_course
        crash_dir = base / "crash"
        shutil.copytree(LIVE_DATA / "throws", crash_dir)
        shot = tmp_path / "blank.png"
        report = grade(Submission(str(crash_dir), "index.html", "crash"),
                       rubric, "live", webdriver_url=automation,
                       screenshot_path=str(shot))
        assert report.status == "ok"
        assert report.score == 0.0
        assert any("page error on load" in o.feedback[0]
                   for o in report.outcomes)
        assert shot.read_bytes()[:4] == b"\x89PNG"

    def test_unreachable_automation_server_is_a_grader_error(self,
                                                             hover_course):
        _, rubric, sub = hover_course
        report = grade(sub, rubric, "live",
                       webdriver_url="http://127.0.0.1:1")
        assert report.status == "error"
        assert report.score == 0.0
        assert "session_attempt_3" in report.diagnostics


# --------------------------------------------------------------------------
# command line
# --------------------------------------------------------------------------

class TestCli:
    def test_validate_accepts_a_good_rubric(self, course, capsys):
        base, _, _, _ = course
        code = cli_main(["validate", "--rubric", str(base / "rubric.yaml")])
        assert code == 0
        assert "4 tests" in capsys.readouterr().out

    def test_validate_rejects_garbage(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("meta: {name: x}\n")
        code = cli_main(["validate", "--rubric", str(bad)])
        assert code == 1
        assert "invalid" in capsys.readouterr().err

    def test_grade_writes_a_json_report(self, course, tmp_path):
        base, _, _, correct = course
        out = tmp_path / "report.json"
        code = cli_main(["grade", "--rubric", str(base / "rubric.yaml"),
                         "--submission", correct.root_dir,
                         "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["score"] == 5.0
        assert payload["submission_id"] == "correct"

    def test_grade_prints_text_by_default(self, course, capsys):
        base, _, _, correct = course
        code = cli_main(["grade", "--rubric", str(base / "rubric.yaml"),
                         "--submission", correct.root_dir])
        assert code == 0
        out = capsys.readouterr().out
        assert "Submission correct: 5/5" in out

    def test_grade_exit_zero_even_for_failing_submissions(self, course,
                                                          capsys):
        base, truth, _, _ = course
        mutant = write_variant(base, "mutant",
                               displace_first_mark(truth.markup, 30.0))
        code = cli_main(["grade", "--rubric", str(base / "rubric.yaml"),
                         "--submission", mutant.root_dir])
        assert code == 0

    def test_batch_writes_reports_and_csv(self, course, tmp_path, capsys):
        base, truth, _, _ = course
        write_variant(base, "zz_mutant",
                      displace_first_mark(truth.markup, 30.0))
        out_dir = tmp_path / "reports"
        csv_path = tmp_path / "summary.csv"
        code = cli_main(["batch", "--rubric", str(base / "rubric.yaml"),
                         "--submissions", str(base / "*"),
                         "--out-dir", str(out_dir),
                         "--csv", str(csv_path)])
        assert code == 0
        assert (out_dir / "correct.json").exists()
        assert (out_dir / "zz_mutant.json").exists()
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "id,score,max_score,duration_ms,status"

    def test_batch_with_no_matches_fails(self, tmp_path, course, capsys):
        base, _, _, _ = course
        code = cli_main(["batch", "--rubric", str(base / "rubric.yaml"),
                         "--submissions", str(tmp_path / "nothing-*"),
                         "--out-dir", str(tmp_path / "out")])
        assert code == 2

    def test_missing_rubric_is_a_clean_error(self, tmp_path, capsys):
        code = cli_main(["validate", "--rubric",
                         str(tmp_path / "absent.yaml")])
        assert code == 1
