"""Command-line front end: grade one submission, a batch, or a rubric."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys
from pathlib import Path

from . import harness, webdriver
from .errors import RubricError, VisgradeError
from .harness import Submission, grade, grade_batch, render_report
from .rubric import load_rubric


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visgrade",
        description="Rubric-driven grading for interactive D3 visualizations.")
    parser.add_argument("--verbose", action="store_true",
                        help="log grader internals to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    grade_p = sub.add_parser("grade", help="grade one submission")
    grade_p.add_argument("--rubric", required=True)
    grade_p.add_argument("--submission", required=True,
                         help="directory holding the submission files")
    grade_p.add_argument("--mode", choices=("live", "static"),
                         default="static",
                         help="static analyzes the entry file as a snapshot; "
                              "live drives a browser session")
    grade_p.add_argument("--webdriver",
                         default=os.environ.get("VISGRADE_WEBDRIVER_URL",
                                                webdriver.DEFAULT_ENDPOINT),
                         help="automation server endpoint (live mode)")
    grade_p.add_argument("--shared-assets", default=None,
                         help="directory of library/data files submissions "
                              "may rely on")
    grade_p.add_argument("--out", default=None,
                         help="write the JSON report here (default stdout "
                              "as text)")
    grade_p.add_argument("--screenshot", default=None,
                         help="capture the final page state here (live mode)")

    batch_p = sub.add_parser("batch", help="grade many submissions")
    batch_p.add_argument("--rubric", required=True)
    batch_p.add_argument("--submissions", required=True,
                         help="glob of submission directories")
    batch_p.add_argument("--mode", choices=("live", "static"),
                         default="static")
    batch_p.add_argument("--webdriver",
                         default=os.environ.get("VISGRADE_WEBDRIVER_URL",
                                                webdriver.DEFAULT_ENDPOINT))
    batch_p.add_argument("--shared-assets", default=None)
    batch_p.add_argument("--parallelism", type=int, default=1)
    batch_p.add_argument("--out-dir", required=True,
                         help="directory receiving one JSON report per "
                              "submission")
    batch_p.add_argument("--csv", default=None,
                         help="write the summary CSV here")

    validate_p = sub.add_parser("validate", help="check a rubric file")
    validate_p.add_argument("--rubric", required=True)
    return parser


def _submission_from_dir(directory: str, rubric) -> Submission:
    root = Path(directory)
    entry = rubric.meta.entry_file
    return Submission(root_dir=str(root), entry_file=entry, id=root.name)


def _write_sidecar(report, out_path: str):
    """Instructor-only diagnostics live next to the report, never inside it."""
    if not report.diagnostics:
        return
    sidecar = Path(out_path).with_suffix(".diagnostics.json")
    sidecar.write_text(json.dumps(report.diagnostics, indent=2) + "\n",
                       encoding="utf-8")


def _cmd_grade(args) -> int:
    rubric = load_rubric(args.rubric)
    sub = _submission_from_dir(args.submission, rubric)
    report = grade(sub, rubric, args.mode,
                   webdriver_url=args.webdriver,
                   shared_assets=args.shared_assets,
                   screenshot_path=args.screenshot)
    if args.out:
        Path(args.out).write_bytes(render_report(report, "json"))
        _write_sidecar(report, args.out)
        print(f"{report.submission_id}: {report.score:g}/"
              f"{report.max_score:g} -> {args.out}")
    else:
        sys.stdout.write(render_report(report, "text").decode())
    return 0 if report.status == "ok" else 2


def _cmd_batch(args) -> int:
    rubric = load_rubric(args.rubric)
    directories = sorted(d for d in glob.glob(args.submissions)
                         if Path(d).is_dir())
    if not directories:
        print(f"no submission directories match {args.submissions!r}",
              file=sys.stderr)
        return 2
    submissions = [_submission_from_dir(d, rubric) for d in directories]
    reports, summary = grade_batch(
        submissions, rubric, parallelism=args.parallelism, mode=args.mode,
        webdriver_url=args.webdriver, shared_assets=args.shared_assets)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        out_path = out_dir / f"{report.submission_id}.json"
        out_path.write_bytes(render_report(report, "json"))
        _write_sidecar(report, str(out_path))
    if args.csv:
        Path(args.csv).write_text(summary, encoding="utf-8")
    else:
        sys.stdout.write(summary)
    failures = sum(1 for r in reports if r.status != "ok")
    print(f"graded {len(reports)} submission(s); "
          f"{failures} grader error(s)", file=sys.stderr)
    return 0 if failures == 0 else 2


def _cmd_validate(args) -> int:
    try:
        rubric = load_rubric(args.rubric)
    except RubricError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {rubric.meta.name!r}, {len(rubric.tests)} tests, "
          f"{rubric.meta.total_points:g} points")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "grade":
            return _cmd_grade(args)
        if args.command == "batch":
            return _cmd_batch(args)
        return _cmd_validate(args)
    except VisgradeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
