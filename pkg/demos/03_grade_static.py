"""Grade two submissions of a scatter plot assignment from static snapshots.

A rubric declares the required structure, the scales the axes must carry,
and a handful of scored tests. Static mode needs no browser at all: the
grader parses each submission's HTML, recovers the scales from the rendered
axes, and checks every mark against the dataset. The second submission
below misplaces two points, which the positioning test converts into
partial credit and a concrete hint.
"""

import tempfile
from pathlib import Path

from visgrade import Submission, grade, load_rubric, render_report

RUBRIC = """\
schema: 1
meta: {name: scatter, entry_file: plot.html, total_points: 6}
structure:
  svg_selector: "svg#chart"
  groups: [marks, x-axis, y-axis]
  required:
    - {selector: "g#marks circle", min_count: 4}
datasets: {points: points.csv}
scales:
  - {id: x, axis_group: "g#x-axis", kind: linear, orientation: horizontal}
  - {id: y, axis_group: "g#y-axis", kind: linear, orientation: vertical}
tests:
  - {id: t_structure, category: advisory, check: {structure: true}}
  - {id: t_scale, category: positioning, points: 2,
     check: {scale_fit: {scale: x}}}
  - {id: t_points, category: positioning, points: 4,
     check: {positions: {marks: "g#marks circle", x_scale: x, y_scale: y,
                         dataset: points, x_field: u, y_field: v,
                         partial: linear}},
     feedback_hint: "Compute cx and cy with the same scales as the axes."}
"""

DATASET = "u,v\n10,2\n20,6\n30,4\n40,8\n"

# x: u in [10, 40] -> [60, 360] px; y: v in [0, 10] -> [220, 20] px
X = {10: 60.0, 20: 160.0, 30: 260.0, 40: 360.0}
Y = {0: 220.0, 2: 180.0, 4: 140.0, 6: 100.0, 8: 60.0, 10: 20.0}


def page(marks):
    circles = "".join(
        f'<circle cx="{cx}" cy="{cy}" r="4" fill="#1f77b4"/>'
        for cx, cy in marks)
    x_ticks = "".join(
        f'<g class="tick" transform="translate({px},0)"><text>{u}</text></g>'
        for u, px in X.items())
    y_ticks = "".join(
        f'<g class="tick" transform="translate(0,{px})"><text>{v}</text></g>'
        for v, px in Y.items())
    return f"""<!DOCTYPE html><html><body>
      <svg id="chart" width="420" height="260">
        <g id="marks">{circles}</g>
        <g id="x-axis" transform="translate(0,220)">{x_ticks}</g>
        <g id="y-axis">{y_ticks}</g>
      </svg>
    </body></html>"""


def write_submission(base, student, marks):
    directory = base / student
    directory.mkdir()
    (directory / "plot.html").write_text(page(marks))
    return Submission(str(directory), "plot.html", student)


def main():
    rows = [(10, 2), (20, 6), (30, 4), (40, 8)]
    correct = [(X[u], Y[v]) for u, v in rows]
    # the sloppy submission drops two points 9px below where they belong
    sloppy = [(cx, cy + (9 if i in (1, 3) else 0))
              for i, (cx, cy) in enumerate(correct)]

    with tempfile.TemporaryDirectory() as scratch:
        base = Path(scratch)
        (base / "rubric.yaml").write_text(RUBRIC)
        (base / "points.csv").write_text(DATASET)
        rubric = load_rubric(base / "rubric.yaml")

        for student, marks in (("minh", correct), ("jess", sloppy)):
            report = grade(write_submission(base, student, marks), rubric)
            print(render_report(report, format="text").decode())
            print()


if __name__ == "__main__":
    main()
