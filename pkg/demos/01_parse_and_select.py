"""Parse a chart snapshot and pick marks out of it with selectors.

The DOM snapshot is the grader's only view of a submission: a tree of
elements with attributes and geometry resolved through SVG transforms.
This walkthrough parses a small grouped chart, queries it with the
supported selector dialect (tag, #id, .class, descendant, and the
positional :nth(k) extension), and reads back resolved positions.
"""

from visgrade import parse_snapshot, resolve_geometry, select

MARKUP = """
<!DOCTYPE html>
<html><body>
  <h1>Team output</h1>
  <svg id="chart" width="400" height="240">
    <g transform="translate(40,20)">
      <g id="marks">
        <circle class="dot" cx="30" cy="150" r="5" fill="#1f77b4"/>
        <circle class="dot" cx="110" cy="90" r="5" fill="#1f77b4"/>
        <circle class="dot highlight" cx="190" cy="40" r="7" fill="tomato"/>
        <circle class="dot" cx="270" cy="120" r="5" fill="#1f77b4"/>
      </g>
      <g id="x-axis" transform="translate(0,180)">
        <g class="tick" transform="translate(30,0)"><text>0</text></g>
        <g class="tick" transform="translate(270,0)"><text>30</text></g>
      </g>
    </g>
  </svg>
</body></html>
"""


def main():
    root = parse_snapshot(MARKUP)

    dots = select(root, "g#marks circle.dot")
    print(f"found {len(dots)} dots under g#marks")

    highlighted = select(root, "circle.highlight")
    print(f"the highlighted dot has fill {highlighted[0].attributes['fill']!r}")

    # :nth(k) picks one element from a selector's matches in document order
    third = select(root, "g#marks circle.dot:nth(2)")[0]
    print(f"dot :nth(2) has raw cx={third.attributes['cx']}")

    # geometry is resolved through every ancestor transform, so the page
    # coordinates include the translate(40,20) margin group
    geometry = resolve_geometry(third)
    print(f"its center on the page is ({geometry.cx}, {geometry.cy})")

    ticks = select(root, "g#x-axis g.tick")
    print(f"the x axis carries {len(ticks)} ticks")


if __name__ == "__main__":
    main()
