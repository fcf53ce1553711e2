"""Recover a data-to-pixel scale from nothing but rendered axis ticks.

A submission never hands over its JavaScript scale objects, so the grader
reads the axis: each tick pairs a label (a data value) with a pixel
position. Regressing position against the transformed value recovers the
mapping well enough to predict where any datum should sit, and the fit
quality says whether the student used the scale kind the rubric asked for.
"""

from visgrade import VisgradeError, extract_ticks, fit_scale, forward, parse_snapshot


def axis_markup(pairs):
    ticks = "".join(
        f'<g class="tick" transform="translate({px},0)"><text>{label}</text></g>'
        for label, px in pairs)
    return f"""
    <svg width="800" height="100">
      <g id="axis" class="axis" transform="translate(40,60)">{ticks}</g>
    </svg>
    """


def main():
    # a linear axis: value 0 at 0px through value 80 at 640px
    pairs = [(v, v * 8.0) for v in (0, 20, 40, 60, 80)]
    root = parse_snapshot(axis_markup(pairs))
    samples = extract_ticks(root, "g#axis", "horizontal")
    print(f"extracted {len(samples)} tick samples from the axis")

    scale = fit_scale(samples, "linear")
    lo, hi = scale.domain
    print(f"recovered a linear scale with domain [{lo:g}, {hi:g}] "
          f"and r^2 = {scale.fit_r2:.6f}")

    # tick samples carry page coordinates, so the recovered forward
    # mapping predicts page positions for unseen values directly
    for value in (10, 35, 77):
        print(f"  value {value} should render at x = "
              f"{forward(scale, value):.1f} on the page")

    # asking for the wrong kind is rejected rather than shrugged off
    try:
        fit_scale(samples, "log")
    except VisgradeError as exc:
        print(f"fitting the same ticks as log fails: {exc}")


if __name__ == "__main__":
    main()
