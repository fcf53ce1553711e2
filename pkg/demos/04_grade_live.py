"""Grade an interactive force-directed graph in a live browser session.

Interaction tests cannot run from a static snapshot: someone has to move
the pointer, click, and drag, then compare the DOM before and after. This
demo spawns the repo's local automation server, serves the force-graph
corpus fixture (with the shared d3 copy overlaid), and grades its full
interaction chain: hover recolor, click to pin, drag to move, double-click
to unpin.

Requires node; the script says so and exits cleanly if it is missing.
"""

import re
import shutil
import subprocess
import sys
from pathlib import Path

from visgrade import Submission, grade, load_rubric, render_report

REPO = Path(__file__).resolve().parent.parent
FIXTURE = REPO / "frontend" / "fixtures" / "force-graph"
VENDOR = REPO / "frontend" / "vendor"
SERVER_JS = REPO / "tools" / "webdriver-lite" / "server.js"


def main():
    node = shutil.which("node")
    if node is None:
        print("node is not installed; live grading needs the automation server")
        return 0

    proc = subprocess.Popen([node, str(SERVER_JS), "--port", "0"],
                            stdout=subprocess.PIPE, text=True)
    try:
        banner = proc.stdout.readline()
        port = re.search(r"port=(\d+)", banner).group(1)
        endpoint = f"http://127.0.0.1:{port}"
        print(f"automation server listening at {endpoint}")

        rubric = load_rubric(FIXTURE / "rubric.yaml")
        submission = Submission(str(FIXTURE), rubric.meta.entry_file,
                                "force-graph")
        report = grade(submission, rubric, mode="live",
                       webdriver_url=endpoint, shared_assets=VENDOR)
        print(render_report(report, format="text").decode())
        return 0 if report.score == report.max_score else 1
    finally:
        proc.terminate()
        proc.wait(timeout=5)


if __name__ == "__main__":
    sys.exit(main())
