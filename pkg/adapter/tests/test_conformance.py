"""Conformance against the harness itself.

The adapter runs as a real subprocess here, driven by the harness's own
protocol client, exactly as a production run would drive a detector.
Requires the forgebench package (test dependency only).
"""

import subprocess
import sys

import pytest

forgebench_scorer = pytest.importorskip(
    "forgebench.scorer", reason="harness package not installed"
)

ADAPTER_CMD = f"{sys.executable} -m forgebench_adapter"


def test_handshake_reports_adapter_name():
    proc = forgebench_scorer.ScorerProcess(ADAPTER_CMD + " --name conformance-check")
    try:
        assert proc.name == "conformance-check"
    finally:
        proc.close()


def test_scores_match_stub_statistic(frame_dir):
    paths = sorted(frame_dir.glob("*.png"))
    with forgebench_scorer.ScorerProcess(ADAPTER_CMD) as proc:
        scores = proc.score_frames(paths)
    assert scores[0] == 0.0
    assert scores[1] == 1.0
    assert scores[2] == pytest.approx(128 / 255)


def test_order_preserved_under_shuffle(frame_dir):
    paths = sorted(frame_dir.glob("*.png"))
    shuffled = [paths[1], paths[2], paths[0]]
    with forgebench_scorer.ScorerProcess(ADAPTER_CMD) as proc:
        straight = proc.score_frames(paths)
        reordered = proc.score_frames(shuffled)
    assert reordered == [straight[1], straight[2], straight[0]]


def test_err_line_is_hard_error_for_harness(frame_dir, tmp_path):
    missing = tmp_path / "gone.png"
    with forgebench_scorer.ScorerProcess(ADAPTER_CMD) as proc:
        with pytest.raises(forgebench_scorer.ScorerProtocolError, match="ERR"):
            proc.score_frames([missing])


def test_clean_exit_on_bye():
    proc = subprocess.Popen(
        ADAPTER_CMD.split(),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )
    out, _ = proc.communicate("HELLO forgebench/1\nBYE\n", timeout=30)
    assert proc.returncode == 0
    assert out.startswith("READY ")


def test_unresolvable_hook_fails_before_ready():
    proc = subprocess.run(
        [*ADAPTER_CMD.split(), "--hook", "no.such.module:fn"],
        input="HELLO forgebench/1\n",
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 2
    assert proc.stdout == ""
    assert "cannot resolve hook" in proc.stderr
