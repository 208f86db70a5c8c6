"""Adapter-driven end-to-end run through the harness CLI.

The harness is consumed purely as an external tool: `forgebench fixture`
and `forgebench run --scorer-cmd ...` subprocesses, nothing imported.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

ADAPTER_CMD = f"{sys.executable} -m forgebench_adapter"
HARNESS = [sys.executable, "-m", "forgebench.cli"]


def harness_available() -> bool:
    probe = subprocess.run(
        HARNESS + ["--help"], capture_output=True, text=True
    )
    return probe.returncode == 0


pytestmark = pytest.mark.skipif(
    not harness_available(), reason="forgebench CLI not installed"
)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("adapter-e2e")
    subprocess.run(
        HARNESS + ["fixture", str(root), "--real", "3", "--fake", "3",
                   "--seed", "21", "--frames", "3", "--size", "32"],
        check=True,
        capture_output=True,
    )
    return root / "manifest.jsonl"


def run_pipeline(dataset: Path, out: Path) -> subprocess.CompletedProcess:
    return subprocess.run(
        HARNESS + [
            "run", "--manifest", str(dataset), "--out", str(out),
            "--seed", "21", "--scorer-cmd", ADAPTER_CMD,
            "--detector-name", "stub-adapter", "--trainset", "fixture",
        ],
        capture_output=True,
        text=True,
    )


def test_full_run_structure_and_determinism(dataset, tmp_path):
    first = run_pipeline(dataset, tmp_path / "a")
    assert first.returncode == 0, first.stdout + first.stderr
    report = json.loads((tmp_path / "a" / "report" / "report.json").read_text())

    canonical = ["c23", "c40", "bright_up", "bright_down", "contrast", "noise",
                 "flip_h", "flip_v", "res_x2", "res_x4", "grayscale", "vintage"]
    produced = [cell["op_id"] for cell in report["cells"]]
    skipped = set(report["skipped_ops"])
    # Codec cells appear when an encoder exists; otherwise they are
    # explicitly marked skipped and ten cells remain.
    assert produced == [op for op in canonical if op not in skipped]
    assert skipped <= {"c23", "c40"}
    assert report["detector"] == "stub-adapter"
    assert report["run_manifest"]["scorer"]["mode"] == "protocol"

    second = run_pipeline(dataset, tmp_path / "b")
    assert second.returncode == 0
    csv_a = (tmp_path / "a" / "report" / "report.csv").read_bytes()
    csv_b = (tmp_path / "b" / "report" / "report.csv").read_bytes()
    assert csv_a == csv_b
