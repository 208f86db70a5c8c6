"""Detector connectivity: stdio scoring protocol, score files, baseline.

Detectors live out of process. They either speak the line protocol
(HELLO/READY/VIDEO/SCORES/BYE, one request in flight) or provide a
precomputed CSV of scores. A dependency-free baseline scorer based on a
Laplacian sharpness statistic makes the pipeline testable end to end
without any learned model.

Score convention everywhere: 1 = fake, 0 = real.
"""

from __future__ import annotations

import csv
import math
import os
import re
import select
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from forgebench import PROTOCOL_NAME, kernels
from forgebench.dataset import Manifest
from forgebench.errors import ScoreFileError, ScorerProtocolError

SCORE_CSV_HEADER = ("op_id", "video_id", "frame_index", "score")

# Plain decimal floats only: no nan/inf/hex, optional exponent.
_FLOAT_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


@dataclass(frozen=True)
class FrameScore:
    video_id: str
    frame_index: int
    score: float


@dataclass
class ScoreSet:
    """Per-video scores for one operation, labels joined from the manifest."""

    op_id: str
    entries: list[tuple[str, str, float]]  # (video_id, label, score)
    provenance: str  # protocol | file | baseline

    def labeled_pairs(self) -> list[tuple[float, str]]:
        return [(score, label) for _, label, score in self.entries]


def parse_protocol_score(text: str) -> float:
    """Validate one protocol score token: plain decimal in [0, 1]."""
    if not _FLOAT_RE.match(text):
        raise ScorerProtocolError(f"malformed score {text!r}")
    value = float(text)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ScorerProtocolError(f"score out of range [0, 1]: {text!r}")
    return value


class ScorerProcess:
    """Client side of scorer stdio protocol v1; one request in flight."""

    def __init__(self, command: str, timeout: float = 60.0):
        self.command = command
        self.timeout = timeout
        self.name = ""
        self._request_counter = 0
        self._buffer = b""
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except FileNotFoundError as exc:
            raise ScorerProtocolError(f"scorer command not found: {exc.filename!r}") from None
        self._handshake()

    def _send(self, line: str) -> None:
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise ScorerProtocolError("scorer process is not running")
        try:
            self._proc.stdin.write((line + "\n").encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise ScorerProtocolError("scorer closed its input (crashed?)") from None

    def _readline(self) -> str:
        # Own buffering over the raw pipe: select() knows nothing about
        # Python-level buffers, so readline()-style buffering would hang.
        stdout = self._proc.stdout
        assert stdout is not None
        fd = stdout.fileno()
        while b"\n" not in self._buffer:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                raise ScorerProtocolError(
                    f"scorer timed out after {self.timeout:.0f}s waiting for a reply"
                )
            chunk = os.read(fd, 65536)
            if chunk == b"":
                raise ScorerProtocolError("scorer exited before replying")
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line.decode("utf-8", "replace").rstrip("\r")

    def _handshake(self) -> None:
        self._send(f"HELLO {PROTOCOL_NAME}")
        reply = self._readline()
        if not reply.startswith("READY ") or len(reply) <= len("READY "):
            raise ScorerProtocolError(f"bad handshake reply: {reply!r}")
        self.name = reply[len("READY "):].strip()

    def score_frames(self, frame_paths: list[Path | str]) -> list[float]:
        """One VIDEO request for the given frame files, scores in order."""
        self._request_counter += 1
        request_id = f"q{self._request_counter:06d}"
        n = len(frame_paths)
        self._send(f"VIDEO {request_id} {n}")
        for path in frame_paths:
            self._send(f"FRAME {Path(path).resolve()}")
        header = self._readline()
        parts = header.split()
        if len(parts) != 3 or parts[0] != "SCORES":
            raise ScorerProtocolError(f"expected SCORES header, got: {header!r}")
        if parts[1] != request_id:
            raise ScorerProtocolError(
                f"reply for wrong request: expected {request_id}, got: {header!r}"
            )
        if parts[2] != str(n):
            raise ScorerProtocolError(
                f"score count mismatch: sent {n} frames, got: {header!r}"
            )
        scores = []
        for _ in range(n):
            line = self._readline()
            if not line.startswith("S "):
                raise ScorerProtocolError(f"expected score line, got: {line!r}")
            scores.append(parse_protocol_score(line[2:].strip()))
        return scores

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._send("BYE")
            except ScorerProtocolError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        for stream in (self._proc.stdin, self._proc.stdout):
            if stream is not None:
                stream.close()

    def __enter__(self) -> "ScorerProcess":
        return self

    def __exit__(self, *_exc) -> None:
        self.close()


def aggregate_video_score(frame_scores: list[float]) -> float:
    """Video-level fusion: arithmetic mean of frame scores."""
    if not frame_scores:
        raise ValueError("cannot aggregate an empty score list")
    for s in frame_scores:
        if not math.isfinite(s) or not 0.0 <= s <= 1.0:
            raise ValueError(f"frame score out of range: {s!r}")
    return sum(frame_scores) / len(frame_scores)


# --- precomputed score files ------------------------------------------------


@dataclass
class ScoreRows:
    """Validated raw rows of a score CSV, grouped per (op, video)."""

    frame_rows: dict[tuple[str, str], list[tuple[int, float]]] = field(default_factory=dict)

    def op_ids(self) -> list[str]:
        return sorted({op_id for op_id, _ in self.frame_rows})


def parse_scores_csv(path: str | Path) -> ScoreRows:
    """Parse and validate the score CSV (header op_id,video_id,frame_index,score)."""
    path = Path(path)
    if not path.is_file():
        raise ScoreFileError(f"score file not found: {path}")
    rows = ScoreRows()
    seen: set[tuple[str, str, int]] = set()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ScoreFileError(f"{path}: empty score file") from None
        if tuple(header) != SCORE_CSV_HEADER:
            raise ScoreFileError(
                f"{path}: bad header {header!r}, expected {list(SCORE_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ScoreFileError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            op_id, video_id, frame_index_text, score_text = row
            try:
                frame_index = int(frame_index_text)
            except ValueError:
                raise ScoreFileError(
                    f"{path}:{lineno}: bad frame_index {frame_index_text!r}"
                ) from None
            if frame_index < -1:
                raise ScoreFileError(f"{path}:{lineno}: frame_index must be >= -1")
            try:
                score = float(score_text)
            except ValueError:
                raise ScoreFileError(f"{path}:{lineno}: bad score {score_text!r}") from None
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                raise ScoreFileError(f"{path}:{lineno}: score {score_text!r} outside [0, 1]")
            key = (op_id, video_id, frame_index)
            if key in seen:
                raise ScoreFileError(
                    f"{path}:{lineno}: duplicate row for "
                    f"(op={op_id!r}, video={video_id!r}, frame={frame_index})"
                )
            seen.add(key)
            rows.frame_rows.setdefault((op_id, video_id), []).append((frame_index, score))
    if not rows.frame_rows:
        raise ScoreFileError(f"{path}: no score rows")
    for (op_id, video_id), entries in rows.frame_rows.items():
        indices = [i for i, _ in entries]
        if -1 in indices and len(indices) > 1:
            raise ScoreFileError(
                f"{path}: (op={op_id!r}, video={video_id!r}) mixes an aggregated "
                "row (frame_index -1) with per-frame rows"
            )
    return rows


def collate_scores(
    rows: ScoreRows,
    manifest: Manifest,
    provenance: str = "file",
    level: str = "video",
) -> dict[str, ScoreSet]:
    """Join rows with manifest labels and fold them into per-op ScoreSets.

    level="video" aggregates per-frame rows by mean; level="frame" keeps
    one entry per frame row (aggregated -1 rows are rejected).
    """
    by_id = manifest.by_id()
    sets: dict[str, ScoreSet] = {}
    for (op_id, video_id), entries in sorted(rows.frame_rows.items()):
        video = by_id.get(video_id)
        if video is None:
            raise ScoreFileError(f"unknown video id in scores: {video_id!r}")
        target = sets.setdefault(op_id, ScoreSet(op_id=op_id, entries=[], provenance=provenance))
        if level == "video":
            if entries[0][0] == -1:
                score = entries[0][1]
            else:
                score = aggregate_video_score([s for _, s in entries])
            target.entries.append((video_id, video.label, score))
        elif level == "frame":
            if entries[0][0] == -1:
                raise ScoreFileError(
                    f"frame-level AUC requested but (op={op_id!r}, video={video_id!r}) "
                    "has only an aggregated score"
                )
            for _, score in sorted(entries):
                target.entries.append((video_id, video.label, score))
        else:
            raise ValueError(f"unknown level {level!r}")
    return sets


def ingest_scores_file(
    path: str | Path, manifest: Manifest, level: str = "video"
) -> dict[str, ScoreSet]:
    return collate_scores(parse_scores_csv(path), manifest, provenance="file", level=level)


def write_score_rows(
    path: str | Path, rows: list[tuple[str, str, int, float]]
) -> None:
    """Write score rows in the canonical CSV form (sorted, repr-precision)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_CSV_HEADER)
        for op_id, video_id, frame_index, score in sorted(rows):
            writer.writerow([op_id, video_id, frame_index, repr(float(score))])


def serialize_score_sets(sets: dict[str, ScoreSet], path: str | Path) -> None:
    """Canonical serialization of video-level ScoreSets (frame_index -1)."""
    rows = [
        (score_set.op_id, video_id, -1, score)
        for score_set in sets.values()
        for video_id, _, score in score_set.entries
    ]
    write_score_rows(path, rows)


# --- built-in baseline scorer ------------------------------------------------

BASELINE_NAME = "laplacian-baseline"
_BASELINE_THRESHOLD = 6.0
_BASELINE_SCALE = 2.0


def baseline_score_frame(frame: np.ndarray) -> float:
    """Sharpness statistic squashed to [0, 1]: crude high-frequency detector.

    Mean absolute 4-neighbor Laplacian of the (unrounded) BT.601 luma,
    through a logistic centered at 6.0 with scale 2.0. Deterministic and
    invariant under horizontal/vertical flips.
    """
    if frame.shape[0] < 3 or frame.shape[1] < 3:
        raise ValueError("baseline scorer needs a frame of at least 3x3")
    g = kernels.laplacian_mean(frame)
    return 1.0 / (1.0 + math.exp(-(g - _BASELINE_THRESHOLD) / _BASELINE_SCALE))
