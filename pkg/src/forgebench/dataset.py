"""Dataset layout, manifest parsing, frame I/O, and frame sampling.

Videos are stored as extracted frame sequences: lossless 8-bit RGB PNG
files named by zero-based 6-digit index inside a per-video directory,
plus a JSON-lines manifest describing each video. Frames in memory are
numpy arrays of shape (height, width, 3), dtype uint8.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from forgebench.errors import FrameError, ManifestError

LABELS = ("real", "fake")
SPLITS = ("train", "val", "test")

MANIFEST_FIELDS = ("id", "frames_dir", "n_frames", "width", "height", "fps", "label", "split")


@dataclass(frozen=True)
class VideoRecord:
    """One labeled video: a frame sequence plus metadata."""

    id: str
    frames_dir: Path
    n_frames: int
    width: int
    height: int
    fps: float
    label: str
    split: str

    def frame_path(self, index: int) -> Path:
        return Path(self.frames_dir) / f"{index:06d}.png"

    def to_json(self) -> str:
        rec = {
            "id": self.id,
            "frames_dir": str(self.frames_dir),
            "n_frames": self.n_frames,
            "width": self.width,
            "height": self.height,
            "fps": self.fps,
            "label": self.label,
            "split": self.split,
        }
        return json.dumps(rec, sort_keys=False)


@dataclass
class Manifest:
    dataset_name: str
    videos: list[VideoRecord] = field(default_factory=list)

    def by_id(self) -> dict[str, VideoRecord]:
        return {v.id: v for v in self.videos}

    def split_videos(self, split: str) -> list[VideoRecord]:
        return [v for v in self.videos if v.split == split]

    def validate(self) -> None:
        seen: set[str] = set()
        for video in self.videos:
            if video.id in seen:
                raise ManifestError(f"duplicate video id {video.id!r}")
            seen.add(video.id)
        test = self.split_videos("test")
        labels = {v.label for v in test}
        if "real" not in labels or "fake" not in labels:
            raise ManifestError(
                "test split must contain at least one real and one fake video"
            )


def _parse_record(obj: dict, lineno: int) -> VideoRecord:
    missing = [k for k in MANIFEST_FIELDS if k not in obj]
    if missing:
        raise ManifestError(f"line {lineno}: missing fields {missing}")
    extra = [k for k in obj if k not in MANIFEST_FIELDS]
    if extra:
        raise ManifestError(f"line {lineno}: unknown fields {extra}")
    try:
        n_frames = int(obj["n_frames"])
        width = int(obj["width"])
        height = int(obj["height"])
        fps = float(obj["fps"])
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"line {lineno}: bad numeric field ({exc})") from None
    if n_frames < 1 or width < 1 or height < 1 or fps <= 0:
        raise ManifestError(f"line {lineno}: non-positive dimension, count, or fps")
    label = obj["label"]
    if label not in LABELS:
        raise ManifestError(f"line {lineno}: invalid label {label!r}")
    split = obj["split"]
    if split not in SPLITS:
        raise ManifestError(f"line {lineno}: invalid split {split!r}")
    return VideoRecord(
        id=str(obj["id"]),
        frames_dir=Path(obj["frames_dir"]),
        n_frames=n_frames,
        width=width,
        height=height,
        fps=fps,
        label=label,
        split=split,
    )


def load_manifest(path: str | Path, verify_frames: bool = False) -> Manifest:
    """Parse a JSON-lines manifest, preserving video order.

    Relative frames_dir entries are resolved against the manifest's parent
    directory. With verify_frames=True every frame file is stat-checked.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    videos: list[VideoRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ManifestError(f"line {lineno}: expected a JSON object")
            record = _parse_record(obj, lineno)
            if not record.frames_dir.is_absolute():
                record = replace(record, frames_dir=path.parent / record.frames_dir)
            videos.append(record)
    if not videos:
        raise ManifestError(f"no videos in manifest: {path}")
    manifest = Manifest(dataset_name=path.stem, videos=videos)
    manifest.validate()
    if verify_frames:
        for video in videos:
            for index in range(video.n_frames):
                frame_file = video.frame_path(index)
                if not frame_file.is_file():
                    raise ManifestError(
                        f"video {video.id!r}: missing frame file {frame_file}"
                    )
    return manifest


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for video in manifest.videos:
            fh.write(video.to_json() + "\n")


def sample_frame_indices(n_frames: int, k: int) -> list[int]:
    """Deterministic uniform-stride sampling: floor(i * n / k) for i < k.

    Returns all indices when k >= n_frames; indices are distinct and
    sorted either way.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= n_frames:
        return list(range(n_frames))
    return [(i * n_frames) // k for i in range(k)]


def read_frame(video: VideoRecord, index: int) -> np.ndarray:
    """Decode one frame, checking dimensions against the record."""
    if index < 0 or index >= video.n_frames:
        raise FrameError(
            f"video {video.id!r}: frame index {index} out of range [0, {video.n_frames})"
        )
    path = video.frame_path(index)
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise FrameError(
                    f"{path}: expected 8-bit RGB, got mode {img.mode!r}"
                )
            arr = np.asarray(img, dtype=np.uint8)
    except FileNotFoundError:
        raise FrameError(f"video {video.id!r}: missing frame file {path}") from None
    except OSError as exc:
        raise FrameError(f"{path}: cannot decode ({exc})") from None
    if arr.shape != (video.height, video.width, 3):
        raise FrameError(
            f"{path}: dimensions {arr.shape[1]}x{arr.shape[0]} do not match "
            f"record {video.width}x{video.height}"
        )
    return arr


def load_frame(path: str | Path) -> np.ndarray:
    """Decode a standalone 8-bit RGB frame file."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise FrameError(f"{path}: expected 8-bit RGB, got mode {img.mode!r}")
            return np.asarray(img, dtype=np.uint8)
    except FileNotFoundError:
        raise FrameError(f"missing frame file {path}") from None
    except OSError as exc:
        raise FrameError(f"{path}: cannot decode ({exc})") from None


def write_frame(frame: np.ndarray, path: str | Path) -> None:
    """Write a frame as lossless 8-bit RGB PNG (bit-exact round-trip)."""
    if frame.dtype != np.uint8 or frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("frame must be an (h, w, 3) uint8 array")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        Image.fromarray(frame, mode="RGB").save(path, format="PNG")
    except OSError as exc:
        raise FrameError(f"cannot write frame {path}: {exc}") from None
