"""Synthetic mini-dataset generator for installation-free end-to-end runs.

"Real" videos are smooth drifting gradients; "fake" videos additionally
carry a low-amplitude one-pixel checkerboard patch in one quadrant, a
high-frequency artifact the built-in baseline scorer picks up. Wholly
seeded: the same arguments always produce byte-identical trees.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from forgebench.dataset import Manifest, VideoRecord, save_manifest, write_frame
from forgebench.rng import MASK64, Xoshiro256pp, fnv1a64, splitmix64

CHECKER_AMPLITUDE = 24.0


def _video_rng(global_seed: int, video_id: str) -> Xoshiro256pp:
    return Xoshiro256pp(splitmix64((global_seed & MASK64) ^ fnv1a64(video_id)))


def _uniform_in(rng: Xoshiro256pp, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.uniform()


def _render_video(
    out_dir: Path,
    video_id: str,
    fake: bool,
    global_seed: int,
    n_frames: int,
    size: int,
) -> None:
    rng = _video_rng(global_seed, video_id)
    offsets = [_uniform_in(rng, 90.0, 160.0) for _ in range(3)]
    slope_x = _uniform_in(rng, -0.7, 0.7)
    slope_y = _uniform_in(rng, -0.7, 0.7)
    drifts = [_uniform_in(rng, -1.0, 1.0) for _ in range(3)]
    quadrant = rng.next_u64() % 4  # unused for reals, but keeps draws aligned

    xs = np.arange(size, dtype=np.float64)[np.newaxis, :]
    ys = np.arange(size, dtype=np.float64)[:, np.newaxis]
    ramp = slope_x * xs + slope_y * ys

    patch = np.zeros((size, size), dtype=np.float64)
    if fake:
        half = size // 2
        y0 = half * (quadrant // 2)
        x0 = half * (quadrant % 2)
        parity = (xs.astype(np.int64) + ys.astype(np.int64)) % 2
        checker = np.where(parity == 0, CHECKER_AMPLITUDE, -CHECKER_AMPLITUDE)
        patch[y0 : y0 + half, x0 : x0 + half] = checker[y0 : y0 + half, x0 : x0 + half]

    for t in range(n_frames):
        frame = np.empty((size, size, 3), dtype=np.uint8)
        for ch in range(3):
            values = offsets[ch] + ramp + drifts[ch] * t + patch
            frame[:, :, ch] = np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
        write_frame(frame, out_dir / f"{t:06d}.png")


def generate_fixture(
    out_dir: str | Path,
    n_real: int,
    n_fake: int,
    seed: int,
    n_frames: int = 16,
    size: int = 64,
) -> Path:
    """Write the fixture dataset and return the manifest path."""
    if n_real < 1 or n_fake < 1:
        raise ValueError("need at least one real and one fake video")
    if n_frames < 1 or size < 8:
        raise ValueError("n_frames must be >= 1 and size >= 8")
    out_dir = Path(out_dir)
    records = []
    for label, count in (("real", n_real), ("fake", n_fake)):
        for i in range(count):
            video_id = f"{label}_{i:03d}"
            frames_dir = out_dir / "frames" / video_id
            _render_video(frames_dir, video_id, label == "fake", seed, n_frames, size)
            records.append(
                VideoRecord(
                    id=video_id,
                    frames_dir=Path("frames") / video_id,
                    n_frames=n_frames,
                    width=size,
                    height=size,
                    fps=24.0,
                    label=label,
                    split="test",
                )
            )
    manifest_path = out_dir / "manifest.jsonl"
    save_manifest(Manifest(dataset_name="fixture", videos=records), manifest_path)
    return manifest_path
