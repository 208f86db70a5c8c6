"""The twelve canonical perturbation operations and their registry.

Frame-level operations (flips, brightness, contrast, grayscale, vintage,
noise, downscale) are bit-reproducible pixel transforms; the two
compression operations re-enter the codec world and are delegated to
forgebench.codec.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from forgebench import codec as codec_bridge
from forgebench import kernels
from forgebench.dataset import VideoRecord, read_frame, write_frame
from forgebench.rng import GOLDEN_GAMMA, MASK64, fnv1a64, splitmix64

CATEGORY_ORDER = (
    "Compression",
    "Brightness",
    "Contrast",
    "GaussianNoise",
    "Flipping",
    "Resolution",
    "Grayscale",
    "VintageFilter",
)

CATEGORY_DISPLAY = {
    "Compression": "Compression",
    "Brightness": "Brightness",
    "Contrast": "Contrast",
    "GaussianNoise": "Gaussian Noise",
    "Flipping": "Flipping",
    "Resolution": "Resolution",
    "Grayscale": "Grayscale",
    "VintageFilter": "Vintage Filter",
}


@dataclass(frozen=True)
class OperationInfo:
    op_id: str
    category: str
    variant: str  # column label within the category group
    defaults: Mapping[str, float]
    seeded: bool = False


# Canonical registry, in report column order.
OPERATIONS: dict[str, OperationInfo] = {
    op.op_id: op
    for op in (
        OperationInfo("c23", "Compression", "C23", {"crf": 23}),
        OperationInfo("c40", "Compression", "C40", {"crf": 40}),
        OperationInfo("bright_up", "Brightness", "Increase", {"delta": 38}),
        OperationInfo("bright_down", "Brightness", "Decrease", {"delta": -38}),
        OperationInfo("contrast", "Contrast", "Contrast", {"scale": 1.3}),
        OperationInfo("noise", "GaussianNoise", "Gaussian Noise", {"sigma": 15.0}, seeded=True),
        OperationInfo("flip_h", "Flipping", "Horizontal", {}),
        OperationInfo("flip_v", "Flipping", "Vertical", {}),
        OperationInfo("res_x2", "Resolution", "x2", {"factor": 2}),
        OperationInfo("res_x4", "Resolution", "x4", {"factor": 4}),
        OperationInfo("grayscale", "Grayscale", "Grayscale", {}),
        OperationInfo("vintage", "VintageFilter", "Vintage Filter", {}),
    )
}

CANONICAL_OP_IDS = tuple(OPERATIONS)
CODEC_OP_IDS = ("c23", "c40")


@dataclass(frozen=True)
class PerturbationSpec:
    """One operation instance: id, category, concrete parameters."""

    op_id: str
    category: str
    params: dict[str, float] = field(default_factory=dict)
    seeded: bool = False


def _validate_params(op_id: str, params: dict[str, float]) -> None:
    if op_id in ("bright_up", "bright_down"):
        delta = params["delta"]
        if float(delta) != int(delta):
            raise ValueError(f"{op_id}: delta must be an integer")
        if not -255 <= delta <= 255:
            raise ValueError(f"{op_id}: delta {delta} outside [-255, 255]")
    elif op_id == "contrast":
        scale = params["scale"]
        if not 0 < scale <= 10:
            raise ValueError(f"{op_id}: scale {scale} outside (0, 10]")
    elif op_id == "noise":
        if params["sigma"] < 0:
            raise ValueError(f"{op_id}: sigma must be non-negative")
    elif op_id in ("res_x2", "res_x4"):
        if params["factor"] not in (2, 4):
            raise ValueError(f"{op_id}: factor must be 2 or 4")
    elif op_id in CODEC_OP_IDS:
        crf = params["crf"]
        if not (isinstance(crf, int) or float(crf).is_integer()) or not 0 <= crf <= 51:
            raise ValueError(f"{op_id}: crf must be an integer in [0, 51]")


def make_spec(op_id: str, params: Mapping[str, float] | None = None) -> PerturbationSpec:
    """Build a validated spec for a canonical operation, with overrides."""
    try:
        info = OPERATIONS[op_id]
    except KeyError:
        raise ValueError(f"unknown operation id {op_id!r}") from None
    merged = dict(info.defaults)
    if params:
        unknown = set(params) - set(info.defaults)
        if unknown:
            raise ValueError(f"{op_id}: unknown parameters {sorted(unknown)}")
        merged.update(params)
    _validate_params(op_id, merged)
    return PerturbationSpec(op_id=op_id, category=info.category, params=merged, seeded=info.seeded)


def canonical_specs() -> list[PerturbationSpec]:
    return [make_spec(op_id) for op_id in CANONICAL_OP_IDS]


# --- seed derivation -------------------------------------------------------


@dataclass(frozen=True)
class SeedContext:
    global_seed: int
    video_id: str
    op_id: str
    frame_index: int


def derive_frame_seed(ctx: SeedContext) -> int:
    """Per-frame noise seed: SplitMix64 scramble of hashed identifiers."""
    mixed = (
        (ctx.global_seed & MASK64)
        ^ fnv1a64(ctx.video_id)
        ^ fnv1a64(ctx.op_id)
        ^ ((ctx.frame_index * GOLDEN_GAMMA) & MASK64)
    )
    return splitmix64(mixed)


# --- frame-level operators -------------------------------------------------


def _check_frame(frame: np.ndarray) -> None:
    if not isinstance(frame, np.ndarray) or frame.dtype != np.uint8 \
            or frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("frame must be an (h, w, 3) uint8 array")


def flip_horizontal(frame: np.ndarray) -> np.ndarray:
    _check_frame(frame)
    return np.ascontiguousarray(frame[:, ::-1, :])


def flip_vertical(frame: np.ndarray) -> np.ndarray:
    _check_frame(frame)
    return np.ascontiguousarray(frame[::-1, :, :])


def adjust_brightness(frame: np.ndarray, delta: int) -> np.ndarray:
    """Per-channel v + delta, clamped to [0, 255]."""
    _check_frame(frame)
    if not -255 <= delta <= 255:
        raise ValueError(f"delta {delta} outside [-255, 255]")
    shifted = frame.astype(np.int16) + int(delta)
    return np.clip(shifted, 0, 255).astype(np.uint8)


def _contrast_lut(scale: float) -> np.ndarray:
    lut = np.empty(256, dtype=np.uint8)
    for v in range(256):
        mapped = scale * (v - 128.0) + 128.0
        rounded = np.floor(mapped + 0.5) if mapped >= 0.0 else np.ceil(mapped - 0.5)
        lut[v] = min(255, max(0, int(rounded)))
    return lut


def adjust_contrast(frame: np.ndarray, scale: float) -> np.ndarray:
    """Affine stretch around mid-gray 128, rounded half away from zero."""
    _check_frame(frame)
    if not 0 < scale <= 10:
        raise ValueError(f"scale {scale} outside (0, 10]")
    return _contrast_lut(float(scale))[frame]


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    _check_frame(frame)
    return kernels.grayscale_u8(frame)


def vintage(frame: np.ndarray) -> np.ndarray:
    _check_frame(frame)
    return kernels.sepia_u8(frame)


def gaussian_noise(frame: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Additive per-channel Gaussian noise from the pinned PRNG stream."""
    _check_frame(frame)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return frame.copy()
    return kernels.gaussian_noise_u8(frame, float(sigma), seed & MASK64)


def downscale(frame: np.ndarray, factor: int) -> np.ndarray:
    """Box-filter reduction by an integer factor (2 or 4)."""
    _check_frame(frame)
    if factor not in (2, 4):
        raise ValueError("factor must be 2 or 4")
    if frame.shape[0] < factor or frame.shape[1] < factor:
        raise ValueError(
            f"frame {frame.shape[1]}x{frame.shape[0]} smaller than factor {factor}"
        )
    return kernels.box_downscale_u8(frame, factor)


def apply_frame_op(spec: PerturbationSpec, frame: np.ndarray, seed: int | None = None) -> np.ndarray:
    """Apply a non-codec operation to a single frame."""
    op = spec.op_id
    if op == "flip_h":
        return flip_horizontal(frame)
    if op == "flip_v":
        return flip_vertical(frame)
    if op in ("bright_up", "bright_down"):
        return adjust_brightness(frame, int(spec.params["delta"]))
    if op == "contrast":
        return adjust_contrast(frame, spec.params["scale"])
    if op == "grayscale":
        return to_grayscale(frame)
    if op == "vintage":
        return vintage(frame)
    if op == "noise":
        if seed is None:
            raise ValueError("noise requires a per-frame seed")
        return gaussian_noise(frame, spec.params["sigma"], seed)
    if op in ("res_x2", "res_x4"):
        return downscale(frame, int(spec.params["factor"]))
    raise ValueError(f"operation {op!r} is not a frame-level transform")


def output_dims(spec: PerturbationSpec, width: int, height: int) -> tuple[int, int]:
    """Output frame dimensions for a video of the given size."""
    if spec.op_id in ("res_x2", "res_x4"):
        factor = int(spec.params["factor"])
        return width // factor, height // factor
    return width, height


def apply_operation(
    video: VideoRecord,
    spec: PerturbationSpec,
    global_seed: int,
    out_dir: str | Path,
    codec_config: "codec_bridge.CodecConfig | None" = None,
    force: bool = False,
) -> VideoRecord:
    """Transform every frame of a video into out_dir, returning the new record.

    Codec operations (c23/c40) round-trip the whole sequence through the
    external encoder; everything else is applied frame by frame.
    """
    out_dir = Path(out_dir)
    if out_dir.resolve() == Path(video.frames_dir).resolve():
        raise ValueError("out_dir must differ from the source frames_dir")
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise FileExistsError(f"output directory not empty: {out_dir}")
        shutil.rmtree(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if spec.op_id in CODEC_OP_IDS:
        cfg = codec_config if codec_config is not None else codec_bridge.CodecConfig()
        return codec_bridge.compress_roundtrip(video, int(spec.params["crf"]), cfg, out_dir)

    new_width, new_height = output_dims(spec, video.width, video.height)
    for index in range(video.n_frames):
        frame = read_frame(video, index)
        seed = None
        if spec.seeded:
            seed = derive_frame_seed(
                SeedContext(global_seed, video.id, spec.op_id, index)
            )
        write_frame(apply_frame_op(spec, frame, seed), out_dir / f"{index:06d}.png")
    return replace(video, frames_dir=out_dir, width=new_width, height=new_height)
