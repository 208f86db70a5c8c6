"""External codec bridge for the two compression operations.

The encoder/decoder is an external command described by templates with
placeholders, so the harness never links a codec. A compression
operation is: encode the lossless frame sequence at a given CRF, decode
straight back to frames. No golden-pixel guarantees are made across
encoder versions; callers rely on structural and distortion-ordering
properties only.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np
from PIL import Image

from forgebench.dataset import VideoRecord
from forgebench.errors import CodecError

ENCODER_ENV = "FORGEBENCH_ENCODER"

DEFAULT_ENCODE_TEMPLATE = (
    "ffmpeg -hide_banner -loglevel error -y -framerate {fps} -i {input_pattern} "
    "-c:v libx264 -crf {crf} -preset medium -pix_fmt yuv420p {output_file}"
)
DEFAULT_DECODE_TEMPLATE = (
    "ffmpeg -hide_banner -loglevel error -y -i {input_file} -start_number 0 {output_pattern}"
)

_ENCODE_PLACEHOLDERS = ("{input_pattern}", "{fps}", "{crf}", "{output_file}")
_DECODE_PLACEHOLDERS = ("{input_file}", "{output_pattern}")


@dataclass(frozen=True)
class CodecConfig:
    encode_template: str = DEFAULT_ENCODE_TEMPLATE
    decode_template: str = DEFAULT_DECODE_TEMPLATE
    timeout: float = 300.0

    def validate(self) -> None:
        for ph in _ENCODE_PLACEHOLDERS:
            if ph not in self.encode_template:
                raise CodecError(f"encode template missing placeholder {ph}")
        for ph in _DECODE_PLACEHOLDERS:
            if ph not in self.decode_template:
                raise CodecError(f"decode template missing placeholder {ph}")
        if self.timeout <= 0:
            raise CodecError("timeout must be positive")


def _expand(template: str, substitutions: dict[str, str]) -> list[str]:
    """Split the template, then substitute placeholders inside each token."""
    argv = []
    for token in shlex.split(template):
        for placeholder, value in substitutions.items():
            token = token.replace(placeholder, value)
        argv.append(token)
    override = os.environ.get(ENCODER_ENV)
    if override:
        argv[0] = override
    return argv


def encoder_tool(cfg: CodecConfig) -> str:
    """The executable the encode template resolves to (after env override)."""
    return _expand(cfg.encode_template, {})[0]


def encoder_available(cfg: CodecConfig | None = None) -> bool:
    cfg = cfg if cfg is not None else CodecConfig()
    return shutil.which(encoder_tool(cfg)) is not None


def _run(argv: list[str], cwd: Path, timeout: float) -> None:
    try:
        proc = subprocess.run(
            argv,
            cwd=cwd,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=timeout,
        )
    except FileNotFoundError:
        raise CodecError(f"codec tool not found: {argv[0]!r}") from None
    except subprocess.TimeoutExpired:
        raise CodecError(
            f"codec command timed out after {timeout:.0f}s: {' '.join(argv)}"
        ) from None
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise CodecError(
            f"codec command failed (exit {proc.returncode}): {' '.join(argv)}\n{stderr}"
        )


def _format_fps(fps: float) -> str:
    return f"{fps:g}"


def tool_version(cfg: CodecConfig, timeout: float = 10.0) -> str:
    """First line of `<tool> -version`, or empty string if unavailable."""
    tool = encoder_tool(cfg)
    try:
        proc = subprocess.run(
            [tool, "-version"],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=timeout,
        )
    except (FileNotFoundError, subprocess.TimeoutExpired):
        return ""
    first = proc.stdout.decode("utf-8", "replace").splitlines()
    return first[0].strip() if first else ""


def _check_decoded_frames(frames_dir: Path, video: VideoRecord) -> None:
    produced = sorted(frames_dir.glob("*.png"))
    if len(produced) != video.n_frames:
        raise CodecError(
            f"round-trip frame count mismatch for {video.id!r}: "
            f"expected {video.n_frames}, decoded {len(produced)} "
            "(check the codec templates)"
        )
    for path in produced:
        with Image.open(path) as img:
            if img.size != (video.width, video.height):
                raise CodecError(
                    f"round-trip dimension mismatch for {video.id!r}: "
                    f"{path.name} is {img.size[0]}x{img.size[1]}, "
                    f"expected {video.width}x{video.height}"
                )


def compress_roundtrip(
    video: VideoRecord, crf: int, cfg: CodecConfig, out_dir: str | Path
) -> VideoRecord:
    """Encode the frame sequence at the given CRF and decode it back.

    Works in a private temp directory, then renames the decoded sequence
    into out_dir (which must be empty or absent).
    """
    cfg.validate()
    if not 0 <= int(crf) <= 51:
        raise CodecError(f"crf {crf} outside [0, 51]")
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)

    tmp = Path(tempfile.mkdtemp(prefix=".codec-", dir=out_dir.parent))
    try:
        encoded = tmp / "encoded.bin"
        decoded = tmp / "decoded"
        decoded.mkdir()
        encode_argv = _expand(
            cfg.encode_template,
            {
                "{input_pattern}": str(Path(video.frames_dir) / "%06d.png"),
                "{fps}": _format_fps(video.fps),
                "{crf}": str(int(crf)),
                "{output_file}": str(encoded),
            },
        )
        _run(encode_argv, cwd=tmp, timeout=cfg.timeout)
        if not encoded.exists():
            raise CodecError(f"encoder produced no output file: {' '.join(encode_argv)}")
        decode_argv = _expand(
            cfg.decode_template,
            {
                "{input_file}": str(encoded),
                "{output_pattern}": str(decoded / "%06d.png"),
            },
        )
        _run(decode_argv, cwd=tmp, timeout=cfg.timeout)
        _check_decoded_frames(decoded, video)
        if out_dir.exists():
            if any(out_dir.iterdir()):
                raise CodecError(f"output directory not empty: {out_dir}")
            out_dir.rmdir()
        os.rename(decoded, out_dir)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return dc_replace(video, frames_dir=out_dir)


def frames_mean_abs_error(dir_a: str | Path, dir_b: str | Path, n_frames: int) -> float:
    """Mean absolute per-pixel error between two equal-length frame sequences."""
    total = 0.0
    count = 0
    for index in range(n_frames):
        name = f"{index:06d}.png"
        with Image.open(Path(dir_a) / name) as img_a:
            a = np.asarray(img_a, dtype=np.float64)
        with Image.open(Path(dir_b) / name) as img_b:
            b = np.asarray(img_b, dtype=np.float64)
        if a.shape != b.shape:
            raise CodecError(f"frame {name}: shape mismatch {a.shape} vs {b.shape}")
        total += float(np.abs(a - b).sum())
        count += a.size
    return total / count


@dataclass(frozen=True)
class CodecReport:
    ok: bool
    tool: str
    version: str
    mean_abs_error: float
    message: str


def validate_codec(cfg: CodecConfig, crf: int = 23) -> CodecReport:
    """Round-trip a tiny synthetic clip to prove the codec config works."""
    cfg.validate()
    tool = encoder_tool(cfg)
    version = tool_version(cfg)
    workdir = Path(tempfile.mkdtemp(prefix=".codec-check-"))
    try:
        src = workdir / "src"
        src.mkdir()
        n_frames, size = 4, 64
        for index in range(n_frames):
            base = np.linspace(0, 200, size, dtype=np.float64)
            frame = np.empty((size, size, 3), dtype=np.uint8)
            frame[:, :, 0] = (base[np.newaxis, :] + 10 * index).astype(np.uint8)
            frame[:, :, 1] = (base[:, np.newaxis] + 5 * index).astype(np.uint8)
            frame[:, :, 2] = 128
            Image.fromarray(frame, "RGB").save(src / f"{index:06d}.png")
        probe = VideoRecord(
            id="codec-probe",
            frames_dir=src,
            n_frames=n_frames,
            width=size,
            height=size,
            fps=10.0,
            label="real",
            split="test",
        )
        result = compress_roundtrip(probe, crf, cfg, workdir / "out")
        mae = frames_mean_abs_error(src, result.frames_dir, n_frames)
        return CodecReport(
            ok=True,
            tool=tool,
            version=version,
            mean_abs_error=mae,
            message=f"round-trip ok, mean abs error {mae:.3f}",
        )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)
