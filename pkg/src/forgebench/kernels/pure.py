"""Pure numpy/Python pixel kernels: fallback twin of the compiled extension.

Bit-exactness contract with forgebench._kernels:
- all float math is float64 with the same operation order (numpy does not
  fuse separate elementwise ops, and the extension is built with FP
  contraction disabled);
- rounding is floor(x + 0.5) for x >= 0 and ceil(x - 0.5) otherwise;
- scalar reductions are exact integer sums, so they cannot depend on
  element order;
- the noise stream is the same xoshiro256++ / Box-Muller sequence, walked
  pixel by pixel, channel by channel.
"""

from __future__ import annotations

import math

import numpy as np

from forgebench.rng import Xoshiro256pp

_TWO_PI = 2.0 * math.pi


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.where(values >= 0.0, np.floor(values + 0.5), np.ceil(values - 0.5))


def gaussian_noise_u8(frame: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Additive Gaussian noise, xoshiro256++ stream from `seed`, Box-Muller."""
    rng = Xoshiro256pp(seed)
    flat = frame.ravel().tolist()
    out = bytearray(len(flat))
    cached = 0.0
    have_cached = False
    sqrt = math.sqrt
    log = math.log
    cos = math.cos
    sin = math.sin
    for i, v in enumerate(flat):
        if have_cached:
            z = cached
            have_cached = False
        else:
            u1 = rng.uniform()
            u2 = rng.uniform()
            r = sqrt(-2.0 * log(u1))
            z = r * cos(_TWO_PI * u2)
            cached = r * sin(_TWO_PI * u2)
            have_cached = True
        val = v + sigma * z
        val = math.floor(val + 0.5) if val >= 0.0 else math.ceil(val - 0.5)
        out[i] = 0 if val < 0.0 else (255 if val > 255.0 else int(val))
    return np.frombuffer(bytes(out), dtype=np.uint8).reshape(frame.shape)


def grayscale_u8(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half away from zero, replicated to all channels."""
    r = frame[:, :, 0].astype(np.float64)
    g = frame[:, :, 1].astype(np.float64)
    b = frame[:, :, 2].astype(np.float64)
    luma = (0.299 * r + 0.587 * g) + 0.114 * b
    gray = np.clip(_round_half_away(luma), 0.0, 255.0).astype(np.uint8)
    return np.repeat(gray[:, :, np.newaxis], 3, axis=2)


def sepia_u8(frame: np.ndarray) -> np.ndarray:
    """Fixed sepia color matrix, rounded half away from zero, clamped."""
    r = frame[:, :, 0].astype(np.float64)
    g = frame[:, :, 1].astype(np.float64)
    b = frame[:, :, 2].astype(np.float64)
    out = np.empty(frame.shape[:2] + (3,), dtype=np.uint8)
    for ch, (cr, cg, cb) in enumerate(
        [(0.393, 0.769, 0.189), (0.349, 0.686, 0.168), (0.272, 0.534, 0.131)]
    ):
        mixed = (cr * r + cg * g) + cb * b
        out[:, :, ch] = np.clip(_round_half_away(mixed), 0.0, 255.0).astype(np.uint8)
    return out


def box_downscale_u8(frame: np.ndarray, factor: int) -> np.ndarray:
    """Box-filter downscale; right/bottom remainder rows and columns dropped."""
    h = frame.shape[0] // factor
    w = frame.shape[1] // factor
    cropped = frame[: h * factor, : w * factor, :].astype(np.int64)
    sums = cropped.reshape(h, factor, w, factor, 3).sum(axis=(1, 3))
    means = sums / float(factor * factor)
    return np.clip(_round_half_away(means), 0.0, 255.0).astype(np.uint8)


def laplacian_mean(frame: np.ndarray) -> float:
    """Mean |4L - left - right - up - down| over interior BT.601 luma.

    The luma weights are exact thousandths, so the reduction runs in
    int64 (luma in thousandths of a gray level) with one final division.
    Exact, hence permutation-invariant under mirroring.
    """
    h, w = frame.shape[0], frame.shape[1]
    if h < 3 or w < 3:
        raise ValueError("frame must be at least 3x3")
    channels = frame.astype(np.int64)
    luma = 299 * channels[:, :, 0] + 587 * channels[:, :, 1] + 114 * channels[:, :, 2]
    field = np.abs(
        4 * luma[1:-1, 1:-1]
        - luma[1:-1, :-2]
        - luma[1:-1, 2:]
        - luma[:-2, 1:-1]
        - luma[2:, 1:-1]
    )
    return float(int(field.sum())) / (1000.0 * float((h - 2) * (w - 2)))
