"""Kernel backend selection.

The compiled extension is preferred when importable; the pure backend is
a bit-identical fallback. FORGEBENCH_BACKEND=pure forces the fallback,
FORGEBENCH_BACKEND=ext demands the extension (ImportError if missing).
"""

from __future__ import annotations

import os

from forgebench.kernels import pure

_KERNEL_NAMES = (
    "gaussian_noise_u8",
    "grayscale_u8",
    "sepia_u8",
    "box_downscale_u8",
    "laplacian_mean",
)


def _load_backend() -> tuple[str, object]:
    choice = os.environ.get("FORGEBENCH_BACKEND", "").strip().lower()
    if choice in ("pure", "python"):
        return "pure", pure
    try:
        from forgebench import _kernels
    except ImportError:
        if choice == "ext":
            raise ImportError(
                "FORGEBENCH_BACKEND=ext but the compiled extension is not available"
            )
        return "pure", pure
    return "ext", _kernels


BACKEND, _impl = _load_backend()

gaussian_noise_u8 = _impl.gaussian_noise_u8
grayscale_u8 = _impl.grayscale_u8
sepia_u8 = _impl.sepia_u8
box_downscale_u8 = _impl.box_downscale_u8
laplacian_mean = _impl.laplacian_mean

__all__ = ["BACKEND", *_KERNEL_NAMES]
