"""Built-in scoring hooks.

A hook takes the raw bytes of one frame file and returns a score; the
server clamps the result to [0, 1]. Real detectors plug in the same way:
decode, preprocess, and run the model inside the hook.
"""

from __future__ import annotations

import io

from PIL import Image


def mean_green(frame_bytes: bytes) -> float:
    """Stub detector: mean green-channel value scaled to [0, 1]."""
    with Image.open(io.BytesIO(frame_bytes)) as img:
        green = img.convert("RGB").getchannel("G")
        histogram = green.histogram()
    total = sum(value * count for value, count in enumerate(histogram))
    pixels = sum(histogram)
    return total / (255.0 * pixels)
