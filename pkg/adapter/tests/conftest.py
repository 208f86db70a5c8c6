from pathlib import Path

import pytest
from PIL import Image


def write_png(path: Path, color: tuple[int, int, int], size: int = 8) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (size, size), color).save(path, format="PNG")
    return path


@pytest.fixture
def frame_dir(tmp_path) -> Path:
    colors = [(0, 0, 0), (255, 255, 255), (10, 128, 200)]
    for i, color in enumerate(colors):
        write_png(tmp_path / f"{i:06d}.png", color)
    return tmp_path
