import sys
from pathlib import Path

import numpy as np
import pytest

HELPERS = Path(__file__).parent / "helpers"

PY = sys.executable


def toy_scorer_cmd(mode: str = "ok", name: str = "toy-scorer") -> str:
    return f"{PY} {HELPERS / 'toy_scorer.py'} --mode {mode} --name {name}"


def fake_codec_templates(
    drop_frame: bool = False, sleep: float = 0.0, fail: str = ""
) -> tuple[str, str]:
    """Codec templates backed by the quantizing stub codec."""
    tool = f"{PY} {HELPERS / 'fake_codec.py'}"
    encode_extras = ""
    decode_extras = ""
    if fail == "encode":
        encode_extras += " --fail"
    if fail == "decode":
        decode_extras += " --fail"
    if sleep:
        encode_extras += f" --sleep {sleep}"
    if drop_frame:
        decode_extras += " --drop-frame"
    encode = (
        f"{tool} encode --pattern {{input_pattern}} --fps {{fps}} "
        f"--crf {{crf}} --file {{output_file}}{encode_extras}"
    )
    decode = (
        f"{tool} decode --file {{input_file}} "
        f"--pattern {{output_pattern}}{decode_extras}"
    )
    return encode, decode


def random_frame(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    return rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240 + 813)


@pytest.fixture(scope="session")
def small_fixture_dataset(tmp_path_factory):
    """A tiny generated dataset shared by pipeline-level tests."""
    from forgebench.fixture import generate_fixture

    root = tmp_path_factory.mktemp("fixture-data")
    manifest_path = generate_fixture(root, n_real=3, n_fake=3, seed=11, n_frames=4, size=32)
    return manifest_path
