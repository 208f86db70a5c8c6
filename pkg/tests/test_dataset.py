import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forgebench.dataset import (
    Manifest,
    VideoRecord,
    load_manifest,
    read_frame,
    sample_frame_indices,
    save_manifest,
    write_frame,
)
from forgebench.errors import FrameError, ManifestError

from conftest import random_frame


def make_record(tmp_path: Path, video_id="v001", label="real", split="test", **kw) -> dict:
    rec = {
        "id": video_id,
        "frames_dir": str(tmp_path / video_id),
        "n_frames": 2,
        "width": 8,
        "height": 6,
        "fps": 24.0,
        "label": label,
        "split": split,
    }
    rec.update(kw)
    return rec


def write_manifest(tmp_path: Path, records: list[dict]) -> Path:
    path = tmp_path / "manifest.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    return path


class TestLoadManifest:
    def test_two_valid_lines(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real"),
                make_record(tmp_path, "v002", label="fake"),
            ],
        )
        manifest = load_manifest(path)
        assert [v.id for v in manifest.videos] == ["v001", "v002"]
        assert manifest.dataset_name == "manifest"

    def test_duplicate_id_names_offender(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real"),
                make_record(tmp_path, "v001", label="fake"),
            ],
        )
        with pytest.raises(ManifestError, match="v001"):
            load_manifest(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        path.write_text("")
        with pytest.raises(ManifestError, match="no videos"):
            load_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError, match="not found"):
            load_manifest(tmp_path / "absent.jsonl")

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        good = json.dumps(make_record(tmp_path, "v001"))
        path.write_text(good + "\n{broken\n")
        with pytest.raises(ManifestError, match="line 2"):
            load_manifest(path)

    def test_invalid_label_and_split(self, tmp_path):
        path = write_manifest(tmp_path, [make_record(tmp_path, label="synthetic")])
        with pytest.raises(ManifestError, match="label"):
            load_manifest(path)
        path = write_manifest(tmp_path, [make_record(tmp_path, split="holdout")])
        with pytest.raises(ManifestError, match="split"):
            load_manifest(path)

    def test_test_split_needs_both_classes(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real"),
                make_record(tmp_path, "v002", label="real"),
            ],
        )
        with pytest.raises(ManifestError, match="real and one fake"):
            load_manifest(path)

    def test_pure_function_of_file_bytes(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real"),
                make_record(tmp_path, "v002", label="fake"),
            ],
        )
        assert load_manifest(path) == load_manifest(path)

    def test_verify_frames_reports_missing(self, tmp_path):
        record = make_record(tmp_path, "v001", label="real")
        path = write_manifest(
            tmp_path, [record, make_record(tmp_path, "v002", label="fake")]
        )
        with pytest.raises(ManifestError, match="missing frame"):
            load_manifest(path, verify_frames=True)

    def test_fps_accepts_decimal_string_or_number(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real", fps="29.97"),
                make_record(tmp_path, "v002", label="fake", fps=24),
            ],
        )
        manifest = load_manifest(path)
        assert manifest.videos[0].fps == pytest.approx(29.97)
        assert manifest.videos[1].fps == 24.0

    def test_unknown_fields_rejected(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real", codec="h264"),
                make_record(tmp_path, "v002", label="fake"),
            ],
        )
        with pytest.raises(ManifestError, match="unknown fields"):
            load_manifest(path)

    def test_relative_frames_dir_resolved_against_manifest(self, tmp_path):
        record = make_record(tmp_path, "v001", label="real", frames_dir="frames/v001")
        path = write_manifest(
            tmp_path, [record, make_record(tmp_path, "v002", label="fake")]
        )
        manifest = load_manifest(path)
        assert manifest.videos[0].frames_dir == tmp_path / "frames/v001"

    def test_round_trip_save_load(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                make_record(tmp_path, "v001", label="real"),
                make_record(tmp_path, "v002", label="fake"),
            ],
        )
        manifest = load_manifest(path)
        out = tmp_path / "copy.jsonl"
        save_manifest(manifest, out)
        assert load_manifest(out).videos == manifest.videos


class TestSampleFrameIndices:
    def test_formula_100_over_32(self):
        expected = [(i * 100) // 32 for i in range(32)]
        assert sample_frame_indices(100, 32) == expected
        assert expected[:4] == [0, 3, 6, 9]
        assert expected[-1] == 96

    def test_k_at_least_n_returns_all(self):
        assert sample_frame_indices(10, 32) == list(range(10))
        assert sample_frame_indices(32, 32) == list(range(32))

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            sample_frame_indices(0, 4)
        with pytest.raises(ValueError):
            sample_frame_indices(4, 0)

    @given(n=st.integers(1, 5000), k=st.integers(1, 200))
    @settings(max_examples=200)
    def test_min_n_k_distinct_sorted_in_range(self, n, k):
        indices = sample_frame_indices(n, k)
        assert len(indices) == min(n, k)
        assert len(set(indices)) == len(indices)
        assert indices == sorted(indices)
        assert all(0 <= i < n for i in indices)


class TestFrameIO:
    def test_round_trip_random_rasters(self, rng, tmp_path):
        # >= 100 random rasters, bit-exact both ways.
        for trial in range(100):
            h = int(rng.integers(1, 24))
            w = int(rng.integers(1, 24))
            frame = random_frame(rng, h, w)
            path = tmp_path / f"{trial:06d}.png"
            write_frame(frame, path)
            record = VideoRecord(
                id="t", frames_dir=tmp_path, n_frames=trial + 1,
                width=w, height=h, fps=1.0, label="real", split="test",
            )
            assert np.array_equal(read_frame(record, trial), frame)

    def test_one_pixel_round_trip(self, tmp_path):
        frame = np.array([[[0, 128, 255]]], dtype=np.uint8)
        write_frame(frame, tmp_path / "000000.png")
        record = VideoRecord(
            id="t", frames_dir=tmp_path, n_frames=1,
            width=1, height=1, fps=1.0, label="real", split="test",
        )
        assert np.array_equal(read_frame(record, 0), frame)

    def test_out_of_range_index(self, tmp_path):
        record = VideoRecord(
            id="t", frames_dir=tmp_path, n_frames=1,
            width=1, height=1, fps=1.0, label="real", split="test",
        )
        with pytest.raises(FrameError, match="out of range"):
            read_frame(record, 1)

    def test_dimension_mismatch(self, rng, tmp_path):
        write_frame(random_frame(rng, 4, 4), tmp_path / "000000.png")
        record = VideoRecord(
            id="t", frames_dir=tmp_path, n_frames=1,
            width=8, height=8, fps=1.0, label="real", split="test",
        )
        with pytest.raises(FrameError, match="do not match"):
            read_frame(record, 0)

    def test_non_rgb_rejected(self, tmp_path):
        from PIL import Image

        Image.new("L", (4, 4)).save(tmp_path / "000000.png")
        record = VideoRecord(
            id="t", frames_dir=tmp_path, n_frames=1,
            width=4, height=4, fps=1.0, label="real", split="test",
        )
        with pytest.raises(FrameError, match="RGB"):
            read_frame(record, 0)

    def test_unwritable_path(self, rng):
        with pytest.raises((FrameError, OSError)):
            write_frame(random_frame(rng, 2, 2), "/proc/forbidden/x.png")

    def test_write_rejects_bad_arrays(self):
        with pytest.raises(ValueError):
            write_frame(np.zeros((4, 4), dtype=np.uint8), "x.png")


def test_manifest_validate_duplicate():
    rec = VideoRecord(
        id="a", frames_dir=Path("a"), n_frames=1, width=1, height=1,
        fps=1.0, label="real", split="test",
    )
    manifest = Manifest(dataset_name="d", videos=[rec, rec])
    with pytest.raises(ManifestError, match="duplicate"):
        manifest.validate()
