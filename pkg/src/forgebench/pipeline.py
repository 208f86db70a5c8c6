"""Pipeline stages behind the CLI: perturb -> score -> evaluate.

Every operation gets a complete perturbed copy of the test split (never
a sampled subset). Stage outputs are plain files, so stages can run in
separate invocations; scoring depends only on perturbed frames, and
evaluation depends only on score CSVs plus the manifest.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import platform
import shutil
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import forgebench
from forgebench import codec as codec_bridge
from forgebench import kernels
from forgebench.config import RunConfig
from forgebench.dataset import (
    Manifest,
    VideoRecord,
    load_manifest,
    read_frame,
    sample_frame_indices,
    save_manifest,
)
from forgebench.errors import ConfigError, ForgebenchError, ScoreFileError
from forgebench.metrics import EvalCell, auc
from forgebench.perturb import (
    CODEC_OP_IDS,
    PerturbationSpec,
    apply_operation,
    output_dims,
)
from forgebench.report import EvalReport, emit_category_summary, emit_csv, emit_json, emit_markdown
from forgebench.scorer import (
    BASELINE_NAME,
    FrameScore,
    ScorerProcess,
    baseline_score_frame,
    collate_scores,
    parse_scores_csv,
    write_score_rows,
)

# --- dataset tree layout -----------------------------------------------------


def op_dir(output_root: Path, op_id: str) -> Path:
    return Path(output_root) / op_id


def op_manifest_path(output_root: Path, op_id: str) -> Path:
    return op_dir(output_root, op_id) / "manifest.jsonl"


def video_out_dir(output_root: Path, op_id: str, video_id: str) -> Path:
    return op_dir(output_root, op_id) / f"{video_id}__{op_id}"


def scores_csv_path(output_root: Path, op_id: str) -> Path:
    return Path(output_root) / "scores" / f"{op_id}.csv"


def report_dir(output_root: Path) -> Path:
    return Path(output_root) / "report"


# --- idempotence stamps ------------------------------------------------------


def _stamp_payload(video: VideoRecord, spec: PerturbationSpec, global_seed: int) -> str:
    key = {
        "video_id": video.id,
        "op_id": spec.op_id,
        "params": {k: spec.params[k] for k in sorted(spec.params)},
        # Only seeded operations depend on the global seed.
        "global_seed": global_seed if spec.seeded else None,
    }
    return json.dumps(key, sort_keys=True)


def _stamp_path(output_root: Path, op_id: str, video_id: str) -> Path:
    return op_dir(output_root, op_id) / ".stamps" / f"{video_id}.json"


def _stamp_digest(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _is_complete(out_dir: Path, n_frames: int) -> bool:
    if not out_dir.is_dir():
        return False
    return all((out_dir / f"{i:06d}.png").is_file() for i in range(n_frames))


def _perturbed_record(video: VideoRecord, spec: PerturbationSpec, out_dir: Path) -> VideoRecord:
    width, height = output_dims(spec, video.width, video.height)
    return replace(video, frames_dir=out_dir, width=width, height=height)


def perturb_video_task(
    video: VideoRecord,
    spec: PerturbationSpec,
    global_seed: int,
    output_root: Path,
    codec_config: codec_bridge.CodecConfig,
    force: bool,
) -> tuple[VideoRecord, bool]:
    """Produce (or reuse) one perturbed video copy. Returns (record, reused)."""
    out = video_out_dir(output_root, spec.op_id, video.id)
    stamp_file = _stamp_path(output_root, spec.op_id, video.id)
    digest = _stamp_digest(_stamp_payload(video, spec, global_seed))
    if not force and stamp_file.is_file() and stamp_file.read_text() == digest \
            and _is_complete(out, video.n_frames):
        return _perturbed_record(video, spec, out), True
    if out.exists():
        shutil.rmtree(out)
    record = apply_operation(
        video, spec, global_seed, out, codec_config=codec_config, force=True
    )
    stamp_file.parent.mkdir(parents=True, exist_ok=True)
    stamp_file.write_text(digest)
    return record, False


@dataclass
class PerturbResult:
    op_manifests: dict[str, Path] = field(default_factory=dict)
    skipped_ops: dict[str, str] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    reused_videos: int = 0
    written_videos: int = 0


def split_skipped_ops(config: RunConfig) -> tuple[list[PerturbationSpec], dict[str, str]]:
    """Separate runnable operations from codec ops whose encoder is missing."""
    active = []
    skipped: dict[str, str] = {}
    encoder_ok = codec_bridge.encoder_available(config.codec)
    for spec in config.operations:
        if spec.op_id in CODEC_OP_IDS and not encoder_ok:
            tool = codec_bridge.encoder_tool(config.codec)
            skipped[spec.op_id] = f"encoder not found: {tool!r}"
        else:
            active.append(spec)
    return active, skipped


def run_perturb(config: RunConfig, manifest: Manifest, log=print) -> PerturbResult:
    """Materialize a complete perturbed copy of the test split per operation."""
    test_videos = manifest.split_videos("test")
    if not test_videos:
        raise ConfigError("manifest has no test videos")
    result = PerturbResult()
    active, result.skipped_ops = split_skipped_ops(config)
    for op_id, reason in result.skipped_ops.items():
        log(f"SKIPPED {op_id}: {reason}")

    def one(spec: PerturbationSpec, video: VideoRecord):
        return perturb_video_task(
            video, spec, config.global_seed, config.output_root, config.codec, config.force
        )

    for spec in active:
        records: dict[str, VideoRecord] = {}
        failures: list[str] = []
        if config.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = {
                    pool.submit(
                        perturb_video_task,
                        video,
                        spec,
                        config.global_seed,
                        config.output_root,
                        config.codec,
                        config.force,
                    ): video
                    for video in test_videos
                }
                for future in concurrent.futures.as_completed(futures):
                    video = futures[future]
                    try:
                        record, reused = future.result()
                    except (ForgebenchError, OSError, ValueError) as exc:
                        failures.append(f"{spec.op_id}/{video.id}: {exc}")
                        continue
                    records[video.id] = record
                    result.reused_videos += reused
                    result.written_videos += not reused
        else:
            for video in test_videos:
                try:
                    record, reused = one(spec, video)
                except (ForgebenchError, OSError, ValueError) as exc:
                    failures.append(f"{spec.op_id}/{video.id}: {exc}")
                    continue
                records[video.id] = record
                result.reused_videos += reused
                result.written_videos += not reused
        if failures:
            result.errors.extend(failures)
            log(f"FAILED {spec.op_id}: {len(failures)} video(s), copy aborted")
            continue
        # frames_dir relative to the op manifest keeps the tree relocatable.
        ordered = [
            replace(records[v.id], frames_dir=Path(Path(records[v.id].frames_dir).name))
            for v in test_videos
        ]
        manifest_path = op_manifest_path(config.output_root, spec.op_id)
        save_manifest(Manifest(dataset_name=spec.op_id, videos=ordered), manifest_path)
        result.op_manifests[spec.op_id] = manifest_path
        log(f"ok {spec.op_id}: {len(ordered)} videos")
    return result


# --- scoring -----------------------------------------------------------------


def _score_video_baseline(record: VideoRecord, k: int) -> list[FrameScore]:
    indices = sample_frame_indices(record.n_frames, k)
    return [
        FrameScore(record.id, i, baseline_score_frame(read_frame(record, i)))
        for i in indices
    ]


def _frame_paths(record: VideoRecord, indices: list[int]) -> list[Path]:
    return [record.frame_path(i).resolve() for i in indices]


def score_op_baseline(
    records: list[VideoRecord], k: int, workers: int = 1
) -> list[FrameScore]:
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            scored = pool.map(_score_video_baseline, records, [k] * len(records))
            return [fs for video_scores in scored for fs in video_scores]
    return [fs for record in records for fs in _score_video_baseline(record, k)]


def score_op_protocol(
    records: list[VideoRecord], k: int, command: str, timeout: float, workers: int = 1
) -> list[FrameScore]:
    """Score with a pool of scorer processes, one per worker thread."""
    local = threading.local()
    processes: list[ScorerProcess] = []
    lock = threading.Lock()

    def get_process() -> ScorerProcess:
        proc = getattr(local, "proc", None)
        if proc is None:
            proc = ScorerProcess(command, timeout=timeout)
            local.proc = proc
            with lock:
                processes.append(proc)
        return proc

    def score_one(record: VideoRecord) -> list[FrameScore]:
        indices = sample_frame_indices(record.n_frames, k)
        scores = get_process().score_frames(_frame_paths(record, indices))
        return [FrameScore(record.id, i, s) for i, s in zip(indices, scores)]

    try:
        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                scored = list(pool.map(score_one, records))
        else:
            scored = [score_one(record) for record in records]
    finally:
        for proc in processes:
            proc.close()
    return [fs for video_scores in scored for fs in video_scores]


def _codec_skip_reason(config: RunConfig, op_id: str) -> str | None:
    """Skip marker for codec ops that cannot have been materialized here."""
    if op_id in CODEC_OP_IDS and not codec_bridge.encoder_available(config.codec):
        return f"encoder not found: {codec_bridge.encoder_tool(config.codec)!r}"
    return None


def run_score(
    config: RunConfig, manifest: Manifest, log=print
) -> tuple[dict[str, Path], dict[str, str]]:
    """Produce one score CSV per operation; returns (csv paths, skipped ops)."""
    outputs: dict[str, Path] = {}
    skipped: dict[str, str] = {}

    if config.scorer_mode == "file":
        rows = parse_scores_csv(config.scores_path)
        present = set(rows.op_ids())
        for spec in config.operations:
            if spec.op_id not in present:
                raise ScoreFileError(
                    f"score file has no rows for operation {spec.op_id!r}"
                )
            per_op = [
                (op, video_id, idx, score)
                for (op, video_id), entries in rows.frame_rows.items()
                if op == spec.op_id
                for idx, score in entries
            ]
            target = scores_csv_path(config.output_root, spec.op_id)
            write_score_rows(target, per_op)
            outputs[spec.op_id] = target
            log(f"ok {spec.op_id}: {len(per_op)} rows (from file)")
        return outputs, skipped

    for spec in config.operations:
        manifest_path = op_manifest_path(config.output_root, spec.op_id)
        if not manifest_path.is_file():
            reason = _codec_skip_reason(config, spec.op_id)
            if reason is not None:
                skipped[spec.op_id] = reason
                log(f"SKIPPED {spec.op_id}: {reason}")
                continue
            raise ConfigError(
                f"no perturbed copy for {spec.op_id!r}: run the perturb stage first"
            )
        op_manifest = load_manifest(manifest_path)
        if config.scorer_mode == "baseline":
            scored = score_op_baseline(op_manifest.videos, config.frame_sample_k, config.workers)
        else:
            scored = score_op_protocol(
                op_manifest.videos,
                config.frame_sample_k,
                config.scorer_command,
                config.scorer_timeout,
                config.workers,
            )
        rows = [(spec.op_id, fs.video_id, fs.frame_index, fs.score) for fs in scored]
        target = scores_csv_path(config.output_root, spec.op_id)
        write_score_rows(target, rows)
        outputs[spec.op_id] = target
        log(f"ok {spec.op_id}: {len(rows)} scores")
    return outputs, skipped


# --- evaluation --------------------------------------------------------------


def _tool_versions(config: RunConfig) -> dict:
    return {
        "forgebench": forgebench.__version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "kernels_backend": kernels.BACKEND,
        "encoder": codec_bridge.tool_version(config.codec) or None,
    }


def build_run_manifest(config: RunConfig, started: str, finished: str) -> dict:
    return {
        "global_seed": config.global_seed,
        "op_params": {spec.op_id: spec.params for spec in config.operations},
        "codec_templates": {
            "encode": config.codec.encode_template,
            "decode": config.codec.decode_template,
        },
        "frame_sample_k": config.frame_sample_k,
        "auc_level": config.auc_level,
        "tool_versions": _tool_versions(config),
        "timestamps": {"started": started, "finished": finished},
        "scorer": {
            "mode": config.scorer_mode,
            "command": config.scorer_command,
            "name": BASELINE_NAME if config.scorer_mode == "baseline" else None,
        },
        "workers": config.workers,
        "dataset": str(config.manifest_path),
    }


def run_evaluate(
    config: RunConfig,
    manifest: Manifest,
    started: str | None = None,
    log=print,
) -> EvalReport:
    """Turn per-op score CSVs into the grouped AUC report files.

    Operations whose scores are absent are skipped with a marker when the
    encoder is missing (codec ops) or when --allow-partial is set;
    otherwise their absence is an error.
    """
    started = started or _now()
    cells: list[EvalCell] = []
    skips: dict[str, str] = {}
    for spec in config.operations:
        csv_path = scores_csv_path(config.output_root, spec.op_id)
        if not csv_path.is_file():
            reason = _codec_skip_reason(config, spec.op_id)
            if reason is None and config.allow_partial:
                reason = "no scores"
            if reason is not None:
                skips[spec.op_id] = reason
                log(f"SKIPPED {spec.op_id}: {reason}")
                continue
            raise ConfigError(f"missing score CSV for operation {spec.op_id!r}: {csv_path}")
        sets = collate_scores(
            parse_scores_csv(csv_path), manifest,
            provenance=config.scorer_mode, level=config.auc_level,
        )
        if spec.op_id not in sets:
            raise ScoreFileError(f"{csv_path}: contains no rows for {spec.op_id!r}")
        score_set = sets[spec.op_id]
        labels = [label for _, label, _ in score_set.entries]
        n_real = labels.count("real")
        n_fake = labels.count("fake")
        try:
            value = 100.0 * auc(score_set.labeled_pairs())
        except ValueError as exc:
            raise ForgebenchError(f"operation {spec.op_id!r}: {exc}") from None
        cells.append(
            EvalCell(op_id=spec.op_id, auc_percent=value, n_real=n_real, n_fake=n_fake)
        )
    if not cells:
        raise ForgebenchError("no operations produced scores; nothing to report")
    run_manifest = build_run_manifest(config, started, _now())
    report = EvalReport.build(
        config.detector_name, config.trainset_tag, cells, run_manifest, skips
    )
    out = report_dir(config.output_root)
    emit_csv(report, out / "report.csv")
    emit_markdown([report], out / "report.md")
    emit_json(report, out / "report.json")
    emit_category_summary(report, out / "category_summary.csv")
    log(f"report written to {out}")
    return report


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --- audits ------------------------------------------------------------------


def audit_whole_copy(output_root: Path, op_ids: list[str], manifest: Manifest) -> list[str]:
    """Verify each op manifest lists every test video exactly once."""
    expected = [v.id for v in manifest.split_videos("test")]
    problems = []
    for op_id in op_ids:
        path = op_manifest_path(output_root, op_id)
        if not path.is_file():
            problems.append(f"{op_id}: missing op manifest")
            continue
        got = [v.id for v in load_manifest(path).videos]
        # load_manifest already rejects duplicate ids, so sorted-list
        # equality is the full exactly-once check.
        if sorted(got) != sorted(expected):
            missing = set(expected) - set(got)
            extra = set(got) - set(expected)
            problems.append(
                f"{op_id}: copy mismatch (missing={sorted(missing)}, extra={sorted(extra)})"
            )
    return problems
