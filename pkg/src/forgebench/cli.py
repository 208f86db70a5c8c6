"""Command-line interface.

Subcommands: perturb, score, evaluate, run, fixture, doctor.
Exit codes: 0 success, 1 stage failure, 2 configuration/validation error.
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from forgebench import codec as codec_bridge
from forgebench import kernels, pipeline
from forgebench.config import ConfigError, RunConfig, build_config, parse_ops_list
from forgebench.dataset import load_manifest
from forgebench.errors import ForgebenchError
from forgebench.fixture import generate_fixture
from forgebench.scorer import ScorerProcess

EXIT_OK = 0
EXIT_STAGE_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _common_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(), help="JSON run config."),
        click.option("--manifest", "manifest", type=click.Path(), help="Dataset manifest (JSON lines)."),
        click.option("--out", "output_root", type=click.Path(), help="Output directory root."),
        click.option("--ops", "ops", help="Comma-separated operation ids (default: all 12)."),
        click.option("--seed", "global_seed", type=int, help="Global seed (default 42)."),
        click.option("--workers", type=int, help="Parallel workers (default 1)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _scorer_options(fn):
    options = [
        click.option("--scorer-cmd", "scorer_command", help="Protocol scorer command line."),
        click.option("--scores", "scores_path", type=click.Path(), help="Precomputed score CSV."),
        click.option("--k", "frame_sample_k", type=int, help="Frames sampled per video (default 32)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _eval_options(fn):
    options = [
        click.option("--frame-level-auc", is_flag=True, default=None,
                     help="Compute AUC over frame scores instead of video scores."),
        click.option("--allow-partial", is_flag=True, default=None,
                     help="Emit a partial report when some operations lack scores."),
        click.option("--detector-name", help="Detector label used in report rows."),
        click.option("--trainset", "trainset_tag", help="Training-set label used in report rows."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build(config_path, **kw) -> RunConfig:
    ops = kw.pop("ops", None)
    if ops is not None:
        kw["operations"] = parse_ops_list(ops)
    if kw.pop("frame_level_auc", None):
        kw["auc_level"] = "frame"
    scorer_command = kw.get("scorer_command")
    scores_path = kw.get("scores_path")
    if scorer_command:
        kw["scorer_mode"] = "protocol"
    elif scores_path:
        kw["scorer_mode"] = "file"
        kw["scores_path"] = Path(scores_path)
    return build_config(config_path, **kw)


def _fail(exc: Exception, code: int) -> "click.exceptions.Exit":
    click.echo(f"error: {exc}", err=True)
    return SystemExit(code)


@click.group()
def main():
    """Robustness benchmark for deepfake detectors."""


@main.command()
@_common_options
@click.option("--force", is_flag=True, default=None, help="Rebuild even when stamps match.")
def perturb(config_path, **kw):
    """Materialize perturbed copies of the test split."""
    try:
        config = _build(config_path, **kw)
        manifest = load_manifest(config.manifest_path)
    except (ConfigError, ForgebenchError) as exc:
        raise _fail(exc, EXIT_CONFIG_ERROR)
    result = pipeline.run_perturb(config, manifest, log=click.echo)
    if result.errors:
        for line in result.errors:
            click.echo(f"error: {line}", err=True)
        raise SystemExit(EXIT_STAGE_FAILURE)
    click.echo(
        f"perturb done: {result.written_videos} written, {result.reused_videos} reused, "
        f"{len(result.skipped_ops)} op(s) skipped"
    )


@main.command()
@_common_options
@_scorer_options
def score(config_path, **kw):
    """Score perturbed copies with the configured detector."""
    try:
        config = _build(config_path, **kw)
        manifest = load_manifest(config.manifest_path)
    except (ConfigError, ForgebenchError) as exc:
        raise _fail(exc, EXIT_CONFIG_ERROR)
    try:
        pipeline.run_score(config, manifest, log=click.echo)
    except ForgebenchError as exc:
        raise _fail(exc, EXIT_STAGE_FAILURE)


@main.command()
@_common_options
@_scorer_options
@_eval_options
def evaluate(config_path, **kw):
    """Compute per-operation AUC and emit the report files."""
    try:
        config = _build(config_path, **kw)
        manifest = load_manifest(config.manifest_path)
    except (ConfigError, ForgebenchError) as exc:
        raise _fail(exc, EXIT_CONFIG_ERROR)
    try:
        pipeline.run_evaluate(config, manifest, log=click.echo)
    except ForgebenchError as exc:
        raise _fail(exc, EXIT_STAGE_FAILURE)


@main.command()
@_common_options
@_scorer_options
@_eval_options
@click.option("--force", is_flag=True, default=None, help="Rebuild even when stamps match.")
def run(config_path, **kw):
    """Full pipeline: perturb, score, evaluate."""
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    try:
        config = _build(config_path, **kw)
        manifest = load_manifest(config.manifest_path)
    except (ConfigError, ForgebenchError) as exc:
        raise _fail(exc, EXIT_CONFIG_ERROR)
    result = pipeline.run_perturb(config, manifest, log=click.echo)
    if result.errors:
        for line in result.errors:
            click.echo(f"error: {line}", err=True)
        raise SystemExit(EXIT_STAGE_FAILURE)
    try:
        pipeline.run_score(config, manifest, log=click.echo)
        pipeline.run_evaluate(config, manifest, started=started, log=click.echo)
    except ForgebenchError as exc:
        raise _fail(exc, EXIT_STAGE_FAILURE)


@main.command()
@click.argument("out_dir", type=click.Path())
@click.option("--real", "n_real", type=int, default=10, show_default=True)
@click.option("--fake", "n_fake", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--frames", "n_frames", type=int, default=16, show_default=True)
@click.option("--size", type=int, default=64, show_default=True)
def fixture(out_dir, n_real, n_fake, seed, n_frames, size):
    """Generate the synthetic real/fake fixture dataset."""
    try:
        manifest_path = generate_fixture(out_dir, n_real, n_fake, seed, n_frames, size)
    except (ValueError, OSError) as exc:
        raise _fail(exc, EXIT_CONFIG_ERROR)
    click.echo(f"fixture manifest: {manifest_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON run config.")
@click.option("--manifest", type=click.Path(), help="Dataset manifest to validate.")
@click.option("--scorer-cmd", "scorer_command", help="Protocol scorer command to probe.")
@click.option("--verify-frames", is_flag=True, help="Stat every frame file of the manifest.")
def doctor(config_path, manifest, scorer_command, verify_frames):
    """Check the environment: manifest, codec tool, scorer handshake."""
    failures = 0

    def check(name: str, fn):
        nonlocal failures
        try:
            detail = fn()
        except Exception as exc:  # noqa: BLE001 - diagnostics must not abort
            click.echo(f"[fail] {name}: {exc}")
            failures += 1
        else:
            click.echo(f"[ ok ] {name}{': ' + detail if detail else ''}")

    codec_cfg = codec_bridge.CodecConfig()
    if config_path:
        try:
            from forgebench.config import load_config_file

            data = load_config_file(config_path)
            manifest = manifest or data.get("manifest")
            codec_data = data.get("codec", {})
            codec_cfg = codec_bridge.CodecConfig(
                encode_template=codec_data.get(
                    "encode_template", codec_bridge.DEFAULT_ENCODE_TEMPLATE
                ),
                decode_template=codec_data.get(
                    "decode_template", codec_bridge.DEFAULT_DECODE_TEMPLATE
                ),
                timeout=codec_data.get("timeout", 300.0),
            )
            scorer_data = data.get("scorer", {})
            scorer_command = scorer_command or scorer_data.get("command")
        except ConfigError as exc:
            click.echo(f"[fail] config: {exc}")
            failures += 1

    check("kernels", lambda: f"backend {kernels.BACKEND}")

    if manifest:
        def load():
            m = load_manifest(manifest, verify_frames=verify_frames)
            return f"{len(m.videos)} videos, {len(m.split_videos('test'))} in test split"
        check("manifest", load)
    else:
        click.echo("[skip] manifest: none given")

    def codec_check():
        report = codec_bridge.validate_codec(codec_cfg)
        version = report.version or "unknown version"
        return f"{report.tool} ({version}), {report.message}"
    check("codec", codec_check)

    if scorer_command:
        def probe():
            proc = ScorerProcess(scorer_command, timeout=30.0)
            name = proc.name
            proc.close()
            return f"handshake ok: {name}"
        check("scorer", probe)
    else:
        click.echo("[skip] scorer: no protocol command given")

    if failures:
        click.echo(f"{failures} check(s) failed")
        raise SystemExit(EXIT_STAGE_FAILURE)
    click.echo("all checks passed")


if __name__ == "__main__":
    sys.exit(main())
