"""Run configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from forgebench.codec import CodecConfig
from forgebench.errors import ConfigError
from forgebench.perturb import PerturbationSpec, canonical_specs, make_spec

AUC_LEVELS = ("video", "frame")
SCORER_MODES = ("baseline", "protocol", "file")


@dataclass
class RunConfig:
    manifest_path: Path
    output_root: Path
    operations: list[PerturbationSpec] = field(default_factory=canonical_specs)
    global_seed: int = 42
    frame_sample_k: int = 32
    scorer_mode: str = "baseline"
    scorer_command: str | None = None
    scores_path: Path | None = None
    scorer_timeout: float = 60.0
    codec: CodecConfig = field(default_factory=CodecConfig)
    auc_level: str = "video"
    workers: int = 1
    detector_name: str = "baseline"
    trainset_tag: str = "none"
    allow_partial: bool = False
    force: bool = False

    def validate(self) -> None:
        if not Path(self.manifest_path).is_file():
            raise ConfigError(f"manifest not found: {self.manifest_path}")
        if not self.operations:
            raise ConfigError("no operations configured")
        op_ids = [spec.op_id for spec in self.operations]
        if len(op_ids) != len(set(op_ids)):
            raise ConfigError("duplicate operations configured")
        if not 0 <= self.global_seed < 2**64:
            raise ConfigError("global_seed must be an unsigned 64-bit integer")
        if self.frame_sample_k < 1:
            raise ConfigError("frame_sample_k must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.auc_level not in AUC_LEVELS:
            raise ConfigError(f"auc_level must be one of {AUC_LEVELS}")
        if self.scorer_mode not in SCORER_MODES:
            raise ConfigError(f"scorer mode must be one of {SCORER_MODES}")
        if self.scorer_mode == "protocol" and not self.scorer_command:
            raise ConfigError("protocol scorer needs a command (--scorer-cmd)")
        if self.scorer_mode == "file":
            if self.scores_path is None:
                raise ConfigError("file scorer needs a score CSV (--scores)")
            if not Path(self.scores_path).is_file():
                raise ConfigError(f"score file not found: {self.scores_path}")
        try:
            self.codec.validate()
        except Exception as exc:
            raise ConfigError(f"bad codec config: {exc}") from None

    def op_ids(self) -> list[str]:
        return [spec.op_id for spec in self.operations]


def parse_operations(raw: object) -> list[PerturbationSpec]:
    """Operations from config JSON: op id strings or {op_id, params} objects."""
    if not isinstance(raw, list):
        raise ConfigError("operations must be a list")
    specs = []
    for entry in raw:
        try:
            if isinstance(entry, str):
                specs.append(make_spec(entry))
            elif isinstance(entry, dict):
                specs.append(make_spec(entry["op_id"], entry.get("params")))
            else:
                raise ConfigError(f"bad operation entry: {entry!r}")
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad operation entry {entry!r}: {exc}") from None
    return specs


def parse_ops_list(text: str) -> list[PerturbationSpec]:
    """Operations from a --ops comma-separated id list."""
    try:
        return [make_spec(op_id.strip()) for op_id in text.split(",") if op_id.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def build_config(config_path: str | None = None, **overrides) -> RunConfig:
    """Merge a config file (if any) with non-None keyword overrides."""
    data = load_config_file(config_path) if config_path else {}
    known = {
        "manifest", "output_root", "operations", "global_seed", "frame_sample_k",
        "scorer", "codec", "auc_level", "workers", "detector_name", "trainset_tag",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    manifest = overrides.pop("manifest", None) or data.get("manifest")
    output_root = overrides.pop("output_root", None) or data.get("output_root")
    if manifest is None:
        raise ConfigError("a dataset manifest is required (config 'manifest' or --manifest)")
    if output_root is None:
        raise ConfigError("an output directory is required (config 'output_root' or --out)")

    operations = overrides.pop("operations", None)
    if operations is None:
        operations = (
            parse_operations(data["operations"]) if "operations" in data else canonical_specs()
        )

    scorer_data = data.get("scorer", {})
    if not isinstance(scorer_data, dict):
        raise ConfigError("config 'scorer' must be an object")
    codec_data = data.get("codec", {})
    if not isinstance(codec_data, dict):
        raise ConfigError("config 'codec' must be an object")
    codec_kwargs = {}
    for key in ("encode_template", "decode_template", "timeout"):
        if key in codec_data:
            codec_kwargs[key] = codec_data[key]
    unknown_codec = set(codec_data) - {"encode_template", "decode_template", "timeout"}
    if unknown_codec:
        raise ConfigError(f"unknown codec config keys: {sorted(unknown_codec)}")

    cfg = RunConfig(
        manifest_path=Path(manifest),
        output_root=Path(output_root),
        operations=operations,
        global_seed=int(data.get("global_seed", 42)),
        frame_sample_k=int(data.get("frame_sample_k", 32)),
        scorer_mode=scorer_data.get("mode", "baseline"),
        scorer_command=scorer_data.get("command"),
        scores_path=Path(scorer_data["path"]) if "path" in scorer_data else None,
        scorer_timeout=float(scorer_data.get("timeout", 60.0)),
        codec=CodecConfig(**codec_kwargs),
        auc_level=data.get("auc_level", "video"),
        workers=int(data.get("workers", 1)),
        detector_name=data.get("detector_name", "baseline"),
        trainset_tag=data.get("trainset_tag", "none"),
    )

    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config override {key!r}")
        setattr(cfg, key, value)
    cfg.manifest_path = Path(cfg.manifest_path)
    cfg.output_root = Path(cfg.output_root)
    if cfg.scores_path is not None:
        cfg.scores_path = Path(cfg.scores_path)
    cfg.validate()
    return cfg
