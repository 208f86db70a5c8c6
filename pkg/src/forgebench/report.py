"""Evaluation report emission: CSV, Markdown, and full-precision JSON.

Printed AUC values are fixed at two decimals (rounded half away from
zero); the JSON sidecar keeps full precision plus the run manifest so a
run can be reproduced from its own report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

from forgebench.errors import ReportError
from forgebench.metrics import EvalCell, category_table, row_average
from forgebench.perturb import CANONICAL_OP_IDS, CATEGORY_DISPLAY, OPERATIONS

REQUIRED_MANIFEST_KEYS = (
    "global_seed",
    "op_params",
    "codec_templates",
    "frame_sample_k",
    "auc_level",
    "tool_versions",
    "timestamps",
)


def format_auc(value: float) -> str:
    """Two decimals, half away from zero, from the exact binary value."""
    return str(Decimal(value).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class EvalReport:
    detector_name: str
    trainset_tag: str
    cells: list[EvalCell]
    average: float
    run_manifest: dict = field(default_factory=dict)
    skipped_ops: dict[str, str] = field(default_factory=dict)  # op_id -> reason

    @classmethod
    def build(
        cls,
        detector_name: str,
        trainset_tag: str,
        cells: Sequence[EvalCell],
        run_manifest: dict,
        skipped_ops: dict[str, str] | None = None,
    ) -> "EvalReport":
        ordered = order_cells(cells)
        report = cls(
            detector_name=detector_name,
            trainset_tag=trainset_tag,
            cells=ordered,
            average=row_average(ordered),
            run_manifest=dict(run_manifest),
            skipped_ops=dict(skipped_ops or {}),
        )
        report.validate()
        return report

    def validate(self) -> None:
        category_table(self.cells)  # rejects duplicates / unknown ops
        if abs(self.average - row_average(self.cells)) > 1e-9:
            raise ReportError("report average does not match its cells")
        missing = [k for k in REQUIRED_MANIFEST_KEYS if k not in self.run_manifest]
        if missing:
            raise ReportError(f"run manifest missing keys: {missing}")


def order_cells(cells: Sequence[EvalCell]) -> list[EvalCell]:
    """Cells in canonical operation order."""
    by_op = {}
    for cell in cells:
        if cell.op_id in by_op:
            raise ReportError(f"duplicate cell for operation {cell.op_id!r}")
        if cell.op_id not in OPERATIONS:
            raise ReportError(f"unknown operation id {cell.op_id!r}")
        by_op[cell.op_id] = cell
    return [by_op[op_id] for op_id in CANONICAL_OP_IDS if op_id in by_op]


def column_label(op_id: str) -> str:
    """Human column label: category plus variant where the category has two."""
    info = OPERATIONS[op_id]
    display = CATEGORY_DISPLAY[info.category]
    if info.variant == display:
        return display
    return f"{display} {info.variant}"


def emit_csv(report: EvalReport, path: str | Path) -> None:
    """Machine-readable cells plus one trailing average row; byte-deterministic."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["detector,trainset,op_id,category,auc_percent,n_real,n_fake"]
    for cell in report.cells:
        category = CATEGORY_DISPLAY[OPERATIONS[cell.op_id].category]
        lines.append(
            f"{report.detector_name},{report.trainset_tag},{cell.op_id},"
            f"{category},{format_auc(cell.auc_percent)},{cell.n_real},{cell.n_fake}"
        )
    lines.append(
        f"{report.detector_name},{report.trainset_tag},average,,"
        f"{format_auc(report.average)},,"
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_csv(path: str | Path) -> tuple[str, str, list[tuple[str, str, str, str, str]], str]:
    """Parse an emitted CSV back into (detector, trainset, cell rows, average)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "detector,trainset,op_id,category,auc_percent,n_real,n_fake":
        raise ReportError(f"{path}: not a report CSV")
    cells = []
    average = ""
    detector = trainset = ""
    for line in lines[1:]:
        detector, trainset, op_id, category, auc_text, n_real, n_fake = line.split(",")
        if op_id == "average":
            average = auc_text
        else:
            cells.append((op_id, category, auc_text, n_real, n_fake))
    return detector, trainset, cells, average


def emit_markdown(reports: Sequence[EvalReport], path: str | Path) -> None:
    """One table, one row per (detector, trainset), canonical column order."""
    if not reports:
        raise ReportError("no reports to emit")
    op_sets = {tuple(cell.op_id for cell in report.cells) for report in reports}
    if len(op_sets) != 1:
        raise ReportError("reports cover different operation sets")
    op_ids = op_sets.pop()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["Detector", "TrainSet", *(column_label(op_id) for op_id in op_ids), "Average"]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] * len(header)) + "|",
    ]
    for report in reports:
        row = [
            report.detector_name,
            report.trainset_tag,
            *(format_auc(cell.auc_percent) for cell in report.cells),
            format_auc(report.average),
        ]
        lines.append("| " + " | ".join(row) + " |")
    skipped = {op: why for report in reports for op, why in report.skipped_ops.items()}
    if skipped:
        lines.append("")
        for op_id, reason in sorted(skipped.items()):
            lines.append(f"- SKIPPED `{op_id}`: {reason}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_json(report: EvalReport, path: str | Path) -> None:
    """Full-precision sidecar: cells, average, run manifest, skipped ops."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "detector": report.detector_name,
        "trainset": report.trainset_tag,
        "cells": [
            {
                "op_id": cell.op_id,
                "category": CATEGORY_DISPLAY[OPERATIONS[cell.op_id].category],
                "auc_percent": cell.auc_percent,
                "n_real": cell.n_real,
                "n_fake": cell.n_fake,
            }
            for cell in report.cells
        ],
        "average": report.average,
        "skipped_ops": report.skipped_ops,
        "run_manifest": report.run_manifest,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def load_json(path: str | Path) -> EvalReport:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    cells = [
        EvalCell(
            op_id=cell["op_id"],
            auc_percent=cell["auc_percent"],
            n_real=cell["n_real"],
            n_fake=cell["n_fake"],
        )
        for cell in payload["cells"]
    ]
    return EvalReport(
        detector_name=payload["detector"],
        trainset_tag=payload["trainset"],
        cells=cells,
        average=payload["average"],
        run_manifest=payload["run_manifest"],
        skipped_ops=payload.get("skipped_ops", {}),
    )


def emit_category_summary(report: EvalReport, path: str | Path) -> None:
    """Bar-chart-friendly CSV: one row per category with its mean AUC."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["category,mean_auc_percent"]
    for category, cells in category_table(report.cells):
        mean = sum(c.auc_percent for c in cells) / len(cells)
        lines.append(f"{CATEGORY_DISPLAY[category]},{format_auc(mean)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
