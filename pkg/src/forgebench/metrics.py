"""Rank statistics: tie-aware ROC-AUC, category grouping, row averaging.

AUC uses the Mann-Whitney formulation with midranks. Internally ranks
are kept as doubled integers (a midrank over a tie span is always a
multiple of 0.5), so the statistic is exact up to the single final
division and complement symmetry holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from forgebench.perturb import CANONICAL_OP_IDS, CATEGORY_ORDER, OPERATIONS


@dataclass(frozen=True)
class EvalCell:
    """One (operation, detector) table cell."""

    op_id: str
    auc_percent: float
    n_real: int
    n_fake: int


def auc(pairs: Iterable[tuple[float, str]]) -> float:
    """Probability a random fake outranks a random real, ties counted half.

    `pairs` is (score, label) with label "real" or "fake"; fake is the
    positive class.
    """
    scores: list[float] = []
    fake_flags: list[bool] = []
    for score, label in pairs:
        if label not in ("real", "fake"):
            raise ValueError(f"invalid label {label!r}")
        score = float(score)
        if not math.isfinite(score):
            raise ValueError(f"non-finite score {score!r}")
        scores.append(score)
        fake_flags.append(label == "fake")
    n = len(scores)
    n_fake = sum(fake_flags)
    n_real = n - n_fake
    if n_fake == 0 or n_real == 0:
        raise ValueError("AUC needs at least one real and one fake score")

    order = sorted(range(n), key=lambda i: scores[i])
    # Doubled midranks: a tie group spanning 1-based ranks i+1..j has
    # midrank (i+1+j)/2, i.e. doubled midrank i+1+j, an exact integer.
    doubled_rank_sum_fake = 0
    start = 0
    while start < n:
        stop = start
        while stop + 1 < n and scores[order[stop + 1]] == scores[order[start]]:
            stop += 1
        doubled_midrank = (start + 1) + (stop + 1)
        for pos in range(start, stop + 1):
            if fake_flags[order[pos]]:
                doubled_rank_sum_fake += doubled_midrank
        start = stop + 1

    doubled_u = doubled_rank_sum_fake - n_fake * (n_fake + 1)
    return doubled_u / (2 * n_fake * n_real)


def auc_percent(pairs: Iterable[tuple[float, str]]) -> float:
    return 100.0 * auc(pairs)


def category_table(cells: Sequence[EvalCell]) -> list[tuple[str, list[EvalCell]]]:
    """Group cells by operation category, in canonical column order."""
    seen: set[str] = set()
    by_op: dict[str, EvalCell] = {}
    for cell in cells:
        if cell.op_id not in OPERATIONS:
            raise ValueError(f"unknown operation id {cell.op_id!r}")
        if cell.op_id in seen:
            raise ValueError(f"duplicate cell for operation {cell.op_id!r}")
        seen.add(cell.op_id)
        by_op[cell.op_id] = cell
    grouped: list[tuple[str, list[EvalCell]]] = []
    for category in CATEGORY_ORDER:
        members = [
            by_op[op_id]
            for op_id in CANONICAL_OP_IDS
            if OPERATIONS[op_id].category == category and op_id in by_op
        ]
        if members:
            grouped.append((category, members))
    return grouped


def row_average(cells: Sequence[EvalCell]) -> float:
    """Unweighted mean AUC over the operation cells (not over categories)."""
    if not cells:
        raise ValueError("row_average needs at least one cell")
    return sum(cell.auc_percent for cell in cells) / len(cells)
