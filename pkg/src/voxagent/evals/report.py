"""Shared report type for all evaluation runs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

VALID_METRICS = ("accuracy", "mean_judge_score", "jga")


@dataclass
class EvalReport:
    n_items: int
    metric: str
    value: float
    per_item: list[dict[str, Any]] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)
    breakdown: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in VALID_METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.metric in ("accuracy", "jga") and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.metric} must be in [0, 1], got {self.value}")
        if self.metric == "mean_judge_score" and not 1.0 <= self.value <= 5.0:
            raise ValueError(f"mean_judge_score must be in [1, 5], got {self.value}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
