"""Run metrics shared by all drivers and the CLI JSON schema (version 1)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass
class RunMetrics:
    verdict: str | None = None
    estimate: float | None = None
    elapsed_steps: int = 0
    wall_time_ms: float = 0.0
    workspace_peak_bits: int = 0
    catalytic_bits: int = 0
    tape_restored: bool = False
    aborted: bool = False
    normalizations: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self, stable: bool = False) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "verdict": self.verdict,
            "estimate": self.estimate,
            "elapsed_steps": self.elapsed_steps,
            "wall_time_ms": 0.0 if stable else round(self.wall_time_ms, 3),
            "workspace_peak_bits": self.workspace_peak_bits,
            "catalytic_bits": self.catalytic_bits,
            "tape_restored": self.tape_restored,
            "aborted": self.aborted,
            "normalizations": list(self.normalizations),
        }
        out.update(self.extra)
        return out

    def to_json(self, stable: bool = False) -> str:
        return json.dumps(self.to_dict(stable=stable), sort_keys=True)


class StepCounter:
    """Abstract operation count: edge pushes, shifts, walk steps."""

    __slots__ = ("n",)

    def __init__(self):
        self.n = 0

    def add(self, k: int = 1) -> None:
        self.n += k
