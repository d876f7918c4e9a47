"""Experiment records: a run is fully determined by (spec, seed).

CSV rows echo the spec parameters verbatim and contain only values that
are a pure function of (spec, seed), so repeated runs produce
byte-identical rows. JSON output additionally carries wall_time and the
tool version and round-trips losslessly through from_json.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # float() strips numpy scalar wrappers
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI invocation: subcommand, its numeric parameters, and the seed."""

    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "params": dict(self.params),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(d["subcommand"], dict(d["params"]), d["seed"])


@dataclass(frozen=True)
class ExperimentResult:
    """Spec echo plus one or more metric rows."""

    spec: ExperimentSpec
    metrics: list[dict]
    wall_time: float
    version: str

    def to_csv(self) -> str:
        metric_keys: list[str] = []
        for row in self.metrics:
            for key in row:
                if key not in metric_keys:
                    metric_keys.append(key)
        spec_keys = [k for k in self.spec.params if k not in metric_keys]
        buf = io.StringIO()
        buf.write(",".join(spec_keys + metric_keys + ["seed"]) + "\n")
        for row in self.metrics:
            cells = [_fmt(self.spec.params[k]) for k in spec_keys]
            cells.extend(_fmt(row.get(k)) for k in metric_keys)
            cells.append(str(self.spec.seed))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "spec": self.spec.to_dict(),
                "metrics": self.metrics,
                "wall_time": self.wall_time,
                "version": self.version,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentResult":
        d = json.loads(text)
        return cls(
            ExperimentSpec.from_dict(d["spec"]),
            d["metrics"],
            d["wall_time"],
            d["version"],
        )
