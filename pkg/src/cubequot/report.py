"""Structured run reports.

A report is one JSON document::

    {
      "schema": "cubequot.report/1",
      "tool_version": "...",
      "config": {...},                 # full echo of the run configuration
      "records": [                     # one per check, in execution order
        {"name": ..., "anchor": ..., "status": "pass" | "fail" | "reported",
         "tolerance": float | null, "inputs": {...}, "values": {...}}
      ],
      "summary": {"pass": n, "fail": n, "reported": n},
      "timing": {"total_s": ..., "checks": {name: seconds}}
    }

Only ``timing`` varies between identical runs.  The tabular form has a
fixed header and one tab-separated line per record.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import __version__

SCHEMA = "cubequot.report/1"

# Named anchors for the quantity each record checks.
ANCHORS = frozenset(
    {
        "hamming-metric",
        "walsh-basis",
        "convolution",
        "variance",
        "invariance-identity",
        "noise-measure",
        "noise-marginals",
        "heat-identity",
        "level-influence",
        "influence-variance-bound",
        "transitive-influence-bound",
        "fourier-tail",
        "tail-assumption",
        "quotient-metric",
        "quotient-measure",
        "far-pair-count",
        "kkl-chain",
        "distortion",
        "snowflake-conversion",
        "poincare-inequality",
        "subset-poincare",
        "ratio-condition",
        "expansion-ratio",
        "negative-type",
        "sketchability",
        "embedding-transfer",
    }
)

STATUSES = ("pass", "fail", "reported")


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


@dataclass
class Record:
    name: str
    anchor: str
    status: str
    values: dict
    inputs: dict = field(default_factory=dict)
    tolerance: float | None = None

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise ValueError(f"unknown anchor {self.anchor!r}")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status != "reported" and self.tolerance is None:
            raise ValueError(f"record {self.name!r}: pass/fail records need a tolerance")

    def to_dict(self) -> dict:
        return _clean(
            {
                "name": self.name,
                "anchor": self.anchor,
                "status": self.status,
                "tolerance": self.tolerance,
                "inputs": self.inputs,
                "values": self.values,
            }
        )


def check(name: str, anchor: str, ok: bool, tolerance: float, values: dict, **inputs) -> Record:
    return Record(name, anchor, "pass" if ok else "fail", values, inputs, tolerance)


def reported(name: str, anchor: str, values: dict, **inputs) -> Record:
    return Record(name, anchor, "reported", values, inputs, None)


@dataclass
class Report:
    config: dict
    records: list[Record] = field(default_factory=list)
    timing: dict = field(default_factory=lambda: {"checks": {}})

    def add(self, records) -> None:
        if isinstance(records, Record):
            records = [records]
        self.records.extend(records)

    @contextmanager
    def timed(self, label: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timing["checks"][label] = time.perf_counter() - t0

    @property
    def failed(self) -> list[Record]:
        return [r for r in self.records if r.status == "fail"]

    def summary(self) -> dict:
        return {s: sum(r.status == s for r in self.records) for s in STATUSES}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "tool_version": __version__,
            "config": _clean(self.config),
            "records": [r.to_dict() for r in self.records],
            "summary": self.summary(),
            "timing": _clean(self.timing),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        lines = ["name\tanchor\tstatus\ttolerance\tvalues"]
        for r in self.records:
            d = r.to_dict()
            vals = json.dumps(d["values"], sort_keys=True, separators=(",", ":"))
            tol = "" if r.tolerance is None else repr(r.tolerance)
            lines.append(f"{r.name}\t{r.anchor}\t{r.status}\t{tol}\t{vals}")
        return "\n".join(lines) + "\n"


def strip_timing(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timing"}
