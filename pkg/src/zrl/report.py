"""Structured run reports: check records, lossless JSON, hashes and CSV."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ZrlError

RELATIONS = ("≥", "≤", "≈", "informational")


def _encode(x):
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return {"nonfinite": repr(x)}
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_encode(v) for v in x]
    return x


def _decode(x):
    if isinstance(x, dict):
        if set(x) == {"re", "im"}:
            return complex(x["re"], x["im"])
        if set(x) == {"nonfinite"}:
            return float(x["nonfinite"])
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    return x


@dataclass
class CheckRecord:
    name: str
    measured: float | complex
    bound_or_reference: float | None
    relation: str
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": _encode(self.measured),
            "bound_or_reference": _encode(self.bound_or_reference),
            "relation": self.relation,
            "tolerance": _encode(self.tolerance),
            "pass": self.passed,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        return cls(d["name"], _decode(d["measured"]), _decode(d["bound_or_reference"]),
                   d["relation"], _decode(d["tolerance"]), d["pass"], d.get("note", ""))


def check(name: str, measured, reference, relation: str, tolerance: float = 0.0, note: str = "") -> CheckRecord:
    """Evaluate one relation and return its record.

    ``≥`` passes when measured >= reference - tolerance, ``≤`` when
    measured <= reference + tolerance, ``≈`` when |measured - reference| <=
    tolerance.  Informational records always pass and never gate exit codes.
    """
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    if relation == "informational":
        ok = True
    else:
        m = measured if isinstance(measured, complex) else float(measured)
        r = float(reference)
        if relation == "≥":
            ok = float(m.real if isinstance(m, complex) else m) >= r - tolerance
        elif relation == "≤":
            ok = float(m.real if isinstance(m, complex) else m) <= r + tolerance
        else:
            ok = abs(m - r) <= tolerance
        ok = bool(ok)
    return CheckRecord(name, measured, reference, relation, tolerance, ok, note)


@dataclass
class RunReport:
    command: str
    config: dict
    seed: int = 0
    checks: list[CheckRecord] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    version: str = __version__

    def add(self, rec: CheckRecord) -> CheckRecord:
        self.checks.append(rec)
        return rec

    def add_series(self, kind: str, columns: list[str], rows) -> None:
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(columns):
            raise ValueError("series rows must match the column count")
        self.series[kind] = {"columns": list(columns), "rows": arr.tolist()}

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks if c.relation != "informational")

    def failed(self) -> list[CheckRecord]:
        return [c for c in self.checks if c.relation != "informational" and not c.passed]

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "command": self.command,
            "config": _encode(self.config),
            "seed": self.seed,
            "version": self.version,
            "checks": [c.to_dict() for c in self.checks],
            "data": _encode(self.data),
            "series": _encode(self.series),
        }
        if include_timing:
            d["timing"] = _encode(self.timing)
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(
            command=d["command"],
            config=_decode(d["config"]),
            seed=d["seed"],
            checks=[CheckRecord.from_dict(c) for c in d["checks"]],
            data=_decode(d["data"]),
            series=_decode(d["series"]),
            timing=_decode(d.get("timing", {})),
            version=d["version"],
        )

    def determinism_hash(self) -> str:
        canon = json.dumps(self.to_dict(include_timing=False), sort_keys=True, separators=(",", ":"),
                           allow_nan=False)
        return hashlib.sha256(canon.encode()).hexdigest()

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.command}.json"
        path.write_text(self.to_json(), encoding="utf-8", newline="\n")
        return path


def emit_plot_data(report: RunReport, kind: str) -> str:
    """Render one series as CSV text (header row, 17 significant digits, LF)."""
    if kind not in report.series:
        raise ZrlError(f"report has no series {kind!r}; available: {sorted(report.series)}")
    s = report.series[kind]
    if not s["rows"]:
        raise ZrlError(f"series {kind!r} is empty")
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(s["columns"])
    for row in s["rows"]:
        w.writerow(["%.17g" % v for v in row])
    return buf.getvalue()


def parse_plot_data(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_plot_data(report: RunReport, kind: str, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"{report.command}-{kind}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(emit_plot_data(report, kind).encode("utf-8"))
    return path
