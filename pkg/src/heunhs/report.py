"""Machine-readable experiment reports (JSON and CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

CSV_HEADER = ("index", "value", "reference", "abs_err", "rel_err", "converged")
PROVENANCES = ("closed-form", "cross-method", "none")
STATUSES = ("pass", "fail", "inconclusive", "info")


class MalformedReport(ValueError):
    pass


@dataclass
class Comparison:
    quantity: str
    index: int
    value: float
    reference: float | None = None
    source: str | None = None
    provenance: str = "none"
    converged: bool = True

    @property
    def abs_err(self) -> float | None:
        if self.reference is None:
            return None
        return abs(self.value - self.reference)

    @property
    def rel_err(self) -> float | None:
        if self.reference is None:
            return None
        den = abs(self.reference)
        return self.abs_err / den if den > 0 else self.abs_err

    def to_json(self) -> dict:
        out = asdict(self)
        out["abs_err"] = self.abs_err
        out["rel_err"] = self.rel_err
        return out


@dataclass
class Criterion:
    name: str
    formula: str
    status: str
    max_deviation: float | None = None
    tolerance: float | None = None
    detail: str = ""

    @classmethod
    def threshold(cls, name: str, formula: str, deviation: float, tolerance: float, detail: str = "") -> "Criterion":
        ok = math.isfinite(deviation) and deviation < tolerance
        return cls(name, formula, "pass" if ok else "fail", deviation, tolerance, detail)

    def line(self) -> str:
        dev = "" if self.max_deviation is None else f" max_dev={self.max_deviation:.3e}"
        tol = "" if self.tolerance is None else f" tol={self.tolerance:.0e}"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{self.status.upper():>12}] {self.name} <{self.formula}>{dev}{tol}{extra}"


@dataclass
class Report:
    experiment: str
    config: dict
    comparisons: list[Comparison] = field(default_factory=list)
    criteria: list[Criterion] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, comparison: Comparison) -> None:
        self.comparisons.append(comparison)

    def check(self, criterion: Criterion) -> Criterion:
        self.criteria.append(criterion)
        return criterion

    @property
    def status(self) -> str:
        statuses = {c.status for c in self.criteria}
        if "fail" in statuses:
            return "fail"
        if "inconclusive" in statuses:
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "inconclusive": 3}[self.status]

    def validate(self) -> None:
        """Every reference value needs a source formula id; every criterion a formula."""
        for c in self.comparisons:
            if c.provenance not in PROVENANCES:
                raise MalformedReport(f"unknown provenance {c.provenance!r}")
            if c.reference is not None and (not c.source or c.provenance == "none"):
                raise MalformedReport(f"comparison {c.quantity}[{c.index}] has a reference without a source")
        for c in self.criteria:
            if c.status not in STATUSES:
                raise MalformedReport(f"unknown status {c.status!r}")
            if not c.formula:
                raise MalformedReport(f"criterion {c.name!r} cites no formula")

    def to_json(self) -> dict:
        self.validate()
        return {
            "experiment": self.experiment,
            "config": self.config,
            "status": self.status,
            "wall_time": self.wall_time,
            "criteria": [asdict(c) for c in self.criteria],
            "comparisons": [c.to_json() for c in self.comparisons],
            "max_deviation": max(
                (c.max_deviation for c in self.criteria if c.max_deviation is not None), default=None
            ),
            "extra": self.extra,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=_json_default)

    def to_csv(self) -> str:
        self.validate()
        qualify = len({c.quantity for c in self.comparisons}) > 1
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in self.comparisons:
            index = f"{c.quantity}:{c.index}" if qualify else c.index
            writer.writerow(
                [index, repr(c.value), _opt(c.reference), _opt(c.abs_err), _opt(c.rel_err), str(c.converged).lower()]
            )
        return buf.getvalue()

    def write(self, path: str | Path, fmt: str = "json") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps() if fmt == "json" else self.to_csv())
        return path

    def summary(self) -> str:
        lines = [c.line() for c in self.criteria]
        lines.append(f"status: {self.status} ({self.wall_time:.2f} s)")
        return "\n".join(lines)


def _opt(v) -> str:
    return "" if v is None else repr(float(v))


def _json_default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
