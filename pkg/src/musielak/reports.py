"""Inequality reports with signed margins and witnesses."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


def _clean(v):
    """Convert numpy scalars/arrays into JSON-friendly Python values."""
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
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return v


@dataclass
class InequalityReport:
    """Outcome of a sampled inequality check.

    ``worst_margin`` is the minimum signed slack over all samples; the check
    passes when it is at least ``-tolerance``.  ``parts`` holds per-branch
    sub-reports whose minimum is the overall margin.
    """

    name: str
    samples: int
    worst_margin: float
    witness: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    tolerance: float = 0.0
    parts: list["InequalityReport"] = field(default_factory=list)
    informational: bool = False

    @property
    def passed(self) -> bool:
        own = self.worst_margin >= -self.tolerance
        return own and all(p.passed for p in self.parts if not p.informational)

    def part(self, name: str) -> "InequalityReport":
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "pass": self.passed,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "constants": self.constants,
        }
        if self.informational:
            d["informational"] = True
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return _clean(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def relative_margin(lhs, rhs):
    """(rhs - lhs) / (1 + |rhs|): slack of lhs <= rhs, relative for large values."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return (rhs - lhs) / (1.0 + np.abs(rhs))


def worst(name: str, margins, witness_arrays: dict, tolerance: float, constants=None,
          informational: bool = False) -> InequalityReport:
    """Build a report from per-sample margins; witness taken at the argmin."""
    margins = np.asarray(margins, dtype=float).ravel()
    if margins.size == 0:
        return InequalityReport(name, 0, math.inf, {}, constants or {}, tolerance,
                                informational=informational)
    margins = np.where(np.isnan(margins), -np.inf, margins)
    i = int(np.argmin(margins))
    wit = {}
    for k, arr in witness_arrays.items():
        a = np.asarray(arr)
        if a.ndim == 0:
            wit[k] = a.item()
        elif a.ndim == 1:
            wit[k] = np.broadcast_to(a, margins.shape)[i].item() if a.size in (1, margins.size) else a.tolist()
        else:
            wit[k] = a.reshape(margins.size, -1)[i].tolist()
    return InequalityReport(name, int(margins.size), float(margins[i]), _clean(wit),
                            _clean(constants or {}), tolerance, informational=informational)


def combine(name: str, parts: list[InequalityReport], tolerance: float, constants=None) -> InequalityReport:
    """Aggregate report; its margin is the minimum over non-informational parts."""
    graded = [p for p in parts if not p.informational] or parts
    j = int(np.argmin([p.worst_margin for p in graded]))
    samples = sum(p.samples for p in parts)
    return InequalityReport(name, samples, graded[j].worst_margin,
                            {"part": graded[j].name, **graded[j].witness},
                            _clean(constants or {}), tolerance, parts)
