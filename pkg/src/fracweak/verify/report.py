"""Structured verification results."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np


def digest(*items):
    """Short SHA-256 digest of arrays and scalars, used to tie a report to its inputs."""
    h = hashlib.sha256()
    for it in items:
        if it is None:
            h.update(b"none")
            continue
        arr = np.ascontiguousarray(np.asarray(it))
        h.update(str(arr.dtype).encode() + str(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()[:16]


@dataclass
class Row:
    sample: str
    measured: float
    tolerance: float
    passed: bool
    mode: str = "le"  # "le": measured <= tolerance, "ge": measured >= tolerance


@dataclass
class VerificationReport:
    """Rows of (sample, measured, tolerance); the report passes iff every row does."""

    check: str
    inputs_digest: str = ""
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, sample, measured, tolerance, mode="le"):
        m = float(measured)
        if mode == "le":
            ok = m <= tolerance
        elif mode == "ge":
            ok = m >= tolerance
        else:
            raise ValueError(f"unknown comparison {mode!r}")
        ok = bool(ok) and not math.isnan(m)
        self.rows.append(Row(str(sample), m, float(tolerance), ok, mode))
        return ok

    def flag(self, sample, reason):
        """Record a sample that could not be measured; it counts as failed."""
        self.rows.append(Row(f"{sample} [{reason}]", float("nan"), float("nan"), False))

    @property
    def passed(self):
        return bool(self.rows) and all(r.passed for r in self.rows)

    @property
    def worst(self):
        """Largest ``le`` measurement, or the smallest ``ge`` one if there are no ``le`` rows."""
        le = [r.measured for r in self.rows if r.mode == "le"]
        if le:
            return max(le)
        ge = [r.measured for r in self.rows if r.mode == "ge"]
        return min(ge) if ge else float("nan")

    def merge(self, other: "VerificationReport", prefix=None):
        pre = prefix or other.check
        for r in other.rows:
            self.rows.append(Row(f"{pre}:{r.sample}", r.measured, r.tolerance, r.passed, r.mode))
        return self

    def csv_rows(self):
        for r in self.rows:
            yield (self.check, r.sample, f"{r.measured:.6e}", f"{r.tolerance:.6e}",
                   "1" if r.passed else "0")

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{self.check}: {status} ({len(self.rows)} samples, worst {self.worst:.3e})"
