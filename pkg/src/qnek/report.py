"""Verification records shared by the identity checks and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["VerificationReport", "relative_residual"]


@dataclass
class VerificationReport:
    identity: str
    residual: float
    tolerance: float
    settings: dict[str, Any] = field(default_factory=dict)
    status: str = ""  # "pass", "fail" or "skipped(<reason>)"
    wall_time: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            ok = math.isfinite(self.residual) and self.residual <= self.tolerance
            self.status = "pass" if ok else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def skipped(self) -> bool:
        return self.status.startswith("skipped")

    @classmethod
    def skip(cls, identity: str, reason: str, tolerance: float = 0.0, settings=None):
        return cls(identity, math.nan, tolerance, dict(settings or {}), f"skipped({reason})")

    def line(self) -> str:
        return f"{self.status.upper():<8} {self.identity:<38} residual={self.residual:.3e} tol={self.tolerance:.1e}"

    def as_record(self, timings: bool = False) -> dict[str, Any]:
        rec = {
            "identity": self.identity,
            "status": self.status,
            "pass": self.passed,
            "residual": None if math.isnan(self.residual) else float(self.residual),
            "tolerance": float(self.tolerance),
            "settings": self.settings,
        }
        if timings:
            rec["wall_time"] = round(self.wall_time, 3)
        return rec


def relative_residual(a, b, floor: float = 0.0) -> float:
    """``max|a - b| / max(floor, max|a|, max|b|)`` over paired entries."""
    import numpy as np

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    scale = max(floor, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b)) / scale)
