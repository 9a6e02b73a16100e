"""Structured verification output."""

from dataclasses import dataclass, field

import numpy as np


def _plain(x):
    """Convert numpy scalars and arrays to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


@dataclass
class Report:
    """Named residual checks plus free-form values.

    Each check stores ``residual``, ``tol`` and ``pass``; the report passes
    when every check does.
    """

    name: str
    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    def check(self, key, residual, tol, mode="below"):
        residual = float(residual)
        if mode == "below":
            ok = bool(np.isfinite(residual) and residual < tol)
        elif mode == "above":
            ok = bool(np.isfinite(residual) and residual >= tol)
        else:
            raise ValueError(mode)
        self.checks[key] = {"residual": residual, "tol": float(tol), "mode": mode, "pass": ok}
        return ok

    def residual(self, key):
        return self.checks[key]["residual"]

    @property
    def passed(self):
        return all(c["pass"] for c in self.checks.values())

    def failures(self):
        return [k for k, c in self.checks.items() if not c["pass"]]

    def merge(self, other, prefix=""):
        for k, v in other.checks.items():
            self.checks[prefix + k] = v
        for k, v in other.values.items():
            self.values[prefix + k] = v
        return self

    def to_json(self):
        return _plain({"name": self.name, "checks": self.checks, "values": self.values, "pass": self.passed})
