"""Norm result record shared by the analysis modules."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

#: Methods a NormReport may carry.
METHODS = ("exact-cell", "monte-carlo", "parseval", "warnock", "proxy-sup-p", "bisection")


@dataclass(frozen=True)
class NormReport:
    """A computed norm value with its method and provenance.

    ``error_bound`` is required for stochastic methods and None for exact
    ones (exact means: exact rational arithmetic, rounded once at the end).
    """

    value: float
    method: str
    error_bound: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("norm value must be >= 0")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "monte-carlo" and self.error_bound is None:
            raise ValueError("stochastic estimates must carry an error bound")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "error_bound": self.error_bound,
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
