"""Evaluated-strategy record shared across actors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

Method = Literal["closed-form", "enumeration", "simulation", "optimization"]


@dataclass(frozen=True)
class StrategyReport:
    probability: float
    method: Method
    parameters: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
