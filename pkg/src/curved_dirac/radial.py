"""Sampled radial functions."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import fd

VARIABLES = ("r", "rho", "y")


@dataclass(frozen=True)
class RadialFunction:
    """Samples of one spinor component on a grid of its natural variable."""

    grid: np.ndarray
    values: np.ndarray
    variable: str = "r"
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}")
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")

    def __len__(self) -> int:
        return self.grid.size

    def with_values(self, values, **meta) -> "RadialFunction":
        return replace(self, values=np.asarray(values, dtype=float), meta={**self.meta, **meta})

    def scaled(self, c: float) -> "RadialFunction":
        return self.with_values(c * self.values)

    def tail_ratio(self, end: str = "outer") -> float:
        """|value at the decaying boundary| / max|value|."""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            return 0.0
        edge = self.values[-1] if end == "outer" else self.values[0]
        return float(abs(edge) / peak)

    def sign_changes(self, rel_floor: float = 1e-9) -> int:
        """Interior sign changes, ignoring samples below rel_floor * max."""
        v = self.values
        keep = np.abs(v) > rel_floor * np.max(np.abs(v))
        s = np.sign(v[keep])
        return int(np.count_nonzero(s[1:] != s[:-1]))

    @property
    def spacing(self) -> fd.Spacing:
        return fd.classify(self.grid)
