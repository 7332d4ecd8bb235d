"""Time grids and sampled trajectories."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time nodes ``0 = t_0 < ... < t_M``.

    ``grading`` is ``"uniform"``, ``"graded"`` (nodes ``T (k/M)**gamma``) or
    ``"custom"``.
    """

    points: np.ndarray
    grading: str = "custom"
    gamma: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ShapeError("a time grid needs at least two points")
        if pts[0] != 0.0:
            raise ValidationError(f"time grid must start at 0, got {pts[0]}")
        if np.any(np.diff(pts) <= 0):
            raise ValidationError("time grid must be strictly increasing")
        if self.gamma < 1:
            raise ValidationError(f"grading exponent must be >= 1, got {self.gamma}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, T, M):
        return cls(np.linspace(0.0, T, M + 1), "uniform", 1.0)

    @classmethod
    def graded(cls, T, M, gamma=2.0):
        pts = T * (np.arange(M + 1) / M) ** gamma
        return cls(pts, "graded" if gamma != 1 else "uniform", float(gamma))

    @property
    def T(self):
        return float(self.points[-1])

    @property
    def M(self):
        return self.points.size - 1

    @property
    def steps(self):
        return np.diff(self.points)

    def refine(self):
        """Grid with the same grading and twice as many intervals."""
        if self.grading == "custom":
            mid = 0.5 * (self.points[1:] + self.points[:-1])
            pts = np.empty(2 * self.M + 1)
            pts[0::2] = self.points
            pts[1::2] = mid
            return TimeGrid(pts, "custom", self.gamma)
        return TimeGrid.graded(self.T, 2 * self.M, self.gamma)

    def extend(self, T_new, M_extra):
        """Append ``M_extra`` uniform steps reaching ``T_new``; old nodes are kept."""
        if T_new <= self.T:
            raise ValidationError("extension must reach beyond the current horizon")
        tail = np.linspace(self.T, T_new, M_extra + 1)[1:]
        return TimeGrid(np.concatenate([self.points, tail]), "custom", self.gamma)


@dataclass
class Trajectory:
    """Field values ``values[m, i]`` at times ``times[m]`` and spatial node ``i``."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.times.size:
            raise ShapeError(
                f"values of shape {self.values.shape} do not match {self.times.size} times"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("trajectory contains non-finite values")

    @classmethod
    def on_grid(cls, grid: TimeGrid, values, meta=None):
        return cls(grid.points, values, dict(meta or {}))

    @property
    def n_nodes(self):
        return self.values.shape[1]

    def scaled(self, factor):
        return Trajectory(self.times, factor * self.values, dict(self.meta))

    def restrict(self, T):
        keep = self.times <= T * (1 + 1e-14)
        return Trajectory(self.times[keep], self.values[keep], dict(self.meta))
