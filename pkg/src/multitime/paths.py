"""n-paths: one world line per particle, each a graph over its own time.

Samples carry the state derivatives, so queries between sample times use
cubic Hermite interpolation (third-order accurate without re-integration).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

__all__ = ["WorldLine", "NPath", "PathRangeError"]


class PathRangeError(ValueError):
    """Query time outside the sampled range of a world line."""


@dataclass
class WorldLine:
    """Sampled world line of one particle: t strictly increasing, with
    x, p of shape (len(t), d) and their time derivatives alongside."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    dxdt: np.ndarray
    dpdt: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, float)
        for name in ("x", "p", "dxdt", "dpdt"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), float))
            if arr.shape[0] != len(self.t):
                arr = arr.T
            setattr(self, name, arr)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        self._x_spline = CubicHermiteSpline(self.t, self.x, self.dxdt)
        self._p_spline = CubicHermiteSpline(self.t, self.p, self.dpdt)
        self._dx_spline = self._x_spline.derivative()
        self._dp_spline = self._p_spline.derivative()

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def _check(self, time: float) -> None:
        if time < self.t_min - 1e-12 or time > self.t_max + 1e-12:
            raise PathRangeError(
                f"time {time} outside sampled range [{self.t_min}, {self.t_max}]"
            )

    def x_at(self, time: float) -> np.ndarray:
        self._check(time)
        return np.asarray(self._x_spline(time), float)

    def p_at(self, time: float) -> np.ndarray:
        self._check(time)
        return np.asarray(self._p_spline(time), float)

    def dxdt_at(self, time: float) -> np.ndarray:
        self._check(time)
        return np.asarray(self._dx_spline(time), float)

    def dpdt_at(self, time: float) -> np.ndarray:
        self._check(time)
        return np.asarray(self._dp_spline(time), float)


@dataclass
class NPath:
    lines: list[WorldLine]

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def d(self) -> int:
        return self.lines[0].x.shape[1]

    def line(self, j: int) -> WorldLine:
        """World line of particle ``j`` (1-based)."""
        if not 1 <= j <= self.n:
            raise ValueError(f"particle {j} outside 1..{self.n}")
        return self.lines[j - 1]

    def common_time_range(self) -> tuple[float, float]:
        lo = max(line.t_min for line in self.lines)
        hi = min(line.t_max for line in self.lines)
        return lo, hi

    def max_speed(self) -> float:
        """Largest sampled |dx/dt|; >= 1 means a non-timelike sample."""
        return max(
            float(np.max(np.linalg.norm(line.dxdt, axis=1))) for line in self.lines
        )

    def export_csv(self, path: str) -> None:
        d = self.d
        header = (
            ["particle", "t"]
            + [f"x_{i + 1}" for i in range(d)]
            + [f"p_{i + 1}" for i in range(d)]
            + [f"dxdt_{i + 1}" for i in range(d)]
            + [f"dpdt_{i + 1}" for i in range(d)]
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for j, line in enumerate(self.lines, start=1):
                for i in range(len(line.t)):
                    writer.writerow(
                        [j, repr(float(line.t[i]))]
                        + [repr(float(v)) for v in line.x[i]]
                        + [repr(float(v)) for v in line.p[i]]
                        + [repr(float(v)) for v in line.dxdt[i]]
                        + [repr(float(v)) for v in line.dpdt[i]]
                    )
