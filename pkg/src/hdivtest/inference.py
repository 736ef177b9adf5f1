"""Single tests and confidence sets by grid inversion."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateStatisticError
from .statistics import Dataset, Method, TestResult, run_test

DEFAULT_HALF_WIDTH = 5.0


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    num_points: int = 100

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.num_points) != self.num_points or self.num_points < 2:
            raise ValueError("num_points must be an integer >= 2")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.num_points))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.num_points - 1)


@dataclass
class ConfidenceSet:
    """Grid points not rejected at level ``alpha``.

    Points where the statistic is undefined are kept (flagged in
    ``undefined``) since a test that cannot reject must not shrink the set.
    """

    method: Method
    alpha: float
    grid: np.ndarray
    accepted: np.ndarray
    undefined: np.ndarray
    statistics: np.ndarray
    p_values: np.ndarray
    intervals: list = field(default_factory=list)

    @property
    def undefined_points(self) -> list:
        return [float(b) for b in self.grid[self.undefined]]

    @property
    def length(self) -> float:
        """Sum of ``hi - lo`` over the accepted runs."""
        return float(sum(hi - lo for lo, hi in self.intervals))

    @property
    def status(self) -> list:
        out = []
        for acc, und in zip(self.accepted, self.undefined):
            out.append("undefined" if und else ("accepted" if acc else "rejected"))
        return out

    def contains(self, beta: float) -> bool:
        """Whether ``beta`` lies inside one of the accepted runs."""
        return any(lo <= beta <= hi for lo, hi in self.intervals)

    def summary(self) -> dict:
        return {
            "method": self.method.value,
            "alpha": self.alpha,
            "num_points": int(self.grid.size),
            "num_accepted": int(self.accepted.sum()),
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "length": self.length,
            "undefined_points": self.undefined_points,
        }


def accepted_runs(grid, accepted) -> list:
    """``(lo, hi)`` for every maximal run of consecutive accepted points."""
    runs = []
    start = None
    for i, ok in enumerate(accepted):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((float(grid[start]), float(grid[i - 1])))
            start = None
    if start is not None:
        runs.append((float(grid[start]), float(grid[len(accepted) - 1])))
    return runs


def test_at(
    data: Dataset,
    beta0: float,
    method="JAR",
    alpha: float = 0.05,
    gamma: Optional[float] = None,
) -> TestResult:
    """Test ``H0: beta = beta0`` with one of the five procedures."""
    return run_test(data, beta0, method, alpha, gamma)


test_at.__test__ = False


def invert(
    data: Dataset,
    grid: Optional[GridSpec] = None,
    method="JAR",
    alpha: float = 0.05,
    gamma: Optional[float] = None,
    focal: float = 0.0,
) -> ConfidenceSet:
    """Confidence set for ``beta`` by testing every point of ``grid``.

    Without a grid, ``[focal - 5, focal + 5]`` with 100 points is used and
    a warning notes that the endpoints are arbitrary.
    """
    method = Method.parse(method)
    if grid is None:
        grid = GridSpec(focal - DEFAULT_HALF_WIDTH, focal + DEFAULT_HALF_WIDTH)
        warnings.warn(
            f"no grid given; using [{grid.lo}, {grid.hi}] with {grid.num_points} points",
            stacklevel=2,
        )
    points = grid.points()
    m = points.size
    accepted = np.zeros(m, dtype=bool)
    undefined = np.zeros(m, dtype=bool)
    stats = np.full(m, np.nan)
    pvals = np.full(m, np.nan)
    for i, b in enumerate(points):
        try:
            res = run_test(data, b, method, alpha, gamma)
        except DegenerateStatisticError:
            undefined[i] = True
            accepted[i] = True
            continue
        accepted[i] = not res.reject
        stats[i] = res.statistic
        pvals[i] = res.p_value
    if undefined.any():
        warnings.warn(
            f"{method.value} undefined at {int(undefined.sum())} grid point(s); kept in the set",
            stacklevel=2,
        )
    return ConfidenceSet(
        method=method,
        alpha=float(alpha),
        grid=points,
        accepted=accepted,
        undefined=undefined,
        statistics=stats,
        p_values=pvals,
        intervals=accepted_runs(points, accepted),
    )
