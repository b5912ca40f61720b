"""Uniform symmetric 1-D grids and sampled functions.

Every numeric object in the package lives on a grid x_i = (i - m) h,
i = 0..2m, so the node count is odd, x = 0 is always a node, and the node
set is exactly symmetric under x -> -x (bitwise, since x_{n-1-i} is
computed as -(i-m)h). Quadrature is the trapezoidal rule on [-L, L];
nothing here extrapolates beyond the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import GridMismatchError, SamplingError


@dataclass(frozen=True)
class Grid:
    """Symmetric uniform grid on [-L, L] with an odd number of nodes.

    half_extent must be an exact integer multiple of spacing (within a few
    ulp; the constructor snaps it). Use make_grid to build a grid from a
    requested, possibly inexact, half extent.
    """

    half_extent: float
    spacing: float
    nodes: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be positive and finite")
        if not (self.half_extent > 0 and math.isfinite(self.half_extent)):
            raise ValueError("half_extent must be positive and finite")
        ratio = self.half_extent / self.spacing
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9 * max(1.0, abs(m)):
            raise ValueError(
                "half_extent must be an exact multiple of spacing; "
                "use make_grid to adjust it"
            )
        object.__setattr__(self, "half_extent", m * self.spacing)
        nodes = np.arange(-m, m + 1, dtype=np.int64) * self.spacing
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def center_index(self) -> int:
        return (self.point_count - 1) // 2

    @property
    def point_count(self) -> int:
        return int(round(self.half_extent / self.spacing)) * 2 + 1


def make_grid(half_extent: float, spacing: float) -> Grid:
    """Build a grid, adjusting the half extent upward (never down) to the
    nearest exact multiple of the spacing."""
    if not (half_extent > 0 and math.isfinite(half_extent)):
        raise ValueError("half_extent must be positive and finite")
    if not (spacing > 0 and math.isfinite(spacing)):
        raise ValueError("spacing must be positive and finite")
    if spacing > half_extent:
        raise ValueError("spacing must not exceed half_extent")
    ratio = half_extent / spacing
    m = math.ceil(ratio - 1e-9)
    return Grid(m * spacing, spacing)


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled on a Grid. Values are immutable."""

    grid: Grid
    values: np.ndarray
    nonfinite_ok: bool = field(default=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.ndim != 1 or values.shape[0] != self.grid.point_count:
            raise ValueError(
                f"values must be 1-D with {self.grid.point_count} entries, "
                f"got shape {values.shape}"
            )
        if not self.nonfinite_ok and not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise SamplingError(
                f"non-finite value {values[bad]!r} at node x = {self.grid.nodes[bad]!r}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values, nonfinite_ok=self.nonfinite_ok)


def sample(f: Callable[[float], float], grid: Grid) -> GridFunction:
    """Sample a scalar function at the grid nodes.

    Raises SamplingError naming the offending node if f produces NaN/Inf.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            values = np.asarray(f(grid.nodes), dtype=np.float64)
            if values.shape != grid.nodes.shape:
                raise TypeError
        except SamplingError:
            raise
        except Exception:
            values = np.array([float(f(x)) for x in grid.nodes], dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise SamplingError(
            f"function produced non-finite value {values[i]!r} at node x = {grid.nodes[i]!r}"
        )
    return GridFunction(grid, values)


def _same_grid(g: GridFunction, g2: GridFunction) -> None:
    if g.grid != g2.grid:
        raise GridMismatchError(
            f"grids differ: (L={g.grid.half_extent}, h={g.grid.spacing}) vs "
            f"(L={g2.grid.half_extent}, h={g2.grid.spacing})"
        )


def integrate(g: GridFunction) -> float:
    """Trapezoidal integral h * (v0/2 + v1 + ... + v_{n-2} + v_{n-1}/2)."""
    v = g.values
    return float(g.grid.spacing * (v.sum() - 0.5 * (v[0] + v[-1])))


def sup_norm(g: GridFunction) -> float:
    return float(np.max(np.abs(g.values)))


def ell1_distance(g: GridFunction, g2: GridFunction) -> float:
    """h-weighted sum of |g - g2| over all nodes."""
    _same_grid(g, g2)
    return float(g.grid.spacing * np.abs(g.values - g2.values).sum())


def write_csv(g: GridFunction, path: str | Path, value_name: str = "value") -> None:
    """Write (x, value) rows with 17 significant digits, LF line endings."""
    lines = [f"x,{value_name}"]
    for x, v in zip(g.grid.nodes, g.values):
        lines.append(f"{x:.17g},{v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: str | Path) -> GridFunction:
    """Read a (x, value) CSV written by write_csv and rebuild the grid."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows or not rows[0].lower().startswith("x,"):
        raise ValueError(f"{path}: expected header 'x,<value>'")
    xs, vs = [], []
    for line in rows[1:]:
        sx, sv = line.split(",")[:2]
        xs.append(float(sx))
        vs.append(float(sv))
    xs_arr = np.asarray(xs)
    if len(xs_arr) < 3 or len(xs_arr) % 2 == 0:
        raise ValueError(f"{path}: node count must be odd and >= 3")
    h = xs_arr[1] - xs_arr[0]
    grid = Grid(float(xs_arr[-1]), float(h))
    if not np.allclose(grid.nodes, xs_arr, rtol=0, atol=1e-9 * max(1.0, abs(xs_arr[-1]))):
        raise ValueError(f"{path}: nodes are not a symmetric uniform grid")
    return GridFunction(grid, np.asarray(vs), nonfinite_ok=True)
