"""Finite-horizon dynamic programming for the optimal online selection policy.

Everything here lives in uniform coordinates, ``F(x) = x`` on ``[0, 1]``.
With ``k`` draws left and last selected value ``s`` the value function obeys

    v_k(s) = (1 - h_k(s) + s) v_{k-1}(s) + integral_s^{h_k(s)} (1 + v_{k-1}(x)) dx

where ``h_k(s)`` solves ``v_{k-1}(h) = v_{k-1}(s) - 1`` when ``v_{k-1}(s) > 1``
and equals 1 otherwise. Node slopes follow from

    v_k'(s) = -1 + (1 - h_k(s) + s) v_{k-1}'(s).

Between nodes each layer is the cubic Hermite interpolant of its node values
and node slopes; the recursion is applied to that interpolant exactly, so node
values, node slopes and off-node evaluations all describe one C1 function.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._hermite import HermiteLayer

__all__ = [
    "GridSpec",
    "ValueTable",
    "build_value_table",
    "value_at",
    "threshold_at",
    "critical_value",
    "derivative_at",
    "accepts",
]

logger = logging.getLogger(__name__)

# entries per table before construction is refused
MEMORY_GUARD = 2**31
# how many of the most recent critical values each layer keeps as knots
KINK_MEMORY = 16


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [0, 1] with ``points`` nodes, endpoints included."""

    points: int = 4097
    root_tolerance: float = 1e-12

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 65:
            raise ValueError(f"grid needs at least 65 points, got {self.points}")
        if not 0.0 < self.root_tolerance <= self.spacing:
            raise ValueError("root_tolerance must be positive and at most the node spacing")

    @property
    def spacing(self) -> float:
        return 1.0 / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.points)


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Gridded value functions, thresholds, critical values and slopes.

    Rows are indexed by the number of draws left, ``k = 0..horizon``. Row 0
    of ``thresholds`` and entry 0 of ``critical`` are NaN placeholders.
    ``kinks[k]`` holds rows ``(s, v_k(s), v_k'(s))`` at the most recent
    critical values ``s*_{k-1}, s*_{k-2}, ...``, where the second derivative
    of ``v_k`` jumps; unused rows are NaN.
    """

    grid: GridSpec
    horizon: int
    values: np.ndarray
    thresholds: np.ndarray
    critical: np.ndarray
    derivatives: np.ndarray
    kinks: np.ndarray
    _layers: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def layer(self, k: int, cache: bool = True) -> HermiteLayer:
        layer = self._layers.get(k)
        if layer is None:
            layer = HermiteLayer(self.values[k], self.derivatives[k], self.kinks[k])
            if cache:
                self._layers[k] = layer
        return layer

    def mean_length(self, n: int | None = None) -> float:
        """Expected number of selections ``v_n(0)`` with ``n`` draws."""
        return float(self.values[self.horizon if n is None else n, 0])


def _check_k(table: ValueTable, k: int, lowest: int) -> None:
    if not lowest <= k <= table.horizon:
        raise ValueError(f"k must lie in {lowest}..{table.horizon}, got {k}")


def _check_state(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("state must lie in [0, 1]")
    return s


def _scalar(out):
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def _thresholds(layer: HermiteLayer, s: np.ndarray, vs: np.ndarray, tol: float) -> np.ndarray:
    h = np.ones_like(s)
    conservative = vs > 1.0
    if np.any(conservative):
        roots = layer.solve_decreasing(vs[conservative] - 1.0, tol)
        h[conservative] = np.clip(roots, s[conservative], 1.0)
    return h


def build_value_table(n: int, grid: GridSpec | None = None) -> ValueTable:
    """Run the Bellman recursion for horizons ``0..n`` on ``grid``."""
    grid = GridSpec() if grid is None else grid
    if int(n) != n or n < 1:
        raise ValueError(f"horizon must be a positive integer, got {n}")
    n = int(n)
    if (n + 1) * grid.points > MEMORY_GUARD:
        raise MemoryError(f"table with n={n} and G={grid.points} exceeds the memory guard")
    G = grid.points
    s = grid.nodes
    values = np.zeros((n + 1, G))
    derivs = np.zeros((n + 1, G))
    thresholds = np.full((n + 1, G), np.nan)
    critical = np.full(n + 1, np.nan)
    kinks = np.full((n + 1, KINK_MEMORY, 3), np.nan)
    tol = grid.root_tolerance
    prev = HermiteLayer(values[0], derivs[0])
    for k in range(1, n + 1):
        recent = critical[max(1, k - KINK_MEMORY) : k][::-1]
        recent = recent[(recent > 0.0) & (recent < 1.0)]
        pts = np.concatenate((s, recent))
        vs = prev(pts)
        vs[:G] = values[k - 1]
        dvs = prev.slope(pts)
        dvs[:G] = derivs[k - 1]
        h = _thresholds(prev, pts, vs, tol)
        stay = 1.0 - h + pts
        row = stay * vs + (h - pts) + prev.integral(pts, h)
        drow = -1.0 + stay * dvs
        values[k] = row[:G]
        derivs[k] = drow[:G]
        thresholds[k] = h[:G]
        m = recent.shape[0]
        kinks[k, :m] = np.column_stack((recent, row[G:], drow[G:]))
        layer = HermiteLayer(values[k], derivs[k], kinks[k])
        critical[k] = 0.0 if values[k, 0] <= 1.0 else float(layer.solve_decreasing(1.0, tol))
        prev = layer
    logger.debug("built value table n=%d G=%d v_n(0)=%.12g", n, G, values[n, 0])
    return ValueTable(grid, n, values, thresholds, critical, derivs, kinks)


def value_at(table: ValueTable, k: int, s):
    """Expected future selections with ``k`` draws left from state ``s``."""
    _check_k(table, k, 0)
    s = _check_state(s)
    if k == 0:
        return _scalar(np.zeros_like(s))
    return _scalar(table.layer(k)(s))


def threshold_at(table: ValueTable, k: int, s):
    """Largest value accepted from state ``s`` with ``k`` draws left.

    Returns 1 on the greedy region ``v_{k-1}(s) <= 1``; otherwise the root of
    ``v_{k-1}(x) = v_{k-1}(s) - 1`` on the interpolated layer, to the grid's
    root tolerance.
    """
    _check_k(table, k, 1)
    s = np.atleast_1d(_check_state(s))
    if k == 1:
        h = np.ones_like(s)
    else:
        layer = table.layer(k - 1)
        h = _thresholds(layer, s, layer(s), table.grid.root_tolerance)
    return _scalar(h if h.size > 1 else h[0])


def critical_value(table: ValueTable, k: int) -> float:
    """State where ``v_k`` crosses 1; 0 when ``v_k(0) <= 1``."""
    _check_k(table, k, 1)
    return float(table.critical[k])


def derivative_at(table: ValueTable, k: int, s):
    """Slope of ``v_k`` at an interior state."""
    _check_k(table, k, 1)
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s <= 0.0) or np.any(s >= 1.0):
        raise ValueError("derivative is only defined at interior states (0, 1)")
    return _scalar(table.layer(k).slope(s))


def accepts(table: ValueTable, k: int, s, x, layer: HermiteLayer | None = None):
    """Acceptance rule with ``k`` draws left: ``x >= s`` and ``1 + v_{k-1}(x) >= v_{k-1}(s)``.

    For a strictly decreasing ``v_{k-1}`` this is membership of ``x`` in the
    closed interval ``[s, h_k(s)]`` without solving for the threshold.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if k == 1:
        return x >= s
    layer = table.layer(k - 1) if layer is None else layer
    return (x >= s) & (1.0 + (layer(x) - layer(s)) >= 0.0)
