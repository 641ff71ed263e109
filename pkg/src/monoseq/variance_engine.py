"""Conditional variances of the remaining number of selections.

``w_k(s)`` is the variance of the number of future selections with ``k`` draws
left from state ``s``. Conditioning on the next draw gives the one-step form

    w_k(s) = integral_s^h [(1 + v_{k-1}(x) - v_k(s))^2 + w_{k-1}(x)] dx
             + (1 - h + s) [(v_{k-1}(s) - v_k(s))^2 + w_{k-1}(s)]

with ``h = h_k(s)``. Squares are taken around ``v_k(s)`` so no large second
moment is ever differenced against ``v_k(s)^2``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ._hermite import HermiteLayer
from .value_engine import GridSpec, ValueTable, _check_k, _check_state, _scalar

__all__ = [
    "VarianceTable",
    "build_variance_table",
    "variance_at",
    "ab_components",
    "drift_at",
    "step_moments",
    "conditional_variance_series",
]

logger = logging.getLogger(__name__)

NEGATIVE_WARN = -1e-8


@dataclass(frozen=True, eq=False)
class VarianceTable:
    grid: GridSpec
    horizon: int
    wvalues: np.ndarray

    def total_variance(self, n: int | None = None) -> float:
        return float(self.wvalues[self.horizon if n is None else n, 0])


def _linear_integral(w: np.ndarray, dx: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integral over [a, b] of the piecewise-linear interpolant of ``w``."""
    cum = np.concatenate(([0.0], np.cumsum(dx * (w[:-1] + w[1:]) / 2.0)))
    last = w.shape[0] - 2

    def anti(x):
        j = np.clip(np.floor(x / dx).astype(np.intp), 0, last)
        t = x / dx - j
        wx = w[j] + (w[j + 1] - w[j]) * t
        return cum[j] + (x - j * dx) * (w[j] + wx) / 2.0

    return anti(b) - anti(a)


def build_variance_table(vt: ValueTable) -> VarianceTable:
    grid = vt.grid
    s = grid.nodes
    dx = grid.spacing
    n = vt.horizon
    w = np.zeros((n + 1, grid.points))
    worst = 0.0
    for k in range(1, n + 1):
        prev = vt.layer(k - 1, cache=False)
        vk = vt.values[k]
        h = vt.thresholds[k]
        selected = prev.integral_sq(s, h, 1.0 - vk)
        carried = _linear_integral(w[k - 1], dx, s, h)
        stay = 1.0 - h + s
        row = selected + carried + stay * ((vt.values[k - 1] - vk) ** 2 + w[k - 1])
        worst = min(worst, float(row.min()))
        w[k] = np.maximum(row, 0.0)
    if worst < NEGATIVE_WARN:
        warnings.warn(f"variance recursion produced {worst:.3g} before clamping", RuntimeWarning)
    logger.debug("built variance table n=%d w_n(0)=%.12g", n, w[n, 0])
    return VarianceTable(grid, n, w)


def variance_at(table: VarianceTable, k: int, s):
    """Conditional variance ``w_k(s)``, linearly interpolated between nodes."""
    if not 0 <= k <= table.horizon:
        raise ValueError(f"k must lie in 0..{table.horizon}, got {k}")
    s = _check_state(s)
    return _scalar(np.interp(s, table.grid.nodes, table.wvalues[k]))


def ab_components(vt: ValueTable, k: int, s, x):
    """Split of the martingale increment for one draw ``x`` from state ``s``.

    ``B = v_{k-1}(s) - v_k(s)`` is the change when nothing is selected and
    ``A = (1 + v_{k-1}(x) - v_{k-1}(s))`` on acceptance, 0 otherwise.
    """
    _check_k(vt, k, 1)
    s = _check_state(s)
    x = _check_state(x)
    prev, cur = vt.layer(k - 1), vt.layer(k)
    vs = prev(s)
    b = vs - cur(s)
    gain = 1.0 + (prev(x) - vs)
    a = np.where((x >= s) & (gain >= 0.0), gain, 0.0)
    return _scalar(a), _scalar(b)


def step_moments(vt: ValueTable, k: int, s, prev: HermiteLayer | None = None, cur: HermiteLayer | None = None):
    """Conditional moments of one step from states ``s`` with ``k`` draws left.

    Returns ``(mean_a, mean_a2, b)``: the integrals of ``A`` and ``A**2`` over
    the next draw, and the predictable part ``B``.
    """
    s = np.asarray(s, dtype=float)
    prev = vt.layer(k - 1, cache=False) if prev is None else prev
    cur = vt.layer(k, cache=False) if cur is None else cur
    vs = prev(s)
    if k == 1:
        h = np.ones_like(s)
    else:
        h = np.ones_like(s)
        conservative = vs > 1.0
        if np.any(conservative):
            h[conservative] = np.clip(
                prev.solve_decreasing(vs[conservative] - 1.0, vt.grid.root_tolerance),
                s[conservative],
                1.0,
            )
    shift = 1.0 - vs
    mean_a = shift * (h - s) + prev.integral(s, h)
    mean_a2 = prev.integral_sq(s, h, shift)
    b = vs - cur(s)
    return mean_a, mean_a2, b


def drift_at(vt: ValueTable, k: int, s):
    """Conditional mean of the martingale increment; zero up to quadrature error."""
    _check_k(vt, k, 1)
    s = _check_state(s)
    mean_a, _, b = step_moments(vt, k, np.atleast_1d(s))
    out = mean_a + b
    return _scalar(out if s.ndim else out[0])


def conditional_variance_series(vt: ValueTable, wt: VarianceTable | None, trace) -> float:
    """Sum over a trace of the conditional second moments of the increments."""
    if wt is not None and wt.grid != vt.grid:
        raise ValueError("variance table was built on a different grid")
    n = trace.n
    if n != vt.horizon:
        raise ValueError("trace horizon does not match the value table")
    total = 0.0
    for j in range(1, n + 1):
        k = n - j + 1
        _, mean_a2, b = step_moments(vt, k, np.atleast_1d(trace.running_max[j - 1]))
        total += float(mean_a2[0] - b[0] ** 2)
    return total
