"""Piecewise cubic Hermite interpolation on a uniform grid over [0, 1].

A layer is built from node values and node slopes, optionally with a few extra
knots inside grid cells. The value tables carry exact node slopes, so the
interpolant is C1 and reproduces cubics exactly. Extra knots go where a layer
loses its second derivative (the recent critical values), which is where a
plain cubic per cell is least accurate. All methods are vectorized.
"""

from __future__ import annotations

import numpy as np

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


class HermiteLayer:
    __slots__ = ("points", "dx", "xs", "y", "dy", "widths", "cum1", "_cum2", "_kx")

    def __init__(self, y: np.ndarray, dy: np.ndarray, knots: np.ndarray | None = None):
        """``knots`` is an optional ``(m, 3)`` array of ``(x, value, slope)`` rows.

        Rows with a NaN position, or positions on a grid node, are ignored.
        """
        y = np.asarray(y, dtype=float)
        dy = np.asarray(dy, dtype=float)
        self.points = y.shape[0]
        self.dx = 1.0 / (self.points - 1)
        xs = np.linspace(0.0, 1.0, self.points)
        self._kx = np.empty(0)
        if knots is not None:
            knots = np.asarray(knots, dtype=float).reshape(-1, 3)
            kx = knots[:, 0]
            cell = np.clip(np.floor(np.nan_to_num(kx) * (self.points - 1)).astype(np.intp), 0, self.points - 2)
            keep = np.isfinite(kx) & (kx > xs[cell]) & (kx < xs[cell + 1])
            knots = knots[keep]
            knots = knots[np.unique(knots[:, 0], return_index=True)[1]]
            if knots.shape[0]:
                self._kx = knots[:, 0]
                at = np.searchsorted(xs, self._kx)
                xs = np.insert(xs, at, self._kx)
                y = np.insert(y, at, knots[:, 1])
                dy = np.insert(dy, at, knots[:, 2])
        self.xs, self.y, self.dy = xs, y, dy
        self.widths = np.diff(xs)
        w = self.widths
        seg1 = w * (y[:-1] + y[1:]) / 2.0 + w * w * (dy[:-1] - dy[1:]) / 12.0
        self.cum1 = np.concatenate(([0.0], np.cumsum(seg1)))
        self._cum2 = None

    @property
    def cum2(self) -> np.ndarray:
        # only the variance recursion and the trace moments need this
        if self._cum2 is None:
            seg = np.arange(self.xs.shape[0] - 1)
            lo = self.xs[:-1]
            seg2 = self._gauss_shifted(seg, lo, lo + self.widths, np.zeros_like(lo))
            self._cum2 = np.concatenate(([0.0], np.cumsum(seg2)))
        return self._cum2

    # -- locating points -------------------------------------------------
    def segment(self, x):
        x = np.asarray(x, dtype=float)
        j = np.clip(np.floor(x * (self.points - 1)).astype(np.intp), 0, self.points - 2)
        if self._kx.size:
            j = j + np.searchsorted(self._kx, x, side="right")
        return j

    def node(self, j):
        return self.xs[j]

    # -- polynomial pieces -----------------------------------------------
    def on_segment(self, j, x):
        """Value of segment ``j``'s cubic at ``x`` (``x`` need not lie in it)."""
        w = self.widths[j]
        t = (x - self.xs[j]) / w
        t2 = t * t
        t3 = t2 * t
        return (
            self.y[j] * (2 * t3 - 3 * t2 + 1)
            + w * self.dy[j] * (t3 - 2 * t2 + t)
            + self.y[j + 1] * (3 * t2 - 2 * t3)
            + w * self.dy[j + 1] * (t3 - t2)
        )

    def slope_on_segment(self, j, x):
        w = self.widths[j]
        t = (x - self.xs[j]) / w
        t2 = t * t
        return (
            self.y[j] * (6 * t2 - 6 * t) / w
            + self.dy[j] * (3 * t2 - 4 * t + 1)
            + self.y[j + 1] * (6 * t - 6 * t2) / w
            + self.dy[j + 1] * (3 * t2 - 2 * t)
        )

    def _partial(self, j, x):
        """Integral of segment ``j``'s cubic from its left knot to ``x``."""
        w = self.widths[j]
        t = (x - self.xs[j]) / w
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        return w * (
            self.y[j] * (t4 / 2 - t3 + t)
            + w * self.dy[j] * (t4 / 4 - 2 * t3 / 3 + t2 / 2)
            + self.y[j + 1] * (t3 - t4 / 2)
            + w * self.dy[j + 1] * (t4 / 4 - t3 / 3)
        )

    def _gauss_shifted(self, j, a, b, c):
        half = (b - a) / 2.0
        mid = (a + b) / 2.0
        pts = mid[..., None] + half[..., None] * _GAUSS_X
        vals = c[..., None] + self.on_segment(j[..., None], pts)
        return half * ((vals * vals) @ _GAUSS_W)

    # -- public evaluation ----------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.on_segment(self.segment(x), x)

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        return self.slope_on_segment(self.segment(x), x)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        j = self.segment(x)
        return self.cum1[j] + self._partial(j, x)

    def integral(self, a, b):
        return self.antiderivative(b) - self.antiderivative(a)

    def integral_sq(self, a, b, c):
        """Integral of ``(c + V(x))**2`` over ``[a, b]`` with ``a <= b``.

        Partial end segments use 4-point Gauss-Legendre, which is exact for
        the degree-six integrand; full segments use the cached moments.
        """
        a, b, c = np.broadcast_arrays(
            np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float)
        )
        ia = self.segment(a)
        ib = self.segment(b)
        same = ia == ib
        right_a = np.where(same, b, self.xs[np.minimum(ia + 1, self.xs.shape[0] - 1)])
        first = self._gauss_shifted(ia, a, right_a, c)
        last = np.where(same, 0.0, self._gauss_shifted(ib, self.xs[ib], b, c))
        lo = np.minimum(ia + 1, ib)
        length = self.xs[ib] - self.xs[lo]
        middle = (
            c * c * length
            + 2.0 * c * (self.cum1[ib] - self.cum1[lo])
            + (self.cum2[ib] - self.cum2[lo])
        )
        middle = np.where(same, 0.0, middle)
        return first + middle + last

    def solve_decreasing(self, target, tol: float):
        """Solve ``V(x) = target`` for a non-increasing layer.

        ``target`` must lie in ``[V(1), V(0)]``. The bracketing segment is
        found from the knot values; safeguarded Newton steps on its cubic then
        shrink the bracket, falling back to bisection whenever a step leaves
        it, until the step size drops below ``tol``.
        """
        target = np.asarray(target, dtype=float)
        j = np.searchsorted(-self.y, -target, side="right") - 1
        j = np.clip(j, 0, self.xs.shape[0] - 2)
        lo = self.xs[j].copy()
        hi = self.xs[j + 1].copy()
        g_lo = self.y[j] - target
        g_hi = self.y[j + 1] - target
        denom = g_lo - g_hi
        safe = denom > 0.0
        x = lo + np.where(safe, g_lo / np.where(safe, denom, 1.0), 0.0) * (hi - lo)
        for _ in range(64):
            g = self.on_segment(j, x) - target
            up = g >= 0.0
            lo = np.where(up, x, lo)
            hi = np.where(up, hi, x)
            d = self.slope_on_segment(j, x)
            ok = d < 0.0
            step = np.where(ok, -g / np.where(ok, d, -1.0), np.inf)
            nxt = x + step
            inside = ok & (nxt >= lo) & (nxt <= hi)
            nxt = np.where(inside, nxt, 0.5 * (lo + hi))
            moved = np.abs(nxt - x)
            x = nxt
            if not np.any(moved > tol):
                break
        return np.clip(x, self.xs[j], self.xs[j + 1])
