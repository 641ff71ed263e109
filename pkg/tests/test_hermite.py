import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoseq._hermite import HermiteLayer

G = 65
X = np.linspace(0.0, 1.0, G)


def cubic_layer(c, knots=None):
    a, b, d, e = c
    y = a + b * X + d * X**2 + e * X**3
    dy = b + 2 * d * X + 3 * e * X**2
    if knots is not None:
        k = np.asarray(knots)
        knots = np.column_stack((k, a + b * k + d * k**2 + e * k**3, b + 2 * d * k + 3 * e * k**2))
    return HermiteLayer(y, dy, knots)


coefs = st.tuples(*[st.floats(-3, 3) for _ in range(4)])
points = st.floats(0.0, 1.0)


@settings(max_examples=50)
@given(coefs, points)
def test_reproduces_cubics(c, x):
    layer = cubic_layer(c)
    a, b, d, e = c
    assert layer(x) == pytest.approx(a + b * x + d * x**2 + e * x**3, abs=1e-12)
    assert layer.slope(x) == pytest.approx(b + 2 * d * x + 3 * e * x**2, abs=1e-10)


@settings(max_examples=50)
@given(coefs, points, points)
def test_integrals_of_cubics(c, p, q):
    lo, hi = min(p, q), max(p, q)
    a, b, d, e = c
    anti = lambda x: a * x + b * x**2 / 2 + d * x**3 / 3 + e * x**4 / 4
    layer = cubic_layer(c, knots=[0.3001, 0.77])
    assert layer.integral(lo, hi) == pytest.approx(anti(hi) - anti(lo), abs=1e-12)
    t = np.linspace(lo, hi, 2001)
    f = (0.5 + a + b * t + d * t**2 + e * t**3) ** 2
    # reference by composite Simpson on a fine grid
    ref = (hi - lo) / 6000 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
    assert layer.integral_sq(lo, hi, 0.5) == pytest.approx(ref, abs=1e-9)


def test_knots_inserted_and_ignored():
    layer = cubic_layer((1, -1, 0, 0), knots=[0.5, 0.51, np.nan, 0.51])
    # 0.5 is a node, NaN is padding, the duplicate collapses
    assert layer.xs.shape[0] == G + 1
    assert np.all(np.diff(layer.xs) > 0)


@settings(max_examples=50)
@given(st.floats(0.0, 1.0))
def test_solve_decreasing(target_frac):
    layer = cubic_layer((2.0, -1.0, -0.5, -0.25), knots=[0.41])
    lo, hi = layer(1.0), layer(0.0)
    target = lo + target_frac * (hi - lo)
    root = layer.solve_decreasing(np.array([target]), 1e-13)[0]
    assert 0.0 <= root <= 1.0
    assert layer(root) == pytest.approx(target, abs=1e-12)
