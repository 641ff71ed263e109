"""Closed-form value functions for horizons one to three.

Written independently of the grid code: plain floats, exact polynomial
antiderivatives, no interpolation. Used as a test oracle.
"""

import math

__all__ = ["small_n_oracle", "small_n_threshold", "SQRT2_MINUS_1", "SQRT3_MINUS_1"]

SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0
SQRT3_MINUS_1 = math.sqrt(3.0) - 1.0


def _v2(s: float) -> float:
    return 1.5 - s - s * s / 2.0


def _antiderivative_1_plus_v2(x: float) -> float:
    return 2.5 * x - x * x / 2.0 - x ** 3 / 6.0


def small_n_threshold(k: int, s: float) -> float:
    """Optimal acceptance threshold with ``k`` draws left, for ``k <= 3``."""
    if not 1 <= k <= 3:
        raise ValueError("closed forms exist only for k in 1..3")
    if k < 3 or s >= SQRT2_MINUS_1:
        return 1.0
    return -1.0 + math.sqrt(3.0 + 2.0 * s + s * s)


def small_n_oracle(k: int, s: float) -> float:
    """Exact ``v_k(s)`` in uniform coordinates for ``k`` in 1..3."""
    if not 1 <= k <= 3:
        raise ValueError("closed forms exist only for k in 1..3")
    if not 0.0 <= s <= 1.0:
        raise ValueError("state must lie in [0, 1]")
    if k == 1:
        return 1.0 - s
    if k == 2:
        return _v2(s)
    h = small_n_threshold(3, s)
    return (1.0 - h + s) * _v2(s) + _antiderivative_1_plus_v2(h) - _antiderivative_1_plus_v2(s)
