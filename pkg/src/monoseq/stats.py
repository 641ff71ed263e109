"""Summaries of simulated lengths and reports on the computed tables."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtr

from .value_engine import ValueTable, _thresholds
from .variance_engine import VarianceTable, drift_at

__all__ = [
    "MonteCarloSummary",
    "BoundRow",
    "BoundReport",
    "PropertyRecord",
    "clt_statistic",
    "clt_inverse",
    "ks_to_standard_normal",
    "histogram",
    "summarize",
    "bound_report",
    "property_report",
    "trace_property_report",
]

HIST_BINS = 61
HIST_RANGE = 4.0

SQRT3 = math.sqrt(3.0)


def clt_statistic(length, n: int, center=None):
    """``sqrt(3) (L - c) / (2n)^(1/4)`` with ``c = sqrt(2n)`` unless ``center`` is given."""
    if n < 1:
        raise ValueError("n must be at least 1")
    c = math.sqrt(2.0 * n) if center is None else center
    z = SQRT3 * (np.asarray(length, dtype=float) - c) / (2.0 * n) ** 0.25
    return float(z) if z.ndim == 0 else z


def clt_inverse(z, n: int, center=None):
    if n < 1:
        raise ValueError("n must be at least 1")
    c = math.sqrt(2.0 * n) if center is None else center
    out = c + np.asarray(z, dtype=float) * (2.0 * n) ** 0.25 / SQRT3
    return float(out) if out.ndim == 0 else out


def ks_to_standard_normal(zs) -> float:
    """Kolmogorov-Smirnov distance between the sample's empirical CDF and N(0, 1)."""
    z = np.sort(np.asarray(zs, dtype=float).ravel())
    m = z.shape[0]
    if m == 0:
        raise ValueError("need at least one sample")
    phi = ndtr(z)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - phi), np.max(phi - (i - 1) / m)))


def histogram(zs, bins: int = HIST_BINS, span: float = HIST_RANGE):
    """Counts on ``bins`` equal bins over ``[-span, span]`` plus two overflow bins.

    Returns ``(edges, counts)``; ``edges`` has ``bins + 3`` entries starting
    at ``-inf`` and ending at ``+inf``.
    """
    z = np.asarray(zs, dtype=float).ravel()
    inner = np.linspace(-span, span, bins + 1)
    edges = np.concatenate(([-np.inf], inner, [np.inf]))
    counts = np.zeros(bins + 2, dtype=np.int64)
    counts[0] = np.count_nonzero(z < -span)
    counts[-1] = np.count_nonzero(z > span)
    counts[1:-1] = np.histogram(z[(z >= -span) & (z <= span)], bins=inner)[0]
    return edges, counts


@dataclass(frozen=True)
class MonteCarloSummary:
    n: int
    reps: int
    mean: float
    variance: float
    stderr_mean: float
    ks_distance: float
    edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    ks_alt_centering: float | None = None

    def histogram_rows(self):
        return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "mean": self.mean,
            "stderr": self.stderr_mean,
            "variance": self.variance,
            "ks": self.ks_distance,
            "ks_alt_centering": self.ks_alt_centering,
        }


def summarize(samples, n: int, mean_center: float | None = None) -> MonteCarloSummary:
    """Mean, variance, CLT fit and histogram for a batch of lengths.

    ``mean_center`` (typically ``v_n(0)``) adds a second KS distance with the
    normalization centered there instead of at ``sqrt(2n)``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.shape[0] < 2:
        raise ValueError("need at least two samples")
    reps = x.shape[0]
    variance = float(np.var(x, ddof=1))
    z = clt_statistic(x, n)
    edges, counts = histogram(z)
    alt = None
    if mean_center is not None:
        alt = ks_to_standard_normal(clt_statistic(x, n, center=mean_center))
    return MonteCarloSummary(
        n=n,
        reps=reps,
        mean=float(np.mean(x)),
        variance=variance,
        stderr_mean=math.sqrt(variance / reps),
        ks_distance=ks_to_standard_normal(z),
        edges=edges,
        counts=counts,
        ks_alt_centering=alt,
    )


@dataclass(frozen=True)
class BoundRow:
    n: int
    mean: float
    sqrt_2n: float
    gap_ratio: float
    variance: float
    lower: float
    upper: float
    mean_ok: bool
    variance_ok: bool

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.variance_ok


@dataclass(frozen=True)
class BoundReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) | {"passed": r.passed} for r in self.rows], "passed": self.passed}


def bound_report(vt: ValueTable, wt: VarianceTable, n_list) -> BoundReport:
    rows = []
    for n in n_list:
        n = int(n)
        if not 1 <= n <= min(vt.horizon, wt.horizon):
            raise ValueError(f"n={n} is outside the tables (horizon {vt.horizon})")
        v = vt.mean_length(n)
        w = wt.total_variance(n)
        root = math.sqrt(2.0 * n)
        # log 1 = 0, so the ratio is undefined at n = 1
        ratio = (root - v) / math.log(n) if n > 1 else math.nan
        lower = v / 3.0 - 2.0
        upper = v / 3.0 + 2.0 / 3.0 * (1.0 + math.log(n))
        rows.append(BoundRow(n, v, root, ratio, w, lower, upper, v < root, lower <= w <= upper))
    return BoundReport(rows)


@dataclass(frozen=True)
class PropertyRecord:
    name: str
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "max_violation": self.max_violation, "tolerance": self.tolerance, "passed": self.passed}


def _worst(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(max(0.0, np.max(x))) if x.size else 0.0


def _exponential_grid(vt: ValueTable, step: float) -> np.ndarray:
    # stop 64 cells short of u = 1, where the uniform grid no longer resolves the curvature
    e_max = -math.log(64.0 * vt.grid.spacing)
    e = np.arange(0.0, e_max, step)
    return -np.expm1(-e)


def _threshold_slope_check(vt: ValueTable, step: float = 1e-6):
    """Worst mismatch of the threshold slope against ``v'(s)/v'(h)``, and the worst
    node-to-node slope outside [0, 1].

    The slope is a central difference of exact thresholds at ``s +- step``;
    node spacing is too coarse right below the critical value, where the
    conservative region spans only a few cells.
    """
    s = vt.nodes
    dx = vt.grid.spacing
    tol = vt.grid.root_tolerance
    mismatch = 0.0
    lipschitz = 0.0
    for k in range(3, vt.horizon + 1):
        crit = vt.critical[k - 1]
        inner = s[(s > step) & (s + step < crit)]
        if inner.size == 0:
            continue
        prev = vt.layer(k - 1, cache=False)
        up = inner + step
        down = inner - step
        fd = (_thresholds(prev, up, prev(up), tol) - _thresholds(prev, down, prev(down), tol)) / (2.0 * step)
        h = _thresholds(prev, inner, prev(inner), tol)
        ratio = prev.slope(inner) / prev.slope(h)
        mismatch = max(mismatch, float(np.max(np.abs(fd - ratio))))
        nodes = vt.thresholds[k][: np.count_nonzero(s < crit)]
        secant = np.diff(nodes) / dx
        lipschitz = max(lipschitz, _worst(-secant), _worst(secant - 1.0))
    return mismatch, lipschitz


def property_report(vt: ValueTable, wt: VarianceTable | None = None) -> list[PropertyRecord]:
    """Worst violation of each structural property over the whole table."""
    v = vt.values
    s = vt.nodes
    n = vt.horizon
    dx = vt.grid.spacing
    records = [PropertyRecord("monotone_in_s", _worst(np.diff(v[1:], axis=1)), 1e-12)]

    d = v[1:] - v[:-1]
    width = vt.thresholds[1:] - s
    records.append(PropertyRecord("difference_bounds", max(_worst(-d), _worst(d - width)), 1e-12))
    records.append(
        PropertyRecord("submodular", _worst(d - np.minimum.accumulate(d, axis=1)), 1e-10)
    )
    records.append(
        PropertyRecord("threshold_monotone_in_k", _worst(vt.thresholds[2:] - vt.thresholds[1:-1]), dx)
    )
    records.append(PropertyRecord("concave_in_k", _worst(v[2:] - 2.0 * v[1:-1] + v[:-2]), 1e-10))
    mean = v[:, 0]
    records.append(PropertyRecord("mean_concave_in_n", _worst(np.diff(mean, 2)), 1e-10))
    records.append(
        PropertyRecord("mean_below_sqrt_2n", _worst(mean[1:] - np.sqrt(2.0 * np.arange(1, n + 1))), 0.0)
    )
    records.append(PropertyRecord("derivative_nonpositive", _worst(vt.derivatives[1:, 1:-1]), 0.0))
    records.append(PropertyRecord("uniform_concave_in_s", _worst(v[1:, 2:] - 2.0 * v[1:, 1:-1] + v[1:, :-2]), 1e-8))

    u = _exponential_grid(vt, 1.0 / 64.0)
    step = 1.0 / 64.0
    convex = 0.0
    for k in range(1, n + 1):
        ve = vt.layer(k, cache=False)(u)
        convex = max(convex, _worst(-(ve[2:] - 2.0 * ve[1:-1] + ve[:-2]) / step**2))
    records.append(PropertyRecord("exponential_convex_in_s", convex, 1e-8))

    lower = 0.0
    interior = slice(1, -1)
    for k in range(1, n):
        gap = vt.thresholds[k + 1][interior] - s[interior]
        lower = max(lower, _worst(-1.0 / gap - vt.derivatives[k][interior]))
    records.append(PropertyRecord("exponential_derivative_lower_bound", lower, 1e-8))

    mismatch, lipschitz = _threshold_slope_check(vt)
    records.append(PropertyRecord("threshold_slope_matches_ratio", mismatch, 1e-3))
    records.append(PropertyRecord("threshold_slope_in_unit_interval", lipschitz, 1e-3))

    if wt is not None:
        w = wt.wvalues[1:]
        vk = v[1:]
        logk = np.log(np.arange(1, n + 1))[:, None]
        low = vk / 3.0 - 2.0 - w
        high = w - (vk / 3.0 + 2.0 / 3.0 * (1.0 + logk))
        records.append(PropertyRecord("variance_sandwich", max(_worst(low), _worst(high)), 0.0))
    return records


def trace_property_report(vt: ValueTable, traces) -> list[PropertyRecord]:
    """Martingale checks along simulated traces: bounded increments and zero drift."""
    if not traces:
        raise ValueError("need at least one trace")
    n = vt.horizon
    d = np.stack([t.diffs for t in traces])
    a = np.stack([t.a_parts for t in traces])
    b = np.stack([t.b_parts for t in traces])
    states = np.stack([t.running_max[:-1] for t in traces])
    ends = max(
        max(abs(t.martingale[0] - vt.values[n, 0]) for t in traces),
        max(abs(t.martingale[-1] - t.length[-1]) for t in traces),
    )
    drift = 0.0
    for i in range(n):
        drift = max(drift, float(np.max(np.abs(drift_at(vt, n - i, states[:, i])))))
    return [
        PropertyRecord("increment_bounded", _worst(np.abs(d) - 1.0), 0.0),
        PropertyRecord("a_in_unit_interval", max(_worst(-a), _worst(a - 1.0)), 0.0),
        PropertyRecord("b_in_minus_one_zero", max(_worst(b), _worst(-1.0 - b)), 0.0),
        PropertyRecord("martingale_endpoints", float(ends), 0.0),
        PropertyRecord("drift_at_visited_states", drift, 1e-8),
    ]
