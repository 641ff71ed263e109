"""CSV and JSON writers. Floats use the shortest decimal that round-trips."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .value_engine import ValueTable
from .variance_engine import VarianceTable

__all__ = [
    "fmt",
    "write_value_csv",
    "value_table_json",
    "write_variance_csv",
    "write_trace_csv",
    "write_batch",
    "write_histogram_csv",
    "dumps",
]


def fmt(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    return obj


def dumps(obj) -> str:
    """JSON text with NaN and infinities mapped to null."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_value_csv(vt: ValueTable, stream, wt: VarianceTable | None = None) -> None:
    """Rows ``k,s,v,h,dv`` (plus ``w`` when a variance table is given); ``h`` is blank for k = 0."""
    if wt is not None and (wt.grid != vt.grid or wt.horizon != vt.horizon):
        raise ValueError("variance table does not match the value table")
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["k", "s", "v", "h", "dv"] + (["w"] if wt is not None else []))
    nodes = [fmt(x) for x in vt.nodes]
    for k in range(vt.horizon + 1):
        cols = [vt.values[k], vt.thresholds[k], vt.derivatives[k]]
        if wt is not None:
            cols.append(wt.wvalues[k])
        for j, s in enumerate(nodes):
            out.writerow([k, s] + [fmt(c[j]) for c in cols])


def value_table_json(vt: ValueTable, wt: VarianceTable | None = None) -> dict:
    layers = []
    for k in range(vt.horizon + 1):
        layer = {
            "k": k,
            "v": vt.values[k],
            "h": None if k == 0 else vt.thresholds[k],
            "dv": vt.derivatives[k],
        }
        if wt is not None:
            layer["w"] = wt.wvalues[k]
        layers.append(layer)
    return {
        "grid": {
            "points": vt.grid.points,
            "spacing": vt.grid.spacing,
            "root_tolerance": vt.grid.root_tolerance,
        },
        "horizon": vt.horizon,
        "s": vt.nodes,
        "critical": [None] + [float(c) for c in vt.critical[1:]],
        "layers": layers,
    }


def write_variance_csv(wt: VarianceTable, stream) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["k", "s", "w"])
    nodes = [fmt(x) for x in wt.grid.nodes]
    for k in range(wt.horizon + 1):
        for s, w in zip(nodes, wt.wvalues[k]):
            out.writerow([k, s, fmt(w)])


def write_trace_csv(trace, stream) -> None:
    """Rows ``i,x,accepted,M,L,Y,d,A,B``; row 0 is the starting state."""
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["i", "x", "accepted", "M", "L", "Y", "d", "A", "B"])
    out.writerow([0, "", "", fmt(trace.running_max[0]), 0, fmt(trace.martingale[0]), "", "", ""])
    for i in range(1, trace.n + 1):
        out.writerow(
            [
                i,
                fmt(trace.draws[i - 1]),
                int(trace.accepted[i - 1]),
                fmt(trace.running_max[i]),
                int(trace.length[i]),
                fmt(trace.martingale[i]),
                fmt(trace.diffs[i - 1]),
                fmt(trace.a_parts[i - 1]),
                fmt(trace.b_parts[i - 1]),
            ]
        )


def write_batch(lengths, stream, series=None) -> None:
    """One ``L_n`` per line, followed by ``,V`` when the variance series is given."""
    if series is None:
        stream.writelines(f"{int(x)}\n" for x in lengths)
    else:
        stream.writelines(f"{int(x)},{fmt(v)}\n" for x, v in zip(lengths, series))


def write_histogram_csv(summary, stream) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["z_lo", "z_hi", "count"])
    for lo, hi, c in summary.histogram_rows():
        out.writerow([repr(lo), repr(hi), c])
