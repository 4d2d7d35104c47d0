"""Integral curves of vector fields.

Fixed-step classical 4th-order integration of dc/dt = X(c(t)).  Periodic
coordinates are wrapped into their fundamental interval after every step;
leaving the box along a fixed axis truncates the path and sets the exit
flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .calculus import CONTRAVARIANT, VectorField
from .errors import EvalDomainError, FlowError, VortError


@dataclass
class FlowPath:
    """Samples (t_k, point_k) with uniform step h = t[k+1] - t[k]."""
    field_name: str
    h: float
    ts: np.ndarray
    points: np.ndarray          # shape (len(ts), n), chart coordinate order
    coords: tuple
    exited: bool = False
    exit_t: float = field(default=np.nan)

    def end(self) -> np.ndarray:
        return self.points[-1]


def _rhs(X, coords, y, t):
    point = dict(zip(coords, y))
    try:
        return np.array([ex.evaluate(c, point) for c in X.components])
    except EvalDomainError as err:
        raise FlowError(f"field evaluation failed: {err}", t) from err


def integrate_flow(X: VectorField, x0, t_end, steps, name="") -> FlowPath:
    """Integrate the flow of a contravariant field from x0 over [0, t_end]."""
    if X.variance != CONTRAVARIANT:
        raise VortError("flow integration needs a contravariant field")
    if steps < 1:
        raise VortError("steps must be >= 1")
    chart = X.chart
    coords = chart.coords
    if isinstance(x0, dict):
        y = np.array([float(x0[c]) for c in coords])
    else:
        y = np.array([float(v) for v in x0])
        if y.shape != (chart.dim,):
            raise VortError(f"start point needs {chart.dim} components")
    y = _wrap(chart, y)

    h = float(t_end) / steps
    ts = [0.0]
    points = [y.copy()]
    exited = False
    exit_t = np.nan
    for k in range(steps):
        t = k * h
        k1 = _rhs(X, coords, y, t)
        k2 = _rhs(X, coords, y + 0.5 * h * k1, t + 0.5 * h)
        k3 = _rhs(X, coords, y + 0.5 * h * k2, t + 0.5 * h)
        k4 = _rhs(X, coords, y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = _wrap(chart, y)
        if not _inside_fixed(chart, y):
            exited = True
            exit_t = (k + 1) * h
            break
        ts.append((k + 1) * h)
        points.append(y.copy())
    return FlowPath(field_name=name, h=h, ts=np.array(ts), points=np.array(points),
                    coords=coords, exited=exited, exit_t=exit_t)


def _wrap(chart, y):
    out = y.copy()
    for i, ((lo, hi), mode) in enumerate(zip(chart.domain, chart.boundary)):
        if mode == "periodic":
            out[i] = lo + (out[i] - lo) % (hi - lo)
    return out


def _inside_fixed(chart, y):
    for i, ((lo, hi), mode) in enumerate(zip(chart.domain, chart.boundary)):
        if mode == "fixed" and not (lo <= y[i] <= hi):
            return False
    return True
