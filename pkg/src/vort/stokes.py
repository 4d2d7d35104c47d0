"""Quadrature verification of the integral identities in flat R^3.

A parametric surface carries the circulation identity: the flux of the
classical curl of an ambient field through the surface equals the
circulation of the field around the boundary, where the boundary curves
are generated from the non-degenerate edges of the parameter rectangle.
The gradient line-integral identity pairs a quadrature along a curve with
the signed endpoint values (-1 at the start, +1 at the end).

Closed curves and periodic surface axes are detected by endpoint
comparison and integrated with the trapezoid rule (spectrally accurate for
smooth periodic integrands); everything else uses Gauss-Legendre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .calculus import CONTRAVARIANT, VectorField
from .errors import VortError

DEGENERATE_TANGENT = 1e-10
_CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class ParamCurve:
    """Curve t -> (x(t), y(t), z(t)), t in [a, b]; boundary signs are
    eps(a) = -1 and eps(b) = +1, orientation follows increasing t."""
    param: str
    domain: tuple
    embedding: tuple  # three Expr in the parameter

    def __post_init__(self):
        object.__setattr__(self, "embedding", tuple(
            ex.parse(e) if isinstance(e, str) else e for e in self.embedding))
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        if len(self.embedding) != 3:
            raise VortError("curves embed into R^3: three component expressions required")

    def tangent_exprs(self):
        return tuple(ex.diff(e, self.param) for e in self.embedding)

    def point_at(self, t) -> np.ndarray:
        return np.array([ex.evaluate(e, {self.param: t}) for e in self.embedding])

    def is_closed(self) -> bool:
        a, b = self.domain
        gap = np.linalg.norm(self.point_at(a) - self.point_at(b))
        scale = max(1.0, float(np.max(np.abs(self.point_at(a)))))
        return gap < _CLOSURE_TOL * scale

    def reversed(self) -> "ParamCurve":
        a, b = self.domain
        flip = ex.sub(ex.const(a + b), ex.var(self.param))
        return ParamCurve(self.param, (a, b),
                          tuple(ex.substitute(e, {self.param: flip}) for e in self.embedding))


@dataclass(frozen=True)
class ParamSurface:
    """Surface (u, v) -> R^3 over a parameter rectangle with an orientation
    flag; the normal is orientation * (Phi_u x Phi_v)."""
    params: tuple            # (u_name, v_name)
    domain: tuple            # ((ulo, uhi), (vlo, vhi))
    embedding: tuple         # three Expr in the parameters
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "embedding", tuple(
            ex.parse(e) if isinstance(e, str) else e for e in self.embedding))
        object.__setattr__(self, "domain", tuple(
            (float(lo), float(hi)) for lo, hi in self.domain))
        if len(self.params) != 2 or len(self.domain) != 2:
            raise VortError("surfaces take exactly two parameters")
        if len(self.embedding) != 3:
            raise VortError("surfaces embed into R^3: three component expressions required")
        if self.orientation not in (1, -1):
            raise VortError("orientation flag must be +1 or -1")

    def tangent_exprs(self, axis):
        return tuple(ex.diff(e, self.params[axis]) for e in self.embedding)

    def axis_is_periodic(self, axis, samples=5) -> bool:
        """The embedding closes up along this axis (seam edges coincide)."""
        other = 1 - axis
        lo, hi = self.domain[axis]
        o_lo, o_hi = self.domain[other]
        probes = np.linspace(o_lo, o_hi, samples)
        for s in probes:
            p_lo = {self.params[axis]: lo, self.params[other]: float(s)}
            p_hi = {self.params[axis]: hi, self.params[other]: float(s)}
            a = np.array([ex.evaluate(e, p_lo) for e in self.embedding])
            b = np.array([ex.evaluate(e, p_hi) for e in self.embedding])
            if np.linalg.norm(a - b) > _CLOSURE_TOL * max(1.0, np.max(np.abs(a))):
                return False
        return True


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    abs_err: float
    nodes: int

    @classmethod
    def of(cls, lhs, rhs, nodes):
        return cls(lhs=float(lhs), rhs=float(rhs), abs_err=abs(float(lhs) - float(rhs)),
                   nodes=int(nodes))


def _require_ambient(X: VectorField):
    if X.chart.dim != 3:
        raise VortError("ambient fields for the surface identities live on a 3d chart")
    if X.variance != CONTRAVARIANT:
        raise VortError("ambient field must be contravariant")


def classical_curl(X: VectorField) -> VectorField:
    """Componentwise R^3 curl of an ambient field, computed symbolically."""
    _require_ambient(X)
    x, y, z = X.chart.coords
    c1, c2, c3 = X.components
    return VectorField(X.chart, (
        ex.sub(ex.diff(c3, y), ex.diff(c2, z)),
        ex.sub(ex.diff(c1, z), ex.diff(c3, x)),
        ex.sub(ex.diff(c2, x), ex.diff(c1, y)),
    ), CONTRAVARIANT)


def classical_grad(f, chart) -> VectorField:
    f = ex.parse(f) if isinstance(f, str) else f
    return VectorField(chart, tuple(ex.diff(f, c) for c in chart.coords), CONTRAVARIANT)


def _gauss_legendre(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _trapezoid_periodic(lo, hi, n):
    h = (hi - lo) / n
    return lo + h * np.arange(n), np.full(n, h)


def line_integral_tangent(X: VectorField, curve: ParamCurve, nodes: int) -> float:
    """Quadrature of <X(c(t)), c'(t)> dt; trapezoid when the curve closes up."""
    _require_ambient(X)
    if nodes < 8:
        raise VortError("line integral needs at least 8 quadrature nodes")
    a, b = curve.domain
    if curve.is_closed():
        ts, w = _trapezoid_periodic(a, b, nodes)
    else:
        ts, w = _gauss_legendre(a, b, nodes)
    targs = {curve.param: ts}
    pos = np.stack([ex.eval_grid(e, targs) for e in curve.embedding])
    tan = np.stack([ex.eval_grid(e, targs) for e in curve.tangent_exprs()])
    norms = np.linalg.norm(tan, axis=0)
    if np.min(norms) <= DEGENERATE_TANGENT:
        raise VortError(f"degenerate tangent on curve (min norm {np.min(norms):.3e})")
    ambient = dict(zip(X.chart.coords, pos))
    field = np.stack([ex.eval_grid(c, ambient) for c in X.components])
    return float(np.sum(w * np.sum(field * tan, axis=0)))


def surface_integral_normal(W: VectorField, surface: ParamSurface, nodes: int) -> float:
    """Quadrature of <W(Phi), Phi_u x Phi_v> du dv; the unnormalized normal
    absorbs the area form, the orientation flag fixes its sign."""
    _require_ambient(W)
    if nodes < 8:
        raise VortError("surface integral needs at least 8 nodes per axis")
    rules = []
    for axis in range(2):
        lo, hi = surface.domain[axis]
        if surface.axis_is_periodic(axis):
            rules.append(_trapezoid_periodic(lo, hi, nodes))
        else:
            rules.append(_gauss_legendre(lo, hi, nodes))
    (us, wu), (vs, wv) = rules
    U, V = np.meshgrid(us, vs, indexing="ij")
    pargs = {surface.params[0]: U, surface.params[1]: V}
    pos = np.stack([ex.eval_grid(e, pargs) for e in surface.embedding])
    tu = np.stack([ex.eval_grid(e, pargs) for e in surface.tangent_exprs(0)])
    tv = np.stack([ex.eval_grid(e, pargs) for e in surface.tangent_exprs(1)])
    normal = np.cross(tu, tv, axis=0) * surface.orientation
    norms = np.linalg.norm(normal, axis=0)
    if np.min(norms) <= DEGENERATE_TANGENT:
        raise VortError(
            f"rank-deficient embedding on surface (min normal norm {np.min(norms):.3e})")
    ambient = dict(zip(W.chart.coords, pos))
    field = np.stack([ex.eval_grid(c, ambient) for c in W.components])
    integrand = np.sum(field * normal, axis=0)
    return float(np.sum(np.multiply.outer(wu, wv) * integrand))


def boundary_curves(surface: ParamSurface) -> list:
    """Non-degenerate edges of the parameter rectangle, oriented so the
    boundary runs counterclockwise for orientation +1 (Stokes convention);
    point-image edges are dropped by the tangent-norm test."""
    (ulo, uhi), (vlo, vhi) = surface.domain
    pu, pv = surface.params
    edges = [
        (pv, vlo, pu, (ulo, uhi), False),   # bottom, u increasing
        (pu, uhi, pv, (vlo, vhi), False),   # right, v increasing
        (pv, vhi, pu, (ulo, uhi), True),    # top, u decreasing
        (pu, ulo, pv, (vlo, vhi), True),    # left, v decreasing
    ]
    curves = []
    for fixed_name, fixed_value, run_name, (lo, hi), reverse in edges:
        emb = tuple(ex.substitute(e, {fixed_name: fixed_value}) for e in surface.embedding)
        curve = ParamCurve(run_name, (lo, hi), emb)
        if _edge_is_degenerate(curve):
            continue
        if reverse != (surface.orientation < 0):
            curve = curve.reversed()
        curves.append(curve)
    return curves


def _edge_is_degenerate(curve: ParamCurve, samples=16) -> bool:
    a, b = curve.domain
    ts = np.linspace(a, b, samples)
    tan = np.stack([ex.eval_grid(e, {curve.param: ts}) for e in curve.tangent_exprs()])
    return float(np.max(np.linalg.norm(tan, axis=0))) < DEGENERATE_TANGENT


def verify_curl_stokes(X: VectorField, surface: ParamSurface, nodes: int) -> IdentityReport:
    """Flux of the classical curl through the surface against the boundary
    circulation; the report carries both values, callers pick tolerances."""
    lhs = surface_integral_normal(classical_curl(X), surface, nodes)
    rhs = 0.0
    for curve in boundary_curves(surface):
        rhs += line_integral_tangent(X, curve, nodes)
    return IdentityReport.of(lhs, rhs, nodes)


def verify_grad_line(f, curve: ParamCurve, nodes: int, chart=None) -> IdentityReport:
    """Line integral of a gradient against the signed endpoint values."""
    f = ex.parse(f) if isinstance(f, str) else f
    if chart is None:
        from .manifold import Chart
        chart = Chart("ambient", ("x", "y", "z"),
                      ((-1e9, 1e9),) * 3, ("fixed",) * 3)
    lhs = line_integral_tangent(classical_grad(f, chart), curve, nodes)
    a, b = curve.domain
    pa = dict(zip(chart.coords, curve.point_at(a)))
    pb = dict(zip(chart.coords, curve.point_at(b)))
    rhs = ex.evaluate(f, pb) - ex.evaluate(f, pa)
    return IdentityReport.of(lhs, rhs, nodes)
