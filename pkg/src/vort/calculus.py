"""Differential operators on vector and tensor fields.

All operators take and return symbolic expression fields, so composed
identities (curl of a gradient, divergence product rule, ...) can be
checked by pointwise evaluation without stacking finite-difference error.
Index variance is an explicit tag: the curl of a contravariant field
lowers indices through the metric first, never silently.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import ChartMismatchError, DegreeError, VortError
from .manifold import Chart, MetricField

CONTRAVARIANT = "contra"
COVARIANT = "co"


def _coerce(components):
    return tuple(ex.parse(c) if isinstance(c, str) else c for c in components)


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple
    variance: str = CONTRAVARIANT

    def __post_init__(self):
        object.__setattr__(self, "components", _coerce(self.components))
        if len(self.components) != self.chart.dim:
            raise VortError(f"field needs {self.chart.dim} components on chart {self.chart.name}")
        if self.variance not in (CONTRAVARIANT, COVARIANT):
            raise VortError(f"variance must be contra|co, got {self.variance!r}")

    def at(self, point) -> np.ndarray:
        return np.array([ex.evaluate(c, point) for c in self.components])


@dataclass(frozen=True)
class TensorField2:
    chart: Chart
    entries: tuple  # n x n of Expr
    symmetry: str = "none"        # antisymmetric | symmetric | none
    variance: str = COVARIANT

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(_coerce(row) for row in self.entries))
        n = self.chart.dim
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise VortError(f"2-tensor must be {n}x{n}")

    def at(self, point) -> np.ndarray:
        n = self.chart.dim
        return np.array([[ex.evaluate(self.entries[i][j], point) for j in range(n)]
                         for i in range(n)])


@dataclass(frozen=True)
class Christoffel:
    """Connection coefficients gamma[k, i, j] at one point."""
    point: dict
    gamma: np.ndarray


class PTensor:
    """Antisymmetric contravariant tensor of order p, stored on strictly
    increasing multi-indices; general indices expand by permutation sign."""

    def __init__(self, chart: Chart, degree: int, components: dict):
        if degree < 0 or degree > chart.dim:
            raise DegreeError(f"p-tensor degree {degree} outside 0..{chart.dim}")
        self.chart = chart
        self.degree = degree
        comps = {idx: ex.ZERO for idx in itertools.combinations(range(chart.dim), degree)}
        for idx, value in components.items():
            value = ex.parse(value) if isinstance(value, str) else value
            sign, key = normalize_index(tuple(idx))
            if sign == 0:
                continue
            comps[key] = ex.add(comps[key], value if sign > 0 else ex.neg(value))
        self.components = comps

    def component(self, idx) -> ex.Expr:
        """Component for an arbitrary index tuple (sign-expanded)."""
        sign, key = normalize_index(tuple(idx))
        if sign == 0:
            return ex.ZERO
        c = self.components[key]
        return c if sign > 0 else ex.neg(c)


def normalize_index(idx):
    """Sort an index tuple; returns (permutation sign, sorted tuple), with
    sign 0 for repeated indices."""
    if len(set(idx)) != len(idx):
        return 0, None
    order = sorted(range(len(idx)), key=lambda k: idx[k])
    sign = 1
    seen = [False] * len(order)
    for s in range(len(order)):
        if seen[s]:
            continue
        k, length = s, 0
        while not seen[k]:
            seen[k] = True
            k = order[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign, tuple(sorted(idx))


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------

_christoffel_cache = weakref.WeakKeyDictionary()


def christoffel_exprs(m: MetricField):
    """Symbolic gamma^k_ij = 1/2 sum_m g^km (d_i g_jm + d_j g_im - d_m g_ij)."""
    cached = _christoffel_cache.get(m)
    if cached is not None:
        return cached
    n = m.dim
    coords = m.chart.coords
    g_inv = m.inverse_exprs()
    half = ex.const(0.5)
    gamma = [[[ex.ZERO] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                total = ex.ZERO
                for mm in range(n):
                    bracket = ex.sub(
                        ex.add(ex.diff(m.entry(j, mm), coords[i]),
                               ex.diff(m.entry(i, mm), coords[j])),
                        ex.diff(m.entry(i, j), coords[mm]))
                    total = ex.add(total, ex.mul(g_inv[k][mm], bracket))
                gamma[k][i][j] = gamma[k][j][i] = ex.mul(half, total)
    gamma = tuple(tuple(tuple(row) for row in plane) for plane in gamma)
    _christoffel_cache[m] = gamma
    return gamma


def christoffel(m: MetricField, point) -> Christoffel:
    n = m.dim
    syms = christoffel_exprs(m)
    out = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                out[k, i, j] = out[k, j, i] = ex.evaluate(syms[k][i][j], point)
    return Christoffel(point=dict(point), gamma=out)


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------

def grad(m: MetricField, f) -> VectorField:
    """Contravariant gradient, components g^ij df/dx_j."""
    f = ex.parse(f) if isinstance(f, str) else f
    coords = m.chart.coords
    g_inv = m.inverse_exprs()
    comps = []
    for i in range(m.dim):
        total = ex.ZERO
        for j in range(m.dim):
            total = ex.add(total, ex.mul(g_inv[i][j], ex.diff(f, coords[j])))
        comps.append(total)
    return VectorField(m.chart, tuple(comps), CONTRAVARIANT)


def div(m: MetricField, X: VectorField) -> ex.Expr:
    """Divergence in density form, (1/sqrt|g|) d_j (sqrt|g| X^j).

    This is the canonical form; div_christoffel implements the connection
    form and the two must agree pointwise.
    """
    _require(X, CONTRAVARIANT, m.chart)
    coords = m.chart.coords
    rho = m.sqrt_det_expr()
    total = ex.ZERO
    for j in range(m.dim):
        total = ex.add(total, ex.diff(ex.mul(rho, X.components[j]), coords[j]))
    return ex.div(total, rho)


def div_christoffel(m: MetricField, X: VectorField) -> ex.Expr:
    """Divergence in connection form, sum_i (d_i X^i + sum_j gamma^i_ij X^j)."""
    _require(X, CONTRAVARIANT, m.chart)
    coords = m.chart.coords
    syms = christoffel_exprs(m)
    total = ex.ZERO
    for i in range(m.dim):
        total = ex.add(total, ex.diff(X.components[i], coords[i]))
        for j in range(m.dim):
            total = ex.add(total, ex.mul(syms[i][i][j], X.components[j]))
    return total


def flat(m: MetricField, X: VectorField) -> VectorField:
    """Lower indices: X_i = g_ij X^j."""
    _require(X, CONTRAVARIANT, m.chart)
    comps = []
    for i in range(m.dim):
        total = ex.ZERO
        for j in range(m.dim):
            total = ex.add(total, ex.mul(m.entry(i, j), X.components[j]))
        comps.append(total)
    return VectorField(m.chart, tuple(comps), COVARIANT)


def sharp(m: MetricField, omega: VectorField) -> VectorField:
    """Raise indices: X^i = g^ij w_j."""
    _require(omega, COVARIANT, m.chart)
    g_inv = m.inverse_exprs()
    comps = []
    for i in range(m.dim):
        total = ex.ZERO
        for j in range(m.dim):
            total = ex.add(total, ex.mul(g_inv[i][j], omega.components[j]))
        comps.append(total)
    return VectorField(m.chart, tuple(comps), CONTRAVARIANT)


def curl(m: MetricField, X: VectorField) -> TensorField2:
    """Antisymmetric covariant curl tensor A_ij = dX_i/dx_j - dX_j/dx_i.

    A contravariant argument is lowered through the metric first; covariant
    components are used as given.
    """
    omega = flat(m, X) if X.variance == CONTRAVARIANT else X
    coords = m.chart.coords
    n = m.dim
    entries = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a = ex.sub(ex.diff(omega.components[i], coords[j]),
                       ex.diff(omega.components[j], coords[i]))
            entries[i][j] = a
            entries[j][i] = ex.neg(a)
    return TensorField2(m.chart, tuple(tuple(r) for r in entries),
                        symmetry="antisymmetric", variance=COVARIANT)


def trace_curl(m: MetricField, X: VectorField) -> ex.Expr:
    """g^ij A_ij; identically zero (symmetric against antisymmetric)."""
    A = curl(m, X)
    g_inv = m.inverse_exprs()
    total = ex.ZERO
    for i in range(m.dim):
        for j in range(m.dim):
            total = ex.add(total, ex.mul(g_inv[i][j], A.entries[i][j]))
    return total


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X,Y]^i = sum_j (dY^i/dx_j X^j - dX^i/dx_j Y^j)."""
    if X.chart is not Y.chart and X.chart != Y.chart:
        raise ChartMismatchError(
            f"bracket operands live on charts {X.chart.name!r} and {Y.chart.name!r}")
    _require(X, CONTRAVARIANT, X.chart)
    _require(Y, CONTRAVARIANT, Y.chart)
    coords = X.chart.coords
    comps = []
    for i in range(X.chart.dim):
        total = ex.ZERO
        for j in range(X.chart.dim):
            total = ex.add(total, ex.sub(
                ex.mul(ex.diff(Y.components[i], coords[j]), X.components[j]),
                ex.mul(ex.diff(X.components[i], coords[j]), Y.components[j])))
        comps.append(total)
    return VectorField(X.chart, tuple(comps), CONTRAVARIANT)


def cov_deriv(m: MetricField, X: VectorField, Y: VectorField) -> VectorField:
    """Levi-Civita connection, (nabla_X Y)^k = X^i (d_i Y^k + gamma^k_ij Y^j)."""
    _require(X, CONTRAVARIANT, m.chart)
    _require(Y, CONTRAVARIANT, m.chart)
    coords = m.chart.coords
    syms = christoffel_exprs(m)
    n = m.dim
    comps = []
    for k in range(n):
        total = ex.ZERO
        for i in range(n):
            term = ex.diff(Y.components[k], coords[i])
            for j in range(n):
                term = ex.add(term, ex.mul(syms[k][i][j], Y.components[j]))
            total = ex.add(total, ex.mul(X.components[i], term))
        comps.append(total)
    return VectorField(m.chart, tuple(comps), CONTRAVARIANT)


def lie_deriv_metric(m: MetricField, X: VectorField) -> TensorField2:
    """(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k."""
    _require(X, CONTRAVARIANT, m.chart)
    coords = m.chart.coords
    n = m.dim
    entries = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            total = ex.ZERO
            for k in range(n):
                total = ex.add(total, ex.mul(X.components[k], ex.diff(m.entry(i, j), coords[k])))
                total = ex.add(total, ex.mul(m.entry(k, j), ex.diff(X.components[k], coords[i])))
                total = ex.add(total, ex.mul(m.entry(i, k), ex.diff(X.components[k], coords[j])))
            entries[i][j] = entries[j][i] = total
    return TensorField2(m.chart, tuple(tuple(r) for r in entries),
                        symmetry="symmetric", variance=COVARIANT)


@dataclass(frozen=True)
class KillingReport:
    killing: bool
    max_lie_residual: float
    divergence_free: bool
    max_divergence: float


def is_killing(m: MetricField, X: VectorField, tol=1e-8) -> KillingReport:
    """Killing test: max |(L_X g)_ij| < tol on the sampling lattice.

    Also reports the divergence-free consequence (an isometric flow
    preserves the volume density), checked against the same tolerance.
    """
    lie = lie_deriv_metric(m, X)
    grids = m.chart.lattice_arrays()
    max_lie = 0.0
    for i in range(m.dim):
        for j in range(i, m.dim):
            vals = ex.eval_grid(lie.entries[i][j], grids)
            max_lie = max(max_lie, float(np.max(np.abs(vals))))
    div_vals = ex.eval_grid(div(m, X), grids)
    max_div = float(np.max(np.abs(div_vals)))
    return KillingReport(killing=max_lie < tol, max_lie_residual=max_lie,
                         divergence_free=max_div < tol, max_divergence=max_div)


# ---------------------------------------------------------------------------
# p-tensor divergence
# ---------------------------------------------------------------------------

def ptensor_div(m: MetricField, omega: PTensor) -> PTensor:
    """(div w)^{i1..i_{p-1}} = (1/rho) d_j (rho w^{i1..i_{p-1} j}), rho = sqrt|g|.

    Degree-0 input returns the zero scalar (scalars carry no divergence);
    for p = 1 this reduces to the vector divergence, and applying it twice
    gives zero identically.
    """
    if omega.chart != m.chart:
        raise ChartMismatchError("p-tensor lives on a different chart than the metric")
    n = m.dim
    if omega.degree == 0:
        return PTensor(m.chart, 0, {(): ex.ZERO})
    coords = m.chart.coords
    rho = m.sqrt_det_expr()
    out = {}
    for idx in itertools.combinations(range(n), omega.degree - 1):
        total = ex.ZERO
        for j in range(n):
            comp = omega.component(idx + (j,))
            total = ex.add(total, ex.diff(ex.mul(rho, comp), coords[j]))
        out[idx] = ex.div(total, rho)
    return PTensor(m.chart, omega.degree - 1, out)


# ---------------------------------------------------------------------------
# symbolic helpers shared by tests and the forms module
# ---------------------------------------------------------------------------

def inner_expr(m: MetricField, X: VectorField, Y: VectorField) -> ex.Expr:
    """Symbolic g(X, Y) for contravariant fields."""
    _require(X, CONTRAVARIANT, m.chart)
    _require(Y, CONTRAVARIANT, m.chart)
    total = ex.ZERO
    for i in range(m.dim):
        for j in range(m.dim):
            total = ex.add(total, ex.mul(m.entry(i, j),
                                         ex.mul(X.components[i], Y.components[j])))
    return total


def tensor_apply(A: TensorField2, U: VectorField, V: VectorField) -> ex.Expr:
    """A(U, V) = A_ij U^i V^j."""
    total = ex.ZERO
    for i in range(A.chart.dim):
        for j in range(A.chart.dim):
            total = ex.add(total, ex.mul(A.entries[i][j],
                                         ex.mul(U.components[i], V.components[j])))
    return total


def directional(U: VectorField, scalar: ex.Expr) -> ex.Expr:
    """Directional derivative of a scalar, sum_i U^i d_i f."""
    total = ex.ZERO
    for i, c in enumerate(U.chart.coords):
        total = ex.add(total, ex.mul(U.components[i], ex.diff(scalar, c)))
    return total


def _require(X: VectorField, variance, chart):
    if X.variance != variance:
        want = "contravariant" if variance == CONTRAVARIANT else "covariant"
        raise VortError(f"operation needs a {want} field, got {X.variance!r}")
    if X.chart != chart:
        raise ChartMismatchError(
            f"field on chart {X.chart.name!r} used with metric on {chart.name!r}")
