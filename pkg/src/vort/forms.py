"""Differential k-forms on a chart.

Components are stored on strictly increasing multi-indices (C(n,k) slots);
general index tuples expand by permutation sign.  The Hodge star is defined
by the pairing beta ^ *gamma = (beta, gamma) dV with dV = sqrt|g| dx^1..dx^n,
and the codifferential carries the Riemannian sign (-1)^(n(k+1)+1) * d *,
which reduces to -*d* on one-forms.
"""

from __future__ import annotations

import itertools
from collections import namedtuple

import numpy as np

from . import expr as ex
from .calculus import (COVARIANT, CONTRAVARIANT, TensorField2, VectorField,
                       flat, normalize_index, sharp)
from .errors import ChartMismatchError, DegreeError, VortError
from .manifold import Chart, MetricField, permutation_sign, sym_det


class KForm:
    def __init__(self, chart: Chart, degree: int, components: dict):
        if degree < 0 or degree > chart.dim:
            raise DegreeError(f"form degree {degree} outside 0..{chart.dim}")
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

    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree, {})

    @classmethod
    def scalar(cls, chart, f):
        return cls(chart, 0, {(): f})

    @classmethod
    def from_covector(cls, omega: VectorField):
        if omega.variance != COVARIANT:
            raise VortError("a 1-form is built from covariant components")
        return cls(omega.chart, 1, {(i,): c for i, c in enumerate(omega.components)})

    def to_covector(self) -> VectorField:
        if self.degree != 1:
            raise DegreeError("only 1-forms convert to covector fields")
        return VectorField(self.chart,
                           tuple(self.components[(i,)] for i in range(self.chart.dim)),
                           COVARIANT)

    def component(self, idx) -> ex.Expr:
        sign, key = normalize_index(tuple(idx))
        if sign == 0:
            return ex.ZERO
        c = self.components[key]
        return c if sign > 0 else ex.neg(c)

    def map(self, f) -> "KForm":
        return KForm(self.chart, self.degree,
                     {idx: f(c) for idx, c in self.components.items()})

    def __add__(self, other):
        _same_chart(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degrees")
        return KForm(self.chart, self.degree,
                     {idx: ex.add(c, other.components[idx])
                      for idx, c in self.components.items()})

    def scale(self, factor) -> "KForm":
        factor = ex.const(factor) if not isinstance(factor, ex.Expr) else factor
        return self.map(lambda c: ex.mul(factor, c))


def _same_chart(a, b):
    if a.chart != b.chart:
        raise ChartMismatchError("forms live on different charts")


def wedge(a: KForm, b: KForm) -> KForm:
    _same_chart(a, b)
    if a.degree + b.degree > a.chart.dim:
        raise DegreeError(
            f"wedge degree {a.degree}+{b.degree} exceeds dimension {a.chart.dim}")
    out = {}
    for idx_a, ca in a.components.items():
        for idx_b, cb in b.components.items():
            sign, key = normalize_index(idx_a + idx_b)
            if sign == 0:
                continue
            term = ex.mul(ca, cb)
            prev = out.get(key, ex.ZERO)
            out[key] = ex.add(prev, term if sign > 0 else ex.neg(term))
    return KForm(a.chart, a.degree + b.degree, out)


def ext_d(omega: KForm) -> KForm:
    """Exterior derivative; on 0-forms this is the differential df."""
    if omega.degree >= omega.chart.dim:
        raise DegreeError(
            f"exterior derivative of a top-degree ({omega.degree}) form")
    coords = omega.chart.coords
    out = {}
    for idx, c in omega.components.items():
        for j in range(omega.chart.dim):
            if j in idx:
                continue
            sign, key = normalize_index((j,) + idx)
            term = ex.diff(c, coords[j])
            prev = out.get(key, ex.ZERO)
            out[key] = ex.add(prev, term if sign > 0 else ex.neg(term))
    return KForm(omega.chart, omega.degree + 1, out)


def _complement(idx, n):
    return tuple(k for k in range(n) if k not in idx)


def _minor_det(matrix, rows, cols) -> ex.Expr:
    if not rows:
        return ex.ONE
    return sym_det([[matrix[r][c] for c in cols] for r in rows])


def _raised_component(m: MetricField, omega: KForm, idx) -> ex.Expr:
    """w^I = sum_K det(g^{i_a k_b}) w_K over increasing K."""
    g_inv = m.inverse_exprs()
    total = ex.ZERO
    for key, c in omega.components.items():
        total = ex.add(total, ex.mul(_minor_det(g_inv, idx, key), c))
    return total


def pointwise_inner(m: MetricField, alpha: KForm, beta: KForm) -> ex.Expr:
    """(alpha, beta) induced by g on the dual basis (Gram determinant form)."""
    _same_chart(alpha, beta)
    if alpha.degree != beta.degree:
        raise DegreeError("pointwise inner product needs equal degrees")
    total = ex.ZERO
    for idx, c in alpha.components.items():
        total = ex.add(total, ex.mul(c, _raised_component(m, beta, idx)))
    return total


def hodge_star(m: MetricField, omega: KForm) -> KForm:
    """(*w)_J = sqrt|g| eps(I,J) w^I with I the complement of J."""
    n = m.dim
    rho = m.sqrt_det_expr()
    out = {}
    for j_idx in itertools.combinations(range(n), n - omega.degree):
        i_idx = _complement(j_idx, n)
        sign = permutation_sign(i_idx + j_idx)
        raised = _raised_component(m, omega, i_idx)
        term = ex.mul(rho, raised)
        out[j_idx] = term if sign > 0 else ex.neg(term)
    return KForm(omega.chart, n - omega.degree, out)


def codifferential(m: MetricField, omega: KForm) -> KForm:
    """delta = (-1)^(n(k+1)+1) * d * on k-forms; -*d* on 1-forms."""
    if omega.degree == 0:
        raise DegreeError("codifferential of a 0-form")
    n = m.dim
    k = omega.degree
    sign = (-1.0) ** (n * (k + 1) + 1)
    result = hodge_star(m, ext_d(hodge_star(m, omega)))
    return result if sign > 0 else result.map(ex.neg)


def volume_form(m: MetricField) -> KForm:
    return KForm(m.chart, m.dim, {tuple(range(m.dim)): m.sqrt_det_expr()})


def _interior_product(X: VectorField, omega: KForm) -> KForm:
    # (i_X w)_J = sum_j X^j w_{(j,)+J}; contraction on the first slot
    if X.variance != CONTRAVARIANT:
        raise VortError("interior product contracts a contravariant field")
    if omega.degree == 0:
        raise DegreeError("interior product of a 0-form")
    out = {}
    for j_idx in itertools.combinations(range(omega.chart.dim), omega.degree - 1):
        total = ex.ZERO
        for j in range(omega.chart.dim):
            total = ex.add(total, ex.mul(X.components[j], omega.component((j,) + j_idx)))
        out[j_idx] = total
    return KForm(omega.chart, omega.degree - 1, out)


def lie_deriv_volume(m: MetricField, X: VectorField) -> KForm:
    """L_X dV computed by Cartan's rule d(i_X dV) (d dV vanishes on top degree)."""
    return ext_d(_interior_product(X, volume_form(m)))


CurlViaForms = namedtuple("CurlViaForms", ["tensor", "vector"])


def curl_via_forms(m: MetricField, X: VectorField) -> CurlViaForms:
    """Curl through the exterior derivative of the lowered field.

    The 2-form d(flat X) is identified with the antisymmetric tensor via
    A_ij = (d flat X)(e_j, e_i); in dimension 3 the sharpened Hodge dual
    sharp(*d flat X) is returned as the classical curl vector as well.
    """
    omega = flat(m, X) if X.variance == CONTRAVARIANT else X
    d_omega = ext_d(KForm.from_covector(omega))
    n = m.dim
    entries = [[ex.ZERO] * n for _ in range(n)]
    for (i, j), c in d_omega.components.items():
        entries[i][j] = ex.neg(c)
        entries[j][i] = c
    tensor = TensorField2(m.chart, tuple(tuple(r) for r in entries),
                          symmetry="antisymmetric", variance=COVARIANT)
    vector = None
    if n == 3:
        vector = sharp(m, hodge_star(m, d_omega).to_covector())
    return CurlViaForms(tensor=tensor, vector=vector)


# ---------------------------------------------------------------------------
# L2 inner product by tensor-product quadrature
# ---------------------------------------------------------------------------

def _axis_rule(lo, hi, mode, count):
    """Nodes and weights for one axis: trapezoid on periodic axes (spectral
    for smooth periodic integrands), composite Simpson on fixed axes."""
    if count < 3:
        raise VortError("quadrature needs at least 3 points per axis")
    if mode == "periodic":
        h = (hi - lo) / count
        nodes = lo + h * np.arange(count)
        return nodes, np.full(count, h)
    nodes = np.linspace(lo, hi, count)
    h = (hi - lo) / (count - 1)
    weights = np.zeros(count)
    if count % 2 == 1:
        weights[0] = weights[-1] = 1.0
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        weights *= h / 3.0
    else:
        # even node count: Simpson up to node count-4, 3/8 rule on the tail
        head = count - 3
        if head >= 3:
            weights[0] = weights[head - 1] = 1.0
            weights[1:head - 1:2] = 4.0
            weights[2:head - 1:2] = 2.0
            weights[:head] *= h / 3.0
        weights[-4:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return nodes, weights


def l2_inner(m: MetricField, alpha: KForm, beta: KForm, resolution) -> float:
    """Integral of (alpha, beta) sqrt|g| over the chart box."""
    chart = m.chart
    if isinstance(resolution, int):
        resolution = (resolution,) * chart.dim
    if len(resolution) != chart.dim:
        raise VortError("resolution must give a point count per axis")
    axes, weights = [], []
    for (lo, hi), mode, count in zip(chart.domain, chart.boundary, resolution):
        nodes, w = _axis_rule(lo, hi, mode, int(count))
        axes.append(nodes)
        weights.append(w)
    grids = dict(zip(chart.coords, np.meshgrid(*axes, indexing="ij")))
    integrand = ex.mul(pointwise_inner(m, alpha, beta), m.sqrt_det_expr())
    values = ex.eval_grid(integrand, grids)
    if not np.all(np.isfinite(values)):
        raise VortError("integrand is not finite on the quadrature lattice")
    weight = weights[0]
    for w in weights[1:]:
        weight = np.multiply.outer(weight, w)
    return float(np.sum(values * weight))
