"""Charts and Riemannian metrics.

A chart is a named coordinate box with per-axis boundary behavior; a metric
is a symmetric positive-definite matrix of expressions over the chart
coordinates.  The metric object also owns the symbolic inverse, determinant
and volume density sqrt|g| that every downstream operator needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import DegenerateMetricError, VortError

PERIODIC = "periodic"
FIXED = "fixed"

DEGENERACY_THRESHOLD = 1e-14

# validation lattice: 11 points per axis, pulled inward by 1e-6 of the box
# width so open-interval charts (e.g. theta in (-pi/2, pi/2)) never get
# sampled on a coordinate singularity
VALIDATION_POINTS = 11
VALIDATION_SHRINK = 1e-6


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple
    domain: tuple    # ((lo, hi), ...) per coordinate
    boundary: tuple  # 'periodic' | 'fixed' per coordinate

    def __post_init__(self):
        coords = tuple(self.coords)
        domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        boundary = tuple(self.boundary)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "boundary", boundary)
        if len(coords) < 1:
            raise VortError("chart needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise VortError("chart coordinate names must be distinct")
        if len(domain) != len(coords) or len(boundary) != len(coords):
            raise VortError("domain and boundary must match the coordinate count")
        for lo, hi in domain:
            if not lo < hi:
                raise VortError(f"empty interval [{lo}, {hi}] in chart domain")
        for mode in boundary:
            if mode not in (PERIODIC, FIXED):
                raise VortError(f"boundary mode must be periodic|fixed, got {mode!r}")

    @property
    def dim(self):
        return len(self.coords)

    def point(self, values) -> dict:
        values = [float(v) for v in values]
        if len(values) != self.dim:
            raise VortError(f"point has {len(values)} components, chart {self.name} has {self.dim}")
        return dict(zip(self.coords, values))

    def contains(self, point, tol=0.0) -> bool:
        for name, (lo, hi), mode in zip(self.coords, self.domain, self.boundary):
            if mode == PERIODIC:
                continue
            v = point[name]
            if v < lo - tol or v > hi + tol:
                return False
        return True

    def wrap(self, point) -> dict:
        """Map periodic coordinates into their fundamental interval [lo, hi)."""
        out = dict(point)
        for name, (lo, hi), mode in zip(self.coords, self.domain, self.boundary):
            if mode == PERIODIC:
                out[name] = lo + (out[name] - lo) % (hi - lo)
        return out

    def axis_values(self, name, count, shrink=0.0) -> np.ndarray:
        i = self.coords.index(name)
        lo, hi = self.domain[i]
        pad = shrink * (hi - lo)
        return np.linspace(lo + pad, hi - pad, count)

    def lattice_arrays(self, points_per_axis=VALIDATION_POINTS, shrink=VALIDATION_SHRINK) -> dict:
        """Meshgrid coordinate arrays for the validation lattice."""
        axes = [self.axis_values(c, points_per_axis, shrink) for c in self.coords]
        grids = np.meshgrid(*axes, indexing="ij")
        return dict(zip(self.coords, grids))

    def lattice_points(self, points_per_axis=VALIDATION_POINTS, shrink=VALIDATION_SHRINK) -> list:
        grids = self.lattice_arrays(points_per_axis, shrink)
        flat = {c: g.ravel() for c, g in grids.items()}
        count = len(next(iter(flat.values())))
        return [{c: float(flat[c][k]) for c in self.coords} for k in range(count)]


# ---------------------------------------------------------------------------
# symbolic matrix helpers (small n; used by the metric and the Hodge star)
# ---------------------------------------------------------------------------

def sym_det(entries) -> ex.Expr:
    """Determinant of a square matrix of expressions (Leibniz expansion)."""
    n = len(entries)
    total = ex.ZERO
    for perm in itertools.permutations(range(n)):
        term = ex.ONE
        for i, j in enumerate(perm):
            term = ex.mul(term, entries[i][j])
        total = ex.add(total, ex.mul(ex.const(permutation_sign(perm)), term))
    return total


def sym_inverse(entries) -> list:
    """Inverse via the adjugate; entries are expressions."""
    n = len(entries)
    det = sym_det(entries)
    if n == 1:
        return [[ex.div(ex.ONE, entries[0][0])]]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[entries[r][c] for c in range(n) if c != i]
                     for r in range(n) if r != j]
            cof = ex.mul(ex.const((-1.0) ** (i + j)), sym_det(minor))
            inv[i][j] = ex.div(cof, det)
    return inv


def permutation_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricData:
    """Pointwise metric payload: g, its inverse, determinant and sqrt|g|."""
    point: dict
    g: np.ndarray
    g_inv: np.ndarray
    det: float
    sqrt_det: float


class MetricField:
    """Symmetric matrix of expressions g_ij over a chart.

    String entries are parsed; symbolic inverse/determinant are computed
    once and cached.  Instances are treated as immutable.
    """

    def __init__(self, chart: Chart, entries):
        n = chart.dim
        if len(entries) != n or any(len(row) != n for row in entries):
            raise VortError(f"metric must be {n}x{n} on chart {chart.name}")
        self.chart = chart
        self.entries = tuple(
            tuple(ex.parse(e) if isinstance(e, str) else e for e in row)
            for row in entries
        )
        self._inv = None
        self._det = None
        self._sqrt_det = None

    @classmethod
    def euclidean(cls, chart: Chart) -> "MetricField":
        n = chart.dim
        return cls(chart, [[ex.ONE if i == j else ex.ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, chart: Chart, diag) -> "MetricField":
        n = chart.dim
        if len(diag) != n:
            raise VortError("diagonal entry count must equal the chart dimension")
        diag = [ex.parse(d) if isinstance(d, str) else d for d in diag]
        return cls(chart, [[diag[i] if i == j else ex.ZERO for j in range(n)] for i in range(n)])

    @property
    def dim(self):
        return self.chart.dim

    def entry(self, i, j) -> ex.Expr:
        return self.entries[i][j]

    def det_expr(self) -> ex.Expr:
        if self._det is None:
            self._det = sym_det(self.entries)
        return self._det

    def sqrt_det_expr(self) -> ex.Expr:
        if self._sqrt_det is None:
            self._sqrt_det = ex.fn("sqrt", self.det_expr())
        return self._sqrt_det

    def inverse_exprs(self) -> tuple:
        if self._inv is None:
            self._inv = tuple(tuple(row) for row in sym_inverse(self.entries))
        return self._inv

    def validate(self, points_per_axis=VALIDATION_POINTS):
        """Check symmetry (1e-12) and positive definiteness (leading minors)
        on the validation lattice; raises on violation."""
        grids = self.chart.lattice_arrays(points_per_axis)
        n = self.dim
        sampled = np.empty((n, n) + next(iter(grids.values())).shape)
        for i in range(n):
            for j in range(n):
                sampled[i, j] = ex.eval_grid(self.entries[i][j], grids)
        if not np.all(np.isfinite(sampled)):
            raise VortError(f"metric on {self.chart.name} is not finite on the sampling lattice")
        asym = np.max(np.abs(sampled - sampled.transpose(1, 0, *range(2, sampled.ndim))))
        if asym > 1e-12:
            raise VortError(f"metric on {self.chart.name} is asymmetric (max deviation {asym:.3e})")
        flat = sampled.reshape(n, n, -1).transpose(2, 0, 1)
        for k in range(1, n + 1):
            minors = np.linalg.det(flat[:, :k, :k])
            if np.min(minors) <= 0.0:
                raise VortError(
                    f"metric on {self.chart.name} is not positive definite "
                    f"(leading {k}x{k} minor reaches {np.min(minors):.3e})")
        return self


def metric_data(m: MetricField, point) -> MetricData:
    """Numeric g, inverse, determinant and sqrt|g| at one point."""
    n = m.dim
    g = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            g[i, j] = ex.evaluate(m.entries[i][j], point)
    det = float(np.linalg.det(g))
    if det <= DEGENERACY_THRESHOLD:
        raise DegenerateMetricError(
            f"metric degenerate at {point} on chart {m.chart.name} (det={det:.3e})")
    g_inv = np.linalg.inv(g)
    return MetricData(point=dict(point), g=g, g_inv=g_inv, det=det, sqrt_det=float(np.sqrt(det)))


def inner(m: MetricField, point, u, v) -> float:
    """g_ij(p) u^i v^j for contravariant component vectors u, v.

    Summed in a form symmetric under u <-> v, so the exchange symmetry
    holds exactly in floating point, not just to roundoff.
    """
    data = metric_data(m, point)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (m.dim,) or v.shape != (m.dim,):
        raise VortError(f"inner product needs length-{m.dim} component vectors")
    total = 0.0
    for i in range(m.dim):
        total += data.g[i, i] * (u[i] * v[i])
        for j in range(i + 1, m.dim):
            total += data.g[i, j] * (u[i] * v[j] + u[j] * v[i])
    return float(total)
