"""Discrete Laplace-Beltrami solves and the Helmholtz decomposition.

The Laplacian is assembled as the exact composition of the discrete
divergence (1/sqrt|g|) D_i (sqrt|g| .) and the discrete gradient g^ij D_j
with node-centered second-order central differences, so a decomposition
Z = grad phi, Y = X - Z inherits div Y = div X - Lap phi = solver residual
by construction.  Fixed axes realize homogeneous Neumann walls through
reflection ghosts (even for scalars, odd for flux densities), which keeps
the operator symmetric in the sqrt|g|-weighted inner product; one-sided
stencils are used only for boundary values of diagnostic derivatives.

On even-sized all-periodic lattices the composed operator annihilates
per-axis-parity constants in addition to true constants; the gradient
annihilates them too, so Y and Z are unique while phi is pinned only up to
the global weighted-mean gauge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .calculus import CONTRAVARIANT, VectorField, sharp
from .errors import DegenerateMetricError, SolverError, VortError
from .manifold import Chart, MetricField, PERIODIC

CG_RELATIVE_TOL = 1e-10
CG_ITERATION_FACTOR = 50
COMPATIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class Lattice:
    chart: Chart
    shape: tuple  # points per axis

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) != self.chart.dim:
            raise VortError("lattice needs one point count per chart axis")
        if any(s < 8 for s in shape):
            raise VortError("lattice needs at least 8 points per axis")

    @property
    def dim(self):
        return self.chart.dim

    def axis_nodes(self, i) -> np.ndarray:
        lo, hi = self.chart.domain[i]
        n = self.shape[i]
        if self.chart.boundary[i] == PERIODIC:
            return lo + (hi - lo) / n * np.arange(n)
        return np.linspace(lo, hi, n)

    def spacing(self, i) -> float:
        lo, hi = self.chart.domain[i]
        n = self.shape[i]
        return (hi - lo) / n if self.chart.boundary[i] == PERIODIC else (hi - lo) / (n - 1)

    def grids(self) -> dict:
        axes = [self.axis_nodes(i) for i in range(self.dim)]
        return dict(zip(self.chart.coords, np.meshgrid(*axes, indexing="ij")))

    def cell_weights(self) -> np.ndarray:
        """Tensor-product trapezoid weights (uniform on periodic axes)."""
        weight = np.array(1.0)
        for i in range(self.dim):
            h = self.spacing(i)
            w = np.full(self.shape[i], h)
            if self.chart.boundary[i] != PERIODIC:
                w[0] = w[-1] = h / 2.0
            weight = np.multiply.outer(weight, w)
        return weight


@dataclass
class GridFunction:
    lattice: Lattice
    values: np.ndarray
    mean_zero: bool = False
    solve_info: "SolveInfo" = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.lattice.shape:
            raise VortError(f"values shape {self.values.shape} != lattice {self.lattice.shape}")
        if not np.all(np.isfinite(self.values)):
            raise VortError("grid function has non-finite values")


@dataclass
class GridVectorField:
    lattice: Lattice
    components: np.ndarray  # (n, *shape)
    variance: str = CONTRAVARIANT

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        if self.components.shape != (self.lattice.dim,) + self.lattice.shape:
            raise VortError("component array must have shape (n, *lattice shape)")
        if not np.all(np.isfinite(self.components)):
            raise VortError("grid vector field has non-finite values")


@dataclass(frozen=True)
class SolveInfo:
    iterations: int
    relative_residual: float


def _diff_axis(values, axis, h, periodic, kind):
    """Second-order first derivative along one axis.

    kind selects the fixed-boundary closure: 'even'/'odd' reflection ghosts
    (Neumann walls, used inside the operator) or 'oneside' second-order
    one-sided stencils (diagnostics).
    """
    if periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    out = np.empty_like(values)
    inner = [slice(None)] * values.ndim

    def sl(idx):
        s = list(inner)
        s[axis] = idx
        return tuple(s)

    out[sl(slice(1, -1))] = (values[sl(slice(2, None))] - values[sl(slice(0, -2))]) / (2.0 * h)
    if kind == "even":
        out[sl(0)] = 0.0
        out[sl(-1)] = 0.0
    elif kind == "odd":
        out[sl(0)] = values[sl(1)] / h
        out[sl(-1)] = -values[sl(-2)] / h
    elif kind == "oneside":
        out[sl(0)] = (-3.0 * values[sl(0)] + 4.0 * values[sl(1)] - values[sl(2)]) / (2.0 * h)
        out[sl(-1)] = (3.0 * values[sl(-1)] - 4.0 * values[sl(-2)] + values[sl(-3)]) / (2.0 * h)
    else:
        raise ValueError(f"unknown boundary kind {kind!r}")
    return out


class LaplaceBeltrami:
    """Matrix-free div(grad .) with metric coefficients sampled on the lattice."""

    def __init__(self, m: MetricField, lattice: Lattice):
        if lattice.chart != m.chart:
            raise VortError("lattice and metric live on different charts")
        self.metric = m
        self.lattice = lattice
        n = lattice.dim
        grids = lattice.grids()
        g = np.empty((n, n) + lattice.shape)
        for i in range(n):
            for j in range(n):
                g[i, j] = ex.eval_grid(m.entry(i, j), grids)
        if not np.all(np.isfinite(g)):
            raise VortError("metric is not finite on the lattice")
        gmat = np.moveaxis(g, (0, 1), (-2, -1))  # (*shape, n, n)
        det = np.linalg.det(gmat)
        bad = det <= 1e-14
        if np.any(bad):
            where = np.argwhere(bad)[0]
            point = {c: float(lattice.axis_nodes(i)[where[i]])
                     for i, c in enumerate(m.chart.coords)}
            raise DegenerateMetricError(
                f"metric degenerate on the lattice at {point} (det={det[tuple(where)]:.3e})")
        self.g = g
        self.g_inv = np.moveaxis(np.linalg.inv(gmat), (-2, -1), (0, 1))
        self.sqrt_g = np.sqrt(det)
        self.weights = lattice.cell_weights()
        self._periodic = tuple(b == PERIODIC for b in m.chart.boundary)
        self._h = tuple(lattice.spacing(i) for i in range(n))

    # -- discrete operators -------------------------------------------------

    def grad(self, values: np.ndarray) -> np.ndarray:
        """(grad f)^i = g^ij D_j f; Neumann closure at fixed walls."""
        n = self.lattice.dim
        partials = [
            _diff_axis(values, j, self._h[j], self._periodic[j], "even") for j in range(n)
        ]
        return np.stack([
            sum(self.g_inv[i, j] * partials[j] for j in range(n)) for i in range(n)
        ])

    def div(self, components: np.ndarray) -> np.ndarray:
        """div V = (1/sqrt|g|) D_i (sqrt|g| V^i); zero-flux closure at walls."""
        n = self.lattice.dim
        total = np.zeros(self.lattice.shape)
        for i in range(n):
            total += _diff_axis(self.sqrt_g * components[i], i,
                                self._h[i], self._periodic[i], "odd")
        return total / self.sqrt_g

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.div(self.grad(values))

    def curl(self, components: np.ndarray, variance=CONTRAVARIANT) -> np.ndarray:
        """Antisymmetric A_ij = D_j V_i - D_i V_j after lowering; diagnostic
        boundary values use one-sided stencils."""
        n = self.lattice.dim
        if variance == CONTRAVARIANT:
            lowered = np.stack([
                sum(self.g[i, j] * components[j] for j in range(n)) for i in range(n)
            ])
        else:
            lowered = components
        partial = [[_diff_axis(lowered[i], j, self._h[j], self._periodic[j], "oneside")
                    for j in range(n)] for i in range(n)]
        out = np.zeros((n, n) + self.lattice.shape)
        for i in range(n):
            for j in range(n):
                out[i, j] = partial[i][j] - partial[j][i]
        return out

    # -- weighted reductions -------------------------------------------------

    def dot(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(self.weights * self.sqrt_g * u * v))

    def weighted_mean(self, values: np.ndarray) -> float:
        return self.dot(values, np.ones_like(values)) / float(np.sum(self.weights * self.sqrt_g))

    def kernel_masks(self) -> list:
        """Indicator grids of the operator's structural null space.

        Central differences over doubled spacing annihilate any function
        constant on a per-axis parity class, so composed div(grad .) does
        too; parity is meaningful on fixed axes and on even-sized periodic
        axes (an odd periodic axis merges the classes through wraparound).
        """
        axis_classes = []
        for i in range(self.lattice.dim):
            n = self.lattice.shape[i]
            idx = np.arange(n)
            if self._periodic[i] and n % 2 == 1:
                axis_classes.append([np.ones(n, dtype=bool)])
            else:
                axis_classes.append([idx % 2 == 0, idx % 2 == 1])
        masks = []
        for combo in np.ndindex(*[len(c) for c in axis_classes]):
            mask = np.ones(self.lattice.shape, dtype=bool)
            for axis, choice in enumerate(combo):
                shape = [1] * self.lattice.dim
                shape[axis] = -1
                mask = mask & axis_classes[axis][choice].reshape(shape)
            masks.append(mask)
        return masks

    def project_kernel(self, values: np.ndarray) -> np.ndarray:
        """Remove the weighted mean on every parity class (the gauge that
        pins phi completely; it implies global weighted mean zero)."""
        w = self.weights * self.sqrt_g
        out = values.copy()
        for mask in self.kernel_masks():
            out[mask] -= np.sum((w * values)[mask]) / np.sum(w[mask])
        return out

    def field_inner(self, U: np.ndarray, V: np.ndarray) -> float:
        """sqrt|g|-weighted lattice inner product sum w sqrt|g| g_ij U^i V^j."""
        n = self.lattice.dim
        pointwise = sum(self.g[i, j] * U[i] * V[j] for i in range(n) for j in range(n))
        return float(np.sum(self.weights * self.sqrt_g * pointwise))


def assemble_laplace_beltrami(m: MetricField, lattice: Lattice) -> LaplaceBeltrami:
    return LaplaceBeltrami(m, lattice)


# ---------------------------------------------------------------------------
# conjugate gradients in the weighted inner product
# ---------------------------------------------------------------------------

def solve_poisson(op: LaplaceBeltrami, rhs: GridFunction, x0=None, atol=0.0) -> GridFunction:
    """Solve Lap(phi) = rhs; phi comes back gauge-fixed to weighted mean zero
    (per parity class, which pins the solution completely).

    The right-hand side must have sqrt|g|-weighted mean below 1e-8 (the
    discrete counterpart of the closed-manifold compatibility condition);
    CG runs on -Lap, which is positive semidefinite in the weighted inner
    product, until the weighted residual drops below
    max(1e-10 * ||rhs||, atol).  atol lets callers solving a near-zero
    right-hand side (e.g. an already divergence-free field) succeed at a
    tolerance scaled to their data instead of chasing roundoff.
    """
    if rhs.lattice != op.lattice:
        raise VortError("rhs lives on a different lattice than the operator")
    mean = op.weighted_mean(rhs.values)
    scale = float(np.max(np.abs(rhs.values)))
    if abs(mean) > COMPATIBILITY_TOL * max(1.0, scale):
        raise SolverError(
            f"incompatible right-hand side: weighted mean {mean:.3e} exceeds {COMPATIBILITY_TOL}")
    # scrub the sub-threshold kernel content so the Krylov space stays clean
    b = op.project_kernel(-rhs.values)

    total = int(np.prod(op.lattice.shape))
    max_iter = CG_ITERATION_FACTOR * total
    x = np.zeros(op.lattice.shape) if x0 is None else np.array(x0, dtype=float)
    b_norm = np.sqrt(op.dot(b, b))
    target = max(CG_RELATIVE_TOL * b_norm, float(atol))

    r = b + op.apply(x)          # r = b - A x with A = -Lap
    p = r.copy()
    rr = op.dot(r, r)
    iterations = 0
    while np.sqrt(rr) > target:
        if iterations >= max_iter:
            raise SolverError("conjugate gradients did not converge "
                              f"(relative residual {np.sqrt(rr) / b_norm:.3e})",
                              residual=float(np.sqrt(rr) / b_norm))
        Ap = -op.apply(p)
        alpha = rr / op.dot(p, Ap)
        x = x + alpha * p
        r = r - alpha * Ap
        rr_next = op.dot(r, r)
        p = r + (rr_next / rr) * p
        rr = rr_next
        iterations += 1
    phi = op.project_kernel(x)
    info = SolveInfo(iterations=iterations,
                     relative_residual=float(np.sqrt(rr) / b_norm) if b_norm > 0.0 else 0.0)
    return GridFunction(op.lattice, phi, mean_zero=True, solve_info=info)


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HelmholtzResult:
    Y: GridVectorField      # divergence-free part
    Z: GridVectorField      # curl-free (gradient) part
    phi: GridFunction       # potential, weighted mean zero
    info: SolveInfo


def sample_field(X: VectorField, lattice: Lattice) -> GridVectorField:
    grids = lattice.grids()
    comps = np.stack([ex.eval_grid(c, grids) for c in X.components])
    if not np.all(np.isfinite(comps)):
        raise VortError("field is not finite on the lattice")
    return GridVectorField(lattice, comps, X.variance)


def helmholtz_decompose(m: MetricField, X, lattice: Lattice = None, x0=None) -> HelmholtzResult:
    """Split X = Y + Z with discrete div Y ~ 0 and Z = grad phi (curl-free).

    X may be a symbolic VectorField (sampled on the lattice; a covariant
    field is raised first) or an already-sampled contravariant
    GridVectorField whose lattice is used directly.
    """
    if isinstance(X, VectorField):
        if lattice is None:
            raise VortError("a lattice is required to sample a symbolic field")
        if X.variance != CONTRAVARIANT:
            X = sharp(m, X)
        Xg = sample_field(X, lattice)
    else:
        if X.variance != CONTRAVARIANT:
            raise VortError("grid input to the decomposition must be contravariant")
        Xg = X
        lattice = X.lattice
    op = assemble_laplace_beltrami(m, lattice)
    rhs = GridFunction(lattice, op.div(Xg.components))
    # absolute solver floor scaled to the field, so decomposing an already
    # divergence-free field does not chase a roundoff right-hand side
    atol = CG_RELATIVE_TOL * np.sqrt(max(op.field_inner(Xg.components, Xg.components), 0.0))
    phi = solve_poisson(op, rhs, x0=x0, atol=atol)
    Z = op.grad(phi.values)
    Y = Xg.components - Z
    return HelmholtzResult(
        Y=GridVectorField(lattice, Y, CONTRAVARIANT),
        Z=GridVectorField(lattice, Z, CONTRAVARIANT),
        phi=phi,
        info=phi.solve_info,
    )
