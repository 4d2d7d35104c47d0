import math

import numpy as np
import pytest

from vort import expr as ex
from vort.calculus import VectorField
from vort.manifold import Chart, MetricField

TAU = 2.0 * math.pi


@pytest.fixture(scope="session")
def plane_chart():
    return Chart("plane", ("x1", "x2"), ((-2.0, 2.0), (-2.0, 2.0)), ("fixed", "fixed"))


@pytest.fixture(scope="session")
def plane_metric(plane_chart):
    return MetricField.euclidean(plane_chart)


@pytest.fixture(scope="session")
def torus_chart():
    return Chart("torus", ("x1", "x2"), ((0.0, TAU), (0.0, TAU)), ("periodic", "periodic"))


@pytest.fixture(scope="session")
def torus_metric(torus_chart):
    return MetricField.euclidean(torus_chart)


@pytest.fixture(scope="session")
def s2_chart():
    return Chart("s2_band", ("theta", "phi"), ((-1.2, 1.2), (0.0, TAU)), ("fixed", "periodic"))


@pytest.fixture(scope="session")
def s2_metric(s2_chart):
    return MetricField.diagonal(s2_chart, ["1", "cos(theta)^2"])


@pytest.fixture(scope="session")
def bumpy_chart():
    return Chart("bumpy", ("u", "v"), ((0.3, 2.2), (0.3, 2.2)), ("fixed", "fixed"))


@pytest.fixture(scope="session")
def bumpy_metric(bumpy_chart):
    # randomized diagonal metric, fixed seed so expected values are frozen
    rng = np.random.RandomState(42)
    a, b = rng.uniform(0.2, 0.5, size=2)
    diag = [f"{1.5 + a:.6f} + {a:.6f}*sin(u)*cos(v)",
            f"{1.2 + b:.6f} + {b:.6f}*cos(u + v)"]
    return MetricField.diagonal(bumpy_chart, diag).validate()


@pytest.fixture(scope="session")
def r3_chart():
    return Chart("ambient", ("x", "y", "z"),
                 ((-4.0, 4.0), (-4.0, 4.0), (-4.0, 4.0)), ("fixed",) * 3)


@pytest.fixture(scope="session")
def r3_metric(r3_chart):
    return MetricField.euclidean(r3_chart)


# ---------------------------------------------------------------------------
# random generators (seeded; property-style tests sample these)
# ---------------------------------------------------------------------------

_SAFE_ATOMS = (
    "{x}", "{y}", "({x}*{y})", "sin({x})", "cos({y})", "({x}^2)",
    "sin({x})*cos({y})", "cos(2*{x})", "sin({x} + {y})", "exp(0.3*sin({x}))",
    "sqrt(2 + sin({y}))", "1/(2 + cos({x}))",
)


def random_scalar(rng, coords, terms=3) -> ex.Expr:
    """Tame random closed-form scalar: bounded values and derivatives."""
    x, y = coords[0], coords[-1]
    parts = []
    for _ in range(terms):
        atom = _SAFE_ATOMS[rng.randint(len(_SAFE_ATOMS))].format(x=x, y=y)
        coeff = rng.uniform(-2.0, 2.0)
        parts.append(f"({coeff:.6f})*({atom})")
    return ex.parse(" + ".join(parts))


def random_field(rng, chart, variance="contra") -> VectorField:
    return VectorField(chart, tuple(random_scalar(rng, chart.coords)
                                    for _ in range(chart.dim)), variance)


def random_points(rng, chart, count) -> list:
    points = []
    for _ in range(count):
        point = {}
        for name, (lo, hi) in zip(chart.coords, chart.domain):
            width = hi - lo
            point[name] = float(rng.uniform(lo + 1e-3 * width, hi - 1e-3 * width))
        points.append(point)
    return points


def eval_max_abs(e, points) -> float:
    return max(abs(ex.evaluate(e, p)) for p in points)


def eval_max_diff(a, b, points) -> float:
    return max(abs(ex.evaluate(a, p) - ex.evaluate(b, p)) for p in points)
