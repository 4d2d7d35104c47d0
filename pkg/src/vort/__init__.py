"""Chart-based Riemannian vector calculus.

Symbolic metric operators (gradient, divergence, curl tensor, connection,
Lie derivative, Hodge star), flow-line integration, a discrete
Laplace-Beltrami solver powering the Helmholtz decomposition, and
quadrature checks of the curl/gradient integral identities.
"""

from .errors import (ChartMismatchError, DegenerateMetricError, DegreeError,
                     EvalDomainError, ExprSyntaxError, FlowError,
                     ManifestError, SolverError, UnboundVariableError,
                     UnknownFunctionError, VortError)
from .expr import Expr, diff, evaluate, parse, substitute, to_text
from .manifold import Chart, MetricData, MetricField, inner, metric_data
from .calculus import (Christoffel, KillingReport, PTensor, TensorField2,
                       VectorField, christoffel, cov_deriv, curl, div,
                       div_christoffel, flat, grad, is_killing, lie_bracket,
                       lie_deriv_metric, ptensor_div, sharp, trace_curl)
from .forms import (KForm, codifferential, curl_via_forms, ext_d, hodge_star,
                    l2_inner, lie_deriv_volume, pointwise_inner, volume_form,
                    wedge)
from .flow import FlowPath, integrate_flow
from .helmholtz import (GridFunction, GridVectorField, HelmholtzResult,
                        Lattice, assemble_laplace_beltrami,
                        helmholtz_decompose, sample_field, solve_poisson)
from .stokes import (IdentityReport, ParamCurve, ParamSurface,
                     line_integral_tangent, surface_integral_normal,
                     verify_curl_stokes, verify_grad_line)
from .manifest import Manifest, load_manifest, parse_manifest

__version__ = "0.1.0"
