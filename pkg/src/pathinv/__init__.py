"""Cartan-connection invariants of path structures on 3-manifolds."""

from .charts import PChartOde, alpha_to_p, q1_p, q2_p, total_x_derivative
from .expr import evaluate_on_grid, parse
from .families import (
    Su2Structure,
    TightTorusStructure,
    heisenberg_model,
    su2_invariants,
    tight_torus_invariants,
    tight_torus_numeric_mu,
)
from .forms import ConnectionMatrix, Form1, Form2, Form3, transgression3, wedge11, wedge12
from .grid import (
    GridSpec,
    PeriodicScalarField,
    ResolutionError,
    dalpha,
    dx,
    dy,
    frame_derivatives,
    integrate_volume,
)
from .ode import (
    OdeTorusStructure,
    assemble_connection,
    curvature_chain,
    flatness_report,
    mu,
    mu_integrand_pointwise,
    mu_via_transgression,
    q1,
    q2,
)

__version__ = "0.1.0"
