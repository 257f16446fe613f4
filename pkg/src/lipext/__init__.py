"""Extremal Lipschitz extensions and monotone schemes for Jensen's equations."""

from .boundary import load_boundary, preset_function
from .extension import (
    ExtensionParams,
    lipschitz_constant_boundary,
    lipschitz_constant_field,
    mcshane_extension,
    whitney_extension,
)
from .grid import (
    BallStencil,
    DomainSpec,
    GridDomain,
    ball_extrema,
    build_ball_stencil,
    build_domain,
)
from .scheme import SchemeConfig, SolveReport, discrete_residual, jacobi_operator, solve

__version__ = "0.1.0"
