"""Numerical calculus on conformal maps."""
from .analytic_core import (CircleContour, ConformalMap, DomainDescriptor, contour_integral,
                            identity, laurent_coeffs, mobius, newton_invert, polynomial,
                            schwarzian, taylor_coeffs)
from .annular_factorization import AnnularSetup, FactorizationResult, factorize
from .cft_ward import (CentralCharge, boundary_continuum_form, drc_joukowsky_T,
                       gff_functional, halfplane_functional, onepoint_T,
                       reflection_decomposition_check, ward_rhs_halfplane, ward_rhs_sphere)
from .derivative_engine import (Configuration, Functional, HoloDerivative, PrimaryFieldData,
                                apply_action, check_mobius_covariance, connection_theta,
                                directional_derivative, holo_derivative_point,
                                holo_derivative_series)
from .errors import (ConfcalcError, ConfigError, ContourSingularityError,
                     DegenerateDerivativeError, DeviationTooLargeError, HorizonExceededError,
                     InvalidDeformationError, NoConvergenceError, SingularConfigurationError,
                     StepTooLargeError)
from .riemann_map import BoundaryCurve, conformal_radius_halfplane, solve_disk_map
from .vector_fields import VectorField, basis_H, exp_flow, family_form, quadratic_field

__version__ = "0.1.0"
