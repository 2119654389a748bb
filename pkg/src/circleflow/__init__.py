"""Geodesic flows of right-invariant Fourier-multiplier metrics on circle diffeomorphisms."""
from .diffeo import Diffeo, compose_field, conjugate_apply, invert_diffeo, metric_inner, pull_back
from .expmap import PolarCoords, exp_id, log_map, path_length, polar_coords
from .geodesic import (Diagnostics, EulerState, GeodesicState, ad_transpose, christoffel_B,
                       covariant_derivative, diagnostics, euler_rhs, integrate_euler,
                       integrate_lagrangian, spray_S)
from .homogeneous import (Constraint, constrained_euler_rhs, constrained_invert,
                          integrate_constrained, project_to_fixed, verify_equivariance)
from .kernels import BACKEND
from .multiplier import (MultiplierSymbol, apply, builtin, ch, clm, frac, hilbert, hs,
                         invert_on_range, lambda_2s, order_bound_check, parse_operator,
                         symbol_condition_check, wp)
from .multisymbol import MultiSymbolTable, apply_P_n, p_n_closed, p_n_recursive
from .spectral import GridSpec, PeriodicField, analyze, synthesize

__version__ = "0.1.0"
