"""curvedyn: dynamics of plane rational maps with invariant curves.

Core objects: projective points and rational self-maps of P^2 over real or
complex fields at configurable precision; the uniformized invariant cubic
with its canonical measure; transverse Lyapunov exponent estimators; basin
classification; invariant-circle discovery; and the nodal-quartic
contraction lab.
"""

from .contexts import CTX_C, CTX_R, ScalarContext
from .errors import *  # noqa: F401,F403 (small, curated exception set)
from .projective import (HomogPoly, PolyMap, ProjPoint, eval_map, fs_distance,
                         jacobian, normalize, proj_equal)
from .families import (DesbovesParams, cassini_map, cassini_phi,
                       classical_desboves, degree3_map, desboves_map,
                       elementary_params, fermat_fixed_points,
                       first_integral_residual, is_regular_desboves,
                       lattes_p1_step, quotient_desboves,
                       sign_permutation_conjugate, symmetric_product,
                       synthetic_ring_map, two_thirds_params)
from .torus import Lattice, TorusPoint, equianharmonic_lattice, weierstrass
from .fermat import (CurveModel, fermat_curve_model, fermat_embed,
                     newton_reproject, real_embed,
                     tangent_semiconjugacy_residual)
from .exponent import (ExponentEstimate, lyap_complex, lyap_line_elementary,
                       lyap_real, sweep, threshold_find, transverse_norm)
from .basins import (BasinReport, BasinView, OrbitTrace, Thresholds,
                     basin_fractions, classify_orbit, near_variety_fraction,
                     orbit_trace, render_basin)
from .circles import (CircleModel, circle_transverse_exponent,
                      find_attracting_circle, persistence_probe,
                      rotation_number, rotation_sweep)
from .rings import RingProfile, ring_profile
from .cassini import CassiniConfig, contraction_check, r_ratio, trapping_demo

__version__ = "0.1.0"
