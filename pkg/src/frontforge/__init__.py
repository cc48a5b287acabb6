"""frontforge: wave fronts in space forms from intrinsic bundle data.

The pipeline: build a front bundle (from a sine-/sinh-Gordon angle field,
from a parametrized frontal, or from your own providers), certify its
integrability residuals, realize it by integrating the adapted-frame ODE in
the Euclidean, spherical or hyperbolic model, and analyze the singular set:
classification, singular shape operator and principal curvatures, extrinsic
curvature limits, and the curvature-sign verification harness.
"""

from .bundle import (FrontBundleField, FundamentalForms, compatibility_residual,
                     constant_field, eval_omega, eval_phi, eval_psi,
                     front_condition_margin, fundamental_forms, phi_jacobian,
                     with_fd_derivatives)
from .generators import (ThetaField, ThetaSource, chebyshev_bundle,
                         curvatureline_bundle, exact_soliton, linear_source,
                         sinh_profile_source, solve_sine_gordon_goursat,
                         solve_sinh_gordon_dirichlet, soliton_source)
from .grids import DomainGrid
from .induce import (ParametrizedFrontal, cubic_fold_bundle, fixture_plane,
                     fixture_pseudosphere, fixture_s2xr, fixture_unit_sphere,
                     induce_bundle, polar_map_bundle, sample_parametrization)
from .integrability import (ResidualReport, codazzi_residual,
                            gauss_curvature_identity_residual, gauss_residual,
                            map_integrability_residual,
                            metric_gaussian_curvature, residual_report,
                            two_d_integrability_residual)
from .realize import (AmbientModel, RealizedFront, build_omega_tilde,
                      geodesic_deviation, holonomy_residual,
                      holonomy_residual_grid, integrate_frame, isometry_between,
                      perturb_second_homomorphism, project_structure_group,
                      realize_map, realized_fundamental_forms,
                      realized_gaussian_curvature, rescale_to_unit_curvature,
                      swap_roles)
from .singular import (SingularCurve, SingularPointRecord, SingularSheet,
                       adapted_coordinates, analyze_singular_set,
                       classify_singular_point, conormal, curvature_sign_report,
                       extract_singular_set, extrinsic_curvature,
                       limit_extrinsic_curvature_at_a2, singular_curvature_2d,
                       singular_principal_curvatures, singular_shape_operator)

__version__ = "0.1.0"
