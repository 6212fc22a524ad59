"""Structural equations of supermanifold immersions.

Grassmann-sector decomposition, theta-polynomial fields on a conformal
grid, frame-matrix assembly for the seven immersion cases, compatibility
residuals, closed-form solution families, and frame integration with
holonomy checks. Hot kernels use a compiled extension when available
(``superframes.kernels.BACKEND``).
"""

from superframes.casedefs import CASE_TAGS, CaseSpec, ConstraintViolation, omega_poly
from superframes.cases import (GeometryBundle, appendix_a_residuals,
                               appendix_b_residuals, body_family, conformal_factor,
                               curved_f2_residual, hyp_case1_family, hyp_case2_derived,
                               hyp_case2_family, liouville_normalization_constant,
                               liouville_u, metric)
from superframes.fields import (BodyVanishesError, ConformalGrid, Field, ThetaPoly,
                                check_nilpotency, d_theta, d_x, field_from_csv,
                                field_to_csv)
from superframes.frames import (FieldMatrix, FrameSystem, ResidualReport, assemble,
                                gauss_codazzi_residual, zero_curvature_residual)
from superframes.grassmann import (GrassmannValue, SectorSignature, SuperVector,
                                   SuperVectorField, decompose, gr_mul, reassemble,
                                   super_inner)
from superframes.integrator import (FrameField, holonomy, holonomy_order,
                                    initial_frame, propagate, reconstruct,
                                    theta_transport)
from superframes.kernels import BACKEND

__all__ = [
    "BACKEND", "BodyVanishesError", "CASE_TAGS", "CaseSpec", "ConformalGrid",
    "ConstraintViolation", "Field", "FieldMatrix", "FrameField", "FrameSystem",
    "GeometryBundle", "GrassmannValue", "ResidualReport", "SectorSignature",
    "SuperVector", "SuperVectorField", "ThetaPoly", "appendix_a_residuals",
    "appendix_b_residuals", "assemble", "body_family", "check_nilpotency",
    "conformal_factor", "curved_f2_residual", "d_theta", "d_x", "decompose",
    "field_from_csv", "field_to_csv", "gauss_codazzi_residual", "gr_mul",
    "holonomy", "holonomy_order", "hyp_case1_family", "hyp_case2_derived",
    "hyp_case2_family", "initial_frame", "liouville_normalization_constant",
    "liouville_u", "metric", "omega_poly", "propagate", "reassemble",
    "reconstruct", "super_inner", "theta_transport", "zero_curvature_residual",
]

__version__ = "0.1.0"
