"""Pseudospectral almost Kaehler tori: operators, harmonic dimensions and spectral checks."""

from .assembly import (PIECES, DiscreteOperator, FormSpace, adjoint, apply_d_coordinate, assemble,
                       laplacian, pointwise, stacked)
from .kernels import (HarmonicReport, ell_dim, harmonic_dim, kernel_dimension, mode_block,
                      passive_modes, smallest_singular_values)
from .model import (CoframeField, ModelError, QSpec, SpectralGrid, TorusModel, build_coframe,
                    coframe_on)
from .theorems import (adjoint_residual, band_limited_trial, cw_duality_check, d_squared_residual,
                       decomposition_residual, delta_mubar_norm, delta_mubar_norm_global,
                       gradient_zero_fraction, kahler_identity_residual, lambda1,
                       laplacian_identity_residual, mubar_pointwise_rank, mubar_zero_census,
                       theorem13_check)

__all__ = [
    "PIECES", "DiscreteOperator", "FormSpace", "adjoint", "apply_d_coordinate", "assemble",
    "laplacian", "pointwise", "stacked", "HarmonicReport", "ell_dim", "harmonic_dim",
    "kernel_dimension", "mode_block", "passive_modes", "smallest_singular_values", "CoframeField",
    "ModelError", "QSpec", "SpectralGrid", "TorusModel", "build_coframe", "coframe_on",
    "adjoint_residual", "band_limited_trial", "cw_duality_check", "d_squared_residual",
    "decomposition_residual", "delta_mubar_norm", "delta_mubar_norm_global",
    "gradient_zero_fraction", "kahler_identity_residual", "lambda1", "laplacian_identity_residual",
    "mubar_pointwise_rank", "mubar_zero_census", "theorem13_check",
]
