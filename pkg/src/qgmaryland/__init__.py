"""Spectra of quasiperiodic surface Maryland models on Z^d quantum lattice graphs.

Absolutely continuous bands come from the edge Hill discriminant; the dense
pure point spectrum in the gaps solves the rotation-number equation
sigma(lambda) = pi (omega.m + phi) mod pi.  Independent finite-truncation
oracles validate both claims.
"""

from .errors import (ArithmeticClashError, BranchViolationError, DirichletPointError,
                     GapViolationError, InsideSpectrumError, OutOfRangeError,
                     SpectralError)
from .green import (TorusGrid, default_grid, green_diag, green_diag_1d_closed,
                    moment_series_oracle, symbol_delta, walk_moments)
from .hill import (Band, Potential, TransferData, a_coeff, dirichlet_points,
                   discriminant, hill_bands, integrate_fundamental)
from .spectrum import (DiophantineReport, EigenvalueRecord, Numerics, SpectralReport,
                       diophantine_check, enumerate_targets, gap_subintervals,
                       primed_params, solve_eigenvalue, spectral_report,
                       surface_diagonal, truncated_full_matrix,
                       truncated_surface_matrix)
from .surface import (ModelParams, SigmaTable, b_symbol, f0, n_matrix_element,
                      n_symbol, sigma, sigma_derivative_quadrature, sigma_table,
                      weyl_apply)

__version__ = "0.1.0"

__all__ = [
    "ArithmeticClashError", "Band", "BranchViolationError", "DiophantineReport",
    "DirichletPointError", "EigenvalueRecord", "GapViolationError",
    "InsideSpectrumError", "ModelParams", "Numerics", "OutOfRangeError",
    "Potential", "SigmaTable", "SpectralError", "SpectralReport", "TorusGrid",
    "TransferData", "a_coeff", "b_symbol", "default_grid", "diophantine_check",
    "dirichlet_points", "discriminant", "enumerate_targets", "f0",
    "gap_subintervals", "green_diag", "green_diag_1d_closed", "hill_bands",
    "integrate_fundamental", "moment_series_oracle", "n_matrix_element",
    "n_symbol", "primed_params", "sigma", "sigma_derivative_quadrature",
    "sigma_table", "solve_eigenvalue", "spectral_report", "surface_diagonal",
    "symbol_delta", "truncated_full_matrix", "truncated_surface_matrix",
    "walk_moments", "weyl_apply",
]
