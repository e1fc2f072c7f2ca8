"""KMS inverse temperatures for one-sided sofic shifts.

The main entry points are :func:`build_cover`, :func:`growth_rates`,
:func:`transfer_matrix` / :func:`spectral_radius` and :func:`kms_report`.
"""

__version__ = "0.1.0"

from .cover import CoverGraph, CoverPoint, build_cover, canonical_lift, fiber, verify_extension
from .growth import GrowthRates, MeanCycleResult, extremal_birkhoff, finite_horizon, growth_rates
from .kms import BetaConstraint, KmsReport, beta_window, kms_report, measure_witness, restrict_subsystem, solve_beta
from .presentations import (
    EpPoint,
    Potential,
    Presentation,
    essentialize,
    higher_block,
    parse_potential,
    parse_presentation,
    readable_from,
)
from .ruelle import SpectralData, TransferMatrix, fixed_state, spectral_radius, transfer_matrix

__all__ = [
    "BetaConstraint",
    "CoverGraph",
    "CoverPoint",
    "EpPoint",
    "GrowthRates",
    "KmsReport",
    "MeanCycleResult",
    "Potential",
    "Presentation",
    "SpectralData",
    "TransferMatrix",
    "beta_window",
    "build_cover",
    "canonical_lift",
    "essentialize",
    "extremal_birkhoff",
    "fiber",
    "finite_horizon",
    "fixed_state",
    "growth_rates",
    "higher_block",
    "kms_report",
    "measure_witness",
    "parse_potential",
    "parse_presentation",
    "readable_from",
    "restrict_subsystem",
    "solve_beta",
    "spectral_radius",
    "transfer_matrix",
    "verify_extension",
]
