"""Spectral points of twisted Dirac operators on Inoue surfaces S_M."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    EigenData,
    InoueMatrix,
    LatticeBasis,
    cappell_shaneson,
    char_poly,
    eigen_data,
    lattice_basis,
    parse_matrix,
    validate_matrix,
)
from .analysis import (  # noqa: E402
    IntegratorConfig,
    MatchingResult,
    TwistParameter,
    assemble_series,
    matching_determinant,
    p_zero_membership,
    weighted_norm,
)
from .lattice import Mode, ModeCoeff, apply_monodromy, mode_coefficients, orbit_representatives, orbit_segment  # noqa: E402
from .spectral import SpectrumReport, annulus_scan, finite_orbit_points, map_to_dminus, map_to_dplus  # noqa: E402

__all__ = [
    "EigenData", "InoueMatrix", "LatticeBasis", "cappell_shaneson", "char_poly", "eigen_data",
    "lattice_basis", "parse_matrix", "validate_matrix", "IntegratorConfig", "MatchingResult",
    "TwistParameter", "assemble_series", "matching_determinant", "p_zero_membership", "weighted_norm",
    "Mode", "ModeCoeff", "apply_monodromy", "mode_coefficients", "orbit_representatives", "orbit_segment",
    "SpectrumReport", "annulus_scan", "finite_orbit_points", "map_to_dminus", "map_to_dplus",
]
