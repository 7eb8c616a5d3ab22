"""Weak-form quadrature elements for strain-gradient beams and Kirchhoff plates."""
from .analytical_oracle import (beam_natural_frequencies, characteristic_roots,
                                frequency_matrix, ssss_plate_frequency, ssss_plate_spectrum)
from .beam_qem import BeamBC, BeamModel, beam_frequencies
from .dq_basis import hermite_basis, lagrange_derivatives, modify_for_boundary_dofs
from .gll_quadrature import gll_grid
from .plate_qem import PlateBC, PlateModel, plate_frequencies

__version__ = "0.1.0"

__all__ = [
    "BeamBC", "BeamModel", "PlateBC", "PlateModel",
    "beam_frequencies", "plate_frequencies",
    "beam_natural_frequencies", "characteristic_roots", "frequency_matrix",
    "ssss_plate_frequency", "ssss_plate_spectrum",
    "gll_grid", "lagrange_derivatives", "modify_for_boundary_dofs", "hermite_basis",
]
