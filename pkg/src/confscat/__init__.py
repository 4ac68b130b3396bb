"""Conformal scattering for the cubic defocusing wave equation, as numerics.

Submodules: :mod:`geometry` (metrics, foliations, null surfaces),
:mod:`fields` (grids and data), :mod:`evolution` (Cauchy and slowdown
solvers), :mod:`characteristic` (characteristic problems, gluing, Picard),
:mod:`energy` (energy functionals and audits), :mod:`scattering` (traces
and the scattering map), :mod:`oracles` and :mod:`harness` (verification
and the ``confscat`` CLI).
"""

from .fields import CauchyData, CharacteristicData, Grid1D, ScalarFieldGrid
from .geometry import einstein_cylinder_metric, scri_minus, scri_plus
from .scattering import RadiationProfile, inverse_trace, scattering_map, trace_backward, trace_forward

__all__ = [
    "CauchyData",
    "CharacteristicData",
    "Grid1D",
    "RadiationProfile",
    "ScalarFieldGrid",
    "einstein_cylinder_metric",
    "inverse_trace",
    "scattering_map",
    "scri_minus",
    "scri_plus",
    "trace_backward",
    "trace_forward",
]
