"""Modal simulator for transformation-based approximate Helmholtz cloaking.

Exact per-angular-mode transfer-matrix solves of concentric layered media
in 2d and 3d drive the cloaking experiments: invisibility-rate sweeps,
interior limit fields, resonance blow-up, and instability under detuned
material parameters.
"""

__version__ = "0.1.0"

from .errors import CloakwaveError, ValidationError
from .mie import CloakConfig, Layer, LayeredMedium
from .fields import FieldSeries, IncidentSpec

__all__ = [
    "__version__",
    "CloakwaveError",
    "ValidationError",
    "CloakConfig",
    "Layer",
    "LayeredMedium",
    "FieldSeries",
    "IncidentSpec",
]
