"""Decoherence factor and geometric phase of a central spin in a spin bath."""
from .model import (
    BathModel,
    BathSpinParams,
    CentralSpinParams,
    decoherence_factor,
    dressed_frequency,
    mean_time_averaged_factor,
    reduced_density_matrix,
    single_spin_factor,
)
from .phase import (
    PERTURBATIVE_SIGN,
    GpResult,
    QuadratureSpec,
    gp_deviation,
    gp_exact,
    gp_kinematic,
    gp_perturbative,
    theta_plus_cos2,
    unitary_gp,
)

__all__ = [
    "BathModel",
    "BathSpinParams",
    "CentralSpinParams",
    "GpResult",
    "PERTURBATIVE_SIGN",
    "QuadratureSpec",
    "decoherence_factor",
    "dressed_frequency",
    "gp_deviation",
    "gp_exact",
    "gp_kinematic",
    "gp_perturbative",
    "mean_time_averaged_factor",
    "reduced_density_matrix",
    "single_spin_factor",
    "theta_plus_cos2",
    "unitary_gp",
]
