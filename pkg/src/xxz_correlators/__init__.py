"""Ground-state correlation functions of the XXZ spin-1/2 chain."""

from .cli import main
from .correlators import F_m, correlator, efp, field_F_m, finite_chain_F_m, spin_correlator
from .models import CorrelatorResult, CorrelatorSpec, ModelParams, Regime

__all__ = [
    'CorrelatorResult',
    'CorrelatorSpec',
    'F_m',
    'ModelParams',
    'Regime',
    'correlator',
    'efp',
    'field_F_m',
    'finite_chain_F_m',
    'main',
    'spin_correlator',
]
