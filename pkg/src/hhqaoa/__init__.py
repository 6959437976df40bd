"""QAOA simulation and experiments for heavy-hex higher-order Ising models."""

from .angles import TRANSFER_ANGLES, QaoaAngles
from .model import (
    EnergyBounds,
    HeavyHexGraph,
    IsingInstance,
    approximation_ratio,
    evaluate_cost,
    generate_instance,
    load_coupling_map,
)

__all__ = [
    "TRANSFER_ANGLES",
    "EnergyBounds",
    "HeavyHexGraph",
    "IsingInstance",
    "QaoaAngles",
    "approximation_ratio",
    "evaluate_cost",
    "generate_instance",
    "load_coupling_map",
]
