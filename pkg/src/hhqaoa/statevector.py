"""Exact noiseless QAOA simulation.

Basis index ``idx`` encodes qubit ``k`` in bit ``k`` (qubit 0 least
significant). Bit value 0 is spin ``z = +1`` and bit value 1 is ``z = -1``.
The phase separator is diagonal, so a round costs one elementwise multiply by
``exp(-i gamma C(z))`` plus one ``RX(2 beta)`` sweep over all qubits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .angles import QaoaAngles
from .model import IsingInstance
from .samples import SampleSet, batch_energies, spins_from_indices

DEFAULT_MAX_QUBITS = 27


class CapacityError(RuntimeError):
    """Problem too large for the selected backend."""


@dataclass(frozen=True)
class CostTable:
    costs: np.ndarray  # integer, length 2**n

    @property
    def n(self) -> int:
        return int(self.costs.shape[0]).bit_length() - 1

    @property
    def cmin(self) -> int:
        return int(self.costs.min())

    @property
    def cmax(self) -> int:
        return int(self.costs.max())

    def phase_lookup(self, gamma: float) -> np.ndarray:
        values = np.arange(self.cmin, self.cmax + 1)
        return np.exp(-1j * gamma * values)


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the statevector cap of {cap}")


def build_cost_table(instance: IsingInstance, cap: int = DEFAULT_MAX_QUBITS) -> CostTable:
    """Cost of every basis state, filled along a Gray-code walk (one spin flip per step)."""
    _check_cap(instance.n, cap)
    ptr, idx, coeff = _kernels.term_incidence(instance)
    if len(coeff) >= np.iinfo(np.int16).max:
        raise CapacityError("too many terms for a 16-bit cost table")
    out = np.empty(1 << instance.n, dtype=np.int16)
    _kernels.gray_fill_table(instance.n, ptr, idx, coeff, out)
    return CostTable(out)


def plus_state(n: int) -> StateVector:
    dim = 1 << n
    return StateVector(n, np.full(dim, dim ** -0.5, dtype=np.complex128))


def apply_phase_layer(state: StateVector, table: CostTable, gamma: float) -> None:
    _kernels.apply_phase(state.amplitudes, table.costs, table.phase_lookup(gamma), table.cmin)


def apply_mixer_layer(state: StateVector, beta: float) -> None:
    _kernels.apply_rx_all(state.amplitudes, state.n, np.cos(beta), np.sin(beta))


def run_qaoa(
    instance: IsingInstance,
    angles: QaoaAngles,
    table: CostTable | None = None,
    cap: int = DEFAULT_MAX_QUBITS,
) -> StateVector:
    _check_cap(instance.n, cap)
    if table is None:
        table = build_cost_table(instance, cap)
    state = plus_state(instance.n)
    for beta, gamma in zip(angles.beta, angles.gamma):
        apply_phase_layer(state, table, gamma)
        apply_mixer_layer(state, beta)
    return state


def expectation(state: StateVector, table: CostTable) -> float:
    if state.amplitudes.shape != table.costs.shape:
        raise ValueError(
            f"state has dimension {state.amplitudes.shape[0]}, cost table {table.costs.shape[0]}"
        )
    return float(_kernels.weighted_sum(state.amplitudes, table.costs))


def qaoa_expectation(instance: IsingInstance, angles: QaoaAngles, table: CostTable | None = None) -> float:
    if table is None:
        table = build_cost_table(instance)
    return expectation(run_qaoa(instance, angles, table), table)


def sample(
    state: StateVector, shots: int, seed: int, instance: IsingInstance
) -> SampleSet:
    """Draw ``shots`` i.i.d. basis states from ``|amplitude|^2``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs /= probs.sum()
    counts = rng.multinomial(shots, probs)
    hit = np.flatnonzero(counts)
    spins = spins_from_indices(hit, state.n)
    return SampleSet(spins, counts[hit].astype(np.int64), batch_energies(instance, spins))
