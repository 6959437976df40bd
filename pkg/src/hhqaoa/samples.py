from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EnergyBounds, IsingInstance, approximation_ratio


def spins_from_indices(indices, n: int) -> np.ndarray:
    """Basis indices -> spin rows. Bit k of the index is qubit k; bit 0 means z=+1."""
    indices = np.asarray(indices, dtype=np.int64)
    bits = (indices[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def batch_energies(instance: IsingInstance, spins: np.ndarray) -> np.ndarray:
    """Cost of every row of a ``(m, n)`` spin array."""
    spins = np.asarray(spins, dtype=np.int64)
    out = np.zeros(spins.shape[0], dtype=np.int64)
    for sites, c in instance.terms():
        prod = np.full(spins.shape[0], c, dtype=np.int64)
        for s in sites:
            prod *= spins[:, s]
        out += prod
    return out


@dataclass
class SampleSet:
    """Distinct measured spin configurations with multiplicities and energies."""

    spins: np.ndarray  # (m, n) int8, unique rows
    counts: np.ndarray  # (m,)
    energies: np.ndarray  # (m,)

    @classmethod
    def from_spins(cls, instance: IsingInstance, spins: np.ndarray) -> "SampleSet":
        uniq, counts = np.unique(np.asarray(spins, dtype=np.int8), axis=0, return_counts=True)
        return cls(uniq, counts.astype(np.int64), batch_energies(instance, uniq))

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def mean_energy(self) -> float:
        return float(np.dot(self.counts, self.energies) / self.shots)

    @property
    def energy_variance(self) -> float:
        mu = self.mean_energy
        return float(np.dot(self.counts, (self.energies - mu) ** 2) / self.shots)

    @property
    def min_energy(self) -> int:
        return int(self.energies.min())

    def histogram(self) -> dict[int, int]:
        """Energy -> number of shots, ascending energy."""
        hist: dict[int, int] = {}
        for e, c in zip(self.energies.tolist(), self.counts.tolist()):
            hist[e] = hist.get(e, 0) + c
        return dict(sorted(hist.items()))

    def mean_approximation_ratio(self, bounds: EnergyBounds) -> float:
        """Shot-weighted mean of the per-sample approximation ratios."""
        ratios = approximation_ratio(self.energies, bounds)
        return float(np.dot(self.counts, ratios) / self.shots)
