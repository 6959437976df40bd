"""QAOA angle vectors and the fixed transfer angles for p = 1..5."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class QaoaAngles:
    beta: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        gamma = tuple(float(g) for g in self.gamma)
        if len(beta) != len(gamma):
            raise ValueError(f"beta has {len(beta)} entries but gamma has {len(gamma)}")
        if not all(np.isfinite(beta + gamma)):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def p(self) -> int:
        return len(self.beta)

    @classmethod
    def from_vector(cls, x) -> "QaoaAngles":
        """Inverse of :meth:`to_vector`: ``[beta_1..beta_p, gamma_1..gamma_p]``."""
        x = np.asarray(x, dtype=float)
        p = len(x) // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def to_vector(self) -> np.ndarray:
        return np.array(self.beta + self.gamma)

    def to_dict(self) -> dict:
        return {"p": self.p, "beta": list(self.beta), "gamma": list(self.gamma)}

    @classmethod
    def from_dict(cls, data) -> "QaoaAngles":
        angles = cls(tuple(data["beta"]), tuple(data["gamma"]))
        if "p" in data and int(data["p"]) != angles.p:
            raise ValueError(f"declared p={data['p']} but vectors have length {angles.p}")
        return angles


def save_angles(angles: QaoaAngles | list[QaoaAngles], path) -> None:
    if isinstance(angles, QaoaAngles):
        payload = angles.to_dict()
    else:
        payload = [a.to_dict() for a in angles]
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_angles(path) -> dict[int, QaoaAngles]:
    """Read one angle record or a list of them, keyed by p."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    out = {}
    for rec in data:
        a = QaoaAngles.from_dict(rec)
        out[a.p] = a
    return out


# Trained on a single 16-qubit guadalupe instance with cubic terms.
TRANSFER_ANGLES: dict[int, QaoaAngles] = {
    1: QaoaAngles((0.38919,), (6.04302,)),
    2: QaoaAngles((0.48912, 0.27367), (6.09758, 5.95396)),
    3: QaoaAngles((0.50502, 0.35713, 0.19264), (6.14054, 6.01729, 5.94123)),
    4: QaoaAngles((0.54321, 0.41806, 0.28615, 0.16041), (6.16242, 6.05959, 5.98417, 5.9299)),
    5: QaoaAngles(
        (0.53822, 0.44776, 0.32923, 0.23056, 0.12587),
        (6.16555, 6.08373, 6.01445, 5.9616, 5.93736),
    ),
}
