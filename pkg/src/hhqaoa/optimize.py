"""Angle search: landscapes, parameter fixing, basin hopping, canonical forms.

For fixed earlier angles and fixed ``gamma_p``, the expectation as a function
of the last mixer angle is a trigonometric polynomial of degree at most 3 in
``2 beta_p`` (each term touches at most three qubits and the mixer conjugates
every ``Z`` into ``cos 2b Z + sin 2b Y``). Seven exact evaluations therefore
give a whole beta axis, which makes dense grids cheap.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .angles import QaoaAngles
from .model import IsingInstance, cost_parity
from .statevector import (
    CostTable,
    StateVector,
    apply_mixer_layer,
    apply_phase_layer,
    build_cost_table,
    expectation,
    plus_state,
    run_qaoa,
)

TWO_PI = 2 * math.pi
Evaluator = Callable[[QaoaAngles], float]


# --- symmetries -------------------------------------------------------------------

def _reduce(x: np.ndarray, period: float) -> np.ndarray:
    out = np.mod(x, period)
    out[out >= period] = 0.0  # np.mod can round up to the period itself
    return out


def canonicalize_angles(angles: QaoaAngles, parity: int | IsingInstance) -> QaoaAngles:
    """Representative of ``angles`` under the symmetries of an integer-valued cost.

    All cost values share the parity ``parity``, so shifting any ``gamma_i``
    by pi multiplies the state by the global phase ``(-1)**parity``. Beta is
    2 pi periodic, and since the initial state and both Hamiltonians are real,
    ``(beta, gamma) -> (-beta, -gamma)`` conjugates the state. The
    representative has ``gamma_i in [0, pi)``, ``beta_i in [0, 2 pi)`` and its
    first nonzero beta in ``(0, pi]``.
    """
    if isinstance(parity, IsingInstance):
        for _, c in parity.terms():
            if c not in (-1, 1):
                raise ValueError("canonical forms assume +-1 coefficients")
        parity = cost_parity(parity)
    if parity not in (0, 1):
        raise ValueError(f"parity must be 0 or 1, got {parity}")
    if angles.p == 0:
        return angles

    def rep(beta, gamma):
        return _reduce(np.asarray(beta, float), TWO_PI), _reduce(np.asarray(gamma, float), math.pi)

    b, g = rep(angles.beta, angles.gamma)
    nz = np.flatnonzero(b)
    if nz.size and b[nz[0]] > math.pi:
        b, g = rep(-np.asarray(angles.beta), -np.asarray(angles.gamma))
    elif not nz.size:
        # betas all zero: the state is a phase-only product, pick the smaller gamma vector
        g_alt = _reduce(-np.asarray(angles.gamma, float), math.pi)
        if tuple(g_alt) < tuple(g):
            g = g_alt
    return QaoaAngles(tuple(float(x) for x in b), tuple(float(x) for x in g))


# --- evaluators -------------------------------------------------------------------

class ExpectationEvaluator:
    """Exact expectation via the statevector (cost table built once) or an MPS."""

    def __init__(self, instance: IsingInstance, backend: str = "statevector", chi: int = 256):
        if backend not in ("statevector", "mps"):
            raise ValueError(f"unknown backend {backend!r}")
        self.instance = instance
        self.backend = backend
        self.chi = chi
        self.table = build_cost_table(instance) if backend == "statevector" else None
        self.calls = 0

    def __call__(self, angles: QaoaAngles) -> float:
        self.calls += 1
        if self.backend == "statevector":
            return expectation(run_qaoa(self.instance, angles, self.table), self.table)
        from .mps import mps_expectation, run_qaoa_mps

        return mps_expectation(run_qaoa_mps(self.instance, angles, self.chi), self.instance)


def shot_evaluator(instance: IsingInstance, shots: int, seed: int) -> Evaluator:
    """Sample-mean energy from ``shots`` statevector samples (fixed seed per call)."""
    from .statevector import sample

    table = build_cost_table(instance)

    def evaluate(angles: QaoaAngles) -> float:
        return sample(run_qaoa(instance, angles, table), shots, seed, instance).mean_energy

    return evaluate


# --- landscapes -------------------------------------------------------------------

@dataclass(frozen=True)
class Landscape:
    beta_axis: np.ndarray
    gamma_axis: np.ndarray
    mean_energy: np.ndarray  # [len(beta_axis), len(gamma_axis)]
    best_point: tuple[float, float, float]  # (beta, gamma, energy)

    @classmethod
    def from_matrix(cls, betas, gammas, energies) -> "Landscape":
        energies = np.asarray(energies, dtype=float)
        i, j = np.unravel_index(int(np.argmin(energies)), energies.shape)
        return cls(np.asarray(betas, float), np.asarray(gammas, float), energies,
                   (float(betas[i]), float(gammas[j]), float(energies[i, j])))

    def to_csv(self, path, header_lines: tuple[str, ...] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["beta", "gamma", "mean_energy"])
            for i, b in enumerate(self.beta_axis):
                for j, g in enumerate(self.gamma_axis):
                    w.writerow([repr(float(b)), repr(float(g)), repr(float(self.mean_energy[i, j]))])


def grid_axis(lo: float, hi: float, count: int) -> np.ndarray:
    """``count`` evenly spaced points in ``[lo, hi)``; includes ``lo``."""
    if count < 1:
        raise ValueError("grid axes need at least one point")
    return lo + (hi - lo) * np.arange(count) / count


_FOURIER_NODES = np.pi * np.arange(7) / 7  # beta samples, 2*beta covers one period


def _beta_curve(samples: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Interpolate a degree-3 trigonometric polynomial in 2*beta from 7 equispaced samples."""
    c = np.fft.rfft(samples) / 7  # Fourier coefficients c_0..c_3
    t = 2 * np.outer(betas, np.arange(1, 4))
    return c[0].real + 2 * (np.cos(t) @ c[1:].real - np.sin(t) @ c[1:].imag)


def last_round_landscape(
    prefix: StateVector, table: CostTable, betas: np.ndarray, gammas: np.ndarray
) -> np.ndarray:
    """Expectation after one more round from ``prefix`` for every (beta, gamma) pair."""
    out = np.empty((len(betas), len(gammas)))
    c = np.cos(_FOURIER_NODES)
    s = np.sin(_FOURIER_NODES)
    for j, gamma in enumerate(gammas):
        phased = StateVector(prefix.n, prefix.amplitudes.copy())
        apply_phase_layer(phased, table, gamma)
        batch = np.repeat(phased.amplitudes[None, :], 7, axis=0)
        _kernels.apply_rx_all_batch(batch, prefix.n, c, s)
        samples = np.array([_kernels.weighted_sum(batch[r], table.costs) for r in range(7)])
        out[:, j] = _beta_curve(samples, betas)
    return out


def grid_search(
    instance: IsingInstance,
    beta_range: tuple[float, float] = (0.0, math.pi / 2),
    gamma_range: tuple[float, float] = (0.0, math.pi),
    counts: tuple[int, int] = (50, 50),
    evaluator: Evaluator | None = None,
) -> Landscape:
    """p = 1 landscape on a regular grid (left endpoints included, right excluded)."""
    betas = grid_axis(*beta_range, counts[0])
    gammas = grid_axis(*gamma_range, counts[1])
    if evaluator is None:
        table = build_cost_table(instance)
        energies = last_round_landscape(plus_state(instance.n), table, betas, gammas)
    else:
        energies = np.array([[evaluator(QaoaAngles((b,), (g,))) for g in gammas] for b in betas])
    return Landscape.from_matrix(betas, gammas, energies)


@dataclass(frozen=True)
class FixingStep:
    angles: QaoaAngles
    energy: float
    landscape: Landscape


def parameter_fixing_search(
    instance: IsingInstance,
    p_max: int,
    counts: tuple[int, int] = (200, 200),
    first_beta_range: tuple[float, float] = (0.0, math.pi / 2),
    beta_range: tuple[float, float] = (0.0, math.pi),
    gamma_range: tuple[float, float] = (0.0, math.pi),
) -> list[FixingStep]:
    """Round-by-round 2D grid search with all earlier angles frozen.

    Every grid contains (0, 0), which reproduces the previous state, so the
    expectation never increases from one round to the next.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    table = build_cost_table(instance)
    state = plus_state(instance.n)
    prev = expectation(state, table)
    beta: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    steps = []
    for k in range(1, p_max + 1):
        betas = grid_axis(*(first_beta_range if k == 1 else beta_range), counts[0])
        gammas = grid_axis(*gamma_range, counts[1])
        land = Landscape.from_matrix(betas, gammas, last_round_landscape(state, table, betas, gammas))
        b, g, _ = land.best_point
        trial = StateVector(state.n, state.amplitudes.copy())
        apply_phase_layer(trial, table, g)
        apply_mixer_layer(trial, b)
        e = expectation(trial, table)
        if e > prev:  # interpolation noise picked a non-improving cell; (0, 0) is exact
            b, g = 0.0, 0.0
            trial = StateVector(state.n, state.amplitudes.copy())
            apply_phase_layer(trial, table, 0.0)
            apply_mixer_layer(trial, 0.0)
            e = expectation(trial, table)
        state, prev = trial, e
        beta, gamma = beta + (b,), gamma + (g,)
        steps.append(FixingStep(QaoaAngles(beta, gamma), e, land))
    return steps


# --- basin hopping ----------------------------------------------------------------

@dataclass(frozen=True)
class OptimizationResult:
    angles: QaoaAngles
    energy: float
    evaluations: int


def basin_hopping(
    instance: IsingInstance,
    p: int,
    iterations: int = 200,
    init: QaoaAngles | None = None,
    seed: int = 0,
    evaluator: Evaluator | None = None,
    step: float = 0.3,
    restrict_last_beta: bool = False,
    accept_tol: float = 1e-10,
) -> OptimizationResult:
    """Perturb the incumbent, polish with Nelder-Mead, keep the result if it is better.

    The first hop polishes ``init`` itself. Perturbations are uniform in
    ``[-step, step]`` per coordinate. Angles live in ``[0, 2 pi)``; with
    ``restrict_last_beta`` the final mixer angle is confined to ``[0, pi/2)``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if evaluator is None:
        evaluator = ExpectationEvaluator(instance)
    rng = np.random.default_rng(seed)
    if init is None:
        init = QaoaAngles.from_vector(rng.uniform(0, TWO_PI, 2 * p))
    if init.p != p:
        raise ValueError(f"initial angles have p={init.p}, expected {p}")
    count = 0

    def wrap(x):
        return _reduce(np.asarray(x, float), TWO_PI)

    def f(x):
        nonlocal count
        count += 1
        x = wrap(x)
        if restrict_last_beta and x[p - 1] >= math.pi / 2:
            return math.inf
        return evaluator(QaoaAngles.from_vector(x))

    best_x = np.asarray(init.to_vector(), float)
    best_e = f(best_x)
    for hop in range(iterations):
        start = best_x if hop == 0 else best_x + rng.uniform(-step, step, best_x.shape)
        res = minimize(f, start, method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-8 * max(1.0, abs(best_e)), "maxfev": 500})
        if res.fun < best_e - accept_tol:
            best_x, best_e = wrap(res.x), float(res.fun)
    angles = QaoaAngles.from_vector(best_x)
    if not restrict_last_beta:
        angles = canonicalize_angles(angles, instance)
    return OptimizationResult(angles, float(best_e), count)


def extrapolate_angles(angles: QaoaAngles, fallback: bool = False) -> QaoaAngles:
    """Initializer for p + 1: keep every angle and repeat the last pair (or append (0, 0))."""
    if angles.p == 0 or fallback:
        nb, ng = 0.0, 0.0
    else:
        nb, ng = angles.beta[-1], angles.gamma[-1]
    return QaoaAngles(tuple(angles.beta) + (nb,), tuple(angles.gamma) + (ng,))


def train_ladder(
    instance: IsingInstance,
    p_max: int,
    iterations: int = 200,
    init: QaoaAngles | None = None,
    seed: int = 0,
    evaluator: Evaluator | None = None,
) -> list[OptimizationResult]:
    """Basin hopping for p = 1..p_max, each round started from the extrapolated optimum.

    Both the repeated-last-pair start and the (0, 0) start are tried; the
    better result is kept.
    """
    if evaluator is None:
        evaluator = ExpectationEvaluator(instance)
    results = [basin_hopping(instance, 1, iterations, init, seed, evaluator)]
    for p in range(2, p_max + 1):
        prev = results[-1].angles
        runs = [
            basin_hopping(instance, p, iterations, extrapolate_angles(prev, fb), seed + p, evaluator)
            for fb in (False, True)
        ]
        results.append(min(runs, key=lambda r: r.energy))
    return results


def save_landscape(landscape: Landscape, path, header_lines: tuple[str, ...] = ()) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    landscape.to_csv(path, header_lines)
