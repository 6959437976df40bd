"""Experiment orchestration: seeded ensembles, transfer runs, sampling, bond scans, landscapes.

Every command is a pure function of an :class:`ExperimentConfig`; instances
are regenerated from ``base_seed + index`` so reruns reproduce the same CSV
bodies byte for byte. Wall times only go to the summary JSON files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path

import numpy as np

from .angles import TRANSFER_ANGLES, QaoaAngles, load_angles
from .circuit import build_qaoa_circuit, circuit_depth_stats, export_circuit_text
from .model import (
    EnergyBounds,
    IsingInstance,
    approximation_ratio,
    generate_instance,
    instance_to_dict,
    load_coupling_map,
    load_instance,
)
from .mps import bond_dimension_error_scan, mps_expectation, mps_sample, run_qaoa_mps
from .optimize import canonicalize_angles, grid_search, save_landscape, train_ladder
from .solve import brute_force_extrema, export_quadratic_model, local_search_bound, reduce_order
from .statevector import build_cost_table, expectation, plus_state, run_qaoa, sample

WORKERS_ENV = "HHQAOA_WORKERS"
EXACT_BOUNDS_MAX_QUBITS = 28

# name -> (version, columns)
SCHEMAS: dict[str, tuple[int, list[str]]] = {
    "transfer": (1, ["instance", "seed", "p", "backend", "chi", "expectation", "min_energy",
                     "max_energy", "bounds_exact", "approx_ratio", "truncation_weight"]),
    "sample": (1, ["instance", "seed", "p", "energy", "count", "mean_energy", "min_sampled",
                   "ground_energy"]),
    "bond_scan": (1, ["instance", "seed", "p", "chi", "energy", "reference_energy", "delta_e",
                      "truncation_weight"]),
    "bond_envelope": (1, ["p", "chi", "mean_delta_e", "min_delta_e", "max_delta_e"]),
    "landscape": (1, ["beta", "gamma", "mean_energy"]),
}


@dataclass
class ExperimentConfig:
    map: str = "guadalupe-16"  # built-in name or coupling-map JSON path
    ensemble_size: int = 10
    base_seed: int = 0
    p_list: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    angle_source: str = "builtin"  # "builtin", an angles JSON path, or "train:<index>"
    backend: str = "statevector"  # or "mps"
    chi: int = 256
    chi_list: list[int] = field(default_factory=lambda: [16, 32, 64, 128])
    chi_ref: int = 512
    shots: int = 20000
    distribution_shots: int = 8192
    sample_seed: int = 0
    grid: list[int] = field(default_factory=lambda: [50, 50])
    train_iterations: int = 200
    bounds: str = "auto"  # auto, exact, heuristic or none
    heuristic_restarts: int = 100
    output_dir: str = "runs/default"

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be >= 1")
        if self.backend not in ("statevector", "mps"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.bounds not in ("auto", "exact", "heuristic", "none"):
            raise ValueError(f"unknown bounds mode {self.bounds!r}")
        if any(p < 0 for p in self.p_list):
            raise ValueError("p values must be >= 0")
        self.p_list = [int(p) for p in self.p_list]
        self.chi_list = [int(c) for c in self.chi_list]
        self.grid = [int(c) for c in self.grid]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(config: ExperimentConfig, path) -> None:
    _atomic_write(Path(path), json.dumps(config.to_dict(), indent=1, sort_keys=True) + "\n")


@dataclass
class RunRecord:
    instance: int
    seed: int
    p: int
    angles: QaoaAngles
    backend: str
    chi: int | None
    expectation: float
    bounds: EnergyBounds | None = None
    truncation_weight: float = 0.0
    sample_mean: float | None = None
    sample_min: int | None = None
    histogram: dict[int, int] | None = None
    wall_time: float = 0.0

    @property
    def approx_ratio(self) -> float | None:
        if self.bounds is None or not self.bounds.exact:
            return None
        return float(approximation_ratio(self.expectation, self.bounds))

    def to_dict(self) -> dict:
        out = {
            "instance": self.instance, "seed": self.seed, "p": self.p,
            "angles": self.angles.to_dict(), "backend": self.backend, "chi": self.chi,
            "expectation": self.expectation, "truncation_weight": self.truncation_weight,
            "approx_ratio": self.approx_ratio, "wall_time": self.wall_time,
        }
        if self.bounds is not None:
            out["bounds"] = {"min": self.bounds.min_energy, "max": self.bounds.max_energy,
                             "exact": self.bounds.exact}
        if self.histogram is not None:
            out.update(sample_mean=self.sample_mean, sample_min=self.sample_min,
                       histogram={str(k): v for k, v in sorted(self.histogram.items())})
        return out


# --- output helpers ---------------------------------------------------------------

def schema_hash(name: str) -> str:
    version, cols = SCHEMAS[name]
    return hashlib.sha256(f"{name}:v{version}:{','.join(cols)}".encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, schema: str, rows: list[dict]) -> Path:
    """CSV with a ``# schema=... version=... hash=...`` header line."""
    version, cols = SCHEMAS[schema]
    lines = [f"# schema={schema} version={version} hash={schema_hash(schema)}", ",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in cols))
    path = Path(path)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[dict, list[dict]]:
    """Parse a file from :func:`write_csv`; values come back as strings."""
    lines = Path(path).read_text().splitlines()
    meta = dict(item.split("=", 1) for item in lines[0][2:].split())
    cols = lines[1].split(",")
    return meta, [dict(zip(cols, line.split(","))) for line in lines[2:]]


def _write_json(path, payload) -> Path:
    path = Path(path)
    _atomic_write(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return path


def _file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items: list) -> list:
    """Ordered map; a process pool when the worker env var asks for more than one."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- shared pieces ----------------------------------------------------------------

def ensemble(config: ExperimentConfig) -> list[tuple[int, int, IsingInstance]]:
    graph = load_coupling_map(config.map)
    out = []
    for i in range(config.ensemble_size):
        seed = config.base_seed + i
        out.append((i, seed, generate_instance(graph, seed)))
    return out


def pick_instance(config: ExperimentConfig, index: int = 0, path=None) -> tuple[int, int, IsingInstance]:
    if path is not None:
        inst = load_instance(path)
        return index, inst.seed if inst.seed is not None else -1, inst
    if not 0 <= index < config.ensemble_size:
        raise ValueError(f"instance index {index} outside ensemble of {config.ensemble_size}")
    seed = config.base_seed + index
    return index, seed, generate_instance(load_coupling_map(config.map), seed)


def resolve_angles(config: ExperimentConfig) -> dict[int, QaoaAngles]:
    src = config.angle_source
    if src == "builtin":
        table = dict(TRANSFER_ANGLES)
    elif src.startswith("train:"):
        _, _, inst = pick_instance(config, int(src.split(":", 1)[1]))
        ladder = train_ladder(inst, max(config.p_list), config.train_iterations, seed=config.base_seed)
        table = {k + 1: r.angles for k, r in enumerate(ladder)}
    else:
        table = load_angles(src)
    table[0] = QaoaAngles((), ())
    missing = [p for p in config.p_list if p not in table]
    if missing:
        raise ValueError(f"angle source {src!r} has no angles for p = {missing}")
    return table


def compute_bounds(config: ExperimentConfig, instance: IsingInstance) -> EnergyBounds | None:
    mode = config.bounds
    if mode == "none":
        return None
    if mode == "exact" or (mode == "auto" and instance.n <= EXACT_BOUNDS_MAX_QUBITS):
        return brute_force_extrema(instance)
    return local_search_bound(instance, config.heuristic_restarts, seed=instance.seed or 0)


def simulate_state(config: ExperimentConfig, instance: IsingInstance, angles: QaoaAngles, table=None):
    """(expectation, truncation weight, state) on the configured backend."""
    if config.backend == "statevector":
        if table is None:
            table = build_cost_table(instance)
        state = run_qaoa(instance, angles, table) if angles.p else plus_state(instance.n)
        return expectation(state, table), 0.0, state
    if angles.p == 0:
        return 0.0, 0.0, None
    mps = run_qaoa_mps(instance, angles, config.chi)
    return mps_expectation(mps, instance), mps.truncation_weight, mps


def _draw(config, instance, state, shots, seed):
    if config.backend == "statevector":
        return sample(state, shots, seed, instance)
    if state is None:  # p = 0 on the MPS backend: uniform bitstrings
        rng = np.random.default_rng(seed)
        from .samples import SampleSet

        return SampleSet.from_spins(instance, rng.choice(np.array([-1, 1], dtype=np.int8), (shots, instance.n)))
    return mps_sample(state, shots, seed, instance)


# --- commands ---------------------------------------------------------------------

def cmd_generate_ensemble(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir) / "instances"
    files = {}
    for i, seed, inst in ensemble(config):
        path = out / f"instance_{i:04d}.json"
        _atomic_write(path, json.dumps(instance_to_dict(inst), sort_keys=True) + "\n")
        files[path.name] = _file_hash(path)
    manifest = {"config": config.to_dict(), "config_hash": config.digest(), "files": files,
                "ensemble_hash": hashlib.sha256("".join(files[k] for k in sorted(files)).encode()).hexdigest()}
    return _write_json(Path(config.output_dir) / "manifest.json", manifest)


def _transfer_one(config: ExperimentConfig, angles: dict, item) -> list[RunRecord]:
    i, seed, inst = item
    bounds = compute_bounds(config, inst)
    table = build_cost_table(inst) if config.backend == "statevector" else None
    records = []
    for p in config.p_list:
        t0 = time.perf_counter()
        e, w, _ = simulate_state(config, inst, angles[p], table)
        chi = config.chi if config.backend == "mps" else None
        records.append(RunRecord(i, seed, p, angles[p], config.backend, chi, e, bounds, w,
                                 wall_time=time.perf_counter() - t0))
    return records


def cmd_transfer_experiment(config: ExperimentConfig) -> tuple[Path, dict]:
    angles = resolve_angles(config)
    per_instance = _parallel_map(partial(_transfer_one, config, angles), ensemble(config))
    rows = []
    monotone, best_p, violations = {}, {}, []
    for recs in per_instance:
        for r in recs:
            b = r.bounds
            rows.append({"instance": r.instance, "seed": r.seed, "p": r.p, "backend": r.backend,
                         "chi": r.chi, "expectation": r.expectation,
                         "min_energy": b.min_energy if b else None, "max_energy": b.max_energy if b else None,
                         "bounds_exact": b.exact if b else None, "approx_ratio": r.approx_ratio,
                         "truncation_weight": r.truncation_weight})
        ordered = sorted(recs, key=lambda r: r.p)
        ok = all(b.expectation < a.expectation for a, b in zip(ordered, ordered[1:]))
        inst_id = recs[0].instance
        monotone[inst_id] = ok
        if not ok:
            violations.append(inst_id)
        best_p[inst_id] = min(recs, key=lambda r: r.expectation).p
    out = Path(config.output_dir)
    csv_path = write_csv(out / "transfer.csv", "transfer", rows)
    means = {p: float(np.mean([r.expectation for recs in per_instance for r in recs if r.p == p]))
             for p in config.p_list}
    summary = {
        "config_hash": config.digest(),
        "schema_hash": schema_hash("transfer"),
        "mean_expectation": {str(p): m for p, m in means.items()},
        "strictly_decreasing": {str(k): v for k, v in monotone.items()},
        "violations": violations,
        "all_strictly_decreasing": not violations,
        "best_p": {str(k): v for k, v in best_p.items()},
        "wall_time": {str(recs[0].instance): sum(r.wall_time for r in recs) for recs in per_instance},
    }
    _write_json(out / "transfer_summary.json", summary)
    return csv_path, summary


def cmd_sample_distribution(config: ExperimentConfig, index: int = 0, instance_path=None,
                            shots: int | None = None) -> Path:
    i, seed, inst = pick_instance(config, index, instance_path)
    shots = config.distribution_shots if shots is None else shots
    angles = resolve_angles(config)
    bounds = compute_bounds(config, inst)
    table = build_cost_table(inst) if config.backend == "statevector" else None
    rows = []
    for p in config.p_list:
        _, _, state = simulate_state(config, inst, angles[p], table)
        samples = _draw(config, inst, state, shots, config.sample_seed + p)
        for energy, count in sorted(samples.histogram().items()):
            rows.append({"instance": i, "seed": seed, "p": p, "energy": energy, "count": count,
                         "mean_energy": samples.mean_energy, "min_sampled": samples.min_energy,
                         "ground_energy": bounds.min_energy if bounds else None})
    return write_csv(Path(config.output_dir) / f"samples_{i:04d}.csv", "sample", rows)


def _scan_one(config: ExperimentConfig, angles: dict, item) -> list[dict]:
    i, seed, inst = item
    rows = []
    for p in config.p_list:
        for r in bond_dimension_error_scan(inst, angles[p], config.chi_list, config.chi_ref):
            rows.append({"instance": i, "seed": seed, "p": p, **r})
    return rows


def cmd_bond_scan(config: ExperimentConfig) -> tuple[Path, Path]:
    angles = resolve_angles(config)
    if 0 in config.p_list:
        raise ValueError("bond scans need p >= 1")
    rows = [r for chunk in _parallel_map(partial(_scan_one, config, angles), ensemble(config)) for r in chunk]
    out = Path(config.output_dir)
    scan = write_csv(out / "bond_scan.csv", "bond_scan", rows)
    env = []
    for p in config.p_list:
        for chi in config.chi_list:
            d = np.array([r["delta_e"] for r in rows if r["p"] == p and r["chi"] == chi])
            env.append({"p": p, "chi": chi, "mean_delta_e": float(d.mean()),
                        "min_delta_e": float(d.min()), "max_delta_e": float(d.max())})
    return scan, write_csv(out / "bond_envelope.csv", "bond_envelope", env)


def cmd_landscape(config: ExperimentConfig, index: int = 0, instance_path=None, max_points: int = 10**6) -> Path:
    i, seed, inst = pick_instance(config, index, instance_path)
    nb, ng = config.grid
    if nb * ng > max_points:
        raise ValueError(f"grid of {nb * ng} points exceeds the budget of {max_points}")
    land = grid_search(inst, counts=(nb, ng))
    out = Path(config.output_dir)
    path = out / f"landscape_{i:04d}.csv"
    save_landscape(land, path, (f"schema=landscape version={SCHEMAS['landscape'][0]} hash={schema_hash('landscape')}",))
    b, g, e = land.best_point
    canon = canonicalize_angles(QaoaAngles((b,), (g,)), inst)
    _write_json(out / f"landscape_{i:04d}_best.json",
                {"instance": i, "seed": seed, "beta": b, "gamma": g, "mean_energy": e,
                 "canonical": canon.to_dict()})
    return path


def cmd_simulate(config: ExperimentConfig, index: int = 0, p: int = 1, instance_path=None,
                 shots: int = 0, export_qasm=None) -> RunRecord:
    i, seed, inst = pick_instance(config, index, instance_path)
    angles = resolve_angles(config)[p]
    t0 = time.perf_counter()
    e, w, state = simulate_state(config, inst, angles)
    rec = RunRecord(i, seed, p, angles, config.backend, config.chi if config.backend == "mps" else None,
                    e, compute_bounds(config, inst), w)
    if shots:
        s = _draw(config, inst, state, shots, config.sample_seed + p)
        rec.sample_mean, rec.sample_min, rec.histogram = s.mean_energy, s.min_energy, s.histogram()
    rec.wall_time = time.perf_counter() - t0
    if export_qasm is not None and p >= 1:
        export_circuit_text(build_qaoa_circuit(inst, angles), export_qasm)
    _write_json(Path(config.output_dir) / f"simulate_{i:04d}_p{p}.json", rec.to_dict())
    return rec


def cmd_solve(config: ExperimentConfig, mode: str = "exact", instance_path=None) -> Path:
    items = [pick_instance(config, 0, instance_path)] if instance_path else ensemble(config)
    out = {}
    for i, seed, inst in items:
        b = brute_force_extrema(inst) if mode == "exact" else local_search_bound(
            inst, config.heuristic_restarts, seed=seed)
        out[str(i)] = {"seed": seed, "min": b.min_energy, "max": b.max_energy, "exact": b.exact,
                       "argmin": list(b.argmin)}
    return _write_json(Path(config.output_dir) / f"bounds_{mode}.json", out)


def cmd_export_qasm(config: ExperimentConfig, index: int, p: int, path, instance_path=None) -> dict:
    _, _, inst = pick_instance(config, index, instance_path)
    circuit = build_qaoa_circuit(inst, resolve_angles(config)[p])
    export_circuit_text(circuit, path)
    return circuit_depth_stats(circuit)._asdict()


def cmd_reduce_export(config: ExperimentConfig, index: int, path, penalty="auto", instance_path=None) -> dict:
    _, _, inst = pick_instance(config, index, instance_path)
    model = reduce_order(inst, penalty)
    export_quadratic_model(model, path)
    return {"variables": len(model.variables), "penalty": model.penalty}
