"""Command line entry point: ``python -m hhqaoa <command> ...``.

Exit codes: 0 success, 2 problem too large for the backend, 3 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .statevector import CapacityError

EXIT_OK, EXIT_CAPACITY, EXIT_INVALID = 0, 2, 3


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags below override it")
    sub.add_argument("--map", dest="map")
    sub.add_argument("--size", dest="ensemble_size", type=int)
    sub.add_argument("--seed", dest="base_seed", type=int)
    sub.add_argument("--p", dest="p_list", type=_ints, help="comma list, e.g. 1,2,3")
    sub.add_argument("--angles", dest="angle_source", help="builtin, a JSON file or train:<index>")
    sub.add_argument("--backend", choices=["statevector", "mps"])
    sub.add_argument("--chi", type=int)
    sub.add_argument("--chi-list", dest="chi_list", type=_ints)
    sub.add_argument("--chi-ref", dest="chi_ref", type=int)
    sub.add_argument("--shots", type=int)
    sub.add_argument("--sample-seed", dest="sample_seed", type=int)
    sub.add_argument("--grid", type=_ints, help="beta,gamma point counts")
    sub.add_argument("--bounds", choices=["auto", "exact", "heuristic", "none"])
    sub.add_argument("--out", dest="output_dir")


_CONFIG_KEYS = ["map", "ensemble_size", "base_seed", "p_list", "angle_source", "backend", "chi",
                "chi_list", "chi_ref", "sample_seed", "grid", "bounds", "output_dir"]


def build_config(args) -> harness.ExperimentConfig:
    data = harness.load_config(args.config).to_dict() if args.config else {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "shots", None) is not None:
        data["shots"] = args.shots
        data["distribution_shots"] = args.shots
    return harness.ExperimentConfig.from_dict(data)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hhqaoa", description="QAOA experiments on heavy-hex Ising models")
    subs = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sub = subs.add_parser(name, help=help_text)
        _common(sub)
        return sub

    add("generate", "write a seeded instance ensemble and manifest")
    s = add("solve", "exact or heuristic energy bounds")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--heuristic", dest="mode", action="store_const", const="heuristic")
    s.add_argument("--instance", help="instance JSON instead of the generated ensemble")

    for name, help_text in [("simulate", "one instance at one p"), ("sample", "energy histograms per p"),
                            ("landscape", "p = 1 angle grid"), ("export-qasm", "write the circuit"),
                            ("reduce-export", "write the reduced quadratic model")]:
        s = add(name, help_text)
        s.add_argument("--index", type=int, default=0, help="ensemble index")
        s.add_argument("--instance", help="instance JSON instead of the generated ensemble")
        if name in ("simulate", "export-qasm"):
            s.add_argument("--round", dest="rounds", type=int, default=1, help="QAOA rounds p")
        if name == "simulate":
            s.add_argument("--export-qasm", dest="export_qasm")
        if name in ("export-qasm", "reduce-export"):
            s.add_argument("--path", required=True)
        if name == "reduce-export":
            s.add_argument("--penalty", default="auto")
    add("transfer", "fixed-angle expectations over an ensemble")
    add("bond-scan", "MPS energy error against a reference bond dimension")
    return parser


def run(args) -> dict:
    config = build_config(args)
    cmd = args.command
    if cmd == "generate":
        return {"manifest": str(harness.cmd_generate_ensemble(config))}
    if cmd == "solve":
        return {"bounds": str(harness.cmd_solve(config, args.mode or "exact", args.instance))}
    if cmd == "transfer":
        path, summary = harness.cmd_transfer_experiment(config)
        return {"csv": str(path), "all_strictly_decreasing": summary["all_strictly_decreasing"],
                "mean_expectation": summary["mean_expectation"]}
    if cmd == "bond-scan":
        scan, env = harness.cmd_bond_scan(config)
        return {"csv": str(scan), "envelope": str(env)}
    if cmd == "sample":
        return {"csv": str(harness.cmd_sample_distribution(config, args.index, args.instance))}
    if cmd == "landscape":
        return {"csv": str(harness.cmd_landscape(config, args.index, args.instance))}
    if cmd == "simulate":
        rec = harness.cmd_simulate(config, args.index, args.rounds, args.instance,
                                   shots=args.shots or 0, export_qasm=args.export_qasm)
        return rec.to_dict()
    if cmd == "export-qasm":
        return harness.cmd_export_qasm(config, args.index, args.rounds, args.path, args.instance)
    if cmd == "reduce-export":
        return harness.cmd_reduce_export(config, args.index, args.path, args.penalty, args.instance)
    raise AssertionError(cmd)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        result = run(args)
    except (CapacityError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(result, indent=1, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
