"""Fixed-angle expectations p = 1..5 over a random ensemble, with per-instance monotonicity."""

import argparse
import json

from hhqaoa.harness import ExperimentConfig, cmd_transfer_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--map", default="guadalupe-16")
parser.add_argument("--size", type=int, default=100)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--backend", default="statevector", choices=["statevector", "mps"])
parser.add_argument("--chi", type=int, default=256)
parser.add_argument("--out", default="runs/transfer")
args = parser.parse_args()

cfg = ExperimentConfig(map=args.map, ensemble_size=args.size, base_seed=args.seed, backend=args.backend,
                       chi=args.chi, output_dir=args.out)
path, summary = cmd_transfer_experiment(cfg)
print(path)
print(json.dumps({k: summary[k] for k in ("mean_expectation", "violations")}, indent=1))
