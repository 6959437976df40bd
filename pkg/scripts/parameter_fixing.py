"""Round-by-round grid search with earlier angles frozen."""

import argparse

from hhqaoa.model import generate_instance, load_coupling_map
from hhqaoa.optimize import parameter_fixing_search

parser = argparse.ArgumentParser()
parser.add_argument("--map", default="guadalupe-16")
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--p-max", type=int, default=4)
parser.add_argument("--grid", type=int, nargs=2, default=[200, 200])
args = parser.parse_args()

inst = generate_instance(load_coupling_map(args.map), args.seed)
prev = None
for step in parameter_fixing_search(inst, args.p_max, tuple(args.grid)):
    gain = "" if prev is None else f"  gain {prev - step.energy:.4f}"
    print(f"p={step.angles.p} beta={step.angles.beta[-1]:.3f} gamma={step.angles.gamma[-1]:.3f} "
          f"E={step.energy:.5f}{gain}")
    prev = step.energy
