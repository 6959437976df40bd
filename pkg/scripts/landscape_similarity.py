"""p = 1 landscapes of several instances on one map and their pairwise correlation."""

import argparse
import itertools

import numpy as np

from hhqaoa.model import generate_instance, load_coupling_map
from hhqaoa.optimize import canonicalize_angles, grid_search, save_landscape
from hhqaoa.angles import QaoaAngles

parser = argparse.ArgumentParser()
parser.add_argument("--map", default="guadalupe-16")
parser.add_argument("--instances", type=int, default=4)
parser.add_argument("--grid", type=int, nargs=2, default=[60, 120])
parser.add_argument("--out", default="runs/landscapes")
args = parser.parse_args()

graph = load_coupling_map(args.map)
lands = []
for seed in range(args.instances):
    inst = generate_instance(graph, seed)
    land = grid_search(inst, counts=tuple(args.grid))
    save_landscape(land, f"{args.out}/landscape_{seed:04d}.csv")
    b, g, e = land.best_point
    c = canonicalize_angles(QaoaAngles((b,), (g,)), inst)
    print(f"seed {seed}: best beta={c.beta[0]:.3f} gamma={c.gamma[0]:.3f} energy={e:.4f}")
    lands.append(land.mean_energy.ravel())
for i, j in itertools.combinations(range(len(lands)), 2):
    print(f"pearson({i},{j}) = {np.corrcoef(lands[i], lands[j])[0, 1]:.4f}")
