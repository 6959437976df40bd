"""Basin-hopping training ladder p = 1..p_max on one instance; writes an angles JSON file."""

import argparse

from hhqaoa.angles import TRANSFER_ANGLES, save_angles
from hhqaoa.model import generate_instance, load_coupling_map
from hhqaoa.optimize import train_ladder

parser = argparse.ArgumentParser()
parser.add_argument("--map", default="guadalupe-16")
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--p-max", type=int, default=5)
parser.add_argument("--iterations", type=int, default=200)
parser.add_argument("--warm-start", action="store_true", help="start p=1 from the built-in angles")
parser.add_argument("--out", default="runs/trained_angles.json")
args = parser.parse_args()

inst = generate_instance(load_coupling_map(args.map), args.seed)
init = TRANSFER_ANGLES[1] if args.warm_start else None
ladder = train_ladder(inst, args.p_max, args.iterations, init=init, seed=args.seed)
for r in ladder:
    print(f"p={r.angles.p} E={r.energy:.6f} evals={r.evaluations}")
save_angles([r.angles for r in ladder], args.out)
