"""Energy error of truncated MPS runs against a large reference bond dimension."""

import argparse

from hhqaoa.harness import ExperimentConfig, cmd_bond_scan, read_csv

parser = argparse.ArgumentParser()
parser.add_argument("--map", default="falcon-27")
parser.add_argument("--size", type=int, default=20)
parser.add_argument("--p", type=int, nargs="+", default=[1, 2, 3, 4, 5])
parser.add_argument("--chi", type=int, nargs="+", default=[16, 32, 64, 128])
parser.add_argument("--chi-ref", type=int, default=512)
parser.add_argument("--out", default="runs/bond_scan")
args = parser.parse_args()

cfg = ExperimentConfig(map=args.map, ensemble_size=args.size, p_list=args.p, backend="mps",
                       chi_list=args.chi, chi_ref=args.chi_ref, output_dir=args.out)
_, env = cmd_bond_scan(cfg)
for row in read_csv(env)[1]:
    print(f"p={row['p']} chi={row['chi']:>4}  mean dE {float(row['mean_delta_e']):.3e}"
          f"  [{float(row['min_delta_e']):.1e}, {float(row['max_delta_e']):.1e}]")
