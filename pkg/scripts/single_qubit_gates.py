"""Single-qubit gates under decoherence: state fidelities and 1001-state averages."""

import argparse
import math

from holosim.cli import build_params, run

GATES = {"not": {"gamma": math.pi}, "e": {"gamma": math.pi / 2}}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/single_qubit")
    ap.add_argument("--mode", default="ideal", choices=("ideal", "faithful"))
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()
    for name, gate in GATES.items():
        over = {**gate, "mode": args.mode, "levels": args.levels}
        single = run("single-gate", build_params("single-gate", over), out=f"{args.out}/{name}")
        avg = run("gate-average", build_params("gate-average", over), out=f"{args.out}/{name}_average")
        print(f"{name:>3}: state fidelity {single.headline['fidelity']:.5f}, "
              f"average {avg.headline['average_fidelity']:.5f}")


if __name__ == "__main__":
    main()
