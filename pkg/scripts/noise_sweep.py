"""Gate fidelity against relative amplitude-noise strength (decoherence off)."""

import argparse
import math

from holosim.cli import build_params, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/noise_sweep")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--gamma", default="pi", help="gate angle, e.g. pi or pi/2")
    args = ap.parse_args()
    params = build_params("noise-sweep", {"seeds": args.seeds, "gamma": args.gamma})
    res = run("noise-sweep", params, out=args.out, threads=args.threads)
    print(f"gamma = {params.gamma / math.pi:.3g} pi")
    for key, val in sorted(res.headline.items()):
        print(f"{key}: {val}")


if __name__ == "__main__":
    main()
