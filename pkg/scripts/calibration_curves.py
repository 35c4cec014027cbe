"""Dressed-state shift and sideband coupling against drive amplitude."""

import argparse

from holosim.cli import build_params, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/calibration")
    ap.add_argument("--model", default="single", choices=("single", "pair"))
    ap.add_argument("--points", type=int, default=40)
    args = ap.parse_args()
    over = {"model": args.model, "grid_points": args.points}
    cal = run("calibrate", build_params("calibrate", over), out=f"{args.out}/curve")
    scan = run("coupling-scan", build_params("coupling-scan", over), out=f"{args.out}/scan")
    for res in (cal, scan):
        for key, val in sorted(res.headline.items()):
            print(f"{res.experiment} {key}: {val}")


if __name__ == "__main__":
    main()
