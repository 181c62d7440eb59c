"""Tabulate lambda_hat(K, N, d) against d next to the closed-form comparisons.

For K = N - 1 the table also lists N / (1 - cos(d/2)**N); for K = 0 it lists
pi^2/d^2.  Output is CSV on stdout.
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from spectralgap import CurvatureDimension, d_max, hat_lambda, remark_bound


@dataclass(frozen=True)
class Config:
    curvatures: tuple[float, ...] = (-2.0, 0.0, 1.0, 2.0)
    dimensions: tuple[float, ...] = (2.0, 3.0, 5.0)
    points: int = 10
    d_cap: float = 4.0
    tol: float = 1e-9


def rows(cfg: Config):
    for K in cfg.curvatures:
        for N in cfg.dimensions:
            cd = CurvatureDimension(K, N)
            top = min(d_max(cd), cfg.d_cap)
            for d in np.linspace(top / cfg.points, top, cfg.points):
                d = float(d)
                lam = hat_lambda(cd, d, cfg.tol).lam
                ref = math.nan
                if K == N - 1 and d <= math.pi:
                    ref = remark_bound(N, d)
                elif K == 0:
                    ref = math.pi**2 / d**2
                yield {"K": K, "N": N, "d": d, "lambda_hat": lam, "reference": ref}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=Config.points)
    ap.add_argument("--tol", type=float, default=Config.tol)
    args = ap.parse_args(argv)
    cfg = Config(points=args.points, tol=args.tol)
    writer = csv.DictWriter(sys.stdout, fieldnames=["K", "N", "d", "lambda_hat", "reference"])
    writer.writeheader()
    for row in rows(cfg):
        writer.writerow({k: format(v, ".12g") for k, v in row.items()})


if __name__ == "__main__":
    main()
