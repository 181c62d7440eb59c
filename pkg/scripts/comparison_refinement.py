"""Gradient and maximum comparisons on the weighted intervals under grid refinement.

A true violation of the gradient comparison would not shrink with the grid; a
discretization artifact shrinks by about 4x per halving of h.
"""

import argparse
from dataclasses import dataclass

from spectralgap.modelfun import check_gradient_comparison, check_max_comparison, gradient_model_for
from spectralgap.spaces import CATALOG


@dataclass(frozen=True)
class Config:
    grids: tuple[int, ...] = (256, 512, 1024, 2048)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", default="256,512,1024,2048")
    cfg = Config(tuple(int(g) for g in ap.parse_args(argv).grids.split(",")))
    weighted = [e for e in CATALOG if "weighted" in e.tags]
    print("space          n     max_violation   max_gamma")
    for e in weighted:
        if e.space.full_range:
            continue
        for n in cfg.grids:
            rep = check_gradient_comparison(e.space, gradient_model_for(e.space, n=n), n=n)
            print(f"{e.name:14s} {n:5d} {rep.max_violation: .6e} {rep.max_gamma:.4f}")
    print()
    print("space          max_f        m_KN         pass")
    for e in weighted:
        rep = check_max_comparison(e.space)
        print(f"{e.name:14s} {rep.max_f:.10f} {rep.m:.10f} {rep.passed}")


if __name__ == "__main__":
    main()
