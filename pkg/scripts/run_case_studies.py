"""Regenerate every case-study table into ``results/``.

Panel parameters (sigma in {0.5, 1, 2, 3}, lambda in {1, 5, 10},
mu_tilde = lambda_tilde = 1) are a reconstruction; the original figures do
not state them.

Usage: python3 scripts/run_case_studies.py [--samples N] [--out DIR]
"""

import argparse
import pathlib
import sys
import time

from capx.cli import main as capx

HERE = pathlib.Path(__file__).resolve().parent
CONFIGS = HERE / "configs"

RUNS = [
    ("run", "poisson_lognormal_var"),
    ("run", "poisson_ig_var"),
    ("run", "poisson_ig_srm"),
    ("run", "poisson_pareto_es_srm"),
    ("run", "poisson_pareto_infinite_mean_tail"),
    ("diagnose", "pareto_diagnostics"),
]
SWEEPS = [
    ("poisson_lognormal_var", "model.severity.sigma", "0.5,1,2,3"),
    ("poisson_ig_var", "model.frequency.lambda", "1,5,10"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--out", default=str(HERE.parent / "results"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    extra = ["--samples", str(args.samples)] if args.samples else []

    jobs = [([cmd, str(CONFIGS / f"{name}.json")], f"{cmd}_{name}") for cmd, name in RUNS]
    jobs += [(["sweep", str(CONFIGS / f"{name}.json"), "--param", param, "--values", values],
              f"sweep_{name}_{param.rsplit('.', 1)[-1]}") for name, param, values in SWEEPS]
    status = 0
    for argv, stem in jobs:
        t0 = time.perf_counter()
        rc = capx(argv + extra + ["--out", str(out / f"{stem}.csv")])
        print(f"{stem:48s} rc={rc} {time.perf_counter() - t0:6.1f}s")
        status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main())
