#!/usr/bin/env python3
"""Reproduce the secrecy-probability-vs-redundant-rate curves.

Emits one CSV per eavesdropper density with analytic and simulated
values for both delivery schemes, under the chosen eavesdropper model.

Example:
    python3 scripts/run_secrecy_curves.py --out-dir results/ --n-trials 100000
"""

import argparse
import csv
import pathlib

import numpy as np

from scdp.analytics import (
    ApproximationConfig,
    RatePolicy,
    p_s_ce_jt,
    p_s_ce_ot_indep,
    p_s_nce_jt,
    p_s_nce_ot,
)
from scdp.geometry import LAMBDA0, make_linear_network
from scdp.montecarlo import TrialBatch, estimate_ps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", help="output directory")
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--d", type=float, default=1.0, help="SBS spacing [d0]")
    parser.add_argument("--x-u", type=float, default=1.0, help="user abscissa [d0]")
    parser.add_argument("--eve-model", choices=("nce", "ce"), default="nce")
    parser.add_argument("--n-trials", type=int, default=50_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--points", type=int, default=9)
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = args.eve_model.upper()
    approx = ApproximationConfig(5)
    for tag, lam in (("lam0", LAMBDA0), ("3lam0", 3 * LAMBDA0)):
        net = make_linear_network(args.k, args.d, args.x_u, lambda_e=lam)
        path = out_dir / f"secrecy_{args.eve_model}_{tag}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r_e", "scheme", "analytic", "estimate", "stderr"])
            for i, r_e in enumerate(np.linspace(0.5, 4.5, args.points)):
                pol = RatePolicy(1.0, float(r_e))
                batch = TrialBatch(args.seed + i, args.n_trials)
                if model == "NCE":
                    ana_jt = p_s_nce_jt(net, pol.beta_e())
                    ana_ot = p_s_nce_ot(net, pol.beta_e_vector(args.k))
                else:
                    ana_jt = p_s_ce_jt(net, pol.beta_e(), approx)
                    ana_ot = p_s_ce_ot_indep(net, pol.beta_e_vector(args.k), approx)
                for scheme, ana in (("JT", ana_jt), ("OT", ana_ot)):
                    est, se = estimate_ps(net, pol, scheme, model, batch)
                    writer.writerow([f"{r_e:.4f}", scheme, f"{ana:.6f}", f"{est:.6f}", f"{se:.6f}"])
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
