"""
Ensemble size sweep on stacking
===============================

Scores the ensemble, the naive union of plans, and the individual members as
the number of members grows from 3 to 10. Writes ``member_sweep.csv``.
"""

import sys

from enslsr import build_members, generate_dataset, rows_to_csv, sample_eval_pairs, sweep_members

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0

# %%
# Same seed mapping as the acceptance run: dataset h, models 100h+1..100h+10, pairs h.

data = generate_dataset("stacking", 2500, seed=seed)
members = build_members(data, [100 * seed + k for k in range(1, 11)], c_max=20)
pairs = sample_eval_pairs("stacking", 1000, seed=seed)
rows = sweep_members(members, pairs, seed=seed)

# %%
# pct_all per system and m

print(f"{'m':>3} {'ens':>7} {'naive':>7} {'mean':>7} {'min':>7} {'max':>7}")
for m in range(3, 11):
    by = {r["system"]: r["pct_all"] for r in rows if r["m"] == m}
    print(f"{m:>3} {by['ens']:7.1f} {by['naive']:7.1f} {by['individual_mean']:7.1f} "
          f"{by['individual_min']:7.1f} {by['individual_max']:7.1f}")

with open("member_sweep.csv", "w", newline="") as fh:
    fh.write(rows_to_csv(rows))
