"""
Tuning the synthetic mapping module
===================================

Individual members should solve roughly 55 to 80 percent of stacking queries
with every plan correct. The merge probability is the knob that moves this
the most; noise scale and split rate stay at their defaults. This prints the
mean individual pct_all over ten members for a few merge rates.
"""

import statistics

from enslsr import MappingConfig, PlanCache, System, build_members, evaluate_system, generate_dataset, sample_eval_pairs

data = generate_dataset("stacking", 2500, seed=0)
pairs = sample_eval_pairs("stacking", 1000, seed=0)

# %%

print(f"{'p_merge':>8} {'mean pct_all':>13} {'min':>6} {'max':>6}")
for p_merge in (5e-5, 1e-4, 1.5e-4):
    members = build_members(data, range(1, 11), c_max=20, config=MappingConfig(p_merge=p_merge))
    cache = PlanCache(members, pairs)
    scores = [evaluate_system(System("s", (k,), "single"), cache=cache)[1].pct_all for k in range(10)]
    print(f"{p_merge:>8.1e} {statistics.fmean(scores):13.1f} {min(scores):6.1f} {max(scores):6.1f}")
