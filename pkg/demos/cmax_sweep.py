"""
Component bound sweep on harvesting
===================================

One mapping module, ten roadmaps built with c_max in {1, 10, ..., 90}, and
the ensemble over all ten. A tight bound merges far-apart states and yields
zero-length plans; loose bounds fragment the graph so fewer queries have any
path at all.
"""

from enslsr import build_cmax_members, generate_dataset, sample_eval_pairs, sweep_cmax

values = [1] + list(range(10, 100, 10))
data = generate_dataset("harvesting", 5000, seed=0)
members = build_cmax_members(data, 1, values, directed=True)
rows = sweep_cmax(members, sample_eval_pairs("harvesting", 1000, seed=0))

# %%

print(f"{'c_max':>6} {'nodes':>6} {'edges':>6} {'all':>6} {'any':>6} {'exists':>7}")
for m, r in zip(members, rows):
    print(f"{r['c_max']:>6} {len(m.roadmap.nodes):>6} {len(m.roadmap.edges):>6} "
          f"{r['pct_all']:6.1f} {r['pct_any']:6.1f} {r['pct_exists']:7.1f}")
ens = rows[-1]
print(f"{'ens':>6} {'':>6} {'':>6} {ens['pct_all']:6.1f} {ens['pct_any']:6.1f} {ens['pct_exists']:7.1f}")
