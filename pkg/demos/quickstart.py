"""
Quickstart: one stacking query through ten roadmaps
===================================================

Builds ten latent-space roadmaps from one stacking dataset, asks each of them
for plans between a sampled start and goal, and lets the ensemble pick the
plans its members agree on.
"""

# %%
# Data and members
# ----------------

from enslsr import build_members, generate_dataset, plan_member, sample_eval_pairs, select_plans, verify_plan

data = generate_dataset("stacking", 2500, seed=0)
members = build_members(data, model_seeds=range(1, 11), c_max=20)

for m in members:
    print(f"member {m.member_id}: {len(m.roadmap.nodes)} nodes, {len(m.roadmap.edges)} edges, "
          f"eps {m.roadmap.epsilon_used:.3f}")

# %%
# One query
# ---------
# Each member maps start and goal to its nearest roadmap nodes and returns
# every shortest path between them.

start, goal = sample_eval_pairs("stacking", 1, seed=7)[0]
print("start", start.state.cells)
print("goal ", goal.state.cells)

plan_sets = [plan_member(m, start, goal) for m in members]
for s in plan_sets:
    verdicts = [verify_plan(start, goal, p) for p in s.plans]
    print(f"member {s.member_id}: {len(s)} plans, {sum(verdicts)} correct")

# %%
# Ensemble selection
# ------------------
# Plans are scored by how well they match the best plan of every other
# member; the top scorers are kept.

selection = select_plans(plan_sets)
for scored in selection.scores:
    keep = any(scored.plan is p for p in selection.selected)
    print(f"member {scored.member} path {scored.plan.path_id}: score {scored.score:.3f}{'  <- kept' if keep else ''}")

for p in selection.selected:
    print("kept plan correct:", verify_plan(start, goal, p))
    for u in p.action_plan:
        print(f"  pick {tuple(round(v, 2) for v in u.pick)} -> release {tuple(round(v, 2) for v in u.release)}")
