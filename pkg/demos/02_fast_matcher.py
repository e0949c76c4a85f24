"""The fast approximate matcher: colour coding followed by a few Luby rounds.

Nodes pick a random side, edges inside one side are dropped, and
ceil(10 log2(1/eps)) rounds of Luby run on what remains.  The proven
guarantee needs an astronomically large degree, so the numbers below are
empirical.
"""

from regmatch import approx_match_fast, gen_regular_bipartite
from regmatch.schedules import param_schedules

g = gen_regular_bipartite(5000, 128, seed=4)
for eps in (0.2, 0.1, 0.05):
    res = approx_match_fast(g, eps, seed=5)
    print(f"eps={eps}: {res.rounds} rounds, unmatched fraction {res.unmatched_fraction:.4f}, "
          f"ratio vs n/2 {res.approx_ratio_bound:.4f}")
# at this size the bichromatic subgraph is already exhausted after 24 rounds;
# what stays unmatched was cut off by the colour coding
print(f"  label: {res.label}")

t = param_schedules(128, 0.05)
print(f"schedule at degree 128, eps=0.05: horizon {t.horizon}, alpha bound holds: {t.alpha_ok}, "
      f"delta bound holds: {t.delta_ok}")
