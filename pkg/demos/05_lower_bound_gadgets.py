"""Gadget graphs that defeat algorithms running too few rounds.

A cycle is cut into path gadgets whose middles cannot tell which way the
gadget was inserted.  With a budget of r rounds, pairs of gadgets
frequently leave a node unmatched, although a perfect matching exists.
"""

from regmatch.lowerbound import adversary_trial, build_cycle_instance, build_general_degree_instance, check_instance

inst = build_cycle_instance(3, 40, seed=0)
print(f"cycle instance: {inst.graph.node_count} nodes, checks {check_instance(inst)['ok']}")
# Luby is maximal on a cycle within about three rounds, so larger budgets change nothing:
# the stuck nodes come from symmetric choices, not from running out of time
for budget in (1, 2, 3, 10):
    rep = adversary_trial(inst, "luby_multi", budget, 100, seed=1)
    agg = rep.aggregates()
    print(f"  budget {budget:>2}: pair failure {agg['mean_failure_frequency']:.3f}, "
          f"parity event {agg['mean_parity_failure_frequency']:.3f}, mean unmatched {agg['mean_unmatched']:.1f}")

big = build_general_degree_instance(5, 2, 8, seed=2)
print(f"general-degree instance: {big.graph.node_count} nodes, 5-regular bipartite: {check_instance(big)['ok']}")
