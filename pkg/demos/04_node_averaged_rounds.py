"""How long does an average node wait before its output is fixed?

A maximal matching is built by Luby rounds; each node records the round
in which it is matched or loses its last free neighbour.  The mean of
those rounds stays flat as the degree grows.
"""

from regmatch import gen_regular_bipartite, maximal_match_node_avg

for delta in (8, 32, 128):
    g = gen_regular_bipartite(4096, delta, seed=delta)
    res = maximal_match_node_avg(g, seed=1)
    print(f"degree {delta:>3}: mean finish {float(res.avg):.3f} message rounds "
          f"({float(res.avg_luby_rounds):.3f} Luby rounds), last node at {res.total_rounds}, "
          f"maximal: {res.matching.is_maximal_in(g)}")
