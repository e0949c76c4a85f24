"""The augmenting-path matcher against the exact optimum.

Each phase lists every short augmenting path, finds a fractional
matching over those paths, rounds it to vertex-disjoint paths and flips
them.  The bipartite oracle gives OPT for comparison.
"""

from regmatch import gen_regular_bipartite, max_matching_bipartite
from regmatch.warmup import constant_match_report

g = gen_regular_bipartite(150, 3, seed=6)
opt = max_matching_bipartite(g).size
for inner in (0.5, 0.4, 0.3):
    rep = constant_match_report(g, inner, seed=7)
    print(f"inner eps={inner}: k={rep.params.k}, |M|={rep.matching.size}, OPT={opt}, "
          f"phases {rep.phases_run}, largest path family {max(rep.hyperedge_counts, default=0)}")
    print(f"  growth (phase, size): {rep.history[:3]} ... {rep.history[-2:]}")
