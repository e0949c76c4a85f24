"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL ...`` line; the lines are
repeated in an "acceptance criteria" section of the pytest summary.
"""

import math
from functools import lru_cache

import mpmath
import networkx as nx
import numpy as np

from conftest import record_criterion
from regmatch.fast import approx_match_fast, maximal_match_node_avg
from regmatch.graph import (
    Graph,
    complete_bipartite,
    cycle_graph,
    gen_regular_bipartite,
    path_graph,
    validate,
)
from regmatch.lowerbound import (
    adversary_trial,
    build_cycle_instance,
    build_even_degree_instance,
    build_general_degree_instance,
    check_instance,
    decompose_degree,
)
from regmatch.luby import luby_round_distributed, multi_round_luby, tv_distance_estimate
from regmatch.martingale import documented_grid
from regmatch.oracle import max_matching_bipartite
from regmatch.rng import split_seed
from regmatch.schedules import param_schedules
from regmatch.warmup import FractionalMatching, Hypergraph, _Rounder, warmup_full

# connected bipartite graphs on n = 1..10 nodes, up to isomorphism
CONNECTED_BIPARTITE_COUNTS = (1, 1, 1, 3, 5, 17, 44, 182, 730, 4032)


# --- criterion 1 helpers ---------------------------------------------------


def _sorted_biadjacency(a: int, b: int):
    """Row bitmask tuples of ``a x b`` 0/1 matrices with no zero row or column
    whose rows and columns are both nondecreasing when read as integers.

    Every matrix can be permuted into this doubly sorted form, so the
    output meets every isomorphism class of bipartite graphs with a
    side of size ``a`` and one of size ``b`` (with repeats).
    """
    full = 1 << b

    def columns(rows):
        return [sum(((r >> (b - 1 - j)) & 1) << (a - 1 - i) for i, r in enumerate(rows)) for j in range(b)]

    def rec(prefix, lo):
        if len(prefix) == a:
            cols = columns(prefix)
            if cols[0] > 0 and all(x <= y for x, y in zip(cols, cols[1:])):
                yield tuple(prefix)
            return
        for r in range(lo, full):
            prefix.append(r)
            yield from rec(prefix, r)
            prefix.pop()

    yield from rec([], 1)


def _brute_bipartite(rows, b: int) -> int:
    """Maximum matching by exhaustive search over rows and used columns."""

    @lru_cache(maxsize=None)
    def best(i: int, used: int) -> int:
        if i == len(rows):
            return 0
        out = best(i + 1, used)
        free = rows[i] & ~used
        while free:
            low = free & -free
            out = max(out, 1 + best(i + 1, used | low))
            free ^= low
        return out

    return best(0, 0)


def _pairs(a: int, b: int, rows):
    return [(i, a + j) for i, r in enumerate(rows) for j in range(b) if (r >> (b - 1 - j)) & 1]


def test_criterion_01_oracle_exhaustive():
    mismatches = 0
    checked = 0
    class_counts = [1]  # the single node
    for n in range(2, 11):
        buckets: dict = {}
        for a in range(1, n // 2 + 1):
            b = n - a
            for rows in _sorted_biadjacency(a, b):
                pairs = _pairs(a, b, rows)
                h = nx.Graph(pairs)
                if h.number_of_nodes() != n or not nx.is_connected(h):
                    continue
                checked += 1
                g = Graph.from_edges(n, pairs)
                m = max_matching_bipartite(g)
                if not m.is_valid_in(g) or m.size != _brute_bipartite(rows, b):
                    mismatches += 1
                key = nx.weisfeiler_lehman_graph_hash(h, iterations=3)
                bucket = buckets.setdefault(key, [])
                if not any(nx.is_isomorphic(h, o) for o in bucket):
                    bucket.append(h)
        class_counts.append(sum(len(v) for v in buckets.values()))
    ok = mismatches == 0 and tuple(class_counts) == CONNECTED_BIPARTITE_COUNTS
    record_criterion(1, ok, f"{checked} graphs checked, {mismatches} mismatches, classes per n {class_counts}")


def test_criterion_02_tv_distance():
    graphs = {"P3": path_graph(3), "C4": cycle_graph(4), "C5": cycle_graph(5), "K13": complete_bipartite(1, 3)}
    tvs = {name: float(tv_distance_estimate(g, 100_000, seed=i)) for i, (name, g) in enumerate(graphs.items())}
    ok = all(v <= 0.02 for v in tvs.values())
    record_criterion(2, ok, "TV " + ", ".join(f"{k}={v:.4f}" for k, v in tvs.items()) + " (limit 0.02)")


def test_criterion_03_constant_fraction():
    n_side = 10_000
    fracs = []
    for s in range(20):
        g = gen_regular_bipartite(n_side, 16, split_seed(3, s))
        m = luby_round_distributed(g, seed=split_seed(3, s, 1))
        fracs.append(2 * m.size / g.node_count)
    ok = min(fracs) >= 1 / 288
    record_criterion(3, ok, f"matched node fraction min {min(fracs):.4f}, mean {np.mean(fracs):.4f} (need >= 1/288)")


def test_criterion_04_degree_halving():
    D = 512
    shares = []
    for s in range(20):
        g = gen_regular_bipartite(10_000, D, split_seed(4, s))
        _, snaps = multi_round_luby(g, 1, split_seed(4, s, 1))
        hist = snaps[0].degree_histogram
        total = sum(hist.values())
        inside = sum(c for d, c in hist.items() if D / 2 * 0.85 <= d <= D / 2 * 1.15)
        shares.append(inside / total)
    ok = min(shares) >= 0.95
    record_criterion(4, ok, f"survivors within D/2(1 +- 0.15): min {min(shares):.4f} over 20 seeds (need 0.95)")


def test_criterion_05_fast_matcher():
    eps = 0.05
    unmatched = []
    rounds = None
    for s in range(50):
        g = gen_regular_bipartite(10_000, 256, split_seed(5, s))
        res = approx_match_fast(g, eps, split_seed(5, s, 1))
        rounds = res.rounds
        unmatched.append(res.unmatched_fraction)
    good = sum(u <= eps for u in unmatched)
    ok = rounds == 44 and good >= 45
    record_criterion(5, ok, f"{good}/50 seeds with unmatched fraction <= {eps} in {rounds} rounds, "
                            f"worst {max(unmatched):.4f} (empirical, outside the proven regime)")


def test_criterion_06_warmup():
    inner = 0.3
    gaps = []
    capped = False
    for s in range(10):
        g = gen_regular_bipartite(250, 4, split_seed(6, s))
        rep = warmup_full(g, inner, split_seed(6, s, 1), inner_eps=inner)
        opt = max_matching_bipartite(g).size
        gaps.append((opt - rep.matching.size) / g.node_count)
        capped |= rep.inner.cap_triggered
        assert rep.matching.is_valid_in(g)
    ok = max(gaps) <= inner and not capped
    record_criterion(6, ok, f"(OPT - |M|)/n max {max(gaps):.4f} (limit {inner}), path cap triggered: {capped}")


def test_criterion_07_rounding_disjoint():
    rng = np.random.default_rng(7)
    overlaps = 0
    kept_total = 0
    for inst in range(1000):
        n = int(rng.integers(3, 25))
        f = int(rng.integers(2, min(n, 7) + 1))
        edges = set()
        for _ in range(int(rng.integers(1, 40))):
            size = int(rng.integers(2, f + 1))
            edges.add(tuple(sorted(rng.choice(n, size, replace=False).tolist())))
        h = Hypergraph(n, sorted(edges), f)
        w = rng.random(len(h))
        load = np.zeros(n)
        for e, p in zip(h.hyperedges, w):
            load[list(e)] += p
        # scale to a feasible point, then pick tau up to the overflow limit
        w = w / max(load.max(), 1.0)
        load = load / max(load.max(), 1.0)
        tau = float(rng.uniform(0.05, 1.0)) / load.max()
        kept = _Rounder(h, FractionalMatching(w), tau).kept(inst, np.arange(4))
        for row in kept:
            chosen = [h.hyperedges[i] for i in np.flatnonzero(row)]
            nodes = [v for e in chosen for v in e]
            kept_total += len(chosen)
            overlaps += len(nodes) != len(set(nodes))
    ok = overlaps == 0
    record_criterion(7, ok, f"1000 instances x 4 draws, {kept_total} hyperedges kept, {overlaps} overlapping outputs")


def test_criterion_08_node_averaged():
    avgs = {}
    maximal = True
    for D in (16, 64, 256):
        vals = []
        for s in range(30):
            g = gen_regular_bipartite(2**13, D, split_seed(8, s, D))
            res = maximal_match_node_avg(g, split_seed(8, s, D + 1))
            maximal &= res.matching.is_maximal_in(g)
            vals.append(float(res.avg))
        avgs[D] = float(np.mean(vals))
    factor = max(avgs.values()) / min(avgs.values())
    ok = factor < 2 and maximal
    record_criterion(8, ok, "mean node-averaged rounds " + ", ".join(f"D={d}: {v:.3f}" for d, v in avgs.items())
                     + f"; spread factor {factor:.3f} (need < 2); all maximal: {maximal}")


def test_criterion_09_gadgets():
    failures = []
    for r, k in ((1, 2), (3, 8)):
        insts = [build_cycle_instance(r, k, 1), build_even_degree_instance(4, r, k, 1)]
        for inst in insts:
            rep = check_instance(inst)
            if not rep["ok"]:
                failures.append((inst.family, r, k, rep))
        formula = [k * (2 * r + 2), k * (2 * r + 2) * 9]
        if [i.graph.node_count for i in insts] != formula:
            failures.append(("count", r, k))
    for delta, rho, k in ((3, 2, 4), (5, 2, 8), (2, 2, 4), (7, 4, 4)):
        inst = build_general_degree_instance(delta, rho, k, 1)
        if not check_instance(inst)["ok"] or inst.graph.node_count != 4 * k + 10 * k * delta * rho:
            failures.append(("general_degree", delta, rho, k))
        if not validate(inst.graph).is_bipartite:
            failures.append(("bipartite", delta))
    bad_delta = [d for d in range(2, 10_001) if (lambda xy: min(xy) < 0 or 3 * xy[0] + 2 * xy[1] != d)(decompose_degree(d))]
    ok = not failures and not bad_delta
    record_criterion(9, ok, f"{len(failures)} instance failures, {len(bad_delta)} bad degree decompositions")


def test_criterion_10_adversary():
    inst = build_cycle_instance(3, 40, 0)
    rep = adversary_trial(inst, "luby_multi", 3, 200, seed=10)
    ok = rep.mean_failure >= 0.2
    record_criterion(10, ok, f"mean pair failure frequency {rep.mean_failure:.4f} over 200 trials (need 0.2); "
                             f"parity event {rep.mean_parity_failure:.4f}")


def test_criterion_11_schedules():
    with mpmath.workdps(60):
        eps = mpmath.power(2**10, -mpmath.mpf(1) / 10**5)
    t = param_schedules(2**10, eps)
    with mpmath.workdps(60):
        a0 = mpmath.nstr(t.alpha[0], 6)
        cap = mpmath.exp(-mpmath.power(2**10, mpmath.mpf(1) / 300))
        d0 = mpmath.nstr(t.delta_frac[0], 6)
    ok = t.alpha_ok and t.delta_ok
    record_criterion(11, ok, f"horizon {t.horizon}, alpha_0 = {a0} (need <= 0.1), delta_0 = {d0} "
                             f"(need <= {mpmath.nstr(cap, 6)}); alpha flag {t.alpha_ok}, delta flag {t.delta_ok}")


def test_criterion_12_martingale():
    reports = documented_grid(trials=20_000, seed=12)
    bad = [(r.process, r.side, r.violations) for r in reports if not r.passed]
    points = sum(len(r.rows) for r in reports)
    record_criterion(12, not bad, f"{len(reports)} process/side pairs, {points} grid points, violations {bad or 0}")
