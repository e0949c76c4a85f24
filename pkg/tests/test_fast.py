import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regmatch.errors import DomainError, NotRegularError
from regmatch.fast import approx_match_fast, maximal_match_node_avg, phase_one_rounds, preservation_run
from regmatch.graph import (
    complete_graph,
    cycle_graph,
    disjoint_edges,
    gen_regular_bipartite,
    gen_regular_general,
    path_graph,
)
from regmatch.schedules import alpha_closed_form_bound, alpha_exact, horizon_for, param_schedules


class TestSchedules:
    def test_alpha0(self):
        t = param_schedules(2**10, 0.05)
        with mpmath.workdps(60):
            assert mpmath.almosteq(t.alpha[0], mpmath.power(2**10, -mpmath.mpf(1) / 600), 1e-50)

    def test_alpha1(self):
        t = param_schedules(2**10, 0.05)
        with mpmath.workdps(60):
            assert mpmath.almosteq(t.alpha[1], 11 * t.alpha[0], 1e-50)

    def test_closed_forms(self):
        t = param_schedules(2**10, 0.05)
        for i in range(t.horizon + 1):
            assert t.alpha[i] <= alpha_closed_form_bound(2**10, i)
            with mpmath.workdps(60):
                assert mpmath.almosteq(t.alpha[i], alpha_exact(2**10, i), 1e-40)

    def test_flags_reported(self):
        t = param_schedules(2**10, 0.05)
        assert t.horizon == math.ceil(10 * math.log2(20))
        assert isinstance(t.alpha_ok, bool) and isinstance(t.delta_ok, bool)
        assert not t.alpha_ok  # alpha_1 = 11 * 2^(-1/60) is already above 1/10

    def test_degrees_exact(self):
        t = param_schedules(1000, 0.3)
        assert t.degree == tuple(Fraction(1000, 2**i) for i in range(t.horizon + 1))

    def test_delta_recursion(self):
        D = 2**12
        t = param_schedules(D, 0.5)
        with mpmath.workdps(60):
            d0 = mpmath.exp(-mpmath.power(D, mpmath.mpf(1) / 200))
            assert mpmath.almosteq(t.delta_frac[0], d0, 1e-50)
            d1 = D**2 * (d0 + 2 * mpmath.exp(-mpmath.power(mpmath.mpf(D) / 2, mpmath.mpf(1) / 100)))
            assert mpmath.almosteq(t.delta_frac[1], d1, 1e-40)

    def test_domain(self):
        with pytest.raises(DomainError):
            param_schedules(1, 0.1)
        with pytest.raises(DomainError):
            param_schedules(16, 1.5)

    def test_strict_mode(self):
        with pytest.raises(DomainError):
            param_schedules(2**10, 0.05, strict=True)
        with mpmath.workdps(60):
            eps = mpmath.power(2**10, -mpmath.mpf(1) / 10**5)
        t = param_schedules(2**10, eps, strict=True)
        assert t.in_regime

    @given(st.floats(1e-6, 0.999))
    def test_horizon(self, eps):
        h = horizon_for(eps)
        assert h >= 1
        assert h >= 10 * math.log2(1 / eps) - 1e-9


class TestApproxMatchFast:
    def test_one_round(self):
        res = approx_match_fast(cycle_graph(6), 0.99, 1)
        assert res.rounds == 1
        nonempty = [approx_match_fast(gen_regular_general(50, 4, s), 0.99, s).matching.size > 0 for s in range(20)]
        # a single round after colour coding is empty only if colour coding kills every edge
        assert sum(nonempty) >= 19

    def test_disjoint_edges(self):
        # the colour coding keeps each edge w.p. 1/2; the kept ones match in round 1
        g = disjoint_edges(200)
        res = approx_match_fast(g, 0.5, 3)
        kept = res.snapshots[0].matched_this_round // 2
        assert res.matching.size == kept
        assert all(r == 1 for r in res.matching.match_round[res.matching.match_round >= 0])

    def test_not_regular(self):
        with pytest.raises(NotRegularError):
            approx_match_fast(path_graph(4), 0.1, 0)

    def test_bad_eps(self):
        with pytest.raises(DomainError):
            approx_match_fast(cycle_graph(4), 1.0, 0)

    def test_label(self):
        res = approx_match_fast(gen_regular_bipartite(50, 4, 0), 0.1, 0)
        assert "empirical" in res.as_dict()["label"]

    @pytest.mark.parametrize("seed", range(3))
    def test_snapshot_properties(self, seed):
        g = gen_regular_bipartite(2000, 32, seed)
        res = approx_match_fast(g, 0.1, seed)
        assert res.matching.is_valid_in(g)
        assert res.snapshots[0].low_edge_fraction >= 0.5
        unmatched = [s.residual_node_count for s in res.snapshots]
        assert all(a >= b for a, b in zip(unmatched, unmatched[1:]))
        assert res.unmatched_fraction == pytest.approx(1 - 2 * res.matching.size / g.node_count)


class TestNodeAvg:
    def test_phase_one_rounds(self):
        assert phase_one_rounds(2) == 0
        assert phase_one_rounds(16) == 400
        assert phase_one_rounds(256) == 600

    def test_single_edge(self):
        g = disjoint_edges(1)
        res = maximal_match_node_avg(g, 0)
        assert res.matching.size == 1
        assert res.avg_luby_rounds <= 1
        # in message rounds: ids, ranks, proposals, then the match is known
        assert res.avg == 3

    def test_c4(self):
        g = cycle_graph(4)
        for s in range(30):
            res = maximal_match_node_avg(g, s)
            assert res.matching.is_maximal_in(g)
            assert res.avg <= res.trace.rounds_executed
            assert res.matching.size in (1, 2)

    @given(st.integers(0, 2**32), st.sampled_from([(10, 3), (20, 4), (12, 5), (30, 2)]))
    def test_always_maximal(self, seed, nd):
        n, d = nd
        g = gen_regular_general(n, d, seed)
        res = maximal_match_node_avg(g, seed)
        assert res.matching.is_valid_in(g) and res.matching.is_maximal_in(g)
        assert np.all(res.trace.finish_round >= 0)
        assert res.avg == Fraction(int(res.trace.finish_round.sum()), n)

    def test_not_regular(self):
        with pytest.raises(NotRegularError):
            maximal_match_node_avg(path_graph(5), 0)

    def test_moderate_graph(self):
        g = gen_regular_bipartite(2048, 64, 1)
        res = maximal_match_node_avg(g, 1)
        assert res.matching.is_maximal_in(g)
        assert res.avg <= 12

    def test_complete_graph(self):
        g = complete_graph(9)
        res = maximal_match_node_avg(g, 5)
        assert res.matching.size == 4 and res.matching.is_maximal_in(g)


class TestPreservation:
    def test_snapshots_scored(self):
        g = gen_regular_bipartite(1000, 64, 2)
        m, snaps = preservation_run(g, 3, 2)
        assert len(snaps) == 3 and m.is_valid_in(g)
        for i, s in enumerate(snaps, 1):
            assert s.target_degree == 64 / 2**i
            assert 0 <= s.alpha_regular_fraction <= 1
