from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regmatch.errors import UnfinishedTraceError
from regmatch.graph import Graph, cycle_graph, gen_regular_general, path_graph
from regmatch.luby import LubyProgram, communication_finish_rounds, congest_bits, luby_until_maximal
from regmatch.rng import node_seed
from regmatch.sim import Done, Trace, decode_int, encode_int, node_averaged_time, run_rounds


class FinishWithDegree:
    def init(self, node_id, degree, local_seed):
        return degree

    def on_round(self, state, inbox):
        return state, None, Done(state)


class EchoThenFinish:
    def __init__(self, rounds):
        self.rounds = rounds

    def init(self, node_id, degree, local_seed):
        return {"id": node_id, "deg": degree, "r": 0, "heard": []}

    def on_round(self, s, inbox):
        r = s["r"]
        s["r"] += 1
        s["heard"].append(sorted(decode_int(m) for m in inbox if m))
        if r == self.rounds:
            return s, None, Done(s["heard"])
        return s, [encode_int(s["id"])] * s["deg"], None


class MinFlood:
    """Floods the minimum of local hashes for ``radius`` rounds."""

    def __init__(self, radius):
        self.radius = radius

    def init(self, node_id, degree, local_seed):
        return {"v": int(local_seed) >> 1, "deg": degree, "r": 0}

    def on_round(self, s, inbox):
        for m in inbox:
            if m:
                s["v"] = min(s["v"], decode_int(m))
        r = s["r"]
        s["r"] += 1
        if r == self.radius:
            return s, None, Done(s["v"])
        return s, [encode_int(s["v"])] * s["deg"], None


class Never:
    def init(self, node_id, degree, local_seed):
        return None

    def on_round(self, s, inbox):
        return s, None, None


class TestRunRounds:
    def test_finish_immediately(self):
        t = run_rounds(cycle_graph(4), FinishWithDegree(), 5, 0)
        assert t.finish_round.tolist() == [0] * 4
        assert t.outputs == [2] * 4
        assert t.rounds_executed == 0 and not t.budget_exhausted

    def test_echo_three_rounds(self):
        g = path_graph(3)
        t = run_rounds(g, EchoThenFinish(3), 10, 1)
        assert t.finish_round.tolist() == [3, 3, 3]
        # node 1 hears both neighbours from round 1 on
        assert t.outputs[1] == [[], [0, 2], [0, 2], [0, 2]]
        assert t.total_messages == 3 * 2 * g.edge_count

    def test_budget_exhausted(self):
        t = run_rounds(path_graph(2), Never(), 3, 0)
        assert t.budget_exhausted and np.all(t.finish_round == -1)
        with pytest.raises(UnfinishedTraceError):
            node_averaged_time(t)

    def test_explicit_ports(self):
        g = path_graph(3)
        t = run_rounds(g, EchoThenFinish(1), 5, 0, ports=[[1], [2, 0], [1]])
        assert t.outputs[1] == [[], [0, 2]]
        with pytest.raises(ValueError):
            run_rounds(g, EchoThenFinish(1), 5, 0, ports=[[1], [0, 0], [1]])

    def test_deterministic(self):
        g = gen_regular_general(30, 3, 2)
        a = run_rounds(g, LubyProgram(g.edge_count), 200, 9)
        b = run_rounds(g, LubyProgram(g.edge_count), 200, 9)
        assert np.array_equal(a.finish_round, b.finish_round) and a.outputs == b.outputs
        assert a.max_message_bits == b.max_message_bits and a.total_messages == b.total_messages

    def test_luby_program_p3_frequencies(self):
        g = path_graph(3)
        hits = 0
        runs = 10_000
        for s in range(runs):
            t = run_rounds(g, LubyProgram(g.edge_count), 50, s)
            matched = [o is not None for o in t.outputs]
            assert matched[1] and matched.count(True) == 2
            hits += t.outputs[1] == 0
        assert abs(hits / runs - 0.5) <= 0.02

    @pytest.mark.parametrize("seed", range(4))
    def test_luby_program_matches_vectorized(self, seed):
        g = gen_regular_general(40, 4, seed)
        t = run_rounds(g, LubyProgram(g.edge_count), 1000, seed)
        m = luby_until_maximal(g, seed)
        assert np.array_equal(t.finish_round, communication_finish_rounds(g, m))
        assert [-1 if o is None else o for o in t.outputs] == m.partner.tolist()

    @pytest.mark.parametrize("c_prime", [1, 2, 3])
    def test_congest_bits(self, c_prime):
        g = gen_regular_general(50, 6, 4)
        t = run_rounds(g, LubyProgram(g.edge_count, c_prime), 1000, 3)
        assert 0 < t.max_message_bits <= congest_bits(g.edge_count, c_prime)


class TestLocality:
    @given(st.integers(0, 2**32), st.integers(1, 3))
    def test_rewire_outside_ball(self, seed, radius):
        # a long cycle; swapping two far edges keeps node 0's (radius+1)-ball intact
        n = 40
        g = cycle_graph(n)
        a, b = 15, 25
        edges = [tuple(e) for e in g.edges.tolist() if tuple(e) not in {(a, a + 1), (b, b + 1)}]
        h = Graph.from_edges(n, edges + [(a, b), (a + 1, b + 1)])
        prog = MinFlood(radius)
        tg = run_rounds(g, prog, radius + 1, seed)
        th = run_rounds(h, prog, radius + 1, seed)
        for u in (0, 1, n - 1):
            assert tg.outputs[u] == th.outputs[u]
        # the flooded value is the minimum over the radius-ball
        want = min(int(node_seed(seed, v)) >> 1 for v in g.ball(0, radius))
        assert tg.outputs[0] == want


class TestNodeAveragedTime:
    def _trace(self, fr):
        fr = np.array(fr)
        return Trace(int(fr.max()), fr, [None] * len(fr), 0, 0, False)

    def test_all_one(self):
        assert node_averaged_time(self._trace([1, 1, 1])) == 1

    def test_two_nodes(self):
        assert node_averaged_time(self._trace([0, 2])) == 1

    def test_exact_fraction(self):
        assert node_averaged_time(self._trace([0, 1, 1])) == Fraction(2, 3)
