from fractions import Fraction as F

import pytest

from densecsp.csp import make_instance, random_3xor, value
from densecsp.dksh import hypergraph_density, make_hypergraph
from densecsp.errors import CapExceeded
from densecsp.games import clause_variable_game, game_value, make_game
from densecsp.oracle import exact_csp_opt, exact_densest, exact_game_value
from densecsp.rng import SplitMix64

EQ = [1, 0, 0, 1]
NE = [0, 1, 1, 0]


class TestCspOracle:
    def test_satisfiable_with_witness(self, equality_instance):
        res = exact_csp_opt(equality_instance)
        assert res.value == 1
        assert value(equality_instance, res.witness) == 1
        assert res.search_space == 4

    def test_half_half(self, half_half_instance):
        res = exact_csp_opt(half_half_instance)
        assert res.value == F(1, 2)

    def test_recorded_3xor(self):
        res = exact_csp_opt(random_3xor(8, 2, seed=42))
        assert res.value == F(7, 8)
        assert res.search_space == 256

    def test_witness_revalidates(self):
        for seed in range(6):
            inst = random_3xor(6, 2, seed=seed)
            res = exact_csp_opt(inst)
            assert value(inst, res.witness) == res.value

    def test_cap_reports_size(self):
        inst = random_3xor(30, 1, seed=0)
        with pytest.raises(CapExceeded) as err:
            exact_csp_opt(inst, cap=1000)
        assert "2" in str(err.value) and err.value.size == 2**30

    def test_near_tie_resolved_exactly(self):
        # two assignments within 1e-7 of each other: exact arithmetic
        # must pick the true maximum, not the float favourite
        tiny = F(1, 10**8)
        inst = make_instance(
            1, 2, 1,
            [((0,), F(1, 2), [1, 0]), ((0,), F(1, 2), [F(0), F(1) + 0 * tiny])],
        )
        # value(0) = 1/2, value(1) = 1/2 -> tie broken to index 0
        res = exact_csp_opt(inst)
        assert res.witness == (0,)
        inst2 = make_instance(
            1, 2, 1,
            [((0,), F(1, 2), [1, 0]), ((0,), F(1, 2), [0, F(1, 2) + tiny])],
        )
        res2 = exact_csp_opt(inst2)
        assert res2.witness == (0,)
        assert res2.value == F(1, 2)


class TestGameOracle:
    def test_satisfiable(self):
        g = make_game(2, 2, 2, 2, [(0, 0, F(1, 2), EQ), (1, 1, F(1, 2), EQ)])
        res = exact_game_value(g)
        assert res.value == 1
        assert game_value(g, res.witness) == 1

    def test_all_zero(self):
        g = make_game(2, 2, 2, 2, [(0, 0, 1, [0, 0, 0, 0])])
        assert exact_game_value(g).value == 0

    def test_chsh(self, chsh):
        res = exact_game_value(chsh)
        assert res.value == F(3, 4)
        assert game_value(chsh, res.witness) == F(3, 4)
        assert res.search_space == 16

    def test_enumerated_side_choice_consistent(self):
        # asymmetric game: enumerating either side gives the same value
        rng = SplitMix64(3)
        edges = []
        for x in range(2):
            for y in range(3):
                edges.append((x, y, F(1, 6), [rng.below(2) for _ in range(4)]))
        g = make_game(2, 3, 2, 2, edges)
        mirrored = make_game(3, 2, 2, 2, [
            (y, x, w, [t[0], t[2], t[1], t[3]])
            for x, y, w, t in [(e.x, e.y, e.weight, e.table) for e in g.edges]
        ])
        assert exact_game_value(g).value == exact_game_value(mirrored).value

    def test_cap(self, chsh):
        with pytest.raises(CapExceeded):
            exact_game_value(chsh, cap=8)


class TestDensestOracle:
    def test_zero_edges(self):
        h = make_hypergraph(5, 2, [])
        assert exact_densest(h, 3).value == 0

    def test_whole_graph(self):
        h = make_hypergraph(4, 2, [[0, 1], [2, 3]])
        res = exact_densest(h, 4)
        assert res.witness == (0, 1, 2, 3)
        assert res.value == hypergraph_density(h, range(4))

    def test_planted_clique(self):
        h = make_hypergraph(
            7, 2, [[i, j] for i in range(4) for j in range(i + 1, 4)] + [[4, 5]]
        )
        res = exact_densest(h, 4)
        assert res.witness == (0, 1, 2, 3)
        assert res.value == F(3, 4)

    def test_cap(self):
        h = make_hypergraph(30, 2, [[0, 1]])
        with pytest.raises(CapExceeded):
            exact_densest(h, 15, cap=100)


def test_clause_variable_soundness_composition(xor_chain_instance):
    # val mapping through the clause/variable game respects the
    # soundness proposition on oracles from both sides
    opt = exact_csp_opt(xor_chain_instance).value
    gv = exact_game_value(clause_variable_game(xor_chain_instance)).value
    eps = 1 - opt
    assert gv <= 1 - eps / xor_chain_instance.k
