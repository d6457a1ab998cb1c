import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from dagrammar.data import DagDataset, LabelVocabulary
from dagrammar.disambiguation import (
    EliminationInstance,
    beam_hitting_set,
    disambiguate,
    enumerate_derivations,
    exact_hitting_set,
    hitting_set,
    minimal_rule_set_selection,
)
from dagrammar.errors import Infeasible, InvariantViolation
from dagrammar.grammar import Grammar, Instruction, Rule, apply_rule, derive, start_graph
from dagrammar.graph import LabeledDigraph
from dagrammar.induction import learn_grammar
from dagutil import nx_isomorphic, random_dag

B = "black"
N = "gray"


def vocab(*terminals):
    return LabelVocabulary(frozenset(terminals), frozenset({N}))


def chain(*labels):
    nodes = {str(i): l for i, l in enumerate(labels)}
    return LabeledDigraph(nodes, [(str(i), B, str(i + 1)) for i in range(len(labels) - 1)])


def ins(sigma, x, d="in", d_prime="in"):
    return Instruction(sigma, B, B, str(x), d, d_prime)


def brute_derivations(g, h):
    """Every rule sequence of length <= |h| that rewrites the start graph into ``h``."""
    found = []

    def walk(state, seq):
        nts = g.nonterminal_nodes(state)
        if not nts:
            if nx_isomorphic(state, h):
                found.append(tuple(seq))
            return
        if len(seq) >= len(h) or len(state) - 1 > len(h):
            return
        n = nts[0]
        for r in g.rules_for(state.nodes[n]):
            walk(apply_rule(state, n, r), seq + [r.id])

    walk(start_graph(g), [])
    return sorted(found)


# -- hitting sets ---------------------------------------------------------------


class TestHittingSet:
    @pytest.mark.parametrize("sets, expected", [
        ([{1, 2}, {2, 3}], {2}),
        ([{5}], {5}),
        ([], set()),
        ([{1}, {2}, {1, 2}], {1, 2}),
    ])
    def test_examples(self, sets, expected):
        assert exact_hitting_set(sets) == expected
        assert beam_hitting_set(sets) == expected

    def test_empty_member_is_infeasible(self):
        with pytest.raises(Infeasible):
            exact_hitting_set([{1}, set()])
        with pytest.raises(Infeasible):
            hitting_set([set()], "beam")

    def test_exact_prefers_lexicographically_smallest(self):
        assert exact_hitting_set([{3, 1}, {3, 2}, {1, 2}]) == {1, 2}

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sets(st.integers(0, 11), min_size=1, max_size=4), max_size=8))
    def test_exact_and_beam_against_brute_force(self, sets):
        universe = sorted(set().union(*sets)) if sets else []
        best = next(k for k in range(len(universe) + 1)
                    if any(all(s & set(c) for s in sets) for c in combinations(universe, k)))
        ex = exact_hitting_set(sets)
        assert len(ex) == best and all(s & ex for s in sets)
        bm = beam_hitting_set(sets, beam_width=10)
        assert all(s & bm for s in sets) and len(bm) >= best


class TestSelection:
    def test_smaller_option_wins(self):
        inst = EliminationInstance.build([[{1}], [{1}, {2}]])
        assert minimal_rule_set_selection(inst) == {1}

    def test_nothing_to_eliminate(self):
        assert minimal_rule_set_selection(EliminationInstance.build([[set()]])) == set()

    def test_empty_family_names_the_graph(self):
        with pytest.raises(Infeasible, match="graph 7"):
            minimal_rule_set_selection(EliminationInstance.build([[{1}], []], owners=[3, 7]))

    def test_ties_follow_member_order(self):
        assert minimal_rule_set_selection(EliminationInstance.build([[{4}, {2}]])) == {4}

    def test_exact_against_greedy(self):
        rng = random.Random(8)
        for _ in range(100):
            fams = [[set(rng.sample(range(8), rng.randint(0, 3))) for _ in range(rng.randint(1, 3))]
                    for _ in range(rng.randint(1, 5))]
            inst = EliminationInstance.build(fams)
            ex = minimal_rule_set_selection(inst)
            gr = minimal_rule_set_selection(inst, exact_limit=0)
            for h in (ex, gr):
                assert all(any(set(t) <= h for t in f) for f in fams)
            assert len(gr) >= len(ex)
            universe = sorted(inst.universe)
            best = next(k for k in range(len(universe) + 1)
                        if any(all(any(t <= set(c) for t in f) for f in fams)
                               for c in combinations(universe, k)))
            assert len(ex) == best


# -- enumeration ------------------------------------------------------------------


def two_way_grammar():
    """``a -> b -> c -> d`` is derivable as (0, 1) and as (2, 3)."""
    rules = [
        Rule(0, B, LabeledDigraph({"0": "a", "1": "b", "2": N}, [("0", B, "1"), ("1", B, "2")])),
        Rule(1, N, chain("c", "d"), {ins("b", 0)}),
        Rule(2, B, LabeledDigraph({"0": "a", "1": N}, [("0", B, "1")])),
        Rule(3, N, chain("b", "c", "d"), {ins("a", 0)}),
    ]
    return Grammar(vocab("a", "b", "c", "d"), rules)


def swap_grammar():
    """``b`` and ``c`` can be added in either order, yielding the same graph."""
    every = ("a", "b", "c")
    rules = [
        Rule(0, B, LabeledDigraph({"0": "a", "1": N}, [("0", B, "1")])),
        Rule(1, N, LabeledDigraph({"0": "b", "1": N}, [("0", B, "1")]),
             {ins("a", 0)} | {ins(s, 1) for s in every}),
        Rule(2, N, LabeledDigraph({"0": "c", "1": N}, [("0", B, "1")]),
             {ins("a", 0)} | {ins(s, 1) for s in every}),
        Rule(3, N, LabeledDigraph({"0": "d"}, []), {ins(s, 0) for s in every}),
    ]
    return Grammar(vocab("a", "b", "c", "d"), rules)


class TestEnumeration:
    def test_single_graph_grammar(self):
        h = chain("x", "y", "z")
        g = Grammar(vocab("x", "y", "z"), [Rule(0, B, h)])
        assert enumerate_derivations(g, h) == [(0,)]

    def test_two_derivations(self):
        g = two_way_grammar()
        h = chain("a", "b", "c", "d")
        assert enumerate_derivations(g, h) == [(0, 1), (2, 3)] == brute_derivations(g, h)

    def test_not_in_language(self):
        assert enumerate_derivations(two_way_grammar(), chain("a", "c", "b", "d")) == []

    def test_order_swapped_derivations(self):
        g = swap_grammar()
        h = derive(g, (0, 1, 2, 3))
        assert nx_isomorphic(h, derive(g, (0, 2, 1, 3)))
        assert enumerate_derivations(g, h) == [(0, 1, 2, 3), (0, 2, 1, 3)] == brute_derivations(g, h)

    def test_memo_is_transparent(self):
        g = swap_grammar()
        h = derive(g, (0, 1, 2, 3))
        assert enumerate_derivations(g, h, memo=False) == enumerate_derivations(g, h)

    def test_complete_on_learned_grammars(self):
        rng = random.Random(44)
        checked = 0
        for _ in range(12):
            graphs = [random_dag(rng, 3, 6, labels=("a", "b", "c")) for _ in range(4)]
            res = learn_grammar(DagDataset.from_graphs(graphs))
            if len(res.grammar) > 8:
                continue
            for h in graphs:
                got = enumerate_derivations(res.grammar, h)
                assert got == brute_derivations(res.grammar, h)
                assert got == enumerate_derivations(res.grammar, h, memo=False)
                checked += 1
        assert checked >= 20


# -- disambiguate --------------------------------------------------------------------


class TestDisambiguate:
    def test_unambiguous_grammar_is_untouched(self):
        h = chain("x", "y", "z")
        g = Grammar(vocab("x", "y", "z"), [Rule(0, B, h)])
        res = disambiguate(g, [h])
        assert res.grammar == g and res.parses == {0: (0,)} and res.lost == [] and res.eliminated == set()

    def test_one_rule_removed(self):
        g = two_way_grammar()
        h = chain("a", "b", "c", "d")
        res = disambiguate(g, [h])
        assert len(res.eliminated) == 1 and res.lost == []
        # ties keep the lexicographically smallest derivation
        assert res.eliminated == {2}
        assert res.parses == {0: (0, 1)}
        assert enumerate_derivations(res.grammar, h) == [(0, 1)]

    def test_swapped_order_cannot_be_kept(self):
        g = swap_grammar()
        h = derive(g, (0, 1, 2, 3))
        res = disambiguate(g, [h])
        assert res.lost == [0] and res.parses == {}
        assert enumerate_derivations(res.grammar, h) == []

    def test_isomorphic_graphs_share_fate(self):
        g = two_way_grammar()
        h = chain("a", "b", "c", "d")
        twin = h.relabel_ids({v: "t" + v for v in h})
        res = disambiguate(g, [h, twin])
        assert res.parses[0] == res.parses[1]

    def test_must_kill_removes_a_graph(self):
        g = two_way_grammar()
        h = chain("a", "b", "c", "d")
        res = disambiguate(g, [], must_kill=[h])
        assert enumerate_derivations(res.grammar, h) == []

    def test_mismatched_parse_is_reported(self):
        g = two_way_grammar()
        with pytest.raises(InvariantViolation):
            disambiguate(g, [chain("a", "b", "c", "d")], parses={0: (1, 0)})
