import random

import pytest
from hypothesis import given, settings, strategies as st

from dagrammar.clique import approx_clique, exact_clique, greedy_clique, is_clique, max_clique
from dagrammar.errors import BudgetExceeded, InputError
from dagutil import brute_max_clique_size


def random_adj(rng, n, p):
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def complete(n):
    full = (1 << n) - 1
    return [full & ~(1 << i) for i in range(n)]


@pytest.mark.parametrize("tier", ["exact", "approx", "greedy", "auto"])
def test_complete_graph(tier):
    assert max_clique(complete(5), tier) == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("tier", ["exact", "approx", "greedy"])
def test_edgeless_graph(tier):
    assert len(max_clique([0, 0, 0], tier)) == 1


def test_five_cycle():
    adj = [0] * 5
    for i in range(5):
        j = (i + 1) % 5
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    assert brute_max_clique_size(adj) == 2
    assert len(max_clique(adj, "exact")) == 2


def test_empty_graph():
    assert max_clique([], "exact") == []


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 15), st.floats(0.1, 0.9), st.integers(0, 2**32))
def test_solvers_against_brute_force(n, p, seed):
    adj = random_adj(random.Random(seed), n, p)
    best = brute_max_clique_size(adj)
    ex = exact_clique(adj)
    assert is_clique(adj, ex) and len(ex) == best
    for res in (approx_clique(adj), greedy_clique(adj, 10, seed)):
        assert is_clique(adj, res) and 1 <= len(res) <= best


def test_exact_returns_lexicographically_smallest_maximum():
    # two disjoint triangles: {0,1,2} and {3,4,5}
    adj = [0] * 6
    for tri in ((3, 4, 5), (0, 1, 2)):
        for i in tri:
            for j in tri:
                if i != j:
                    adj[i] |= 1 << j
    assert exact_clique(adj) == [0, 1, 2]


def test_exact_over_cap_is_refused():
    with pytest.raises(BudgetExceeded, match="approx or greedy"):
        max_clique([0] * 41, "exact")
    assert len(max_clique([0] * 41, "exact", exact_cap=41)) == 1


def test_unknown_tier():
    with pytest.raises(InputError):
        max_clique([0], "magic")


def test_greedy_is_seed_deterministic():
    adj = random_adj(random.Random(3), 60, 0.4)
    assert greedy_clique(adj, 10, 7) == greedy_clique(adj, 10, 7)


def test_auto_downgrades_above_the_cap():
    adj = random_adj(random.Random(4), 50, 0.3)
    res = max_clique(adj, "auto", exact_cap=40)
    assert res == max_clique(adj, "greedy", exact_cap=40)
