import random
from itertools import permutations

from networkx.algorithms.isomorphism import DiGraphMatcher

from dagrammar.graph import LabeledDigraph, induced_subgraph
from dagrammar.matching import has_embedding, iter_embeddings
from dagutil import random_dag, to_nx


def brute_embeddings(pattern, host):
    """All injective, label-preserving, node-induced maps (no search smarts)."""
    pn = sorted(pattern)
    out = set()
    for image in permutations(sorted(host), len(pn)):
        m = dict(zip(pn, image))
        if any(pattern.label(p) != host.label(m[p]) for p in pn):
            continue
        if all(pattern.edge_labels(a, b) == host.edge_labels(m[a], m[b]) for a in pn for b in pn if a != b):
            out.add(tuple(sorted(m.items())))
    return out


def test_matches_brute_force():
    rng = random.Random(7)
    for _ in range(60):
        host = random_dag(rng, 4, 7, labels=("a", "b"), extra_edge_p=0.3)
        pattern = random_dag(rng, 2, 3, labels=("a", "b"), extra_edge_p=0.3)
        got = {tuple(sorted(m.items())) for m in iter_embeddings(pattern, host)}
        assert got == brute_embeddings(pattern, host)


def test_matches_networkx_induced_matcher():
    rng = random.Random(8)
    for _ in range(40):
        host = random_dag(rng, 6, 10, labels=("a", "b", "c"))
        vs = rng.sample(sorted(host), 3)
        pattern = induced_subgraph(host, vs)
        gm = DiGraphMatcher(to_nx(host), to_nx(pattern),
                            node_match=lambda a, b: a["label"] == b["label"],
                            edge_match=lambda a, b: a["labels"] == b["labels"])
        expected = {tuple(sorted((p, h) for h, p in m.items())) for m in gm.subgraph_isomorphisms_iter()}
        got = {tuple(sorted(m.items())) for m in iter_embeddings(pattern, host)}
        assert got == expected


def test_anchor_pins_a_node():
    host = LabeledDigraph({"a": "A", "b": "A", "c": "A"}, [("a", "black", "b"), ("b", "black", "c")])
    edge = LabeledDigraph({"0": "A", "1": "A"}, [("0", "black", "1")])
    assert len(list(iter_embeddings(edge, host))) == 2
    assert [m["1"] for m in iter_embeddings(edge, host, anchor={"0": "b"})] == ["c"]


def test_induced_semantics_rejects_extra_edges():
    host = LabeledDigraph({"a": "A", "b": "B", "c": "C"},
                          [("a", "black", "b"), ("b", "black", "c"), ("a", "black", "c")])
    path = LabeledDigraph({"0": "A", "1": "B", "2": "C"}, [("0", "black", "1"), ("1", "black", "2")])
    assert not has_embedding(path, host)


def test_frozen_nodes_need_exact_degree():
    host = LabeledDigraph({"a": "A", "b": "B", "c": "C"}, [("a", "black", "b"), ("b", "black", "c")])
    pat = LabeledDigraph({"0": "A", "1": "B"}, [("0", "black", "1")])
    assert has_embedding(pat, host)
    assert has_embedding(pat, host, frozen=["0"])
    assert not has_embedding(pat, host, frozen=["1"])
