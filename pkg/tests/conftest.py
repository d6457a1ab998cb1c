import pytest

from dagrammar.graph import LabeledDigraph

B = "black"


def figure_one_graphs():
    """Three DAGs sharing the motif ``1:A <- 2:B`` next to a green neighbor ``g``.

    In every graph ``g`` receives an edge from node 2 and sends one to node 1
    (``2 -> g -> 1``); the graphs differ in what else hangs off ``g`` so that
    they are pairwise non-isomorphic.
    """
    core = {"1": "A", "2": "B", "g": "G"}
    core_edges = [("2", B, "1"), ("2", B, "g"), ("g", B, "1")]
    h1 = LabeledDigraph(core, core_edges)
    h2 = LabeledDigraph({**core, "c": "C"}, core_edges + [("g", B, "c")])
    h3 = LabeledDigraph({**core, "r": "R"}, core_edges + [("r", B, "g")])
    return [h1, h2, h3]


FIGURE_MOTIF = LabeledDigraph({"1": "A", "2": "B"}, [("2", B, "1")])


@pytest.fixture
def figure_one():
    return figure_one_graphs()
