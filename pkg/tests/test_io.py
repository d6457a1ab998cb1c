import json

import pytest

from dagrammar import io
from dagrammar.data import DagDataset
from dagrammar.errors import InputError
from dagrammar.induction import learn_grammar
from dagutil import random_dataset


@pytest.fixture
def dataset():
    return DagDataset.from_graphs(random_dataset(4, count=6))


def test_dataset_round_trip(tmp_path, dataset):
    p = tmp_path / "d.json"
    io.save_dataset(dataset, p)
    assert io.load_dataset(p) == dataset


def test_grammar_and_parses_round_trip(tmp_path, dataset):
    res = learn_grammar(dataset)
    io.save_grammar(res.grammar, tmp_path / "g.json")
    io.save_parses(res.parses, tmp_path / "p.jsonl")
    assert io.load_grammar(tmp_path / "g.json") == res.grammar
    assert io.load_parses(tmp_path / "p.jsonl") == res.parses


def test_serialization_is_byte_stable(tmp_path, dataset):
    io.save_dataset(dataset, tmp_path / "a.json")
    io.save_dataset(io.load_dataset(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_edge_label_defaults_to_black():
    ds = io.dataset_from_dict({"graphs": [{"nodes": [{"id": "a", "label": "x"}, {"id": "b", "label": "y"}],
                                           "edges": [{"src": "a", "dst": "b"}]}]})
    assert ds.graphs[0].edges == {("a", "black", "b")}


def write(tmp_path, obj):
    p = tmp_path / "bad.json"
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


@pytest.mark.parametrize("doc, needle", [
    ("{not json", "invalid JSON"),
    ({"graphs": []}, "empty"),
    ({"nope": 1}, "graphs"),
    ({"graphs": [{"nodes": [{"id": "a"}]}]}, "graph 0"),
    ({"graphs": [{"nodes": [{"id": "a", "label": "x"}], "edges": []},
                 {"nodes": [{"id": "a", "label": "x"}, {"id": "b", "label": "x"}],
                  "edges": [{"src": "a", "dst": "b"}, {"src": "b", "dst": "a"}]}]}, "graph 1: not acyclic"),
    ({"graphs": [{"nodes": [{"id": "a", "label": "x"}, {"id": "b", "label": "x"}], "edges": []}]},
     "graph 0: not weakly connected"),
    ({"labels": {"sigma": ["x"]}, "graphs": [{"nodes": [{"id": "a", "label": "q"}]}]}, "graph 0: unknown"),
])
def test_malformed_dataset_names_the_problem(tmp_path, doc, needle):
    with pytest.raises(InputError, match=needle):
        io.load_dataset(write(tmp_path, doc))


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        io.load_dataset(tmp_path / "nothing.json")


def test_malformed_parse_line(tmp_path):
    p = tmp_path / "p.jsonl"
    p.write_text('{"graph_index": 0, "rule_ids": [1]}\n{"graph_index": "x"}\n')
    with pytest.raises(InputError, match=":2:"):
        io.load_parses(p)


def test_csv_round_trip(tmp_path):
    io.write_csv(tmp_path / "t.csv", ("a", "b"), [(1, 2), (3, 4)])
    assert io.read_csv(tmp_path / "t.csv") == [{"a": "1", "b": "2"}, {"a": "3", "b": "4"}]
