"""JSON / JSONL / CSV serialization for datasets, grammars, parses and traces.

Dataset file::

    {"labels": {"sigma": [...], "nonterminals": [...], "edge_labels": [...], "start": "black"},
     "graphs": [{"nodes": [{"id": "a", "label": "x"}, ...],
                 "edges": [{"src": "a", "dst": "b", "label": "black"}, ...]}, ...]}

``labels`` is optional (inferred from the graphs) and so is an edge ``label``
(defaults to ``black``). Output is written with sorted keys so equal objects
serialize to equal bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .data import DagDataset, LabelVocabulary
from .errors import InputError
from .grammar import Derivation, Grammar, Instruction, Rule
from .graph import DEFAULT_EDGE_LABEL, LabeledDigraph

PathLike = Union[str, Path]


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def graph_from_dict(d: Mapping[str, Any], where: str = "graph") -> LabeledDigraph:
    try:
        nodes = {str(n["id"]): str(n["label"]) for n in d["nodes"]}
        if len(nodes) != len(d["nodes"]):
            raise InputError(f"{where}: duplicate node ids")
        edges = [(str(e["src"]), str(e.get("label", DEFAULT_EDGE_LABEL)), str(e["dst"])) for e in d.get("edges", [])]
    except (KeyError, TypeError) as exc:
        raise InputError(f"{where}: malformed graph ({exc!r})") from None
    try:
        return LabeledDigraph(nodes, edges)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def dataset_from_dict(d: Mapping[str, Any]) -> DagDataset:
    if not isinstance(d, Mapping) or "graphs" not in d:
        raise InputError("dataset must be an object with a 'graphs' list")
    graphs = [graph_from_dict(g, f"graph {i}") for i, g in enumerate(d["graphs"])]
    if not graphs:
        raise InputError("dataset is empty")
    vocab = LabelVocabulary.from_dict(d["labels"]) if d.get("labels") else None
    return DagDataset.from_graphs(graphs, vocab)


def dataset_to_dict(ds: DagDataset) -> Dict[str, Any]:
    return {"labels": ds.vocab.to_dict(), "graphs": [g.to_dict() for g in ds.graphs]}


def load_dataset(path: PathLike) -> DagDataset:
    return dataset_from_dict(_read_json(path))


def save_dataset(ds: DagDataset, path: PathLike) -> None:
    Path(path).write_text(dumps(dataset_to_dict(ds)), encoding="utf-8")


def grammar_from_dict(d: Mapping[str, Any]) -> Grammar:
    try:
        vocab = LabelVocabulary.from_dict(d["labels"])
        if d.get("start", vocab.start) != vocab.start:
            raise InputError("grammar 'start' disagrees with its label block")
        rules = []
        for i, r in enumerate(d["rules"]):
            daughter = graph_from_dict(r["daughter"], f"rule {i} daughter")
            instrs = [Instruction.from_dict(x) for x in r.get("instructions", [])]
            rules.append(Rule(int(r["id"]), str(r["lhs"]), daughter, instrs))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed grammar ({exc!r})") from None
    return Grammar(vocab, rules)


def load_grammar(path: PathLike) -> Grammar:
    return grammar_from_dict(_read_json(path))


def save_grammar(g: Grammar, path: PathLike) -> None:
    Path(path).write_text(dumps(g.to_dict()), encoding="utf-8")


def parses_to_lines(parses: Mapping[int, Derivation]) -> str:
    return "".join(dumps({"graph_index": i, "rule_ids": list(p)}) for i, p in sorted(parses.items()))


def save_parses(parses: Mapping[int, Derivation], path: PathLike) -> None:
    Path(path).write_text(parses_to_lines(parses), encoding="utf-8")


def load_parses(path: PathLike) -> Dict[int, Derivation]:
    out: Dict[int, Derivation] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    for k, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out[int(rec["graph_index"])] = tuple(int(r) for r in rec["rule_ids"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}:{k + 1}: malformed parse record ({exc})") from None
    return out


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
