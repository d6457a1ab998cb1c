"""Label vocabularies and datasets of DAGs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import InputError
from .graph import DEFAULT_EDGE_LABEL, LabeledDigraph, is_dag, is_weakly_connected


@dataclass(frozen=True)
class LabelVocabulary:
    sigma: FrozenSet[str]
    nonterminals: FrozenSet[str] = frozenset({"black"})
    edge_labels: FrozenSet[str] = frozenset({DEFAULT_EDGE_LABEL})
    start: str = "black"

    def __post_init__(self):
        object.__setattr__(self, "sigma", frozenset(self.sigma) | frozenset(self.nonterminals) | {self.start})
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals) | {self.start})
        object.__setattr__(self, "edge_labels", frozenset(self.edge_labels) or frozenset({DEFAULT_EDGE_LABEL}))

    @property
    def terminals(self) -> FrozenSet[str]:
        return self.sigma - self.nonterminals

    def extend(self, nonterminals: Iterable[str] = (), terminals: Iterable[str] = ()) -> "LabelVocabulary":
        nts = self.nonterminals | set(nonterminals)
        return LabelVocabulary(self.sigma | nts | set(terminals), nts, self.edge_labels, self.start)

    def to_dict(self) -> dict:
        return {
            "sigma": sorted(self.sigma),
            "nonterminals": sorted(self.nonterminals),
            "edge_labels": sorted(self.edge_labels),
            "start": self.start,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabelVocabulary":
        try:
            return cls(
                sigma=frozenset(d.get("sigma", ())),
                nonterminals=frozenset(d.get("nonterminals", ("black",))),
                edge_labels=frozenset(d.get("edge_labels", (DEFAULT_EDGE_LABEL,))),
                start=d.get("start", "black"),
            )
        except TypeError as exc:
            raise InputError(f"malformed label block: {exc}") from None


@dataclass(frozen=True)
class DagDataset:
    graphs: Tuple[LabeledDigraph, ...]
    vocab: LabelVocabulary

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))

    def __len__(self) -> int:
        return len(self.graphs)

    def validate(self) -> None:
        """Raise :class:`InputError` naming the first offending graph."""
        terms = self.vocab.terminals
        for i, g in enumerate(self.graphs):
            if len(g) == 0:
                raise InputError(f"graph {i}: empty graph")
            bad = g.label_set() - terms
            if bad:
                raise InputError(f"graph {i}: unknown or nonterminal node labels {sorted(bad)}")
            bad_e = g.edge_label_set() - self.vocab.edge_labels
            if bad_e:
                raise InputError(f"graph {i}: unknown edge labels {sorted(bad_e)}")
            if not is_dag(g):
                raise InputError(f"graph {i}: not acyclic")
            if not is_weakly_connected(g):
                raise InputError(f"graph {i}: not weakly connected")

    @classmethod
    def from_graphs(cls, graphs: Sequence[LabeledDigraph], vocab: Optional[LabelVocabulary] = None) -> "DagDataset":
        if vocab is None:
            labels = set().union(*(g.label_set() for g in graphs)) if graphs else set()
            elabs = set().union(*(g.edge_label_set() for g in graphs)) if graphs else set()
            vocab = LabelVocabulary(frozenset(labels), edge_labels=frozenset(elabs or {DEFAULT_EDGE_LABEL}))
        ds = cls(tuple(graphs), vocab)
        ds.validate()
        return ds
