"""Immutable node- and edge-labeled directed graphs."""

from __future__ import annotations

from collections import deque
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import InputError

DEFAULT_EDGE_LABEL = "black"

Edge = Tuple[str, str, str]  # (src, label, dst)


class LabeledDigraph:
    """A node-labeled, edge-labeled directed graph without self-loops.

    Node ids are opaque strings. Edges are ``(src, label, dst)`` triples and
    each triple occurs at most once, so two nodes may be joined by several
    edges only if their labels differ. Instances never change after
    construction; every operation returns a new graph.
    """

    __slots__ = ("_labels", "_edges", "_succ", "_pred", "_hash")

    def __init__(self, nodes: Mapping[str, str], edges: Iterable[Edge] = ()):
        labels = {str(n): str(l) for n, l in nodes.items()}
        succ: Dict[str, Dict[str, FrozenSet[str]]] = {n: {} for n in labels}
        pred: Dict[str, Dict[str, FrozenSet[str]]] = {n: {} for n in labels}
        edge_set = set()
        for src, lab, dst in edges:
            if src not in labels or dst not in labels:
                missing = src if src not in labels else dst
                raise InputError(f"edge ({src!r}, {lab!r}, {dst!r}) references undeclared node {missing!r}")
            if src == dst:
                raise InputError(f"self-loop on node {src!r} is not allowed")
            edge_set.add((src, lab, dst))
        for src, lab, dst in edge_set:
            succ[src][dst] = succ[src].get(dst, frozenset()) | {lab}
            pred[dst][src] = pred[dst].get(src, frozenset()) | {lab}
        self._labels = labels
        self._edges = frozenset(edge_set)
        self._succ = succ
        self._pred = pred
        self._hash: Optional[int] = None

    # -- basic accessors -------------------------------------------------

    @property
    def nodes(self) -> Mapping[str, str]:
        return MappingProxyType(self._labels)

    @property
    def edges(self) -> FrozenSet[Edge]:
        return self._edges

    def label(self, n: str) -> str:
        try:
            return self._labels[n]
        except KeyError:
            raise InputError(f"unknown node {n!r}") from None

    def succ(self, n: str) -> Mapping[str, FrozenSet[str]]:
        """Successors of ``n`` mapped to the labels of the connecting edges."""
        return self._succ[n]

    def pred(self, n: str) -> Mapping[str, FrozenSet[str]]:
        return self._pred[n]

    def neighbors(self, n: str) -> Set[str]:
        return set(self._succ[n]) | set(self._pred[n])

    def edge_labels(self, src: str, dst: str) -> FrozenSet[str]:
        return self._succ[src].get(dst, frozenset())

    def in_degree(self, n: str) -> int:
        return sum(len(ls) for ls in self._pred[n].values())

    def out_degree(self, n: str) -> int:
        return sum(len(ls) for ls in self._succ[n].values())

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, n: object) -> bool:
        return n in self._labels

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledDigraph):
            return NotImplemented
        return self._labels == other._labels and self._edges == other._edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._labels.items()), self._edges))
        return self._hash

    def __repr__(self) -> str:
        return f"LabeledDigraph(nodes={len(self)}, edges={len(self._edges)})"

    def label_set(self) -> Set[str]:
        return set(self._labels.values())

    def edge_label_set(self) -> Set[str]:
        return {lab for _, lab, _ in self._edges}

    def sorted_edges(self) -> List[Edge]:
        return sorted(self._edges)

    # -- derived graphs --------------------------------------------------

    def relabel_ids(self, mapping: Mapping[str, str]) -> "LabeledDigraph":
        """Rename node ids; ``mapping`` must be injective over the graph's nodes."""
        nodes = {mapping[n]: l for n, l in self._labels.items()}
        if len(nodes) != len(self._labels):
            raise InputError("id mapping is not injective")
        return LabeledDigraph(nodes, ((mapping[s], l, mapping[d]) for s, l, d in self._edges))

    def with_labels(self, relabel: Mapping[str, str]) -> "LabeledDigraph":
        """Replace node labels according to ``relabel`` (label -> label)."""
        return LabeledDigraph({n: relabel.get(l, l) for n, l in self._labels.items()}, self._edges)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n, "label": l} for n, l in sorted(self._labels.items())],
            "edges": [{"src": s, "dst": d, "label": l} for s, l, d in sorted(self._edges)],
        }


def is_dag(h: LabeledDigraph) -> bool:
    """True iff ``h`` has no directed cycle (Kahn's algorithm)."""
    indeg = {n: len(h.pred(n)) for n in h}
    queue = deque(n for n, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        n = queue.popleft()
        seen += 1
        for m in h.succ(n):
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    return seen == len(h)


def weak_components(h: LabeledDigraph) -> List[Set[str]]:
    """Weakly connected components, ordered by their smallest node id."""
    seen: Set[str] = set()
    comps = []
    for start in sorted(h):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in h.neighbors(n):
                if m not in comp:
                    comp.add(m)
                    stack.append(m)
        seen |= comp
        comps.append(comp)
    return comps


def is_weakly_connected(h: LabeledDigraph) -> bool:
    if len(h) == 0:
        return False
    return len(weak_components(h)) == 1


def induced_subgraph(h: LabeledDigraph, vs: Iterable[str]) -> LabeledDigraph:
    keep = set(vs)
    unknown = keep - set(h)
    if unknown:
        raise InputError(f"unknown node ids: {sorted(unknown)}")
    return LabeledDigraph(
        {n: h.label(n) for n in keep},
        ((s, l, d) for s, l, d in h.edges if s in keep and d in keep),
    )


def topological_order(h: LabeledDigraph) -> List[str]:
    """Deterministic topological order (ties broken by node id)."""
    import heapq

    indeg = {n: len(h.pred(n)) for n in h}
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for m in h.succ(n):
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, m)
    if len(order) != len(h):
        raise InputError("graph has a directed cycle")
    return order


def reachable_avoiding(h: LabeledDigraph, source: str, blocked: Set[str]) -> Set[str]:
    """Nodes reachable from ``source`` by directed paths whose interior avoids ``blocked``."""
    out: Set[str] = set()
    stack = [source]
    while stack:
        n = stack.pop()
        for m in h.succ(n):
            if m in blocked or m in out:
                continue
            out.add(m)
            stack.append(m)
    return out


def composite_graph(graphs: Sequence[LabeledDigraph]) -> Tuple[LabeledDigraph, Dict[str, int]]:
    """Disjoint union of ``graphs``; node ``v`` of graph ``i`` becomes ``"i/v"``.

    Returns the union and a map from every union node to its graph index.
    """
    if not graphs:
        raise InputError("cannot build a composite graph from an empty dataset")
    nodes: Dict[str, str] = {}
    edges: List[Edge] = []
    owner: Dict[str, int] = {}
    for i, g in enumerate(graphs):
        for n, l in g.nodes.items():
            nid = f"{i}/{n}"
            nodes[nid] = l
            owner[nid] = i
        edges.extend((f"{i}/{s}", l, f"{i}/{d}") for s, l, d in g.edges)
    return LabeledDigraph(nodes, edges), owner


def split_composite(h: LabeledDigraph, owner: Mapping[str, int]) -> Dict[int, LabeledDigraph]:
    """Inverse of :func:`composite_graph` for a union whose ids carry an ``i/`` prefix."""
    parts: Dict[int, Dict[str, str]] = {}
    for n, l in h.nodes.items():
        parts.setdefault(owner[n], {})[n.split("/", 1)[1]] = l
    edges: Dict[int, List[Edge]] = {i: [] for i in parts}
    for s, l, d in h.edges:
        edges[owner[s]].append((s.split("/", 1)[1], l, d.split("/", 1)[1]))
    return {i: LabeledDigraph(parts[i], edges[i]) for i in sorted(parts)}
