"""Redirections, instruction bounds and the occurrence compatibility graph.

Contracting an occurrence replaces it by one nonterminal node; every boundary
neighbor ``y`` is re-attached by a single edge whose direction ``d_y`` and
label ``beta_y`` we are free to pick. Such a choice (a *redirection*) fixes,
for every instruction that could fire on ``y``, whether it must be part of the
rule (its edge is present: *inset*) or must not be (absent: *outset*).

Two realizations can share one rule iff neither needs an instruction the other
forbids. Instruction sets are interned to bit positions so bounds are plain
integers and compatibility is two ``&`` operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .errors import InvariantViolation
from .grammar import DIRECTIONS, IN, OUT, Instruction
from .graph import DEFAULT_EDGE_LABEL, LabeledDigraph, reachable_avoiding
from .mining import Occurrence

Redirection = Tuple[Tuple[str, str, str], ...]  # sorted (neighbor, d, beta)
Host = Union[LabeledDigraph, Mapping[int, LabeledDigraph]]


def _host(h: Host, occ: Occurrence) -> LabeledDigraph:
    return h if isinstance(h, LabeledDigraph) else h[occ.component]


def boundary(h: LabeledDigraph, image: Iterable[str]) -> List[str]:
    inside = set(image)
    out: Set[str] = set()
    for n in inside:
        out |= h.neighbors(n)
    return sorted(out - inside)


def precedence_graph(h: LabeledDigraph, occ: Occurrence) -> Set[Tuple[str, str]]:
    """Pairs ``(y, y2)`` of boundary nodes joined by a path that avoids the occurrence."""
    image = occ.image
    bnd = boundary(h, image)
    bset = set(bnd)
    pairs = set()
    for y in bnd:
        for z in reachable_avoiding(h, y, image) & bset:
            if z != y:
                pairs.add((y, z))
    return pairs


def enumerate_redirections(
    h: LabeledDigraph, occ: Occurrence, cap: int = 10, edge_labels: Sequence[str] = (DEFAULT_EDGE_LABEL,)
) -> List[Redirection]:
    """Acyclicity-preserving redirections, in lexicographic choice order.

    Contraction closes a cycle exactly when some ``y`` reaching ``y2`` outside
    the occurrence gets ``out`` while ``y2`` gets ``in``; such assignments are
    skipped. Above ``cap`` boundary nodes only the two uniform assignments are
    produced (both are always acyclic).
    """
    bnd = boundary(h, occ.image)
    labels = sorted(edge_labels)
    if len(bnd) > cap:
        return [tuple((y, d, labels[0]) for y in bnd) for d in DIRECTIONS]
    prec = precedence_graph(h, occ)
    out: List[Redirection] = []
    chosen: List[Tuple[str, str, str]] = []

    def rec(i: int) -> None:
        if i == len(bnd):
            out.append(tuple(chosen))
            return
        y = bnd[i]
        for d in DIRECTIONS:
            clash = any(
                (d == IN and d0 == OUT and (y0, y) in prec) or (d == OUT and d0 == IN and (y, y0) in prec)
                for y0, d0, _ in chosen
            )
            if clash:
                continue
            for beta in labels:
                chosen.append((y, d, beta))
                rec(i + 1)
                chosen.pop()

    rec(0)
    return out


def _neighbor_bounds(
    h: LabeledDigraph, occ: Occurrence, y: str, d: str, beta: str, labels: Sequence[str]
) -> Tuple[List[Instruction], List[Instruction]]:
    ins, outs = [], []
    sigma = h.label(y)
    for x, hx in occ.node_map:
        present = {IN: h.pred(hx).get(y, frozenset()), OUT: h.succ(hx).get(y, frozenset())}
        for dp in DIRECTIONS:
            for gamma in labels:
                instr = Instruction(sigma, beta, gamma, x, d, dp)
                (ins if gamma in present[dp] else outs).append(instr)
    return ins, outs


def insets_and_outsets(
    h: LabeledDigraph,
    occ: Occurrence,
    dirs: Redirection,
    edge_labels: Sequence[str] = (DEFAULT_EDGE_LABEL,),
) -> Tuple[FrozenSet[Instruction], FrozenSet[Instruction]]:
    labels = sorted(edge_labels)
    inset: Set[Instruction] = set()
    outset: Set[Instruction] = set()
    for y, d, beta in dirs:
        a, b = _neighbor_bounds(h, occ, y, d, beta, labels)
        inset.update(a)
        outset.update(b)
    return frozenset(inset), frozenset(outset)


# -- compatibility graph -------------------------------------------------------


@dataclass(frozen=True)
class CompatNode:
    occurrence: Occurrence
    dirs: Redirection
    inset_mask: int
    outset_mask: int


@dataclass
class CompatGraph:
    """Realizations plus adjacency bitmasks; bit ``j`` of ``adjacency[i]`` is edge ``i-j``."""

    nodes: List[CompatNode]
    adjacency: List[int]
    table: List[Instruction] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def neighbors(self, i: int) -> List[int]:
        m, out, j = self.adjacency[i], [], 0
        while m:
            if m & 1:
                out.append(j)
            m >>= 1
            j += 1
        return out

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(len(self.nodes)) for j in self.neighbors(i) if i < j]

    def decode(self, mask: int) -> FrozenSet[Instruction]:
        return frozenset(self.table[j] for j in range(mask.bit_length()) if mask >> j & 1)

    def inset(self, i: int) -> FrozenSet[Instruction]:
        return self.decode(self.nodes[i].inset_mask)

    def outset(self, i: int) -> FrozenSet[Instruction]:
        return self.decode(self.nodes[i].outset_mask)


class Interner:
    def __init__(self) -> None:
        self.index: Dict[Instruction, int] = {}
        self.table: List[Instruction] = []

    def mask(self, instrs: Iterable[Instruction]) -> int:
        m = 0
        for ins in instrs:
            j = self.index.get(ins)
            if j is None:
                j = self.index[ins] = len(self.table)
                self.table.append(ins)
            m |= 1 << j
        return m


Realization = Tuple[Occurrence, Redirection, int, int]  # occurrence, dirs, inset mask, outset mask


def realizations(
    g: LabeledDigraph,
    occ: Occurrence,
    intern: "Interner",
    cap: int = 10,
    edge_labels: Sequence[str] = (DEFAULT_EDGE_LABEL,),
) -> List[Realization]:
    """All acyclic realizations of one occurrence, bounds encoded through ``intern``."""
    labels = sorted(edge_labels)
    cache: Dict[Tuple[str, str, str], Tuple[int, int]] = {}
    out: List[Realization] = []
    for dirs in enumerate_redirections(g, occ, cap, labels):
        ins = outs = 0
        for choice in dirs:
            part = cache.get(choice)
            if part is None:
                a, b = _neighbor_bounds(g, occ, *choice, labels)
                part = cache[choice] = (intern.mask(a), intern.mask(b))
            ins |= part[0]
            outs |= part[1]
        out.append((occ, dirs, ins, outs))
    return out


def assemble_compat_graph(
    candidates: Iterable[Realization],
    intern: "Interner",
    existing: Optional[Iterable[Instruction]] = None,
    dedupe: bool = False,
) -> CompatGraph:
    """Filter realizations for validity and connect the compatible ones."""
    exist_mask = None if existing is None else intern.mask(sorted(existing))
    nodes: List[CompatNode] = []
    seen: Set[Tuple[int, int, int]] = set()
    for occ, dirs, ins, outs in candidates:
        if exist_mask is None:
            if ins & outs:
                continue
        elif ins & ~exist_mask or outs & exist_mask:
            continue
        if dedupe:
            sig = (occ.component, ins, outs)
            if sig in seen:
                continue
            seen.add(sig)
        nodes.append(CompatNode(occ, dirs, ins, outs))

    # adjacency via classes of identical bounds
    classes: Dict[Tuple[int, int], int] = {}
    comp_mask: Dict[int, int] = {}
    for i, nd in enumerate(nodes):
        key = (nd.inset_mask, nd.outset_mask)
        classes[key] = classes.get(key, 0) | (1 << i)
        comp_mask[nd.occurrence.component] = comp_mask.get(nd.occurrence.component, 0) | (1 << i)
    keys = list(classes)
    reach: Dict[Tuple[int, int], int] = {}
    for a in keys:
        m = 0
        for b in keys:
            if not ((a[0] | b[0]) & (a[1] | b[1])):
                m |= classes[b]
        reach[a] = m
    adjacency = [
        reach[(nd.inset_mask, nd.outset_mask)] & ~comp_mask[nd.occurrence.component] for nd in nodes
    ]
    return CompatGraph(nodes, adjacency, intern.table)


def build_compat_graph(
    h: Host,
    occurrences: Sequence[Occurrence],
    existing: Optional[Iterable[Instruction]] = None,
    cap: int = 10,
    edge_labels: Sequence[str] = (DEFAULT_EDGE_LABEL,),
    dedupe: bool = False,
) -> CompatGraph:
    """Compatibility graph over the valid realizations of ``occurrences``.

    Without ``existing`` a realization is valid when its inset and outset are
    disjoint. With ``existing`` (reusing a rule) it must satisfy
    ``inset <= existing`` and ``outset & existing == {}``.

    Two realizations are adjacent when they lie in different components and
    their combined insets avoid their combined outsets. Restricting cliques to
    one realization per component keeps at most one nonterminal per component.

    ``dedupe`` keeps only the first realization per (component, inset, outset);
    this never changes the maximum clique size.
    """
    intern = Interner()
    cands: List[Realization] = []
    for occ in occurrences:
        cands.extend(realizations(_host(h, occ), occ, intern, cap, edge_labels))
    return assemble_compat_graph(cands, intern, existing, dedupe)


def or_reduce(cg: CompatGraph, clique: Sequence[int]) -> Tuple[FrozenSet[Instruction], FrozenSet[Instruction]]:
    """Union of the clique's insets (the rule's instructions) and of its outsets."""
    ins = outs = 0
    for i in clique:
        ins |= cg.nodes[i].inset_mask
        outs |= cg.nodes[i].outset_mask
    if ins & outs:
        raise InvariantViolation("clique members disagree on an instruction")
    return cg.decode(ins), cg.decode(outs)
