"""Beam-search frequent subgraph mining and exhaustive occurrence grounding.

Mining follows the Subdue recipe: grow connected patterns one node at a time
from single labeled nodes, group the grown instances by pattern, keep the
``beam_width`` best patterns per level, and report the overall best. A pattern
is always the node-induced subgraph of its instances.

In a component that already holds a nonterminal node only patterns covering
that node are considered, which keeps every parse a rooted path.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Collection, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .canon import CanonicalKey, canonical_key
from .graph import LabeledDigraph, induced_subgraph, weak_components
from .matching import find_isomorphism, iter_embeddings, match_order


@dataclass(frozen=True)
class Motif:
    pattern: LabeledDigraph
    support: int
    key: CanonicalKey

    @property
    def score(self) -> int:
        return self.support * (len(self.pattern) - 1)


@dataclass(frozen=True, order=True)
class Occurrence:
    component: int
    node_map: Tuple[Tuple[str, str], ...]  # sorted (pattern node, host node) pairs

    @classmethod
    def of(cls, component: int, mapping: Mapping[str, str]) -> "Occurrence":
        return cls(component, tuple(sorted(mapping.items())))

    @property
    def mapping(self) -> Dict[str, str]:
        return dict(self.node_map)

    @property
    def image(self) -> FrozenSet[str]:
        return frozenset(h for _, h in self.node_map)


Components = Mapping[int, LabeledDigraph]


def split_components(h: LabeledDigraph, owner: Optional[Mapping[str, int]] = None) -> Dict[int, LabeledDigraph]:
    """Component subgraphs keyed by ``owner`` index (or weak-component rank)."""
    if owner is None:
        return {i: induced_subgraph(h, c) for i, c in enumerate(weak_components(h))}
    groups: Dict[int, Set[str]] = {}
    for n in h:
        groups.setdefault(owner[n], set()).add(n)
    return {i: induced_subgraph(h, groups[i]) for i in sorted(groups)}


def nonterminal_node(g: LabeledDigraph, nonterminals: Collection[str]) -> Optional[str]:
    nts = sorted(n for n, l in g.nodes.items() if l in nonterminals)
    return nts[0] if nts else None


# -- grounding ---------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    nt_nodes: Tuple[str, ...]
    need: Tuple[Tuple[str, int], ...]
    free_order: Tuple[str, ...]
    anchored_order: Tuple[str, ...]


def _plan(pattern: LabeledDigraph, nonterminals: Collection[str]) -> _Plan:
    nts = tuple(sorted(p for p, l in pattern.nodes.items() if l in nonterminals))
    need = tuple(sorted(Counter(pattern.nodes.values()).items()))
    return _Plan(nts, need, tuple(match_order(pattern)), tuple(match_order(pattern, pinned=nts[:1])))


def ground_component(
    ci: int, g: LabeledDigraph, pattern: LabeledDigraph, nonterminals: Collection[str] = (), plan: Optional[_Plan] = None
) -> List[Occurrence]:
    """Occurrences of ``pattern`` in one component (see :func:`ground_occurrences`)."""
    plan = plan or _plan(pattern, nonterminals)
    if len(g) < len(pattern):
        return []
    have = Counter(g.nodes.values())
    if any(have[l] < c for l, c in plan.need):
        return []
    nt = nonterminal_node(g, nonterminals)
    if nt is not None:
        if len(plan.nt_nodes) != 1 or pattern.label(plan.nt_nodes[0]) != g.label(nt):
            return []
        maps = iter_embeddings(pattern, g, anchor={plan.nt_nodes[0]: nt}, order=plan.anchored_order)
    elif plan.nt_nodes:
        return []
    else:
        maps = iter_embeddings(pattern, g, order=plan.free_order)
    return sorted(Occurrence.of(ci, m) for m in maps)


def ground_in_components(
    comps: Components, pattern: LabeledDigraph, nonterminals: Collection[str] = ()
) -> List[Occurrence]:
    plan = _plan(pattern, nonterminals)
    out: List[Occurrence] = []
    for ci in sorted(comps):
        out.extend(ground_component(ci, comps[ci], pattern, nonterminals, plan))
    return out


def ground_occurrences(
    h: LabeledDigraph,
    pattern: LabeledDigraph,
    nonterminals: Collection[str] = (),
    owner: Optional[Mapping[str, int]] = None,
) -> List[Occurrence]:
    """Every node-induced embedding of ``pattern`` into ``h``, grouped by component.

    Components are indexed by ``owner`` when given (e.g. the graph index of a
    composite), otherwise by weak-component rank. Components holding a
    nonterminal only report embeddings whose image covers it.
    """
    return ground_in_components(split_components(h, owner), pattern, nonterminals)


# -- mining ------------------------------------------------------------------


@dataclass
class _Candidate:
    pattern: LabeledDigraph
    key: CanonicalKey
    # instance = (component, host node per pattern node, in pattern-node order "0".."k-1")
    instances: Dict[Tuple[int, FrozenSet[str]], Tuple[str, ...]]

    @property
    def support(self) -> int:
        return len(self.instances)

    @property
    def score(self) -> int:
        return self.support * (len(self.pattern) - 1)


def _grow(comps: Components, cand: _Candidate) -> Dict[tuple, Tuple[LabeledDigraph, List[Tuple[int, Tuple[str, ...]]]]]:
    """Extend every instance by one adjacent node; group by extension descriptor."""
    k = len(cand.pattern)
    groups: Dict[tuple, Tuple[LabeledDigraph, List[Tuple[int, Tuple[str, ...]]]]] = {}
    for (ci, _), hosts in cand.instances.items():
        g = comps[ci]
        pos = {h: i for i, h in enumerate(hosts)}
        frontier = set()
        for h in hosts:
            frontier |= g.neighbors(h)
        frontier -= set(hosts)
        for w in sorted(frontier):
            links = []
            for u, labs in g.pred(w).items():
                if u in pos:
                    links.extend((pos[u], "to", l) for l in labs)
            for u, labs in g.succ(w).items():
                if u in pos:
                    links.extend((pos[u], "from", l) for l in labs)
            desc = (g.label(w), tuple(sorted(links)))
            if desc not in groups:
                nodes = dict(cand.pattern.nodes)
                new = str(k)
                nodes[new] = g.label(w)
                edges = list(cand.pattern.edges)
                for p, kind, l in desc[1]:
                    edges.append((str(p), l, new) if kind == "to" else (new, l, str(p)))
                groups[desc] = (LabeledDigraph(nodes, edges), [])
            groups[desc][1].append((ci, hosts + (w,)))
    return groups


def _seed(comps: Components, nonterminals: Collection[str]) -> List[_Candidate]:
    by_label: Dict[str, Dict[Tuple[int, FrozenSet[str]], Tuple[str, ...]]] = {}
    for ci in sorted(comps):
        g = comps[ci]
        nt = nonterminal_node(g, nonterminals)
        starts = [nt] if nt is not None else sorted(g)
        for n in starts:
            by_label.setdefault(g.label(n), {})[(ci, frozenset([n]))] = (n,)
    out = []
    for lab in sorted(by_label):
        p = LabeledDigraph({"0": lab})
        out.append(_Candidate(p, canonical_key(p), by_label[lab]))
    return out


def _rank(c: _Candidate):
    return (-c.score, -len(c.pattern), c.key)


def mine_in_components(
    comps: Components,
    beam_width: Optional[int] = 4,
    max_motif_size: int = 8,
    top_n: int = 20,
    nonterminals: Collection[str] = (),
) -> List[Motif]:
    width = math.inf if beam_width is None else beam_width
    if width < 1:
        raise ValueError("beam_width must be >= 1")
    if max_motif_size < 2:
        raise ValueError("max_motif_size must be >= 2")
    level = _seed(comps, nonterminals)
    level.sort(key=_rank)
    if width != math.inf:
        level = level[: int(width)]
    best: Dict[CanonicalKey, _Candidate] = {}
    size = 1
    while level and size < max_motif_size:
        size += 1
        merged: Dict[CanonicalKey, _Candidate] = {}
        for cand in level:
            for pattern, insts in _grow(comps, cand).values():
                key = canonical_key(pattern)
                tgt = merged.get(key)
                if tgt is None:
                    tgt = merged[key] = _Candidate(pattern, key, {})
                    remap = None
                elif tgt.pattern == pattern:
                    remap = None
                else:
                    iso = find_isomorphism(pattern, tgt.pattern)
                    order = {v: i for i, v in enumerate(sorted(tgt.pattern, key=int))}
                    remap = [0] * len(pattern)
                    for p, q in iso.items():
                        remap[order[q]] = int(p)
                for ci, hosts in insts:
                    ident = (ci, frozenset(hosts))
                    if ident in tgt.instances:
                        continue
                    if remap is not None:
                        hosts = tuple(hosts[i] for i in remap)
                    tgt.instances[ident] = hosts
        nxt = sorted(merged.values(), key=_rank)
        for c in nxt:
            if c.support >= 2 and c.key not in best:
                best[c.key] = c
        level = nxt if width == math.inf else nxt[: int(width)]
    ranked = sorted(best.values(), key=_rank)[:top_n]
    return [Motif(c.pattern, c.support, c.key) for c in ranked]


def mine_motifs(
    h: LabeledDigraph,
    beam_width: Optional[int] = 4,
    max_motif_size: int = 8,
    top_n: int = 20,
    nonterminals: Collection[str] = (),
    owner: Optional[Mapping[str, int]] = None,
) -> List[Motif]:
    """Frequent connected patterns of ``h`` ranked by ``support * (|V| - 1)``.

    ``beam_width=None`` disables pruning, which turns the search into an
    exhaustive enumeration of connected induced patterns up to
    ``max_motif_size`` nodes. Only patterns with support >= 2 are returned.
    """
    return mine_in_components(split_components(h, owner), beam_width, max_motif_size, top_n, nonterminals)
