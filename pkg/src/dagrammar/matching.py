"""Backtracking subgraph matcher for labeled digraphs.

Embeddings are injective maps from pattern nodes to host nodes that preserve
node labels, edge directions and edge labels. With ``induced=True`` (the
default) the image must not carry any host edge the pattern lacks, which is
the notion of occurrence used throughout the package.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set

from .graph import LabeledDigraph


def match_order(
    pattern: LabeledDigraph, host_label_freq: Mapping[str, int] = {}, pinned: Iterable[str] = ()
) -> List[str]:
    """Pinned nodes, then greedily the node most connected to those placed (rare labels first)."""
    order: List[str] = list(pinned)
    remaining = set(pattern) - set(order)
    while remaining:
        placed = set(order)

        def score(n: str):
            links = sum(1 for m in pattern.neighbors(n) if m in placed)
            deg = len(pattern.neighbors(n))
            return (-links, host_label_freq.get(pattern.label(n), 0), -deg, n)

        nxt = min(remaining, key=score)
        order.append(nxt)
        remaining.discard(nxt)
    return order


def iter_embeddings(
    pattern: LabeledDigraph,
    host: LabeledDigraph,
    *,
    induced: bool = True,
    candidates: Optional[Iterable[str]] = None,
    anchor: Optional[Mapping[str, str]] = None,
    label_match: Optional[Callable[[str, str], bool]] = None,
    order: Optional[Sequence[str]] = None,
    frozen: Iterable[str] = (),
) -> Iterator[Dict[str, str]]:
    """Yield every embedding of ``pattern`` into ``host``.

    ``candidates`` restricts the host nodes that may be used. ``anchor`` pins
    some pattern nodes to given host nodes. ``label_match(p_label, h_label)``
    overrides plain label equality. ``order`` fixes the pattern-node matching
    order (anchored nodes must come first); see :func:`match_order`. Nodes in
    ``frozen`` must map to host nodes of exactly the same in- and out-degree.
    """
    if len(pattern) == 0:
        yield {}
        return
    allowed: Optional[Set[str]] = set(candidates) if candidates is not None else None
    eq = label_match or (lambda a, b: a == b)

    anchor = dict(anchor or {})
    if order is None:
        order = match_order(pattern, Counter(host.nodes.values()), sorted(anchor))

    p_out = {p: pattern.out_degree(p) for p in pattern}
    p_in = {p: pattern.in_degree(p) for p in pattern}
    fixed = set(frozen)

    by_label: Dict[str, List[str]] = {}
    for h, l in host.nodes.items():
        if allowed is None or h in allowed:
            by_label.setdefault(l, []).append(h)
    for lst in by_label.values():
        lst.sort()

    mapping: Dict[str, str] = {}
    used: Set[str] = set()

    def feasible(p: str, h: str) -> bool:
        if h in used or (allowed is not None and h not in allowed):
            return False
        if not eq(pattern.label(p), host.label(h)):
            return False
        if host.out_degree(h) < p_out[p] or host.in_degree(h) < p_in[p]:
            return False
        if p in fixed and (host.out_degree(h) != p_out[p] or host.in_degree(h) != p_in[p]):
            return False
        p_succ = pattern.succ(p)
        p_pred = pattern.pred(p)
        h_succ = host.succ(h)
        h_pred = host.pred(h)
        for q, hq in mapping.items():
            ps = p_succ.get(q, frozenset())
            hs = h_succ.get(hq, frozenset())
            pp = p_pred.get(q, frozenset())
            hp = h_pred.get(hq, frozenset())
            if induced:
                if ps != hs or pp != hp:
                    return False
            elif not (ps <= hs and pp <= hp):
                return False
        return True

    def candidates_for(p: str) -> Iterable[str]:
        if p in anchor:
            return [anchor[p]]
        for q in pattern.pred(p):
            if q in mapping:
                return sorted(host.succ(mapping[q]))
        for q in pattern.succ(p):
            if q in mapping:
                return sorted(host.pred(mapping[q]))
        if label_match is None:
            return by_label.get(pattern.label(p), [])
        return sorted(h for lst in by_label.values() for h in lst)

    def extend(i: int) -> Iterator[Dict[str, str]]:
        if i == len(order):
            yield dict(mapping)
            return
        p = order[i]
        for h in candidates_for(p):
            if feasible(p, h):
                mapping[p] = h
                used.add(h)
                yield from extend(i + 1)
                del mapping[p]
                used.discard(h)

    yield from extend(0)


def has_embedding(pattern: LabeledDigraph, host: LabeledDigraph, **kw) -> bool:
    return next(iter_embeddings(pattern, host, **kw), None) is not None


def _profile(h: LabeledDigraph):
    return (
        len(h),
        len(h.edges),
        Counter(h.nodes.values()),
        Counter((h.label(n), h.in_degree(n), h.out_degree(n)) for n in h),
        Counter(l for _, l, _ in h.edges),
    )


def find_isomorphism(h1: LabeledDigraph, h2: LabeledDigraph) -> Optional[Dict[str, str]]:
    """A label-, direction- and edge-label-preserving bijection h1 -> h2, or None."""
    if _profile(h1) != _profile(h2):
        return None
    # an induced embedding between equal-sized graphs with equal edge counts is an isomorphism
    return next(iter_embeddings(h1, h2, induced=True), None)


def is_isomorphic(h1: LabeledDigraph, h2: LabeledDigraph) -> bool:
    return find_isomorphism(h1, h2) is not None
