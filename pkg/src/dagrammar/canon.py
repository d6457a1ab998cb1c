"""Canonical keys for labeled DAGs.

The digest is the classic bottom-up child-color aggregation: a node's color
is its label, optionally followed by a comma and the space-joined sorted colors
of its children; the graph string is the ``|``-joined sorted root colors and
the digest is its SHA-256. Such digests collide on DAGs whose unfoldings
coincide (a shared sink versus a duplicated one), so :class:`CanonicalKey` also
carries node/edge counts, the degree signature and an exact certificate
produced by color refinement with individualization.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InputError
from .graph import DEFAULT_EDGE_LABEL, LabeledDigraph, is_dag

DegreeSig = Tuple[Tuple[int, int, str], ...]


@dataclass(frozen=True, order=True)
class CanonicalKey:
    digest: str
    node_count: int
    edge_count: int
    degree_signature: DegreeSig
    certificate: str


def _child_token(color: str, labels) -> List[str]:
    out = []
    for lab in sorted(labels):
        out.append(color if lab == DEFAULT_EDGE_LABEL else f"[{lab}]{color}")
    return out


def wl_colors(h: LabeledDigraph) -> Dict[str, str]:
    colors: Dict[str, str] = {}
    # iterative post-order so deep chains don't hit the recursion limit
    for root in sorted(h):
        if root in colors:
            continue
        stack = [(root, False)]
        while stack:
            n, expanded = stack.pop()
            if n in colors:
                continue
            kids = h.succ(n)
            if not expanded and any(c not in colors for c in kids):
                stack.append((n, True))
                stack.extend((c, False) for c in sorted(kids) if c not in colors)
                continue
            if kids:
                toks = sorted(t for c, labs in kids.items() for t in _child_token(colors[c], labs))
                colors[n] = h.label(n) + "," + " ".join(toks)
            else:
                colors[n] = h.label(n)
    return colors


def wl_string(h: LabeledDigraph) -> str:
    colors = wl_colors(h)
    roots = [n for n in h if not h.pred(n)]
    return "|".join(sorted(colors[r] for r in roots))


def wl_hash(h: LabeledDigraph) -> str:
    if not is_dag(h):
        raise InputError("wl_hash requires a DAG")
    return hashlib.sha256(wl_string(h).encode("utf-8")).hexdigest()


def degree_signature(h: LabeledDigraph) -> DegreeSig:
    return tuple(sorted((h.in_degree(n), h.out_degree(n), h.label(n)) for n in h))


# -- exact certificate -----------------------------------------------------


def _refine(h: LabeledDigraph, nodes: Sequence[str], colors: Dict[str, int]) -> Dict[str, int]:
    """Iterated color refinement; returned colors are ranks of canonical signatures."""
    while True:
        sigs = {}
        for n in nodes:
            ins = tuple(sorted((colors[m], tuple(sorted(ls))) for m, ls in h.pred(n).items()))
            outs = tuple(sorted((colors[m], tuple(sorted(ls))) for m, ls in h.succ(n).items()))
            sigs[n] = (colors[n], ins, outs)
        ranks = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
        new = {n: ranks[sigs[n]] for n in nodes}
        if len(ranks) == len(set(colors.values())):
            return new
        colors = new


def _twin_signature(h: LabeledDigraph, n: str):
    return (
        h.label(n),
        tuple(sorted((m, tuple(sorted(ls))) for m, ls in h.pred(n).items())),
        tuple(sorted((m, tuple(sorted(ls))) for m, ls in h.succ(n).items())),
    )


def _encode(h: LabeledDigraph, nodes: Sequence[str], colors: Dict[str, int]) -> str:
    order = sorted(nodes, key=lambda n: colors[n])
    pos = {n: i for i, n in enumerate(order)}
    labels = ",".join(h.label(n) for n in order)
    edges = sorted((pos[s], lab, pos[d]) for s, lab, d in h.edges)
    return labels + ";" + ",".join(f"{s}>{d}:{lab}" for s, lab, d in edges)


def certificate(h: LabeledDigraph) -> str:
    """Lexicographically least encoding over all refinement leaves.

    Two graphs receive the same certificate iff they are isomorphic. Twin
    nodes (same label and identical neighborhoods) are interchangeable, so only
    one member of each twin class is individualized.
    """
    nodes = sorted(h)
    if not nodes:
        return ";"
    label_rank = {l: i for i, l in enumerate(sorted(h.label_set()))}
    start = _refine(h, nodes, {n: label_rank[h.label(n)] for n in nodes})
    best: List[Optional[str]] = [None]

    def search(colors: Dict[str, int]) -> None:
        cells: Dict[int, List[str]] = {}
        for n in nodes:
            cells.setdefault(colors[n], []).append(n)
        if len(cells) == len(nodes):
            enc = _encode(h, nodes, colors)
            if best[0] is None or enc < best[0]:
                best[0] = enc
            return
        # first smallest non-singleton cell; choice depends only on colors
        target = min((len(c), col) for col, c in cells.items() if len(c) > 1)[1]
        seen_twins = set()
        for v in sorted(cells[target]):
            tw = _twin_signature(h, v)
            key = (tw[0], tuple(x for x in tw[1] if x[0] != v), tuple(x for x in tw[2] if x[0] != v))
            if key in seen_twins:
                continue
            seen_twins.add(key)
            indiv = {n: (2 * c + (0 if n == v else 1)) for n, c in colors.items()}
            search(_refine(h, nodes, indiv))

    search(start)
    return hashlib.sha256(best[0].encode("utf-8")).hexdigest()


def canonical_key(h: LabeledDigraph) -> CanonicalKey:
    if not is_dag(h):
        raise InputError("canonical_key requires a DAG")
    return CanonicalKey(
        digest=hashlib.sha256(wl_string(h).encode("utf-8")).hexdigest(),
        node_count=len(h),
        edge_count=len(h.edges),
        degree_signature=degree_signature(h),
        certificate=certificate(h),
    )
