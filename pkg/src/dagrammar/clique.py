"""Maximum-clique solvers over bitmask adjacency.

Three tiers trade quality for time:

* ``exact``: branch and bound with a greedy-coloring bound. Vertices are
  branched in increasing index order and only strictly larger cliques replace
  the incumbent, so among maximum cliques the lexicographically smallest
  (as a sorted index list) is returned.
* ``approx``: clique removal built on the Ramsey recursion of Boppana and
  Halldorsson (guarantee ``O(n / log^2 n)``).
* ``greedy``: ``k_restarts`` random-order greedy passes from distinct start
  vertices; the largest wins, ties go to the lexicographically smaller set.
"""

from __future__ import annotations

import random
from typing import List, Optional, Sequence, Tuple, Union

from .compat import CompatGraph
from .errors import BudgetExceeded, InputError, InvariantViolation

TIERS = ("exact", "approx", "greedy", "auto")
Adjacency = Sequence[int]


def _bits(m: int) -> List[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def is_clique(adj: Adjacency, members: Sequence[int]) -> bool:
    for k, i in enumerate(members):
        for j in members[k + 1:]:
            if i == j or not (adj[i] >> j & 1):
                return False
    return True


def _color_bound(adj: Adjacency, cand: int) -> int:
    """Number of colors used by greedy sequential coloring of ``cand``."""
    colors = 0
    rest = cand
    while rest:
        colors += 1
        avail = rest
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            rest &= ~low
            avail &= ~low & ~adj[v]
    return colors


def exact_clique(adj: Adjacency) -> List[int]:
    n = len(adj)
    best: List[int] = []
    cur: List[int] = []

    def expand(cand: int) -> None:
        nonlocal best
        if not cand:
            if len(cur) > len(best):
                best = list(cur)
            return
        if len(cur) + bin(cand).count("1") <= len(best):
            return
        if len(cur) + _color_bound(adj, cand) <= len(best):
            return
        while cand:
            if len(cur) + bin(cand).count("1") <= len(best):
                return
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            cur.append(v)
            expand(cand & adj[v])
            cur.pop()

    expand((1 << n) - 1)
    return best


def _ramsey(adj: Adjacency, nodes: int) -> Tuple[int, int]:
    """(clique, independent set) bitmasks from the Ramsey recursion, iteratively."""
    # frames: [nodes, v, stage, c1, i1]
    result: Tuple[int, int] = (0, 0)
    stack: List[list] = [[nodes, -1, 0, 0, 0]]
    while stack:
        fr = stack[-1]
        if fr[2] == 0:
            if not fr[0]:
                stack.pop()
                result = (0, 0)
                continue
            low = fr[0] & -fr[0]
            fr[1] = low.bit_length() - 1
            fr[2] = 1
            stack.append([fr[0] & adj[fr[1]], -1, 0, 0, 0])
        elif fr[2] == 1:
            fr[3], fr[4] = result[0] | (1 << fr[1]), result[1]
            fr[2] = 2
            stack.append([fr[0] & ~adj[fr[1]] & ~(1 << fr[1]), -1, 0, 0, 0])
        else:
            c2, i2 = result[0], result[1] | (1 << fr[1])
            c1, i1 = fr[3], fr[4]
            c = c1 if _pick(c1, c2) else c2
            i = i1 if _pick(i1, i2) else i2
            stack.pop()
            result = (c, i)
    return result


def _pick(a: int, b: int) -> bool:
    """True when mask ``a`` is preferred: larger, then lexicographically smaller."""
    ca, cb = bin(a).count("1"), bin(b).count("1")
    if ca != cb:
        return ca > cb
    return _bits(a) <= _bits(b)


def approx_clique(adj: Adjacency) -> List[int]:
    remaining = (1 << len(adj)) - 1
    best = 0
    while remaining:
        c, i = _ramsey(adj, remaining)
        if not _pick(best, c):
            best = c
        remaining &= ~i
    return _bits(best)


def greedy_clique(adj: Adjacency, k_restarts: int = 10, seed: Union[int, random.Random, None] = 0) -> List[int]:
    n = len(adj)
    if n == 0:
        return []
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    starts = rng.sample(range(n), min(k_restarts, n))
    best: List[int] = []
    for s in starts:
        order = list(range(n))
        rng.shuffle(order)
        members = [s]
        cand = adj[s]
        for v in order:
            if cand >> v & 1:
                members.append(v)
                cand &= adj[v]
        members.sort()
        if len(members) > len(best) or (len(members) == len(best) and members < best):
            best = members
    return best


def max_clique(
    g: Union[CompatGraph, Adjacency],
    tier: str = "auto",
    k_restarts: int = 10,
    seed: Union[int, random.Random, None] = 0,
    exact_cap: int = 40,
) -> List[int]:
    """A (maximum, for ``exact``) clique as a sorted list of vertex indices.

    ``auto`` runs ``exact`` up to ``exact_cap`` vertices and ``greedy`` above.
    ``exact`` on a larger graph raises :class:`BudgetExceeded`.
    """
    adj = g.adjacency if isinstance(g, CompatGraph) else list(g)
    n = len(adj)
    if tier not in TIERS:
        raise InputError(f"unknown clique tier {tier!r}; expected one of {TIERS}")
    if tier == "auto":
        tier = "exact" if n <= exact_cap else "greedy"
    if tier == "exact":
        if n > exact_cap:
            raise BudgetExceeded(
                f"exact clique on {n} vertices exceeds the cap of {exact_cap}; use the approx or greedy tier")
        res = exact_clique(adj)
    elif tier == "approx":
        res = approx_clique(adj)
    else:
        res = greedy_clique(adj, k_restarts, seed)
    if not is_clique(adj, res):
        raise InvariantViolation(f"{tier} solver returned a non-clique")
    return res
