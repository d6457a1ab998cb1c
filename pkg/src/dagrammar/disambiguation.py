"""Derivation enumeration and rule elimination.

:func:`enumerate_derivations` is a memoized forward search from the start
node. Every child of an intermediate is discarded unless it is a weakly
connected DAG no larger than the target whose terminal part embeds (node-
induced) into the target. Later steps never remove terminal edges and only add
edges at neighbors of the nonterminal, so every other terminal node must land
on a target node of identical degree; the prune is sound.

:func:`disambiguate` then removes rules so each kept graph has one derivation
left and every other graph has none.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .canon import CanonicalKey, canonical_key
from .config import RunConfig, parallel_map
from .errors import BudgetExceeded, Infeasible, InvariantViolation
from .grammar import Derivation, Grammar, Rule, expand, start_graph
from .graph import LabeledDigraph, induced_subgraph, is_dag, is_weakly_connected
from .matching import has_embedding, is_isomorphic

RuleSet = FrozenSet[int]


# -- enumeration -----------------------------------------------------------------


Embedding = Dict[str, str]


class _Target:
    """Per-target lookups shared by every extension step."""

    def __init__(self, h: LabeledDigraph) -> None:
        self.graph = h
        self.degree = {w: (h.in_degree(w), h.out_degree(w)) for w in h}
        self.by_label: Dict[str, List[str]] = {}
        for w in sorted(h):
            self.by_label.setdefault(h.label(w), []).append(w)


def _extend_embeddings(
    child: LabeledDigraph,
    parent_maps: Sequence[Embedding],
    new_terms: Sequence[str],
    recheck: Iterable[str],
    touching: Set[str],
    target: _Target,
) -> List[Embedding]:
    """Grow embeddings of the parent's terminal part over the new terminal nodes.

    ``recheck`` are old terminal nodes that stopped touching a nonterminal:
    their degree is now final and must match the target exactly. The same
    holds for every new node outside ``touching``.
    """
    h, hdeg = target.graph, target.degree
    cdeg = {t: (child.in_degree(t), child.out_degree(t)) for t in recheck}
    for u in new_terms:
        if u not in touching:
            cdeg[u] = (child.in_degree(u), child.out_degree(u))
    recheck = list(recheck)
    order = sorted(new_terms, key=lambda u: (-len(child.neighbors(u)), u))

    out: List[Embedding] = []
    for base in parent_maps:
        if any(cdeg[t] != hdeg[base[t]] for t in recheck):
            continue
        phi = dict(base)
        used = set(phi.values())

        def place(i: int) -> None:
            if i == len(order):
                out.append(dict(phi))
                return
            u = order[i]
            want = cdeg.get(u)
            for w in target.by_label.get(child.label(u), ()):
                if w in used or (want is not None and want != hdeg[w]):
                    continue
                ok = True
                for t, z in phi.items():
                    if child.edge_labels(t, u) != h.edge_labels(z, w) or child.edge_labels(u, t) != h.edge_labels(w, z):
                        ok = False
                        break
                if not ok:
                    continue
                phi[u] = w
                used.add(w)
                place(i + 1)
                del phi[u]
                used.discard(w)

        place(0)
    return out


def enumerate_derivations(
    g: Grammar,
    h: LabeledDigraph,
    *,
    max_derivations: Optional[int] = 10_000,
    timeout: Optional[float] = None,
    memo: bool = True,
) -> List[Derivation]:
    """Every derivation of ``g`` whose result is isomorphic to ``h``, sorted.

    Each search state carries all embeddings of its terminal part into ``h``;
    a child only extends them over the nodes the rule added. Raises
    :class:`BudgetExceeded` when more than ``max_derivations`` are found or
    ``timeout`` seconds elapse.
    """
    deadline = None if timeout is None else time.monotonic() + timeout
    target_labels = Counter(h.nodes.values())
    n_target = len(h)
    target = _Target(h)
    nts = g.vocab.nonterminals
    table: Dict[CanonicalKey, List[Tuple[LabeledDigraph, List[Derivation]]]] = {}
    on_path: Set[CanonicalKey] = set()

    # rules whose own terminal part cannot appear in h are never useful
    usable: Dict[str, List[Tuple[Rule, Counter, int]]] = {}
    for rule in g.rules:
        term = [v for v, l in rule.daughter.nodes.items() if l not in nts]
        need = Counter(rule.daughter.label(v) for v in term)
        if any(target_labels[l] < c for l, c in need.items()):
            continue
        if not has_embedding(induced_subgraph(rule.daughter, term), h):
            continue
        usable.setdefault(rule.lhs, []).append((rule, need, len(rule.daughter)))

    def lookup(key: CanonicalKey, state: LabeledDigraph) -> Optional[List[Derivation]]:
        if memo:
            for rep, val in table.get(key, ()):
                if is_isomorphic(rep, state):
                    return val
        return None

    def solve(state: LabeledDigraph, n: str, maps: List[Embedding], key: CanonicalKey, depth: int) -> List[Derivation]:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"derivation enumeration exceeded {timeout}s")
        on_path.add(key)
        old_touching = state.neighbors(n)
        have = Counter(l for l in state.nodes.values() if l not in nts)
        room = n_target - len(state) + 1
        out: List[Derivation] = []
        for rule, need, size in usable.get(state.label(n), ()):
            if size > room or any(target_labels[l] < have[l] + c for l, c in need.items()):
                continue
            child, copy_of, _ = expand(state, n, rule, prefix=f"{rule.id}.{depth}")
            pending = [copy_of[x] for x, l in rule.daughter.nodes.items() if l in nts]
            touching = child.neighbors(pending[0]) if pending else set()
            new_terms = [copy_of[x] for x, l in rule.daughter.nodes.items() if l not in nts]
            recheck = [t for t in old_touching if t not in touching]
            sub = _extend_embeddings(child, maps, new_terms, recheck, touching, target)
            if not sub or not is_weakly_connected(child) or not is_dag(child):
                continue
            if not pending:
                if is_isomorphic(child, h):
                    out.append((rule.id,))
                continue
            ckey = canonical_key(child)
            val = lookup(ckey, child)
            if val is None:
                if ckey in on_path:  # a cycle of unit rules: unboundedly many derivations, skip
                    continue
                val = solve(child, pending[0], sub, ckey, depth + 1)
                if memo:
                    table.setdefault(ckey, []).append((child, val))
            for rest in val:
                out.append((rule.id,) + rest)
                if max_derivations is not None and len(out) > max_derivations:
                    raise BudgetExceeded(f"more than {max_derivations} derivations")
        on_path.discard(key)
        return out

    if _unproducible_labels(g, h):
        return []
    root = start_graph(g)
    result = sorted(set(solve(root, next(iter(root)), [{}], canonical_key(root), 0)))
    if max_derivations is not None and len(result) > max_derivations:
        raise BudgetExceeded(f"more than {max_derivations} derivations")
    return result


def _unproducible_labels(g: Grammar, h: LabeledDigraph) -> bool:
    """True when ``h`` holds a label no rule can ever produce."""
    produced = set()
    for r in g.rules:
        produced |= r.daughter.label_set()
    return not h.label_set() <= produced


# -- hitting sets ----------------------------------------------------------------


def _normalize(sets: Iterable[Iterable[int]]) -> List[FrozenSet[int]]:
    out = [frozenset(s) for s in sets]
    for i, s in enumerate(out):
        if not s:
            raise Infeasible(f"set {i} is empty and cannot be hit")
    return out


def _first_unhit(sets: Sequence[FrozenSet[int]], chosen: FrozenSet[int]) -> Optional[FrozenSet[int]]:
    for s in sets:
        if not (s & chosen):
            return s
    return None


def exact_hitting_set(sets: Iterable[Iterable[int]]) -> Set[int]:
    """Minimum-cardinality hitting set; ties go to the lexicographically smallest sorted tuple.

    Iterative deepening: every hitting set contains an element of the first set
    it has not hit yet, so branching on those elements reaches all of them.
    """
    norm = sorted(set(_normalize(sets)), key=lambda s: (len(s), sorted(s)))
    if not norm:
        return set()
    for k in range(1, len(norm) + 1):
        sols: List[Tuple[int, ...]] = []
        seen: Set[FrozenSet[int]] = set()

        def dfs(chosen: FrozenSet[int]) -> None:
            s = _first_unhit(norm, chosen)
            if s is None:
                if chosen not in seen:
                    seen.add(chosen)
                    sols.append(tuple(sorted(chosen)))
                return
            if len(chosen) == k:
                return
            for e in sorted(s):
                dfs(chosen | {e})

        dfs(frozenset())
        if sols:
            return set(min(sols))
    raise InvariantViolation("hitting set search failed")  # unreachable: one element per set always works


def beam_hitting_set(sets: Iterable[Iterable[int]], beam_width: int = 10) -> Set[int]:
    """Level-wise beam search over partial hitting sets.

    States at one level all have the same size; the first level holding a
    complete state wins. With a beam at least as wide as the search frontier
    this is exact.
    """
    norm = sorted(set(_normalize(sets)), key=lambda s: (len(s), sorted(s)))
    if not norm:
        return set()
    level: List[FrozenSet[int]] = [frozenset()]
    while True:
        done = [s for s in level if _first_unhit(norm, s) is None]
        if done:
            return set(min(tuple(sorted(s)) for s in done))
        nxt: Set[FrozenSet[int]] = set()
        for state in level:
            unhit = _first_unhit(norm, state)
            for e in unhit:
                nxt.add(state | {e})
        ranked = sorted(nxt, key=lambda s: (-sum(1 for t in norm if t & s), tuple(sorted(s))))
        level = ranked[:beam_width]


def hitting_set(sets: Iterable[Iterable[int]], tier: str = "exact", beam_width: int = 10) -> Set[int]:
    return exact_hitting_set(sets) if tier == "exact" else beam_hitting_set(sets, beam_width)


# -- rule-set selection ------------------------------------------------------------


@dataclass(frozen=True)
class EliminationInstance:
    """Each family lists alternative elimination sets; one of them must be eliminated in full."""

    universe: FrozenSet[int]
    families: Tuple[Tuple[FrozenSet[int], ...], ...]
    owners: Tuple[int, ...] = ()  # graph index per family, for error messages

    @classmethod
    def build(cls, families: Sequence[Iterable[Iterable[int]]], owners: Sequence[int] = ()) -> "EliminationInstance":
        # member order is a preference order; duplicates keep their first position
        fams = tuple(tuple(dict.fromkeys(frozenset(t) for t in f)) for f in families)
        universe = frozenset().union(*(t for f in fams for t in f)) if fams else frozenset()
        return cls(universe, fams, tuple(owners) or tuple(range(len(fams))))


def _satisfies(fams, chosen: FrozenSet[int]) -> bool:
    return all(any(t <= chosen for t in f) for f in fams)


def minimal_rule_set_selection(instance: EliminationInstance, exact_limit: int = 12) -> Set[int]:
    """Smallest ``H`` such that every family has a member contained in ``H``.

    Exhaustive over the subset lattice when the universe has at most
    ``exact_limit`` elements, greedy otherwise. Exact ties are broken towards
    satisfying each family by its earliest listed member, so callers can order
    members by preference.
    """
    for f, owner in zip(instance.families, instance.owners):
        if not f:
            raise Infeasible(f"graph {owner}: no admissible elimination set")
    fams = instance.families
    universe = sorted(instance.universe)
    if len(universe) <= exact_limit:
        # among minimum solutions prefer the one satisfying each family by its earliest member
        for k in range(len(universe) + 1):
            sols = []
            for combo in combinations(universe, k):
                chosen = frozenset(combo)
                if _satisfies(fams, chosen):
                    firsts = tuple(next(j for j, t in enumerate(f) if t <= chosen) for f in fams)
                    sols.append((firsts, combo))
            if sols:
                return set(min(sols)[1])
        raise InvariantViolation("selection failed")  # unreachable: the whole universe satisfies all
    chosen: FrozenSet[int] = frozenset()
    open_fams = [f for f in fams if not any(t <= chosen for t in f)]
    while open_fams:
        best = None
        for f in open_fams:
            for t in f:
                grown = chosen | t
                gain = sum(1 for g in open_fams if any(u <= grown for u in g))
                cost = max(1, len(t - chosen))
                rank = (-gain / cost, cost, tuple(sorted(t)))
                if best is None or rank < best[0]:
                    best = (rank, t)
        chosen = chosen | best[1]
        open_fams = [f for f in open_fams if not any(t <= chosen for t in f)]
    if not _satisfies(fams, chosen):
        raise InvariantViolation("greedy selection is invalid")
    return set(chosen)


# -- disambiguation ---------------------------------------------------------------


@dataclass
class DerivationSet:
    graph_index: int
    derivations: List[Derivation]

    @property
    def by_rule_set(self) -> Dict[Tuple[int, ...], List[Derivation]]:
        out: Dict[Tuple[int, ...], List[Derivation]] = {}
        for d in self.derivations:
            out.setdefault(tuple(sorted(set(d))), []).append(d)
        return out


@dataclass
class DisambiguationResult:
    grammar: Grammar
    parses: Dict[int, Derivation]  # retained graph index -> its only derivation
    lost: List[int]
    eliminated: Set[int]  # rule ids of the input grammar
    remap: Dict[int, int]  # surviving old id -> new id
    derivation_counts: Dict[int, int] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)


def _enumerate_job(args) -> List[Derivation]:
    g, h, cfg = args
    return enumerate_derivations(g, h, max_derivations=cfg.max_derivations_per_graph, timeout=cfg.enum_timeout)


def _classes(graphs: Sequence[LabeledDigraph]) -> List[List[int]]:
    buckets: Dict[CanonicalKey, List[int]] = {}
    for i, h in enumerate(graphs):
        buckets.setdefault(canonical_key(h), []).append(i)
    return sorted(buckets.values(), key=lambda c: (len(graphs[c[0]]), len(graphs[c[0]].edges), c[0]))


def disambiguate(
    g: Grammar,
    graphs: Sequence[LabeledDigraph],
    parses: Optional[Mapping[int, Derivation]] = None,
    config: Optional[RunConfig] = None,
    must_kill: Sequence[LabeledDigraph] = (),
) -> DisambiguationResult:
    """Eliminate rules so every graph ends up with exactly one derivation or none.

    Isomorphic graphs share their fate. A graph is keepable when some
    derivation is alone in its rule-set group; keeping it requires eliminating
    a hitting set of the other derivations' extra rules. Graphs that cannot
    be kept, and every graph in ``must_kill``, are removed from the language
    altogether. The returned ``lost`` graphs have no derivation left.
    """
    cfg = config or RunConfig()
    timings: Counter = Counter()
    classes = _classes(graphs)
    t0 = time.perf_counter()
    enum = parallel_map(_enumerate_job, [(g, graphs[c[0]], cfg) for c in classes], cfg.jobs)
    kill_enum = parallel_map(_enumerate_job, [(g, h, cfg) for h in must_kill], cfg.jobs)
    timings["enumeration"] += time.perf_counter() - t0

    def hs(sets):
        t = time.perf_counter()
        try:
            return frozenset(hitting_set(sets, cfg.hitting_set, cfg.hitting_beam_width))
        finally:
            timings["hitting_set"] += time.perf_counter() - t

    families: List[List[FrozenSet[int]]] = []
    owners: List[int] = []
    for cls, derivs in zip(classes, enum):
        if parses is not None:
            for i in cls:
                if i in parses and tuple(parses[i]) not in derivs:
                    raise InvariantViolation(f"graph {i}: its induced parse is not among its derivations")
        groups = DerivationSet(cls[0], derivs).by_rule_set
        options = []
        for keep in sorted(d for ds in groups.values() if len(ds) == 1 for d in ds):
            elim = [frozenset(o) - frozenset(keep) for o in derivs if o != keep]
            if any(not e for e in elim):
                continue
            options.append(hs(elim))
        if not options and derivs:
            options.append(hs([frozenset(d) for d in derivs]))
        if options:
            families.append(options)
            owners.append(cls[0])
    for j, derivs in enumerate(kill_enum):
        if derivs:
            families.append([hs([frozenset(d) for d in derivs])])
            owners.append(-1 - j)

    t1 = time.perf_counter()
    drop = minimal_rule_set_selection(EliminationInstance.build(families, owners))
    timings["selection"] += time.perf_counter() - t1
    g2, remap = g.without(drop)

    kept: Dict[int, Derivation] = {}
    lost: List[int] = []
    counts: Dict[int, int] = {}
    for cls, derivs in zip(classes, enum):
        alive = [d for d in derivs if not (set(d) & drop)]
        for i in cls:
            counts[i] = len(derivs)
        if len(alive) > 1:
            raise InvariantViolation(f"graph {cls[0]}: {len(alive)} derivations survive elimination")
        if alive:
            for i in cls:
                kept[i] = tuple(remap[r] for r in alive[0])
        else:
            lost.extend(cls)
    for j, derivs in enumerate(kill_enum):
        if any(not (set(d) & drop) for d in derivs):
            raise InvariantViolation(f"previously kept graph {j} is still derivable")

    if cfg.verify:
        t2 = time.perf_counter()
        checks = [(g2, graphs[c[0]], cfg) for c in classes] + [(g2, h, cfg) for h in must_kill]
        again = parallel_map(_enumerate_job, checks, cfg.jobs)
        for c, derivs in zip(classes, again):
            want = [kept[c[0]]] if c[0] in kept else []
            if derivs != want:
                raise InvariantViolation(f"graph {c[0]}: expected {len(want)} derivation(s), found {len(derivs)}")
        for j, derivs in enumerate(again[len(classes):]):
            if derivs:
                raise InvariantViolation(f"previously kept graph {j} is still derivable")
        timings["verify"] += time.perf_counter() - t2

    return DisambiguationResult(g2, dict(sorted(kept.items())), sorted(lost), set(drop), remap, counts, dict(timings))
