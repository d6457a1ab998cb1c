"""MDL-driven grammar induction.

One *iteration* compresses a set of graphs: it repeatedly contracts the
co-contractable occurrences of a motif into nonterminal nodes (reusing an
existing rule whenever one still pays off), then turns each remaining
component into an initial rule. The outer loop disambiguates, re-queues lost
graphs and assembles the per-iteration grammars into one compound grammar.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .canon import CanonicalKey, canonical_key
from .clique import max_clique
from .compat import (CompatGraph, CompatNode, Interner, Realization, Redirection, assemble_compat_graph,
                     build_compat_graph, or_reduce, realizations)
from .config import RunConfig, parallel_map
from .data import DagDataset, LabelVocabulary
from .errors import BudgetExceeded, InputError, InvariantViolation
from .grammar import IN, Derivation, Grammar, Instruction, Rule, derive
from .graph import Edge, LabeledDigraph, is_dag, is_weakly_connected, weak_components
from .matching import is_isomorphic
from .mining import Occurrence, ground_component, ground_in_components, mine_in_components

START = "black"
GRAY = "gray"
RESERVED = (START, GRAY)


def nt_label(base: str, iteration: int) -> str:
    return f"{base}:{iteration}"


# -- records -----------------------------------------------------------------


@dataclass(frozen=True)
class ContractionEvent:
    iteration: int
    step: int
    rule_id: int
    clique_size: int
    motif_size: int
    size_before: int
    size_after: int

    def __post_init__(self):
        if self.size_after != self.size_before - self.clique_size * (self.motif_size - 1):
            raise InvariantViolation(f"contraction bookkeeping broken: {self}")
        if self.size_after >= self.size_before:
            raise InvariantViolation(f"contraction did not shrink the graph: {self}")

    CSV_FIELDS = ("iteration", "step", "rule_id", "clique_size", "motif_size", "size_before", "size_after")

    def row(self) -> Tuple[int, ...]:
        return tuple(getattr(self, f) for f in self.CSV_FIELDS)


@dataclass(frozen=True)
class MiningRound:
    """One mining round: best clique size of every evaluated motif, and whether a rule was accepted."""

    iteration: int
    step: int
    clique_sizes: Tuple[int, ...]
    accepted: bool


@dataclass(frozen=True)
class Site:
    component: int
    occurrence: Occurrence
    dirs: Redirection
    node: str


@dataclass
class InductionResult:
    grammar: Grammar
    parses: Dict[int, Derivation]
    lost: List[int]
    trace: List[ContractionEvent]
    mining_rounds: List[MiningRound] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    sizes: Tuple[int, int, int] = (0, 0, 0)  # initial, pre-termination, post-termination |H|
    iterations: int = 1
    deferred: Dict[int, List[int]] = field(default_factory=dict)  # iteration -> graphs it lost


def mdl_gain(clique_size: int, motif_node_count: int) -> int:
    if clique_size < 0 or motif_node_count < 2:
        raise ValueError("mdl_gain needs clique_size >= 0 and motif_node_count >= 2")
    return clique_size * (motif_node_count - 1)


# -- contraction ---------------------------------------------------------------


def _fresh_id(h: LabeledDigraph, label: str, hint: int) -> str:
    k = hint
    while f"{label}#{k}" in h:
        k += 1
    return f"{label}#{k}"


def contract(
    h: LabeledDigraph, clique: Sequence[CompatNode], nt: str, id_hint: int = 0
) -> Tuple[LabeledDigraph, List[Site]]:
    """Collapse each member's occurrence image into one fresh ``nt`` node.

    Boundary neighbors are re-attached by a single edge following the member's
    redirection. ``h`` must contain every image (a component, or a composite).
    """
    images = [c.occurrence.image for c in clique]
    used: set = set()
    for img in images:
        if used & img:
            raise InvariantViolation("contracted occurrences overlap")
        used |= img
    nodes = {v: l for v, l in h.nodes.items() if v not in used}
    edges: List[Edge] = [e for e in h.edges if e[0] not in used and e[2] not in used]
    sites: List[Site] = []
    hint = id_hint
    for member in clique:
        fresh = _fresh_id(h, nt, hint)
        while fresh in nodes:
            hint += 1
            fresh = _fresh_id(h, nt, hint)
        hint += 1
        nodes[fresh] = nt
        for y, d, beta in member.dirs:
            edges.append((y, beta, fresh) if d == IN else (fresh, beta, y))
        sites.append(Site(member.occurrence.component, member.occurrence, member.dirs, fresh))
    out = LabeledDigraph(nodes, edges)
    if not is_dag(out):
        raise InvariantViolation("contraction closed a cycle")
    before = {frozenset(c) for c in weak_components(h)}
    if len(weak_components(out)) != len(before):
        raise InvariantViolation("contraction changed the component structure")
    return out, sites


# -- one iteration ---------------------------------------------------------------


@dataclass
class _Candidate:
    gain: int
    motif_size: int
    key: CanonicalKey
    rule_index: int  # -1 for a fresh motif
    pattern: LabeledDigraph
    members: List[CompatNode]
    cg: CompatGraph
    clique: List[int]

    def rank(self):
        return (-self.gain, -self.motif_size, self.key, self.rule_index)


def _evaluate(args) -> Tuple[CompatGraph, List[int], float, float]:
    """Ground, build the compatibility graph and solve; returns both phase times too."""
    comps, pattern, existing, cfg, edge_labels, salt = args
    t0 = time.perf_counter()
    occs = ground_in_components(comps, pattern, (GRAY,))
    cg = build_compat_graph(comps, occs, existing, cfg.redirection_cap, edge_labels, dedupe=True)
    t1 = time.perf_counter()
    clique = max_clique(cg, cfg.clique_solver, cfg.k_restarts, cfg.rng("clique", *salt), cfg.exact_cap)
    t2 = time.perf_counter()
    return cg, clique, t1 - t0, t2 - t1


class _Learner:
    def __init__(self, graphs: Sequence[LabeledDigraph], cfg: RunConfig, iteration: int, edge_labels, mine: bool):
        self.cfg = cfg
        self.iteration = iteration
        self.edge_labels = tuple(sorted(edge_labels))
        self.mine = mine
        self.comps: Dict[int, LabeledDigraph] = dict(enumerate(graphs))
        self.originals = list(graphs)
        self.history: Dict[int, List[int]] = {i: [] for i in self.comps}
        self.rules: List[Rule] = []
        self.rule_keys: List[CanonicalKey] = []
        self.trace: List[ContractionEvent] = []
        self.rounds: List[MiningRound] = []
        self.timings = Counter()
        self.step = 0
        self.size = sum(len(g) for g in graphs)
        self.fresh_hint = 0
        # realizations per (pattern, component), valid while the component is untouched
        self.intern = Interner()
        self.version: Dict[int, int] = {i: 0 for i in self.comps}
        self.cache: Dict[Tuple[LabeledDigraph, int], Tuple[int, List[Realization]]] = {}

    def _realizations(self, pattern: LabeledDigraph) -> List[Realization]:
        out: List[Realization] = []
        for ci in sorted(self.comps):
            hit = self.cache.get((pattern, ci))
            if hit is None or hit[0] != self.version[ci]:
                g = self.comps[ci]
                found: List[Realization] = []
                for occ in ground_component(ci, g, pattern, (GRAY,)):
                    found.extend(realizations(g, occ, self.intern, self.cfg.redirection_cap, self.edge_labels))
                hit = self.cache[(pattern, ci)] = (self.version[ci], found)
            out.extend(hit[1])
        return out

    def _solve(self, pattern, existing, salt):
        t0 = time.perf_counter()
        cg = assemble_compat_graph(self._realizations(pattern), self.intern, existing, dedupe=True)
        t1 = time.perf_counter()
        clique = max_clique(cg, self.cfg.clique_solver, self.cfg.k_restarts, self.cfg.rng("clique", *salt),
                            self.cfg.exact_cap)
        self.timings["compat"] += t1 - t0
        self.timings["clique"] += time.perf_counter() - t1
        return cg, clique

    def _apply(self, cand: _Candidate, rule_id: int) -> None:
        before = self.size
        t0 = time.perf_counter()
        by_comp: Dict[int, List[CompatNode]] = {}
        for m in cand.members:
            by_comp.setdefault(m.occurrence.component, []).append(m)
        for ci, members in sorted(by_comp.items()):
            self.comps[ci], _ = contract(self.comps[ci], members, GRAY, self.fresh_hint)
            self.version[ci] += 1
            self.fresh_hint += len(members)
            self.history[ci].append(rule_id)
        self.size = sum(len(g) for g in self.comps.values())
        self.timings["contract"] += time.perf_counter() - t0
        self.trace.append(ContractionEvent(
            self.iteration, self.step, rule_id, len(cand.members), cand.motif_size, before, self.size))
        self.step += 1

    def _reuse_round(self) -> bool:
        best: Optional[_Candidate] = None
        for idx, rule in enumerate(self.rules):
            cg, clique = self._solve(rule.daughter, rule.instructions, (self.iteration, self.step, "reuse", idx))
            if not clique:
                continue
            cand = _Candidate(mdl_gain(len(clique), len(rule.daughter)), len(rule.daughter), self.rule_keys[idx],
                              idx, rule.daughter, [cg.nodes[i] for i in clique], cg, clique)
            if best is None or cand.rank() < best.rank():
                best = cand
        if best is None or best.gain <= 0:
            return False
        self._apply(best, best.rule_index)
        return True

    def _mining_round(self) -> bool:
        t0 = time.perf_counter()
        motifs = mine_in_components(
            self.comps, self.cfg.beam_width, self.cfg.max_motif_size, self.cfg.top_n, (GRAY,))
        self.timings["mining"] += time.perf_counter() - t0
        salts = [(self.iteration, self.step, "mine", k) for k in range(len(motifs))]
        if self.cfg.jobs > 1:
            jobs = [(self.comps, m.pattern, None, self.cfg, self.edge_labels, salt) for m, salt in zip(motifs, salts)]
            results = []
            for cg, clique, t_compat, t_clique in parallel_map(_evaluate, jobs, self.cfg.jobs):
                self.timings["compat"] += t_compat
                self.timings["clique"] += t_clique
                results.append((cg, clique))
        else:
            results = [self._solve(m.pattern, None, salt) for m, salt in zip(motifs, salts)]
        best: Optional[_Candidate] = None
        sizes = []
        for m, (cg, clique) in zip(motifs, results):
            sizes.append(len(clique))
            if len(clique) < 2:
                continue
            cand = _Candidate(mdl_gain(len(clique), len(m.pattern)), len(m.pattern), m.key, -1,
                              m.pattern, [cg.nodes[i] for i in clique], cg, clique)
            if best is None or cand.rank() < best.rank():
                best = cand
        self.rounds.append(MiningRound(self.iteration, self.step, tuple(sizes), best is not None))
        if best is None:
            return False
        final_i, _excluded = or_reduce(best.cg, best.clique)
        rule = Rule(len(self.rules), GRAY, best.pattern, final_i)
        self.rules.append(rule)
        self.rule_keys.append(best.key)
        self._apply(best, rule.id)
        return True

    def run(self) -> InductionResult:
        initial = self.size
        if self.mine:
            while True:
                while self.rules and self._reuse_round():
                    pass
                if not self._mining_round():
                    break
        pre_term = self.size

        # each remaining component becomes an initial rule, shared across isomorphic components
        n_contract = len(self.rules)
        init_of: Dict[CanonicalKey, int] = {}
        init_rules: List[Rule] = []
        users: Counter = Counter()
        parses: Dict[int, Derivation] = {}
        for ci in sorted(self.comps):
            g = self.comps[ci]
            key = canonical_key(g)
            if key not in init_of:
                ids = {v: str(i) for i, v in enumerate(sorted(g))}
                init_of[key] = n_contract + len(init_rules)
                init_rules.append(Rule(init_of[key], START, g.relabel_ids(ids)))
            rid = init_of[key]
            users[rid] += 1
            parses[ci] = (rid,) + tuple(reversed(self.history[ci]))
        for rule in init_rules:
            if len(rule.daughter) >= 2:
                before = self.size
                self.size -= users[rule.id] * (len(rule.daughter) - 1)
                self.trace.append(ContractionEvent(
                    self.iteration, self.step, rule.id, users[rule.id], len(rule.daughter), before, self.size))
                self.step += 1

        terminals = set().union(*(g.label_set() for g in self.originals)) if self.originals else set()
        vocab = LabelVocabulary(frozenset(terminals), frozenset(RESERVED), frozenset(self.edge_labels), START)
        grammar = Grammar(vocab, tuple(self.rules) + tuple(init_rules))
        if self.cfg.verify:
            t0 = time.perf_counter()
            for ci, deriv in parses.items():
                if not is_isomorphic(derive(grammar, deriv), self.originals[ci]):
                    raise InvariantViolation(f"graph {ci}: parse does not reproduce the graph")
            self.timings["verify"] += time.perf_counter() - t0
        return InductionResult(grammar, parses, [], self.trace, self.rounds, dict(self.timings),
                               (initial, pre_term, self.size), 1)


def _graphs_of(d) -> Tuple[List[LabeledDigraph], Tuple[str, ...]]:
    if isinstance(d, DagDataset):
        return list(d.graphs), tuple(sorted(d.vocab.edge_labels))
    graphs = list(d)
    labels = set().union(*(g.edge_label_set() for g in graphs)) if graphs else set()
    return graphs, tuple(sorted(labels or {"black"}))


def _check_reserved(graphs: Sequence[LabeledDigraph]) -> None:
    for i, g in enumerate(graphs):
        for lab in g.label_set():
            if lab in RESERVED or lab.startswith(tuple(r + ":" for r in RESERVED)):
                raise InputError(f"graph {i}: node label {lab!r} is reserved for nonterminals")
        if not is_dag(g):
            raise InputError(f"graph {i}: not acyclic")
        if not is_weakly_connected(g):
            raise InputError(f"graph {i}: not weakly connected")


def learn_grammar(d, config: Optional[RunConfig] = None, iteration: int = 0, *, mine: bool = True) -> InductionResult:
    """One compression iteration; the returned grammar uses the local labels ``black``/``gray``.

    ``mine=False`` skips compression entirely, giving one initial rule per
    isomorphism class (a trivially unambiguous grammar).
    """
    cfg = config or RunConfig()
    graphs, edge_labels = _graphs_of(d)
    _check_reserved(graphs)
    return _Learner(graphs, cfg, iteration, edge_labels, mine).run()


def compression_curve(trace: Sequence[ContractionEvent], iteration: Optional[int] = None) -> List[Tuple[float, float]]:
    """``(fraction of contractions performed, |H| / initial |H|)`` for one iteration.

    The first point is ``(0, 1.0)``. ``iteration`` defaults to the first one in
    the trace.
    """
    if not trace:
        return [(0, 1.0)]
    it = trace[0].iteration if iteration is None else iteration
    events = [e for e in trace if e.iteration == it]
    if not events:
        return [(0, 1.0)]
    initial = events[0].size_before
    n = len(events)
    return [(0, 1.0)] + [((k + 1) / n, e.size_after / initial) for k, e in enumerate(events)]


# -- outer loop ------------------------------------------------------------------


def _retag(rule: Rule, iteration: int, new_id: int) -> Rule:
    mapping = {START: nt_label(START, iteration), GRAY: nt_label(GRAY, iteration)}
    daughter = rule.daughter.with_labels(mapping)
    return Rule(new_id, mapping[rule.lhs], daughter, rule.instructions)


def _partitions(graphs: Sequence[LabeledDigraph], how: str) -> List[List[int]]:
    if how == "none":
        return [list(range(len(graphs)))]
    groups: Dict[int, List[int]] = {}
    for i, g in enumerate(graphs):
        groups.setdefault(len(g), []).append(i)
    return [groups[k] for k in sorted(groups)]


def grammar_induction(d, config: Optional[RunConfig] = None) -> InductionResult:
    """Compound grammar under which every dataset graph has exactly one derivation.

    Iteration ``k`` induces a grammar over the graphs still unresolved, then
    disambiguates it. Graphs it cannot keep are removed from its language and
    retried in iteration ``k + 1``; graphs retained by earlier iterations are
    removed from it as well. Start rules ``black -> black:k`` join the pieces.
    If an iteration retains nothing, it is redone without compression, which
    always succeeds.
    """
    from .disambiguation import disambiguate

    cfg = config or RunConfig()
    graphs, edge_labels = _graphs_of(d)
    if not graphs:
        raise InputError("dataset is empty")
    _check_reserved(graphs)

    pieces: List[Tuple[int, Grammar, Dict[int, Derivation], Dict[int, int]]] = []  # (iter, grammar, parses, remap)
    trace: List[ContractionEvent] = []
    rounds: List[MiningRound] = []
    timings: Counter = Counter()
    retained: List[int] = []
    deferred: Dict[int, List[int]] = {}
    first_sizes = None
    iteration = 0
    for part in _partitions(graphs, cfg.partition_by):
        pending = list(part)
        while pending:
            if iteration >= cfg.max_iters:
                raise BudgetExceeded(f"iteration budget of {cfg.max_iters} exhausted; unresolved graphs {pending}")
            sub = [graphs[i] for i in pending]
            mine = True
            while True:
                res = _Learner(sub, cfg, iteration, edge_labels, mine).run()
                timings.update(res.timings)
                if cfg.skip_disambiguation:
                    g_k, local, lost_local, remap = res.grammar, res.parses, [], {r.id: r.id for r in res.grammar.rules}
                    break
                t0 = time.perf_counter()
                dres = disambiguate(res.grammar, sub, res.parses, cfg, must_kill=[graphs[i] for i in retained])
                timings.update({"disambiguation": time.perf_counter() - t0})
                timings.update({"hitting_set": dres.timings.get("hitting_set", 0.0)})
                timings.update({"enumeration": dres.timings.get("enumeration", 0.0)})
                if dres.parses or not mine:
                    g_k, local, lost_local, remap = dres.grammar, dres.parses, dres.lost, dres.remap
                    break
                mine = False  # nothing retained: redo this iteration without compression
            if first_sizes is None:
                first_sizes = res.sizes
            trace.extend(replace(e, rule_id=remap.get(e.rule_id, -1)) for e in res.trace)
            rounds.extend(res.mining_rounds)
            pieces.append((iteration, g_k, {pending[j]: p for j, p in local.items()}, remap))
            retained.extend(pending[j] for j in local)
            pending = [pending[j] for j in lost_local]
            if pending:
                deferred[iteration] = list(pending)
            iteration += 1

    # assemble: iteration blocks in order, then bridges in reverse iteration order
    rules: List[Rule] = []
    offsets: Dict[int, int] = {}
    for it, g_k, _, _ in pieces:
        offsets[it] = len(rules)
        rules.extend([_retag(r, it, offsets[it] + r.id) for r in g_k.rules])
    bridge: Dict[int, int] = {}
    for it, _, _, _ in reversed(pieces):
        bridge[it] = len(rules)
        rules.append(Rule(len(rules), START, LabeledDigraph({"0": nt_label(START, it)})))
    terminals = set().union(*(g.label_set() for g in graphs))
    nts = {START} | {nt_label(b, it) for it, _, _, _ in pieces for b in RESERVED}
    vocab = LabelVocabulary(frozenset(terminals), frozenset(nts), frozenset(edge_labels), START)
    grammar = Grammar(vocab, tuple(rules))
    parses: Dict[int, Derivation] = {}
    for it, _, local, _ in pieces:
        for gi, p in local.items():
            parses[gi] = (bridge[it],) + tuple(offsets[it] + r for r in p)
    trace = [replace(e, rule_id=offsets[e.iteration] + e.rule_id) if e.rule_id >= 0 else e for e in trace]
    return InductionResult(
        grammar, dict(sorted(parses.items())), [], trace, rounds, dict(timings),
        first_sizes or (0, 0, 0), len(pieces), deferred)
