"""edNCE productions: rule application, derivation replay and sampling.

An instruction ``(sigma, beta/gamma, x, d/d_prime)`` reads: for every neighbor
``y`` of the rewritten node whose label is ``sigma`` and which is attached by a
``beta``-labeled edge on side ``d``, create a ``gamma``-labeled edge on side
``d_prime`` between ``y`` and the copy of daughter node ``x``.

Directions are always stated from the inside: ``d == "in"`` means the edge
points from ``y`` into the rewritten node, ``d_prime == "out"`` means the new
edge leaves ``x`` towards ``y``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .data import LabelVocabulary
from .errors import BudgetExceeded, DeadEnd, InputError, InvariantViolation
from .graph import Edge, LabeledDigraph, is_dag, is_weakly_connected

IN, OUT = "in", "out"
DIRECTIONS = (IN, OUT)

Derivation = Tuple[int, ...]
ValidityPredicate = Callable[[LabeledDigraph, FrozenSet[str], FrozenSet[Edge]], bool]


class DerivationError(InputError):
    pass


@dataclass(frozen=True, order=True)
class Instruction:
    sigma: str
    beta: str
    gamma: str
    x: str
    d: str
    d_prime: str

    @property
    def precondition(self) -> Tuple[str, str, str]:
        return (self.sigma, self.beta, self.d)

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "beta": self.beta, "gamma": self.gamma,
                "x": self.x, "d": self.d, "d_prime": self.d_prime}

    @classmethod
    def from_dict(cls, d: dict) -> "Instruction":
        ins = cls(str(d["sigma"]), str(d["beta"]), str(d["gamma"]), str(d["x"]), str(d["d"]), str(d["d_prime"]))
        if ins.d not in DIRECTIONS or ins.d_prime not in DIRECTIONS:
            raise InputError(f"instruction direction must be 'in' or 'out': {d}")
        return ins

    def __str__(self) -> str:
        return f"({self.sigma}, {self.beta}/{self.gamma}, {self.x}, {self.d}/{self.d_prime})"


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: str
    daughter: LabeledDigraph
    instructions: FrozenSet[Instruction] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "instructions", frozenset(self.instructions))
        for ins in self.instructions:
            if ins.x not in self.daughter:
                raise InputError(f"rule {self.id}: instruction {ins} targets unknown daughter node {ins.x!r}")

    def same_production(self, other: "Rule") -> bool:
        """Equal up to the rule id (daughter ids must coincide too)."""
        return self.lhs == other.lhs and self.daughter == other.daughter and self.instructions == other.instructions

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "lhs": self.lhs,
            "daughter": self.daughter.to_dict(),
            "instructions": [i.to_dict() for i in sorted(self.instructions)],
        }


@dataclass(frozen=True)
class Grammar:
    vocab: LabelVocabulary
    rules: Tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for i, r in enumerate(self.rules):
            if r.id != i:
                raise InputError(f"rule ids must be dense and ordered; position {i} holds id {r.id}")
            if r.lhs not in self.vocab.nonterminals:
                raise InputError(f"rule {r.id}: lhs {r.lhs!r} is not a nonterminal")
            if sum(1 for l in r.daughter.nodes.values() if l in self.vocab.nonterminals) > 1:
                raise InputError(f"rule {r.id}: daughter holds more than one nonterminal")
        index: Dict[str, List[Rule]] = {}
        for r in self.rules:
            index.setdefault(r.lhs, []).append(r)
        object.__setattr__(self, "_by_lhs", {k: tuple(v) for k, v in index.items()})

    @property
    def start(self) -> str:
        return self.vocab.start

    def __len__(self) -> int:
        return len(self.rules)

    def rules_for(self, lhs: str) -> Tuple[Rule, ...]:
        return self._by_lhs.get(lhs, ())  # type: ignore[attr-defined]

    def nonterminal_nodes(self, h: LabeledDigraph) -> List[str]:
        nts = self.vocab.nonterminals
        return sorted(n for n, l in h.nodes.items() if l in nts)

    def without(self, rule_ids: Iterable[int]) -> Tuple["Grammar", Dict[int, int]]:
        """Drop rules and renumber the rest densely; returns the old->new id map."""
        drop = set(rule_ids)
        kept = [r for r in self.rules if r.id not in drop]
        remap = {r.id: i for i, r in enumerate(kept)}
        rules = tuple(Rule(remap[r.id], r.lhs, r.daughter, r.instructions) for r in kept)
        return Grammar(self.vocab, rules), remap

    def to_dict(self) -> dict:
        return {"labels": self.vocab.to_dict(), "start": self.start, "rules": [r.to_dict() for r in self.rules]}


# -- rewriting ---------------------------------------------------------------


def _fresh_prefix(h: LabeledDigraph, rule: Rule) -> str:
    k = 0
    ids = set(h)
    while any(f"{rule.id}.{k}.{x}" in ids for x in rule.daughter):
        k += 1
    return f"{rule.id}.{k}"


def expand(h: LabeledDigraph, n: str, rule: Rule, prefix: Optional[str] = None):
    """Apply ``rule`` at ``n``; returns ``(graph, copy_of, new_edges)``.

    ``copy_of`` maps daughter node ids to their fresh ids in the result.
    """
    if n not in h:
        raise DerivationError(f"node {n!r} is not in the host graph")
    if h.label(n) != rule.lhs:
        raise DerivationError(f"rule {rule.id} rewrites {rule.lhs!r} but node {n!r} is labeled {h.label(n)!r}")
    if prefix is None:
        prefix = _fresh_prefix(h, rule)
    copy_of = {x: f"{prefix}.{x}" for x in rule.daughter}
    nodes = {v: l for v, l in h.nodes.items() if v != n}
    for x, l in rule.daughter.nodes.items():
        if copy_of[x] in nodes:
            raise DerivationError(f"fresh id {copy_of[x]!r} collides with an existing node")
        nodes[copy_of[x]] = l

    by_pre: Dict[Tuple[str, str, str], List[Instruction]] = {}
    for ins in rule.instructions:
        by_pre.setdefault(ins.precondition, []).append(ins)

    edges: List[Edge] = [e for e in h.edges if e[0] != n and e[2] != n]
    new_edges: List[Edge] = [(copy_of[s], l, copy_of[d]) for s, l, d in rule.daughter.edges]
    for side, nbrs in ((IN, h.pred(n)), (OUT, h.succ(n))):
        for y, labs in nbrs.items():
            for beta in labs:
                for ins in by_pre.get((h.label(y), beta, side), ()):
                    x = copy_of[ins.x]
                    new_edges.append((y, ins.gamma, x) if ins.d_prime == IN else (x, ins.gamma, y))
    edges.extend(new_edges)
    return LabeledDigraph(nodes, edges), copy_of, frozenset(new_edges)


def apply_rule(h: LabeledDigraph, n: str, rule: Rule, prefix: Optional[str] = None) -> LabeledDigraph:
    return expand(h, n, rule, prefix)[0]


def start_graph(g: Grammar) -> LabeledDigraph:
    return LabeledDigraph({"0": g.start})


def replay(g: Grammar, deriv: Sequence[int]) -> List[LabeledDigraph]:
    """All intermediates of a derivation, from the start graph to the result."""
    if len(deriv) == 0:
        raise DerivationError("empty derivation")
    h = start_graph(g)
    out = [h]
    for step, rid in enumerate(deriv):
        if not (0 <= rid < len(g.rules)):
            raise DerivationError(f"step {step}: unknown rule id {rid}")
        nts = g.nonterminal_nodes(h)
        if len(nts) > 1:
            raise InvariantViolation(f"step {step}: intermediate holds {len(nts)} nonterminals")
        if not nts:
            raise DerivationError(f"step {step}: graph is already terminal")
        rule = g.rules[rid]
        if rule.lhs != h.label(nts[0]):
            raise DerivationError(
                f"step {step}: rule {rid} has lhs {rule.lhs!r} but the nonterminal is {h.label(nts[0])!r}")
        h = apply_rule(h, nts[0], rule, prefix=f"{rid}.{step}")
        out.append(h)
    left = g.nonterminal_nodes(h)
    if left:
        raise DerivationError(f"derivation ends with nonterminal nodes {left}")
    return out


def derive(g: Grammar, deriv: Sequence[int]) -> LabeledDigraph:
    return replay(g, deriv)[-1]


# -- sampling ----------------------------------------------------------------


def node_budget(limit: int) -> ValidityPredicate:
    """Predicate keeping intermediates at or below ``limit`` nodes.

    A pending nonterminal expands into at least one node, so the intermediate
    size is a lower bound on the final size.
    """

    def check(h: LabeledDigraph, new_nodes, new_edges) -> bool:
        return len(h) <= limit

    check.__name__ = f"node_budget_{limit}"
    return check


def sample(
    g: Grammar,
    seed: Union[int, random.Random, None] = 0,
    max_steps: int = 100,
    validity: Optional[ValidityPredicate] = None,
) -> Derivation:
    """Draw one complete derivation, uniformly over admissible rules at each step.

    A rule is admissible when its lhs matches the current nonterminal and its
    application keeps the intermediate a weakly connected DAG; ``validity``
    further masks rules by looking at the result and the nodes and edges the
    application introduced.
    """
    if not g.rules:
        raise InputError("cannot sample from an empty grammar")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    h = start_graph(g)
    deriv: List[int] = []
    step = 0
    while True:
        nts = g.nonterminal_nodes(h)
        if not nts:
            return tuple(deriv)
        if len(nts) > 1:
            raise InvariantViolation(f"sampled intermediate holds {len(nts)} nonterminals")
        if step >= max_steps:
            raise BudgetExceeded(f"sampling exceeded {max_steps} steps")
        cands = list(g.rules_for(h.label(nts[0])))
        chosen = None
        for rule in rng.sample(cands, len(cands)):
            child, copy_of, new_edges = expand(h, nts[0], rule, prefix=f"{rule.id}.{step}")
            if not is_weakly_connected(child) or not is_dag(child):
                continue
            if validity is not None and not validity(child, frozenset(copy_of.values()), new_edges):
                continue
            chosen = (rule, child)
            break
        if chosen is None:
            raise DeadEnd(f"step {step}: every rule for {h.label(nts[0])!r} is masked")
        deriv.append(chosen[0].id)
        h = chosen[1]
        step += 1


def token_frequency(parses: Iterable[Sequence[int]]) -> List[Tuple[int, int]]:
    counts = Counter(r for p in parses for r in p)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
