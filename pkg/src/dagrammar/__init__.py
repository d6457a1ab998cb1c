"""Induce unambiguous edge-directed node-replacement grammars from labeled DAGs."""

from .canon import CanonicalKey, canonical_key, wl_hash
from .config import RunConfig
from .data import DagDataset, LabelVocabulary
from .disambiguation import disambiguate, enumerate_derivations, exact_hitting_set, beam_hitting_set
from .errors import BudgetExceeded, DeadEnd, GrammarError, Infeasible, InputError, InvariantViolation
from .grammar import Grammar, Instruction, Rule, apply_rule, derive, node_budget, replay, sample, token_frequency
from .graph import LabeledDigraph, induced_subgraph, is_dag, is_weakly_connected
from .induction import InductionResult, compression_curve, grammar_induction, learn_grammar
from .matching import find_isomorphism, is_isomorphic

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "CanonicalKey", "DagDataset", "DeadEnd", "Grammar", "GrammarError", "Infeasible",
    "InductionResult", "InputError", "Instruction", "InvariantViolation", "LabelVocabulary", "LabeledDigraph",
    "Rule", "RunConfig", "apply_rule", "beam_hitting_set", "canonical_key", "compression_curve", "derive",
    "disambiguate", "enumerate_derivations", "exact_hitting_set", "find_isomorphism", "grammar_induction",
    "induced_subgraph", "is_dag", "is_isomorphic", "is_weakly_connected", "learn_grammar", "node_budget",
    "replay", "sample", "token_frequency", "wl_hash",
]
