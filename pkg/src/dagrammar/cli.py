"""Command-line front end: ``dagrammar {induce,parse,derive,sample,stats,check}``.

Exit codes: 0 ok, 2 input error, 3 budget exceeded / infeasible, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import io
from .config import CLIQUE_TIERS, HITTING_SET_TIERS, INSTRUCTION_POLICIES, PARTITIONS, RunConfig
from .data import DagDataset
from .disambiguation import enumerate_derivations
from .errors import BudgetExceeded, GrammarError, Infeasible, InputError, InvariantViolation
from .grammar import Derivation, Grammar, derive, node_budget, replay, sample, token_frequency
from .graph import LabeledDigraph, is_dag, is_weakly_connected, topological_order
from .induction import ContractionEvent, grammar_induction
from .matching import is_isomorphic

log = logging.getLogger("dagrammar")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4
SAMPLE_RETRIES = 100


def _tidy(h: LabeledDigraph) -> LabeledDigraph:
    """Renumber node ids ``0..n-1`` in topological order."""
    return h.relabel_ids({n: str(i) for i, n in enumerate(topological_order(h))})


def _outdir(path: str) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def length_histogram(parses: Sequence[Sequence[int]]) -> Dict[int, int]:
    return dict(sorted(Counter(len(p) for p in parses).items()))


# -- induce ----------------------------------------------------------------------


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(ns, "config", None):
        try:
            base = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{ns.config}: cannot read config ({exc})") from None
    flags = {
        "seed": ns.seed,
        "beam_width": ns.beam_width,
        "max_motif_size": ns.max_motif_size,
        "top_n": ns.top_n,
        "clique_solver": ns.clique_solver,
        "k_restarts": ns.k_restarts,
        "redirection_cap": ns.redirection_cap,
        "instruction_policy": ns.instruction_policy,
        "hitting_set": ns.hitting_set,
        "hitting_beam_width": ns.hitting_beam_width,
        "max_derivations_per_graph": ns.max_derivations_per_graph,
        "enum_timeout": ns.enum_timeout,
        "max_iters": ns.max_iters,
        "partition_by": ns.partition_by,
        "jobs": ns.jobs,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    if ns.skip_disambiguation:
        base["skip_disambiguation"] = True
    if ns.exact_cap is not None:
        base["exact_cap"] = ns.exact_cap
    return RunConfig.from_dict(base)


def cmd_induce(ns: argparse.Namespace) -> int:
    cfg = config_from_args(ns)
    ds = io.load_dataset(ns.dataset)
    out = _outdir(ns.out)
    t0 = time.perf_counter()
    res = grammar_induction(ds, cfg)
    wall = time.perf_counter() - t0

    io.save_grammar(res.grammar, out / "grammar.json")
    io.save_parses(res.parses, out / "parses.jsonl")
    io.write_csv(out / "trace.csv", ContractionEvent.CSV_FIELDS, (e.row() for e in res.trace))
    io.write_csv(out / "mining_rounds.csv", ("iteration", "step", "accepted", "clique_sizes"),
                 ((m.iteration, m.step, int(m.accepted), " ".join(map(str, m.clique_sizes))) for m in res.mining_rounds))
    initial, pre, post = res.sizes
    summary = {
        "rule_count": len(res.grammar),
        "graph_count": len(ds),
        "retained_count": len(res.parses),
        "lost_count": len(res.lost),
        "deferred": {str(k): v for k, v in sorted(res.deferred.items())},
        "iterations": res.iterations,
        "compression": {
            "initial": initial,
            "pre_termination": pre,
            "post_termination": post,
            "ratio_pre": initial / pre if pre else None,
            "ratio_post": initial / post if post else None,
            "fraction_pre": pre / initial if initial else None,
            "fraction_post": post / initial if initial else None,
        },
        "parse_length_histogram": {str(k): v for k, v in length_histogram(list(res.parses.values())).items()},
        "timings": {k: round(v, 4) for k, v in sorted(res.timings.items())},
        "wall_time": round(wall, 4),
        "config": cfg.to_dict(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{len(res.grammar)} rules, {len(res.parses)}/{len(ds)} graphs parsed, "
          f"|H| {initial} -> {pre} -> {post}, {wall:.1f}s")
    return EXIT_OK


# -- parse -----------------------------------------------------------------------


def parse_status(g: Grammar, h: LabeledDigraph, **kw) -> Tuple[str, Optional[Derivation], int]:
    """``(status, derivation or None, derivation count)``.

    status is ``unique``, ``ambiguous(n)`` or ``not-in-language``.
    """
    derivs = enumerate_derivations(g, h, **kw)
    if not derivs:
        return "not-in-language", None, 0
    if len(derivs) == 1:
        return "unique", derivs[0], 1
    return f"ambiguous({len(derivs)})", None, len(derivs)


def cmd_parse(ns: argparse.Namespace) -> int:
    g = io.load_grammar(ns.grammar)
    ds = io.load_dataset(ns.dataset)
    unique: Dict[int, Derivation] = {}
    rows = []
    code = EXIT_OK
    for i, h in enumerate(ds.graphs):
        try:
            status, deriv, count = parse_status(
                g, h, max_derivations=ns.max_derivations_per_graph, timeout=ns.enum_timeout)
        except BudgetExceeded as exc:
            status, deriv, count = "budget-exceeded", None, -1
            log.warning("graph %d: %s", i, exc)
            code = EXIT_BUDGET
        if deriv is not None:
            unique[i] = deriv
        rows.append((i, status, count))
        print(f"{i}\t{status}" + (f"\t{' '.join(map(str, deriv))}" if deriv else ""))
    if ns.out:
        out = _outdir(ns.out)
        io.save_parses(unique, out / "parses.jsonl")
        io.write_csv(out / "derivation_counts.csv", ("graph_index", "status", "count"), rows)
    return code


# -- derive / sample / stats -------------------------------------------------------


def cmd_derive(ns: argparse.Namespace) -> int:
    g = io.load_grammar(ns.grammar)
    parses = io.load_parses(ns.parses)
    graphs = [_tidy(derive(g, p)) for _, p in sorted(parses.items())]
    if not graphs:
        raise InputError(f"{ns.parses}: no parses")
    ds = DagDataset.from_graphs(graphs, g.vocab)
    if ns.out:
        io.save_dataset(ds, ns.out)
    else:
        sys.stdout.write(io.dumps(io.dataset_to_dict(ds)))
    return EXIT_OK


def cmd_sample(ns: argparse.Namespace) -> int:
    g = io.load_grammar(ns.grammar)
    cfg = RunConfig(seed=ns.seed)
    validity = node_budget(ns.max_nodes) if ns.max_nodes else None
    derivs: List[Derivation] = []
    graphs: List[LabeledDigraph] = []
    partial = False
    for k in range(ns.n):
        for attempt in range(SAMPLE_RETRIES):
            try:
                d = sample(g, cfg.rng("sample", k, attempt), max_steps=ns.max_steps, validity=validity)
            except (Infeasible, BudgetExceeded):
                continue
            h = derive(g, d)
            if ns.max_nodes and len(h) > ns.max_nodes:
                continue
            derivs.append(d)
            graphs.append(_tidy(h))
            break
        else:
            partial = True
            log.error("sample %d: no valid derivation after %d retries", k, SAMPLE_RETRIES)
            break
    out = _outdir(ns.out)
    (out / "samples.jsonl").write_text(
        "".join(io.dumps({"sample_index": i, "rule_ids": list(d)}) for i, d in enumerate(derivs)), encoding="utf-8")
    doc = {"labels": g.vocab.to_dict(), "graphs": [h.to_dict() for h in graphs], "partial": partial}
    (out / "graphs.json").write_text(io.dumps(doc), encoding="utf-8")
    print(f"{len(graphs)}/{ns.n} samples written" + (" (partial)" if partial else ""))
    return EXIT_BUDGET if partial else EXIT_OK


def cmd_stats(ns: argparse.Namespace) -> int:
    parses = list(io.load_parses(ns.parses).values())
    out = _outdir(ns.out)
    io.write_csv(out / "token_frequency.csv", ("rule_id", "count"), token_frequency(parses))
    io.write_csv(out / "parse_lengths.csv", ("length", "count"), length_histogram(parses).items())
    print(f"{len(parses)} parses, {sum(map(len, parses))} tokens")
    return EXIT_OK


# -- check -----------------------------------------------------------------------


def check_pair(g: Grammar, ds: DagDataset, parses: Optional[Dict[int, Derivation]] = None, **kw) -> List[str]:
    """Invariant suite; returns human-readable violations (empty when all hold).

    Every recorded parse must replay through weakly connected DAGs with at
    most one nonterminal and end isomorphic to its graph, and it must be the
    graph's only derivation.
    """
    problems: List[str] = []
    for i, h in enumerate(ds.graphs):
        want = None if parses is None else parses.get(i)
        if parses is not None and want is None:
            continue
        if want is not None:
            try:
                steps = replay(g, want)
            except (InputError, InvariantViolation) as exc:
                problems.append(f"graph {i}: parse does not replay ({exc})")
                continue
            for k, inter in enumerate(steps):
                if not is_dag(inter) or not is_weakly_connected(inter):
                    problems.append(f"graph {i}: intermediate {k} is not a connected DAG")
                if len(g.nonterminal_nodes(inter)) > 1:
                    problems.append(f"graph {i}: intermediate {k} holds several nonterminals")
            if not is_isomorphic(steps[-1], h):
                problems.append(f"graph {i}: parse derives a different graph")
        derivs = enumerate_derivations(g, h, **kw)
        if want is not None and derivs != [tuple(want)]:
            problems.append(f"graph {i}: expected its parse as the only derivation, found {len(derivs)}")
        elif want is None and len(derivs) != 1:
            problems.append(f"graph {i}: {len(derivs)} derivations")
    return problems


def cmd_check(ns: argparse.Namespace) -> int:
    g = io.load_grammar(ns.grammar)
    ds = io.load_dataset(ns.dataset)
    parses = io.load_parses(ns.parses) if ns.parses else None
    problems = check_pair(g, ds, parses, max_derivations=ns.max_derivations_per_graph, timeout=ns.enum_timeout)
    for p in problems:
        print(p)
    if problems:
        return EXIT_INVARIANT
    print(f"ok: {len(ds)} graphs")
    return EXIT_OK


# -- wiring ----------------------------------------------------------------------


def _enum_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    p.add_argument("--max-derivations-per-graph", type=int, default=10_000 if defaults else None)
    p.add_argument("--enum-timeout", type=float, default=120.0 if defaults else None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dagrammar", description="Induce and use unambiguous DAG grammars.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induce", help="learn a grammar and one parse per graph")
    p.add_argument("dataset")
    p.add_argument("-o", "--out", default="out")
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--beam-width", type=int, help="motif mining beam width")
    p.add_argument("--max-motif-size", type=int)
    p.add_argument("--top-n", type=int)
    p.add_argument("--clique-solver", choices=CLIQUE_TIERS)
    p.add_argument("--exact-cap", type=int, help="largest compat graph the exact clique tier accepts")
    p.add_argument("--k-restarts", type=int)
    p.add_argument("--redirection-cap", type=int)
    p.add_argument("--instruction-policy", choices=INSTRUCTION_POLICIES)
    p.add_argument("--hitting-set", choices=HITTING_SET_TIERS)
    p.add_argument("--hitting-beam-width", type=int)
    _enum_flags(p, defaults=False)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--partition-by", choices=PARTITIONS)
    p.add_argument("--skip-disambiguation", action="store_true")
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_induce)

    p = sub.add_parser("parse", help="report each graph's derivation under a grammar")
    p.add_argument("grammar")
    p.add_argument("dataset")
    p.add_argument("-o", "--out")
    _enum_flags(p, defaults=True)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("derive", help="replay parses into graphs")
    p.add_argument("grammar")
    p.add_argument("parses")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("sample", help="draw random derivations")
    p.add_argument("grammar")
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, help="node budget enforced while decoding")
    p.add_argument("--max-steps", type=int, default=100)
    p.add_argument("-o", "--out", default="samples")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("stats", help="rule frequencies and parse-length histogram")
    p.add_argument("parses")
    p.add_argument("-o", "--out", default="stats")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("check", help="run the invariant suite on a grammar and dataset")
    p.add_argument("grammar")
    p.add_argument("dataset")
    p.add_argument("--parses")
    _enum_flags(p, defaults=True)
    p.set_defaults(fn=cmd_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return ns.fn(ns)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetExceeded, Infeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except GrammarError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
