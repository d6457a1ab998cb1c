"""Run configuration shared by the library entry points and the CLI."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from .errors import InputError

T = TypeVar("T")
R = TypeVar("R")

CLIQUE_TIERS = ("auto", "exact", "approx", "greedy")
HITTING_SET_TIERS = ("exact", "beam")
PARTITIONS = ("none", "node-count")
INSTRUCTION_POLICIES = ("minimal",)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    # mining
    beam_width: Optional[int] = 4
    max_motif_size: int = 8
    top_n: int = 20
    # compatibility / clique
    clique_solver: str = "auto"
    exact_cap: int = 40
    k_restarts: int = 10
    redirection_cap: int = 10
    instruction_policy: str = "minimal"
    # disambiguation
    hitting_set: str = "exact"
    hitting_beam_width: int = 10
    max_derivations_per_graph: int = 10_000
    enum_timeout: Optional[float] = 120.0
    skip_disambiguation: bool = False
    # outer loop
    max_iters: int = 10
    partition_by: str = "none"
    jobs: int = 1
    verify: bool = True

    def __post_init__(self):
        if self.clique_solver not in CLIQUE_TIERS:
            raise InputError(f"clique_solver must be one of {CLIQUE_TIERS}")
        if self.hitting_set not in HITTING_SET_TIERS:
            raise InputError(f"hitting_set must be one of {HITTING_SET_TIERS}")
        if self.partition_by not in PARTITIONS:
            raise InputError(f"partition_by must be one of {PARTITIONS}")
        if self.instruction_policy not in INSTRUCTION_POLICIES:
            raise InputError(f"instruction_policy must be one of {INSTRUCTION_POLICIES}")
        if self.beam_width is not None and self.beam_width < 1:
            raise InputError("beam_width must be >= 1")
        for name in ("max_motif_size", "top_n", "k_restarts", "hitting_beam_width", "max_iters", "jobs"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1")
        if self.max_motif_size < 2:
            raise InputError("max_motif_size must be >= 2")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def rng(self, *path: Any) -> random.Random:
        """Independent generator for one subsystem, derived from the seed and a fixed path."""
        return random.Random(":".join(str(p) for p in (self.seed,) + path))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """Order-preserving map; uses worker processes when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
