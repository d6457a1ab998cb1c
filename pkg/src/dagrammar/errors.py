"""Exception hierarchy.

The CLI maps each family to an exit code: input problems exit 2, budget and
infeasibility problems exit 3, broken internal invariants exit 4.
"""


class GrammarError(Exception):
    """Base class for every error raised by this package."""


class InputError(GrammarError, ValueError):
    """Malformed or inconsistent user input (files, graphs, labels, arguments)."""


class BudgetExceeded(GrammarError):
    """A configured cap (iterations, steps, nodes, time) was hit."""


class Infeasible(GrammarError):
    """A combinatorial subproblem has no solution."""


class DeadEnd(Infeasible):
    """Sampling reached a state where every candidate rule is masked."""


class InvariantViolation(GrammarError, AssertionError):
    """An internal consistency check failed; indicates a bug or corrupt grammar."""
