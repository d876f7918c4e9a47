"""Exception hierarchy shared by all modules.

Each class maps to a CLI exit code (see cli.py): ParameterError -> 1,
VerificationError -> 2, CapacityError -> 3.
"""


class PercoTasepError(Exception):
    """Base class for all package errors."""


class ParameterError(PercoTasepError):
    """A caller-supplied parameter is outside its documented range."""


class ContractError(PercoTasepError):
    """An input value violates a documented invariant (programming error)."""


class CapacityError(PercoTasepError):
    """The request exceeds a hard resource cap (e.g. exact solve for K > 7)."""


class DegenerateChainError(ParameterError):
    """The Markov chain is degenerate (eps in {0, 1}); refusing to solve."""


class EstimationError(PercoTasepError):
    """An estimator could not produce a value (e.g. zero admissible replicas)."""


class VerificationError(PercoTasepError):
    """A verification run found mismatches or bound violations."""
