"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: input errors -> 3, capability and
capacity errors -> 4.
"""


class HybridCoverError(Exception):
    """Base class for all package-specific errors."""


class InputError(HybridCoverError, ValueError):
    """Malformed or invalid user input (bad documents, bad arguments)."""


class CapabilityError(HybridCoverError):
    """A requested (norm, dimension, method) combination is not supported."""


class CapacityError(HybridCoverError):
    """A size guard was exceeded (e.g. brute-force enumeration too large)."""


class ContractError(HybridCoverError):
    """An internal contract was broken (e.g. a callback returned no violated cut)."""


class SolverError(HybridCoverError):
    """Numerical failure inside the LP/IP machinery."""
