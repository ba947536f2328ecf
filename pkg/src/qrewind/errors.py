"""Exception types shared across the package."""


class DegenerateHamiltonianError(ValueError):
    """Hamiltonian proportional to the identity: no complement ancilla exists."""


class EmptySubspaceError(ValueError):
    """A spectral projection left no state weight to normalize."""


class InfiniteThresholdError(ValueError):
    """Flat (infinite-temperature) ancilla: the reversal threshold diverges."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge within its iteration cap."""


class ResourceBudgetError(RuntimeError):
    """Estimated cost of a run exceeds the configured operation budget."""
