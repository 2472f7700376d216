"""Errors shared across the package."""


class TreeprovError(Exception):
    pass


class NoDecomposition(TreeprovError):
    """Raised when no tree decomposition of the requested width exists
    (or the heuristic cannot find one)."""


class StateBlowup(TreeprovError):
    """Subset construction exceeded the configured state cap."""


class NotStitchable(TreeprovError):
    """Circuit gate-id overlap is not exactly the inner circuit's inputs."""


class NotMonotone(TreeprovError):
    """Automaton failed the monotonicity inclusion check."""


class SizeCap(TreeprovError):
    """Polynomial expansion exceeded the monomial cap."""
