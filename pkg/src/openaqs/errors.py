"""Shared exception types."""


class ValidityError(ValueError):
    """Inputs leave the weak-coupling / perturbative regime the formulas assume."""


class ConvergenceError(RuntimeError):
    """An iterative solve or truncated integral failed to converge."""


class InstabilityError(ValueError):
    """Quadratic form is not positive definite (dynamical instability or zero mode)."""


class BranchError(ValueError):
    """Matrix logarithm hit a branch-cut eigenvalue; no principal generator exists."""
