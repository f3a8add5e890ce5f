"""Exception hierarchy.

``InputError`` marks malformed or invalid inputs (CLI exit code 2);
``NumericalError`` marks well-formed inputs the algorithms cannot handle
(CLI exit code 3).
"""


class SSVHError(Exception):
    pass


class InputError(SSVHError, ValueError):
    pass


class NumericalError(SSVHError, ArithmeticError):
    pass


class IdentifiabilityError(NumericalError):
    """Labeled points are not spread out enough (rank-deficient labels)."""


class SingularDesignError(NumericalError):
    """A regression design matrix is too ill-conditioned to invert."""


class DegenerateAlphaError(NumericalError):
    """No informative alpha exists for the given labels."""


class RankError(NumericalError):
    """Points lie in a lower-dimensional set than the requested simplex."""


class BudgetError(NumericalError):
    """An exhaustive search exceeds its combinatorial budget."""
