"""Exception types shared across the package.

Invalid arguments raise plain ValueError; the classes here carry extra
semantics (solver state, mesh pathology) that callers may want to catch.
"""


class NdfemError(Exception):
    """Base class for package-specific failures."""


class RefinementError(NdfemError):
    """Longest-edge bisection closure exceeded its recursion cap."""


class NotEllipticError(NdfemError):
    """Coefficient matrix failed the ellipticity check at a sample point."""


class IllConditionedBasisError(NdfemError):
    """Element Gram matrix was numerically singular."""


class NonConvergenceError(NdfemError):
    """Iterative solver hit max_iter before reaching tolerance."""

    def __init__(self, message, stats):
        super().__init__(message)
        self.stats = stats
