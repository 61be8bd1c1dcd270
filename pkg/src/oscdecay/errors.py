"""Exception hierarchy for the toolkit.

Every failure mode that callers are expected to handle gets its own class;
all inherit from :class:`OscDecayError` so a CLI can catch the lot.
"""


class OscDecayError(Exception):
    """Base class for all toolkit errors."""


# --- phase parsing -------------------------------------------------------

class PhaseSyntaxError(OscDecayError):
    """Malformed phase expression.

    Carries the offset of the offending token and the set of token kinds
    that would have been accepted there.
    """

    def __init__(self, message, position, expected=()):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.expected = frozenset(expected)


class NonPolynomialInput(OscDecayError):
    """Expression is not a polynomial (negative/fractional exponent, division
    by a non-constant, floating-point literal)."""


class UnknownSymbol(OscDecayError):
    """Variable other than x or y appeared in a phase expression."""

    def __init__(self, name, position):
        super().__init__(f"unknown symbol {name!r} (at position {position})")
        self.name = name
        self.position = position


# --- polynomial / hull geometry -----------------------------------------

class ZeroPolynomial(OscDecayError):
    """Operation requires a nonzero polynomial."""


class NotInSupport(OscDecayError):
    """Requested exponent pair is not a monomial of the polynomial."""


class DegeneratePhase(OscDecayError):
    """Phase splits as P(x) + Q(y); the operator has no power decay."""


# --- Puiseux resolution --------------------------------------------------

class TruncationTooCoarse(OscDecayError):
    """Two distinct root branches are indistinguishable at the requested
    truncation order."""


class NumericalRootFailure(OscDecayError):
    """Characteristic-root solver failed to produce finite roots."""


class AmbiguousCluster(OscDecayError):
    """Two coefficients fall in the gray zone around the clustering
    tolerance; refusing to guess a grouping."""


class CrosscheckMismatch(OscDecayError):
    """Puiseux-bookkeeping vertices disagree with the convex-hull vertices.
    Signals a bug or a tolerance failure; never ignored."""


class NoConvergence(OscDecayError):
    """Iterative solver did not converge."""


# --- discretized operators ----------------------------------------------

class GridBudgetExceeded(OscDecayError):
    """Oversampling guard needs more grid points than the budget allows."""

    def __init__(self, message, lambda_cap=None):
        super().__init__(message)
        self.lambda_cap = lambda_cap


class EmptyPiece(OscDecayError):
    """Dyadic piece support does not intersect the quadrature grid."""


class HessianOutOfWindow(OscDecayError):
    """Mixed Hessian leaves the required magnitude window on the scanned
    region (vanishes, changes sign, or exceeds the stated bounds)."""


class DivergentSliceIntegral(OscDecayError):
    """Slice integral of the damped kernel is numerically divergent."""


class DegenerateAtomInterval(OscDecayError):
    """Atom interval produced a vanishing oscillatory mean denominator."""
