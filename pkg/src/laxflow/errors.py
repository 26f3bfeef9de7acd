"""Exception types shared across the package."""


class LaxflowError(Exception):
    """Base class for all errors raised by laxflow."""


class ShapeViolation(LaxflowError):
    """An entry of a polynomial matrix exceeds its degree bound.

    Carries the offending entry position (1-based) and degree.
    """

    def __init__(self, position, degree, bound):
        self.position = position
        self.degree = degree
        self.bound = bound
        super().__init__(
            f"entry {position} has degree {degree}, bound is {bound}"
        )


class ParseError(LaxflowError):
    """Serialized input is malformed."""


class SingularB(LaxflowError):
    """The B block of a gauge element is singular within tolerance."""


class NotInMc(LaxflowError):
    """det D(A;c) vanishes, so A has no normal form at this node."""


class RamifiedPoint(LaxflowError):
    """The fiber over the requested node has a repeated eigenvalue."""


class DivisionResidue(LaxflowError):
    """Synthetic division left a remainder above tolerance."""


class NotInSlice(LaxflowError):
    """The matrix does not satisfy the slice constraints."""


class LinearSolveFailure(LaxflowError):
    """A linear system that is expected to be regular was singular."""


class NotInImage(LaxflowError):
    """A multi-point does not satisfy the image constraints of the embedding."""


class MultipleRoot(LaxflowError):
    """Root separation fell below the simple-root threshold."""


class NuNotFound(LaxflowError):
    """No candidate vector satisfied the separating-determinant condition."""


class ZeroDenominator(LaxflowError):
    """A closed-form denominator vanished at the evaluation point."""


class SliceDeparture(LaxflowError):
    """Integration left the slice beyond the abort threshold."""
