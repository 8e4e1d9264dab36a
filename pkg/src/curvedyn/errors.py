"""Exception types shared across the package."""


class CurvedynError(Exception):
    """Base class for all numeric/domain failures raised by this package."""


class ZeroVector(CurvedynError):
    """All three homogeneous coordinates vanish to working precision."""


class ContextMismatch(CurvedynError):
    """Two operands carry different scalar contexts (field or precision)."""


class Indeterminate(CurvedynError):
    """A rational map was evaluated at (or too close to) an indeterminacy point."""


class RealContextError(CurvedynError):
    """Operation requires a complex scalar field."""


class BadParameter(CurvedynError):
    """Parameter value outside the family's admissible set."""


class DegreeMismatch(CurvedynError):
    """Homogeneous degrees do not line up."""


class DegenerateFiber(CurvedynError):
    """The symmetric-product fiber quadratic degenerated completely."""


class PoleAtPoint(CurvedynError):
    """Denominator of a rational function vanishes at the evaluation point."""


class PoleAtLattice(CurvedynError):
    """Weierstrass function evaluated at a lattice point."""


class NoConvergence(CurvedynError):
    """An iterative solver ran out of iterations."""


class OffCurve(CurvedynError):
    """Point does not satisfy the curve equation to the required residual."""


class SingularSample(CurvedynError):
    """A sample landed on a zero of the integrand and was rejected."""


class CriticalOrbitHit(CurvedynError):
    """A base orbit ran into a critical value and could not be restarted."""


class DegenerateLine(CurvedynError):
    """An entire coordinate line consists of fixed points."""


class InsufficientData(CurvedynError):
    """Not enough samples/iterates for the requested estimate."""


class NotACircle(CurvedynError):
    """The orbit tail failed the invariant-circle tests."""


class Escaped(CurvedynError):
    """The orbit left the region of interest (or converged to another attractor)."""


class NoSignChange(CurvedynError):
    """Root bracketing failed: both endpoints have the same confident sign."""


class IoError(CurvedynError):
    """Output file could not be written."""
