"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input: bad shapes, non-finite entries,
    schema violations.  The CLI maps this to exit code 2."""


class NotPSDError(ValueError):
    """A matrix required to be positive semidefinite has a genuinely
    negative eigenvalue (beyond tolerance)."""


class RangeInclusionError(Exception):
    """Raised when a range-inclusion factorization U = V T is impossible,
    i.e. the columns of U are not contained in the column space of V.

    Carries the relative defect ``residual`` = ||V V+ U - U||_F / ||U||_F.
    """

    def __init__(self, residual):
        super().__init__(f"range inclusion fails (relative defect {residual:.3e})")
        self.residual = residual


class PreconditionError(ValueError):
    """An operation was invoked on inputs that fail its mathematical
    precondition (for example decomposing against a refuted operator)."""


class InadmissibleError(ValueError):
    """Perturbation parameters violate the admissibility condition."""
