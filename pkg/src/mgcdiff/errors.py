"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`MgcError`.
The CLI maps the three families below onto distinct exit codes.
"""


class MgcError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(MgcError, ValueError):
    """Invalid input: wrong shapes, violated invariants, malformed files."""

    exit_code = 2


class NotPositiveDefiniteError(ValidationError):
    """A covariance-like matrix failed its Cholesky factorization.

    ``pivot`` is the zero-based index of the first non-positive pivot and
    ``component`` (when known) the mixture component it belongs to.
    """

    def __init__(self, pivot, component=None, what="matrix"):
        self.pivot = pivot
        self.component = component
        where = "" if component is None else f" of component {component}"
        super().__init__(
            f"{what}{where} is not positive definite "
            f"(Cholesky pivot {pivot} is non-positive)"
        )


class TiedCovarianceRequired(ValidationError):
    def __init__(self, what="this operation"):
        super().__init__(f"{what} requires a tied-covariance mixture model")


class DimensionCapError(ValidationError):
    def __init__(self, required, allowed):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"feature map needs {required} coordinates, cap is {allowed}"
        )


class NumericalError(MgcError, ArithmeticError):
    """A computation could not be carried out to the required accuracy."""

    exit_code = 3


class NegligibleMassError(NumericalError):
    def __init__(self, value, floor):
        self.value = value
        self.floor = floor
        super().__init__(
            f"negligible stationary mass: nu = {value:.3e} is below the floor {floor:.3e}"
        )


class DegenerateComponentError(NumericalError):
    def __init__(self, component, detail=""):
        self.component = component
        msg = f"mixture component {component} collapsed during EM"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg + "; try fewer components")


class TruncationNotFound(NumericalError):
    def __init__(self, l_cap, eta_at_cap, target):
        self.l_cap = l_cap
        self.eta_at_cap = eta_at_cap
        self.target = target
        super().__init__(
            f"no truncation order up to {l_cap} meets the budget: "
            f"eta({l_cap}) = {eta_at_cap:.3e} > zeta^2/4 = {target:.3e}; "
            "relax zeta or nu_min"
        )


class BoundViolationError(MgcError):
    """A certified bound was found below the realized error."""

    exit_code = 4
