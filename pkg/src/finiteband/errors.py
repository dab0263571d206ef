"""Exception hierarchy shared across the package."""


class FinitebandError(Exception):
    """Base class for all package-specific errors."""


# --- linear algebra ---

class NotHermitian(FinitebandError):
    pass


class NoConvergence(FinitebandError):
    pass


class DomainError(FinitebandError):
    pass


class DimMismatch(FinitebandError):
    pass


# --- branch cut / band structure ---

class OnCut(FinitebandError):
    pass


# --- pencils ---

class NotSelfAdjoint(FinitebandError):
    pass


class LeadingNotPositive(FinitebandError):
    pass


class NotPolynomial(FinitebandError):
    pass


# --- Weyl / Herglotz machinery ---

class ZoneViolation(FinitebandError):
    pass


class DegenerateResidue(FinitebandError):
    pass


class SingularF(FinitebandError):
    pass


class SingularDifference(FinitebandError):
    pass


class ExtrapolationDiverged(FinitebandError):
    pass


class QuadratureNotConverged(FinitebandError):
    pass


# --- elliptic functions ---

class DegenerateGap(FinitebandError):
    pass


class PoleProximity(FinitebandError):
    pass


# --- ODE / flow ---

class StepUnderflow(FinitebandError):
    pass


class IdentityDrift(FinitebandError):
    pass


class InsufficientDerivatives(FinitebandError):
    pass


class WindowTooNarrow(FinitebandError):
    pass


# --- CLI ---

class ConfigError(FinitebandError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ParseError(FinitebandError):
    pass
