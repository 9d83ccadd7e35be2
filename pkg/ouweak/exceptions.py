class OUWeakError(Exception):
    """Base of all errors raised by the library"""


class ModelError(OUWeakError):
    """Not a valid (Q, B) model"""


class NotSymmetric(ModelError):
    """Covariance matrix is not symmetric"""


class NotPositiveDefinite(ModelError):
    """Covariance matrix is not positive definite"""


class NotHurwitz(ModelError):
    """Drift matrix has an eigenvalue with nonnegative real part"""


class DimensionMismatch(ModelError, ValueError):
    """Array shapes do not fit together"""


class InvalidTime(ModelError, ValueError):
    """Time must be positive (or infinite where allowed)"""


class QuadratureFailure(OUWeakError):
    """Numerical integration did not reach its tolerance"""


class CholeskyFailure(OUWeakError):
    """Covariance matrix is numerically singular"""


class NotNormal(OUWeakError):
    """Semigroup is not normal, no canonical form exists"""


class DegenerateBlockWarning(UserWarning):
    """A 2x2 block with vanishing rotation was split into two scalar rates"""


class ZeroVector(OUWeakError, ValueError):
    """Polar coordinates are undefined at the origin"""


class UnknownLemma(OUWeakError, KeyError):
    """No inequality is registered under this name"""


class BudgetExceeded(OUWeakError):
    """Requested sample budget is above the hard limit"""


class NoRoot(OUWeakError):
    """Monotone equation has no solution"""


class GridTooCoarse(OUWeakError):
    """A selected grid point is not covered by its own forbidden zone"""


class NonTermination(OUWeakError):
    """Selection recursion did not stop within its iteration limit"""


class AlphaTooSmall(OUWeakError, ValueError):
    """Level is below the large-alpha threshold of the parameters"""


class ModelFileError(OUWeakError):
    """Model file can not be parsed"""


class ConfigFileError(OUWeakError):
    """User config file can not be read"""
