"""
Verification Errors
Exception hierarchy mapped onto CLI exit codes
"""

from fractions import Fraction
from typing import Optional


class VerificationError(Exception):
    """Base error carrying the exit code a suite run reports for it"""

    exit_code: int = 2
    status: str = "error"

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class PrecisionInsufficientError(VerificationError):
    """A valuation or index could not be certified at the working precision"""

    exit_code = 2
    status = "precision"


class CapExceededError(VerificationError):
    """An exhaustive enumeration would exceed its configured cap"""

    exit_code = 2
    status = "cap"

    def __init__(self, size: int, cap: int, what: str = "enumeration"):
        super().__init__(f"{what} of size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class HorizonError(VerificationError):
    """A nonzero contribution was found one layer beyond the horizon"""

    exit_code = 2
    status = "precision"


class DegenerateInputError(VerificationError, ValueError):
    """Singular, non-regular or otherwise inadmissible input"""

    exit_code = 2
    status = "degenerate"


class UnsupportedFieldError(VerificationError, ValueError):
    """Wild ramification or a reducible residue polynomial"""

    exit_code = 3
    status = "config"


class UnsupportedRootSystemError(VerificationError, ValueError):
    """Unknown root system, or rank too large for an enumeration"""

    exit_code = 3
    status = "config"


class ConfigError(VerificationError):
    """Unparseable literal, flag or suite configuration"""

    exit_code = 3
    status = "config"


class ThresholdError(VerificationError):
    """Exponent at or above the summability threshold"""

    exit_code = 3
    status = "config"

    def __init__(self, eps: Fraction, threshold: Fraction):
        super().__init__(f"eps={eps} is not below the threshold {threshold}")
        self.eps = eps
        self.threshold = threshold


def check_cap(size: int, cap: int, what: str = "enumeration") -> None:
    """Raise CapExceededError when an enumeration of `size` items is over `cap`"""
    if size > cap:
        raise CapExceededError(size, cap, what)
