"""
Special functions for the selfdecomp toolkit.
Log-gamma, digamma and trigamma on the right half plane, erf/erfc, and the
Bessel series kernel sum_{k>=1} b^(k-1) / (k! (k-1)!) = I_1(2 sqrt b) / sqrt b.

All functions are pure and refuse arguments with a nonpositive real part
instead of continuing analytically.
"""

import logging
import math

import numpy as np
from scipy import special

from errors import DomainError, NonFiniteError, SeriesConvergenceError

LOGGER = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)

# Series kernel controls
SERIES_CUTOFF = 1e-16
SERIES_MAX_TERMS = 500
BESSEL_SWITCH = 30.0  # switch to the scaled library form when 2 sqrt(b) exceeds this
_EXP_LIMIT = math.log(np.finfo(float).max)


def _finite(value, name):
    """Refuse NaN/Inf results"""
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"{name} produced a non-finite value: {value!r}")
    return value


def _as_complex(z):
    z = complex(z)
    if not (z.real > 0):
        raise DomainError(f"real part must be positive, got {z!r}")
    return z


def _as_positive(x, name="x"):
    x = float(x)
    if not (x > 0):
        raise DomainError(f"{name} must be positive, got {x!r}")
    return x


def log_gamma_complex(z):
    """
    Principal branch of log Gamma(z) for Re z > 0.

    The branch is continuous along every vertical line z = alpha + it, so
    the result can be differentiated in t without unwinding.
    """
    z = _as_complex(z)
    return _finite(complex(special.loggamma(z)), "log_gamma_complex")


def log_gamma(x):
    """log Gamma(x) for real x > 0"""
    x = _as_positive(x)
    return _finite(float(special.gammaln(x)), "log_gamma")


def digamma(x):
    """Psi(x) = d/dx log Gamma(x) for real x > 0"""
    x = _as_positive(x)
    return _finite(float(special.digamma(x)), "digamma")


def digamma_complex(z):
    """Psi(z) for Re z > 0"""
    z = _as_complex(z)
    return _finite(complex(special.digamma(z)), "digamma_complex")


def trigamma(x):
    """Psi'(x) = sum_{k>=0} 1/(x+k)^2 for real x > 0"""
    x = _as_positive(x)
    return _finite(float(special.polygamma(1, x)), "trigamma")


def erf(x):
    """Error function (2/sqrt(pi)) int_0^x exp(-s^2) ds"""
    return _finite(float(special.erf(float(x))), "erf")


def erfc(x):
    """Complementary error function 1 - erf(x), accurate in the upper tail"""
    x = float(x)
    if math.isnan(x):
        raise DomainError("erfc of NaN")
    return float(special.erfc(x))


def _bessel_series(b):
    """Direct summation of sum_{k>=1} b^(k-1)/(k!(k-1)!)"""
    total = 1.0
    term = 1.0
    for k in range(1, SERIES_MAX_TERMS + 1):
        term *= b / (k * (k + 1))
        total += term
        if term < SERIES_CUTOFF * total:
            return total
    raise SeriesConvergenceError(
        f"Bessel kernel series exceeded {SERIES_MAX_TERMS} terms at b={b!r}"
    )


def bessel_i1_kernel(b):
    """
    Evaluate sum_{k>=1} b^(k-1) / (k! (k-1)!) = I_1(2 sqrt b) / sqrt b.

    Args:
        b: Nonnegative argument

    Returns:
        The kernel value; 1 at b = 0
    """
    b = float(b)
    if not (b >= 0):
        raise DomainError(f"b must be nonnegative, got {b!r}")
    z = 2.0 * math.sqrt(b)
    if z <= BESSEL_SWITCH:
        return _bessel_series(b)
    if z > _EXP_LIMIT:
        raise NonFiniteError(f"Bessel kernel overflows at b={b!r}")
    return _finite(float(special.ive(1, z)) * math.exp(z) / math.sqrt(b), "bessel_i1_kernel")


def bessel_i1_kernel_scaled(b):
    """bessel_i1_kernel(b) * exp(-2 sqrt b), finite for every b >= 0"""
    b = float(b)
    if not (b >= 0):
        raise DomainError(f"b must be nonnegative, got {b!r}")
    z = 2.0 * math.sqrt(b)
    if z <= BESSEL_SWITCH:
        return _bessel_series(b) * math.exp(-z)
    return float(special.ive(1, z)) / math.sqrt(b)
