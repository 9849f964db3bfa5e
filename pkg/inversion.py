"""
Gil-Pelaez inversion for the selfdecomp toolkit.
Turns a (log) characteristic function into distribution function values,
    G(a) = 1/2 - (1/pi) int_0^inf Im(e^(-ita) psi(t)) dt/t,
and provides the closed-form oracles for the catalog models: the gamma
BDDF (Bessel, Poisson-mixture and sine-integral forms), the Levy and
1-stable BDDFs, and the chirp integral identity behind the Levy case.
"""

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from charfn import log_bdcf_function
from errors import DomainError
from quadrature import DEFAULT_QUAD, integrate, oscillatory_tail
from specfun import bessel_i1_kernel_scaled, erfc

LOGGER = logging.getLogger(__name__)

HEAD_MIN = 20.0
HEAD_PERIODS = 40.0
DRIFT_PROBE = 1e3


@dataclass(frozen=True)
class CdfPoint:
    """
    One evaluated distribution function value.

    ``value`` is clamped to [0, 1]; ``raw_value`` keeps the unclamped result
    and ``est_error`` the quadrature error estimate (scaled by 1/pi).
    """

    a: float
    value: float
    est_error: float
    segments_used: int
    raw_value: float

    def as_row(self):
        return (self.a, self.value, self.est_error, self.segments_used)


def _probe_limit(log_psi, quad):
    """lim |psi(t)|, t -> inf, read off at quad.t_huge"""
    z = cmath.exp(log_psi(quad.t_huge))
    return abs(z) if abs(z) > 1e-12 else 0.0


def _probe_drift(log_psi):
    """Slope of Im log psi(t) at large t, 0 when psi has died out there"""
    hi, lo = log_psi(DRIFT_PROBE + 1.0), log_psi(DRIFT_PROBE - 1.0)
    if hi.real < math.log(1e-12):
        return 0.0
    return 0.5 * (hi.imag - lo.imag)


def _inversion_integral(kernel, a, drift, quad):
    """
    int_0^inf kernel(t) dt for a Gil-Pelaez kernel oscillating like
    e^(-it(a - drift)).

    The head [t_min, T0] is integrated in s = sqrt(t); past T0 the integral
    runs from zero to zero of the oscillation with Euler acceleration, or
    straight to infinity when the oscillation is too slow to matter.
    """
    omega = abs(a - drift)
    oscillating = omega * quad.head_max > HEAD_PERIODS
    if oscillating:
        spacing = math.pi / omega
        first = math.ceil(max(HEAD_MIN, HEAD_PERIODS / omega) / spacing)
        t0 = first * spacing
    else:
        t0 = HEAD_MIN

    head, head_err, head_used = integrate(
        lambda s: 2.0 * s * kernel(s * s), math.sqrt(quad.t_min), math.sqrt(t0), quad
    )
    if oscillating:
        tail, tail_err, tail_used = oscillatory_tail(kernel, lambda k: k * spacing, quad, first=first)
    else:
        tail, tail_err, tail_used = integrate(kernel, t0, np.inf, quad)
    LOGGER.debug("inversion at a=%g: T0=%g head=%.12g tail=%.12g", a, t0, head, tail)
    return head + tail, head_err + tail_err, head_used + tail_used


def _cdf_point(a, integral, err, used, limit):
    # the constant part p0 of psi contributes p0 sign(a) / 2 in closed form
    raw = 0.5 + 0.5 * limit * float(np.sign(a)) - integral / math.pi
    value = min(max(raw, 0.0), 1.0)
    return CdfPoint(a=a, value=value, est_error=err / math.pi, segments_used=used, raw_value=raw)


def gil_pelaez_cdf(log_psi, a, quad=DEFAULT_QUAD, limit=None, drift=None):
    """
    Distribution function at a continuity point a from log psi.

    Args:
        log_psi: Callable t -> complex log characteristic function, log_psi(0) = 0
        a: Evaluation abscissa
        quad: QuadratureConfig
        limit: lim |psi(t)| at infinity (probed at quad.t_huge when None)
        drift: Asymptotic slope of Im log psi (probed when None)

    Returns:
        CdfPoint. At an atom the midpoint (G(a-) + G(a)) / 2 is returned.
    """
    a = float(a)
    limit = _probe_limit(log_psi, quad) if limit is None else limit
    drift = _probe_drift(log_psi) if drift is None else drift

    def kernel(t):
        wave = cmath.exp(complex(0.0, -t * a))
        return (wave * (cmath.exp(log_psi(t)) - limit)).imag / t

    integral, err, used = _inversion_integral(kernel, a, drift, quad)
    return _cdf_point(a, integral, err, used, limit)


def gil_pelaez_cdf_symmetric(log_psi_real, a, quad=DEFAULT_QUAD, limit=None):
    """
    Distribution function of a symmetric law from its real log CF:
        G(a) = 1/2 + (1/pi) int_0^inf psi(t) sin(ta) dt/t
    """
    a = float(a)
    if limit is None:
        limit = math.exp(log_psi_real(quad.t_huge))
        limit = limit if limit > 1e-12 else 0.0

    def kernel(t):
        return -(math.exp(log_psi_real(t)) - limit) * math.sin(t * a) / t

    integral, err, used = _inversion_integral(kernel, a, 0.0, quad)
    return _cdf_point(a, integral, err, used, limit)


def bddf(model, a, quad=DEFAULT_QUAD, numeric=False):
    """
    BDDF G(a) = P(Y(1) <= a) of a catalog model, inverted from the closed
    BDCF or, with numeric set, from central differences of log_cf.
    """
    a = float(a)
    if a == 0 and model.bdcf_limit > 0:
        LOGGER.warning("%s BDDF evaluated at its atom 0; returning the midpoint", model.kind.value)
    return gil_pelaez_cdf(log_bdcf_function(model, numeric), a, quad,
                          limit=model.bdcf_limit, drift=model.phase_velocity)


def bddf_grid(model, a_values, quad=DEFAULT_QUAD, workers=1, numeric=False):
    """BDDF on a grid; results keep the input order whatever the worker count"""
    a_values = [float(a) for a in a_values]
    if workers <= 1:
        return [bddf(model, a, quad, numeric) for a in a_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: bddf(model, a, quad, numeric), a_values))


# -- closed forms -----------------------------------------------------------

def _check_gamma_args(alpha, lam, a):
    if not (alpha > 0 and lam > 0):
        raise DomainError(f"alpha and lambda must be positive, got {alpha!r}, {lam!r}")
    if not a >= 0:
        raise DomainError(f"a must be nonnegative, got {a!r}")


def gamma_bddf_closed(alpha, lam, a, quad=DEFAULT_QUAD):
    """
    P(sum_{k<=N} E_k(lambda) <= a), N ~ Poisson(alpha), as
        e^-alpha + e^-alpha alpha lambda int_0^a I_1(2 sqrt(alpha lambda x)) / sqrt(alpha lambda x) e^(-lambda x) dx
    """
    alpha, lam, a = float(alpha), float(lam), float(a)
    _check_gamma_args(alpha, lam, a)
    atom = math.exp(-alpha)
    if a == 0:
        return atom

    def integrand(x):
        b = alpha * lam * x
        # e^(2 sqrt b - lambda x - alpha) <= 1
        return alpha * lam * bessel_i1_kernel_scaled(b) * math.exp(2.0 * math.sqrt(b) - lam * x - alpha)

    value, _, _ = integrate(integrand, 0.0, a, quad, epsabs=0.1 * quad.abs_tol)
    return atom + value


def gamma_bddf_bessel_form(alpha, lam, a, quad=DEFAULT_QUAD):
    """
    The same distribution function after w = 2 sqrt(alpha lambda x):
        e^-alpha + e^-alpha int_0^(2 sqrt(alpha lambda a)) I_1(w) e^(-w^2 / (4 alpha)) dw
    """
    alpha, lam, a = float(alpha), float(lam), float(a)
    _check_gamma_args(alpha, lam, a)
    upper = 2.0 * math.sqrt(alpha * lam * a)

    def integrand(w):
        return float(special.ive(1, w)) * math.exp(w - w * w / (4.0 * alpha) - alpha)

    value = integrate(integrand, 0.0, upper, quad, epsabs=0.1 * quad.abs_tol)[0] if upper > 0 else 0.0
    return math.exp(-alpha) + value


def gamma_bddf_mixture(alpha, lam, a, terms=60):
    """Poisson mixture sum_k e^-alpha alpha^k/k! P(gamma_{k,lambda} <= a), truncated at k = terms"""
    alpha, lam, a = float(alpha), float(lam), float(a)
    _check_gamma_args(alpha, lam, a)
    k = np.arange(1, terms + 1, dtype=float)
    weights = np.exp(k * math.log(alpha) - special.gammaln(k + 1.0) - alpha)
    return math.exp(-alpha) + math.fsum(weights * special.gammainc(k, lam * a))


def gamma_bddf_sine_integral(alpha, lam, a, quad=DEFAULT_QUAD):
    """
    The real-kernel form of the gamma BDDF,
        1/2 + (1/pi) int_0^inf exp(-alpha u^2/(1+u^2)) sin(ta - alpha u/(1+u^2)) dt/t,  u = t/lambda,
    integrated without removing the constant limit of psi: the tail is only
    conditionally convergent and is summed zero to zero.
    """
    alpha, lam, a = float(alpha), float(lam), float(a)
    _check_gamma_args(alpha, lam, a)
    if a == 0:
        raise DomainError("a = 0 is the atom of the gamma BDDF")

    def kernel(t):
        u = t / lam
        v = 1.0 + u * u
        return -math.exp(-alpha * u * u / v) * math.sin(t * a - alpha * u / v) / t

    integral, _, _ = _inversion_integral(kernel, a, 0.0, quad)
    return 0.5 - integral / math.pi


def stable1_bddf_closed(a, scale=1.0):
    """1/2 + arctan(a/scale)/pi"""
    return 0.5 + math.atan(float(a) / scale) / math.pi


def levy_bddf_closed(m, c, a):
    """
    BDDF of Levy(m, c): its BDRV is Levy(m, c/4), so
        G(a) = erfc(sqrt(c / (8 (a - m)))) for a > m, 0 otherwise.
    """
    m, c, a = float(m), float(c), float(a)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c!r}")
    if a <= m:
        return 0.0
    return erfc(math.sqrt(c / (8.0 * (a - m))))


def levy_chirp_closed(a):
    """(pi/2) (erfc(1/(|a| sqrt 2)) - 1/2)"""
    a = float(a)
    if a == 0:
        raise DomainError("the chirp identity needs a != 0")
    return 0.5 * math.pi * (erfc(1.0 / (abs(a) * math.sqrt(2.0))) - 0.5)


def levy_chirp_integral(a, quad=DEFAULT_QUAD):
    """
    int_0^inf e^-x sin((ax)^2 - x) dx/x by quadrature.

    The phase (ax)^2 - x turns upward at x = 1/(2a^2); past the first
    multiple of pi on the rising branch the integral runs zero to zero.
    """
    a = float(a)
    if a == 0:
        raise DomainError("the chirp identity needs a != 0")
    a2 = a * a

    def f(x):
        return math.exp(-x) * math.sin(a2 * x * x - x) / x

    def node(k):
        return (1.0 + math.sqrt(1.0 + 4.0 * a2 * k * math.pi)) / (2.0 * a2)

    head, _, _ = integrate(f, quad.t_min, node(1), quad)
    tail, _, _ = oscillatory_tail(f, node, quad, first=1)
    return head + tail


def levy_chirp_residual(a, quad=DEFAULT_QUAD):
    """|quadrature - closed form| for the chirp identity"""
    return abs(levy_chirp_integral(a, quad) - levy_chirp_closed(a))
