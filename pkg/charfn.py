"""
Characteristic functions for the selfdecomp toolkit.
A catalog of selfdecomposable laws with exact log-characteristic functions,
their background driving characteristic functions (BDCF), and the transform
    psi(t) = exp(t phi'(t) / phi(t)),   phi(t) = exp int_0^t log psi(u) du/u
in both directions.

Everything is computed in log space per model; no complex logarithm of a
product of CF values is ever taken, so no branch unwinding is needed.
"""

import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import MISSING, dataclass, fields
from enum import Enum

import numpy as np

from errors import DomainError, ModelDescriptorError
from quadrature import DEFAULT_QUAD, integrate, integrate_complex
from specfun import EULER_GAMMA, digamma, digamma_complex, log_gamma_complex, trigamma

LOGGER = logging.getLogger(__name__)


class ModelKind(str, Enum):
    GAMMA = "Gamma"
    LOG_GAMMA = "LogGamma"
    LEVY = "Levy"
    SYM_STABLE1 = "SymStable1"
    BESSEL_K = "BesselK"


def _require_positive(owner, **values):
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise DomainError(f"{owner}: {name} must be a positive finite number, got {value!r}")


def _require_finite(owner, **values):
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise DomainError(f"{owner}: {name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class GammaParams:
    """Shape alpha and rate lambda of gamma(alpha, lambda)"""

    alpha: float
    lam: float

    def __post_init__(self):
        _require_positive("GammaParams", alpha=self.alpha, lam=self.lam)


@dataclass(frozen=True)
class LogGammaParams:
    """Law of log X for X ~ gamma(alpha, lambda)"""

    alpha: float
    lam: float

    def __post_init__(self):
        _require_positive("LogGammaParams", alpha=self.alpha, lam=self.lam)


@dataclass(frozen=True)
class LevyParams:
    """Location m and scale c of the one-sided 1/2-stable law"""

    m: float
    c: float

    def __post_init__(self):
        _require_finite("LevyParams", m=self.m)
        _require_positive("LevyParams", c=self.c)


@dataclass(frozen=True)
class SymStable1Params:
    scale: float = 1.0

    def __post_init__(self):
        _require_positive("SymStable1Params", scale=self.scale)


@dataclass(frozen=True)
class BesselKParams:
    """Symmetrised gamma: CF (1 + t^2/lambda^2)^(-alpha)"""

    alpha: float
    lam: float

    def __post_init__(self):
        _require_positive("BesselKParams", alpha=self.alpha, lam=self.lam)


@dataclass(frozen=True)
class Moments:
    """Mean and variance of X and of its background driving variable Y(1)"""

    mean: float
    variance: float
    bdrv_mean: float
    bdrv_variance: float


class DistributionModel(ABC):
    """
    A selfdecomposable law from the catalog.

    Subclasses are frozen dataclasses holding a single ``params`` record and
    implement log_cf / log_bdcf. Two asymptotic hints describe the BDCF for
    the inversion engine: ``bdcf_limit`` (lim |psi(t)| as t -> inf, positive
    for compound Poisson laws) and ``phase_velocity`` (the slope of
    Im log psi(t) for large t).
    """

    kind = None
    params_type = None
    has_closed_bdcf = True
    is_symmetric = False

    @abstractmethod
    def log_cf(self, t):
        """log phi(t) on the principal branch"""

    @abstractmethod
    def log_bdcf(self, t):
        """log psi(t) for the background driving variable Y(1)"""

    @property
    def bdcf_limit(self):
        return 0.0

    @property
    def phase_velocity(self):
        return 0.0

    def log_bdcf_real(self, t):
        """Real log psi(t); only meaningful for symmetric laws"""
        if not self.is_symmetric:
            raise DomainError(f"{self.kind.value} is not symmetric")
        return self.log_bdcf(t).real

    def moments(self):
        raise DomainError(f"{self.kind.value} has no finite moments")

    def to_descriptor(self):
        """JSON-ready {"kind": ..., "params": {...}}"""
        names = PARAM_NAMES[self.kind]
        return {
            "kind": self.kind.value,
            "params": {key: getattr(self.params, attr) for key, attr in names.items()},
        }


@dataclass(frozen=True)
class GammaModel(DistributionModel):
    params: GammaParams
    kind = ModelKind.GAMMA
    params_type = GammaParams

    def log_cf(self, t):
        p = self.params
        return -p.alpha * np.log(complex(1.0, -t / p.lam))

    def log_bdcf(self, t):
        # alpha [1/(1 - it/lambda) - 1]
        p = self.params
        z = complex(0.0, t / p.lam)
        return p.alpha * z / (1.0 - z)

    @property
    def bdcf_limit(self):
        return math.exp(-self.params.alpha)

    def moments(self):
        p = self.params
        return Moments(p.alpha / p.lam, p.alpha / p.lam**2, p.alpha / p.lam, 2 * p.alpha / p.lam**2)


@dataclass(frozen=True)
class LogGammaModel(DistributionModel):
    params: LogGammaParams
    kind = ModelKind.LOG_GAMMA
    params_type = LogGammaParams

    def log_cf(self, t):
        p = self.params
        return (complex(0.0, -t * math.log(p.lam))
                + log_gamma_complex(complex(p.alpha, t))
                - log_gamma_complex(complex(p.alpha, 0.0)))

    def log_bdcf(self, t):
        # t * d/dt log phi = it (Psi(alpha + it) - log lambda)
        p = self.params
        if t == 0:
            return 0j
        return complex(0.0, t) * (digamma_complex(complex(p.alpha, t)) - math.log(p.lam))

    def moments(self):
        p = self.params
        mean = digamma(p.alpha) - math.log(p.lam)
        var = trigamma(p.alpha)
        return Moments(mean, var, mean, 2 * var)


@dataclass(frozen=True)
class LevyModel(DistributionModel):
    params: LevyParams
    kind = ModelKind.LEVY
    params_type = LevyParams

    @staticmethod
    def _log_cf(m, c, t):
        # imt - |ct|^(1/2) (1 - i sign t)
        root = math.sqrt(abs(c * t))
        if t == 0:
            return 0j
        return complex(-root, m * t + math.copysign(root, t))

    def log_cf(self, t):
        return self._log_cf(self.params.m, self.params.c, t)

    def log_bdcf(self, t):
        # t phi'/phi halves the |t|^(1/2) coefficient: Y(1) ~ Levy(m, c/4)
        return self._log_cf(self.params.m, self.params.c / 4.0, t)

    @property
    def phase_velocity(self):
        return self.params.m


@dataclass(frozen=True)
class SymStable1Model(DistributionModel):
    params: SymStable1Params
    kind = ModelKind.SYM_STABLE1
    params_type = SymStable1Params
    is_symmetric = True

    def log_cf(self, t):
        return complex(-self.params.scale * abs(t), 0.0)

    def log_bdcf(self, t):
        # fixed point of the transform
        return complex(-self.params.scale * abs(t), 0.0)


@dataclass(frozen=True)
class BesselKModel(DistributionModel):
    params: BesselKParams
    kind = ModelKind.BESSEL_K
    params_type = BesselKParams
    is_symmetric = True

    def log_cf(self, t):
        p = self.params
        return complex(-p.alpha * math.log1p((t / p.lam) ** 2), 0.0)

    def log_bdcf(self, t):
        p = self.params
        u = (t / p.lam) ** 2
        return complex(-2.0 * p.alpha * u / (1.0 + u), 0.0)

    @property
    def bdcf_limit(self):
        return math.exp(-2.0 * self.params.alpha)

    def moments(self):
        p = self.params
        return Moments(0.0, 2 * p.alpha / p.lam**2, 0.0, 4 * p.alpha / p.lam**2)


# Catalog: kind -> model class, and descriptor key -> params attribute
MODEL_TYPES = {
    ModelKind.GAMMA: GammaModel,
    ModelKind.LOG_GAMMA: LogGammaModel,
    ModelKind.LEVY: LevyModel,
    ModelKind.SYM_STABLE1: SymStable1Model,
    ModelKind.BESSEL_K: BesselKModel,
}

PARAM_NAMES = {
    ModelKind.GAMMA: {"alpha": "alpha", "lambda": "lam"},
    ModelKind.LOG_GAMMA: {"alpha": "alpha", "lambda": "lam"},
    ModelKind.LEVY: {"m": "m", "c": "c"},
    ModelKind.SYM_STABLE1: {"scale": "scale"},
    ModelKind.BESSEL_K: {"alpha": "alpha", "lambda": "lam"},
}


def make_model(kind, **params):
    """
    Build a catalog model from its kind and descriptor-style parameters.

    Example:
        make_model("Gamma", alpha=2.0, **{"lambda": 3.0})
    """
    try:
        kind = ModelKind(kind)
    except ValueError:
        known = ", ".join(k.value for k in ModelKind)
        raise ModelDescriptorError(f"unknown model kind {kind!r}; expected one of {known}") from None
    names = PARAM_NAMES[kind]
    unknown = set(params) - set(names)
    if unknown:
        raise ModelDescriptorError(f"{kind.value}: unknown parameters {sorted(unknown)}")
    cls = MODEL_TYPES[kind]
    required = {f.name for f in fields(cls.params_type)
                if f.default is MISSING and f.default_factory is MISSING}
    kwargs = {}
    for key, attr in names.items():
        if key in params:
            value = params[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ModelDescriptorError(f"{kind.value}: parameter {key!r} must be a number")
            kwargs[attr] = float(value)
        elif attr in required:
            raise ModelDescriptorError(f"{kind.value}: missing parameter {key!r}")
    try:
        return cls(cls.params_type(**kwargs))
    except DomainError as exc:
        raise ModelDescriptorError(str(exc)) from exc


def from_descriptor(descriptor):
    """Parse a {"kind", "params"} mapping or its JSON text into a model"""
    if isinstance(descriptor, str):
        try:
            descriptor = json.loads(descriptor)
        except json.JSONDecodeError as exc:
            raise ModelDescriptorError(f"model descriptor is not valid JSON: {exc}") from exc
    if not isinstance(descriptor, dict) or "kind" not in descriptor:
        raise ModelDescriptorError('model descriptor must be an object with a "kind" key')
    params = descriptor.get("params", {})
    if not isinstance(params, dict):
        raise ModelDescriptorError('"params" must be an object')
    return make_model(descriptor["kind"], **params)


def to_descriptor(model):
    return model.to_descriptor()


# -- operations on models ---------------------------------------------------

def log_cf(model, t):
    """log phi(t); Hermitian: log_cf(model, -t) == conj(log_cf(model, t))"""
    return model.log_cf(float(t))


def log_bdcf_closed(model, t):
    """log psi(t) from the closed form of the model's BDCF"""
    return model.log_bdcf(float(t))


def default_step(t):
    # at most |t|/4 so the stencil stays on one side of 0
    return min(1e-5 * max(1.0, abs(t)), abs(t) / 4.0)


def log_bdcf_numeric(model, t, h=None):
    """
    t * d/dt log phi(t) by central differences of log_cf.

    Args:
        model: Catalog model
        t: Nonzero evaluation point
        h: Difference step, default min(1e-5 * max(1, |t|), |t|/4); must be below |t|/2

    Returns:
        Complex log psi(t), exact up to O(h^2)
    """
    t = float(t)
    if t == 0:
        raise DomainError("numeric BDCF needs t != 0")
    h = default_step(t) if h is None else float(h)
    if not h > 0 or h >= abs(t) / 2:
        raise DomainError(f"degenerate difference step h={h!r} for t={t!r}")
    return t * (model.log_cf(t + h) - model.log_cf(t - h)) / (2.0 * h)


def log_bdcf_function(model, numeric=False):
    """
    Callable t -> log psi(t): the model's closed form, or central
    differences of log_cf when numeric is set or no closed form exists.
    """
    if model.has_closed_bdcf and not numeric:
        return model.log_bdcf

    def log_psi(t):
        return 0j if t == 0 else log_bdcf_numeric(model, t)
    return log_psi


def loggamma_levy_density(alpha, x):
    """
    e^(-alpha x) h_alpha(x) with h_alpha(x) = [alpha + (1-alpha) e^-x] (1 - e^-x)^-2,
    the Levy density (reflected to x > 0) of the log-gamma BDRV.
    """
    em1 = -math.expm1(-x)
    return math.exp(-alpha * x) * (alpha + (1.0 - alpha) * math.exp(-x)) / (em1 * em1)


def _compensated_exp(u):
    """e^(-iu) - 1 + iu split into (real, imag) without cancellation"""
    if abs(u) < 1e-3:
        u2 = u * u
        return -0.5 * u2 * (1.0 - u2 / 12.0), u * u2 / 6.0 * (1.0 - u2 / 20.0)
    half = math.sin(0.5 * u)
    return -2.0 * half * half, u - math.sin(u)


def log_bdcf_loggamma_levy(t, params, quad=DEFAULT_QUAD):
    """
    Log-gamma BDCF through its Levy-Khintchine form:
        it(-log lambda + Psi(alpha)) + int_0^inf (e^(-itx) - 1 + itx) e^(-alpha x) h_alpha(x) dx
    """
    t = float(t)
    if t == 0:
        return 0j
    alpha = params.alpha
    # e^(-alpha x) (1 + x)^2 is below 1e-30 past this point
    upper = (80.0 + 2.0 * math.log1p(80.0 / alpha)) / alpha

    def real_part(x):
        return _compensated_exp(t * x)[0] * loggamma_levy_density(alpha, x)

    def imag_part(x):
        return _compensated_exp(t * x)[1] * loggamma_levy_density(alpha, x)

    eps = 0.1 * quad.abs_tol
    re, re_err, _ = integrate(real_part, 0.0, upper, quad, epsabs=eps)
    im, im_err, _ = integrate(imag_part, 0.0, upper, quad, epsabs=eps)
    LOGGER.debug("Levy-Khintchine log-gamma BDCF at t=%g, err=%.3g", t, re_err + im_err)
    drift = t * (digamma(alpha) - math.log(params.lam))
    return complex(re, drift + im)


def cf_from_bdcf(log_psi, t, quad=DEFAULT_QUAD):
    """
    Reconstruct log phi(t) = int_0^t log psi(u) du/u.

    The substitution u = t w^2 keeps the integrand bounded when log psi
    behaves like |u|^(1/2) at the origin (1/2-stable laws).
    """
    t = float(t)
    if abs(log_psi(0.0)) > 1e-12:
        raise DomainError("log_psi(0) must vanish")
    if t == 0:
        return 0j

    def integrand(w):
        if w == 0:
            return 0j
        return 2.0 * log_psi(t * w * w) / w

    value, _, _ = integrate_complex(integrand, 0.0, 1.0, quad, epsabs=0.1 * quad.abs_tol)
    return value


def _check_c(c):
    c = float(c)
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    return c


def innovation_log_cf(model, c, t):
    """log CF of the innovation X_c in X = cX + X_c: log phi(t) - log phi(ct)"""
    c = _check_c(c)
    t = float(t)
    return model.log_cf(t) - model.log_cf(c * t)


def innovation_log_cf_from_bdcf(model, c, t, quad=DEFAULT_QUAD):
    """
    The innovation as the truncated random integral int_0^(-log c) e^-s dY(s):
        log phi_c(t) = int_0^(-log c) log psi(e^-s t) ds
    """
    c = _check_c(c)
    t = float(t)
    value, _, _ = integrate_complex(lambda s: model.log_bdcf(math.exp(-s) * t),
                                    0.0, -math.log(c), quad, epsabs=0.1 * quad.abs_tol)
    return value


def innovation_log_cf_gamma_closed(params, c, t):
    """alpha log((1 - ict/lambda) / (1 - it/lambda))"""
    c = _check_c(c)
    return params.alpha * (np.log(complex(1.0, -c * t / params.lam))
                           - np.log(complex(1.0, -t / params.lam)))


def innovation_log_cf_besselk_closed(params, c, t):
    """alpha log(c^2 + (1 - c^2) / (1 + t^2/lambda^2)), a two-point mixture of CFs"""
    c = _check_c(c)
    mix = c * c + (1.0 - c * c) / (1.0 + (t / params.lam) ** 2)
    return complex(params.alpha * math.log(mix), 0.0)


def series_tail_mean(alpha, n_terms):
    """
    sum_{n > N} alpha / (n (alpha + n)), completed in closed form from
    sum_{n >= 1} 1/(n (n + alpha)) = (Psi(alpha + 1) + C) / alpha.
    """
    n = np.arange(1, n_terms + 1, dtype=float)
    head = math.fsum(alpha / (n * (n + alpha)))
    return (digamma(alpha + 1.0) + EULER_GAMMA) - head


def loggamma_product_cf(alpha, t, n_terms=1000):
    """
    log of e^(-iCt)/(1 + it/alpha) prod_{n<=N} e^(it/n)/(1 + it/(alpha+n)),
    with the factors beyond N completed to second order in t:
        it sum_{n>N} alpha/(n(alpha+n)) - (t^2/2) Psi'(alpha+N+1)
    The result approximates log Gamma(alpha+it) - log Gamma(alpha).
    """
    _require_positive("loggamma_product_cf", alpha=float(alpha))
    if n_terms < 1:
        raise DomainError(f"n_terms must be positive, got {n_terms!r}")
    t = float(t)
    n = np.arange(1, n_terms + 1, dtype=float)
    factors = 1j * t / n - np.log1p(1j * t / (alpha + n))
    head = complex(math.fsum(factors.real), math.fsum(factors.imag))
    tail = complex(-0.5 * t * t * trigamma(alpha + n_terms + 1.0),
                   t * series_tail_mean(alpha, n_terms))
    return complex(0.0, -EULER_GAMMA * t) - np.log1p(1j * t / alpha) + head + tail


def moments(model):
    """Mean and variance of X and of Y(1); DomainError for laws without them"""
    return model.moments()
