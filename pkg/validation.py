"""
Identity verification for the selfdecomp toolkit.
Each check evaluates both sides of one identity (moment formulas, series
sums, closed-form distribution functions, distributional equalities) and
returns an IdentityReport; run_all folds the whole matrix into a list of
reports ordered by identity id.
"""

import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from charfn import (
    BesselKModel, BesselKParams, GammaModel, GammaParams, LevyModel, LevyParams,
    LogGammaModel, LogGammaParams, ModelKind, SymStable1Model, SymStable1Params,
    cf_from_bdcf, innovation_log_cf, innovation_log_cf_besselk_closed,
    innovation_log_cf_from_bdcf, innovation_log_cf_gamma_closed, log_bdcf_closed,
    log_bdcf_loggamma_levy, log_bdcf_numeric, log_cf, loggamma_levy_density,
    loggamma_product_cf,
)
from errors import ConfigError, SelfDecompError
from inversion import (
    bddf, gamma_bddf_bessel_form, gamma_bddf_closed, gamma_bddf_mixture,
    gamma_bddf_sine_integral, gil_pelaez_cdf, gil_pelaez_cdf_symmetric,
    levy_bddf_closed, levy_chirp_closed, levy_chirp_integral, stable1_bddf_closed,
)
from quadrature import DEFAULT_QUAD, QuadratureConfig, integrate
from samplers import (
    DEFAULT_SERIES, RngStream, SeriesConfig, sample_besselk_innovation,
    sample_gamma_bdrv, sample_innovation, sample_law, sample_loggamma_direct,
    sample_loggamma_series,
)
from specfun import (
    EULER_GAMMA, bessel_i1_kernel, digamma, log_gamma_complex, trigamma,
)

LOGGER = logging.getLogger(__name__)

# identity id -> the statement it checks
IDENTITIES = {
    "cf_bdcf_roundtrip": "log phi(t) = int_0^t log psi(u) du/u for psi = exp(t phi'(t)/phi(t))",
    "stable_fixed_point": "the symmetric 1-stable law is its own background driving law: psi = phi",
    "loggamma_moments": "E log gamma(alpha, lambda) = Psi(alpha) - log lambda, Var = Psi'(alpha)",
    "trigamma_integral": "Psi'(alpha) = int_0^inf x e^(-alpha x) / (1 - e^-x) dx",
    "loggamma_bddf_moments": "log-gamma BDRV: mean Psi(alpha) - log lambda, variance int_0^inf x^2 e^(-alpha x) h_alpha(x) dx",
    "loggamma_levy_khintchine": "it(Psi(alpha+it) - log lambda) equals its Levy-Khintchine integral with density e^(-alpha x) h_alpha(x)",
    "loggamma_product": "Gamma(alpha+it)/Gamma(alpha) = e^(-iCt)/(1+it/alpha) prod_n e^(it/n)/(1+it/(alpha+n))",
    "series_identities": "sum 1/(n(n+alpha)) = (Psi(alpha+1)+C)/alpha and sum 1/(n+alpha)^2 = Psi'(alpha+1)",
    "bessel_series_kernel": "sum_{k>=1} b^(k-1)/(k!(k-1)!) = I_1(2 sqrt b)/sqrt b",
    "gamma_bddf_inversion": "Gil-Pelaez inversion of the gamma BDCF equals the Bessel-kernel distribution function",
    "gamma_bddf_mixture": "the gamma BDDF equals its Poisson mixture of gamma distribution functions",
    "gamma_bddf_bessel_form": "the gamma BDDF integral is unchanged by w = 2 sqrt(alpha lambda x)",
    "gamma_bddf_sine_integral": "the gamma BDDF equals its real sine-kernel integral",
    "gamma_bddf_atom": "the gamma BDDF tends to e^-alpha as a -> 0+",
    "gamma_bdrv_atom": "P(Y(1) = 0) = e^-alpha for the gamma BDRV",
    "levy_bddf_erfc": "the Levy(m, c) BDDF is erfc(sqrt(c / (8(a - m))))",
    "stable1_bddf_arctan": "the symmetric 1-stable BDDF is 1/2 + arctan(a)/pi",
    "besselk_bdcf": "the Bessel-K BDCF exp(-2 alpha u/(1+u)) equals exp(t phi'/phi) by differences",
    "besselk_symmetric_inversion": "the symmetric sine-kernel inversion agrees with the general one",
    "innovation_cf_closed": "phi(t)/phi(ct) equals its closed form and the truncated random integral of the BDLP",
    "besselk_innovation_cf": "the Bessel-K innovation sampler has CF (c^2 + (1-c^2)/(1+t^2/lambda^2))^alpha",
    "besselk_innovation_atom": "P(X_c = 0) = c^(2 alpha) for the Bessel-K innovation",
    "loggamma_series_ks": "the log-gamma random series has the law of log gamma(alpha, lambda)",
    "selfdecomposition": "X = cX + X_c in distribution",
    "levy_chirp_integral": "int_0^inf e^-x sin((ax)^2 - x) dx/x = (pi/2)(erfc(1/(|a| sqrt 2)) - 1/2)",
}

KS_TOLERANCE = 0.012
FD_STEP = 1e-4


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of one identity, the residual and the verdict"""

    identity_id: str
    lhs: object
    rhs: object
    residual: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_json(self):
        residual = self.residual if math.isfinite(self.residual) else None
        return {"identity_id": self.identity_id, "residual": residual,
                "tolerance": self.tolerance, "passed": self.passed, "params": self.metadata}


def _report(identity_id, lhs, rhs, residual, tolerance, **metadata):
    if identity_id not in IDENTITIES:
        raise KeyError(f"unregistered identity {identity_id!r}")
    residual = abs(float(residual))
    return IdentityReport(identity_id, lhs, rhs, residual, tolerance,
                          bool(residual <= tolerance), metadata)


def _richardson_first(f, h=FD_STEP):
    def central(step):
        return (f(step) - f(-step)) / (2.0 * step)
    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def _richardson_second(f, h=FD_STEP):
    f0 = f(0.0)

    def central(step):
        return (f(step) - 2.0 * f0 + f(-step)) / (step * step)
    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def _empirical_cf(values, t):
    return complex(np.mean(np.cos(t * values)), np.mean(np.sin(t * values)))


# -- characteristic functions -----------------------------------------------

def check_cf_bdcf_roundtrip(model, t_grid, quad=DEFAULT_QUAD):
    """max_t |int_0^t log psi(u) du/u - log phi(t)| over the grid"""
    gaps = [abs(cf_from_bdcf(model.log_bdcf, t, quad) - log_cf(model, t)) for t in t_grid]
    residual = max(gaps, default=0.0)
    return _report("cf_bdcf_roundtrip", residual, 0.0, residual, 1e-7,
                   model=model.to_descriptor(), t_grid=list(map(float, t_grid)))


def check_stable_fixed_point(scale, t_grid):
    model = SymStable1Model(SymStable1Params(scale))
    residual = max((abs(model.log_bdcf(t) - model.log_cf(t)) for t in t_grid), default=0.0)
    return _report("stable_fixed_point", residual, 0.0, residual, 1e-10, scale=scale)


def check_loggamma_levy_khintchine(alpha, t_grid, quad=DEFAULT_QUAD):
    params = LogGammaParams(alpha, 1.0)
    model = LogGammaModel(params)
    residual = max((abs(log_bdcf_loggamma_levy(t, params, quad) - model.log_bdcf(t)) for t in t_grid),
                   default=0.0)
    return _report("loggamma_levy_khintchine", residual, 0.0, residual, 1e-6, alpha=alpha)


def check_loggamma_product(alpha, t, n_terms=1000):
    """Partial product with completed tail against exp(log Gamma(alpha+it) - log Gamma(alpha))"""
    if n_terms < 1000:
        raise ConfigError(f"n_terms must be at least 1000, got {n_terms!r}")
    lhs = np.exp(loggamma_product_cf(alpha, t, n_terms))
    rhs = np.exp(log_gamma_complex(complex(alpha, t)) - log_gamma_complex(alpha))
    return _report("loggamma_product", complex(lhs), complex(rhs), abs(lhs - rhs), 1e-6,
                   alpha=alpha, t=t, n_terms=n_terms)


def check_besselk_bdcf(params, t_grid):
    model = BesselKModel(params)
    residual = max((abs(log_bdcf_closed(model, t) - log_bdcf_numeric(model, t)) for t in t_grid),
                   default=0.0)
    return _report("besselk_bdcf", residual, 0.0, residual, 1e-6, alpha=params.alpha, lam=params.lam)


def check_innovation_cf_closed(model, c, t_grid, quad=DEFAULT_QUAD):
    """
    phi(t)/phi(ct) three ways: as a ratio, in closed form where one exists,
    and as int_0^(-log c) log psi(e^-s t) ds.
    """
    closed = {
        ModelKind.GAMMA: innovation_log_cf_gamma_closed,
        ModelKind.BESSEL_K: innovation_log_cf_besselk_closed,
    }.get(model.kind)
    residual = 0.0
    for t in t_grid:
        ratio = innovation_log_cf(model, c, t)
        residual = max(residual, abs(innovation_log_cf_from_bdcf(model, c, t, quad) - ratio))
        if closed is not None:
            residual = max(residual, abs(closed(model.params, c, t) - ratio))
    return _report("innovation_cf_closed", residual, 0.0, residual, 1e-8,
                   model=model.to_descriptor(), c=c)


# -- special functions and series ---------------------------------------------

def check_trigamma_integral(alpha, quad=DEFAULT_QUAD):
    """int_0^inf x e^(-alpha x)/(1 - e^-x) dx against Psi'(alpha)"""
    def integrand(x):
        return x / -math.expm1(-x) * math.exp(-alpha * x)

    lhs, _, _ = integrate(integrand, 0.0, np.inf, quad, epsabs=0.1 * quad.abs_tol)
    rhs = trigamma(alpha)
    return _report("trigamma_integral", lhs, rhs, lhs - rhs, 1e-8, alpha=alpha)


def check_series_identities(alpha, n_terms=100_000):
    """
    Partial sums to N, completed by the midpoint tail int_{N+1/2}^inf, for
    both series in the Psi(alpha+1) and Psi'(alpha+1) identities.
    """
    n = np.arange(1, n_terms + 1, dtype=float)
    mid = n_terms + 0.5
    first = math.fsum(1.0 / (n * (n + alpha))) + math.log1p(alpha / mid) / alpha
    second = math.fsum(1.0 / (n + alpha) ** 2) + 1.0 / (mid + alpha)
    first_rhs = (digamma(alpha + 1.0) + EULER_GAMMA) / alpha
    second_rhs = trigamma(alpha + 1.0)
    residual = max(abs(first - first_rhs), abs(second - second_rhs))
    return _report("series_identities", (first, second), (first_rhs, second_rhs), residual, 1e-10,
                   alpha=alpha, n_terms=n_terms)


def check_bessel_series_kernel(b):
    """Relative gap between the series kernel and scipy's I_1"""
    lhs = bessel_i1_kernel(b)
    rhs = 1.0 if b == 0 else float(special.i1(2.0 * math.sqrt(b))) / math.sqrt(b)
    return _report("bessel_series_kernel", lhs, rhs, (lhs - rhs) / rhs, 1e-12, b=b)


# -- distribution functions ---------------------------------------------------

def check_gamma_bddf_inversion(alpha, lam, a_grid, quad=DEFAULT_QUAD):
    model = GammaModel(GammaParams(alpha, lam))
    residual = max((abs(bddf(model, a, quad).value - gamma_bddf_closed(alpha, lam, a, quad)) for a in a_grid),
                   default=0.0)
    return _report("gamma_bddf_inversion", residual, 0.0, residual, 1e-6, alpha=alpha, lam=lam)


def check_gamma_bddf_mixture(alpha, lam, a_grid, quad=DEFAULT_QUAD):
    residual = max((abs(gamma_bddf_mixture(alpha, lam, a) - gamma_bddf_closed(alpha, lam, a, quad))
                    for a in a_grid), default=0.0)
    return _report("gamma_bddf_mixture", residual, 0.0, residual, 1e-8, alpha=alpha, lam=lam)


def check_gamma_bddf_bessel_form(alpha, lam, a_grid, quad=DEFAULT_QUAD):
    residual = max((abs(gamma_bddf_bessel_form(alpha, lam, a, quad) - gamma_bddf_closed(alpha, lam, a, quad))
                    for a in a_grid), default=0.0)
    return _report("gamma_bddf_bessel_form", residual, 0.0, residual, 1e-8, alpha=alpha, lam=lam)


def check_gamma_bddf_sine_integral(alpha, lam, a_grid, quad=DEFAULT_QUAD):
    residual = max((abs(gamma_bddf_sine_integral(alpha, lam, a, quad) - gamma_bddf_closed(alpha, lam, a, quad))
                    for a in a_grid), default=0.0)
    return _report("gamma_bddf_sine_integral", residual, 0.0, residual, 1e-6, alpha=alpha, lam=lam)


def check_gamma_bddf_atom(alpha, quad=DEFAULT_QUAD):
    lhs = bddf(GammaModel(GammaParams(alpha, 1.0)), 1e-9, quad).value
    rhs = math.exp(-alpha)
    return _report("gamma_bddf_atom", lhs, rhs, lhs - rhs, 1e-6, alpha=alpha)


def check_levy_bddf_erfc(m, c, a_grid, quad=DEFAULT_QUAD):
    model = LevyModel(LevyParams(m, c))
    residual = max((abs(bddf(model, a, quad).value - levy_bddf_closed(m, c, a)) for a in a_grid),
                   default=0.0)
    return _report("levy_bddf_erfc", residual, 0.0, residual, 1e-6, m=m, c=c)


def check_stable1_bddf_arctan(scale, a_grid, quad=DEFAULT_QUAD):
    model = SymStable1Model(SymStable1Params(scale))
    residual = 0.0
    for a in a_grid:
        exact = stable1_bddf_closed(a, scale)
        residual = max(residual, abs(bddf(model, a, quad).value - exact),
                       abs(gil_pelaez_cdf_symmetric(model.log_bdcf_real, a, quad).value - exact))
    return _report("stable1_bddf_arctan", residual, 0.0, residual, 1e-6, scale=scale)


def check_besselk_symmetric_inversion(params, a, quad=DEFAULT_QUAD):
    model = BesselKModel(params)
    lhs = gil_pelaez_cdf_symmetric(model.log_bdcf_real, a, quad, limit=model.bdcf_limit).value
    rhs = gil_pelaez_cdf(model.log_bdcf, a, quad, limit=model.bdcf_limit, drift=0.0).value
    return _report("besselk_symmetric_inversion", lhs, rhs, lhs - rhs, 2e-8,
                   alpha=params.alpha, lam=params.lam, a=a)


def check_levy_chirp_integral(a, quad=DEFAULT_QUAD):
    lhs, rhs = levy_chirp_integral(a, quad), levy_chirp_closed(a)
    return _report("levy_chirp_integral", lhs, rhs, lhs - rhs, 1e-6, a=a)


def check_loggamma_bddf_moments(params, quad=DEFAULT_QUAD):
    """
    Mean and variance of the log-gamma BDRV from differences of log psi at 0,
    against the drift Psi(alpha) - log lambda and the variance integral.
    """
    model = LogGammaModel(params)
    log_psi = model.log_bdcf
    fd_mean = _richardson_first(lambda t: log_psi(t).imag)
    fd_var = -_richardson_second(lambda t: log_psi(t).real)
    drift = digamma(params.alpha) - math.log(params.lam)

    def integrand(x):
        return x * x * loggamma_levy_density(params.alpha, x)

    var_integral, _, _ = integrate(integrand, 0.0, np.inf, quad, epsabs=0.1 * quad.abs_tol)
    residual = max(abs(fd_mean - drift), abs(fd_var - var_integral))
    return _report("loggamma_bddf_moments", (fd_mean, fd_var), (drift, var_integral), residual, 1e-5,
                   alpha=params.alpha, lam=params.lam)


# -- Monte Carlo --------------------------------------------------------------

def check_loggamma_moments(params, n, rng, cfg=DEFAULT_SERIES):
    """
    Empirical mean and variance of the series sampler. The residual is the
    larger of |mean gap| / (4 standard errors) and |variance gap| / (5% of
    the variance), so the check passes at residual <= 1.
    """
    if n < 10_000:
        raise ConfigError(f"moment check needs n >= 10000, got {n!r}")
    values = sample_loggamma_series(params, n, cfg, rng).values
    mean, var = digamma(params.alpha) - math.log(params.lam), trigamma(params.alpha)
    emp_mean, emp_var = float(np.mean(values)), float(np.var(values, ddof=1))
    residual = max(abs(emp_mean - mean) / (4.0 * math.sqrt(var / n)), abs(emp_var - var) / (0.05 * var))
    return _report("loggamma_moments", (emp_mean, emp_var), (mean, var), residual, 1.0,
                   alpha=params.alpha, lam=params.lam, n=n, seed=rng.seed)


def check_loggamma_series_ks(params, n, rng, cfg=DEFAULT_SERIES):
    series = sample_loggamma_series(params, n, cfg, rng).values
    direct = sample_loggamma_direct(params, n, rng.spawn(rng.stream_id + 1)).values
    statistic = stats.ks_2samp(series, direct).statistic
    return _report("loggamma_series_ks", statistic, 0.0, statistic, KS_TOLERANCE,
                   alpha=params.alpha, lam=params.lam, n=n, seed=rng.seed)


def check_selfdecomposition(model, c, n, rng, cfg=DEFAULT_SERIES):
    """Two-sample KS between c x_i + z_i and fresh draws of X"""
    x = sample_law(model, n, rng, cfg).values
    z = sample_innovation(model, c, n, rng.spawn(rng.stream_id + 1), cfg).values
    fresh = sample_law(model, n, rng.spawn(rng.stream_id + 2), cfg).values
    statistic = stats.ks_2samp(c * x + z, fresh).statistic
    return _report("selfdecomposition", statistic, 0.0, statistic, KS_TOLERANCE,
                   model=model.to_descriptor(), c=c, n=n, seed=rng.seed)


def check_gamma_bdrv_atom(alpha, n, rng):
    values = sample_gamma_bdrv(GammaParams(alpha, 1.0), n, rng).values
    p = math.exp(-alpha)
    frac = float(np.mean(values == 0.0))
    return _report("gamma_bdrv_atom", frac, p, frac - p, 3.0 * math.sqrt(p * (1.0 - p) / n),
                   alpha=alpha, n=n, seed=rng.seed)


def check_besselk_innovation_atom(params, c, n, rng):
    values = sample_besselk_innovation(params, c, n, rng).values
    p = c ** (2.0 * params.alpha)
    frac = float(np.mean(values == 0.0))
    return _report("besselk_innovation_atom", frac, p, frac - p, 3.0 * math.sqrt(p * (1.0 - p) / n),
                   alpha=params.alpha, c=c, n=n, seed=rng.seed)


def check_besselk_innovation_cf(params, c, t_grid, n, rng):
    values = sample_besselk_innovation(params, c, n, rng).values
    residual = max((abs(_empirical_cf(values, t) - np.exp(innovation_log_cf_besselk_closed(params, c, t)))
                    for t in t_grid), default=0.0)
    return _report("besselk_innovation_cf", residual, 0.0, residual, 4.0 / math.sqrt(n),
                   alpha=params.alpha, lam=params.lam, c=c, n=n, seed=rng.seed)


# -- suite --------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    """
    Parameter matrix and budgets of the verification suite. Every check runs
    once per entry of the tuples it depends on; empty tuples drop checks.
    """

    alphas: tuple = (0.5, 1.0, 2.0)
    gamma_params: tuple = ((0.5, 1.0), (1.0, 1.0), (2.0, 3.0))
    loggamma_params: tuple = ((1.0, 1.0), (2.0, 1.0), (1.0, math.e))
    levy_params: tuple = ((0.0, 2.0),)
    stable_scales: tuple = (1.0,)
    besselk_params: tuple = ((1.0, 1.0), (2.0, 1.0))
    cs: tuple = (0.3, 0.7)
    chirp_points: tuple = (0.5, 1.0, 2.0)
    bessel_points: tuple = (0.0, 0.5, 1.0, 4.0, 25.0, 100.0, 400.0)
    t_grid: tuple = (0.5, 1.0, 2.0, 5.0)
    moment_samples: int = 1_000_000
    ks_samples: int = 100_000
    seed: int = 20_240_501
    tolerance_scale: float = 1.0
    only: str | None = None
    workers: int = 1
    quad: QuadratureConfig = DEFAULT_QUAD
    series: SeriesConfig = DEFAULT_SERIES
    innovation_series: SeriesConfig = SeriesConfig(truncation_n=1000)

    def __post_init__(self):
        if not self.tolerance_scale > 0:
            raise ConfigError(f"tolerance_scale must be positive, got {self.tolerance_scale!r}")
        if self.moment_samples < 10_000 or self.ks_samples < 1000:
            raise ConfigError("moment_samples must be >= 10000 and ks_samples >= 1000")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers!r}")
        if self.only is not None and not any(self.only in identity_id for identity_id in IDENTITIES):
            raise ConfigError(f"only={self.only!r} matches no identity id")

    @classmethod
    def empty(cls, **overrides):
        """A matrix with no entries"""
        blank = dict(alphas=(), gamma_params=(), loggamma_params=(), levy_params=(),
                     stable_scales=(), besselk_params=(), cs=(), chirp_points=(), bessel_points=())
        blank.update(overrides)
        return cls(**blank)


def _stream(cfg, label):
    """Per-check stream, fixed by the check's label whatever else runs"""
    return RngStream(cfg.seed, zlib.crc32(label.encode()))


def _planned_checks(cfg):
    """(identity_id, label, thunk) for every check of the matrix"""
    quad, grid = cfg.quad, cfg.t_grid
    gamma_grid = np.linspace(0.1, 5.0, 20)
    levy_grid = np.linspace(0.05, 10.0, 20)
    stable_grid = np.linspace(-5.0, 5.0, 20)
    plan = []

    def add(identity_id, label, thunk):
        plan.append((identity_id, f"{identity_id}:{label}", thunk))

    models = ([GammaModel(GammaParams(*p)) for p in cfg.gamma_params]
              + [LogGammaModel(LogGammaParams(*p)) for p in cfg.loggamma_params]
              + [LevyModel(LevyParams(*p)) for p in cfg.levy_params]
              + [SymStable1Model(SymStable1Params(s)) for s in cfg.stable_scales]
              + [BesselKModel(BesselKParams(*p)) for p in cfg.besselk_params])
    for model in models:
        add("cf_bdcf_roundtrip", model.to_descriptor(),
            lambda model=model: check_cf_bdcf_roundtrip(model, grid, quad))
    for scale in cfg.stable_scales:
        add("stable_fixed_point", scale, lambda scale=scale: check_stable_fixed_point(scale, grid))
        add("stable1_bddf_arctan", scale,
            lambda scale=scale: check_stable1_bddf_arctan(scale, stable_grid, quad))

    for alpha in cfg.alphas:
        add("trigamma_integral", alpha, lambda alpha=alpha: check_trigamma_integral(alpha, quad))
        add("series_identities", alpha, lambda alpha=alpha: check_series_identities(alpha))
        add("loggamma_levy_khintchine", alpha,
            lambda alpha=alpha: check_loggamma_levy_khintchine(alpha, (0.5, 1.0, 2.0), quad))
        add("loggamma_product", alpha, lambda alpha=alpha: check_loggamma_product(alpha, 1.0))
        add("gamma_bddf_atom", alpha, lambda alpha=alpha: check_gamma_bddf_atom(alpha, quad))
        label = f"gamma_bdrv_atom:{alpha}"
        add("gamma_bdrv_atom", alpha,
            lambda alpha=alpha, label=label: check_gamma_bdrv_atom(alpha, cfg.moment_samples, _stream(cfg, label)))
    for b in cfg.bessel_points:
        add("bessel_series_kernel", b, lambda b=b: check_bessel_series_kernel(b))

    for alpha, lam in cfg.gamma_params:
        for check in (check_gamma_bddf_inversion, check_gamma_bddf_mixture,
                      check_gamma_bddf_bessel_form, check_gamma_bddf_sine_integral):
            name = check.__name__.removeprefix("check_")
            add(name, (alpha, lam),
                lambda check=check, alpha=alpha, lam=lam: check(alpha, lam, gamma_grid, quad))
    for m, c in cfg.levy_params:
        add("levy_bddf_erfc", (m, c), lambda m=m, c=c: check_levy_bddf_erfc(m, c, levy_grid + m, quad))
    for a in cfg.chirp_points:
        add("levy_chirp_integral", a, lambda a=a: check_levy_chirp_integral(a, quad))

    for alpha, lam in cfg.loggamma_params:
        params = LogGammaParams(alpha, lam)
        add("loggamma_bddf_moments", (alpha, lam),
            lambda params=params: check_loggamma_bddf_moments(params, quad))
        label = f"loggamma_moments:{alpha}:{lam}"
        add("loggamma_moments", (alpha, lam),
            lambda params=params, label=label: check_loggamma_moments(
                params, cfg.moment_samples, _stream(cfg, label), cfg.series))
        label = f"loggamma_series_ks:{alpha}:{lam}"
        add("loggamma_series_ks", (alpha, lam),
            lambda params=params, label=label: check_loggamma_series_ks(
                params, cfg.ks_samples, _stream(cfg, label), cfg.series))

    for alpha, lam in cfg.besselk_params:
        params = BesselKParams(alpha, lam)
        add("besselk_bdcf", (alpha, lam), lambda params=params: check_besselk_bdcf(params, grid))
        add("besselk_symmetric_inversion", (alpha, lam),
            lambda params=params: check_besselk_symmetric_inversion(params, 0.5, quad))
        for c in cfg.cs:
            label = f"besselk_innovation:{alpha}:{lam}:{c}"
            add("besselk_innovation_atom", (alpha, lam, c),
                lambda params=params, c=c, label=label: check_besselk_innovation_atom(
                    params, c, cfg.moment_samples, _stream(cfg, label + ":atom")))
            add("besselk_innovation_cf", (alpha, lam, c),
                lambda params=params, c=c, label=label: check_besselk_innovation_cf(
                    params, c, (0.25, 0.5, 1.0, 2.0, 4.0), cfg.moment_samples, _stream(cfg, label + ":cf")))

    # X = cX + X_c for every law with an innovation sampler
    decomposable = ([m for m in models if m.kind in (ModelKind.GAMMA, ModelKind.BESSEL_K)]
                    + [m for m in models if m.kind is ModelKind.LOG_GAMMA][:1])
    for model in decomposable:
        for c in cfg.cs:
            descriptor = model.to_descriptor()
            add("innovation_cf_closed", (descriptor, c),
                lambda model=model, c=c: check_innovation_cf_closed(model, c, grid, quad))
            label = f"selfdecomposition:{descriptor}:{c}"
            add("selfdecomposition", (descriptor, c),
                lambda model=model, c=c, label=label: check_selfdecomposition(
                    model, c, cfg.ks_samples, _stream(cfg, label), cfg.innovation_series))
    return plan


def _run_check(identity_id, label, thunk, scale):
    try:
        report = thunk()
    except SelfDecompError as exc:
        LOGGER.error("%s failed: %s", label, exc)
        return IdentityReport(identity_id, None, None, math.inf, 0.0, False,
                              {"check": label, "error": str(exc)})
    tolerance = report.tolerance * scale
    report = IdentityReport(report.identity_id, report.lhs, report.rhs, report.residual, tolerance,
                            report.residual <= tolerance, report.metadata)
    LOGGER.info("%s: residual=%.3g tolerance=%.3g %s", label, report.residual, tolerance,
                "ok" if report.passed else "FAILED")
    return report


def run_all(cfg=None):
    """
    Run every check of the matrix, optionally filtered by an identity id
    substring, and return the reports sorted by identity id (ties keep
    matrix order). A failing check yields a failed report and the suite
    carries on.
    """
    cfg = SuiteConfig() if cfg is None else cfg
    plan = [job for job in _planned_checks(cfg) if cfg.only is None or cfg.only in job[0]]
    LOGGER.info("running %d checks", len(plan))
    if cfg.workers <= 1:
        reports = [_run_check(*job, cfg.tolerance_scale) for job in plan]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(lambda job: _run_check(*job, cfg.tolerance_scale), plan))
    order = sorted(range(len(plan)), key=lambda i: plan[i][0])
    return [reports[i] for i in order]
