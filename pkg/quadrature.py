"""
Quadrature plumbing for the selfdecomp toolkit.
Checked adaptive Gauss-Kronrod integration (QUADPACK through scipy), complex
integrands, and zero-to-zero segment sums with Euler acceleration for
conditionally convergent oscillatory tails.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from errors import ConfigError, QuadratureError

LOGGER = logging.getLogger(__name__)

# A QUADPACK warning is tolerated while the error estimate stays within
# this multiple of the requested tolerance
WARNING_SLACK = 1e3


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets for every integral evaluated by the toolkit"""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    t_min: float = 1e-12
    max_segments: int = 10_000
    accel_terms: int = 40
    t_huge: float = 1e6
    head_max: float = 1e4

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ConfigError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not self.rel_tol >= 0:
            raise ConfigError(f"rel_tol must be nonnegative, got {self.rel_tol!r}")
        if not self.t_min > 0:
            raise ConfigError(f"t_min must be positive, got {self.t_min!r}")
        if self.max_segments < 10:
            raise ConfigError(f"max_segments must be at least 10, got {self.max_segments!r}")
        if self.accel_terms < 4:
            raise ConfigError(f"accel_terms must be at least 4, got {self.accel_terms!r}")
        if not self.t_huge > 0 or not self.head_max > 0:
            raise ConfigError("t_huge and head_max must be positive")


DEFAULT_QUAD = QuadratureConfig()


def integrate(f, lo, hi, cfg=DEFAULT_QUAD, epsabs=None):
    """
    Integrate a real function over [lo, hi] (hi may be np.inf).

    Args:
        f: Real scalar integrand
        lo, hi: Integration limits
        cfg: QuadratureConfig supplying tolerances and the subinterval budget
        epsabs: Absolute tolerance overriding cfg.abs_tol

    Returns:
        (value, error_estimate, subintervals_used)
    """
    epsabs = cfg.abs_tol if epsabs is None else epsabs
    result = quad(f, lo, hi, epsabs=epsabs, epsrel=cfg.rel_tol,
                  limit=cfg.max_segments, full_output=1)
    value, err, info = result[0], result[1], result[2]
    used = int(info.get("last", 1))
    if len(result) > 3:
        bound = WARNING_SLACK * max(epsabs, cfg.rel_tol * abs(value))
        if not np.isfinite(value) or err > bound:
            raise QuadratureError(
                f"quadrature over [{lo}, {hi}] did not converge: {result[3].splitlines()[0]}",
                partial=value, residual=err,
            )
        LOGGER.debug("accepted quadrature over [%g, %g] with warning, err=%.3g", lo, hi, err)
    return value, err, used


def integrate_complex(f, lo, hi, cfg=DEFAULT_QUAD, epsabs=None):
    """Integrate a complex-valued integrand; the error is the sum of both parts"""
    re, re_err, re_used = integrate(lambda x: f(x).real, lo, hi, cfg, epsabs)
    im, im_err, im_used = integrate(lambda x: f(x).imag, lo, hi, cfg, epsabs)
    return complex(re, im), re_err + im_err, re_used + im_used


def euler_accelerate(partial_sums):
    """
    Euler transform of an alternating series given by its partial sums.

    Consecutive partial sums are averaged repeatedly; the last two averages
    bracket the limit and half their gap is returned as the error estimate.

    Returns:
        (limit_estimate, error_estimate)
    """
    levels = np.asarray(partial_sums, dtype=float)
    if levels.size == 0:
        return 0.0, 0.0
    if levels.size == 1:
        return float(levels[0]), float("inf")
    while levels.size > 2:
        levels = 0.5 * (levels[:-1] + levels[1:])
    return float(0.5 * (levels[0] + levels[1])), float(0.5 * abs(levels[1] - levels[0]))


def oscillatory_tail(f, node, cfg=DEFAULT_QUAD, first=0):
    """
    Integrate f over [node(first), inf) segment by segment between the
    consecutive zeros node(k) < node(k+1) of its oscillating kernel.

    Blocks of cfg.accel_terms segments are Euler-accelerated; when a block
    has not settled, its plain sum is kept and the next block is tried.

    Args:
        f: Real scalar integrand
        node: Callable k -> k-th zero of the kernel, increasing in k
        cfg: QuadratureConfig
        first: Index of the first node

    Returns:
        (value, error_estimate, subintervals_used)
    """
    settled, settled_err, used, segments = 0.0, 0.0, 0, 0
    k = first
    while True:
        running, sums = 0.0, []
        for j in range(cfg.accel_terms):
            seg, err, n = integrate(f, node(k + j), node(k + j + 1), cfg)
            running += seg
            sums.append(running)
            settled_err += err
            used += n
        segments += cfg.accel_terms
        value, accel_err = euler_accelerate(sums)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(settled + value))
        if accel_err <= tol:
            LOGGER.debug("oscillatory tail settled after %d segments", segments)
            return settled + value, settled_err + accel_err, used
        if segments >= cfg.max_segments:
            raise QuadratureError(
                f"oscillatory tail did not settle within {segments} segments",
                partial=settled + value, residual=accel_err,
            )
        settled += running
        k += cfg.accel_terms
