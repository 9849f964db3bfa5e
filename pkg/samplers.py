"""
Exact-law samplers for the selfdecomp toolkit.
Compound Poisson background driving variables, the log-gamma random series
and its innovation series, the Bessel-K normal variance mixture, and the
compound Poisson innovations of the Bessel-K and gamma laws.

Every sampler takes an RngStream and builds a fresh numpy Generator from it,
so equal (seed, stream_id, config) give bit-identical batches.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from charfn import BesselKParams, GammaParams, LogGammaParams, ModelKind, series_tail_mean
from errors import ConfigError, DomainError
from specfun import EULER_GAMMA, digamma

LOGGER = logging.getLogger(__name__)

SEED_LIMIT = 2**64
# Upper bound on the number of exponentials held in memory at once
CHUNK_ELEMENTS = 2**22


@dataclass(frozen=True)
class RngStream:
    """
    One independent random stream: numpy PCG64 seeded by
    SeedSequence(seed, spawn_key=(stream_id,)).
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or not 0 <= value < SEED_LIMIT:
                raise ConfigError(f"{name} must be an integer in [0, 2**64), got {value!r}")

    def generator(self):
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))

    def spawn(self, stream_id):
        return replace(self, stream_id=stream_id)


@dataclass(frozen=True)
class SeriesConfig:
    """
    Truncation of the log-gamma random series.

    Terms n <= block_terms are drawn one by one; the rest of the truncated
    series is drawn as a single block with the same law.
    """

    truncation_n: int = 10_000
    tail_mean_correction: bool = True
    block_terms: int = 64

    def __post_init__(self):
        if self.truncation_n < 1:
            raise ConfigError(f"truncation_n must be at least 1, got {self.truncation_n!r}")
        if self.block_terms < 0:
            raise ConfigError(f"block_terms must be nonnegative, got {self.block_terms!r}")


DEFAULT_SERIES = SeriesConfig()


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Draws plus the seed and generator that produced them"""

    values: np.ndarray
    n: int
    seed: int
    generator_tag: str
    stream_id: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != self.n:
            raise ValueError(f"batch holds {len(self.values)} values, expected {self.n}")


def _check_count(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


def _check_c(c):
    c = float(c)
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    return c


def _batch(values, rng, tag, **metadata):
    LOGGER.info("%s: drew %d values (seed=%d, stream=%d)", tag, len(values), rng.seed, rng.stream_id)
    return SampleBatch(values=values, n=len(values), seed=rng.seed, generator_tag=tag,
                       stream_id=rng.stream_id, metadata=metadata)


def _compound_sum(counts, jumps):
    """Per-draw sums of consecutive jumps, counts[i] of them for draw i"""
    owners = np.repeat(np.arange(len(counts)), counts)
    return np.bincount(owners, weights=jumps, minlength=len(counts))


def _kept_positions(gen, keep, size):
    """Sorted positions in [0, size), each kept independently with probability keep"""
    parts, end = [], 0
    while end < size:
        expected = keep * (size - end)
        gaps = gen.geometric(keep, int(expected + 6.0 * math.sqrt(expected) + 16.0))
        positions = end - 1 + np.cumsum(gaps)
        parts.append(positions)
        end = int(positions[-1]) + 1
    positions = np.concatenate(parts)
    return positions[positions < size]


def _exponential_rows(gen, rates, n, keep=None):
    """
    Row sums of n x len(rates) independent exponentials with the given
    rates, drawn in chunks. With keep in (0, 1) each term survives with that
    probability, and only the survivors are drawn.
    """
    width = len(rates)
    rows = max(1, CHUNK_ELEMENTS // width)
    out = np.empty(n)
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        if keep is None:
            out[start:stop] = (gen.exponential(size=(stop - start, width)) / rates).sum(axis=1)
            continue
        owners, columns = np.divmod(_kept_positions(gen, keep, (stop - start) * width), width)
        draws = gen.exponential(size=len(owners)) / rates[columns]
        out[start:stop] = np.bincount(owners, weights=draws, minlength=stop - start)
    return out



def _harmonic(n_terms):
    """H_N = Psi(N + 1) + C"""
    return digamma(n_terms + 1.0) + EULER_GAMMA


# -- compound Poisson -------------------------------------------------------

def sample_gamma_bdrv(params, n, rng):
    """
    Y(1) = sum_{k <= N} E_k(lambda), N ~ Poisson(alpha); exactly 0 when N = 0.
    """
    n = _check_count(n)
    gen = rng.generator()
    counts = gen.poisson(params.alpha, n)
    jumps = gen.exponential(1.0 / params.lam, int(counts.sum()))
    return _batch(_compound_sum(counts, jumps), rng, "gamma_bdrv", poisson_mean=params.alpha)


def _scaled_jump_innovation(mean, c, jump_draw, n, rng, tag):
    """sum_{k <= N} c^eta_k J_k, N ~ Poisson(mean), eta_k uniform on (0, 1)"""
    gen = rng.generator()
    counts = gen.poisson(mean, n)
    total = int(counts.sum())
    eta = gen.random(total)
    jumps = np.exp(eta * math.log(c)) * jump_draw(gen, total)
    return _batch(_compound_sum(counts, jumps), rng, tag, poisson_mean=mean, c=c)


def sample_besselk_innovation(params, c, n, rng):
    """
    Innovation of BK(alpha, lambda): Poisson(-alpha log c^2) many terms
    c^eta Laplace(rate lambda); CF (c^2 + (1 - c^2)/(1 + t^2/lambda^2))^alpha.
    """
    c, n = _check_c(c), _check_count(n)
    mean = -2.0 * params.alpha * math.log(c)
    return _scaled_jump_innovation(
        mean, c, lambda gen, size: gen.laplace(0.0, 1.0 / params.lam, size), n, rng, "besselk_innovation"
    )


def sample_gamma_innovation(params, c, n, rng):
    """
    Innovation of gamma(alpha, lambda): Poisson(-alpha log c) many terms
    c^eta E(lambda); CF ((1 - ict/lambda)/(1 - it/lambda))^alpha.
    """
    c, n = _check_c(c), _check_count(n)
    mean = -params.alpha * math.log(c)
    return _scaled_jump_innovation(
        mean, c, lambda gen, size: gen.exponential(1.0 / params.lam, size), n, rng, "gamma_innovation"
    )


# -- random series ----------------------------------------------------------

def sample_loggamma_series(params, n, cfg, rng):
    """
    log gamma(alpha, lambda) as the truncated series
        -C - log lambda - E_0 - sum_{n=1}^N (E_n - 1/n),  E_n ~ Exp(rate alpha + n),
    plus the mean of the omitted terms when cfg.tail_mean_correction is set.

    Args:
        params: LogGammaParams
        n: Number of draws
        cfg: SeriesConfig
        rng: RngStream

    Returns:
        SampleBatch tagged "loggamma"
    """
    n = _check_count(n)
    alpha, big_n = params.alpha, cfg.truncation_n
    head = min(cfg.block_terms, big_n)
    gen = rng.generator()

    total = _exponential_rows(gen, alpha + np.arange(head + 1, dtype=float), n)
    if big_n > head:
        # sum_{n=K+1}^N E_n has the law of -log Beta(alpha + K + 1, N - K)
        total -= np.log(gen.beta(alpha + head + 1.0, float(big_n - head), n))

    tail = series_tail_mean(alpha, big_n) if cfg.tail_mean_correction else 0.0
    LOGGER.debug("loggamma series: N=%d, tail mean %.3g", big_n, tail)
    shift = -EULER_GAMMA - math.log(params.lam) + _harmonic(big_n) + tail
    return _batch(shift - total, rng, "loggamma", truncation_n=big_n, tail_mean=tail)


def sample_loggamma_innovation(alpha, c, n, cfg, rng, lam=1.0):
    """
    Innovation of log gamma(alpha, lambda) as the truncated series
        -C(1 - c) - (1 - c) log lambda - b_0 E_0 - sum_{n=1}^N (b_n E_n - (1 - c)/n),
    b_n ~ Bernoulli(1 - c), E_n ~ Exp(rate alpha + n).

    Only the surviving terms are drawn, about 2 (1 - c) n (N + 1) variates
    per batch: n = 10^6 at N = 10^4 is ~10^10 draws, so large batches
    should lower cfg.truncation_n (the variance deficit is
    (1 - c^2) Psi'(alpha + N + 1)).
    """
    c, n = _check_c(c), _check_count(n)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    big_n = cfg.truncation_n
    gen = rng.generator()

    total = _exponential_rows(gen, alpha + np.arange(big_n + 1, dtype=float), n, keep=1.0 - c)
    tail = series_tail_mean(alpha, big_n) if cfg.tail_mean_correction else 0.0
    shift = (1.0 - c) * (-EULER_GAMMA - math.log(lam) + _harmonic(big_n) + tail)
    return _batch(shift - total, rng, "loggamma_innovation", truncation_n=big_n, c=c)


# -- direct draws -----------------------------------------------------------

def sample_besselk(params, n, rng):
    """BK(alpha, lambda) = sqrt(2 gamma(alpha, lambda^2)) Z"""
    n = _check_count(n)
    gen = rng.generator()
    mix = gen.gamma(params.alpha, 1.0 / params.lam**2, n)
    return _batch(np.sqrt(2.0 * mix) * gen.standard_normal(n), rng, "besselk")


def sample_gamma(params, n, rng):
    n = _check_count(n)
    return _batch(rng.generator().gamma(params.alpha, 1.0 / params.lam, n), rng, "gamma")


def sample_loggamma_direct(params, n, rng):
    """log of direct gamma draws, the reference for the series sampler"""
    n = _check_count(n)
    return _batch(np.log(rng.generator().gamma(params.alpha, 1.0 / params.lam, n)), rng, "loggamma_direct")


def sample_law(model, n, rng, cfg=DEFAULT_SERIES):
    """Draws of X itself for the laws with an innovation sampler"""
    p = model.params
    if model.kind is ModelKind.GAMMA:
        return sample_gamma(p, n, rng)
    if model.kind is ModelKind.LOG_GAMMA:
        return sample_loggamma_series(p, n, cfg, rng)
    if model.kind is ModelKind.BESSEL_K:
        return sample_besselk(p, n, rng)
    raise DomainError(f"no sampler for {model.kind.value}")


def sample_innovation(model, c, n, rng, cfg=DEFAULT_SERIES):
    """Draws of X_c in X = cX + X_c"""
    p = model.params
    if model.kind is ModelKind.GAMMA:
        return sample_gamma_innovation(p, c, n, rng)
    if model.kind is ModelKind.LOG_GAMMA:
        return sample_loggamma_innovation(p.alpha, c, n, cfg, rng, lam=p.lam)
    if model.kind is ModelKind.BESSEL_K:
        return sample_besselk_innovation(p, c, n, rng)
    raise DomainError(f"no innovation sampler for {model.kind.value}")


# Generator tags accepted on the command line: tag -> (params type, needs c, needs SeriesConfig)
GENERATORS = {
    "gamma_bdrv": (GammaParams, False, False),
    "loggamma": (LogGammaParams, False, True),
    "loggamma_innovation": (LogGammaParams, True, True),
    "besselk": (BesselKParams, False, False),
    "besselk_innovation": (BesselKParams, True, False),
    "gamma_innovation": (GammaParams, True, False),
}


def draw(tag, params, n, rng, c=None, cfg=DEFAULT_SERIES):
    """Dispatch on a generator tag"""
    if tag == "gamma_bdrv":
        return sample_gamma_bdrv(params, n, rng)
    if tag == "loggamma":
        return sample_loggamma_series(params, n, cfg, rng)
    if tag == "loggamma_innovation":
        return sample_loggamma_innovation(params.alpha, c, n, cfg, rng, lam=params.lam)
    if tag == "besselk":
        return sample_besselk(params, n, rng)
    if tag == "besselk_innovation":
        return sample_besselk_innovation(params, c, n, rng)
    if tag == "gamma_innovation":
        return sample_gamma_innovation(params, c, n, rng)
    raise DomainError(f"unknown generator {tag!r}; expected one of {', '.join(GENERATORS)}")


def generate_partitioned(sampler, n, seed, streams=1, workers=1):
    """
    Split n draws over stream ids 0..streams-1 and merge the parts in
    stream order.

    Args:
        sampler: Callable (count, RngStream) -> SampleBatch
        n: Total number of draws
        seed: Root seed shared by all streams
        streams: Number of streams, each with its own stream_id
        workers: Thread pool size

    Returns:
        SampleBatch whose values are ordered by stream id, then index
    """
    n = _check_count(n)
    if streams < 1 or streams > n:
        raise ConfigError(f"streams must lie in [1, n], got {streams!r}")
    base, extra = divmod(n, streams)
    jobs = [(base + (1 if i < extra else 0), RngStream(seed, i)) for i in range(streams)]
    if workers <= 1:
        parts = [sampler(count, stream) for count, stream in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: sampler(*job), jobs))
    values = np.concatenate([part.values for part in parts])
    return SampleBatch(values=values, n=n, seed=seed, generator_tag=parts[0].generator_tag,
                       metadata={"streams": streams, **parts[0].metadata})
