"""Monte-Carlo reference for the EGC capacity.

Samples are produced in fixed-size chunks.  Chunk c of link l draws from
its own Philox stream keyed by (seed, c, l), so any sample depends only on
the seed and its position: batching and the number of worker threads
change the schedule, never the numbers.  Per-chunk sums are reduced with
math.fsum (exactly rounded), which makes the final estimate independent of
reduction order as well.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from fsocap.capacity import LN2, CapacityPoint
from fsocap.errors import ConfigurationError, DomainError

CHUNK = 1 << 16
ACCEPTANCE_MIN_SAMPLES = 10**4


@dataclass(frozen=True)
class McConfig:
    """samples: total draws; seed: 64-bit key; batch: samples held in memory per step."""

    samples: int = 10**7
    seed: int = 0
    batch: int = 1 << 20
    workers: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 2:
            raise ConfigurationError("samples must be an integer >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.batch < 1 or self.workers < 1:
            raise ConfigurationError("batch and workers must be positive")

    @property
    def acceptance_grade(self):
        return self.samples >= ACCEPTANCE_MIN_SAMPLES

    @property
    def chunks(self):
        return -(-int(self.samples) // CHUNK)

    def chunk_size(self, c):
        return min(CHUNK, int(self.samples) - c * CHUNK)


def stream(seed, chunk, link):
    """Philox generator for one (chunk, link) cell."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chunk), int(link)))
    return np.random.Generator(np.random.Philox(ss))


def sample_gamma_gamma(p, rng, size=None):
    """x*y with x ~ Gamma(a, 1/a) and y ~ Gamma(b, omega/b).

    numpy's standard_gamma uses Marsaglia–Tsang squeeze/acceptance for
    shape >= 1 and the shape+1 boost with a U^(1/shape) factor below 1.
    """
    x = rng.standard_gamma(p.a, size) / p.a
    y = rng.standard_gamma(p.b, size) * (p.omega / p.b)
    return x * y


def _chunk_sum(channels, seed, c, n):
    s = np.zeros(n)
    for l, p in enumerate(channels):
        s += sample_gamma_gamma(p, stream(seed, c, l), n)
    return s


def iter_sum_chunks(channels, cfg):
    """Yield (chunk index, samples of S = sum of the link irradiances) in chunk order."""
    if not channels:
        raise DomainError("need at least one channel")
    per_step = max(1, cfg.batch // CHUNK)
    total = cfg.chunks
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for start in range(0, total, per_step):
            idx = range(start, min(total, start + per_step))
            if pool is None:
                parts = [_chunk_sum(channels, cfg.seed, c, cfg.chunk_size(c)) for c in idx]
            else:
                parts = list(pool.map(lambda c: _chunk_sum(channels, cfg.seed, c, cfg.chunk_size(c)), idx))
            yield from zip(idx, parts)
    finally:
        if pool is not None:
            pool.shutdown()


def mc_sum_samples(channels, cfg):
    """All samples of S in index order (for empirical CDFs)."""
    return np.concatenate([s for _, s in iter_sum_chunks(channels, cfg)])


def mc_capacity_sweep(channels, gamma0s, cfg, rho_dbs=None):
    """Capacity estimates at several gamma0 from one shared set of samples.

    Reusing the draws across SNR points (common random numbers) keeps the
    cost at one pass and makes sweep curves smooth and mutually ordered.
    """
    g0 = np.asarray(gamma0s, dtype=float)
    if g0.ndim != 1 or np.any(~(g0 > 0)):
        raise DomainError("gamma0 values must be positive")
    rho_dbs = [math.nan] * len(g0) if rho_dbs is None else list(rho_dbs)
    sums = [[] for _ in g0]
    squares = [[] for _ in g0]
    for _, s in iter_sum_chunks(channels, cfg):
        s2 = s * s
        for k, g in enumerate(g0):
            v = np.log1p(g * s2)
            sums[k].append(math.fsum(v))
            squares[k].append(math.fsum(v * v))
    n = int(cfg.samples)
    out = []
    for k in range(len(g0)):
        total = math.fsum(sums[k])
        mean = total / n
        var = max(math.fsum(squares[k]) - total * mean, 0.0) / (n - 1)
        se = math.sqrt(var / n)
        out.append(CapacityPoint(rho_dbs[k], mean / LN2, "monte_carlo", se / LN2))
    return out


def mc_capacity(channels, ctx, cfg):
    """Capacity E[log2(1 + gamma0 S^2)] for the links in ``channels`` (length M*N)."""
    if len(channels) != ctx.L:
        raise DomainError(f"expected {ctx.L} channels, got {len(channels)}")
    return mc_capacity_sweep(channels, [ctx.gamma0], cfg, [ctx.rho_db])[0]
