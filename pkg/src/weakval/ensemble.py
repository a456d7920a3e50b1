"""Monte Carlo readout of the pointer after postselection.

Samples come from ``|psi(Q)|**2`` by inverse-CDF lookup on a grid.  The
uniform variates are drawn in fixed-size chunks, chunk ``j`` from an MT19937
stream seeded with ``SeedSequence(seed, spawn_key=(j,))``, so any split of the
chunks across workers reproduces the single-worker sample list exactly.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDensity
from .pointer import PostselectedWave, default_grid, grid_evaluate

__all__ = [
    "CHUNK_SIZE",
    "WEAKNESS_WARN",
    "SampleStats",
    "WeaknessWarning",
    "PointerCDF",
    "build_cdf",
    "sample_pointer",
    "sample_stats",
    "sqrtn_study",
    "stderr_ratios",
    "grid_mean",
]

CHUNK_SIZE = 1 << 16
WEAKNESS_WARN = 0.1


class WeaknessWarning(UserWarning):
    """The coupling is too strong for the pointer shift to track the weak value."""


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    std_dev: float
    std_error: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PointerCDF:
    q: np.ndarray
    cdf: np.ndarray

    def quantile(self, u):
        # cdf may be flat where the density vanishes; np.interp picks the
        # first matching grid point, which is harmless there
        return np.interp(u, self.cdf, self.q)


def build_cdf(wave, grid=None) -> PointerCDF:
    """Trapezoid CDF of ``|wave|**2`` on ``grid = (q_min, q_max, points)``."""
    if isinstance(wave, PostselectedWave) and not wave.beta > 0:
        raise ValueError("sampling needs beta > 0")
    if grid is None:
        if not isinstance(wave, PostselectedWave):
            raise ValueError("a grid is required for waves without spectral data")
        grid = default_grid(wave.beta, wave.max_shift)
    table = grid_evaluate(wave, *grid)
    density = table.abs2
    cells = 0.5 * (density[1:] + density[:-1]) * np.diff(table.q)
    total = float(np.sum(cells))
    if not total >= 1e-300:
        raise DegenerateDensity(f"integral of |psi|^2 on the grid is {total:.3g}")
    # cumsum can overshoot 1 by an ulp; clip so pinning the end keeps it monotone
    cdf = np.minimum(np.concatenate(([0.0], np.cumsum(cells) / total)), 1.0)
    cdf[-1] = 1.0
    return PointerCDF(table.q, cdf)


def _chunk_uniforms(seed: int, index: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.MT19937(ss)).random(size)


def _warn_if_strong(wave):
    if isinstance(wave, PostselectedWave) and wave.weakness > WEAKNESS_WARN:
        warnings.warn(
            f"weakness parameter beta*max|c|^2 = {wave.weakness:.3g} exceeds "
            f"{WEAKNESS_WARN}; the pointer shift may not track the weak value",
            WeaknessWarning,
            stacklevel=3,
        )


def sample_pointer(wave, n: int, seed: int, grid=None, workers: int = 1) -> np.ndarray:
    """Draw ``n`` pointer readings from the postselected density."""
    if n < 1:
        raise ValueError("n must be positive")
    _warn_if_strong(wave)
    cdf = build_cdf(wave, grid)
    n_chunks = -(-n // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, n - j * CHUNK_SIZE) for j in range(n_chunks)]

    def draw(j):
        return cdf.quantile(_chunk_uniforms(seed, j, sizes[j]))

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, range(n_chunks)))
    else:
        parts = [draw(j) for j in range(n_chunks)]
    return np.concatenate(parts)


def sample_stats(samples) -> SampleStats:
    x = np.asarray(samples, dtype=float)
    n = x.size
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return SampleStats(n, float(np.mean(x)), sd, sd / math.sqrt(n))


def sqrtn_study(wave, n_values, seed: int, grid=None) -> list[SampleStats]:
    """Sample statistics for each ensemble size in ``n_values``."""
    n_values = [int(n) for n in n_values]
    if any(n < 100 for n in n_values):
        raise ValueError("ensemble sizes must be at least 100")
    if any(b < a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("ensemble sizes must be ascending")
    return [sample_stats(sample_pointer(wave, n, seed, grid)) for n in n_values]


def stderr_ratios(stats: list[SampleStats]) -> dict[int, float]:
    """``std_error(n) / std_error(4n)`` for every ``n`` whose quadruple was run."""
    by_n = {s.n: s for s in stats}
    return {n: by_n[n].std_error / by_n[4 * n].std_error
            for n in sorted(by_n) if 4 * n in by_n and by_n[4 * n].std_error > 0}


def grid_mean(wave, grid=None) -> float:
    """Exact (quadrature) mean of the pointer density, no sampling."""
    if grid is None:
        grid = default_grid(wave.beta, wave.max_shift)
    return grid_evaluate(wave, *grid).mean()
