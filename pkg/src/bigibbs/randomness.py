"""Deterministic counter-based random streams.

Every stochastic routine in the package draws from an :class:`RngState`,
which wraps a Philox counter-based generator keyed by (seed, stream).
Identical (seed, stream) pairs reproduce identical draw sequences
regardless of what other streams are doing, so parallel chains and
estimators stay reproducible independently of scheduling.

Poisson counts are generated with a pinned algorithm choice (sequential
inversion below mean 30, transformed rejection above) instead of
delegating to the generator's own method, so seeded streams give the same
counts on every platform and numpy version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Window

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Algorithm switch point for Poisson counts; pinned for reproducibility.
POISSON_INVERSION_CUTOFF = 30.0


@dataclass
class RngState:
    """A single-owner random stream identified by (seed, stream).

    Fork independent substreams with :meth:`fork` before handing work to
    parallel consumers; never share one instance across threads.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def fork(self, index: int) -> "RngState":
        """Independent substream; deterministic in (seed, stream, index)."""
        mixed = (self.stream * _GOLDEN + index + 1) & _MASK64
        return RngState(self.seed, mixed)

    # -- primitive draws ----------------------------------------------------

    def random(self, size: int | None = None):
        """Uniform floats in [0, 1): a scalar if size is None, else an array."""
        return self._gen.random() if size is None else self._gen.random(size)

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self._gen.integers(n))

    def uniform_in(self, w: Window, n: int) -> np.ndarray:
        """(n, d) array of points uniform in the box ``w``."""
        lo = np.asarray(w.lower)
        hi = np.asarray(w.upper)
        return lo + (hi - lo) * self._gen.random((n, w.dim))

    def poisson(self, mean: float) -> int:
        if mean < 0:
            raise ValueError("Poisson mean must be >= 0")
        if mean == 0.0:
            return 0
        if mean < POISSON_INVERSION_CUTOFF:
            return _poisson_inversion(self._gen, mean)
        return _poisson_ptrs(self._gen, mean)


def _poisson_inversion(gen: np.random.Generator, lam: float) -> int:
    """Sequential CDF search from one uniform. Valid for small means."""
    u = gen.random()
    p = math.exp(-lam)
    cdf = p
    k = 0
    # cutoff 30 keeps p0 ~ 1e-13 > 0; the k cap guards the astronomically
    # unlikely tail where float cdf saturates just below u
    while u > cdf and k < 1100:
        k += 1
        p *= lam / k
        cdf += p
    return k


def _poisson_ptrs(gen: np.random.Generator, lam: float) -> int:
    """Hormann's transformed rejection with squeeze, for large means."""
    log_lam = math.log(lam)
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = gen.random() - 0.5
        v = gen.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
        rhs = k * log_lam - lam - math.lgamma(k + 1.0)
        if lhs <= rhs:
            return int(k)
