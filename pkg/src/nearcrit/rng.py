"""Seeded random streams, scalar samplers, the Borel law and the conjugate parameter.

Every random quantity in the package is drawn from an :class:`RngStream`.  A
stream is a PCG64 generator keyed by ``(master_seed, stream_index)`` through
numpy's ``SeedSequence`` (the index goes into the spawn key), so equal keys give
bit-identical draws on every run and distinct indices give independent streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import PreconditionError

SUPERCRITICAL = "supercritical"
SUBCRITICAL = "subcritical"

_U64 = (1 << 64) - 1


class RngStream:
    """A reproducible random stream identified by ``(master_seed, stream_index)``."""

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed) & _U64
        self.stream_index = int(stream_index) & _U64
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index,))
        self.gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def child(self, index: int) -> "RngStream":
        """A stream keyed by the same master seed and a derived index."""
        return RngStream(self.master_seed, (self.stream_index * 1_000_003 + int(index) + 1) & _U64)


def stream_index_for(*parts: int) -> int:
    """Pack small nonnegative integers (grid point, replicate, ...) into one stream index."""
    idx = 0
    for p in parts:
        if not 0 <= p < 1 << 20:
            raise PreconditionError("stream index component out of range")
        idx = (idx << 20) | int(p)
    return idx


def conjugate_mu(epsilon: float, iterations: int = 200) -> float:
    """Solve ``mu * exp(-mu) == (1+eps) * exp(-(1+eps))`` for ``mu`` in (0, 1).

    ``x * exp(-x)`` is strictly increasing on (0, 1), so plain bisection is safe all the
    way down to ``eps -> 0``.
    """
    if not 0 < epsilon <= 2:
        raise PreconditionError("epsilon must lie in (0, 2]")
    target = (1 + epsilon) * math.exp(-(1 + epsilon))
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid * math.exp(-mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ModelParams:
    n: int
    epsilon: float
    regime: str = SUPERCRITICAL
    lam: float = field(init=False)
    mu: float | None = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("n must be positive")
        if not 0 < self.epsilon < 1:
            raise PreconditionError("epsilon must lie in (0, 1)")
        if self.regime not in (SUPERCRITICAL, SUBCRITICAL):
            raise PreconditionError(f"unknown regime {self.regime!r}")
        object.__setattr__(self, "lam", self.epsilon ** 3 * self.n)
        mu = conjugate_mu(self.epsilon) if self.regime == SUPERCRITICAL else None
        object.__setattr__(self, "mu", mu)

    @property
    def p(self) -> float:
        sign = 1 if self.regime == SUPERCRITICAL else -1
        return (1 + sign * self.epsilon) / self.n

    def require(self, regime: str) -> "ModelParams":
        if self.regime != regime:
            raise PreconditionError(f"{regime} parameters required, got {self.regime}")
        return self


def sample_poisson(stream: RngStream, rate: float, size=None):
    if rate < 0:
        raise PreconditionError("Poisson rate must be nonnegative")
    return stream.gen.poisson(rate, size)


def sample_geometric_path_length(stream: RngStream, mu: float, size=None):
    """Geom(1-mu) on {1, 2, ...}: ``P(Y = k) = (1-mu) mu^(k-1)``."""
    if not 0 < mu < 1:
        raise PreconditionError("mu must lie in (0, 1)")
    return stream.gen.geometric(1.0 - mu, size)


def sample_normal(stream: RngStream, mean: float, variance: float, size=None):
    if variance < 0:
        raise PreconditionError("variance must be nonnegative")
    return stream.gen.normal(mean, math.sqrt(variance), size)


def borel_pmf(gamma: float, k):
    """Borel(gamma) mass at ``k``: ``k^(k-1) (gamma e^-gamma)^k / (gamma k!)``.

    Accepts a scalar or an array of ``k``; terms with ``k > 20`` go through log-space.
    """
    if not 0 < gamma < 1:
        raise PreconditionError("gamma must lie in (0, 1)")
    ks = np.asarray(k)
    if np.any(ks < 1):
        raise PreconditionError("Borel support starts at k = 1")
    kf = ks.astype(float)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = kf ** (kf - 1) * (gamma * math.exp(-gamma)) ** kf / (gamma * np.exp(gammaln(kf + 1)))
    logp = (kf - 1) * np.log(kf) + kf * (math.log(gamma) - gamma) - math.log(gamma) - gammaln(kf + 1)
    out = np.where(ks > 20, np.exp(logp), direct)
    return float(out) if out.ndim == 0 else out
