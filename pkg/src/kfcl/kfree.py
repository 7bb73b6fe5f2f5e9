"""k-free sieving and exact integer partial sums of character summands.

The summand is mu^(k)(n) * chi(n) or mu^(k)(n) * g_chi(n): the k-free
indicator times a real character, optionally modified to be 1 at primes
dividing the modulus.  Partial sums are exact 64-bit integers; the running
sum is kept as a step function storing only its jump points.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .characters import DirichletCharacter, ModifiedCharacter

_CACHE_MAGIC = b"KFCLSV01"
_MAX_LIMIT = 1 << 40  # refuse silently-impossible allocations


class SieveRangeError(ValueError):
    """Query outside the sieved range or an unrepresentable limit."""


@dataclass
class KFreeSieve:
    """Bit-level indicator of k-free integers up to ``limit``.

    indicator[n] is 1 unless some p^k divides n; indicator[0] is 0 by
    convention so arrays index directly by n.
    """

    k: int
    limit: int
    indicator: np.ndarray

    def count(self, upto: int | None = None) -> int:
        n = self.limit if upto is None else min(upto, self.limit)
        return int(self.indicator[: n + 1].sum())


def sieve_kfree(k: int, limit: int) -> KFreeSieve:
    """Mark n <= limit free of k-th prime powers by striding each p^k."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if limit < 1:
        raise ValueError("limit must be positive")
    if limit > _MAX_LIMIT:
        raise SieveRangeError(f"limit {limit} exceeds the supported address space")
    ind = np.ones(limit + 1, dtype=np.uint8)
    ind[0] = 0
    top = int(round(limit ** (1.0 / k)))
    while (top + 1) ** k <= limit:
        top += 1
    for p in _primes_upto(top):
        ind[p**k :: p**k] = 0
    return KFreeSieve(k=k, limit=limit, indicator=ind)


def _primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.empty(0, dtype=np.int64)
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if s[p]:
            s[p * p :: p] = False
    return np.nonzero(s)[0]


def save_sieve(sieve: KFreeSieve, path: str) -> None:
    """magic + (k, limit) header + packed bit array, fixed offsets so the
    payload can be memory-mapped."""
    packed = np.packbits(sieve.indicator)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<IQ", sieve.k, sieve.limit))
        fh.write(packed.tobytes())
    os.replace(tmp, path)


def load_sieve(path: str) -> KFreeSieve:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise SieveRangeError(f"{path}: not a sieve cache file")
        k, limit = struct.unpack("<IQ", fh.read(12))
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    ind = np.unpackbits(packed)[: limit + 1].astype(np.uint8)
    return KFreeSieve(k=k, limit=int(limit), indicator=ind)


@dataclass(frozen=True)
class SummandSpec:
    """Which summand to accumulate: k, the character, and whether the
    unit-modified companion replaces the character."""

    k: int
    character: DirichletCharacter
    modified: bool = False

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        chi = self.character
        if not chi.primitive or sum(chi.values) != 0:
            raise ValueError("character must be real, primitive and non-principal")

    def label(self) -> str:
        tag = "g" if self.modified else "chi"
        return f"k{self.k}_{self.character.label()}_{tag}"


def character_values_upto(spec: SummandSpec, limit: int) -> np.ndarray:
    """f-values (without the k-free factor) for n = 0..limit as int8."""
    chi = spec.character
    q = chi.modulus
    pattern = np.array(chi.values, dtype=np.int8)
    vals = pattern[np.arange(limit + 1) % q]
    if not spec.modified:
        return vals
    # modified companion: strip primes dividing q level by level, so that
    # vals[p^a * m] = vals[m]; processing one prime completely before the
    # next keeps every read below the write index already final
    for p in chi.q_primes:
        pa = p
        while pa <= limit:
            m = np.arange(1, limit // pa + 1)
            m = m[m % p != 0]
            vals[pa * m] = vals[m]
            pa *= p
    return vals


@dataclass
class StepSeries:
    """S_f as a right-continuous step function: value sums[i] holds from
    positions[i] (inclusive) until the next jump."""

    spec: SummandSpec
    limit: int
    positions: np.ndarray  # int64, ascending, first is 1
    sums: np.ndarray  # int64, S_f at each jump

    def value(self, x):
        """S_f(x) for scalar or array x (0 <= x <= limit)."""
        xi = np.floor(np.asarray(x, dtype=float)).astype(np.int64)
        if np.any(xi < 0) or np.any(xi > self.limit):
            raise SieveRangeError("query outside the sieved range")
        idx = np.searchsorted(self.positions, xi, side="right") - 1
        out = np.where(idx >= 0, self.sums[np.maximum(idx, 0)], 0)
        return int(out) if np.ndim(x) == 0 else out

    def final(self) -> int:
        return int(self.sums[-1]) if len(self.sums) else 0


def cumulative_series(spec: SummandSpec, limit: int, sieve: KFreeSieve) -> StepSeries:
    """One pass producing every jump of S_f(n) for n <= limit."""
    if sieve.k != spec.k:
        raise SieveRangeError(f"sieve has k={sieve.k}, spec needs k={spec.k}")
    if limit > sieve.limit:
        raise SieveRangeError("sieve smaller than the requested range")
    f = character_values_upto(spec, limit).astype(np.int64)
    f *= sieve.indicator[: limit + 1]
    jumps = np.nonzero(f)[0]
    running = np.cumsum(f[jumps])
    return StepSeries(spec=spec, limit=limit, positions=jumps, sums=running)


def partial_sum(spec: SummandSpec, x: float, sieve: KFreeSieve) -> int:
    """Exact integer sum of f(n) over n <= x (n = floor(x) included)."""
    n = int(math.floor(x))
    if n > sieve.limit:
        raise SieveRangeError(f"x={x} beyond sieve limit {sieve.limit}")
    if n < 1:
        return 0
    f = character_values_upto(spec, n).astype(np.int64)
    f *= sieve.indicator[: n + 1]
    return int(f.sum())


def normalized_phi(series: StepSeries, y):
    """phi(y) = e^{-y/2k} S_f(e^y); scalar or array y."""
    y = np.asarray(y, dtype=float)
    x = np.exp(y)
    if np.any(np.floor(x) > series.limit):
        raise SieveRangeError("y outside the range covered by the series")
    val = series.value(x) * np.exp(-y / (2.0 * series.spec.k))
    return float(val) if np.ndim(y) == 0 else val


def half_integer_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Log-spaced grid snapped to half-integers; used by verification jobs
    to keep Perron remainders away from their integer-x ambiguity."""
    raw = np.geomspace(lo, hi, count)
    xs = np.floor(raw) + 0.5
    return np.unique(xs)
