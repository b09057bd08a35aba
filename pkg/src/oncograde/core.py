"""Deterministic numeric substrate shared by every other module.

All randomness in the toolkit flows through :class:`RngStream`, a
splitmix64 generator. Parallel work (ensemble members, CV folds, sweep
cells) derives disjoint sub-streams so results never depend on thread
scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

THREADS_ENV_VAR = "ONCOGRADE_THREADS"


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class RngStream:
    """Splitmix64 stream; the output sequence is a pure function of the seed."""

    origin_seed: int
    state: int = field(init=False)

    def __post_init__(self):
        self.origin_seed = self.origin_seed & _MASK64
        self.state = self.origin_seed

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def uniform(self) -> float:
        # top 53 bits -> [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        # Box-Muller; u clamped away from 0 so log stays finite
        u = max(self.uniform(), 2.0**-53)
        v = self.uniform()
        return float(np.sqrt(-2.0 * np.log(u)) * np.cos(2.0 * np.pi * v))

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint requires n >= 1")
        return int(self.uniform() * n)

    def derive(self, index: int) -> "RngStream":
        """Disjoint sub-stream for task `index`; same (seed, index) -> same stream."""
        mixed = (index * _GOLDEN) & _MASK64
        seed = _mix64(((self.origin_seed ^ mixed) + _GOLDEN) & _MASK64)
        return RngStream(seed)


def rng_uniform(stream: RngStream) -> float:
    return stream.uniform()


def derive_stream(seed: int, index: int) -> RngStream:
    return RngStream(seed).derive(index)


def shuffle(indices, stream: RngStream) -> list:
    """Fisher-Yates permutation of `indices` driven by `stream`."""
    out = list(indices)
    for i in range(len(out) - 1, 0, -1):
        j = stream.randint(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def argmax_tiebreak_low(values) -> int:
    """Index of the maximum; equal maxima resolve to the lowest index."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("empty input")
    return int(np.argmax(arr))


def column_stats(col) -> tuple[float, float]:
    """Mean and population (1/n) variance of a non-empty sequence."""
    arr = np.asarray(col, dtype=float)
    if arr.size == 0:
        raise ValueError("empty input")
    mean = float(arr.mean())
    var = float(((arr - mean) ** 2).mean())
    return mean, var


def as_matrix(data) -> np.ndarray:
    """Validate and return a 2-D float64 matrix with finite entries."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D matrix, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix contains non-finite values")
    return arr


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        n = int(raw)
    except ValueError:
        return 0
    return max(n, 0)


def parallel_map(fn, items: list) -> list:
    """Map preserving order; threads capped by ONCOGRADE_THREADS (0 = sequential).

    Each item must carry its own derived stream, so the result is
    bit-identical regardless of the worker count.
    """
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
