"""Seeded sampling utilities: counter-based streams, lattice rules, intervals.

All randomness flows through Philox keyed by (seed, stream-index) so that
results are reproducible for a fixed seed no matter how work is divided
between workers.  Means are reduced with math.fsum in index order, which is
exactly rounded and therefore independent of batching.
"""

from __future__ import annotations

import math

import numpy as np

# Fibonacci pairs (N, generator) for rank-1 lattice rules
_FIB = [(1, 1)]
while _FIB[-1][0] < 1 << 26:
    _FIB.append((_FIB[-1][0] + _FIB[-1][1], _FIB[-1][0]))


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent counter-based substream for a given (seed, index)."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1),
                                                     index & (2**64 - 1)]))


def fibonacci_lattice(n_min: int):
    """Smallest Fibonacci rank-1 lattice with at least n_min nodes.

    Returns (n, generator); node j is ((j*g/n) mod 1, (j/n) mod 1).
    """
    for n, g in _FIB:
        if n >= n_min:
            return n, g
    return _FIB[-1]


def lattice_nodes(n_min: int, shift=(0.0, 0.0)):
    n, g = fibonacci_lattice(n_min)
    j = np.arange(n, dtype=float)
    u = (j * (g / n) + shift[0]) % 1.0
    v = (j / n + shift[1]) % 1.0
    return u, v


def sphere_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform points on S^2 (projects to the uniform measure on RP^2)."""
    P = rng.normal(size=(n, 3))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def fs_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Fubini-Study-uniform points of CP^2: normalized complex Gaussians."""
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def fsum_mean(values) -> float:
    vals = list(values)
    if not vals:
        raise ValueError("empty mean")
    return math.fsum(vals) / len(vals)


def batch_stderr(samples: np.ndarray, n_batches: int = 32):
    """(mean, stderr) by the method of batch means (serial-correlation safe)."""
    n = len(samples)
    if n < 2 * n_batches:
        n_batches = max(2, n // 2)
    cut = (n // n_batches) * n_batches
    batches = samples[:cut].reshape(n_batches, -1).mean(axis=1)
    mean = fsum_mean(samples)
    stderr = float(batches.std(ddof=1) / math.sqrt(n_batches))
    return mean, stderr


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    center = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, center - half), min(1.0, center + half))
