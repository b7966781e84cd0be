"""Randomized (Rademacher) moments ``E||sum_j eps_j x_j||^p``.

Exact mode averages over every sign pattern.  Because the norm is even,
only the ``2^(N-1)`` patterns with a leading ``+1`` are visited.  Inputs are
first put in a canonical form (zero vectors dropped, each vector's first
nonzero coordinate made positive, rows sorted) so that permuting the
vectors or flipping their signs gives bit-identical results.

Monte-Carlo mode draws signs in fixed blocks of :data:`MC_BLOCK` samples;
block ``b`` uses a stream derived from ``(seed, b)``, and block sums are
combined in block order, so the result does not depend on the number of
worker threads.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .spaces import SpaceSpec, as_vectors, norms, seq_norms, seq_pow_norm_grad

EXACT_THRESHOLD = 20
MC_BLOCK = 1 << 16
_CHUNK = 1 << 15


@dataclass(frozen=True)
class RadMoment:
    value: float
    p: float
    mode: str
    samples: Optional[int] = None
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {"value": self.value, "p": self.p, "mode": self.mode,
                "samples": self.samples, "seed": self.seed}


@functools.lru_cache(maxsize=32)
def half_patterns(n: int) -> np.ndarray:
    """All ``2^(n-1)`` sign patterns of length ``n`` with a leading +1."""
    if n == 0:
        return np.zeros((1, 0))
    return _pattern_rows(n, 0, 1 << (n - 1))


def _pattern_rows(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, dtype=np.int64)) & 1
    out = np.ones((stop - start, n))
    out[:, 1:] = 1.0 - 2.0 * bits
    out.setflags(write=False)
    return out


def all_patterns(n: int) -> np.ndarray:
    """All ``2^n`` sign patterns, enumerated literally (used by oracles)."""
    if n == 0:
        return np.zeros((1, 0))
    idx = np.arange(1 << n, dtype=np.int64)
    return 1.0 - 2.0 * ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1)


def canonical(xs: np.ndarray) -> np.ndarray:
    """Drop zero rows, make each row's first nonzero entry positive, sort rows."""
    if not len(xs):
        return xs
    flat = xs.reshape(len(xs), -1)
    keep = np.any(flat != 0.0, axis=1)
    flat = flat[keep]
    if not len(flat):
        return np.zeros((0,) + xs.shape[1:])
    first = np.argmax(flat != 0.0, axis=1)
    sgn = np.sign(flat[np.arange(len(flat)), first])
    flat = flat * sgn[:, None] + 0.0
    order = np.lexsort(flat.T[::-1])
    return flat[order].reshape((len(flat),) + xs.shape[1:])


def _pow_norm_sum(space: SpaceSpec, signs: np.ndarray, xs: np.ndarray, p: float) -> float:
    sums = np.tensordot(signs, xs, axes=(1, 0))
    return float(np.sum(norms(space, sums) ** p))


def _map(workers: Optional[int], fn, items):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _exact(space: SpaceSpec, xs: np.ndarray, p: float, workers: Optional[int]) -> float:
    n = len(xs)
    total = 1 << (n - 1)
    if total <= _CHUNK:
        return _pow_norm_sum(space, half_patterns(n), xs, p) / total
    starts = range(0, total, _CHUNK)
    parts = _map(workers, lambda a: _pow_norm_sum(space, _pattern_rows(n, a, min(a + _CHUNK, total)), xs, p), starts)
    return math.fsum(parts) / total


def _mc(space: SpaceSpec, xs: np.ndarray, p: float, samples: int, seed: int,
        workers: Optional[int]) -> float:
    n = len(xs)

    def block(b: int) -> float:
        size = min(MC_BLOCK, samples - b * MC_BLOCK)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), b]))
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(size, n))
        return _pow_norm_sum(space, signs, xs, p)

    parts = _map(workers, block, range((samples + MC_BLOCK - 1) // MC_BLOCK))
    return math.fsum(parts) / samples


def rad_moment(space: SpaceSpec, xs: Any, p: float = 2.0, mode: str = "exact", *,
               samples: int = 100_000, seed: int = 0, threshold: int = EXACT_THRESHOLD,
               workers: Optional[int] = None) -> RadMoment:
    """``E||sum_j eps_j x_j||^p`` over independent Rademacher signs.

    Zero vectors do not contribute and are not counted against
    ``threshold``.
    """
    if not p >= 1.0:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    xs = canonical(as_vectors(space, xs))
    if mode == "exact":
        if len(xs) > threshold:
            raise ValueError(
                f"exact enumeration of {len(xs)} nonzero terms exceeds threshold {threshold}; use mode='mc'"
            )
        value = 0.0 if not len(xs) else _exact(space, xs, p, workers)
        return RadMoment(value, p, "exact")
    if mode in ("mc", "montecarlo"):
        if samples < 1:
            raise ValueError("samples must be positive")
        value = 0.0 if not len(xs) else _mc(space, xs, p, samples, seed, workers)
        return RadMoment(value, p, "montecarlo", samples, seed)
    raise ValueError(f"unknown mode {mode!r}")


def rad_norm(space: SpaceSpec, xs: Any, p: float = 2.0, mode: str = "exact", **kw) -> float:
    return rad_moment(space, xs, p, mode, **kw).value ** (1.0 / p)


def kk_ratio(space: SpaceSpec, xs: Any, p: float, q: float, mode: str = "exact", **kw) -> float:
    """Ratio of the Rad_p and Rad_q norms; 0 for an all-zero sequence."""
    den = rad_norm(space, xs, q, mode, **kw)
    if den == 0.0:
        return 0.0
    return rad_norm(space, xs, p, mode, **kw) / den


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def contraction_check(space: SpaceSpec, xs: Any, lambdas: Sequence[float], p: float = 2.0,
                      tol: float = 1e-12) -> InequalityReport:
    """Kahane's contraction principle for real multipliers (constant 1)."""
    xs = as_vectors(space, xs)
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (len(xs),):
        raise ValueError("need one multiplier per vector")
    scaled = xs * lam.reshape((-1,) + (1,) * (xs.ndim - 1))
    lhs = rad_moment(space, scaled, p).value
    top = float(np.max(np.abs(lam))) if len(lam) else 0.0
    rhs = top**p * rad_moment(space, xs, p).value
    return InequalityReport(lhs, rhs, lhs <= rhs + tol * max(1.0, rhs))


def block_randomization_check(space: SpaceSpec, xs: Any, blocks: Sequence[Sequence[int]],
                              p: float = 2.0, tol: float = 1e-12,
                              threshold: int = EXACT_THRESHOLD) -> InequalityReport:
    """Compare ``E||sum eps_j x_j||^p`` with its block-randomized version.

    The right side enumerates both sign families literally, without the
    symmetry reductions used by :func:`rad_moment`.
    """
    xs = as_vectors(space, xs)
    n = len(xs)
    seen = sorted(j for b in blocks for j in b)
    if seen != list(range(n)):
        raise ValueError("blocks must partition range(len(xs))")
    if n > threshold:
        raise ValueError(f"{n} terms exceed the exact threshold {threshold}")
    lhs = rad_moment(space, xs, p).value
    if n == 0:
        return InequalityReport(0.0, 0.0, True)
    owner = np.empty(n, dtype=int)
    for k, b in enumerate(blocks):
        owner[list(b)] = k
    inner = all_patterns(n)
    outer = all_patterns(len(blocks))
    acc = []
    for eps_outer in outer:
        signs = inner * eps_outer[owner][None, :]
        acc.append(_pow_norm_sum(space, signs, xs, p) / len(inner))
    rhs = math.fsum(acc) / len(outer)
    return InequalityReport(lhs, rhs, abs(lhs - rhs) <= tol * max(1.0, abs(lhs)))


# --- batched kernels for the searches (sequence spaces, no canonicalization) ---

def batch_moments(z: np.ndarray, p: float, q: float) -> np.ndarray:
    """Moments for a batch ``z`` of shape ``(K, n, d)``; returns ``(K,)``."""
    s = half_patterns(z.shape[1])
    sums = np.matmul(s, z)
    return np.mean(seq_norms(sums, q) ** p, axis=1)


def batch_moments_grad(z: np.ndarray, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Moments and their gradients with respect to ``z`` (shape ``(K, n, d)``)."""
    s = half_patterns(z.shape[1])
    sums = np.matmul(s, z)
    val, g = seq_pow_norm_grad(sums, q, p)
    return val.mean(axis=1), np.matmul(s.T, g) / len(s)

