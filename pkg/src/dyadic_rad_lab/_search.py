"""Small derivative-aware hill climber on the unit sphere.

Every search in the package maximizes a ratio that is invariant under
global rescaling of its argument, so candidates are renormalized to unit
Frobenius norm after each step.
"""
from __future__ import annotations

import hashlib
from typing import Callable, Optional

import numpy as np

BatchObjective = Callable[[np.ndarray], np.ndarray]
Gradient = Callable[[np.ndarray], np.ndarray]


def _unit(x: np.ndarray) -> Optional[np.ndarray]:
    n = np.linalg.norm(x)
    if not np.isfinite(n) or n == 0.0:
        return None
    return x / n


def ascend(
    objective: BatchObjective,
    x0: np.ndarray,
    rng: np.random.Generator,
    *,
    grad: Optional[Gradient] = None,
    iters: int = 40,
    n_random: int = 4,
    step: float = 0.5,
    min_step: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` starting from ``x0``.

    ``objective`` takes a batch ``(K, *shape)`` and returns ``K`` values.
    Each iteration proposes gradient steps at three scales plus
    ``n_random`` Gaussian perturbations and keeps the best strict
    improvement; the step length doubles on success and halves otherwise.
    """
    x = _unit(np.asarray(x0, dtype=float))
    if x is None:
        raise ValueError("starting point must be nonzero")
    val = float(objective(x[None])[0])
    shape = x.shape
    for _ in range(iters):
        parts = []
        if grad is not None:
            g = np.asarray(grad(x), dtype=float)
            g = g - np.sum(g * x) * x
            gn = np.linalg.norm(g)
            if np.isfinite(gn) and gn > 0:
                parts.append(x + (step * np.array([4.0, 1.0, 0.25])).reshape((3,) + (1,) * x.ndim) * (g / gn))
        noise = rng.standard_normal((n_random,) + shape) / np.sqrt(x.size)
        parts.append(x + step * noise)
        batch = np.concatenate(parts)
        nrm = np.sqrt(np.sum(batch.reshape(len(batch), -1) ** 2, axis=1))
        ok = np.isfinite(nrm) & (nrm > 0)
        if not ok.any():
            break
        batch = batch[ok] / nrm[ok].reshape((-1,) + (1,) * x.ndim)
        vals = np.asarray(objective(batch), dtype=float)
        vals = np.where(np.isfinite(vals), vals, -np.inf)
        i = int(np.argmax(vals))
        if vals[i] > val:
            x, val = batch[i], float(vals[i])
            step = min(step * 2.0, 2.0)
        else:
            step *= 0.5
            if step < min_step:
                break
    return x, val


def stream(seed: int, *key: object) -> np.random.Generator:
    """Generator keyed by ``seed`` and arbitrary hashable content."""
    h = hashlib.sha256()
    for k in key:
        if isinstance(k, np.ndarray):
            h.update(np.ascontiguousarray(k, dtype=float).tobytes())
            h.update(repr(k.shape).encode())
        else:
            h.update(repr(k).encode())
        h.update(b"|")
    words = np.frombuffer(h.digest()[:16], dtype=np.uint32)
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *words.tolist()]))
