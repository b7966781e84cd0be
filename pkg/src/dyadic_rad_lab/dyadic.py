"""Dyadic step functions on [0, 1) and their martingale averages.

A function of level ``L`` is stored by its values on the ``2^L`` atoms
``[i 2^-L, (i+1) 2^-L)``.  Conditional expectations are computed by
repeated pairwise averaging, ``(a + b) * 0.5``, from the finest level down.
Averaging two equal numbers is exact in floating point, so the tower
property ``E_i E_j = E_min(i,j)`` holds bit for bit.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

import numpy as np

from .rbound import SearchParams, rbound_hilbert, rbound_search
from .spaces import Operator, SequenceSpace, SpaceSpec, norms, vector_as_operator


@dataclass(frozen=True, eq=False)
class DyadicFunction:
    level: int
    space: SpaceSpec
    values: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        v = np.array(self.values, dtype=float)
        if v.shape != (1 << self.level,) + self.space.shape:
            raise ValueError(
                f"level {self.level} function in {self.space} needs shape "
                f"{(1 << self.level,) + self.space.shape}, got {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_atoms(self) -> int:
        return 1 << self.level

    @classmethod
    def constant(cls, space: SpaceSpec, level: int, x: Any) -> "DyadicFunction":
        x = np.asarray(x, dtype=float)
        return cls(level, space, np.broadcast_to(x, (1 << level,) + space.shape))

    def __add__(self, other: "DyadicFunction") -> "DyadicFunction":
        _same_grid(self, other)
        return DyadicFunction(self.level, self.space, self.values + other.values)

    def __mul__(self, c: float) -> "DyadicFunction":
        return DyadicFunction(self.level, self.space, self.values * float(c))

    __rmul__ = __mul__

    @functools.cached_property
    def _tree(self) -> list[np.ndarray]:
        levels = [self.values]
        cur = self.values
        for _ in range(self.level):
            cur = (cur[0::2] + cur[1::2]) * 0.5
            levels.append(cur)
        return levels[::-1]

    def averages(self, j: int) -> np.ndarray:
        """Values of ``E_j f`` on the ``2^j`` atoms of level ``j``."""
        return self._tree[min(j, self.level)]

    @functools.cached_property
    def martingale(self) -> np.ndarray:
        """``E_j f`` for ``j = 0..L`` on the level-``L`` grid, shape ``(L+1, 2^L, ...)``."""
        out = np.stack([np.repeat(self._tree[j], 1 << (self.level - j), axis=0) for j in range(self.level + 1)])
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class ScalarDyadicFunction:
    level: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (1 << self.level,):
            raise ValueError(f"level {self.level} needs {1 << self.level} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class DyadicSet:
    level: int
    atoms: tuple[int, ...]

    def __post_init__(self):
        atoms = tuple(sorted(set(int(a) for a in self.atoms)))
        if atoms and (atoms[0] < 0 or atoms[-1] >= 1 << self.level):
            raise ValueError("atom index out of range")
        object.__setattr__(self, "atoms", atoms)

    @property
    def measure(self) -> float:
        return len(self.atoms) / (1 << self.level)

    def mask(self, level: int) -> np.ndarray:
        """Indicator on the level-``level`` grid (``level >= self.level``)."""
        if level < self.level:
            raise ValueError("a level-m set is not measurable at a coarser level")
        coarse = np.zeros(1 << self.level, dtype=bool)
        coarse[list(self.atoms)] = True
        return np.repeat(coarse, 1 << (level - self.level))


AnyDyadic = Union[DyadicFunction, ScalarDyadicFunction]


def _same_grid(a: DyadicFunction, b: DyadicFunction) -> None:
    if a.level != b.level or a.space != b.space:
        raise ValueError("functions live on different grids or spaces")


def pointwise_norms(g: AnyDyadic) -> np.ndarray:
    if isinstance(g, ScalarDyadicFunction):
        return np.abs(g.values)
    return norms(g.space, g.values)


def cond_expect(f: DyadicFunction, j: int) -> DyadicFunction:
    """``E(f | F_j)`` re-expanded to the level of ``f``."""
    if j < 0:
        raise ValueError("levels below 0 coincide with level 0 on [0, 1); pass j = 0")
    if j >= f.level:
        return f
    return DyadicFunction(f.level, f.space, np.repeat(f.averages(j), 1 << (f.level - j), axis=0))


def integrate(f: DyadicFunction, A: Optional[DyadicSet] = None) -> np.ndarray:
    """``int_A f dmu`` with Lebesgue measure (``A`` defaults to [0, 1))."""
    vals = f.values if A is None else f.values[A.mask(f.level)]
    return vals.sum(axis=0) / f.n_atoms


def maximal_std(f: DyadicFunction) -> ScalarDyadicFunction:
    """``Mf = max_j ||E_j f||`` over ``j = 0..L``."""
    return ScalarDyadicFunction(f.level, norms(f.space, f.martingale).max(axis=0))


def value_operators(space: SpaceSpec, vals: np.ndarray) -> list[Operator]:
    """Read values of a function as operators (vectors act on the scalars)."""
    if isinstance(space, SequenceSpace):
        return [vector_as_operator(space, v) for v in vals]
    return [Operator(m, space.domain, space.codomain) for m in vals]


def _rad_mode(space: SpaceSpec, mode: str) -> str:
    if mode == "auto":
        return "hilbert" if space.is_hilbert else "search"
    if mode not in ("hilbert", "search"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "hilbert" and not space.is_hilbert:
        raise ValueError(f"Hilbert mode requested for non-Hilbert values in {space}")
    return mode


def prefix_rbounds(f: DyadicFunction, params: SearchParams = SearchParams(), p: float = 2.0,
                   mode: str = "auto") -> np.ndarray:
    """``R(E_i f(xi) : i <= j)`` for every atom and ``j = 0..L``; shape ``(2^L, L+1)``.

    Search estimates are made nondecreasing in ``j`` by a running maximum,
    which keeps them valid lower bounds.
    """
    mode = _rad_mode(f.space, mode)
    mart = f.martingale
    if mode == "hilbert":
        out = np.maximum.accumulate(norms(f.space, mart).T, axis=1)
        return out
    out = np.zeros((f.n_atoms, f.level + 1))
    memo: dict[bytes, float] = {}
    for i in range(f.n_atoms):
        for j in range(f.level + 1):
            fam_vals = mart[: j + 1, i]
            key = fam_vals.tobytes()
            if key not in memo:
                memo[key] = rbound_search(value_operators(f.space, fam_vals), p, params).value
            out[i, j] = memo[key]
    return np.maximum.accumulate(out, axis=1)


def maximal_rad(f: DyadicFunction, params: SearchParams = SearchParams(), p: float = 2.0,
                mode: str = "auto") -> ScalarDyadicFunction:
    """Rademacher maximal function ``M_R f(xi) = R(E_j f(xi) : j = 0..L)``.

    ``mode="hilbert"`` evaluates the exact Hilbert-space R-bound; ``"search"``
    a certified lower bound; ``"auto"`` picks by the value space.
    """
    mode = _rad_mode(f.space, mode)
    mart = f.martingale
    out = np.zeros(f.n_atoms)
    memo: dict[bytes, float] = {}
    for i in range(f.n_atoms):
        fam_vals = mart[:, i]
        key = fam_vals.tobytes()
        if key not in memo:
            fam = value_operators(f.space, fam_vals)
            memo[key] = rbound_hilbert(fam) if mode == "hilbert" else rbound_search(fam, p, params).value
        out[i] = memo[key]
    return ScalarDyadicFunction(f.level, out)


def lp_norm(g: AnyDyadic, p: float) -> float:
    """Bochner ``L^p`` norm with respect to Lebesgue measure on [0, 1)."""
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    a = pointwise_norms(g)
    if math.isinf(p):
        return float(a.max())
    return float(np.mean(a**p) ** (1.0 / p))


def lorentz_norm(g: AnyDyadic, p: float, s: float) -> float:
    """Lorentz ``L^{p,s}`` norm of a step function, evaluated in closed form.

    With distinct positive values ``v_1 > ... > v_K`` (``v_{K+1} = 0``) and
    ``w_k = mu(|g| >= v_k)``, the distribution function equals ``w_k`` on
    ``[v_{k+1}, v_k)``, so the defining integral is
    ``sum_k w_k^(s/p) (v_k^s - v_{k+1}^s) / s``.
    """
    if not (1.0 < p < math.inf) or not (1.0 <= s < math.inf):
        raise ValueError(f"need 1 < p < inf and 1 <= s < inf, got p={p}, s={s}")
    a = pointwise_norms(g)
    a = a[a > 0]
    if not len(a):
        return 0.0
    vals, counts = np.unique(a, return_counts=True)
    vals, counts = vals[::-1], counts[::-1]
    w = np.cumsum(counts) / (1 << g.level)
    nxt = np.append(vals[1:], 0.0)
    total = math.fsum(w ** (s / p) * (vals**s - nxt**s) / s)
    return total ** (1.0 / s)


def from_values(space: SpaceSpec, values: Sequence[Any]) -> DyadicFunction:
    vals = np.asarray(values, dtype=float)
    n = len(vals)
    level = n.bit_length() - 1
    if n < 1 or 1 << level != n:
        raise ValueError(f"number of atoms must be a power of two, got {n}")
    if isinstance(space, SequenceSpace) and vals.ndim == 1 and space.dim == 1:
        vals = vals[:, None]
    return DyadicFunction(level, space, vals)


def indicator(level: int, A: DyadicSet, space: SpaceSpec = SequenceSpace(2.0, 1)) -> DyadicFunction:
    vals = A.mask(level).astype(float).reshape((-1,) + (1,) * len(space.shape))
    return DyadicFunction(level, space, np.broadcast_to(vals, (1 << level,) + space.shape))


__all__ = [
    "DyadicFunction", "ScalarDyadicFunction", "DyadicSet", "cond_expect", "integrate",
    "maximal_std", "maximal_rad", "prefix_rbounds", "lp_norm", "lorentz_norm", "from_values",
    "indicator", "pointwise_norms", "value_operators",
]
