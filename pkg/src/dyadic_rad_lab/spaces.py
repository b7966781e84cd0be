"""Finite-dimensional real normed spaces and operator spaces.

A :class:`SequenceSpace` is ``R^n`` with the ``l^q`` norm; an
:class:`OperatorSpace` is the space of ``codomain.dim x domain.dim``
matrices with the induced operator norm.  Vectors are plain numpy arrays
whose trailing shape equals ``space.shape``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Union

import numpy as np

from ._search import ascend, stream


class DimensionError(ValueError):
    """A vector or operator does not fit the space it was paired with."""


@dataclass(frozen=True)
class SequenceSpace:
    q: float
    dim: int

    def __post_init__(self):
        if not (self.q >= 1.0):
            raise ValueError(f"exponent q must lie in [1, inf], got {self.q}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim,)

    @property
    def is_hilbert(self) -> bool:
        return self.q == 2.0 or self.dim == 1

    def __str__(self) -> str:
        q = "inf" if math.isinf(self.q) else f"{self.q:g}"
        return f"l^{q}_{self.dim}"


@dataclass(frozen=True)
class OperatorSpace:
    domain: SequenceSpace
    codomain: SequenceSpace

    def __post_init__(self):
        for s in (self.domain, self.codomain):
            if not isinstance(s, SequenceSpace):
                raise TypeError("operator spaces are built over sequence spaces")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.codomain.dim, self.domain.dim)

    @property
    def is_hilbert(self) -> bool:
        return self.domain.is_hilbert and self.codomain.is_hilbert

    def __str__(self) -> str:
        return f"L({self.domain}, {self.codomain})"


SpaceSpec = Union[SequenceSpace, OperatorSpace]

SCALARS = SequenceSpace(2.0, 1)


def ell(q: float, dim: int) -> SequenceSpace:
    return SequenceSpace(q, dim)


def dual_exponent(q: float) -> float:
    if q == 1.0:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


def as_vector(space: SpaceSpec, x: Any) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != space.shape:
        raise DimensionError(f"expected shape {space.shape} for {space}, got {arr.shape}")
    return arr


def as_vectors(space: SpaceSpec, xs: Any) -> np.ndarray:
    """Stack a sequence of vectors of ``space`` into an ``(N, *shape)`` array."""
    arr = np.asarray(xs, dtype=float)
    if arr.size == 0:
        return np.zeros((0,) + space.shape)
    if arr.shape[1:] != space.shape:
        raise DimensionError(f"expected vectors of shape {space.shape} for {space}, got {arr.shape[1:]}")
    return arr


# --- sequence-space norms -------------------------------------------------

def seq_norms(z: np.ndarray, q: float) -> np.ndarray:
    """l^q norms along the last axis."""
    a = np.abs(z)
    if q == 1.0:
        return a.sum(axis=-1)
    if q == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    if math.isinf(q):
        return a.max(axis=-1) if a.shape[-1] else np.zeros(a.shape[:-1])
    m = a.max(axis=-1, keepdims=True) if a.shape[-1] else np.zeros(a.shape[:-1] + (1,))
    safe = np.where(m > 0, m, 1.0)
    return (m[..., 0] * np.sum((a / safe) ** q, axis=-1) ** (1.0 / q))


def seq_pow_norm_grad(z: np.ndarray, q: float, p: float) -> tuple[np.ndarray, np.ndarray]:
    """``||z||_q^p`` and its (sub)gradient along the last axis."""
    n = seq_norms(z, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        if q == 1.0:
            g = np.sign(z)
        elif math.isinf(q):
            g = np.zeros_like(z)
            if z.shape[-1]:
                idx = np.argmax(np.abs(z), axis=-1)
                np.put_along_axis(g, idx[..., None], np.take_along_axis(np.sign(z), idx[..., None], -1), -1)
        else:
            safe = np.where(n > 0, n, 1.0)[..., None]
            g = np.sign(z) * (np.abs(z) / safe) ** (q - 1.0)
        scale = p * n ** (p - 1.0) if p != 1.0 else np.ones_like(n)
        g = g * np.where(n > 0, scale, 0.0)[..., None]
    return n**p, g


# --- generic norms ----------------------------------------------------------

def norms(space: SpaceSpec, x: np.ndarray) -> np.ndarray:
    """Norms of a stack of vectors of ``space`` (leading axes are batch axes)."""
    x = np.asarray(x, dtype=float)
    if x.shape[x.ndim - len(space.shape):] != space.shape:
        raise DimensionError(f"trailing shape {x.shape} does not match {space}")
    if isinstance(space, SequenceSpace):
        return seq_norms(x, space.q)
    flat = x.reshape((-1,) + space.shape)
    if not len(flat):
        out = np.zeros(0)
    elif _closed_form(space):
        out = _closed_form_op_norms(flat, space)
    else:
        out = np.array([op_norm_estimate(Operator(m, space.domain, space.codomain)).value for m in flat])
    return out.reshape(x.shape[: x.ndim - 2])


def norm(space: SpaceSpec, x: Any) -> float:
    return float(norms(space, as_vector(space, x)))


# --- operators -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    domain: SequenceSpace
    codomain: SequenceSpace

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionError(
                f"matrix shape {m.shape} does not match {self.domain} -> {self.codomain}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def space(self) -> OperatorSpace:
        return OperatorSpace(self.domain, self.codomain)

    def __call__(self, x: Any) -> np.ndarray:
        return self.matrix @ as_vector(self.domain, x)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.codomain.dim != self.domain.dim:
            raise DimensionError("cannot compose operators of mismatched shapes")
        return Operator(self.matrix @ other.matrix, other.domain, self.codomain)

    def scaled(self, lam: float) -> "Operator":
        return Operator(lam * self.matrix, self.domain, self.codomain)


def operator(matrix: Any, q_in: float = 2.0, q_out: float = 2.0) -> Operator:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    return Operator(m, SequenceSpace(q_in, m.shape[1]), SequenceSpace(q_out, m.shape[0]))


def vector_as_operator(space: SequenceSpace, x: Any) -> Operator:
    """The rank-one map ``t -> t x`` from the scalars into ``space``."""
    return Operator(as_vector(space, x)[:, None], SCALARS, space)


class NormEstimate(NamedTuple):
    value: float
    lower_bound: bool
    witness: np.ndarray


def _closed_form(space: OperatorSpace) -> bool:
    qi, qo = space.domain.q, space.codomain.q
    return (
        (qi == 2.0 and qo == 2.0)
        or space.domain.dim == 1
        or qi == 1.0
        or math.isinf(qo)
    )


def _closed_form_op_norms(mats: np.ndarray, space: OperatorSpace) -> np.ndarray:
    qi, qo = space.domain.q, space.codomain.q
    if space.domain.dim == 1:
        return seq_norms(mats[..., 0], qo)
    if qi == 2.0 and qo == 2.0:
        return np.linalg.norm(mats, ord=2, axis=(-2, -1))
    if qi == 1.0:
        return seq_norms(np.swapaxes(mats, -1, -2), qo).max(axis=-1)
    return seq_norms(mats, dual_exponent(qi)).max(axis=-1)


def op_norm_estimate(T: Operator, *, seed: int = 0, restarts: int = 8, iters: int = 200) -> NormEstimate:
    """Induced norm of ``T``, exact where a closed form exists.

    Exact cases: l^2 -> l^2 (largest singular value), l^1 -> any (largest
    column norm), any -> l^inf (largest dual row norm), l^inf domains of
    dimension <= 16 (vertex enumeration).  Otherwise a lower bound from
    random restarts polished on the unit sphere.
    """
    m = T.matrix
    dom, cod = T.domain, T.codomain
    n = dom.dim
    if not np.any(m):
        return NormEstimate(0.0, False, np.eye(n)[0])
    space = T.space
    if _closed_form(space):
        if n == 1:
            w = np.ones(1)
        elif dom.q == 2.0 and cod.q == 2.0:
            w = np.linalg.svd(m)[2][0]
        elif dom.q == 1.0:
            w = np.eye(n)[int(np.argmax(seq_norms(m.T, cod.q)))]
        else:
            i = int(np.argmax(seq_norms(m, dual_exponent(dom.q))))
            w = _dual_witness(m[i], dom.q)
        return NormEstimate(float(_closed_form_op_norms(m[None], space)[0]), False, w)
    if math.isinf(dom.q) and n <= 16:
        verts = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
        verts = np.hstack([np.ones((len(verts), 1)), verts])
        vals = seq_norms(verts @ m.T, cod.q)
        i = int(np.argmax(vals))
        return NormEstimate(float(vals[i]), False, verts[i])

    scale = float(np.max(np.abs(m)))
    ms = m / scale

    def ratio(X):
        return seq_norms(X @ ms.T, cod.q) / seq_norms(X, dom.q)

    def grad(x):
        a, ga = seq_pow_norm_grad(ms @ x, cod.q, 1.0)
        b, gb = seq_pow_norm_grad(x, dom.q, 1.0)
        return (ms.T @ ga) / b - a * gb / b**2

    rng = stream(seed, "op_norm", np.round(ms, 9), dom.q, cod.q)
    starts = [np.linalg.svd(ms)[2][0]] + [rng.standard_normal(n) for _ in range(restarts)]
    best_x, best = None, -1.0
    for x0 in starts:
        x, v = ascend(ratio, x0, rng, grad=grad, iters=iters)
        if v > best:
            best_x, best = x, v
    best = float(seq_norms(m @ best_x, cod.q) / seq_norms(best_x, dom.q))
    return NormEstimate(best, True, best_x)


def _dual_witness(row: np.ndarray, q: float) -> np.ndarray:
    """A unit vector of ``l^q`` attaining the pairing with ``row``."""
    if q == 1.0:
        w = np.zeros_like(row)
        i = int(np.argmax(np.abs(row)))
        w[i] = np.sign(row[i]) or 1.0
        return w
    if math.isinf(q):
        return np.where(row >= 0, 1.0, -1.0)
    qs = dual_exponent(q)
    w = np.sign(row) * np.abs(row) ** (qs - 1.0)
    n = seq_norms(w, q)
    return w / n if n > 0 else w


def op_norm(T: Operator) -> float:
    return op_norm_estimate(T).value


def elementary_tensor(fstar: Any, e: Any, domain: SequenceSpace | None = None,
                      codomain: SequenceSpace | None = None) -> Operator:
    """The rank-one map ``y -> <fstar, y> e``.

    ``fstar`` is given in the coordinates dual to ``domain`` (default l^2).
    """
    fstar = np.asarray(fstar, dtype=float).ravel()
    e = np.asarray(e, dtype=float).ravel()
    domain = domain or SequenceSpace(2.0, fstar.size)
    codomain = codomain or SequenceSpace(2.0, e.size)
    if fstar.size != domain.dim or e.size != codomain.dim:
        raise DimensionError("tensor factors do not match the given spaces")
    return Operator(np.outer(e, fstar), domain, codomain)


# --- JSON ------------------------------------------------------------------

def _q_to_json(q: float) -> Any:
    return "inf" if math.isinf(q) else q


def space_to_json(space: SpaceSpec) -> dict:
    if isinstance(space, SequenceSpace):
        return {"kind": "seq", "q": _q_to_json(space.q), "dim": space.dim}
    return {"kind": "op", "domain": space_to_json(space.domain), "codomain": space_to_json(space.codomain)}


def space_from_json(obj: Any) -> SpaceSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"not a space description: {obj!r}")
    if obj["kind"] == "seq":
        q = obj.get("q", 2.0)
        q = math.inf if q in ("inf", "Infinity", None) else float(q)
        return SequenceSpace(q, int(obj["dim"]))
    if obj["kind"] == "op":
        dom, cod = space_from_json(obj["domain"]), space_from_json(obj["codomain"])
        if not isinstance(dom, SequenceSpace) or not isinstance(cod, SequenceSpace):
            raise ValueError("operator spaces must be built over sequence spaces")
        return OperatorSpace(dom, cod)
    raise ValueError(f"unknown space kind {obj['kind']!r}")
