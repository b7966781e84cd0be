"""Lower bounds on R-bounds of operator families and on type constants.

The R-bound is a supremum over selections of any length; the search below
caps the selection length and the multiplicity of each operator, so every
number it returns is a certified lower bound (each comes with the witness
that realizes it).

Search layout.  Every operator alone is evaluated through its induced
norm.  Then every subset of at most ``group_cap`` distinct operators, and
the whole family, is searched independently with a random stream keyed by
the (scale-normalized) content of that subset.  Keying by content makes the
result independent of the order of the family, and makes the estimate
monotone under inclusion whenever the larger family has at most
``group_cap`` distinct members.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._search import ascend, stream
from .rademacher import batch_moments, batch_moments_grad, rad_moment
from .spaces import (
    Operator, SequenceSpace, as_vectors, op_norm_estimate, seq_norms, seq_pow_norm_grad,
    _closed_form_op_norms,
)


@dataclass(frozen=True)
class SearchParams:
    nmax: int = 8
    multiplicity: int = 4
    restarts: int = 4
    iters: int = 30
    group_cap: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.nmax < 1 or self.multiplicity < 1 or self.restarts < 0 or self.group_cap < 1:
            raise ValueError(f"invalid search parameters {self}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RBoundEstimate:
    value: float
    p: float
    params: SearchParams
    selection: tuple[int, ...]
    vectors: np.ndarray
    certified: str = "lower_bound"

    def to_dict(self) -> dict:
        return {
            "value": self.value, "p": self.p, "certified": self.certified,
            "search": self.params.to_dict(),
            "witness": {"selection": list(self.selection), "vectors": self.vectors.tolist()},
        }


@dataclass(frozen=True, eq=False)
class TypeConstantEstimate:
    value: float
    p: float
    params: SearchParams
    vectors: np.ndarray = field(repr=False)
    certified: str = "lower_bound"

    def to_dict(self) -> dict:
        return {"value": self.value, "p": self.p, "certified": self.certified,
                "search": self.params.to_dict(), "witness": {"vectors": self.vectors.tolist()}}


def _check_family(family: Sequence[Operator]) -> tuple[SequenceSpace, SequenceSpace]:
    if not len(family):
        raise ValueError("operator family is empty")
    dom, cod = family[0].domain, family[0].codomain
    for T in family[1:]:
        if T.domain != dom or T.codomain != cod:
            raise ValueError("operators in a family must share domain and codomain")
    return dom, cod


def witness_ratio(family: Sequence[Operator], selection: Sequence[int], vectors: np.ndarray,
                  p: float = 2.0) -> float:
    """``(E||sum eps_j T_sel(j) x_j||^p / E||sum eps_j x_j||^p)^(1/p)``."""
    dom, cod = _check_family(family)
    xs = as_vectors(dom, vectors)
    ys = np.stack([family[i].matrix @ x for i, x in zip(selection, xs)]) if len(xs) else np.zeros((0, cod.dim))
    den = rad_moment(dom, xs, p).value
    if den == 0.0:
        return 0.0
    return (rad_moment(cod, ys, p).value / den) ** (1.0 / p)


def _content_key(mats: np.ndarray) -> tuple:
    scale = np.max(np.abs(mats))
    if scale == 0:
        return (mats.shape, b"")
    return (mats.shape, np.round(mats / scale, 9).tobytes())


class _Problem:
    """Ratio objective for one fixed selection of (normalized) matrices."""

    def __init__(self, mats: np.ndarray, p: float, qf: float, qe: float):
        self.mats, self.p, self.qf, self.qe = mats, p, qf, qe

    def values(self, xs: np.ndarray, mats: Optional[np.ndarray] = None) -> np.ndarray:
        m = self.mats if mats is None else mats
        if m.ndim == 3:
            ys = np.einsum("nef,knf->kne", m, xs)
        else:
            ys = np.einsum("knef,knf->kne", m, xs)
        num = batch_moments(ys, self.p, self.qe)
        den = batch_moments(xs, self.p, self.qf)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / den, 0.0) ** (1.0 / self.p)

    def grad(self, x: np.ndarray) -> np.ndarray:
        ys = np.einsum("nef,nf->ne", self.mats, x)
        num, gy = batch_moments_grad(ys[None], self.p, self.qe)
        den, gx = batch_moments_grad(x[None], self.p, self.qf)
        gnum = np.einsum("nef,ne->nf", self.mats, gy[0])
        if den[0] == 0:
            return np.zeros_like(x)
        return gnum / den[0] - num[0] * gx[0] / den[0] ** 2


def _polish(mats: np.ndarray, sel: list[int], x0: np.ndarray, p: float, qf: float, qe: float,
            rng: np.random.Generator, params: SearchParams, swaps: bool) -> tuple[float, list[int], np.ndarray]:
    """Ascend in the vectors, then try single-slot operator swaps; repeat."""
    counts = np.bincount(sel, minlength=len(mats))
    x, val = x0, -1.0
    for _ in range(3):
        prob = _Problem(mats[sel], p, qf, qe)
        x, val = ascend(prob.values, x, rng, grad=prob.grad, iters=params.iters)
        if not swaps or len(mats) == 1:
            break
        cands = []
        for j, t in itertools.product(range(len(sel)), range(len(mats))):
            if t != sel[j] and counts[t] < params.multiplicity:
                s2 = list(sel)
                s2[j] = t
                cands.append(s2)
        if not cands:
            break
        vals = prob.values(np.broadcast_to(x, (len(cands),) + x.shape), mats[np.array(cands)])
        i = int(np.argmax(vals))
        if vals[i] <= val:
            break
        sel = cands[i]
        counts = np.bincount(sel, minlength=len(mats))
    return val, sel, x


def _unit_witness(T: Operator) -> np.ndarray:
    w = op_norm_estimate(T).witness
    n = seq_norms(w, T.domain.q)
    return w / n if n > 0 else w


def _search_group(mats: np.ndarray, witnesses: np.ndarray, p: float, qf: float, qe: float,
                  params: SearchParams, rng: np.random.Generator) -> tuple[float, list[int], np.ndarray]:
    m = len(mats)
    lo = min(m, params.nmax)
    hi = min(params.nmax, m * params.multiplicity)
    starts: list[tuple[list[int], np.ndarray]] = []
    if m <= params.nmax:
        sel = list(range(m))
        starts.append((sel, witnesses[sel].copy()))
    for _ in range(params.restarts):
        n = int(rng.integers(lo, hi + 1))
        if n >= m:
            sel = list(range(m))
            counts = np.ones(m, dtype=int)
            while len(sel) < n:
                t = int(rng.integers(m))
                if counts[t] < params.multiplicity:
                    sel.append(t)
                    counts[t] += 1
        else:
            sel = sorted(rng.choice(m, size=n, replace=False).tolist())
        sel.sort()
        starts.append((sel, rng.standard_normal((n, mats.shape[2]))))
    best = (-1.0, [], None)
    for sel, x0 in starts:
        val, s, x = _polish(mats, sel, x0, p, qf, qe, rng, params, swaps=m > 1)
        if val > best[0]:
            best = (val, s, x)
    return best


def rbound_search(family: Sequence[Operator], p: float = 2.0,
                  params: SearchParams = SearchParams()) -> RBoundEstimate:
    """Certified lower bound on the R_p-bound of a finite operator family."""
    if not p >= 1.0:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    dom, cod = _check_family(family)
    mats = np.stack([T.matrix for T in family])
    scale = float(np.max(np.abs(mats)))
    if scale == 0.0:
        return RBoundEstimate(0.0, p, params, (0,), np.eye(dom.dim)[:1])

    # distinct operators, each represented by its first index in the family
    firsts: dict[bytes, int] = {}
    for i, m in enumerate(mats):
        firsts.setdefault(m.tobytes(), i)
    reps = sorted(firsts.values(), key=lambda i: _content_key(mats[i] / scale)[1])
    wit = {i: _unit_witness(family[i]) for i in reps}

    # (value, selection in family indices, vectors)
    cands: list[tuple[float, tuple[int, ...], np.ndarray]] = []
    for i in reps:
        x = wit[i][None, :]
        cands.append((witness_ratio(family, (i,), x, p), (i,), x))

    groups = [g for r in range(2, min(params.group_cap, len(reps)) + 1) for g in itertools.combinations(reps, r)]
    if len(reps) > params.group_cap:
        groups.append(tuple(reps))
    for g in groups:
        gm = mats[list(g)]
        gscale = float(np.max(np.abs(gm)))
        if gscale == 0.0:
            continue
        rng = stream(params.seed, "rbound", p, _content_key(gm), params.nmax, params.multiplicity,
                     params.restarts, params.iters)
        val, sel, x = _search_group(gm / gscale, np.stack([wit[i] for i in g]), p, dom.q, cod.q, params, rng)
        if not sel:
            continue
        order = sorted(range(len(sel)), key=lambda j: (g[sel[j]], j))
        fsel = tuple(g[sel[j]] for j in order)
        cands.append((witness_ratio(family, fsel, x[order], p), fsel, x[order]))

    top = max(c[0] for c in cands)
    value, sel, x = min((c for c in cands if c[0] == top), key=lambda c: c[1])
    return RBoundEstimate(float(value), p, params, sel, np.asarray(x))


def rbound_hilbert(family: Sequence[Operator]) -> float:
    """Exact R-bound between Hilbert spaces: the largest operator norm."""
    dom, cod = _check_family(family)
    if not (dom.is_hilbert and cod.is_hilbert):
        raise ValueError(f"rbound_hilbert needs Hilbert spaces, got {dom} -> {cod}")
    mats = np.stack([T.matrix for T in family])
    return float(np.max(_closed_form_op_norms(mats, family[0].space)))


# --- type constants ---------------------------------------------------------

def type_ratio(space: SequenceSpace, xs: np.ndarray, p: float) -> float:
    """``(E||sum eps_j x_j||^2)^(1/2) / (sum ||x_j||^p)^(1/p)``."""
    xs = as_vectors(space, xs)
    den = float(np.sum(seq_norms(xs, space.q) ** p)) ** (1.0 / p)
    if den == 0.0:
        return 0.0
    return rad_moment(space, xs, 2.0).value ** 0.5 / den


def _type_objective(q: float, p: float):
    def values(xs: np.ndarray) -> np.ndarray:
        num = batch_moments(xs, 2.0, q)
        den = np.sum(seq_norms(xs, q) ** p, axis=1) ** (2.0 / p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sqrt(np.where(den > 0, num / den, 0.0))

    def grad(x: np.ndarray) -> np.ndarray:
        num, gn = batch_moments_grad(x[None], 2.0, q)
        pw, gp = seq_pow_norm_grad(x, q, p)
        s = float(np.sum(pw))
        if s == 0.0:
            return np.zeros_like(x)
        den = s ** (2.0 / p)
        gden = (2.0 / p) * s ** (2.0 / p - 1.0) * gp
        return gn[0] / den - num[0] * gden / den**2

    return values, grad


@functools.lru_cache(maxsize=256)
def _type_search_cached(q: float, dim: int, p: float, params: SearchParams) -> tuple[float, bytes, tuple]:
    space = SequenceSpace(q, dim)
    best_val, best_x = 1.0, np.eye(dim)[:1]
    if dim > 1:
        v, xb, shape = _type_search_cached(q, dim - 1, p, params)
        prev = np.frombuffer(xb).reshape(shape)
        best_val, best_x = v, np.hstack([prev, np.zeros((len(prev), 1))])
    values, grad = _type_objective(q, p)
    rng = stream(params.seed, "type", q, dim, p, params.nmax, params.restarts, params.iters)
    for n in range(2, params.nmax + 1):
        starts = []
        if n <= dim:
            starts.append(np.eye(dim)[:n])
        starts += [rng.standard_normal((n, dim)) for _ in range(params.restarts)]
        for x0 in starts:
            x, _ = ascend(values, x0, rng, grad=grad, iters=params.iters)
            v = type_ratio(space, x, p)
            if v > best_val:
                best_val, best_x = v, x
    return best_val, np.ascontiguousarray(best_x).tobytes(), best_x.shape


def type_constant_search(space: SequenceSpace, p: float = 2.0,
                         params: SearchParams = SearchParams()) -> TypeConstantEstimate:
    """Certified lower bound on the type-``p`` constant of ``space``.

    The search in dimension ``n`` includes the (zero-padded) optimum found
    in dimension ``n - 1``, so the estimate never decreases with dimension.
    """
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"type exponent must lie in [1, 2], got {p}")
    if not isinstance(space, SequenceSpace):
        raise TypeError("type constants are estimated for sequence spaces")
    val, xb, shape = _type_search_cached(space.q, space.dim, float(p), params)
    return TypeConstantEstimate(val, p, params, np.frombuffer(xb).reshape(shape).copy())
