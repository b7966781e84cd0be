"""Carleson families, the embedding ``f -> (E_j f . theta_j)_j`` and its audit.

A family ``theta = (theta_0, ..., theta_L)`` of level-``L`` step functions
with values in a sequence space ``F`` is stored as one array of shape
``(L+1, 2^L, dim F)``.  Functions ``f`` to be embedded take values either in
a sequence space ``E`` (then ``F`` must be the scalars) or in operators
``F -> E``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from ._search import ascend, stream
from .dyadic import DyadicFunction, ScalarDyadicFunction, lorentz_norm, prefix_rbounds
from .rademacher import (
    EXACT_THRESHOLD, batch_moments, batch_moments_grad, block_randomization_check, rad_moment,
)
from .rbound import SearchParams, _Problem
from .spaces import SCALARS, Operator, SequenceSpace, norms, op_norm_estimate, seq_norms, seq_pow_norm_grad


@dataclass(frozen=True, eq=False)
class CarlesonFamily:
    level: int
    space: SequenceSpace
    values: np.ndarray  # (L+1, 2^L, dim F); index j holds theta_j

    def __post_init__(self):
        if not isinstance(self.space, SequenceSpace):
            raise TypeError("Carleson families take values in a sequence space")
        v = np.array(self.values, dtype=float)
        shape = (self.level + 1, 1 << self.level, self.space.dim)
        if v.shape != shape:
            raise ValueError(f"family needs shape {shape}, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_funcs(cls, level: int, space: SequenceSpace,
                   funcs: Mapping[int, DyadicFunction]) -> "CarlesonFamily":
        """Assemble from ``{j: theta_j}``; absent indices are zero."""
        vals = np.zeros((level + 1, 1 << level, space.dim))
        for j, th in funcs.items():
            if not 0 <= j <= level:
                raise ValueError(f"index {j} outside 0..{level}")
            if th.level != level or th.space != space:
                raise ValueError(f"theta_{j} does not live on the family's grid and space")
            vals[j] = th.values
        return cls(level, space, vals)

    @classmethod
    def scalar(cls, values: Any) -> "CarlesonFamily":
        """Scalar family from an ``(L+1, 2^L)`` array."""
        v = np.asarray(values, dtype=float)
        level = v.shape[1].bit_length() - 1
        return cls(level, SCALARS, v[..., None])

    @property
    def indices(self) -> tuple[int, ...]:
        """Indices ``j`` with ``theta_j`` not identically zero."""
        return tuple(int(j) for j in np.flatnonzero(np.any(self.values != 0, axis=(1, 2))))

    def func(self, j: int) -> DyadicFunction:
        return DyadicFunction(self.level, self.space, self.values[j])


@dataclass(frozen=True, eq=False)
class EmbeddingImage:
    level: int
    space: SequenceSpace
    values: np.ndarray  # (2^L, L+1, dim E); row i is the sequence at atom i


def _moments_per_atom(space: SequenceSpace, seqs: np.ndarray, p: float, mode: str,
                      samples: int, seed: int, threshold: int) -> np.ndarray:
    """``rad_moment`` of every row of ``seqs`` (shape ``(atoms, n, d)``), computed once per distinct row."""
    if seqs.shape[1] == 0:
        return np.zeros(len(seqs))
    flat = seqs.reshape(len(seqs), -1)
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    vals = np.array([
        rad_moment(space, u.reshape(seqs.shape[1:]), p, mode, samples=samples, seed=seed,
                   threshold=threshold).value
        for u in uniq
    ])
    return vals[inv.ravel()]


def tail_energy(theta: CarlesonFamily, m: int, p: float, mode: str = "exact", *,
                samples: int = 100_000, seed: int = 0,
                threshold: int = EXACT_THRESHOLD) -> ScalarDyadicFunction:
    """Per atom, ``E||sum_{j >= m} eps_j theta_j||^p``."""
    if not 0 <= m <= theta.level + 1:
        raise ValueError(f"tail start {m} outside 0..{theta.level + 1}")
    seqs = np.swapaxes(theta.values[m:], 0, 1)
    return ScalarDyadicFunction(
        theta.level, _moments_per_atom(theta.space, seqs, p, mode, samples, seed, threshold))


def atom_averages(theta: CarlesonFamily, p: float, mode: str = "exact", **kw) -> list[np.ndarray]:
    """For each ``m``, the averages of the level-``m`` tail over the level-``m`` atoms."""
    out = []
    for m in range(theta.level + 1):
        t = tail_energy(theta, m, p, mode, **kw).values
        out.append(t.reshape(1 << m, -1).mean(axis=1))
    return out


def car_constant(theta: CarlesonFamily, p: float, mode: str = "exact", **kw) -> float:
    """Carleson constant ``sup_m sup_{A in F_m} (mu(A)^-1 int_A tail_m)^(1/p)``.

    The supremum over sets of ``F_m`` is attained at a single level-``m``
    atom: the average over a union of atoms is a convex combination of the
    atom averages.
    """
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    best = max(float(a.max()) for a in atom_averages(theta, p, mode, **kw))
    return best ** (1.0 / p)


def _check_pair(theta: CarlesonFamily, f: DyadicFunction) -> None:
    if f.level != theta.level:
        raise ValueError(f"f has level {f.level}, family has level {theta.level}")
    if isinstance(f.space, SequenceSpace):
        if theta.space.dim != 1:
            raise ValueError("vector-valued f pairs only with a scalar family")
    elif f.space.domain.dim != theta.space.dim or f.space.domain.q != theta.space.q:
        raise ValueError(f"operators on {f.space.domain} cannot act on family values in {theta.space}")


def _target(f: DyadicFunction) -> SequenceSpace:
    return f.space if isinstance(f.space, SequenceSpace) else f.space.codomain


def embed(theta: CarlesonFamily, f: DyadicFunction) -> EmbeddingImage:
    """Per atom, the sequence ``(E_j f(xi) theta_j(xi))_{j=0..L}``."""
    _check_pair(theta, f)
    mart = f.martingale
    if isinstance(f.space, SequenceSpace):
        vals = mart * theta.values[:, :, :1]
    else:
        vals = np.einsum("jief,jif->jie", mart, theta.values)
    return EmbeddingImage(f.level, _target(f), np.swapaxes(vals, 0, 1))


def embed_norm(theta: CarlesonFamily, f: DyadicFunction, p: float, mode: str = "exact", *,
               samples: int = 100_000, seed: int = 0, threshold: int = EXACT_THRESHOLD,
               start: int = 0) -> float:
    """``L^p(Rad_p(E))`` norm of the embedded function (indices ``j >= start``)."""
    img = embed(theta, f)
    mom = _moments_per_atom(img.space, img.values[:, start:], p, mode, samples, seed, threshold)
    return float(np.mean(mom)) ** (1.0 / p)


# --- operator norm search ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormSearchResult:
    value: float
    p: float
    witness: Optional[DyadicFunction]
    params: SearchParams
    certified: str = "lower_bound"

    def to_dict(self) -> dict:
        w = None if self.witness is None else self.witness.values.tolist()
        return {"value": self.value, "p": self.p, "certified": self.certified,
                "search": self.params.to_dict(), "witness": w}


class _EmbedObjective:
    """``||Theta f||_p^p / ||f||_p^p`` and its gradient for vector-valued ``f``."""

    def __init__(self, theta: CarlesonFamily, space: SequenceSpace, p: float):
        self.L, self.q, self.p = theta.level, space.q, p
        th = theta.values[:, :, 0]
        self.js = np.array(theta.indices, dtype=int)
        self.atoms = np.flatnonzero(np.any(th != 0, axis=0))
        self.th = th[np.ix_(self.js, self.atoms)]  # (J, S)

    def _terms(self, F: np.ndarray) -> np.ndarray:
        # F: (K, 2^L, d) -> (K, S, J, d)
        K, n, d = F.shape
        cols = []
        for j in self.js:
            avg = F.reshape(K, 1 << j, n >> j, d).mean(axis=2)
            cols.append(avg[:, self.atoms >> (self.L - j)])
        return np.stack(cols, axis=2) * self.th.T[None, :, :, None]

    def values(self, F: np.ndarray) -> np.ndarray:
        K = len(F)
        if not len(self.js):
            return np.zeros(K)
        z = self._terms(F)
        S, J, d = z.shape[1:]
        num = batch_moments(z.reshape(K * S, J, d), self.p, self.q).reshape(K, S).sum(axis=1)
        den = np.sum(seq_norms(F, self.q) ** self.p, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / den, 0.0)

    def grad(self, F: np.ndarray) -> np.ndarray:
        n, d = F.shape
        if not len(self.js):
            return np.zeros_like(F)
        z = self._terms(F[None])[0]
        num, gz = batch_moments_grad(z, self.p, self.q)  # (S,), (S, J, d)
        num = float(num.sum())
        pw, gden = seq_pow_norm_grad(F, self.q, self.p)
        den = float(pw.sum())
        if den == 0.0:
            return np.zeros_like(F)
        gnum = np.zeros_like(F)
        for a, j in enumerate(self.js):
            w = np.zeros((1 << j, d))
            np.add.at(w, self.atoms >> (self.L - j), gz[:, a] * self.th[a][:, None])
            gnum += np.repeat(w, n >> j, axis=0) / (n >> j)
        return gnum / den - num * gden / den**2


def operator_norm_search(theta: CarlesonFamily, p: float, space: SequenceSpace = SCALARS,
                         params: SearchParams = SearchParams(),
                         inits: Sequence[DyadicFunction] = ()) -> NormSearchResult:
    """Lower bound on the norm of ``f -> Theta f`` from ``L^p(E)`` to ``L^p(Rad(E))``.

    Only scalar families are searched (``f`` takes values in ``E``).  Each
    candidate value is recomputed with :func:`embed_norm` and
    :func:`lp_norm`, so the returned number is realized by the witness.
    """
    if theta.space.dim != 1:
        raise ValueError("operator_norm_search handles scalar families")
    obj = _EmbedObjective(theta, space, p)
    L, n = theta.level, 1 << theta.level
    if not len(obj.js):
        return NormSearchResult(0.0, p, None, params)
    rng = stream(params.seed, "embed-norm", p, str(space), theta.values, params.restarts, params.iters)
    starts = [np.ones((n, space.dim))]
    starts += [np.asarray(g.values, dtype=float) for g in inits]
    starts += [rng.standard_normal((n, space.dim)) for _ in range(params.restarts)]
    best_val, best_f = -1.0, None
    for x0 in starts:
        if not np.any(x0):
            continue
        x, _ = ascend(obj.values, x0, rng, grad=obj.grad, iters=params.iters)
        for cand in (x0, x):
            g = DyadicFunction(L, space, cand)
            den = float(np.mean(norms(space, g.values) ** p)) ** (1.0 / p)
            val = embed_norm(theta, g, p) / den
            if val > best_val:
                best_val, best_f = val, g
    return NormSearchResult(float(best_val), p, best_f, params)


# --- stopping times ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StoppingDecomposition:
    """Stopping times ``tau_k = min{j >= N : R(E_i f : i <= j) > 2^k}``.

    ``tau[i, k - k_min]`` is the stopping level at atom ``i``; ``inf`` when
    the prefix R-bounds never exceed ``2^k``.  ``prefix[i, j]`` holds the
    prefix R-bounds and ``prefix[:, -1]`` is ``M_R f``.
    """
    start: int
    k_min: int
    k_max: int
    tau: np.ndarray
    prefix: np.ndarray

    @property
    def ks(self) -> range:
        return range(self.k_min, self.k_max + 1)

    @property
    def maximal(self) -> np.ndarray:
        return self.prefix[:, -1]

    def tau_of(self, k: int) -> np.ndarray:
        if k < self.k_min:
            return self.tau[:, 0] if self.tau.shape[1] else np.full(len(self.prefix), np.inf)
        if k > self.k_max:
            return np.full(len(self.prefix), np.inf)
        return self.tau[:, k - self.k_min]

    def block(self, atom: int, k: int) -> range:
        """``J_k = {j : tau_k <= j < tau_{k+1}}`` at one atom."""
        L = self.prefix.shape[1] - 1
        a, b = self.tau_of(k)[atom], self.tau_of(k + 1)[atom]
        if math.isinf(a):
            return range(0)
        return range(int(a), L + 1 if math.isinf(b) else int(b))

    def blocks(self, atom: int) -> dict[int, range]:
        """Nonempty blocks at one atom, keyed by ``k``."""
        return {k: r for k in range(self.k_min, self.k_max) if len(r := self.block(atom, k))}


def stopping_decompose(f: DyadicFunction, N: int = 0, params: SearchParams = SearchParams(),
                       p: float = 2.0, mode: str = "auto") -> StoppingDecomposition:
    if not 0 <= N <= f.level:
        raise ValueError(f"truncation start {N} outside 0..{f.level}")
    pre = prefix_rbounds(f, params, p, mode)
    tail = pre[:, N:]
    pos = tail[tail > 0]
    if not len(pos):
        return StoppingDecomposition(N, 0, -1, np.zeros((f.n_atoms, 0)), pre)
    k_min = math.floor(math.log2(float(pos.min()))) - 1
    k_max = max(math.ceil(math.log2(float(pre[:, -1].max()))), k_min + 1)
    ks = np.arange(k_min, k_max + 1)
    thresholds = np.ldexp(1.0, ks)
    exceeds = tail[:, :, None] > thresholds[None, None, :]  # (atoms, L+1-N, K)
    first = np.argmax(exceeds, axis=1).astype(float) + N
    tau = np.where(exceeds.any(axis=1), first, np.inf)
    return StoppingDecomposition(N, k_min, k_max, tau, pre)


# --- audit -----------------------------------------------------------------------

@dataclass(frozen=True)
class AuditStep:
    name: str
    lhs: float
    rhs: float
    holds: bool
    hard: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds,
                "hard": self.hard, "note": self.note}


@dataclass(frozen=True)
class AuditReport:
    p: float
    r: float
    s: float
    start: int
    lhs: float
    car: float
    maximal_lorentz: float
    ratio: float
    steps: tuple[AuditStep, ...] = field(default_factory=tuple)

    @property
    def hard_ok(self) -> bool:
        return all(st.holds for st in self.steps if st.hard)

    def step(self, name: str) -> AuditStep:
        for st in self.steps:
            if st.name == name:
                return st
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"p": self.p, "r": self.r, "s": self.s, "start": self.start, "lhs": self.lhs,
                "car": self.car, "maximal_lorentz": self.maximal_lorentz, "ratio": self.ratio,
                "hard_ok": self.hard_ok, "steps": [st.to_dict() for st in self.steps]}


def _leq(a: float, b: float, tol: float) -> bool:
    return a <= b + tol * max(1.0, abs(b))


def lemma_audit(theta: CarlesonFamily, f: DyadicFunction, p: float, r: float = 2.0, N: int = 0,
                mode: str = "hilbert", tol: float = 1e-9) -> AuditReport:
    """Check the stopping-time proof of the embedding bound step by step.

    Steps:
      a  block randomization: signs attached per block ``J_k`` do not change
         the p-th moment at any atom (equality);
      b  per block, ``E||sum_{J_k} eps E_j f theta_j||^s <= 2^((k+1)s) E||sum_{J_k} eps theta_j||^s``;
         a hard inequality when ``s = 2`` or ``E`` is one-dimensional;
      c  the pointwise type-``s`` estimate and the triangle inequality in
         ``L^(p/s)``; measured constants are reported;
      d  ``int E||sum_{J_k} eps theta_j||^p <= sum_m int_{tau_k = m} tail_m
         <= Car^p mu(tau_k < inf)`` for every ``k`` (hard);
      e  ``sum_k 2^((k+1)s) mu(M_R f > 2^k)^(s/p)`` against ``||M_R f||^s_{L^{p,s}}``;
         the ratio must lie in ``[s 2^s/(2^s-1), s 4^s/(2^s-1)]``.
    Every moment is enumerated exactly, so hard steps use tolerance ``tol``.
    """
    if mode != "hilbert":
        raise ValueError("the audit runs only in Hilbert mode, where every R-bound is exact")
    if not isinstance(f.space, SequenceSpace) or not f.space.is_hilbert:
        raise ValueError(f"the audit needs Hilbert-valued f, got {f.space}")
    if theta.space.dim != 1:
        raise ValueError("the audit needs a scalar family")
    if not p > 1.0 or not r >= 1.0:
        raise ValueError("need p > 1 and r >= 1")
    _check_pair(theta, f)
    E = f.space
    s = min(p, r)
    L, n = f.level, f.n_atoms
    dec = stopping_decompose(f, N, mode="hilbert")
    img = embed(theta, f).values  # (atoms, L+1, d)
    th = theta.values[:, :, 0].T  # (atoms, L+1)
    car = car_constant(theta, p)

    full = np.array([rad_moment(E, img[i, N:], p).value for i in range(n)])
    lhs = float(np.mean(full)) ** (1.0 / p)

    # a: block randomization per atom
    a_gap, a_ok = 0.0, True
    for i in range(n):
        blocks = [list(b) for b in dec.blocks(i).values()]
        used = {j for b in blocks for j in b}
        blocks += [[j] for j in range(N, L + 1) if j not in used]
        rel = [[j - N for j in b] for b in blocks]
        rep = block_randomization_check(E, img[i, N:], rel, p, tol=tol)
        a_gap = max(a_gap, abs(rep.lhs - rep.rhs))
        a_ok &= rep.holds

    # b, c: per-block moments
    b_hard = s == 2.0 or E.dim == 1
    b_lhs = b_rhs = 0.0
    b_ok = True
    block_s = np.zeros(n)  # sum_k E||sum_{J_k}||^s per atom
    per_k_s: dict[int, np.ndarray] = {}
    for i in range(n):
        for k, J in dec.blocks(i).items():
            js = list(J)
            lb = rad_moment(E, img[i, js], s).value
            rb = 2.0 ** ((k + 1) * s) * rad_moment(SCALARS, th[i, js][:, None], s).value
            b_ok &= _leq(lb, rb, tol)
            if lb - rb > b_lhs - b_rhs or (b_lhs == b_rhs == 0.0):
                b_lhs, b_rhs = lb, rb
            block_s[i] += lb
            per_k_s.setdefault(k, np.zeros(n))[i] = lb
    with np.errstate(divide="ignore", invalid="ignore"):
        type_c = np.where(block_s > 0, full ** (1.0 / p) / block_s ** (1.0 / s), 0.0)
    c_type = float(type_c.max()) if n else 0.0
    q = p / s
    mink_lhs = float(np.mean(block_s**q)) ** (1.0 / q)
    mink_rhs = math.fsum(float(np.mean(v**q)) ** (1.0 / q) for v in per_k_s.values())

    # d: Carleson step for every k on the grid
    d_ok, d_worst = True, (0.0, 0.0)
    tails = [tail_energy(theta, m, p).values for m in range(L + 1)]
    for k in range(dec.k_min, dec.k_max):
        tk = dec.tau_of(k)
        left = 0.0
        for i in range(n):
            J = list(dec.block(i, k))
            if J:
                left += rad_moment(SCALARS, th[i, J][:, None], p).value
        left /= n
        finite = np.isfinite(tk)
        mid = float(np.sum([tails[int(tk[i])][i] for i in np.flatnonzero(finite)])) / n
        right = car**p * float(finite.mean())
        ok = _leq(left, mid, tol) and _leq(mid, right, tol)
        d_ok &= ok
        if not ok or left - right > d_worst[0] - d_worst[1]:
            d_worst = (left, right)

    # e: level-set summation against the Lorentz norm of M_R f
    mrf = dec.maximal
    mu0 = float(np.mean(mrf > 0))
    S = 0.0
    if dec.k_max >= dec.k_min:
        S = mu0 ** (s / p) * 2.0 ** (dec.k_min * s) / (1.0 - 2.0 ** -s)
        for k in range(dec.k_min, dec.k_max + 1):
            S += 2.0 ** ((k + 1) * s) * float(np.mean(mrf > 2.0**k)) ** (s / p)
    mlor = lorentz_norm(ScalarDyadicFunction(L, mrf), p, s)
    lo, hi = s * 2**s / (2**s - 1), s * 4**s / (2**s - 1)
    e_ratio = S / mlor**s if mlor > 0 else 0.0
    e_ok = mlor == 0 or (lo * (1 - tol) <= e_ratio <= hi * (1 + tol))

    denom = car * mlor
    ratio = lhs / denom if denom > 0 else (0.0 if lhs == 0 else math.inf)
    steps = (
        AuditStep("a", a_gap, 0.0, a_ok, True, "max |moment - block-randomized moment|"),
        AuditStep("b", b_lhs, b_rhs, b_ok, b_hard, "worst block"),
        AuditStep("c", mink_lhs, mink_rhs, math.isfinite(c_type) and _leq(mink_lhs, mink_rhs, tol), False,
                  f"triangle inequality in L^(p/s); measured type constant {c_type!r}"),
        AuditStep("d", d_worst[0], d_worst[1], d_ok, True, "worst k"),
        AuditStep("e", e_ratio, hi, e_ok, False, f"level-set sum / Lorentz norm^s, allowed [{lo!r}, {hi!r}]"),
    )
    return AuditReport(p, r, s, N, lhs, car, mlor, ratio, steps)


# --- witness families ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WitnessResult:
    family: CarlesonFamily
    bound: float
    atom_values: np.ndarray
    p: float
    qs: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"bound": self.bound, "p": self.p, "qs": list(self.qs),
                "atom_values": self.atom_values.tolist(), "level": self.family.level}


def witness_family(f: DyadicFunction, p: float, N: int, params: SearchParams = SearchParams(),
                   qs: Sequence[float] = ()) -> WitnessResult:
    """Carleson family realizing a lower bound on ``int R_p(E_j f : j <= N)^p``.

    On each level-``N`` atom a sequence ``x = (x_0..x_N)`` is searched to make
    ``E||sum eps_j E_j f x_j||^p`` large, then scaled so that
    ``E||sum eps_j x_j||^e <= 1`` for ``e = p`` and every ``e`` in ``qs``;
    then every tail of ``theta`` has moment at most 1 and the family has
    Carleson constant at most 1 for those exponents.  The returned bound is
    ``int E||sum_j eps_j E_j f theta_j||^p`` for the assembled family.
    """
    if not 0 <= N <= f.level:
        raise ValueError(f"level {N} outside 0..{f.level}")
    if isinstance(f.space, SequenceSpace):
        Fsp, Esp = SCALARS, f.space
    else:
        Fsp, Esp = f.space.domain, f.space.codomain
    exps = tuple(sorted({float(p), *map(float, qs)}))
    L, n = f.level, f.n_atoms
    mats_all = f.martingale[: N + 1]
    if isinstance(f.space, SequenceSpace):
        mats_all = mats_all[..., None]
    xs_atoms = np.zeros((1 << N, N + 1, Fsp.dim))
    memo: dict[bytes, np.ndarray] = {}
    for a in range(1 << N):
        mats = mats_all[:, a << (L - N)]
        key = mats.tobytes()
        if key not in memo:
            memo[key] = _atom_witness(mats, p, Fsp, Esp, exps, params)
        xs_atoms[a] = memo[key]
    vals = np.zeros((L + 1, n, Fsp.dim))
    vals[: N + 1] = np.repeat(np.swapaxes(xs_atoms, 0, 1), 1 << (L - N), axis=1)
    fam = CarlesonFamily(L, Fsp, vals)
    ys = np.einsum("jaef,jaf->aje", mats_all[:, :: 1 << (L - N)], np.swapaxes(xs_atoms, 0, 1))
    atom_vals = np.array([rad_moment(Esp, y, p).value for y in ys])
    return WitnessResult(fam, float(np.mean(atom_vals)), atom_vals, p, exps)


def _normalize(x: np.ndarray, Fsp: SequenceSpace, exps: Sequence[float]) -> np.ndarray:
    m = [rad_moment(Fsp, x, e).value ** (1.0 / e) for e in exps]
    top = max(m)
    if top == 0.0:
        return np.zeros_like(x)
    x = x / top
    # guard the last ulp so that every normalized moment is at most 1
    for _ in range(4):
        if all(rad_moment(Fsp, x, e).value <= 1.0 for e in exps):
            break
        x = x * (1.0 - 1e-15)
    return x


def _atom_witness(mats: np.ndarray, p: float, Fsp: SequenceSpace, Esp: SequenceSpace,
                  exps: Sequence[float], params: SearchParams) -> np.ndarray:
    """Best normalized ``x`` for the fixed selection ``(E_0 f, ..., E_N f)`` at one atom."""
    J = len(mats)
    if not np.any(mats):
        return np.zeros((J, Fsp.dim))
    cands = []
    # one index at a time, with a norming vector of that operator
    for j in range(J):
        if not np.any(mats[j]):
            continue
        x = np.zeros((J, Fsp.dim))
        x[j] = np.linalg.svd(mats[j])[2][0] if Fsp.q == 2.0 else _best_unit(mats[j], Fsp, Esp)
        cands.append(x)
    scale = float(np.max(np.abs(mats)))
    prob = _Problem(mats / scale, p, Fsp.q, Esp.q)
    rng = stream(params.seed, "witness", p, mats / scale, tuple(exps), params.restarts, params.iters)
    starts = [np.tile(cands[0][np.any(cands[0], axis=1)][0], (J, 1))] if cands else []
    starts += [rng.standard_normal((J, Fsp.dim)) for _ in range(params.restarts)]
    for x0 in starts:
        x, _ = ascend(prob.values, x0, rng, grad=prob.grad, iters=params.iters)
        cands.append(x)
    best, best_val = None, -1.0
    for x in cands:
        xn = _normalize(x, Fsp, exps)
        ys = np.einsum("jef,jf->je", mats, xn)
        v = rad_moment(Esp, ys, p).value
        if v > best_val:
            best, best_val = xn, v
    return best


def _best_unit(m: np.ndarray, Fsp: SequenceSpace, Esp: SequenceSpace) -> np.ndarray:
    w = op_norm_estimate(Operator(m, Fsp, Esp)).witness
    nrm = float(seq_norms(w, Fsp.q))
    return w / nrm if nrm > 0 else w


__all__ = [
    "CarlesonFamily", "EmbeddingImage", "StoppingDecomposition", "AuditStep", "AuditReport",
    "NormSearchResult", "WitnessResult", "tail_energy", "atom_averages", "car_constant", "embed",
    "embed_norm", "operator_norm_search", "stopping_decompose", "lemma_audit", "witness_family",
]
