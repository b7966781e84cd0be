"""End-to-end experiments: configuration in, CSV table and JSON summary out."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import io
from ._search import ascend, stream
from .carleson import (
    CarlesonFamily, car_constant, embed_norm, lemma_audit, operator_norm_search, witness_family,
)
from .dyadic import (
    DyadicFunction, cond_expect, lorentz_norm, lp_norm, maximal_rad, maximal_std,
)
from .rademacher import EXACT_THRESHOLD, rad_moment
from .rbound import SearchParams, rbound_search, type_constant_search
from .spaces import SCALARS, SequenceSpace, SpaceSpec, operator, seq_norms

log = logging.getLogger(__name__)

SCHEMA = 1
EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SWEEP_EXACT_MAX = 14


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class NumericalFailure(AssertionError):
    """A numerical check that must hold did not."""


# --- configuration --------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    p: float = 2.0
    space: Optional[dict] = None
    n_min: int = 4
    n_max: int = 14
    level: int = 3
    levels: Optional[tuple[int, ...]] = None
    start: int = 0
    r: float = 2.0
    s: float = 1.0
    j: int = 0
    kind: str = "std"
    mode: str = "auto"
    samples: int = 100_000
    seed: int = 0
    xs_rule: str = "ones"
    instances: int = 10
    qs: tuple[float, ...] = ()
    params: Optional[SearchParams] = None
    inputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "N_range" in d:
            lo, hi = d.pop("N_range")
            d["n_min"], d["n_max"] = lo, hi
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown configuration keys: {extra}")
        if "experiment" not in d:
            raise ConfigError("configuration needs an 'experiment' name")
        if d["experiment"] not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {d['experiment']!r}; choose from {sorted(EXPERIMENTS)}")
        try:
            if isinstance(d.get("params"), dict):
                d["params"] = SearchParams(**d["params"])
            for key in ("levels", "qs"):
                if d.get(key) is not None:
                    d[key] = tuple(d[key])
            cfg = cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.p >= 1.0:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(f"need 1 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        if self.level < 0 or self.start < 0 or self.instances < 0 or self.samples < 1:
            raise ConfigError("level, start, instances must be nonnegative and samples positive")
        if self.mode not in ("auto", "exact", "mc"):
            raise ConfigError(f"mode must be auto, exact or mc, got {self.mode!r}")
        if self.xs_rule not in ("ones", "random"):
            raise ConfigError(f"xs_rule must be 'ones' or 'random', got {self.xs_rule!r}")
        if self.kind not in ("std", "rad"):
            raise ConfigError(f"kind must be 'std' or 'rad', got {self.kind!r}")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, SearchParams):
                v = v.to_dict()
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def search(self, default: SearchParams = SearchParams()) -> SearchParams:
        return replace(default, seed=self.seed) if self.params is None else self.params

    def space_spec(self, default: Optional[SpaceSpec] = None) -> SpaceSpec:
        if self.space is None:
            if default is None:
                raise ConfigError(f"experiment {self.experiment!r} needs a 'space'")
            return default
        try:
            return io.load_space(self.space)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad space description: {exc}") from exc


# --- counterexample ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    N: int
    mode: str
    embed_norm: float
    lp_norm: float
    ratio: float
    car_constant: float
    khintchine_ratio: float
    fitted_exponent: float = math.nan

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


SWEEP_COLUMNS = [f.name for f in fields(SweepRow)]


def counterexample_build(p: float, N: int, xs: Any,
                         space: SequenceSpace = SCALARS) -> tuple[DyadicFunction, CarlesonFamily]:
    """Pair ``(f, theta)`` at level ``N`` whose embedding realizes ``E||sum eps_j x_j||^p``.

    With ``y_j = 2^(j/p) x_j`` (``j = 1..N``) and ``y_{N+1} = 0``, ``f`` equals
    ``2 y_j - y_{j+1}`` on ``[2^-j, 2^-j+1)`` and vanishes on ``[0, 2^-N)``;
    ``theta_j = 2^((N-j-1)/p)`` on ``[0, 2^-N)`` for ``j < N``.  Then
    ``E_{j-1} f = y_j`` on ``[0, 2^-j+1)``, which is checked here.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"need 1 < p < inf, got {p}")
    if N < 1:
        raise ValueError("N must be positive")
    xs = np.asarray(xs, dtype=float).reshape((-1,) + space.shape)
    if len(xs) != N:
        raise ValueError(f"need {N} vectors, got {len(xs)}")
    y = np.zeros((N + 2,) + space.shape)
    y[1 : N + 1] = np.exp2(np.arange(1, N + 1) / p)[:, None] * xs
    vals = np.zeros((1 << N,) + space.shape)
    for j in range(1, N + 1):
        vals[1 << (N - j) : 1 << (N - j + 1)] = 2.0 * y[j] - y[j + 1]
    f = DyadicFunction(N, space, vals)
    th = np.zeros((N + 1, 1 << N, 1))
    th[:N, 0, 0] = np.exp2((N - np.arange(N) - 1) / p)
    theta = CarlesonFamily(N, SCALARS, th)
    for j in range(1, N + 1):
        got = cond_expect(f, j - 1).values[: 1 << (N - j + 1)]
        scale = max(1.0, float(np.max(np.abs(y[j]))))
        if np.max(np.abs(got - y[j])) > 1e-12 * scale:
            raise NumericalFailure(f"conditional expectation at level {j - 1} does not reproduce y_{j}")
    return f, theta


def sweep_vectors(rule: str, N: int, space: SequenceSpace, seed: int) -> np.ndarray:
    if rule == "ones":
        return np.ones((N,) + space.shape)
    rng = stream(seed, "sweep-vectors", N, str(space))
    xs = rng.standard_normal((N,) + space.shape)
    return xs / seq_norms(xs, space.q)[:, None]


def fit_exponent(Ns: Sequence[int], ratios: Sequence[float], n_from: int = 4) -> float:
    """Least-squares slope of ``log ratio`` against ``log N`` over ``N >= n_from``."""
    pts = [(math.log(n), math.log(r)) for n, r in zip(Ns, ratios) if n >= n_from and r > 0]
    if len(pts) < 2:
        return math.nan
    a = np.array(pts)
    return float(np.polyfit(a[:, 0], a[:, 1], 1)[0])


def counterexample_sweep(p: float, Ns: Sequence[int], xs_rule: str = "ones", mode: str = "auto",
                         space: SequenceSpace = SCALARS, seed: int = 0,
                         samples: int = 100_000) -> tuple[list[SweepRow], float]:
    rows = []
    for N in Ns:
        m = ("exact" if N <= SWEEP_EXACT_MAX else "mc") if mode == "auto" else mode
        xs = sweep_vectors(xs_rule, N, space, seed)
        f, theta = counterexample_build(p, N, xs, space)
        kw = dict(samples=samples, seed=seed, threshold=max(EXACT_THRESHOLD, N))
        en = embed_norm(theta, f, p, m, **kw)
        ln = lp_norm(f, p)
        car = car_constant(theta, p, m, **kw)
        kh = rad_moment(space, xs, p, m, **kw).value ** (1.0 / p) / float(
            np.sum(seq_norms(xs, space.q) ** p)) ** (1.0 / p)
        row = SweepRow(N, "exact" if m == "exact" else "montecarlo", en, ln, en / ln, car, kh)
        if abs(row.ratio - row.embed_norm / row.lp_norm) > 1e-12 * row.ratio:
            raise NumericalFailure("ratio column disagrees with its recomputation")
        rows.append(row)
        log.info("N=%d ratio=%.6g car=%.6g", N, row.ratio, car)
    expo = fit_exponent([r.N for r in rows], [r.ratio for r in rows])
    rows = [SweepRow(**{**r.to_dict(), "fitted_exponent": expo}) for r in rows]
    return rows, expo


# --- RMF probe -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProbeResult:
    level: int
    space: SequenceSpace
    p: float
    ratio: float
    std_ratio: float
    witness: str
    function: DyadicFunction


def haar_witness(level: int, space: SequenceSpace) -> DyadicFunction:
    """``f(xi) = e_i`` on the ``i``-th atom (needs ``dim = 2^level``)."""
    if space.dim != 1 << level:
        raise ValueError("the basis-vector witness needs dim = 2^level")
    return DyadicFunction(level, space, np.eye(space.dim))


def _ratio(f: DyadicFunction, p: float, kind: str, params: SearchParams) -> float:
    den = lp_norm(f, p)
    if den == 0.0:
        return 0.0
    g = maximal_std(f) if kind == "std" else maximal_rad(f, params, p)
    return lp_norm(g, p) / den


PROBE_PARAMS = SearchParams(group_cap=1, restarts=2, iters=15)


def rmf_probe(space: SequenceSpace, p: float, level: int, params: SearchParams = PROBE_PARAMS) -> ProbeResult:
    """Lower bound on ``||M_R f||_p / ||f||_p`` over a few searched ``f``.

    Candidates: the constant function, the basis-vector witness when
    ``dim = 2^level``, and random functions (polished by ascent on the
    standard maximal ratio when the space is Hilbert, where ``M_R = M``).
    """
    if level > 8:
        raise ValueError("rmf_probe is limited to level <= 8")
    n = 1 << level
    rng = stream(params.seed, "rmf", str(space), p, level)
    cands: list[tuple[str, DyadicFunction]] = [("constant", DyadicFunction.constant(space, level, np.ones(space.dim)))]
    if space.dim == n:
        cands.append(("basis", haar_witness(level, space)))
    for k in range(params.restarts):
        x0 = rng.standard_normal((n, space.dim))
        if space.is_hilbert:
            def obj(batch):
                return np.array([_ratio(DyadicFunction(level, space, b), p, "std", params) for b in batch])
            x0, _ = ascend(obj, x0, rng, iters=params.iters)
        cands.append((f"random-{k}", DyadicFunction(level, space, x0)))
    best = None
    for name, f in cands:
        r = _ratio(f, p, "rad", params)
        if best is None or r > best[0]:
            best = (r, name, f)
    r, name, f = best
    return ProbeResult(level, space, p, r, _ratio(f, p, "std", params), name, f)


# --- experiment drivers ----------------------------------------------------------
# Each driver returns (columns, rows, summary).

Table = tuple[list[str], list[dict], dict]


def _sweep_space(cfg: ExperimentConfig) -> SequenceSpace:
    sp = cfg.space_spec(SCALARS)
    if not isinstance(sp, SequenceSpace):
        raise ConfigError("the sweep needs a sequence space")
    return sp


def _run_counterexample(cfg: ExperimentConfig) -> Table:
    if not cfg.p > 1.0:
        raise ConfigError("the counterexample needs p > 1")
    if cfg.mode == "exact" and cfg.n_max > SWEEP_EXACT_MAX:
        raise ConfigError(f"exact mode is limited to N <= {SWEEP_EXACT_MAX}")
    rows, expo = counterexample_sweep(cfg.p, range(cfg.n_min, cfg.n_max + 1), cfg.xs_rule, cfg.mode,
                                      _sweep_space(cfg), cfg.seed, cfg.samples)
    cars = [r.car_constant for r in rows]
    summary = {"fitted_exponent": expo, "theory_exponent": 0.5 - 1.0 / cfg.p,
               "car_min": min(cars), "car_max": max(cars),
               "khintchine_exponent": fit_exponent([r.N for r in rows], [r.khintchine_ratio for r in rows])}
    return SWEEP_COLUMNS, [r.to_dict() for r in rows], summary


def _probe_space(cfg: ExperimentConfig, level: int) -> SequenceSpace:
    obj = dict(cfg.space or {"kind": "seq", "q": 1})
    obj.setdefault("kind", "seq")
    obj.setdefault("dim", 1 << level)
    sp = io.load_space(obj)
    if not isinstance(sp, SequenceSpace):
        raise ConfigError("the RMF probe needs a sequence space")
    return sp


def _run_rmf_probe(cfg: ExperimentConfig) -> Table:
    levels = cfg.levels or (cfg.level,)
    rows = []
    for L in levels:
        res = rmf_probe(_probe_space(cfg, L), cfg.p, L, cfg.search(PROBE_PARAMS))
        rows.append({"level": L, "space": str(res.space), "ratio": res.ratio,
                     "std_ratio": res.std_ratio, "witness": res.witness})
    ratios = [r["ratio"] for r in rows]
    summary = {"monotone": all(b >= a for a, b in zip(ratios, ratios[1:])), "max_ratio": max(ratios)}
    return ["level", "space", "ratio", "std_ratio", "witness"], rows, summary


def _random_instance(cfg: ExperimentConfig, i: int) -> tuple[DyadicFunction, CarlesonFamily]:
    rng = stream(cfg.seed, "instance", cfg.experiment, i)
    L = int(rng.integers(1, cfg.level + 1)) if cfg.level >= 1 else 0
    dim = int(rng.integers(1, 5))
    f = DyadicFunction(L, SequenceSpace(2.0, dim), rng.standard_normal((1 << L, dim)))
    mask = rng.random((L + 1, 1 << L)) < 0.7
    theta = CarlesonFamily.scalar(rng.standard_normal((L + 1, 1 << L)) * mask)
    return f, theta


def _inputs(cfg: ExperimentConfig) -> tuple[Optional[DyadicFunction], Optional[CarlesonFamily]]:
    f = theta = None
    if "family" in cfg.inputs:
        theta = io.read_family(cfg.inputs["family"])
    if "function" in cfg.inputs:
        f = io.read_dyadic(cfg.inputs["function"], cfg.space_spec())
    return f, theta


AUDIT_COLUMNS = ["instance", "level", "dim", "p", "r", "s", "lhs", "car", "maximal_lorentz", "ratio",
                 "a", "b", "c", "d", "e", "e_ratio"]


def _audit_row(i: int, f: DyadicFunction, theta: CarlesonFamily, cfg: ExperimentConfig) -> dict:
    rep = lemma_audit(theta, f, cfg.p, cfg.r, min(cfg.start, f.level))
    row = {"instance": i, "level": f.level, "dim": f.space.dim, "p": cfg.p, "r": cfg.r, "s": rep.s,
           "lhs": rep.lhs, "car": rep.car, "maximal_lorentz": rep.maximal_lorentz, "ratio": rep.ratio,
           "e_ratio": rep.step("e").lhs}
    for st in rep.steps:
        row[st.name] = st.holds
    row["_hard_ok"] = rep.hard_ok
    return row


def _run_lemma_audit(cfg: ExperimentConfig) -> Table:
    f, theta = _inputs(cfg)
    if f is not None and theta is not None:
        rows = [_audit_row(0, f, theta, cfg)]
    else:
        rows = [_audit_row(i, *_random_instance(cfg, i), cfg) for i in range(cfg.instances)]
    failed = [r["instance"] for r in rows if not r.pop("_hard_ok")]
    summary = {"instances": len(rows), "hard_failures": failed,
               "max_ratio": max((r["ratio"] for r in rows), default=0.0)}
    if failed:
        raise NumericalFailure(f"hard audit steps failed on instances {failed}", (AUDIT_COLUMNS, rows, summary))
    return AUDIT_COLUMNS, rows, summary


def _run_witness(cfg: ExperimentConfig) -> Table:
    f, _ = _inputs(cfg)
    if f is None:
        rng = stream(cfg.seed, "witness-function", cfg.level)
        space = cfg.space_spec(SequenceSpace(2.0, 2))
        f = DyadicFunction(cfg.level, space, rng.standard_normal((1 << cfg.level,) + space.shape))
    N = min(cfg.level, f.level)
    qs = cfg.qs or (cfg.p,)
    res = witness_family(f, cfg.p, N, cfg.search(), qs)
    cars = {repr(float(q)): car_constant(res.family, q) for q in res.qs}
    rows = [{"atom": a, "value": float(v)} for a, v in enumerate(res.atom_values)]
    summary = {"bound": res.bound, "level": N, "car_constants": cars}
    if f.space.is_hilbert and isinstance(f.space, SequenceSpace):
        trunc = DyadicFunction(N, f.space, f.averages(N))
        summary["maximal_integral"] = float(np.mean(maximal_std(trunc).values ** cfg.p))
    if max(cars.values()) > 1.0 + 1e-6:
        raise NumericalFailure("witness family exceeds Carleson constant 1", (["atom", "value"], rows, summary))
    return ["atom", "value"], rows, summary


def _vectors(cfg: ExperimentConfig, space: SpaceSpec) -> np.ndarray:
    if "vectors" not in cfg.inputs:
        raise ConfigError("inputs.vectors is required")
    v = cfg.inputs["vectors"]
    if isinstance(v, str):
        return io.read_vectors(v, space)
    return np.asarray(v, dtype=float).reshape((-1,) + space.shape)


def _run_radnorm(cfg: ExperimentConfig) -> Table:
    space = cfg.space_spec()
    xs = _vectors(cfg, space)
    mode = "exact" if cfg.mode == "auto" else cfg.mode
    m = rad_moment(space, xs, cfg.p, mode, samples=cfg.samples, seed=cfg.seed)
    row = {"n": len(xs), "p": cfg.p, "mode": m.mode, "moment": m.value, "norm": m.value ** (1.0 / cfg.p)}
    return list(row), [row], m.to_dict()


def _run_rbound(cfg: ExperimentConfig) -> Table:
    ops = cfg.inputs.get("operators")
    if not ops:
        raise ConfigError("inputs.operators (list of matrices) is required")
    q_in = float(cfg.inputs.get("q_in", 2.0))
    q_out = float(cfg.inputs.get("q_out", 2.0))
    fam = [operator(m, q_in, q_out) for m in ops]
    est = rbound_search(fam, cfg.p, cfg.search())
    row = {"operators": len(fam), "p": cfg.p, "value": est.value, "certified": est.certified}
    return list(row), [row], est.to_dict()


def _run_typeconst(cfg: ExperimentConfig) -> Table:
    space = cfg.space_spec()
    if not isinstance(space, SequenceSpace):
        raise ConfigError("type constants need a sequence space")
    if not 1.0 <= cfg.p <= 2.0:
        raise ConfigError("type exponent must lie in [1, 2]")
    est = type_constant_search(space, cfg.p, cfg.search())
    row = {"space": str(space), "p": cfg.p, "value": est.value, "certified": est.certified}
    return list(row), [row], est.to_dict()


def _family(cfg: ExperimentConfig) -> CarlesonFamily:
    _, theta = _inputs(cfg)
    if theta is None:
        if "theta" not in cfg.inputs:
            raise ConfigError("inputs.family (manifest path) or inputs.theta (array) is required")
        theta = CarlesonFamily.scalar(cfg.inputs["theta"])
    return theta


def _run_car_constant(cfg: ExperimentConfig) -> Table:
    theta = _family(cfg)
    mode = "exact" if cfg.mode == "auto" else cfg.mode
    rows = [{"p": float(q), "car_constant": car_constant(theta, q, mode, samples=cfg.samples, seed=cfg.seed)}
            for q in (cfg.qs or (cfg.p,))]
    return ["p", "car_constant"], rows, {"level": theta.level, "indices": list(theta.indices)}


def _function(cfg: ExperimentConfig) -> DyadicFunction:
    f, _ = _inputs(cfg)
    if f is None:
        raise ConfigError("inputs.function (CSV path) and a space are required")
    return f


def _run_embed_norm(cfg: ExperimentConfig) -> Table:
    theta, f = _family(cfg), _function(cfg)
    mode = "exact" if cfg.mode == "auto" else cfg.mode
    en = embed_norm(theta, f, cfg.p, mode, samples=cfg.samples, seed=cfg.seed, start=cfg.start)
    row = {"p": cfg.p, "embed_norm": en, "lp_norm": lp_norm(f, cfg.p)}
    return list(row), [row], {}


def _run_op_norm_search(cfg: ExperimentConfig) -> Table:
    theta = _family(cfg)
    space = cfg.space_spec(SCALARS)
    res = operator_norm_search(theta, cfg.p, space, cfg.search())
    row = {"p": cfg.p, "value": res.value, "certified": res.certified}
    return list(row), [row], res.to_dict()


def _run_condexp(cfg: ExperimentConfig) -> Table:
    f = _function(cfg)
    g = cond_expect(f, cfg.j)
    flat = g.values.reshape(g.n_atoms, -1)
    cols = ["atom"] + [f"x{k}" for k in range(flat.shape[1])]
    rows = [{"atom": i, **{f"x{k}": float(v) for k, v in enumerate(r)}} for i, r in enumerate(flat)]
    return cols, rows, {"level": g.level, "j": cfg.j}


def _run_maximal(cfg: ExperimentConfig) -> Table:
    f = _function(cfg)
    g = maximal_std(f) if cfg.kind == "std" else maximal_rad(f, cfg.search(), cfg.p)
    rows = [{"atom": i, "value": float(v)} for i, v in enumerate(g.values)]
    return ["atom", "value"], rows, {"kind": cfg.kind, "lp_norm": lp_norm(g, cfg.p)}


def _run_lorentz(cfg: ExperimentConfig) -> Table:
    f = _function(cfg)
    if not (1.0 < cfg.p and cfg.s >= 1.0):
        raise ConfigError("need p > 1 and s >= 1")
    row = {"p": cfg.p, "s": cfg.s, "lorentz_norm": lorentz_norm(f, cfg.p, cfg.s)}
    return list(row), [row], {}


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], Table]] = {
    "counterexample": _run_counterexample,
    "rmf-probe": _run_rmf_probe,
    "lemma-audit": _run_lemma_audit,
    "witness": _run_witness,
    "radnorm": _run_radnorm,
    "rbound": _run_rbound,
    "typeconst": _run_typeconst,
    "car-constant": _run_car_constant,
    "embed-norm": _run_embed_norm,
    "op-norm-search": _run_op_norm_search,
    "condexp": _run_condexp,
    "maximal": _run_maximal,
    "lorentz": _run_lorentz,
}


def _write(cfg: ExperimentConfig, out: Path, table: Table, status: str) -> None:
    cols, rows, summary = table
    stem = cfg.experiment.replace("-", "_")
    out.mkdir(parents=True, exist_ok=True)
    io.write_table(out / f"{stem}.csv", cols, rows)
    io.write_json(out / f"{stem}.json", {"schema": SCHEMA, "experiment": cfg.experiment, "status": status,
                                         "config": cfg.to_dict(), "summary": summary})


def run(config: Any, out: Any = ".") -> int:
    """Run one experiment; returns the process exit status.

    0 success, 1 output could not be written, 2 invalid configuration or
    unreadable input, 3 a numerical check failed (outputs are still written).
    """
    try:
        cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
        table = EXPERIMENTS[cfg.experiment](cfg)
        status, code = "ok", EXIT_OK
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        log.error("numerical check failed: %s", exc.args[0])
        if len(exc.args) < 2:
            return EXIT_NUMERIC
        table, status, code = exc.args[1], "numerical_failure", EXIT_NUMERIC
    except (OSError, ValueError, KeyError, TypeError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_CONFIG
    try:
        _write(cfg, Path(out), table, status)
    except OSError as exc:
        log.error("could not write outputs: %s", exc)
        return EXIT_IO
    return code


__all__ = [
    "ExperimentConfig", "SweepRow", "ProbeResult", "ConfigError", "NumericalFailure", "EXPERIMENTS",
    "counterexample_build", "counterexample_sweep", "fit_exponent", "rmf_probe", "haar_witness", "run",
]
