import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadic_rad_lab import cli, io
from dyadic_rad_lab.carleson import CarlesonFamily, embed_norm
from dyadic_rad_lab.dyadic import DyadicFunction, cond_expect, lp_norm
from dyadic_rad_lab.experiments import (
    EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, ConfigError, ExperimentConfig, NumericalFailure,
    counterexample_build, counterexample_sweep, fit_exponent, haar_witness, rmf_probe, run,
)
from dyadic_rad_lab.rademacher import rad_moment
from dyadic_rad_lab.spaces import SCALARS, SequenceSpace


def test_build_two_atom_case():
    f, theta = counterexample_build(2.0, 1, [1.0])
    # y_1 = sqrt 2, f = 2 y_1 on [1/2, 1) and 0 on [0, 1/2)
    assert f.values[:, 0].tolist() == pytest.approx([0.0, 2 * math.sqrt(2)], rel=1e-15)
    assert cond_expect(f, 0).values[0, 0] == pytest.approx(math.sqrt(2), rel=1e-15)
    assert theta.values[:, :, 0].tolist() == [[1.0, 0.0], [0.0, 0.0]]


@given(st.integers(1, 8), st.sampled_from([1.5, 2.0, 3.0, 4.0]), st.integers(0, 2**32 - 1))
def test_build_round_trip(N, p, seed):
    sp = SequenceSpace(2.0, 2)
    xs = np.random.default_rng(seed).standard_normal((N, 2))
    f, _ = counterexample_build(p, N, xs, sp)
    for j in range(1, N + 1):
        y = cond_expect(f, j - 1).values[0]
        assert np.allclose(y / 2.0 ** (j / p), xs[j - 1], rtol=0, atol=1e-12 * max(1, np.abs(xs).max()))
    # averages vanish on [0, 2^-j) once j >= N
    assert np.all(cond_expect(f, N).values[0] == 0.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_build_lp_norm_closed_form(p):
    for N in (1, 3, 7):
        f, _ = counterexample_build(p, N, np.ones(N))
        # |2 y_j - y_{j+1}|^p 2^-j = |2 - 2^(1/p)|^p for j < N, and 2^p at j = N
        ref = (N - 1) * abs(2 - 2 ** (1 / p)) ** p + 2**p
        assert lp_norm(f, p) ** p == pytest.approx(ref, rel=1e-12)


@given(st.integers(1, 8), st.sampled_from([1.5, 2.0, 4.0]), st.integers(0, 2**32 - 1))
def test_build_triangle_bound(N, p, seed):
    # ||2 y_j - y_{j+1}|| 2^(-j/p) <= 2||x_j|| + 2^(1/p)||x_{j+1}||, then convexity
    xs = np.random.default_rng(seed).standard_normal(N)
    f, _ = counterexample_build(p, N, xs)
    c = (2 + 2 ** (1 / p)) ** p
    assert lp_norm(f, p) ** p <= c * float(np.sum(np.abs(xs) ** p)) * (1 + 1e-12)


def test_build_triangle_constant_three_is_too_small():
    p = 1.5
    xs = np.array([0.18905338, -0.52274844])
    f, _ = counterexample_build(p, 2, xs)
    assert lp_norm(f, p) ** p > 3**p * float(np.sum(np.abs(xs) ** p))


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_embedding_identity(p):
    rng = np.random.default_rng(int(p))
    for N in (1, 4, 9):
        xs = rng.standard_normal((N, 3))
        f, theta = counterexample_build(p, N, xs, SequenceSpace(2.0, 3))
        ref = rad_moment(SequenceSpace(2.0, 3), xs, p).value ** (1 / p)
        assert embed_norm(theta, f, p) == pytest.approx(ref, rel=1e-12)


def test_build_errors():
    with pytest.raises(ValueError):
        counterexample_build(1.0, 2, [1.0, 1.0])
    with pytest.raises(ValueError):
        counterexample_build(2.0, 2, [1.0])
    with pytest.raises(ValueError):
        counterexample_build(2.0, 0, [])


def test_sweep_rows_consistent():
    rows, expo = counterexample_sweep(4.0, range(2, 7))
    for r in rows:
        assert r.ratio == pytest.approx(r.embed_norm / r.lp_norm, rel=1e-12)
        assert r.embed_norm ** 4 == pytest.approx(3 * r.N**2 - 2 * r.N, rel=1e-12)
        assert r.fitted_exponent == expo
        assert r.mode == "exact"


def test_fit_exponent_on_power_law():
    Ns = list(range(1, 20))
    assert fit_exponent(Ns, [3.0 * n**0.25 for n in Ns]) == pytest.approx(0.25, rel=1e-12)
    assert math.isnan(fit_exponent([1, 2, 3], [1.0, 1.0, 1.0]))


def test_rmf_probe_hilbert_and_l1():
    res = rmf_probe(SequenceSpace(2.0, 2), 2.0, 2)
    assert res.ratio <= res.std_ratio * (1 + 1e-9)
    r = [rmf_probe(SequenceSpace(1.0, 1 << L), 2.0, L).ratio for L in (2, 3)]
    assert 1.0 <= r[0] <= r[1]


def test_haar_witness_requires_matching_dim():
    assert haar_witness(2, SequenceSpace(1.0, 4)).values.tolist() == np.eye(4).tolist()
    with pytest.raises(ValueError):
        haar_witness(2, SequenceSpace(1.0, 3))


def test_config_parsing():
    cfg = ExperimentConfig.from_dict({"experiment": "counterexample", "p": 4, "N_range": [4, 6]})
    assert (cfg.n_min, cfg.n_max, cfg.p) == (4, 6, 4)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    for bad in ({"experiment": "nope"}, {"p": 2}, {"experiment": "counterexample", "frobnicate": 1},
                {"experiment": "counterexample", "mode": "fast"}, {"experiment": "counterexample", "p": 0.5}):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_counterexample_outputs(tmp_path):
    code = run({"experiment": "counterexample", "p": 4, "n_min": 2, "n_max": 5}, tmp_path)
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "counterexample.csv")
    assert [int(r["N"]) for r in rows] == [2, 3, 4, 5]
    assert {"N", "ratio", "car_constant"} <= set(rows[0])
    meta = json.loads((tmp_path / "counterexample.json").read_text())
    assert meta["schema"] == 1 and meta["status"] == "ok"


def test_run_deterministic(tmp_path):
    cfg = {"experiment": "lemma-audit", "p": 3, "level": 3, "instances": 3, "seed": 5}
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert run(cfg, d) == EXIT_OK
        outs.append(((d / "lemma_audit.csv").read_bytes(), (d / "lemma_audit.json").read_bytes()))
    assert outs[0] == outs[1]


def test_run_exit_codes(tmp_path, monkeypatch):
    assert run({"experiment": "nope"}, tmp_path) == EXIT_CONFIG
    assert run({"experiment": "radnorm"}, tmp_path) == EXIT_CONFIG  # no space
    assert run({"experiment": "embed-norm", "inputs": {"family": str(tmp_path / "missing.json")}},
               tmp_path) == EXIT_CONFIG

    def boom(cfg):
        raise NumericalFailure("forced", (["a"], [{"a": 1}], {}))

    monkeypatch.setitem(run.__globals__["EXPERIMENTS"], "maximal", boom)
    assert run({"experiment": "maximal"}, tmp_path) == EXIT_NUMERIC
    meta = json.loads((tmp_path / "maximal.json").read_text())
    assert meta["status"] == "numerical_failure"


def test_run_small_drivers(tmp_path):
    sp = {"kind": "seq", "q": 2, "dim": 2}
    f = DyadicFunction(2, SequenceSpace(2.0, 2), np.arange(8.0).reshape(4, 2))
    io.write_dyadic(tmp_path / "f.csv", f)
    theta = CarlesonFamily.scalar(np.ones((3, 4)))
    io.write_family(tmp_path / "theta.json", theta)
    inputs = {"function": str(tmp_path / "f.csv"), "family": str(tmp_path / "theta.json")}
    cases = {
        "radnorm": {"space": sp, "inputs": {"vectors": [[1, 0], [0, 1]]}},
        "rbound": {"inputs": {"operators": [[[1, 0], [0, 2]]]}},
        "typeconst": {"space": sp},
        "car-constant": {"inputs": {"theta": [[1, 1], [0, 1]]}, "qs": [2, 4]},
        "embed-norm": {"space": sp, "inputs": inputs},
        "op-norm-search": {"inputs": {"theta": [[1, 1], [0, 1]]}},
        "condexp": {"space": sp, "j": 1, "inputs": inputs},
        "maximal": {"space": sp, "inputs": inputs},
        "lorentz": {"space": sp, "p": 2, "s": 1, "inputs": inputs},
        "witness": {"level": 2, "p": 2},
        "rmf-probe": {"levels": [2], "p": 2},
    }
    for name, extra in cases.items():
        out = tmp_path / name
        assert run({"experiment": name, **extra}, out) == EXIT_OK, name
        stem = name.replace("-", "_")
        assert (out / f"{stem}.csv").exists() and (out / f"{stem}.json").exists()
    radnorm = _read_csv(tmp_path / "radnorm" / "radnorm.csv")[0]
    assert float(radnorm["norm"]) == pytest.approx(math.sqrt(2), rel=1e-15)
    cond = _read_csv(tmp_path / "condexp" / "condexp.csv")
    assert [float(r["x0"]) for r in cond] == [1.0, 1.0, 5.0, 5.0]


def test_io_round_trips(tmp_path):
    rng = np.random.default_rng(0)
    sp = SequenceSpace(3.0, 3)
    f = DyadicFunction(3, sp, rng.standard_normal((8, 3)))
    io.write_dyadic(tmp_path / "f.csv", f)
    assert np.array_equal(io.read_dyadic(tmp_path / "f.csv", sp).values, f.values)
    xs = rng.standard_normal((5, 3))
    io.write_vectors(tmp_path / "x.csv", xs)
    assert np.array_equal(io.read_vectors(tmp_path / "x.csv", sp), xs)
    theta = CarlesonFamily(2, SequenceSpace(2.0, 2), rng.standard_normal((3, 4, 2)) * [[[1]], [[0]], [[1]]])
    io.write_family(tmp_path / "fam.json", theta)
    back = io.read_family(tmp_path / "fam.json")
    assert back.indices == (0, 2)
    assert np.array_equal(back.values, theta.values)


def test_io_headerless_and_errors(tmp_path):
    (tmp_path / "g.csv").write_text("1,1\n2.0\n3.0\n")
    assert io.read_dyadic(tmp_path / "g.csv", SCALARS).values[:, 0].tolist() == [2.0, 3.0]
    (tmp_path / "bad.csv").write_text("level,dim\n1,2\n1,2\n")
    with pytest.raises(ValueError):
        io.read_dyadic(tmp_path / "bad.csv", SequenceSpace(2.0, 2))
    (tmp_path / "v.csv").write_text("a,b\n1,2\n")
    assert io.read_vectors(tmp_path / "v.csv", SequenceSpace(2.0, 2)).tolist() == [[1.0, 2.0]]


def test_cli_main(tmp_path, capsys):
    assert cli.main(["radnorm", "--space", '{"kind": "seq", "q": 2, "dim": 1}', "--p", "4",
                     "--out", str(tmp_path)]) == EXIT_CONFIG  # no vectors
    io.write_vectors(tmp_path / "x.csv", np.ones((3, 1)))
    assert cli.main(["radnorm", "--space", '{"kind": "seq", "q": 2, "dim": 1}', "--p", "4",
                     "--vectors", str(tmp_path / "x.csv"), "--out", str(tmp_path)]) == EXIT_OK
    row = _read_csv(tmp_path / "radnorm.csv")[0]
    assert float(row["moment"]) == pytest.approx(3 * 9 - 2 * 3, rel=1e-15)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "counterexample"}))
    assert cli.main(["radnorm", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    cfg.write_text("not json")
    assert cli.main(["counterexample", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
    with pytest.raises(SystemExit):
        cli.main(["counterexample", "--help"])
    assert "car_constant" in capsys.readouterr().out
