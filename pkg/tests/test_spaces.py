import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadic_rad_lab.spaces import (
    DimensionError, Operator, OperatorSpace, SequenceSpace, as_vectors, dual_exponent,
    elementary_tensor, norm, norms, op_norm, op_norm_estimate, operator, space_from_json,
    space_to_json, vector_as_operator,
)


def _grid_op_norm(m, q_in, q_out, n=20001):
    """Brute-force sup of ||Mx||_q_out over a dense grid of the 2-d l^q_in unit circle."""
    t = np.linspace(0, 2 * np.pi, n)
    x = np.stack([np.cos(t), np.sin(t)], axis=1)
    x = x / (np.sum(np.abs(x) ** q_in, axis=1) ** (1 / q_in))[:, None] if math.isfinite(q_in) else \
        x / np.abs(x).max(axis=1)[:, None]
    y = x @ np.asarray(m).T
    if math.isinf(q_out):
        return float(np.abs(y).max())
    return float((np.sum(np.abs(y) ** q_out, axis=1) ** (1 / q_out)).max())


def test_sequence_norms_match_definitions():
    x = np.array([3.0, -4.0, 1.0])
    assert norm(SequenceSpace(1, 3), x) == 8.0
    assert norm(SequenceSpace(2, 3), x) == pytest.approx(math.sqrt(26), rel=1e-15)
    assert norm(SequenceSpace(math.inf, 3), x) == 4.0
    assert norm(SequenceSpace(3, 3), x) == pytest.approx((27 + 64 + 1) ** (1 / 3), rel=1e-14)


def test_space_validation():
    with pytest.raises(ValueError):
        SequenceSpace(0.5, 2)
    with pytest.raises(ValueError):
        SequenceSpace(2, 0)
    with pytest.raises(DimensionError):
        as_vectors(SequenceSpace(2, 3), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        Operator(np.eye(2), SequenceSpace(2, 3), SequenceSpace(2, 2))


def test_hilbert_flags():
    assert SequenceSpace(2, 5).is_hilbert
    assert SequenceSpace(1, 1).is_hilbert
    assert not SequenceSpace(1, 2).is_hilbert
    assert OperatorSpace(SequenceSpace(2, 2), SequenceSpace(2, 3)).is_hilbert


def test_dual_exponent():
    assert dual_exponent(1) == math.inf
    assert dual_exponent(math.inf) == 1.0
    assert dual_exponent(3) == pytest.approx(1.5)


@pytest.mark.parametrize("q_in,q_out", [(2, 2), (1, 2), (2, math.inf), (math.inf, 1), (1, 3), (3, 1.5)])
def test_op_norm_against_grid(q_in, q_out):
    rng = np.random.default_rng(7)
    for _ in range(5):
        m = rng.standard_normal((2, 2))
        est = op_norm_estimate(operator(m, q_in, q_out))
        ref = _grid_op_norm(m, q_in, q_out)
        assert est.value >= ref * (1 - 1e-6)
        assert est.value <= ref * (1 + 1e-4)


def test_op_norm_exact_flags():
    assert not op_norm_estimate(operator(np.eye(2))).lower_bound
    assert not op_norm_estimate(operator(np.ones((2, 3)), 1, 3)).lower_bound
    assert op_norm_estimate(operator(np.ones((3, 20)) + np.eye(3, 20), 3, 1.5)).lower_bound


def test_witness_realizes_value():
    T = operator([[1.0, 2.0], [0.5, -1.0]], 3, 1.5)
    est = op_norm_estimate(T)
    w = est.witness
    got = norm(T.codomain, T(w)) / norm(T.domain, w)
    assert got == pytest.approx(est.value, rel=1e-12)


def test_vector_as_operator_norm():
    sp = SequenceSpace(1, 3)
    x = np.array([1.0, -2.0, 0.5])
    assert op_norm(vector_as_operator(sp, x)) == pytest.approx(3.5)


def test_elementary_tensor_norm_is_product():
    fstar = np.array([1.0, -1.0])
    e = np.array([2.0, 0.0, 1.0])
    T = elementary_tensor(fstar, e, SequenceSpace(2, 2), SequenceSpace(2, 3))
    assert op_norm(T) == pytest.approx(math.sqrt(2) * math.sqrt(5), rel=1e-12)


def test_operator_norms_batch():
    sp = OperatorSpace(SequenceSpace(2, 2), SequenceSpace(2, 2))
    mats = np.stack([np.eye(2), 3 * np.eye(2)])
    assert norms(sp, mats).tolist() == pytest.approx([1.0, 3.0])


@given(st.sampled_from([1.0, 1.5, 2.0, math.inf]), st.integers(1, 5),
       st.sampled_from([1.0, 2.0, 4.0]), st.integers(1, 3))
def test_space_json_round_trip(q, d, q2, d2):
    for sp in (SequenceSpace(q, d), OperatorSpace(SequenceSpace(q, d), SequenceSpace(q2, d2))):
        assert space_from_json(space_to_json(sp)) == sp


def test_space_json_errors():
    with pytest.raises(ValueError):
        space_from_json({"kind": "banach"})
    with pytest.raises(ValueError):
        space_from_json([1, 2])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(0.1, 5))
def test_norm_homogeneous_and_triangle(xs, c):
    x = np.array(xs)
    y = x[::-1].copy()
    for q in (1.0, 1.5, 2.0, math.inf):
        sp = SequenceSpace(q, 3)
        assert norm(sp, c * x) == pytest.approx(c * norm(sp, x), rel=1e-12, abs=1e-12)
        assert norm(sp, x + y) <= norm(sp, x) + norm(sp, y) + 1e-12
