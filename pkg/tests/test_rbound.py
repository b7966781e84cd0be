import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadic_rad_lab.rbound import (
    SearchParams, rbound_hilbert, rbound_search, type_constant_search, type_ratio, witness_ratio,
)
from dyadic_rad_lab.spaces import SequenceSpace, op_norm, operator, vector_as_operator


def nested_uniform_family(L):
    """E_j f(xi) at atom 0 for f(xi) = e_xi in l^1_{2^L}: uniform vectors on nested blocks."""
    n = 1 << L
    sp = SequenceSpace(1.0, n)
    fam = []
    for j in range(L + 1):
        v = np.zeros(n)
        v[: n >> j] = 1.0 / (n >> j)
        fam.append(vector_as_operator(sp, v))
    return fam


def test_identity_family():
    assert rbound_search([operator(np.eye(3))]).value == pytest.approx(1.0, abs=1e-12)


def test_scalar_multiples_of_identity():
    est = rbound_search([operator(2 * np.eye(2)), operator(-3 * np.eye(2))])
    assert est.value >= 3.0 - 1e-12


def test_hilbert_oracle_examples():
    assert rbound_hilbert([operator(np.diag([1.0, 3.0])), operator(np.diag([2.0, 2.0]))]) == 3.0
    assert rbound_hilbert([operator(np.zeros((2, 2)))]) == 0.0
    assert rbound_search([operator(np.zeros((2, 2)))]).value == 0.0


def test_hilbert_oracle_rejects_banach():
    with pytest.raises(ValueError):
        rbound_hilbert([operator(np.eye(2), 1.0, 2.0)])


def test_family_errors():
    with pytest.raises(ValueError):
        rbound_search([])
    with pytest.raises(ValueError):
        rbound_search([operator(np.eye(2)), operator(np.eye(3))])
    with pytest.raises(ValueError):
        SearchParams(nmax=0)


@pytest.mark.parametrize("seed", range(6))
def test_random_hilbert_family_two_sided(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    fam = [operator(rng.standard_normal((d, d))) for _ in range(3)]
    est = rbound_search(fam)
    h = rbound_hilbert(fam)
    assert 0.95 * h <= est.value <= h * (1 + 1e-6)


def test_value_is_realized_by_witness():
    rng = np.random.default_rng(3)
    fam = [operator(rng.standard_normal((3, 2)), 1.0, 3.0) for _ in range(3)]
    est = rbound_search(fam, 2.0)
    assert witness_ratio(fam, est.selection, est.vectors, 2.0) == est.value
    assert est.certified == "lower_bound"


def test_singleton_dominates_op_norm():
    rng = np.random.default_rng(4)
    for q_in, q_out in ((1.0, 2.0), (2.0, 1.0), (3.0, 1.5)):
        T = operator(rng.standard_normal((3, 3)), q_in, q_out)
        assert rbound_search([T]).value >= op_norm(T) * (1 - 1e-9)


def test_order_invariance():
    rng = np.random.default_rng(8)
    fam = [operator(rng.standard_normal((2, 3)), 2.0, 1.0) for _ in range(3)]
    a = rbound_search(fam).value
    b = rbound_search(fam[::-1]).value
    assert a == b


def test_scaling_equivariance():
    rng = np.random.default_rng(9)
    fam = [operator(rng.standard_normal((2, 2)), 1.0, math.inf) for _ in range(3)]
    base = rbound_search(fam).value
    for lam in (0.5, 3.0, 1e3):
        scaled = rbound_search([T.scaled(lam) for T in fam]).value
        assert scaled == pytest.approx(lam * base, rel=1e-9)


def test_monotone_under_inclusion():
    rng = np.random.default_rng(10)
    for q_in, q_out in ((2.0, 2.0), (1.0, 2.0), (2.0, 1.0)):
        fam = [operator(rng.standard_normal((2, 2)), q_in, q_out) for _ in range(3)]
        prev = 0.0
        for k in range(1, len(fam) + 1):
            v = rbound_search(fam[:k]).value
            assert v >= prev - 1e-9
            prev = v


def test_l1_nested_family_grows_with_level():
    vals = [rbound_search(nested_uniform_family(L)).value for L in range(2, 5)]
    assert vals[0] > 1.0
    assert vals[0] < vals[1] < vals[2]


def test_type_constant_hilbert_is_one():
    est = type_constant_search(SequenceSpace(2.0, 3))
    assert 1.0 - 1e-9 <= est.value <= 1.0 + 1e-6


def test_type_ratio_l1_basis():
    # ||sum eps_j e_j||_1 = n for every sign pattern
    assert type_ratio(SequenceSpace(1.0, 8), np.eye(8), 2.0) == pytest.approx(math.sqrt(8), rel=1e-14)


def test_type_ratio_single_vector_is_one():
    for q in (1.0, 3.0, math.inf):
        assert type_ratio(SequenceSpace(q, 3), [[1.0, -2.0, 0.5]], 1.5) == pytest.approx(1.0, rel=1e-14)


def test_type_constant_monotone_in_dimension():
    params = SearchParams(nmax=4, restarts=2, iters=15)
    for q in (1.0, math.inf):
        vals = [type_constant_search(SequenceSpace(q, d), 2.0, params).value for d in range(1, 5)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
    l1 = [type_constant_search(SequenceSpace(1.0, d), 2.0, params).value for d in range(1, 5)]
    assert l1[-1] >= 2.0 - 1e-9


def test_type_constant_errors():
    with pytest.raises(ValueError):
        type_constant_search(SequenceSpace(2.0, 2), 2.5)


@given(st.lists(st.floats(-3, 3, allow_nan=False, allow_infinity=False), min_size=1, max_size=4))
def test_scalar_family_is_max_abs(lams):
    fam = [operator([[lam]]) for lam in lams]
    assert rbound_search(fam).value == pytest.approx(max(abs(x) for x in lams), rel=1e-9, abs=1e-12)
