import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laxflow import polymat as pm
from laxflow.errors import ParseError, ShapeViolation


def test_degree_bounds_grid():
    # 1-based rule: (1,1) -> d, first row -> d+1, first column -> d-1, rest -> d
    assert pm.degree_bound(3, 2, 0, 0) == 2
    assert pm.degree_bound(3, 2, 0, 1) == 3
    assert pm.degree_bound(3, 2, 1, 0) == 1
    assert pm.degree_bound(3, 2, 1, 2) == 2


def test_from_tensor_rejects_overflow():
    coeffs = np.zeros((2, 2, 3), dtype=complex)
    coeffs[1, 0, 1] = 1.0  # u-entry bound is d-1 = 0
    with pytest.raises(ShapeViolation):
        pm.from_tensor(2, 1, coeffs)


def test_from_tensor_zeroes_noise_below_tol():
    coeffs = np.zeros((2, 2, 3), dtype=complex)
    coeffs[0, 0, 0] = 1.0
    coeffs[1, 0, 1] = 1e-15
    A = pm.from_tensor(2, 1, coeffs)
    assert A.coeffs[1, 0, 1] == 0


def test_eval_matrix_hand_value(f1):
    got = pm.eval_matrix(f1, 2.0)
    np.testing.assert_allclose(got, [[2, 4], [1, -2]], atol=1e-14)


@given(st.integers(0, 10**6), st.complex_numbers(max_magnitude=2, allow_nan=False))
@settings(max_examples=40, deadline=None)
def test_eval_matches_per_entry_horner(seed, x):
    A = pm.random_sample(2, 2, seed)
    got = pm.eval_matrix(A, x)
    want = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            want[i, j] = sum(c * x**k for k, c in enumerate(A.coeffs[i, j]))
    np.testing.assert_allclose(got, want, atol=1e-10)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_arithmetic_commutes_with_evaluation(s1, s2):
    A = pm.random_sample(3, 2, s1)
    B = pm.random_sample(3, 2, s2)
    x = 0.37 - 0.81j
    np.testing.assert_allclose(
        pm.eval_matrix(A + B, x),
        pm.eval_matrix(A, x) + pm.eval_matrix(B, x),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        pm.eval_matrix(2.5j * A, x), 2.5j * pm.eval_matrix(A, x), atol=1e-12
    )


def test_leading_matrix_picks_bound_slots(f3):
    # top coefficients: v_2=0, w_3=1, u_1=1, T_2=0
    np.testing.assert_allclose(pm.leading_matrix(f3), [[0, 1], [1, 0]], atol=0)


def test_block_view_roundtrip(f4):
    blocks = f4.block()
    assert blocks.v_k(0) == f4.coeffs[0, 0, 0]
    np.testing.assert_allclose(blocks.assemble().coeffs, f4.coeffs, atol=0)


def test_json_roundtrip(f4):
    again = pm.from_json(pm.to_json(f4))
    np.testing.assert_allclose(again.coeffs, f4.coeffs, atol=0)
    assert again.r == f4.r and again.d == f4.d


def test_from_json_rejects_junk():
    with pytest.raises(ParseError):
        pm.from_json({"r": 2, "d": 1})


@pytest.mark.parametrize(
    "name,r,d",
    [
        ("m21_generic.json", 2, 1),
        ("m21_base_point.json", 2, 1),
        ("m22_genus1_slice.json", 2, 2),
        ("m32_genus4_slice.json", 3, 2),
    ],
)
def test_golden_fixtures_pin_wire_format(name, r, d):
    # the on-disk JSON is the format contract; to_json must reproduce it
    path = Path(__file__).resolve().parent.parent / "fixtures" / name
    obj = json.loads(path.read_text())
    A = pm.from_json(obj)
    assert (A.r, A.d) == (r, d)
    assert pm.to_json(A) == obj


def test_golden_fixture_matches_handwritten_matrix(f1):
    path = Path(__file__).resolve().parent.parent / "fixtures" / "m21_generic.json"
    A = pm.from_json(json.loads(path.read_text()))
    np.testing.assert_allclose(A.coeffs, f1.coeffs, atol=0)


@pytest.mark.parametrize("r,d", [(2, 2), (2, 3), (3, 2)])
def test_random_sample_slice_membership(r, d):
    A = pm.random_sample(r, d, 5, "s_infinity")
    assert pm.in_slice(A)
    assert pm.slice_residual(A) == 0.0

    B = pm.random_sample(r, d, 5, "s_c", c=0.4 + 0.2j)
    assert pm.slice_residual(B, 0.4 + 0.2j) < 1e-12


def test_random_sample_is_deterministic():
    A = pm.random_sample(3, 2, 11)
    B = pm.random_sample(3, 2, 11)
    np.testing.assert_allclose(A.coeffs, B.coeffs, atol=0)


def test_slice_sample_full_has_no_pins():
    A = pm.random_sample(2, 2, 3)
    assert not pm.in_slice(A)


def test_infinity_sentinel():
    assert pm.is_infinite(pm.INFINITY)
    assert not pm.is_infinite(3.0)


def test_poly_equality_is_tolerant():
    p = pm.Poly([1.0, 2.0])
    q = pm.Poly([1.0 + 1e-14, 2.0, 1e-15])
    assert p == q
    assert p != pm.Poly([1.0, 2.1])


def test_poly_degree_trims_trailing_zeros():
    assert pm.Poly([3.0, 0.0, 0.0]).degree == 0
