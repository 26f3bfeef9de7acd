import json

import numpy as np
import pytest
import sympy

from conftest import padded_max_diff
from laxflow import polymat as pm
from laxflow import spectral as sp
from laxflow.errors import ParseError, ShapeViolation


@pytest.mark.parametrize("r,d,g", [(2, 2, 1), (2, 3, 2), (3, 2, 4), (3, 3, 7)])
def test_genus_values(r, d, g):
    assert sp.genus(r, d) == g


def test_genus_r2_family():
    for d in range(1, 7):
        assert sp.genus(2, d) == d - 1


def test_genus_rejects_degenerate_sizes():
    with pytest.raises(ValueError):
        sp.genus(1, 3)
    with pytest.raises(ValueError):
        sp.genus(2, 0)


def test_char_poly_trace_free_example(f1):
    P = sp.char_poly(f1)
    assert P.s[0] == pm.Poly([0])
    assert P.s[1] == pm.Poly([0, 0, -2])


def test_char_poly_genus_one_example(f3):
    P = sp.char_poly(f3)
    assert P.s[0] == pm.Poly([-2])
    assert P.s[1] == pm.Poly([0, -1, 0, 0, -1])


def test_char_poly_matches_symbolic_determinant(f4):
    x, y = sympy.symbols("x y")
    M = sympy.Matrix(
        [
            [sum(sympy.nsimplify(c, rational=False) * x**k for k, c in enumerate(f4.coeffs[i, j])) for j in range(3)]
            for i in range(3)
        ]
    )
    det = sympy.expand((y * sympy.eye(3) - M).det())
    P = sp.char_poly(f4)
    for i, p in enumerate(P.s, start=1):
        want = sympy.Poly(det.coeff(y, 3 - i), x).all_coeffs()[::-1]
        want = np.array([complex(c) for c in want])
        assert padded_max_diff(p.coeffs, want) < 1e-12


@pytest.mark.parametrize("r,d", [(2, 2), (2, 3), (3, 2)])
def test_curve_eval_matches_determinant(r, d):
    rng = np.random.default_rng(7)
    A = pm.random_sample(r, d, 13)
    P = sp.char_poly(A)
    for _ in range(6):
        x, y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        want = np.linalg.det(y * np.eye(r) - pm.eval_matrix(A, x))
        got = sp.curve_eval(P, x, y)
        assert abs(got - want) < 1e-9 * max(1.0, abs(want))


def test_infinity_chart_hand_value(f3):
    # z^4 P(1/z, w/z^2) = w^2 - 2 z^2 w - 1 - z^3
    P = sp.char_poly(f3)
    rng = np.random.default_rng(3)
    for _ in range(5):
        z, w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        want = w**2 - 2 * z**2 * w - 1 - z**3
        assert abs(sp.curve_eval(P, z, w, chart="infinity") - want) < 1e-12


def test_curve_eval_rejects_unknown_chart(f3):
    with pytest.raises(ValueError):
        sp.curve_eval(sp.char_poly(f3), 0, 0, chart="projective")


def test_fiber_polynomial_finite_and_infinite(f3):
    P = sp.char_poly(f3)
    np.testing.assert_allclose(sp.fiber_polynomial(P, 0), [0, -2, 1], atol=1e-14)
    np.testing.assert_allclose(sp.fiber_polynomial(P, pm.INFINITY), [-1, 0, 1], atol=1e-14)


def test_unramified_over_regular_and_branch_points(f3):
    # branch points of f3's curve are the roots of x^4 + x + 1; the fiber-root
    # gap scales like sqrt of the defect, so polish the root before testing
    P = sp.char_poly(f3)
    assert sp.is_unramified_over(P, 0)
    assert sp.is_unramified_over(P, pm.INFINITY)
    branch = np.roots([1, 0, 0, 1, 1])[0]
    for _ in range(3):
        branch -= (branch**4 + branch + 1) / (4 * branch**3 + 1)
    assert not sp.is_unramified_over(P, branch)


def test_smoothness_certificate(f3):
    report = sp.smoothness_check(sp.char_poly(f3))
    assert report.genus == 1
    assert report.smooth_heuristic
    assert abs(report.discriminant_min_separation - 0.7265277764953588) < 1e-9
    assert len(report.unramified_nodes_checked) == 5
    assert all(flag for _, flag in report.unramified_nodes_checked)


def test_smoothness_rejects_vanishing_discriminant():
    A = pm.make_polymatrix(2, 1, [[[0], [0]], [[1], [0]]])
    report = sp.smoothness_check(sp.char_poly(A))
    assert not report.smooth_heuristic


def test_curve_shape_violation():
    with pytest.raises(ShapeViolation):
        sp.SpectralCurve(2, 1, (pm.Poly([0, 1, 1]), pm.Poly([0])))
    with pytest.raises(ValueError):
        sp.SpectralCurve(2, 1, (pm.Poly([0]),))


def test_curve_json_roundtrip(f4):
    P = sp.char_poly(f4)
    again = sp.curve_from_json(json.dumps(sp.curve_to_json(P)))
    assert again.r == P.r and again.d == P.d
    for p, q in zip(again.s, P.s):
        assert padded_max_diff(p.coeffs, q.coeffs) == 0.0


def test_curve_from_json_rejects_junk():
    with pytest.raises(ParseError):
        sp.curve_from_json("{not json")
    with pytest.raises(ParseError):
        sp.curve_from_json({"r": 2, "d": 1})
