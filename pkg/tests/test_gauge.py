import numpy as np
import pytest
import sympy

from conftest import padded_max_diff
from laxflow import gauge as gg
from laxflow import polymat as pm
from laxflow import spectral as sp
from laxflow.errors import NotInMc, RamifiedPoint, SingularB


def random_gauge(r: int, seed: int) -> gg.GaugeElement:
    rng = np.random.default_rng(seed)
    n = r - 1
    while True:
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if abs(np.linalg.det(B)) > 0.3:
            break
    b1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return gg.GaugeElement(B, b1, b0)


def test_gauge_element_rejects_singular_block():
    with pytest.raises(SingularB):
        gg.GaugeElement([[0.0]], [0.0], [0.0])
    with pytest.raises(ValueError):
        gg.GaugeElement(np.eye(2), [0.0], [0.0])


def test_gauge_matrix_block_structure():
    g = random_gauge(3, 5)
    M = gg.gauge_matrix(g, 0.7 - 0.2j)
    assert M.shape == (3, 3)
    assert M[0, 0] == 1
    np.testing.assert_allclose(M[1:, 0], 0, atol=0)
    np.testing.assert_allclose(M[0, 1:], g.b1 * (0.7 - 0.2j) + g.b0, atol=0)
    np.testing.assert_allclose(M[1:, 1:], g.B, atol=0)


def test_gauge_apply_matches_pointwise_conjugation(f4):
    g = random_gauge(3, 11)
    gauged = gg.gauge_apply(g, f4)
    for x in (0.3, -1.2 + 0.4j, 2.0j):
        G = gg.gauge_matrix(g, x)
        want = np.linalg.inv(G) @ pm.eval_matrix(f4, x) @ G
        np.testing.assert_allclose(pm.eval_matrix(gauged, x), want, atol=1e-10)


def test_gauge_apply_frozen_example(f2):
    g = gg.GaugeElement([[2.0]], [0.0], [0.0])
    got = gg.gauge_apply(g, f2)
    want = pm.make_polymatrix(2, 1, [[[0], [0, 2]], [[0.5], [0]]])
    np.testing.assert_allclose(got.coeffs, want.coeffs, atol=1e-14)


def test_char_poly_is_gauge_invariant(f4):
    g = random_gauge(3, 23)
    before = sp.char_poly(f4)
    after = sp.char_poly(gg.gauge_apply(g, f4))
    for p, q in zip(before.s, after.s):
        assert padded_max_diff(p.coeffs, q.coeffs) < 1e-10


def test_compose_contract(f4):
    g = random_gauge(3, 1)
    h = random_gauge(3, 2)
    lhs = gg.gauge_apply(gg.gauge_compose(g, h), f4)
    rhs = gg.gauge_apply(h, gg.gauge_apply(g, f4))
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


def test_invert_roundtrip(f4):
    g = random_gauge(3, 9)
    assert gg.gauge_compose(g, gg.gauge_invert(g)).almost_equal(gg.gauge_identity(3))
    back = gg.gauge_apply(gg.gauge_invert(g), gg.gauge_apply(g, f4))
    np.testing.assert_allclose(back.coeffs, f4.coeffs, atol=1e-10)


def test_d_matrix_at_infinity(f3):
    np.testing.assert_allclose(gg.d_matrix(f3, pm.INFINITY), [[1.0]], atol=0)
    assert gg.in_Mc(f3, pm.INFINITY)


def test_d_poly_leading_coefficient(f4):
    p = gg.d_poly(f4)
    g = sp.genus(3, 2)
    assert p.degree == g
    lead = complex(np.linalg.det(gg.d_matrix(f4, pm.INFINITY)))
    assert abs(p.coeff(g) - lead) < 1e-12


def test_d_poly_matches_symbolic_cofactor(f4):
    x = sympy.symbols("x")

    def entry(i, j):
        return sum(sympy.nsimplify(c, rational=False) * x**k for k, c in enumerate(f4.coeffs[i, j]))

    T = sympy.Matrix(2, 2, lambda i, j: entry(i + 1, j + 1))
    u = sympy.Matrix(2, 1, lambda i, _: entry(i + 1, 0))
    det = sympy.expand(sympy.Matrix.hstack(u, T * u).det())
    want = np.array([complex(c) for c in sympy.Poly(det, x).all_coeffs()[::-1]])
    assert padded_max_diff(gg.d_poly(f4).coeffs, want) < 1e-10


def test_normal_form_frozen_example(f1):
    S, g = gg.normal_form(f1, 0)
    want = pm.make_polymatrix(2, 1, [[[0], [0, 0, 2]], [[1], [0]]])
    np.testing.assert_allclose(S.coeffs, want.coeffs, atol=1e-12)
    np.testing.assert_allclose(g.B, [[1.0]], atol=1e-12)
    np.testing.assert_allclose(g.b1, [1.0], atol=1e-12)
    np.testing.assert_allclose(g.b0, [0.0], atol=1e-12)
    np.testing.assert_allclose(gg.gauge_apply(g, f1).coeffs, S.coeffs, atol=1e-12)


@pytest.mark.parametrize("r,d", [(2, 2), (2, 3), (3, 2)])
def test_normal_form_roundtrip_and_idempotence(r, d):
    A = pm.random_sample(r, d, 31)
    c = 0.4 - 0.7j
    if not gg.in_Mc(A, c):
        pytest.skip("sampled instance is degenerate at this node")
    S, g = gg.normal_form(A, c)
    assert pm.slice_residual(S, c) < 1e-9
    np.testing.assert_allclose(gg.gauge_apply(g, A).coeffs, S.coeffs, atol=1e-9)
    S2, g2 = gg.normal_form(S, c)
    np.testing.assert_allclose(S2.coeffs, S.coeffs, atol=1e-9)
    assert g2.almost_equal(gg.gauge_identity(r), tol=1e-9)


def test_normal_form_is_orbit_invariant(f4):
    c = 1.0
    h = random_gauge(3, 77)
    S1, _ = gg.normal_form(f4, c)
    S2, _ = gg.normal_form(gg.gauge_apply(h, f4), c)
    np.testing.assert_allclose(S1.coeffs, S2.coeffs, atol=1e-8)


def test_normal_form_requires_nondegenerate_node():
    A = pm.make_polymatrix(2, 1, [[[0], [0, 1]], [[0], [0]]])
    assert not gg.in_Mc(A, 0)
    with pytest.raises(NotInMc):
        gg.normal_form(A, 0)


def test_orbit_tangent_basis_hand_values(f2):
    E22, E12, xE12 = gg.orbit_tangent_basis(f2)
    np.testing.assert_allclose(
        E22.coeffs, pm.make_polymatrix(2, 1, [[[0], [0, -1]], [[1], [0]]]).coeffs, atol=0
    )
    np.testing.assert_allclose(
        E12.coeffs, pm.make_polymatrix(2, 1, [[[1], [0]], [[0], [-1]]]).coeffs, atol=0
    )
    np.testing.assert_allclose(
        xE12.coeffs, pm.make_polymatrix(2, 1, [[[0, 1], [0]], [[0], [0, -1]]]).coeffs, atol=0
    )


def test_lie_gauge_field_is_linear(f4):
    basis = gg.orbit_tangent_basis(f4)
    coeffs = np.zeros(8, dtype=complex)
    coeffs[0] = 2.0
    coeffs[5] = -1.5j
    got = gg.LieGaugeElement(3, coeffs).field_at(f4)
    want = 2.0 * basis[0] + (-1.5j) * basis[5]
    np.testing.assert_allclose(got.coeffs, want.coeffs, atol=1e-12)


def test_lie_gauge_element_validates_length():
    with pytest.raises(ValueError):
        gg.LieGaugeElement(3, np.zeros(7))


def test_theta_membership_detects_degenerate_line_bundle():
    A = pm.make_polymatrix(2, 1, [[[1], [5]], [[0], [2]]])
    rep = gg.theta_membership(A, 0.3)
    assert rep.eigenvalues == (1 + 0j, 2 + 0j)
    assert rep.outside_theta == (True, False)
    assert rep.dim_W == 1


def test_theta_membership_generic_point(f2):
    rep = gg.theta_membership(f2, 1.0)
    np.testing.assert_allclose(rep.eigenvalues, [-1, 1], atol=1e-12)
    assert rep.outside_theta == (True, True)
    assert rep.dim_W == 0


def test_theta_membership_requires_unramified_fiber(f2):
    with pytest.raises(RamifiedPoint):
        gg.theta_membership(f2, 0)


def test_theta_report_json_shape(f3):
    rep = gg.theta_membership(f3, pm.INFINITY)
    obj = gg.theta_report_to_json(rep)
    assert obj["node"] == "infinity"
    assert len(obj["eigenvalues"]) == 2
    assert all(isinstance(flag, bool) for flag in obj["outside_theta"])
    assert obj["dim_W"] == 0
