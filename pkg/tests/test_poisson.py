import numpy as np
import pytest

from laxflow import poisson as po
from laxflow import polymat as pm
from laxflow.errors import NotInImage


def moment_field(E: np.ndarray, deg: int) -> po.ScalarField:
    # linear image of the moment map: Y -> sum_alpha a_alpha^deg tr(E Y_alpha)
    def _eval(Y: po.MultiPoint) -> complex:
        a = np.array(Y.nodes.a)
        return complex(np.sum(a**deg * np.einsum("ij,aji->a", E, Y.Y)))

    def _grad(Y: po.MultiPoint) -> po.MultiPoint:
        a = np.array(Y.nodes.a)
        return po.MultiPoint(a[:, None, None] ** deg * E.T[None], Y.nodes)

    return po.ScalarField(_eval, _grad)


@pytest.fixture
def nodes() -> po.Nodes:
    return po.default_nodes(2)


@pytest.fixture
def off_image(nodes) -> po.MultiPoint:
    rng = np.random.default_rng(1)
    Y = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
    return po.MultiPoint(Y, nodes)


def test_nodes_validation():
    with pytest.raises(ValueError):
        po.Nodes.from_points([0, 1, 1 + 1e-13])
    with pytest.raises(ValueError):
        po.Nodes.from_points([0, 1])
    with pytest.raises(ValueError):
        po.Nodes((0, 1, 2), (1.0, 1.0, 1.0))


def test_default_nodes():
    nodes = po.default_nodes(3)
    assert nodes.a == tuple(complex(k) for k in range(5))
    # weights 1/prod(a - a_rho) for integer nodes 0..4
    assert abs(nodes.c[0] - 1 / 24) < 1e-15


def test_multipoint_shape_check(nodes):
    with pytest.raises(ValueError):
        po.MultiPoint(np.zeros((3, 2, 2)), nodes)
    with pytest.raises(ValueError):
        po.MultiPoint(np.zeros((4, 2, 3)), nodes)


def test_phi_roundtrip(f3, nodes):
    back = po.phi_inverse(po.phi(f3, nodes))
    np.testing.assert_allclose(back.coeffs, f3.coeffs, atol=1e-12)


def test_phi_node_count_mismatch(f3):
    with pytest.raises(ValueError):
        po.phi(f3, po.default_nodes(3))


def test_phi_inverse_rejects_off_image(off_image):
    with pytest.raises(NotInImage):
        po.phi_inverse(off_image)


def test_coordinate_bracket_hand_values(off_image):
    # {y_01, y_10} at one node is y_00 - y_11; distinct nodes commute
    Y = off_image
    got = po.bracket(po.coordinate_field(0, 0, 1), po.coordinate_field(0, 1, 0), Y)
    assert got == Y.Y[0, 0, 0] - Y.Y[0, 1, 1]
    assert po.bracket(po.coordinate_field(0, 0, 1), po.coordinate_field(1, 1, 0), Y) == 0


def test_bracket_antisymmetry(off_image, nodes):
    f = po.trace_hamiltonian(0.3 - 0.8j, 1, nodes)
    g = po.casimir(2, 2)
    h = po.coordinate_field(1, 0, 1)
    for u, v in [(f, g), (f, h), (g, h)]:
        assert abs(po.bracket(u, v, off_image) + po.bracket(v, u, off_image)) < 1e-12


def test_bracket_leibniz(off_image, nodes):
    f = po.coordinate_field(0, 0, 1)
    g = po.coordinate_field(0, 1, 1)
    h = po.trace_hamiltonian(0.7, 1, nodes)
    lhs = po.bracket(po.scalar_product(f, g), h, off_image)
    rhs = f.eval(off_image) * po.bracket(g, h, off_image) + g.eval(
        off_image
    ) * po.bracket(f, h, off_image)
    assert abs(lhs - rhs) < 1e-10


def test_jacobi_for_linear_fields(off_image):
    # brackets of linear fields are linear with constant gradient, so the
    # nested brackets are exact and Jacobi must hold to roundoff
    def lin(C: np.ndarray) -> po.ScalarField:
        def _eval(Y):
            return complex(np.sum(C * Y.Y))

        def _grad(Y):
            return po.MultiPoint(C, Y.nodes)

        return po.ScalarField(_eval, _grad)

    def lin_bracket(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.stack([u[k] @ v[k] - v[k] @ u[k] for k in range(u.shape[0])])

    rng = np.random.default_rng(3)
    C = [rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2)) for _ in range(3)]
    total = (
        po.bracket(lin(C[0]), lin(lin_bracket(C[1], C[2])), off_image)
        + po.bracket(lin(C[1]), lin(lin_bracket(C[2], C[0])), off_image)
        + po.bracket(lin(C[2]), lin(lin_bracket(C[0], C[1])), off_image)
    )
    assert abs(total) < 1e-12


def test_casimir_gradient_and_centrality(off_image, nodes):
    C = po.casimir(1, 3)
    fd = po.gradient_fd(C, off_image)
    assert float(np.abs(C.grad(off_image).Y - fd.Y).max()) < 1e-6
    H = po.trace_hamiltonian(0.5 + 0.5j, 1, nodes)
    assert abs(po.bracket(C, H, off_image)) < 1e-10
    assert abs(po.bracket(C, po.coordinate_field(1, 0, 0), off_image)) < 1e-10


def test_moment_map_vanishes_on_image(nodes):
    for seed in range(4):
        Y = po.phi(pm.random_sample(2, 2, seed), nodes)
        assert po.mu_t1_residual(Y) < 1e-12
        assert po.imvarphi_residual(Y) < 1e-12
        assert po.image_predicate(Y)


def test_image_predicate_agrees_with_explicit_equations(nodes, off_image):
    assert not po.image_predicate(off_image)
    assert po.imvarphi_residual(off_image) > 1e-6
    Y = po.phi(pm.random_sample(2, 2, 9), nodes)
    assert po.image_predicate(Y) and po.imvarphi_residual(Y) < 1e-12


def test_moment_components_close_under_bracket(off_image):
    # {H_E, H_E'} = H_[E', E]; the opposite order is off by a sign, which a
    # non-commuting pair detects at full magnitude
    E12 = np.array([[0, 1], [0, 0]], dtype=complex)
    E22 = np.array([[0, 0], [0, 1]], dtype=complex)
    lhs = po.bracket(moment_field(E12, 0), moment_field(E22, 0), off_image)
    rev = moment_field(E22 @ E12 - E12 @ E22, 0).eval(off_image)
    fwd = moment_field(E12 @ E22 - E22 @ E12, 0).eval(off_image)
    assert abs(lhs - rev) < 1e-12
    assert abs(lhs - fwd) > 0.1


def test_trace_hamiltonian_on_image(f3, nodes):
    a = 0.5 + 0.5j
    H = po.trace_hamiltonian(a, 1, nodes)
    want = np.trace(np.linalg.matrix_power(pm.eval_matrix(f3, a), 2))
    assert abs(H.eval(po.phi(f3, nodes)) - want) < 1e-12


def test_trace_hamiltonian_gradient(off_image, nodes):
    H = po.trace_hamiltonian(0.5 + 0.5j, 2, nodes)
    fd = po.gradient_fd(H, off_image)
    assert float(np.abs(H.grad(off_image).Y - fd.Y).max()) < 1e-6
    with pytest.raises(ValueError):
        po.trace_hamiltonian(0.5, 0, nodes)


def test_hamiltonian_field_matches_lax_field(f3, nodes):
    assert po.hamiltonian_field_check(f3, 0.5 + 0.5j, 1, nodes) < 1e-8
    with pytest.raises(ValueError):
        po.hamiltonian_field_check(f3, 1.0, 1, nodes)
