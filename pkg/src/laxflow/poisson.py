"""The multi-point embedding and its Lie-Poisson structure.

Fixing d+2 distinct nodes a_1, ..., a_{d+2} with weights
c_alpha = 1 / prod_{rho != alpha} (a_alpha - a_rho), the map

    phi(A) = (c_1 A(a_1), ..., c_{d+2} A(a_{d+2}))

embeds M(r,d) into tuples of r x r matrices, with inverse given by Lagrange
interpolation A(x) = sum Y_alpha P_alpha(x).  The target carries the
product Lie-Poisson bracket

    {y_ij^alpha, y_kl^beta} = delta_{alpha beta}
        (delta_jk y_il^alpha - delta_li y_kj^alpha),

under which the trace functions tr A(a)^{p+1} generate the Lax fields.
Brackets contract gradients against these structure constants directly; the
Poisson tensor is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npp

from . import config
from .errors import NotInImage, ShapeViolation
from .gauge import _lie_basis, orbit_tangent_basis
from .polymat import PolyMatrix, eval_matrix, from_tensor
from .flows import upsilon

__all__ = [
    "MultiPoint",
    "Nodes",
    "ScalarField",
    "bracket",
    "casimir",
    "coordinate_field",
    "default_nodes",
    "gradient_fd",
    "hamiltonian_field_check",
    "image_predicate",
    "imvarphi_residual",
    "moment_map",
    "mu_t1_residual",
    "phi",
    "phi_inverse",
    "scalar_product",
    "trace_hamiltonian",
]


@dataclass(frozen=True)
class Nodes:
    """d+2 distinct interpolation nodes with their Lagrange weights."""

    a: tuple
    c: tuple

    def __post_init__(self):
        a = tuple(complex(z) for z in self.a)
        m = len(a)
        if m < 3:
            raise ValueError("need at least three nodes (d >= 1)")
        for i in range(m):
            for j in range(i + 1, m):
                if abs(a[i] - a[j]) < 1e-12:
                    raise ValueError(f"nodes {i} and {j} coincide")
        expected = _weights(a)
        c = tuple(complex(z) for z in self.c)
        if len(c) != m or any(abs(x - y) > 1e-9 * max(1.0, abs(y)) for x, y in zip(c, expected)):
            raise ValueError("weights do not match 1/prod(a_alpha - a_rho)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_points(cls, points) -> "Nodes":
        a = tuple(complex(z) for z in points)
        return cls(a, _weights(a))


def _weights(a: tuple) -> tuple:
    out = []
    for alpha, z in enumerate(a):
        prod = 1.0 + 0j
        for rho, w in enumerate(a):
            if rho != alpha:
                prod *= z - w
        out.append(1 / prod)
    return tuple(out)


def default_nodes(d: int) -> Nodes:
    """The integer nodes 0, 1, ..., d+1."""
    return Nodes.from_points(range(d + 2))


def _lagrange_coeffs(nodes: Nodes) -> np.ndarray:
    """Row alpha holds the coefficients of P_alpha(x), low degree first."""
    m = len(nodes.a)
    out = np.zeros((m, m), dtype=complex)
    for alpha in range(m):
        roots = [z for rho, z in enumerate(nodes.a) if rho != alpha]
        out[alpha] = npp.polyfromroots(roots)
    return out


@dataclass(frozen=True)
class MultiPoint:
    """A tuple of r x r matrices, one per node; ``Y[alpha]`` is (r, r)."""

    Y: np.ndarray
    nodes: Nodes

    def __post_init__(self):
        Y = np.array(self.Y, dtype=complex)
        m = len(self.nodes.a)
        if Y.ndim != 3 or Y.shape[0] != m or Y.shape[1] != Y.shape[2]:
            raise ValueError(f"expected shape ({m}, r, r)")
        Y.setflags(write=False)
        object.__setattr__(self, "Y", Y)

    @property
    def r(self) -> int:
        return self.Y.shape[1]

    def __add__(self, other: "MultiPoint") -> "MultiPoint":
        return MultiPoint(self.Y + other.Y, self.nodes)

    def __sub__(self, other: "MultiPoint") -> "MultiPoint":
        return MultiPoint(self.Y - other.Y, self.nodes)

    def __mul__(self, scalar) -> "MultiPoint":
        return MultiPoint(self.Y * complex(scalar), self.nodes)

    __rmul__ = __mul__


def phi(A: PolyMatrix, nodes: Nodes) -> MultiPoint:
    """(c_alpha A(a_alpha)) over the given nodes."""
    if len(nodes.a) != A.d + 2:
        raise ValueError(f"need d+2 = {A.d + 2} nodes")
    Y = np.stack([c * eval_matrix(A, a) for a, c in zip(nodes.a, nodes.c)])
    return MultiPoint(Y, nodes)


def phi_inverse(Y: MultiPoint) -> PolyMatrix:
    """Lagrange interpolation sum Y_alpha P_alpha(x), validated for shape.

    Raises NotInImage when the interpolant violates the degree bounds, which
    happens exactly when the linear image constraints fail.
    """
    m = len(Y.nodes.a)
    r, d = Y.r, m - 2
    P = _lagrange_coeffs(Y.nodes)
    coeffs = np.einsum("aij,ak->ijk", Y.Y, P)
    try:
        return from_tensor(r, d, coeffs, tol=config.get().image_tol)
    except ShapeViolation as exc:
        raise NotInImage(str(exc)) from exc


@dataclass(frozen=True)
class ScalarField:
    """A smooth function with a gradient, both over MultiPoint.

    ``grad(Y)`` holds the entrywise partials d/dy_{ij}^alpha in the same
    layout as Y itself.
    """

    eval: Callable
    grad: Callable


def coordinate_field(alpha: int, i: int, j: int) -> ScalarField:
    """The coordinate y_{ij}^alpha, zero-based in all three indices."""

    def _eval(Y: MultiPoint) -> complex:
        return complex(Y.Y[alpha, i, j])

    def _grad(Y: MultiPoint) -> MultiPoint:
        G = np.zeros_like(Y.Y)
        G[alpha, i, j] = 1
        return MultiPoint(G, Y.nodes)

    return ScalarField(_eval, _grad)


def casimir(alpha: int, k: int) -> ScalarField:
    """tr(Y_alpha^k); a Casimir of the product bracket."""

    def _eval(Y: MultiPoint) -> complex:
        return complex(np.trace(np.linalg.matrix_power(Y.Y[alpha], k)))

    def _grad(Y: MultiPoint) -> MultiPoint:
        G = np.zeros_like(Y.Y)
        G[alpha] = k * np.linalg.matrix_power(Y.Y[alpha], k - 1).T
        return MultiPoint(G, Y.nodes)

    return ScalarField(_eval, _grad)


def scalar_product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Pointwise product with the Leibniz gradient."""

    def _eval(Y: MultiPoint) -> complex:
        return f.eval(Y) * g.eval(Y)

    def _grad(Y: MultiPoint) -> MultiPoint:
        return f.eval(Y) * g.grad(Y) + g.eval(Y) * f.grad(Y)

    return ScalarField(_eval, _grad)


def gradient_fd(f: ScalarField, Y: MultiPoint) -> MultiPoint:
    """Central-difference gradient, for validating analytic ones.

    All fields here are polynomial (holomorphic) in the entries, so a real
    step in each complex coordinate suffices.
    """
    h = config.get().fd_step
    G = np.zeros_like(Y.Y)
    it = np.ndindex(Y.Y.shape)
    for idx in it:
        step = np.zeros_like(Y.Y)
        step[idx] = h
        G[idx] = (
            f.eval(MultiPoint(Y.Y + step, Y.nodes))
            - f.eval(MultiPoint(Y.Y - step, Y.nodes))
        ) / (2 * h)
    return MultiPoint(G, Y.nodes)


def bracket(f: ScalarField, g: ScalarField, Y: MultiPoint) -> complex:
    """The Lie-Poisson bracket {f, g}(Y).

    Contracting the structure constants against the gradients F, G gives,
    per node, sum_{ij} ((F G - G F) * Y)_{ij} without conjugation.
    """
    F = f.grad(Y).Y
    G = g.grad(Y).Y
    out = 0j
    for alpha in range(Y.Y.shape[0]):
        FG = F[alpha] @ G[alpha] - G[alpha] @ F[alpha]
        out += np.sum(FG * Y.Y[alpha])
    return complex(out)


def moment_map(Y: MultiPoint) -> np.ndarray:
    """H_E = sum_alpha a_alpha^deg tr(E Y_alpha) over the Lie G_r basis.

    Components follow the canonical basis order of gauge.LieGaugeElement:
    E_ij (2 <= i, j <= r) row-major, then E_1j, then x E_1j.
    """
    a = np.array(Y.nodes.a)
    out = []
    for E, deg in _lie_basis(Y.r):
        vals = np.einsum("ij,aji->a", E, Y.Y)
        out.append(np.sum(a**deg * vals))
    return np.array(out)


def mu_t1_residual(Y: MultiPoint) -> float:
    """Max violation of the moment-map and total-trace constraints."""
    t1 = complex(np.trace(np.sum(Y.Y, axis=0)))
    return float(max(np.abs(moment_map(Y)).max(), abs(t1)))


def imvarphi_residual(Y: MultiPoint) -> float:
    """Max violation of the explicit image equations.

    The four families: sum y_11 = 0; sum y_i1 = 0 and sum a_alpha y_i1 = 0
    for i >= 2; sum y_ij = 0 for i, j >= 2.
    """
    a = np.array(Y.nodes.a)
    S = np.sum(Y.Y, axis=0)
    Sa = np.einsum("a,aij->ij", a, Y.Y)
    return float(
        max(
            abs(S[0, 0]),
            np.abs(S[1:, 0]).max(),
            np.abs(Sa[1:, 0]).max(),
            np.abs(S[1:, 1:]).max(),
        )
    )


def image_predicate(Y: MultiPoint) -> bool:
    """Whether Y lies on the image of phi: mu(Y) = 0 and t_1(Y) = 0."""
    return mu_t1_residual(Y) <= config.get().image_tol


def trace_hamiltonian(a: complex, p: int, nodes: Nodes) -> ScalarField:
    """The invariant Hamiltonian Y -> tr M(a)^{p+1}, M(x) = sum Y_alpha P_alpha(x).

    The gradient is analytic:
    d tr M(a)^{p+1} / dy_ij^alpha = (p+1) P_alpha(a) (M(a)^p)_{ji}.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    P_at_a = np.array(
        [complex(npp.polyval(a, row)) for row in _lagrange_coeffs(nodes)]
    )

    def _matrix(Y: MultiPoint) -> np.ndarray:
        return np.einsum("a,aij->ij", P_at_a, Y.Y)

    def _eval(Y: MultiPoint) -> complex:
        return complex(np.trace(np.linalg.matrix_power(_matrix(Y), p + 1)))

    def _grad(Y: MultiPoint) -> MultiPoint:
        Mp = np.linalg.matrix_power(_matrix(Y), p).T
        G = (p + 1) * P_at_a[:, None, None] * Mp[None, :, :]
        return MultiPoint(G, Y.nodes)

    return ScalarField(_eval, _grad)


def hamiltonian_field_check(A: PolyMatrix, a: complex, p: int, nodes: Nodes) -> float:
    """Residual between the Hamiltonian field of tr A(a)^{p+1} and the Lax field.

    The Hamiltonian field at Y is Ydot_alpha = [Y_alpha, tG_alpha]; its
    interpolant back on M(r,d) must equal
    (p+1) prod_alpha (a - a_alpha) Ups_a^(p)(A) up to gauge-orbit tangent
    directions.  Returns the least-squares residual of that comparison.
    """
    if min(abs(a - z) for z in nodes.a) < 1e-9:
        raise ValueError("a must avoid the interpolation nodes")
    Y = phi(A, nodes)
    G = trace_hamiltonian(a, p, nodes).grad(Y).Y
    Ydot = np.stack(
        [Y.Y[k] @ G[k].T - G[k].T @ Y.Y[k] for k in range(len(nodes.a))]
    )
    Adot = phi_inverse(MultiPoint(Ydot, nodes))
    factor = (p + 1) * np.prod([a - z for z in nodes.a])
    W = complex(factor) * upsilon(A, a, p)
    diff = (Adot - W).coeffs.ravel()
    basis = np.stack([V.coeffs.ravel() for V in orbit_tangent_basis(A)], axis=1)
    sol = np.linalg.lstsq(basis, diff, rcond=None)[0]
    return float(np.linalg.norm(diff - basis @ sol))
