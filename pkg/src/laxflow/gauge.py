"""The residual gauge group, its orbits, normal forms and the theta test.

Elements g(x) = [[1, tb1 x + tb0], [0, B]] with invertible B act on M(r,d)
by conjugation A(x) -> g(x)^{-1} A(x) g(x).  The action is evaluated through
its closed block form, which keeps the degree shape without polynomial
matrix inversion.  The D-matrix

    D(A; c) = (u(c), T(c) u(c), ..., T(c)^{r-2} u(c))

controls where the action can be normalized: on M_c = {det D(A;c) != 0}
every orbit meets the slice pinned at c exactly once, and normal_form
computes that representative together with the gauge element reaching it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import config
from .errors import NotInMc, NotInSlice, RamifiedPoint, SingularB
from .polymat import (
    INFINITY,
    Poly,
    PolyMatrix,
    _derivative_at,
    eval_matrix,
    from_tensor,
    is_infinite,
    leading_matrix,
    slice_residual,
)
from .spectral import char_poly, genus, is_unramified_over

__all__ = [
    "GaugeElement",
    "LieGaugeElement",
    "NormalForm",
    "ThetaReport",
    "d_matrix",
    "d_poly",
    "gauge_apply",
    "gauge_compose",
    "gauge_identity",
    "gauge_invert",
    "gauge_matrix",
    "in_Mc",
    "normal_form",
    "orbit_tangent_basis",
    "theta_membership",
    "theta_report_to_json",
]


@dataclass(frozen=True)
class GaugeElement:
    """g(x) = [[1, t(b1 x + b0)], [0, B]]; B must be invertible."""

    B: np.ndarray
    b1: np.ndarray
    b0: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=complex)
        b1 = np.array(self.b1, dtype=complex).reshape(-1)
        b0 = np.array(self.b0, dtype=complex).reshape(-1)
        n = b1.size
        if B.shape != (n, n) or b0.size != n:
            raise ValueError("gauge blocks have inconsistent sizes")
        if abs(np.linalg.det(B)) <= config.get().singular_b_tol:
            raise SingularB(f"|det B| = {abs(np.linalg.det(B)):.3e}")
        for arr in (B, b1, b0):
            arr.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b0", b0)

    @property
    def r(self) -> int:
        return self.b1.size + 1

    def almost_equal(self, other: "GaugeElement", tol: float = 1e-12) -> bool:
        return (
            self.B.shape == other.B.shape
            and bool(np.all(np.abs(self.B - other.B) <= tol))
            and bool(np.all(np.abs(self.b1 - other.b1) <= tol))
            and bool(np.all(np.abs(self.b0 - other.b0) <= tol))
        )


def gauge_identity(r: int) -> GaugeElement:
    n = r - 1
    return GaugeElement(np.eye(n), np.zeros(n), np.zeros(n))


def gauge_matrix(g: GaugeElement, x: complex) -> np.ndarray:
    """The r x r value g(x)."""
    n = g.B.shape[0]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[0, 0] = 1
    out[0, 1:] = g.b1 * x + g.b0
    out[1:, 1:] = g.B
    return out


def gauge_compose(g: GaugeElement, h: GaugeElement) -> GaugeElement:
    """The product g(x)h(x); applying it equals applying g then h."""
    return GaugeElement(
        g.B @ h.B,
        h.b1 + h.B.T @ g.b1,
        h.b0 + h.B.T @ g.b0,
    )


def gauge_invert(g: GaugeElement) -> GaugeElement:
    Binv = np.linalg.inv(g.B)
    return GaugeElement(Binv, -Binv.T @ g.b1, -Binv.T @ g.b0)


def _conv_into(acc: np.ndarray, a: np.ndarray, b: np.ndarray, sign: float = 1.0) -> None:
    # slots past acc are exactly zero for shape-stable products; the
    # assembled tail is still checked before truncation
    p = np.convolve(a, b)
    m = min(p.size, acc.size)
    acc[:m] += sign * p[:m]


def _shape_assemble(r: int, d: int, out: np.ndarray) -> PolyMatrix:
    # slots beyond d+1 cancel term by term; anything left is a real bug
    tail = np.abs(out[:, :, d + 2 :])
    if tail.size and tail.max() > 1e-9 * max(1.0, float(np.abs(out).max())):
        raise ArithmeticError("degree overflow in a shape-stable operation")
    return from_tensor(r, d, np.array(out[:, :, : d + 2]))


def gauge_apply(g: GaugeElement, A: PolyMatrix) -> PolyMatrix:
    """Conjugate A by g through the block formula.

    With A = [[v, tw], [u, T]] and b(x) = b1 x + b0,

        u' = B^{-1} u,              T' = (B^{-1} u) tb + B^{-1} T B,
        v' = v - tb (B^{-1} u),     tw' = tw B + v tb - tb T'.
    """
    n = A.r - 1
    if g.B.shape[0] != n:
        raise ValueError("gauge element size does not match the matrix")
    Binv = np.linalg.inv(g.B)
    v = A.coeffs[0, 0]
    w = A.coeffs[0, 1:, :]
    u = A.coeffs[1:, 0, :]
    T = A.coeffs[1:, 1:, :]
    u2 = np.einsum("ij,jk->ik", Binv, u)
    T2 = np.einsum("ab,bck,cd->adk", Binv, T, g.B)
    b = np.stack([g.b0, g.b1], axis=1)

    K = A.coeffs.shape[2]
    L = K + 2
    out = np.zeros((A.r, A.r, L), dtype=complex)
    out[1:, 0, :K] = u2
    Tnew = out[1:, 1:, :]
    for i in range(n):
        for j in range(n):
            Tnew[i, j, :K] = T2[i, j]
            _conv_into(Tnew[i, j], u2[i], b[j])
    vnew = out[0, 0, :]
    vnew[:K] = v
    for j in range(n):
        _conv_into(vnew, b[j], u2[j], sign=-1.0)
    wB = np.einsum("ik,ij->jk", w, g.B)
    wnew = out[0, 1:, :]
    for j in range(n):
        wnew[j, :K] += wB[j]
        _conv_into(wnew[j], v, b[j])
        for i in range(n):
            _conv_into(wnew[j], b[i], Tnew[i, j], sign=-1.0)
    return _shape_assemble(A.r, A.d, out)


def _point_blocks(A: PolyMatrix, c) -> tuple[np.ndarray, np.ndarray]:
    """(T, u) evaluated at c; at infinity the leading coefficients T_d, u_{d-1}."""
    if is_infinite(c):
        return A.T_coeff(A.d), A.u_coeff(A.d - 1)
    M = eval_matrix(A, c)
    return M[1:, 1:], M[1:, 0]


def d_matrix(A: PolyMatrix, c) -> np.ndarray:
    """Columns u(c), T(c)u(c), ..., T(c)^{r-2}u(c) (leading blocks at infinity)."""
    T, u = _point_blocks(A, c)
    n = A.r - 1
    D = np.empty((n, n), dtype=complex)
    col = u
    for k in range(n):
        D[:, k] = col
        col = T @ col
    return D


def d_poly(A: PolyMatrix) -> Poly:
    """det D(A(x); x) as a polynomial of degree at most g.

    Recovered from values on a circle by inverse FFT; the x^g coefficient is
    pinned to det D(A; infinity), which is its closed form.
    """
    g = genus(A.r, A.d)
    lead = complex(np.linalg.det(d_matrix(A, INFINITY)))
    n = g + 1
    radius = config.get().node_radius
    nodes = radius * np.exp(-2j * np.pi * np.arange(n) / n)
    values = np.array([np.linalg.det(d_matrix(A, t)) for t in nodes])
    coeffs = np.fft.ifft(values) / radius ** np.arange(n)
    coeffs[g] = lead
    return Poly(coeffs)


def in_Mc(A: PolyMatrix, c) -> bool:
    """Whether A admits a normal form at the node c."""
    return abs(np.linalg.det(d_matrix(A, c))) > config.get().in_mc_tol


class NormalForm(NamedTuple):
    S: PolyMatrix
    g: GaugeElement


def normal_form(A: PolyMatrix, c) -> NormalForm:
    """The unique slice representative of the orbit of A at the node c.

    First B is built from the Krylov columns of (T(c), u(c)) corrected by
    the characteristic coefficients beta of T(c), so that conjugation sends
    u(c) to (1,0,...,0) and T(c) to the companion matrix with first row
    -beta.  A second, unipotent element then clears that first row and the
    first row of the next coefficient block, landing exactly on the slice.

    Returns the representative S and the gauge element g with
    gauge_apply(g, A) = S.
    """
    if not in_Mc(A, c):
        raise NotInMc(f"det D(A; {c!r}) is below tolerance")
    n = A.r - 1
    Tc, uc = _point_blocks(A, c)
    # np.poly gives y^{n} + beta_1 y^{n-1} + ... + beta_n, high first
    beta = np.poly(Tc)[1:].astype(complex) if n > 0 else np.zeros(0, complex)
    B = np.empty((n, n), dtype=complex)
    col = uc.astype(complex)
    B[:, 0] = col
    for i in range(1, n):
        col = Tc @ col + beta[i - 1] * uc
        B[:, i] = col
    g0 = GaugeElement(B, np.zeros(n), np.zeros(n))
    At = gauge_apply(g0, A)

    if is_infinite(c):
        b1 = beta
        u_low = At.u_coeff(A.d - 2) if A.d >= 2 else np.zeros(n, complex)
        b0 = -(At.T_coeff(A.d - 1)[0, :] + u_low[0] * beta)
    else:
        dM = _derivative_at(At, c)
        b1 = -(dM[1:, 1:][0, :] + dM[1:, 0][0] * beta)
        b0 = beta - c * b1
    g1 = GaugeElement(np.eye(n), b1, b0)
    S = gauge_apply(g1, At)
    g = gauge_compose(g0, g1)

    residual = slice_residual(S, c)
    if residual > 1e-6 * max(1.0, S.norm()):
        raise NotInSlice(f"normal form missed the slice by {residual:.3e}")
    return NormalForm(S, g)


def _lie_basis(r: int) -> list[tuple[np.ndarray, int]]:
    """(constant matrix, x-degree) pairs spanning Lie G_r, canonical order.

    Order: E_ij for 2 <= i, j <= r row-major, then E_1j, then x E_1j.
    """
    out = []
    for i in range(1, r):
        for j in range(1, r):
            E = np.zeros((r, r), dtype=complex)
            E[i, j] = 1
            out.append((E, 0))
    for deg in (0, 1):
        for j in range(1, r):
            E = np.zeros((r, r), dtype=complex)
            E[0, j] = 1
            out.append((E, deg))
    return out


def orbit_tangent_basis(A: PolyMatrix) -> list[PolyMatrix]:
    """The fields [E, A(x)] for each basis element E of Lie G_r."""
    K = A.coeffs.shape[2]
    fields = []
    for E, deg in _lie_basis(A.r):
        comm = np.einsum("ab,bck->ack", E, A.coeffs) - np.einsum(
            "abk,bc->ack", A.coeffs, E
        )
        out = np.zeros((A.r, A.r, K + 2), dtype=complex)
        out[:, :, deg : deg + K] = comm
        fields.append(_shape_assemble(A.r, A.d, out))
    return fields


@dataclass(frozen=True)
class LieGaugeElement:
    """A tangent vector to G_r at the identity, in the canonical basis.

    ``coeffs[k]`` multiplies the k-th element of the basis E_ij
    (2 <= i, j <= r, row-major), E_1j, x E_1j; the length is
    (r-1)^2 + 2(r-1).
    """

    r: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        n = self.r - 1
        if coeffs.size != n * n + 2 * n:
            raise ValueError(f"expected {n * n + 2 * n} coefficients")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def field_at(self, A: PolyMatrix) -> PolyMatrix:
        """The infinitesimal action [Xi(x), A(x)] at A."""
        basis = orbit_tangent_basis(A)
        out = basis[0] * self.coeffs[0]
        for c, V in zip(self.coeffs[1:], basis[1:]):
            out = out + V * c
        return out


@dataclass(frozen=True)
class ThetaReport:
    """Per-point theta-divisor test over the fiber at one node."""

    node: object
    eigenvalues: tuple
    outside_theta: tuple
    dim_W: int


def theta_membership(A: PolyMatrix, a) -> ThetaReport:
    """Test, over each point of the fiber at a, whether the line bundle of A
    avoids the translated theta divisor.

    The per-eigenvalue flag is whether the (unit) eigenvector of the
    transposed fiber matrix has nonzero first entry; dim_W counts the common
    failures and equals r-1 minus the rank of the D-matrix at a.  Requires
    the fiber to be unramified.
    """
    if not is_unramified_over(char_poly(A), a):
        raise RamifiedPoint(f"fiber over {a!r} has a repeated eigenvalue")
    M = leading_matrix(A) if is_infinite(a) else eval_matrix(A, a)
    vals, vecs = np.linalg.eig(M.T)
    order = np.lexsort((vals.imag, vals.real))
    tol = config.get().theta_first_entry_tol
    eigenvalues = tuple(complex(vals[k]) for k in order)
    outside = tuple(bool(abs(vecs[0, k]) > tol) for k in order)
    sv = np.linalg.svd(d_matrix(A, a), compute_uv=False)
    rank = int(np.sum(sv > config.get().rank_svd_rel * sv[0])) if sv.size else 0
    return ThetaReport(a, eigenvalues, outside, (A.r - 1) - rank)


def theta_report_to_json(rep: ThetaReport) -> dict:
    node = "infinity" if is_infinite(rep.node) else [complex(rep.node).real, complex(rep.node).imag]
    return {
        "node": node,
        "eigenvalues": [[z.real, z.imag] for z in rep.eigenvalues],
        "outside_theta": list(rep.outside_theta),
        "dim_W": rep.dim_W,
    }
