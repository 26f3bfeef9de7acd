"""Separation of variables: slice points to degree-g divisors on the curve.

For A on the slice at infinity, det D(A(x); x) is monic of degree g and its
simple roots x_1, ..., x_g are the divisor supports.  Each y_i is the
eigenvalue of the transposed T(x_i) singled out by the Krylov determinant
ratio

    y_i = det(T nu, u, T u, ..., T^{r-3} u) / det(nu, u, T u, ..., T^{r-3} u)

at x = x_i, independent of the probe vector nu.  For r = 2 both
determinant lists are empty and the classical specialization applies: the
x_i are the zeros of u(x) and y_i = t(x_i).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npp

from . import config
from .errors import (
    MultipleRoot,
    NotInMc,
    NotInSlice,
    NuNotFound,
    ParseError,
    RamifiedPoint,
    ZeroDenominator,
)
from .flows import upsilon
from .gauge import LieGaugeElement, d_poly, in_Mc, theta_membership
from .polymat import INFINITY, PolyMatrix, eval_matrix, in_slice, slice_residual
from .spectral import curve_eval, char_poly, genus, is_unramified_over

__all__ = [
    "Divisor",
    "divisor_from_json",
    "divisor_to_json",
    "even_mumford_field",
    "r3_y_formulas",
    "sov_divisor",
    "theta_complement_check",
]


@dataclass(frozen=True)
class Divisor:
    """g on-curve points with their defining-polynomial residuals."""

    points: tuple
    residuals: tuple


def _krylov_columns(T: np.ndarray, u: np.ndarray, count: int) -> list[np.ndarray]:
    cols = []
    col = u
    for _ in range(count):
        cols.append(col)
        col = T @ col
    return cols


def _y_at_root(T: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> complex:
    """The separated eigenvalue at one root, retrying the probe vector."""
    n = T.shape[0]
    tol = config.get().zero_denominator_tol
    scale = max(1.0, float(np.abs(T).max()), float(np.abs(u).max()))
    candidates = [np.eye(n, dtype=complex)[:, 0]]
    candidates += [
        rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n) for _ in range(16)
    ]
    krylov = _krylov_columns(T, u, n - 1)
    for nu in candidates:
        den = np.linalg.det(np.column_stack([nu, *krylov]))
        if abs(den) > tol * scale ** (n - 1):
            num = np.linalg.det(np.column_stack([T @ nu, *krylov]))
            return complex(num / den)
    raise NuNotFound("no probe vector separates the eigenvalue at this root")


def sov_divisor(A: PolyMatrix) -> Divisor:
    """The degree-g divisor of a slice point.

    Roots of det D(A(x); x) must be simple and the fibers over them
    unramified; the probe vector starts at (1, 0, ..., 0) and falls back to
    seeded random draws per root.
    """
    if not in_slice(A):
        raise NotInSlice(f"residual {slice_residual(A):.3e} at infinity")
    g = genus(A.r, A.d)
    P = char_poly(A)
    D = d_poly(A)
    roots = np.asarray(npp.polyroots(D.coeffs)) if D.degree > 0 else np.array([])
    if roots.size != g:
        raise MultipleRoot(
            f"det D has degree {D.degree}, expected {g} simple roots"
        )
    root_scale = max(1.0, float(np.abs(roots).max()) if roots.size else 1.0)
    if roots.size > 1:
        diffs = np.abs(roots[:, None] - roots[None, :])
        diffs[np.diag_indices_from(diffs)] = np.inf
        if diffs.min() <= config.get().simple_root_rel * root_scale:
            raise MultipleRoot(f"root separation {diffs.min():.3e}")

    rng = np.random.default_rng(2024)
    points = []
    residuals = []
    for x in roots:
        x = complex(x)
        if not is_unramified_over(P, x):
            raise RamifiedPoint(f"fiber over divisor root {x!r} is ramified")
        M = eval_matrix(A, x)
        T, u = M[1:, 1:], M[1:, 0]
        if A.r == 2:
            y = complex(T[0, 0])
        else:
            y = _y_at_root(T, u, rng)
        points.append((x, y))
        residuals.append(abs(curve_eval(P, x, y)))
    return Divisor(tuple(points), tuple(residuals))


def r3_y_formulas(A: PolyMatrix, x: complex) -> tuple[complex, complex]:
    """The two closed-form separated eigenvalues for r = 3.

    First formula: (u2 T11 - u1 T21) / u2; second: (u1 T22 - u2 T12) / u1,
    entries evaluated at x.  They agree at the roots of det D.
    """
    if A.r != 3:
        raise ValueError("closed forms require r = 3")
    M = eval_matrix(A, x)
    T, u = M[1:, 1:], M[1:, 0]
    tol = config.get().zero_denominator_tol
    scale = max(1.0, float(np.abs(M).max()))
    if abs(u[1]) < tol * scale:
        raise ZeroDenominator("u2 vanishes at x")
    first = (u[1] * T[0, 0] - u[0] * T[1, 0]) / u[1]
    if abs(u[0]) < tol * scale:
        raise ZeroDenominator("u1 vanishes at x")
    second = (u[0] * T[1, 1] - u[1] * T[0, 1]) / u[0]
    return complex(first), complex(second)


def even_mumford_field(A: PolyMatrix, a: complex) -> PolyMatrix:
    """The r = 2 projected field in closed form.

    F = Ups_a^(1)(A) + [u(a) [[0, (x + a - u_{d-2}) w_{d+1} + w_d],
    [0, -v_d]], A(x)]; agrees with the general projection.
    """
    if A.r != 2:
        raise ValueError("closed form requires r = 2")
    if not in_slice(A):
        raise NotInSlice(f"residual {slice_residual(A):.3e} at infinity")
    d = A.d
    u_a = complex(eval_matrix(A, a)[1, 0])
    w_top = complex(A.w_coeff(d + 1)[0])
    w_d = complex(A.w_coeff(d)[0])
    u_low = complex(A.u_coeff(d - 2)[0]) if d >= 2 else 0j
    v_d = A.v_coeff(d)
    # canonical Lie basis order: C entries, then E_1j, then x E_1j
    compensation = LieGaugeElement(
        2,
        np.array(
            [
                -v_d * u_a,
                u_a * ((a - u_low) * w_top + w_d),
                u_a * w_top,
            ]
        ),
    )
    return upsilon(A, a, 1) + compensation.field_at(A)


def theta_complement_check(A: PolyMatrix, c=INFINITY) -> bool:
    """Whether the orbit of A avoids every translated theta divisor over c.

    Requires A in M_c and an unramified fiber; returns True iff all r
    per-eigenvalue flags are set.
    """
    if not in_Mc(A, c):
        raise NotInMc(f"det D(A; {c!r}) is below tolerance")
    report = theta_membership(A, c)
    return all(report.outside_theta)


def divisor_to_json(div: Divisor) -> dict:
    return {
        "points": [[x.real, x.imag, y.real, y.imag] for x, y in div.points],
        "residuals": list(div.residuals),
    }


def divisor_from_json(obj) -> Divisor:
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        points = tuple(
            (complex(xr, xi), complex(yr, yi)) for xr, xi, yr, yi in obj["points"]
        )
        residuals = tuple(float(v) for v in obj["residuals"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed divisor: {exc}") from exc
    return Divisor(points, residuals)
