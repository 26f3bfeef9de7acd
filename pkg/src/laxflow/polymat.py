"""Complex polynomials and degree-shaped polynomial matrices.

The ambient space M(r,d) consists of r x r matrices A(x) of complex
polynomials whose entry degrees obey

    deg A[1][1] <= d,    deg A[1][j] <= d+1  (j >= 2),
    deg A[i][1] <= d-1,  deg A[i][j] <= d    (i, j >= 2),

written in 1-based positions.  Coefficients are stored low degree first in a
dense (r, r, d+2) tensor; slots above an entry's bound are identically zero.
The block decomposition

    A(x) = [[v(x), tw(x)], [u(x), T(x)]]

with v scalar, w and u vectors of length r-1 and T of size (r-1) x (r-1) is
exposed through :class:`BlockView` and the ``*_coeff`` accessors.

All values are immutable after construction and every operation is a pure
function, so objects can be shared freely between threads.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from . import config
from .errors import ParseError, ShapeViolation

__all__ = [
    "INFINITY",
    "BlockView",
    "Poly",
    "PolyMatrix",
    "degree_bound",
    "eval_matrix",
    "from_json",
    "from_tensor",
    "in_slice",
    "is_infinite",
    "leading_matrix",
    "make_polymatrix",
    "random_sample",
    "slice_nu",
    "slice_residual",
    "slice_tau",
    "to_json",
]

INFINITY = float("inf")


def is_infinite(c) -> bool:
    """True if the node c denotes the point at infinity."""
    if isinstance(c, complex):
        return cmath.isinf(c)
    return isinstance(c, float) and math.isinf(c)


class Poly:
    """A complex-coefficient polynomial, low degree first.

    Trailing exact zeros are canonicalized away on construction; equality
    additionally ignores trailing coefficients below the configured
    tolerance.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex] = (0,)):
        arr = np.atleast_1d(np.asarray(list(coeffs), dtype=complex))
        nz = np.nonzero(arr)[0]
        arr = arr[: nz[-1] + 1] if nz.size else arr[:1]
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @property
    def degree(self) -> int:
        """Degree of the stored coefficients; the zero polynomial has -1."""
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    def trim(self, tol: float | None = None) -> "Poly":
        """Drop trailing coefficients of magnitude <= tol."""
        tol = config.get().poly_eq_tol if tol is None else tol
        keep = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if keep.size == 0:
            return Poly([0])
        return Poly(self.coeffs[: keep[-1] + 1])

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[k]) if k < self.coeffs.size else 0j

    def __call__(self, x: complex) -> complex:
        return complex(npp.polyval(x, self.coeffs))

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(npp.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly(npp.polysub(self.coeffs, other.coeffs))

    def __neg__(self) -> "Poly":
        return Poly(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polymul(self.coeffs, other.coeffs))
        return Poly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def deriv(self) -> "Poly":
        return Poly(npp.polyder(self.coeffs))

    def taylor_at(self, c: complex) -> "Poly":
        """Coefficients q with p(x) = sum q_k (x-c)^k."""
        comp = np.polynomial.Polynomial(self.coeffs)(
            np.polynomial.Polynomial([c, 1])
        )
        return Poly(comp.coef)

    def almost_equal(self, other: "Poly", tol: float | None = None) -> bool:
        tol = config.get().poly_eq_tol if tol is None else tol
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.pad(self.coeffs, (0, n - self.coeffs.size))
        b = np.pad(other.coeffs, (0, n - other.coeffs.size))
        return bool(np.all(np.abs(a - b) <= tol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.almost_equal(other)

    def __hash__(self):
        raise TypeError("Poly equality is tolerance-based; not hashable")

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)})"


def degree_bound(r: int, d: int, i: int, j: int) -> int:
    """Degree bound of entry (i, j), 0-based indices."""
    return d - (1 if i > 0 else 0) + (1 if j > 0 else 0)


def _bounds_grid(r: int, d: int) -> np.ndarray:
    mu = np.zeros(r, dtype=int)
    mu[1:] = 1
    return d - mu[:, None] + mu[None, :]


@dataclass(frozen=True)
class PolyMatrix:
    """A validated point (or tangent vector) of M(r,d).

    ``coeffs[i, j, k]`` is the x^k coefficient of entry (i, j).  The tensor
    has d+2 coefficient slots; construction zeroes nothing and callers must
    go through :func:`make_polymatrix` or the arithmetic below, which keep
    the shape bounds by closure.
    """

    r: int
    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    def entry(self, i: int, j: int) -> Poly:
        return Poly(self.coeffs[i, j])

    # block coefficient accessors; k is the x-degree
    def v_coeff(self, k: int) -> complex:
        return complex(self.coeffs[0, 0, k]) if k < self.coeffs.shape[2] else 0j

    def w_coeff(self, k: int) -> np.ndarray:
        return np.array(self.coeffs[0, 1:, k])

    def u_coeff(self, k: int) -> np.ndarray:
        return np.array(self.coeffs[1:, 0, k])

    def T_coeff(self, k: int) -> np.ndarray:
        return np.array(self.coeffs[1:, 1:, k])

    def block(self) -> "BlockView":
        w = tuple(Poly(self.coeffs[0, j]) for j in range(1, self.r))
        u = tuple(Poly(self.coeffs[i, 0]) for i in range(1, self.r))
        T = tuple(
            tuple(Poly(self.coeffs[i, j]) for j in range(1, self.r))
            for i in range(1, self.r)
        )
        return BlockView(self.r, self.d, Poly(self.coeffs[0, 0]), w, u, T)

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(self.r, self.d, self.coeffs + other.coeffs)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(self.r, self.d, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "PolyMatrix":
        return PolyMatrix(self.r, self.d, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix(self.r, self.d, -self.coeffs)

    def norm(self) -> float:
        """Coefficient-wise L2 norm."""
        return float(np.linalg.norm(self.coeffs))

    def almost_equal(self, other: "PolyMatrix", tol: float | None = None) -> bool:
        tol = config.get().poly_eq_tol if tol is None else tol
        if (self.r, self.d) != (other.r, other.d):
            return False
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= tol))


@dataclass(frozen=True)
class BlockView:
    """The (v, w, u, T) block decomposition of a PolyMatrix."""

    r: int
    d: int
    v: Poly
    w: tuple
    u: tuple
    T: tuple

    def assemble(self) -> PolyMatrix:
        """Rebuild the PolyMatrix; exact inverse of PolyMatrix.block()."""
        entries = [[None] * self.r for _ in range(self.r)]
        entries[0][0] = list(self.v.coeffs)
        for j in range(1, self.r):
            entries[0][j] = list(self.w[j - 1].coeffs)
        for i in range(1, self.r):
            entries[i][0] = list(self.u[i - 1].coeffs)
            for j in range(1, self.r):
                entries[i][j] = list(self.T[i - 1][j - 1].coeffs)
        return make_polymatrix(self.r, self.d, entries)

    def v_k(self, k: int) -> complex:
        return self.v.coeff(k)

    def w_k(self, k: int) -> np.ndarray:
        return np.array([p.coeff(k) for p in self.w])

    def u_k(self, k: int) -> np.ndarray:
        return np.array([p.coeff(k) for p in self.u])

    def T_k(self, k: int) -> np.ndarray:
        return np.array([[p.coeff(k) for p in row] for row in self.T])


def make_polymatrix(r: int, d: int, entries: Sequence[Sequence[Sequence[complex]]]) -> PolyMatrix:
    """Validate nested coefficient lists against the M(r,d) degree shape.

    Parameters
    ----------
    r, d : int
        Matrix size (>= 2) and degree parameter (>= 1).
    entries : nested sequences
        ``entries[i][j]`` is the coefficient list (low degree first) of
        entry (i, j).  Entries may be shorter than their bound.

    Raises
    ------
    ShapeViolation
        If any entry carries a nonzero coefficient above its bound.
    ValueError
        If r < 2, d < 1 or the grid is not r x r.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    if d < 1:
        raise ValueError("d must be at least 1")
    if len(entries) != r or any(len(row) != r for row in entries):
        raise ValueError(f"entries must form an {r} x {r} grid")
    coeffs = np.zeros((r, r, d + 2), dtype=complex)
    for i in range(r):
        for j in range(r):
            p = Poly(entries[i][j])
            bound = degree_bound(r, d, i, j)
            if p.degree > bound:
                raise ShapeViolation((i + 1, j + 1), p.degree, bound)
            coeffs[i, j, : p.coeffs.size] = p.coeffs
    return PolyMatrix(r, d, coeffs)


def from_tensor(r: int, d: int, coeffs: np.ndarray, tol: float | None = None) -> PolyMatrix:
    """Build a PolyMatrix from a raw (r, r, d+2) tensor.

    Coefficients above an entry's bound must be below tol; they are zeroed.
    """
    tol = config.get().poly_eq_tol if tol is None else tol
    coeffs = np.array(coeffs, dtype=complex)
    bounds = _bounds_grid(r, d)
    for i in range(r):
        for j in range(r):
            tail = coeffs[i, j, bounds[i, j] + 1 :]
            overflow = np.abs(tail)
            if overflow.size and overflow.max() > tol:
                k = int(bounds[i, j] + 1 + overflow.argmax())
                raise ShapeViolation((i + 1, j + 1), k, int(bounds[i, j]))
            coeffs[i, j, bounds[i, j] + 1 :] = 0
    return PolyMatrix(r, d, coeffs)


def eval_matrix(A: PolyMatrix, x: complex) -> np.ndarray:
    """Entrywise evaluation A(x) as a dense complex matrix."""
    out = np.array(A.coeffs[:, :, -1])
    for k in range(A.coeffs.shape[2] - 2, -1, -1):
        out = out * x + A.coeffs[:, :, k]
    return out


def leading_matrix(A: PolyMatrix) -> np.ndarray:
    """A(infinity): each entry's coefficient at its shape-maximal degree."""
    bounds = _bounds_grid(A.r, A.d)
    out = np.empty((A.r, A.r), dtype=complex)
    for i in range(A.r):
        for j in range(A.r):
            out[i, j] = A.coeffs[i, j, bounds[i, j]]
    return out


def to_json(A: PolyMatrix) -> dict:
    """Serialize to {"r", "d", "entries"} with [re, im] coefficient pairs.

    Each entry is emitted at its full bound length, so the layout is a
    deterministic function of (r, d) and round trips bit-exactly.
    """
    entries = []
    for i in range(A.r):
        row = []
        for j in range(A.r):
            bound = degree_bound(A.r, A.d, i, j)
            row.append(
                [[c.real, c.imag] for c in (A.coeffs[i, j, k] for k in range(bound + 1))]
            )
        entries.append(row)
    return {"r": A.r, "d": A.d, "entries": entries}


def from_json(obj) -> PolyMatrix:
    """Parse the JSON form (dict or string) back into a PolyMatrix."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    try:
        r, d, entries = obj["r"], obj["d"], obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field: {exc}") from exc
    if not isinstance(r, int) or not isinstance(d, int):
        raise ParseError("r and d must be integers")
    try:
        grid = [
            [[complex(re, im) for re, im in entry] for entry in row]
            for row in entries
        ]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed entries: {exc}") from exc
    try:
        return make_polymatrix(r, d, grid)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def slice_tau(r: int) -> np.ndarray:
    """The (r-1) x (r-1) lower-shift matrix pinning T at the marked point."""
    n = r - 1
    tau = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        tau[i, i - 1] = 1
    return tau


def slice_nu(r: int) -> np.ndarray:
    """The marked u-vector (1, 0, ..., 0) of length r-1."""
    nu = np.zeros(r - 1, dtype=complex)
    nu[0] = 1
    return nu


def slice_residual(A: PolyMatrix, c=INFINITY) -> float:
    """Max constraint violation of the slice at node c.

    At c = infinity the constraints are T_d = tau, u_{d-1} = nu and a zero
    first row of T_{d-1}; at finite c they are T(c) = tau, u(c) = nu and a
    zero first row of the (x-c)^1 coefficient of T.
    """
    tau = slice_tau(A.r)
    nu = slice_nu(A.r)
    if is_infinite(c):
        t_top = A.T_coeff(A.d)
        u_top = A.u_coeff(A.d - 1)
        t_row = A.T_coeff(A.d - 1)[0]
    else:
        M = eval_matrix(A, c)
        t_top = M[1:, 1:]
        u_top = M[1:, 0]
        # (x-c)^1 coefficient of T equals the first derivative at c
        dM = _derivative_at(A, c)
        t_row = dM[1:, 1:][0]
    return float(
        max(
            np.max(np.abs(t_top - tau)),
            np.max(np.abs(u_top - nu)),
            np.max(np.abs(t_row)) if t_row.size else 0.0,
        )
    )


def _derivative_at(A: PolyMatrix, c: complex) -> np.ndarray:
    K = A.coeffs.shape[2]
    out = np.zeros((A.r, A.r), dtype=complex)
    for k in range(K - 1, 0, -1):
        out = out * c + k * A.coeffs[:, :, k]
    return out


def in_slice(A: PolyMatrix, c=INFINITY, tol: float | None = None) -> bool:
    tol = config.get().slice_tol if tol is None else tol
    return slice_residual(A, c) <= tol


def _normalize_slice_name(name: str) -> str:
    key = name.lower().replace("-", "_")
    if key in ("full",):
        return "full"
    if key in ("s_infinity", "s_inf", "sinfinity", "infinity"):
        return "s_infinity"
    if key in ("s_c", "sc"):
        return "s_c"
    raise ValueError(f"unknown slice {name!r}")


def random_sample(r: int, d: int, seed: int, slice_name: str = "full", c: complex | None = None) -> PolyMatrix:
    """Draw a random element of M(r,d), optionally restricted to a slice.

    Coefficients have real and imaginary parts i.i.d. uniform on [-1, 1];
    the output is a deterministic function of the seed.  ``slice_name`` is
    one of ``full``, ``s_infinity`` or ``s_c`` (the latter requires c).  On
    a slice the pinned coefficients are overwritten after sampling; for s_c
    the draw is interpreted in the (x-c) basis, whose degree bounds agree
    with the standard one, and transformed back.
    """
    kind = _normalize_slice_name(slice_name)
    if kind == "s_c" and c is None:
        raise ValueError("slice s_c requires the node c")
    rng = np.random.default_rng(seed)
    shape = (r, r, d + 2)
    coeffs = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    bounds = _bounds_grid(r, d)
    for i in range(r):
        for j in range(r):
            coeffs[i, j, bounds[i, j] + 1 :] = 0

    if kind == "full":
        return PolyMatrix(r, d, coeffs)

    tau = slice_tau(r)
    nu = slice_nu(r)
    if kind == "s_infinity":
        coeffs[1:, 1:, d] = tau
        coeffs[1:, 0, d - 1] = nu
        coeffs[1:, 1:, d - 1][0, :] = 0
        return PolyMatrix(r, d, coeffs)

    # s_c: the draw is read as (x-c)-basis coefficients q_k, where the same
    # three families pin the (x-c)^0 and (x-c)^1 blocks, then mapped back
    # through p(x) = sum_k q_k (x-c)^k.
    coeffs[1:, 0, 0] = nu
    coeffs[1:, 1:, 0] = tau
    coeffs[1:, 1:, 1][0, :] = 0
    out = np.zeros_like(coeffs)
    base = np.array([1.0 + 0j])
    for k in range(coeffs.shape[2]):
        out[:, :, : base.size] += coeffs[:, :, k, None] * base
        base = npp.polymul(base, np.array([-c, 1.0 + 0j]))
    return from_tensor(r, d, out)
