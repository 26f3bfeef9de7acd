"""Isospectral vector fields and their integration.

The basic field attached to a node a and a power p is

    Ups_a^(p)(A) = (1/(x-a)) [A(a)^p, A(x)],

a polynomial matrix again: the commutator vanishes at x = a, so the
division is exact synthetic division.  Expanding in powers of a gives the
coefficient fields Y_j^(p), and restricting the dynamics to the slice at
infinity gives the projected fields F_a^(p), computed by solving a small
square linear system for the gauge compensation.  All of them preserve the
spectral coefficients; trajectories record the measured drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config
from .errors import (
    DivisionResidue,
    LinearSolveFailure,
    NotInSlice,
    SliceDeparture,
)
from .gauge import LieGaugeElement
from .polymat import PolyMatrix, eval_matrix, from_tensor, in_slice, slice_residual
from .spectral import char_poly

__all__ = [
    "FieldSpec",
    "Trajectory",
    "field_eval",
    "integrate",
    "lie_bracket_residual",
    "projected_field",
    "slice_tangency_residual",
    "trajectory_to_csv",
    "trajectory_to_json",
    "upsilon",
    "y_fields",
]


@dataclass(frozen=True)
class FieldSpec:
    """Names one vector field: upsilon(a, p), y_field(j, p) or projected(a, p)."""

    kind: str
    p: int
    a: complex | None = None
    j: int | None = None

    def __post_init__(self):
        if self.kind not in ("upsilon", "y_field", "projected"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.kind in ("upsilon", "projected") and self.a is None:
            raise ValueError(f"{self.kind} requires the node a")
        if self.kind == "y_field":
            if self.j is None or self.j < 0:
                raise ValueError("y_field requires an index j >= 0")


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step integration record.

    ``conservation_drift`` is the max over samples and spectral coefficients
    of the deviation from the initial value, relative to the initial
    coefficient scale.  ``slice_violation_max`` is tracked for projected
    fields and None otherwise.
    """

    samples: tuple
    conservation_drift: float
    slice_violation_max: float | None = None


def upsilon(A: PolyMatrix, a: complex, p: int) -> PolyMatrix:
    """(1/(x-a)) [A(a)^p, A(x)] by exact synthetic division."""
    if p < 1:
        raise ValueError("p must be at least 1")
    K = np.linalg.matrix_power(eval_matrix(A, a), p)
    comm = np.einsum("ab,bck->ack", K, A.coeffs) - np.einsum(
        "abk,bc->ack", A.coeffs, K
    )
    m = comm.shape[2] - 1
    q = np.zeros((A.r, A.r, m), dtype=complex)
    q[:, :, m - 1] = comm[:, :, m]
    for k in range(m - 1, 0, -1):
        q[:, :, k - 1] = comm[:, :, k] + a * q[:, :, k]
    rem = comm[:, :, 0] + a * q[:, :, 0]
    scale = max(1.0, float(np.abs(comm).max()))
    if np.abs(rem).max() > config.get().division_residue_tol * scale:
        raise DivisionResidue(
            f"commutator does not vanish at x = {a!r}: |rem| = {np.abs(rem).max():.3e}"
        )
    out = np.zeros((A.r, A.r, A.d + 2), dtype=complex)
    out[:, :, :m] = q
    return from_tensor(A.r, A.d, out)


def y_fields(A: PolyMatrix, p: int) -> list[PolyMatrix]:
    """Coefficient fields Y_j^(p), j = 0..pd, with sum a^j Y_j = Ups_a^(p).

    Extracted from values of upsilon on a scaled root-of-unity grid by an
    inverse FFT (the Vandermonde system of that grid).
    """
    n = p * A.d + 1
    radius = config.get().node_radius
    nodes = radius * np.exp(-2j * np.pi * np.arange(n) / n)
    values = np.stack([upsilon(A, t, p).coeffs for t in nodes])
    coeffs = np.fft.ifft(values, axis=0)
    return [
        from_tensor(A.r, A.d, coeffs[j] / radius**j) for j in range(n)
    ]


def projected_field(A: PolyMatrix, a: complex, p: int) -> PolyMatrix:
    """The restriction of Ups_a^(p) to the slice at infinity.

    The compensating tangent direction along the gauge orbit is
    [G0 + x G1, A] with G0 = [[0, tbeta], [0, C]], G1 = [[0, tgamma], [0, 0]];
    (C, gamma, beta) solve, with nu, tau the slice constants and
    A(a)^p = [[*, *], [h, J]],

        C nu = (tau - v_d I) h,
        nu tgamma - [C, tau] = h tw_{d+1},
        (nu tbeta + u_{d-2} tgamma - C T_{d-1})[first row]
            = (h (tw_d + a tw_{d+1}) + J tau)[first row].

    The system is square of size (r-1)^2 + 2(r-1) and has a unique solution.
    """
    if not in_slice(A):
        raise NotInSlice(f"residual {slice_residual(A):.3e} at infinity")
    if p < 1:
        raise ValueError("p must be at least 1")
    n = A.r - 1
    d = A.d
    Map = np.linalg.matrix_power(eval_matrix(A, a), p)
    h = Map[1:, 0]
    J = Map[1:, 1:]
    v_d = A.v_coeff(d)
    w_d1 = A.w_coeff(d + 1)
    w_d = A.w_coeff(d)
    u_low = A.u_coeff(d - 2) if d >= 2 else np.zeros(n, dtype=complex)
    T_low = A.T_coeff(d - 1)
    tau = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        tau[i, i - 1] = 1

    dim = n * n + 2 * n
    M = np.zeros((dim, dim), dtype=complex)
    rhs = np.zeros(dim, dtype=complex)
    def c_idx(i: int, j: int) -> int:
        return i * n + j

    def g_idx(j: int) -> int:
        return n * n + j

    def b_idx(j: int) -> int:
        return n * n + n + j

    row = 0
    # C nu = (tau - v_d I) h: nu = e1 picks the first column of C
    lhs1 = (tau - v_d * np.eye(n)) @ h
    for i in range(n):
        M[row, c_idx(i, 0)] = 1
        rhs[row] = lhs1[i]
        row += 1
    # nu tgamma - [C, tau] = h tw_{d+1}, all (i, j) entries
    for i in range(n):
        for j in range(n):
            if i == 0:
                M[row, g_idx(j)] += 1
            if j + 1 < n:
                M[row, c_idx(i, j + 1)] -= 1  # -(C tau)_{ i j }
            if i >= 1:
                M[row, c_idx(i - 1, j)] += 1  # +(tau C)_{ i j }
            rhs[row] = h[i] * w_d1[j]
            row += 1
    # first-row entries of nu tbeta + u_{d-2} tgamma - C T_{d-1}
    for i in range(n):
        M[row, b_idx(i)] += 1
        M[row, g_idx(i)] += u_low[0]
        for k in range(n):
            M[row, c_idx(0, k)] -= T_low[k, i]
        rhs[row] = h[0] * (w_d[i] + a * w_d1[i]) + (J @ tau)[0, i]
        row += 1

    try:
        xi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveFailure(str(exc)) from exc
    residual = float(np.linalg.norm(M @ xi - rhs))
    if residual > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
        raise LinearSolveFailure(f"projection system residual {residual:.3e}")

    C = xi[: n * n].reshape(n, n)
    gamma = xi[n * n : n * n + n]
    beta = xi[n * n + n :]
    compensation = LieGaugeElement(A.r, np.concatenate([C.ravel(), beta, gamma]))
    return upsilon(A, a, p) + compensation.field_at(A)


def slice_tangency_residual(F: PolyMatrix) -> float:
    """Max magnitude of the coefficients a tangent to the infinity slice pins."""
    d = F.d
    return float(
        max(
            np.abs(F.T_coeff(d)).max(),
            np.abs(F.u_coeff(d - 1)).max(),
            np.abs(F.T_coeff(d - 1)[0]).max(),
        )
    )


def field_eval(A: PolyMatrix, spec: FieldSpec) -> PolyMatrix:
    """Evaluate the named field at A."""
    if spec.kind == "upsilon":
        return upsilon(A, spec.a, spec.p)
    if spec.kind == "projected":
        return projected_field(A, spec.a, spec.p)
    fields = y_fields(A, spec.p)
    if spec.j >= len(fields):
        raise ValueError(f"y_field index {spec.j} exceeds pd = {len(fields) - 1}")
    return fields[spec.j]


def _spectral_coefficients(A: PolyMatrix) -> np.ndarray:
    P = char_poly(A)
    out = []
    for i, p in enumerate(P.s, start=1):
        padded = np.zeros(A.d * i + 1, dtype=complex)
        padded[: p.coeffs.size] = p.coeffs
        out.append(padded)
    return np.concatenate(out)


def integrate(A0: PolyMatrix, field: FieldSpec, t_end: float, dt: float) -> Trajectory:
    """Fixed-step RK4 from 0 to t_end, recording conservation drift.

    For projected fields the slice residual is tracked each step and
    integration aborts (SliceDeparture) beyond the configured threshold.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = max(1, int(round(abs(t_end) / dt))) if t_end != 0 else 0
    h = t_end / steps if steps else 0.0
    track_slice = field.kind == "projected"

    s0 = _spectral_coefficients(A0)
    scale = max(1.0, float(np.abs(s0).max()))
    abort = config.get().slice_abort

    A = A0
    samples = [(0.0, A0)]
    drift = 0.0
    slice_max = slice_residual(A0) if track_slice else None
    for k in range(steps):
        k1 = field_eval(A, field)
        k2 = field_eval(A + (h / 2) * k1, field)
        k3 = field_eval(A + (h / 2) * k2, field)
        k4 = field_eval(A + h * k3, field)
        A = A + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (k + 1) * h
        samples.append((t, A))
        drift = max(drift, float(np.abs(_spectral_coefficients(A) - s0).max()) / scale)
        if track_slice:
            violation = slice_residual(A)
            slice_max = max(slice_max, violation)
            if violation > abort:
                raise SliceDeparture(
                    f"slice residual {violation:.3e} at t = {t:.6g}"
                )
    return Trajectory(tuple(samples), drift, slice_max)


def lie_bracket_residual(A: PolyMatrix, f1: FieldSpec, f2: FieldSpec) -> float:
    """Norm of [f1, f2] at A via central finite differences.

    The bracket is Df2(A)[f1(A)] - Df1(A)[f2(A)]; each directional
    derivative uses a central difference with the configured step, which is
    well-conditioned because the fields are polynomial in the coefficients.
    """
    h = config.get().fd_step
    V1 = field_eval(A, f1)
    V2 = field_eval(A, f2)

    def directional(spec: FieldSpec, V: PolyMatrix) -> PolyMatrix:
        fwd = field_eval(A + h * V, spec)
        bwd = field_eval(A + (-h) * V, spec)
        return (1.0 / (2 * h)) * (fwd - bwd)

    return (directional(f2, V1) - directional(f1, V2)).norm()


def trajectory_to_json(traj: Trajectory, stride: int = 0) -> dict:
    """Times and per-sample drift; full snapshots every ``stride`` samples.

    stride = 0 omits snapshots entirely.
    """
    from .polymat import to_json

    s0 = _spectral_coefficients(traj.samples[0][1])
    scale = max(1.0, float(np.abs(s0).max()))
    rows = []
    snapshots = []
    for k, (t, A) in enumerate(traj.samples):
        d = float(np.abs(_spectral_coefficients(A) - s0).max()) / scale
        rows.append({"time": t, "drift": d})
        if stride and k % stride == 0:
            snapshots.append({"time": t, "matrix": to_json(A)})
    out = {
        "samples": rows,
        "conservation_drift": traj.conservation_drift,
    }
    if traj.slice_violation_max is not None:
        out["slice_violation_max"] = traj.slice_violation_max
    if snapshots:
        out["snapshots"] = snapshots
    return out


def trajectory_to_csv(traj: Trajectory) -> str:
    s0 = _spectral_coefficients(traj.samples[0][1])
    scale = max(1.0, float(np.abs(s0).max()))
    lines = ["time,drift"]
    for t, A in traj.samples:
        d = float(np.abs(_spectral_coefficients(A) - s0).max()) / scale
        lines.append(f"{t},{d}")
    return "\n".join(lines) + "\n"
