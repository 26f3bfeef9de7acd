"""Spectral curves: characteristic polynomial, genus, charts, ramification.

A matrix A(x) in M(r,d) determines the plane curve

    P(x, y) = det(y I - A(x)) = y^r + s_1(x) y^{r-1} + ... + s_r(x),

with deg s_i <= d*i.  The curve is compactified by gluing in a second chart
through (x, y) = (1/z, w/z^d), where the defining polynomial becomes
z^{dr} P(1/z, w/z^d); both charts are supported here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npp

from . import config
from .errors import ParseError, ShapeViolation
from .polymat import INFINITY, Poly, PolyMatrix, is_infinite

__all__ = [
    "CurveReport",
    "SpectralCurve",
    "char_poly",
    "curve_eval",
    "curve_from_json",
    "curve_to_json",
    "fiber_polynomial",
    "genus",
    "is_unramified_over",
    "smoothness_check",
]


@dataclass(frozen=True)
class SpectralCurve:
    """Coefficients s_1 ... s_r of the defining polynomial, validated."""

    r: int
    d: int
    s: tuple

    def __post_init__(self):
        if len(self.s) != self.r:
            raise ValueError(f"expected {self.r} coefficient polynomials")
        tol = config.get().poly_eq_tol
        trimmed = []
        for i, p in enumerate(self.s, start=1):
            p = p if isinstance(p, Poly) else Poly(p)
            p = p.trim(tol)
            if p.degree > self.d * i:
                raise ShapeViolation(("s", i), p.degree, self.d * i)
            trimmed.append(p)
        object.__setattr__(self, "s", tuple(trimmed))


@dataclass(frozen=True)
class CurveReport:
    genus: int
    unramified_nodes_checked: tuple
    smooth_heuristic: bool
    discriminant_min_separation: float


def genus(r: int, d: int) -> int:
    """(r-1)(rd-2)/2, always an exact integer for r >= 2, d >= 1."""
    if r < 2 or d < 1:
        raise ValueError("need r >= 2 and d >= 1")
    return (r - 1) * (r * d - 2) // 2


def _poly_matmul(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Product of two (r, r, *) coefficient tensors."""
    r = P.shape[0]
    out = np.zeros((r, r, P.shape[2] + Q.shape[2] - 1), dtype=complex)
    for i in range(r):
        for j in range(r):
            acc = np.zeros(out.shape[2], dtype=complex)
            for k in range(r):
                prod = np.convolve(P[i, k], Q[k, j])
                acc[: prod.size] += prod
            out[i, j] = acc
    return out


def char_poly(A: PolyMatrix) -> SpectralCurve:
    """The spectral map: s_1 ... s_r from the power traces of A(x).

    Power sums t_k(x) = tr A(x)^k are converted to the elementary-symmetric
    data by Newton's identities,

        e_0 = 1,  e_k = (1/k) sum_{i=1}^{k} (-1)^{i-1} e_{k-i} t_i,

    and s_k = (-1)^k e_k.  Every degree bound deg s_k <= d*k holds term by
    term, so no cancellation is involved.
    """
    power = A.coeffs
    traces = []
    for _ in range(A.r):
        traces.append(np.trace(power, axis1=0, axis2=1))
        if len(traces) < A.r:
            power = _poly_matmul(power, A.coeffs)
    e: list[np.ndarray] = [np.array([1.0 + 0j])]
    for k in range(1, A.r + 1):
        acc = np.zeros(1, dtype=complex)
        for i in range(1, k + 1):
            term = npp.polymul(e[k - i], traces[i - 1])
            acc = npp.polyadd(acc, ((-1) ** (i - 1)) * term)
        e.append(acc / k)
    s = [((-1) ** k) * e[k] for k in range(1, A.r + 1)]
    return SpectralCurve(A.r, A.d, tuple(Poly(c) for c in s))


def curve_eval(P: SpectralCurve, x: complex, y: complex, chart: str = "affine") -> complex:
    """Evaluate the defining polynomial at a point of the chosen chart.

    In the infinity chart the arguments are read as (z, w) and the value is
    z^{dr} P(1/z, w/z^d) in its polynomial form, defined for all z.
    """
    if chart == "affine":
        out = complex(1)
        for p in P.s:
            out = out * y + p(x)
        return out
    if chart == "infinity":
        out = complex(1)
        for i, p in enumerate(P.s, start=1):
            rev = np.zeros(P.d * i + 1, dtype=complex)
            rev[: p.coeffs.size] = p.coeffs
            out = out * y + complex(npp.polyval(x, rev[::-1]))
        return out
    raise ValueError(f"unknown chart {chart!r}")


def fiber_polynomial(P: SpectralCurve, a) -> np.ndarray:
    """Monic degree-r polynomial (low first) cutting out the fiber over a.

    Over infinity this is the w-polynomial of the second chart at z = 0,
    whose coefficients are the top coefficients of the s_i.
    """
    coeffs = np.zeros(P.r + 1, dtype=complex)
    coeffs[P.r] = 1
    for i, p in enumerate(P.s, start=1):
        coeffs[P.r - i] = p.coeff(P.d * i) if is_infinite(a) else p(a)
    return coeffs


def _min_separation(roots: np.ndarray) -> float:
    if roots.size < 2:
        return float("inf")
    diffs = np.abs(roots[:, None] - roots[None, :])
    diffs[np.diag_indices_from(diffs)] = np.inf
    return float(diffs.min())


def is_unramified_over(P: SpectralCurve, a) -> bool:
    """True iff the fiber polynomial over a has r well-separated roots."""
    roots = npp.polyroots(fiber_polynomial(P, a))
    scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    return _min_separation(np.asarray(roots)) > config.get().root_separation_rel * scale


def _interpolated_determinant(rows_of, size: int, degree: int) -> np.ndarray:
    """Coefficients of a degree-bounded determinant by circle interpolation.

    ``rows_of(t)`` returns the size x size numeric matrix at x = t; the
    determinant, a polynomial of degree <= ``degree``, is recovered from
    values on a scaled root-of-unity grid by an inverse FFT.
    """
    n = degree + 1
    radius = 1.2
    nodes = radius * np.exp(-2j * np.pi * np.arange(n) / n)
    values = np.array([np.linalg.det(rows_of(t)) for t in nodes])
    coeffs = np.fft.ifft(values) / radius ** np.arange(n)
    return coeffs


def _sylvester(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two high-first coefficient vectors."""
    m, n = p.size - 1, q.size - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for k in range(n):
        S[k, k : k + m + 1] = p
    for k in range(m):
        S[n + k, k : k + n + 1] = q
    return S


def _y_coefficient_polys(P: SpectralCurve, chart: str) -> list[np.ndarray]:
    """Low-first x-coefficient arrays of the y^r ... y^0 terms, high y first."""
    out = [np.array([1.0 + 0j])]
    for i, p in enumerate(P.s, start=1):
        if chart == "affine":
            out.append(np.array(p.coeffs))
        else:
            rev = np.zeros(P.d * i + 1, dtype=complex)
            rev[: p.coeffs.size] = p.coeffs
            out.append(rev[::-1].copy())
    return out


def _discriminant(P: SpectralCurve, chart: str) -> np.ndarray:
    """y-discriminant (up to sign) as resultant of P and dP/dy in x or z."""
    coeff_polys = _y_coefficient_polys(P, chart)
    dcoeff = [ (P.r - k) * coeff_polys[k] for k in range(P.r) ]

    def sylvester_at(t: complex) -> np.ndarray:
        p = np.array([complex(npp.polyval(t, c)) for c in coeff_polys])
        q = np.array([complex(npp.polyval(t, c)) for c in dcoeff])
        return _sylvester(p, q)

    degree = P.d * P.r * (2 * P.r - 1)
    return _interpolated_determinant(sylvester_at, 2 * P.r - 1, degree)


def _simple_roots_and_separation(coeffs: np.ndarray) -> tuple[bool, float]:
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0 or scale < 1e-13:
        return False, 0.0  # identically singular
    trimmed = np.array(coeffs)
    trimmed[np.abs(trimmed) < 1e-10 * scale] = 0
    nz = np.nonzero(trimmed)[0]
    if nz.size == 0:
        return False, 0.0
    trimmed = trimmed[: nz[-1] + 1]
    if trimmed.size == 1:
        return True, float("inf")  # constant discriminant, no branch points
    roots = np.asarray(npp.polyroots(trimmed))
    sep = _min_separation(roots)
    root_scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    return sep > config.get().root_separation_rel * root_scale, sep / root_scale


def smoothness_check(P: SpectralCurve) -> CurveReport:
    """Sufficient numerical smoothness certificate.

    The y-discriminant must have only simple roots in the affine chart, and
    the same must hold for the w-discriminant of the infinity chart.  A
    failure (including an identically vanishing discriminant) reports
    smooth_heuristic=False; it does not prove a singularity.
    """
    ok_aff, sep_aff = _simple_roots_and_separation(_discriminant(P, "affine"))
    ok_inf, sep_inf = _simple_roots_and_separation(_discriminant(P, "infinity"))
    nodes = [complex(k) for k in range(P.d + 2)] + [INFINITY]
    checked = tuple((c, is_unramified_over(P, c)) for c in nodes)
    return CurveReport(
        genus=genus(P.r, P.d),
        unramified_nodes_checked=checked,
        smooth_heuristic=bool(ok_aff and ok_inf),
        discriminant_min_separation=float(min(sep_aff, sep_inf)),
    )


def curve_to_json(P: SpectralCurve) -> dict:
    """Serialize as {"r", "d", "s"} with [re, im] coefficient pairs."""
    s = []
    for i, p in enumerate(P.s, start=1):
        n = P.d * i + 1
        padded = np.zeros(n, dtype=complex)
        padded[: p.coeffs.size] = p.coeffs
        s.append([[c.real, c.imag] for c in padded])
    return {"r": P.r, "d": P.d, "s": s}


def curve_from_json(obj) -> SpectralCurve:
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        r, d, s = obj["r"], obj["d"], obj["s"]
        polys = tuple(Poly([complex(re, im) for re, im in p]) for p in s)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed curve: {exc}") from exc
    return SpectralCurve(r, d, polys)
