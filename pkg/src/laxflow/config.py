"""Numeric tolerances, with env and config-file overrides.

All tolerance defaults live in :class:`Tolerances`.  The active instance is
process-wide and obtained with :func:`get`.  Two override channels exist:

* the environment variable ``LAXFLOW_TOL_SCALE`` multiplies every tolerance
  (it does not touch step sizes or node radii), and
* a ``laxflow.toml``-style config file of ``key = value`` lines (``#``
  comments allowed) loaded via :func:`load`.  Keys are the field names of
  :class:`Tolerances`.
"""

from __future__ import annotations

import dataclasses
import os

__all__ = ["Tolerances", "get", "load", "set_active"]


@dataclasses.dataclass(frozen=True)
class Tolerances:
    # absolute coefficient tolerance for polynomial equality / trimming
    poly_eq_tol: float = 1e-12
    # relative pairwise root separation below which a fiber counts as ramified
    root_separation_rel: float = 1e-7
    # SVD numerical-rank cutoff, relative to the largest singular value
    rank_svd_rel: float = 1e-8
    # |det B| below this means a singular gauge block
    singular_b_tol: float = 1e-12
    # |det D(A;c)| threshold for membership in M_c
    in_mc_tol: float = 1e-9
    # max allowed remainder in the exact synthetic division of Lax fields
    division_residue_tol: float = 1e-9
    # max constraint residual for slice membership
    slice_tol: float = 1e-9
    # slice-constraint violation at which integration aborts
    slice_abort: float = 1e-4
    # max shape-overflow coefficient accepted by the interpolation preimage
    image_tol: float = 1e-9
    # relative pairwise separation below which divisor roots are "multiple"
    simple_root_rel: float = 1e-6
    # |denominator| below this raises ZeroDenominator
    zero_denominator_tol: float = 1e-12
    # |first eigenvector entry| above this counts as off the theta divisor
    theta_first_entry_tol: float = 1e-8
    # central finite-difference step for directional derivatives (not scaled)
    fd_step: float = 1e-5
    # radius of the interpolation circle for coefficient extraction (not scaled)
    node_radius: float = 1.1

    # fields that are step sizes / geometry, exempt from LAXFLOW_TOL_SCALE
    _UNSCALED = ("fd_step", "node_radius")


def _scaled(base: Tolerances, scale: float) -> Tolerances:
    if scale == 1.0:
        return base
    updates = {
        f.name: getattr(base, f.name) * scale
        for f in dataclasses.fields(base)
        if f.name not in Tolerances._UNSCALED
    }
    return dataclasses.replace(base, **updates)


def _from_env(base: Tolerances) -> Tolerances:
    raw = os.environ.get("LAXFLOW_TOL_SCALE")
    if not raw:
        return base
    return _scaled(base, float(raw))


_active = _from_env(Tolerances())


def get() -> Tolerances:
    """Return the active tolerance set."""
    return _active


def set_active(tol: Tolerances) -> None:
    """Replace the active tolerance set (tests and CLI only)."""
    global _active
    _active = tol


def load(path: str) -> Tolerances:
    """Load ``key = value`` overrides from a config file and activate them.

    Unknown keys are rejected.  LAXFLOW_TOL_SCALE still applies on top.
    """
    overrides: dict[str, float] = {}
    names = {f.name for f in dataclasses.fields(Tolerances)}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in names:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            overrides[key] = float(value.strip())
    tol = _from_env(dataclasses.replace(Tolerances(), **overrides))
    set_active(tol)
    return tol
