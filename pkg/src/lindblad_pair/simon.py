"""Simon's six-parameter two-mode Gaussian family.

Only ``<x^2>, <p_x^2>, <y^2>, <p_y^2>, <xy>, <p_x p_y>`` are nonzero; it is the
family of initial conditions used for every dynamical run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularKernelError, ValidationError
from .state_space import (
    INEQ_ATOL,
    Check,
    CovarianceState,
    ValidationReport,
    density_matrix_eval,
    entanglement_test,
)

__all__ = [
    "Unbounded",
    "UNBOUNDED",
    "SimonParams",
    "SimonLengths",
    "validate_simon",
    "to_covariance_state",
    "from_covariance_state",
    "simon_lengths",
    "simon_density_eval",
    "simon_reduced_density_eval",
]


class Unbounded:
    """An infinite length. Compares equal only to itself and prints as ``inf``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __float__(self) -> float:
        return math.inf

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "inf"

    def __format__(self, spec: str) -> str:
        return "inf"

    def __reduce__(self):
        return (Unbounded, ())


UNBOUNDED = Unbounded()


def _ratio(num: float, den: float):
    return UNBOUNDED if den == 0 else num / den


@dataclass(frozen=True)
class SimonParams:
    a1: float
    b1: float
    a2: float
    b2: float
    a12: float = 0.0
    b12: float = 0.0

    @property
    def k_a(self) -> float:
        return self.a1 * self.a2 - self.a12**2

    @property
    def k_b(self) -> float:
        return self.b1 * self.b2 - self.b12**2


@dataclass(frozen=True)
class SimonLengths:
    """Squared length scales. ``mix_*`` and ``ent_*`` may be :data:`UNBOUNDED`."""

    corr_a: float
    corr_b: float
    decoh_a: float
    decoh_b: float
    mix_a: float | Unbounded
    mix_b: float | Unbounded
    comp_corr_a: float
    comp_corr_b: float
    comp_decoh_a: float
    comp_decoh_b: float
    ent_1: float | Unbounded
    ent_2: float | Unbounded
    ineq_lhs: float | Unbounded
    ineq_rhs: float | Unbounded
    ineq_holds: bool


def _require_positive(p: SimonParams) -> None:
    vals = dict(a1=p.a1, b1=p.b1, a2=p.a2, b2=p.b2, a12=p.a12, b12=p.b12)
    bad = [k for k, v in vals.items() if not math.isfinite(v)]
    if bad:
        raise ValidationError(f"non-finite Simon parameters: {', '.join(bad)}")
    bad = [k for k in ("a1", "b1", "a2", "b2") if not vals[k] > 0]
    if bad:
        raise ValidationError(f"variances must be positive: {', '.join(bad)}")


def validate_simon(p: SimonParams) -> ValidationReport:
    _require_positive(p)
    omega_a = p.a1 * p.b1
    omega_b = p.a2 * p.b2
    rep = entanglement_test(to_covariance_state(p))
    checks = (
        Check("schwarz_positions", p.k_a >= -INEQ_ATOL, p.k_a, "K_A = a1 a2 - a12^2 >= 0"),
        Check("schwarz_momenta", p.k_b >= -INEQ_ATOL, p.k_b, "K_B = b1 b2 - b12^2 >= 0"),
        Check("heisenberg_A", omega_a >= 0.25 - INEQ_ATOL, omega_a, "a1 b1 >= 1/4"),
        Check("heisenberg_B", omega_b >= 0.25 - INEQ_ATOL, omega_b, "a2 b2 >= 1/4"),
        Check("bipartite_heisenberg", rep.heisenberg_holds, rep.heis_lhs - rep.heis_rhs, "lhs - rhs"),
    )
    # scalar forms are reported only; their printed direction is ambiguous
    scalar_rhs = 2.0 * p.k_a * p.k_b - 0.125
    values = {
        "det_cs": rep.det_cs,
        "entangled": rep.entangled,
        "separability_form_holds": rep.separability_holds,
        "scalar_heisenberg_lhs": p.a12 * p.b12,
        "scalar_separability_lhs": abs(p.a12 * p.b12),
        "scalar_rhs": scalar_rhs,
    }
    return ValidationReport(checks, values)


def to_covariance_state(p: SimonParams) -> CovarianceState:
    return CovarianceState(
        A11=p.b1, B11=0.0, C11=p.a1,
        A22=p.b2, B22=0.0, C22=p.a2,
        A12=p.b12, B12=0.0, B21=0.0, C12=p.a12,
        tau=0.0,
    )


def from_covariance_state(s: CovarianceState) -> SimonParams:
    """Inverse of :func:`to_covariance_state`; requires all B entries to vanish."""
    if any(v != 0.0 for v in (s.B11, s.B22, s.B12, s.B21)):
        raise ValueError("state has position-momentum correlations; not in the Simon family")
    return SimonParams(a1=s.C11, b1=s.A11, a2=s.C22, b2=s.A22, a12=s.C12, b12=s.A12)


def simon_lengths(p: SimonParams) -> SimonLengths:
    _require_positive(p)
    omega_a = p.a1 * p.b1
    omega_b = p.a2 * p.b2
    k_a, k_b = p.k_a, p.k_b
    decoh_a = 1.0 / (4.0 * p.b1)
    decoh_b = 1.0 / (4.0 * p.b2)
    ent_1 = _ratio(1.0, p.b12)
    ent_2 = _ratio(k_a, p.a12)
    # E^-2 Etilde^-2 <= 1/(4 K_A) + 2 K_B, decided in the K_A-multiplied form
    lhs = _ratio(p.a12 * p.b12, k_a)
    rhs = UNBOUNDED if k_a == 0 else 1.0 / (4.0 * k_a) + 2.0 * k_b
    holds = p.a12 * p.b12 <= 0.25 + 2.0 * k_a * k_b + INEQ_ATOL
    return SimonLengths(
        corr_a=p.a1,
        corr_b=p.a2,
        decoh_a=decoh_a,
        decoh_b=decoh_b,
        mix_a=_ratio(4.0 * p.a1, 4.0 * omega_a - 1.0),
        mix_b=_ratio(4.0 * p.a2, 4.0 * omega_b - 1.0),
        comp_corr_a=p.a1 - p.a12**2 / p.a2,
        comp_corr_b=p.a2 - p.a12**2 / p.a1,
        comp_decoh_a=decoh_a,
        comp_decoh_b=decoh_b,
        ent_1=ent_1,
        ent_2=ent_2,
        ineq_lhs=lhs,
        ineq_rhs=rhs,
        ineq_holds=holds,
    )


def simon_density_eval(p: SimonParams, coords) -> float:
    """Composite density matrix ``<x1, y1| rho |x2, y2>`` (real for this family).

    ``coords`` is ``(x1, y1, x2, y2)``, or an array whose last axis holds them.
    """
    k_a = p.k_a
    if not k_a > 0:
        raise SingularKernelError(f"K_A = {k_a:.6g}; composite kernel is singular")
    c = np.asarray(coords, dtype=float)
    x1, y1, x2, y2 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    x, y = x1 - x2, y1 - y2
    X, Y = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
    expo = (x * x * p.b1 + 2.0 * x * y * p.b12 + y * y * p.b2) + (
        X * X * p.a2 - 2.0 * X * Y * p.a12 + Y * Y * p.a1
    ) / k_a
    out = np.exp(-0.5 * expo) / (2.0 * math.pi * math.sqrt(k_a))
    return out if out.ndim else float(out)


def simon_reduced_density_eval(p: SimonParams, which: str, z1, z2, strict: bool = False):
    """Reduced density matrix ``<z1| rho_A |z2>`` (or ``rho_B``).

    The printed B prefactor ``(2 pi b2)^(-1/2)`` does not give unit trace; the
    default uses ``(2 pi a2)^(-1/2)``. ``strict=True`` reproduces the printed form.
    """
    _require_positive(p)
    if which == "A":
        a, b, pref_var = p.a1, p.b1, p.a1
    elif which == "B":
        a, b = p.a2, p.b2
        pref_var = p.b2 if strict else p.a2
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {which!r}")
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    diag = b + 1.0 / (4.0 * a)
    off = b - 1.0 / (4.0 * a)
    expo = diag * z1 * z1 + diag * z2 * z2 - 2.0 * z1 * z2 * off
    out = np.exp(-0.5 * expo) / math.sqrt(2.0 * math.pi * pref_var)
    return out if out.ndim else float(out)


def composite_via_state(p: SimonParams, coords):
    """Same value as :func:`simon_density_eval`, routed through the general kernel."""
    c = np.asarray(coords, dtype=float)
    x1, y1, x2, y2 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    R = np.stack([0.5 * (x1 + x2), 0.5 * (y1 + y2)], axis=-1)
    r = np.stack([x1 - x2, y1 - y2], axis=-1)
    return density_matrix_eval(to_covariance_state(p), R, r)
