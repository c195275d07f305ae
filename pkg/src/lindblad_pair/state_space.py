"""Two-mode Gaussian states in the ambiguity-function parameterization.

A state is fixed by three 2x2 blocks of second moments (zero first moments)::

    A_ij = <p_i p_j>,   C_ij = <R_i R_j>,   B_ji = <R_i p_j>

which enter the ambiguity function as
``exp(-1/2 (r^T A r + 2 r^T B Q + Q^T C Q))``. ``B`` is not symmetric: ``B12``
is ``<R_2 p_1>`` (``<y p_x>``) and ``B21`` is ``<R_1 p_2>`` (``<x p_y>``).

Sign convention: the density matrix is ``rho(R, r) = <R + r/2|rho|R - r/2>``,
the ambiguity function is ``int d^2R e^{+iQ.R} rho(R, r)`` and the Wigner
function is ``int d^2r e^{-ip.r} rho(R, r)``. Under this convention the mixed
second derivative of the ambiguity function at the origin is ``-<R_i p_j>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import DegenerateStateError, SingularKernelError, ValidationError

__all__ = [
    "STATE_ORDER",
    "FD_STEP",
    "FD_TOL",
    "SYMMETRY_RTOL",
    "HEISENBERG_BOUND",
    "J",
    "CovarianceState",
    "Check",
    "ValidationReport",
    "SubsystemMetrics",
    "GaussianKernel",
    "EntanglementReport",
    "validate_state",
    "subsystem_metrics",
    "entanglement_test",
    "gaussian_kernel",
    "density_matrix_eval",
    "ambiguity_eval",
    "wigner_eval",
    "reduced_density_eval",
    "phase_space_covariance",
    "covariances_from_ambiguity",
    "minimum_uncertainty_state",
]

# Canonical ordering of the ten coefficients in every flat vector.
STATE_ORDER = ("A11", "B11", "C11", "A22", "B22", "C22", "A12", "B12", "B21", "C12")

FD_STEP = 1e-3
FD_TOL = 1e-6
SYMMETRY_RTOL = 1e-12
HEISENBERG_BOUND = 0.25
# relative size of a Cholesky pivot^2 below which the covariance counts as singular
SINGULAR_RTOL = 1e-13
# slack for inequalities that hold with equality on minimum-uncertainty states
INEQ_ATOL = 1e-12

J = np.array([[0.0, 1.0], [-1.0, 0.0]])

Subsystem = Literal["A", "B"]


@dataclass(frozen=True)
class CovarianceState:
    """The ten Gaussian coefficients at dimensionless time ``tau``."""

    A11: float
    B11: float
    C11: float
    A22: float
    B22: float
    C22: float
    A12: float
    B12: float
    B21: float
    C12: float
    tau: float = 0.0

    @classmethod
    def from_array(cls, values, tau: float = 0.0) -> "CovarianceState":
        values = np.asarray(values, dtype=float)
        if values.shape != (10,):
            raise ValueError(f"expected 10 coefficients, got shape {values.shape}")
        return cls(*(float(v) for v in values), tau=float(tau))

    @classmethod
    def from_blocks(cls, A, B, C, tau: float = 0.0) -> "CovarianceState":
        A, B, C = (np.asarray(m, dtype=float) for m in (A, B, C))
        return cls(
            A11=A[0, 0], B11=B[0, 0], C11=C[0, 0],
            A22=A[1, 1], B22=B[1, 1], C22=C[1, 1],
            A12=A[0, 1], B12=B[0, 1], B21=B[1, 0], C12=C[0, 1],
            tau=tau,
        )

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in STATE_ORDER])

    @property
    def A(self) -> np.ndarray:
        return np.array([[self.A11, self.A12], [self.A12, self.A22]])

    @property
    def B(self) -> np.ndarray:
        return np.array([[self.B11, self.B12], [self.B21, self.B22]])

    @property
    def C(self) -> np.ndarray:
        return np.array([[self.C11, self.C12], [self.C12, self.C22]])

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The 2x2 covariance matrices (A_s, B_s, C_s) over ``(x, p)`` of each oscillator.

        ``C_s[i, j]`` pairs coordinate i of oscillator A with coordinate j of
        oscillator B, so ``C_s[0, 1] = <x1 p2> = B21`` and ``C_s[1, 0] = B12``.
        """
        a_s = np.array([[self.C11, self.B11], [self.B11, self.A11]])
        b_s = np.array([[self.C22, self.B22], [self.B22, self.A22]])
        c_s = np.array([[self.C12, self.B21], [self.B12, self.A12]])
        return a_s, b_s, c_s


def minimum_uncertainty_state(tau: float = 0.0) -> CovarianceState:
    """Uncorrelated product of two vacuum-like states (all variances 1/2)."""
    return CovarianceState(0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, tau=tau)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float = math.nan
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Named pass/fail checks plus any purely informational values."""

    checks: tuple[Check, ...]
    values: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.checks)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            extra = f"  ({c.detail})" if c.detail else ""
            lines.append(f"{mark}  {c.name:<28s} {c.value:.9g}{extra}")
        for key, val in self.values.items():
            lines.append(f"INFO  {key:<28s} {val}")
        return "\n".join(lines)


def validate_state(s: CovarianceState) -> ValidationReport:
    """Physical-consistency report. Non-finite entries raise; everything else is a flag."""
    vec = s.as_array()
    if not np.all(np.isfinite(vec)):
        bad = [n for n, v in zip(STATE_ORDER, vec) if not math.isfinite(v)]
        raise ValidationError(f"non-finite coefficients: {', '.join(bad)}")
    omega_a = s.A11 * s.C11 - s.B11**2
    omega_b = s.A22 * s.C22 - s.B22**2
    k_a = s.C11 * s.C22 - s.C12**2
    k_b = s.A11 * s.A22 - s.A12**2
    checks = (
        Check("finite", True),
        Check("positive_A11", s.A11 > 0, s.A11),
        Check("positive_A22", s.A22 > 0, s.A22),
        Check("positive_C11", s.C11 > 0, s.C11),
        Check("positive_C22", s.C22 > 0, s.C22),
        Check("heisenberg_A", omega_a >= HEISENBERG_BOUND - INEQ_ATOL, omega_a, "Omega_A^2 >= 1/4"),
        Check("heisenberg_B", omega_b >= HEISENBERG_BOUND - INEQ_ATOL, omega_b, "Omega_B^2 >= 1/4"),
        Check("schwarz_positions", k_a >= -INEQ_ATOL, k_a, "K_A >= 0"),
        Check("schwarz_momenta", k_b >= -INEQ_ATOL, k_b, "K_B >= 0"),
    )
    return ValidationReport(checks)


@dataclass(frozen=True)
class SubsystemMetrics:
    """Uncertainty product, mixedness and the two length scales of one oscillator."""

    omega_sq: float
    xi: float
    d_corr_sq: float
    d_decoh_sq: float
    xi_in_range: bool = True


def subsystem_metrics(s: CovarianceState, which: Subsystem = "A") -> SubsystemMetrics:
    if which == "A":
        a, b, c = s.A11, s.B11, s.C11
    elif which == "B":
        a, b, c = s.A22, s.B22, s.C22
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {which!r}")
    if not (a > 0 and c > 0):
        raise DegenerateStateError(f"subsystem {which}: diagonal variances must be positive")
    omega_sq = a * c - b * b
    if omega_sq <= 0:
        raise DegenerateStateError(f"subsystem {which}: Omega^2 = {omega_sq:.6g} <= 0")
    # Omega^2 = (1 + xi) / (4 (1 - xi)) inverted; clamp to [0, 1)
    xi_raw = (4.0 * omega_sq - 1.0) / (4.0 * omega_sq + 1.0)
    in_range = 0.0 <= xi_raw < 1.0
    xi = min(max(xi_raw, 0.0), math.nextafter(1.0, 0.0))
    return SubsystemMetrics(
        omega_sq=omega_sq,
        xi=xi,
        d_corr_sq=c,
        d_decoh_sq=c / (2.0 * omega_sq),
        xi_in_range=in_range,
    )


@dataclass(frozen=True)
class EntanglementReport:
    det_as: float
    det_bs: float
    det_cs: float
    k_a: float
    k_b: float
    heis_lhs: float
    heis_rhs: float
    sep_lhs: float
    sep_rhs: float
    entangled: bool

    @property
    def heisenberg_holds(self) -> bool:
        return self.heis_lhs >= self.heis_rhs - INEQ_ATOL

    @property
    def separability_holds(self) -> bool:
        return self.sep_lhs >= self.sep_rhs - INEQ_ATOL


def entanglement_test(s: CovarianceState) -> EntanglementReport:
    """Bipartite Heisenberg and separability forms in block-determinant language.

    The separability form replaces ``det C_s`` by ``|det C_s|``; for the states
    reachable here its failure coincides with ``det C_s < 0``, which is what
    ``entangled`` records.
    """
    a_s, b_s, c_s = s.blocks()
    det_as = s.A11 * s.C11 - s.B11**2
    det_bs = s.A22 * s.C22 - s.B22**2
    det_cs = s.C12 * s.A12 - s.B12 * s.B21
    trace_term = float(np.trace(a_s @ J @ c_s @ J @ b_s @ J @ c_s.T @ J))
    base = det_as * det_bs - trace_term
    rhs = 0.25 * (det_as + det_bs)
    return EntanglementReport(
        det_as=det_as,
        det_bs=det_bs,
        det_cs=det_cs,
        k_a=s.C11 * s.C22 - s.C12**2,
        k_b=s.A11 * s.A22 - s.A12**2,
        heis_lhs=base + (0.25 - det_cs) ** 2,
        heis_rhs=rhs,
        sep_lhs=base + (0.25 - abs(det_cs)) ** 2,
        sep_rhs=rhs,
        entangled=det_cs < 0,
    )


@dataclass(frozen=True)
class GaussianKernel:
    """Precomputed matrices of the position-representation density matrix."""

    c_inv: np.ndarray
    e_mat: np.ndarray
    alpha: np.ndarray
    norm: float


def gaussian_kernel(s: CovarianceState) -> GaussianKernel:
    det_c = s.C11 * s.C22 - s.C12**2
    if not det_c > 0:
        raise SingularKernelError(f"det C = {det_c:.6g} must be positive")
    c_inv = np.array([[s.C22, -s.C12], [-s.C12, s.C11]]) / det_c
    Bt = s.B.T
    alpha = s.A - s.B @ c_inv @ Bt
    return GaussianKernel(
        c_inv=c_inv,
        e_mat=c_inv @ Bt,
        alpha=alpha,
        norm=1.0 / (2.0 * math.pi * math.sqrt(det_c)),
    )


def _quad(m, u, v):
    # u^T m v over trailing axis of size 2, broadcasting
    return (
        u[..., 0] * (m[0, 0] * v[..., 0] + m[0, 1] * v[..., 1])
        + u[..., 1] * (m[1, 0] * v[..., 0] + m[1, 1] * v[..., 1])
    )


def density_matrix_eval(s: CovarianceState, R, r, kernel: GaussianKernel | None = None):
    """``rho(R, r)`` at center-of-mass ``R`` and relative ``r`` coordinates.

    Accepts arrays with a trailing axis of length 2 and broadcasts over the rest.
    """
    k = kernel or gaussian_kernel(s)
    R = np.asarray(R, dtype=float)
    r = np.asarray(r, dtype=float)
    real = _quad(k.c_inv, R, R) + _quad(k.alpha, r, r)
    phase = _quad(k.e_mat, R, r)
    mag = k.norm * np.exp(-0.5 * real)
    out = mag * np.cos(phase) + 1j * (mag * np.sin(phase))
    return out if out.ndim else complex(out)


def ambiguity_eval(s: CovarianceState, Q, r):
    Q = np.asarray(Q, dtype=float)
    r = np.asarray(r, dtype=float)
    expo = _quad(s.A, r, r) + 2.0 * _quad(s.B, r, Q) + _quad(s.C, Q, Q)
    out = np.exp(-0.5 * expo)
    return out if out.ndim else float(out)


def phase_space_covariance(s: CovarianceState) -> np.ndarray:
    """4x4 covariance over ``(R_1, R_2, p_1, p_2)``: ``[[C, B^T], [B, A]]``."""
    return np.block([[s.C, s.B.T], [s.B, s.A]])


def wigner_eval(s: CovarianceState, R, p):
    """Wigner function normalized so that ``int d^2R d^2p f / (2 pi)^2 = 1``."""
    sigma = phase_space_covariance(s)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularKernelError("phase-space covariance is not positive definite") from exc
    # a squared pivot at rounding level means singular to working precision
    if not np.all(np.diag(chol) ** 2 > SINGULAR_RTOL * np.abs(sigma).max()):
        raise SingularKernelError("phase-space covariance is singular")
    R = np.asarray(R, dtype=float)
    p = np.asarray(p, dtype=float)
    z = np.concatenate(np.broadcast_arrays(R, p), axis=-1)
    w = np.linalg.solve(chol, z[..., None])[..., 0]
    sqrt_det = float(np.prod(np.diag(chol)))
    out = np.exp(-0.5 * np.sum(w * w, axis=-1)) / sqrt_det
    return out if out.ndim else float(out)


def reduced_density_eval(s: CovarianceState, which: Subsystem, Rc, rc):
    """Single-oscillator density matrix after tracing out the partner."""
    if which == "A":
        a, b, c = s.A11, s.B11, s.C11
    elif which == "B":
        a, b, c = s.A22, s.B22, s.C22
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {which!r}")
    if not c > 0:
        raise SingularKernelError(f"subsystem {which}: position variance {c:.6g} must be positive")
    Rc = np.asarray(Rc, dtype=float)
    rc = np.asarray(rc, dtype=float)
    mag = np.exp(-(Rc**2 + (a * c - b * b) * rc**2) / (2.0 * c)) / math.sqrt(2.0 * math.pi * c)
    phase = b * Rc * rc / c
    out = mag * np.cos(phase) + 1j * (mag * np.sin(phase))
    return out if out.ndim else complex(out)


def covariances_from_ambiguity(
    amb: Callable[[np.ndarray, np.ndarray], float], step: float = FD_STEP, tau: float = 0.0
) -> CovarianceState:
    """Recover the ten moments from second differences of ``amb(Q, r)`` at the origin."""
    h = step
    f0 = amb(np.zeros(2), np.zeros(2))

    def point(dq, dr):
        return amb(np.asarray(dq, dtype=float), np.asarray(dr, dtype=float))

    def unit(i):
        e = np.zeros(2)
        e[i] = h
        return e

    zero = np.zeros(2)

    def second(u_q, u_r):
        # -d^2/du^2 along a single direction
        return -(point(u_q, u_r) - 2.0 * f0 + point(-u_q, -u_r)) / (h * h)

    def mixed(q1, r1, q2, r2):
        # -d^2/(du dv) with u = (q1, r1), v = (q2, r2)
        pp = point(q1 + q2, r1 + r2)
        pm = point(q1 - q2, r1 - r2)
        mp = point(-q1 + q2, -r1 + r2)
        mm = point(-q1 - q2, -r1 - r2)
        return -(pp - pm - mp + mm) / (4.0 * h * h)

    C11 = second(unit(0), zero)
    C22 = second(unit(1), zero)
    A11 = second(zero, unit(0))
    A22 = second(zero, unit(1))
    C12 = mixed(unit(0), zero, unit(1), zero)
    A12 = mixed(zero, unit(0), zero, unit(1))
    # B_ji = -d^2 amb / dQ_i dr_j
    B11 = mixed(unit(0), zero, zero, unit(0))
    B21 = mixed(unit(0), zero, zero, unit(1))
    B12 = mixed(unit(1), zero, zero, unit(0))
    B22 = mixed(unit(1), zero, zero, unit(1))
    return CovarianceState(A11, B11, C11, A22, B22, C22, A12, B12, B21, C12, tau=tau)
