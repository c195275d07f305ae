"""Lindblad couplings and the coefficient ODEs of the Gaussian ansatz.

Every right-hand side is affine in the ten coefficients (ordered as
:data:`~lindblad_pair.state_space.STATE_ORDER`)::

    lambda * d/dtau x = H x + g

``H`` is assembled by evaluating the homogeneous part on unit vectors, so the
matrix and the pointwise right-hand side share one transcription of the
equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Literal

import numpy as np

from . import kernels
from .errors import ModelViolationError, NoStationaryStateError, ValidationError
from .state_space import CovarianceState

__all__ = [
    "OscillatorParams",
    "LindbladCouplings",
    "DampingRates",
    "PsdReport",
    "damping_rates",
    "psd_check",
    "general_rhs",
    "simplified_rhs",
    "affine_system",
    "stationary_state",
    "SIMPLIFIED_COUPLINGS",
]

Model = Literal["general", "simplified"]
Transcription = Literal["derived", "listed"]

# couplings kept by the simplified model; everything else must vanish
SIMPLIFIED_COUPLINGS = frozenset(
    ["h11", "h22", "h33", "h44", "h12r", "h13r", "h13i", "h24r", "h24i"]
)

# blocks of the simplified model as index sets into STATE_ORDER
BLOCKS = ((0, 1, 2), (3, 4, 5), (6, 7, 8, 9))


@dataclass(frozen=True)
class OscillatorParams:
    """Oscillator energies and the energy ``lam`` that sets ``tau = lam * t``."""

    omega_a: float = 1.0
    omega_b: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("omega_a", "omega_b", "lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")

    @property
    def r(self) -> float:
        return self.omega_b / self.omega_a


@dataclass(frozen=True)
class LindbladCouplings:
    """Hermitian 4x4 coupling matrix over ``(x, y, p_x, p_y)``.

    Diagonal entries are real; each off-diagonal ``h_mn`` is stored as its real
    and imaginary parts ``h_mn^(r)``, ``h_mn^(i)``.
    """

    h11: float = 0.0
    h22: float = 0.0
    h33: float = 0.0
    h44: float = 0.0
    h12r: float = 0.0
    h12i: float = 0.0
    h13r: float = 0.0
    h13i: float = 0.0
    h14r: float = 0.0
    h14i: float = 0.0
    h23r: float = 0.0
    h23i: float = 0.0
    h24r: float = 0.0
    h24i: float = 0.0
    h34r: float = 0.0
    h34i: float = 0.0

    def __post_init__(self):
        bad = [f.name for f in fields(self) if not math.isfinite(getattr(self, f.name))]
        if bad:
            raise ValidationError(f"non-finite couplings: {', '.join(bad)}")

    @classmethod
    def from_damping(
        cls, osc: OscillatorParams, gamma_a: float, gamma_b: float, **couplings
    ) -> "LindbladCouplings":
        """Set the damping entries from rates: ``h13^(i) = gamma_a omega_a / 2`` etc."""
        if "h13i" in couplings or "h24i" in couplings:
            raise ValueError("h13i/h24i are fixed by the damping rates")
        return cls(
            h13i=0.5 * gamma_a * osc.omega_a, h24i=0.5 * gamma_b * osc.omega_b, **couplings
        )

    def matrix(self) -> np.ndarray:
        h = np.zeros((4, 4), dtype=complex)
        h[0, 0], h[1, 1], h[2, 2], h[3, 3] = self.h11, self.h22, self.h33, self.h44
        for (i, j), name in {
            (0, 1): "h12", (0, 2): "h13", (0, 3): "h14",
            (1, 2): "h23", (1, 3): "h24", (2, 3): "h34",
        }.items():
            v = complex(getattr(self, name + "r"), getattr(self, name + "i"))
            h[i, j] = v
            h[j, i] = v.conjugate()
        return h

    def out_of_model(self) -> list[str]:
        """Names of nonzero couplings the simplified model does not keep."""
        return [
            f.name
            for f in fields(self)
            if f.name not in SIMPLIFIED_COUPLINGS and getattr(self, f.name) != 0.0
        ]

    def restricted(self) -> "LindbladCouplings":
        """Copy with every coupling outside the simplified model set to zero."""
        return replace(self, **{name: 0.0 for name in self.out_of_model()})


@dataclass(frozen=True)
class DampingRates:
    gamma_a: float
    gamma_b: float
    gamma: float


def damping_rates(osc: OscillatorParams, h: LindbladCouplings) -> DampingRates:
    gamma_a = 2.0 * h.h13i / osc.omega_a
    gamma_b = 2.0 * h.h24i / osc.omega_b
    return DampingRates(gamma_a, gamma_b, 0.5 * (gamma_a + osc.r * gamma_b))


@dataclass(frozen=True)
class PsdReport:
    eigenvalues: tuple[float, ...]
    min_eigenvalue: float
    is_psd: bool


def psd_check(h: LindbladCouplings, atol: float = 1e-12) -> PsdReport:
    """Eigenvalues of the coupling matrix. Not being PSD is reported, never raised."""
    ev = np.linalg.eigvalsh(h.matrix())
    scale = max(1.0, float(np.abs(ev).max()))
    return PsdReport(tuple(float(e) for e in ev), float(ev[0]), bool(ev[0] >= -atol * scale))


def _general_homogeneous(x, wa, wb, h: LindbladCouplings, transcription: Transcription):
    A11, B11, C11, A22, B22, C22, A12, B12, B21, C12 = x
    g = h.h13i + h.h24i
    if transcription == "derived":
        return np.array([
            -2*wa*B11 - 2*h.h13i*A11 - 2*h.h12i*B12 - 2*h.h14i*A12,
            wa*A11 - wa*C11 - 2*h.h13i*B11 + h.h34i*A12 - h.h23i*B12 - h.h14i*B21 - h.h12i*C12,
            2*wa*B11 - 2*h.h13i*C11 + 2*h.h34i*B21 - 2*h.h23i*C12,
            -2*wb*B22 - 2*h.h24i*A22 + 2*h.h23i*A12 + 2*h.h12i*B21,
            wb*A22 - wb*C22 - 2*h.h24i*B22 - h.h34i*A12 + h.h23i*B12 - h.h14i*B21 + h.h12i*C12,
            2*wb*B22 - 2*h.h24i*C22 - 2*h.h34i*B12 - 2*h.h14i*C12,
            -wa*B21 - wb*B12 - g*A12 + h.h23i*A11 - h.h14i*A22 + h.h12i*B11 - h.h12i*B22,
            wb*A12 - wa*C12 - g*B12 - h.h34i*A11 - h.h14i*B11 - h.h14i*B22 - h.h12i*C22,
            wa*A12 - wb*C12 - g*B21 + h.h34i*A22 + h.h23i*B11 - h.h23i*B22 + h.h12i*C11,
            wa*B12 + wb*B21 - g*C12 - h.h34i*B11 + h.h34i*B22 - h.h14i*C11 - h.h23i*C22,
        ])
    if transcription == "listed":
        # Published coefficient listing with the oscillator signs of the A11/B11 and A22
        # rows matched to the single-oscillator equations; other terms as printed
        return np.array([
            -2*wa*B11 - 2*h.h13i*A11 - 2*h.h12i*B12 - 2*h.h14i*A12,
            wa*A11 - wa*C11 - 2*h.h13i*B11 + h.h34i*A12 - 2*h.h23i*B12 - h.h14i*B21 - h.h12i*C12,
            2*wa*B11 - 2*h.h13i*C11 + 2*h.h34i*B21 - 2*h.h23i*C12,
            -2*wb*B22 - 2*h.h24i*A22 + 2*h.h23i*A12 + 2*h.h12i*B21,
            wb*A22 - wb*C22 - 2*h.h24i*B22 + h.h34i*A12 + h.h23i*B12 - h.h14i*B21 + h.h12i*C12,
            2*wb*B22 - 2*h.h24i*C22 - 2*h.h34i*B12 - 2*h.h14i*C12,
            -wa*B21 - wb*B12 - g*A12 + h.h23i*A11 - h.h14i*A22 + h.h12i*B11 - h.h12i*B22,
            wb*A12 - wa*C12 - g*B12 - h.h34i*A11 - h.h14i*B11 - h.h14i*B22 - h.h12i*C22,
            wa*A12 - wb*C12 - g*B21 - h.h34i*A22 + h.h23i*B11 - h.h23i*B22 - h.h12i*C11,
            wa*B12 + wb*B21 - g*C12 - h.h34i*B11 + h.h34i*B11 - h.h14i*C11 - h.h23i*C22,
        ])
    raise ValueError(f"unknown transcription {transcription!r}")


def _general_drive(h: LindbladCouplings, transcription: Transcription) -> np.ndarray:
    b21 = -h.h23r if transcription == "derived" else h.h23r
    return np.array([h.h11, -h.h13r, h.h33, h.h22, -h.h24r, h.h44, h.h12r, -h.h14r, b21, h.h34r])


def _simplified_homogeneous(x, wa, wb, h: LindbladCouplings):
    A11, B11, C11, A22, B22, C22, A12, B12, B21, C12 = x
    g = h.h13i + h.h24i
    return np.array([
        -2*wa*B11 - 2*h.h13i*A11,
        wa*A11 - wa*C11 - 2*h.h13i*B11,
        2*wa*B11 - 2*h.h13i*C11,
        -2*wb*B22 - 2*h.h24i*A22,
        wb*A22 - wb*C22 - 2*h.h24i*B22,
        2*wb*B22 - 2*h.h24i*C22,
        -wa*B21 - wb*B12 - g*A12,
        wb*A12 - wa*C12 - g*B12,
        wa*A12 - wb*C12 - g*B21,
        wa*B12 + wb*B21 - g*C12,
    ])


def _simplified_drive(h: LindbladCouplings) -> np.ndarray:
    return np.array([h.h11, -h.h13r, h.h33, h.h22, -h.h24r, h.h44, h.h12r, 0.0, 0.0, 0.0])


def _check_simplified(h: LindbladCouplings) -> None:
    extra = h.out_of_model()
    if extra:
        raise ModelViolationError(
            f"simplified model keeps only {sorted(SIMPLIFIED_COUPLINGS)}; nonzero: {', '.join(extra)}"
        )


def general_rhs(
    s: CovarianceState,
    osc: OscillatorParams,
    h: LindbladCouplings,
    transcription: Transcription = "derived",
) -> np.ndarray:
    """``d/dtau`` of all ten coefficients under the full coupling matrix.

    ``transcription="derived"`` is the set that follows from the phase-space
    generator and has the covariance-flow structure; ``"listed"`` keeps the
    published coefficient listing (see README).
    """
    x = s.as_array()
    hom = _general_homogeneous(x, osc.omega_a, osc.omega_b, h, transcription)
    return (hom + _general_drive(h, transcription)) / osc.lam


def simplified_rhs(s: CovarianceState, osc: OscillatorParams, h: LindbladCouplings) -> np.ndarray:
    """Decoupled A / B / cross-block equations; rejects couplings outside the model."""
    _check_simplified(h)
    x = s.as_array()
    return (_simplified_homogeneous(x, osc.omega_a, osc.omega_b, h) + _simplified_drive(h)) / osc.lam


def affine_system(
    osc: OscillatorParams,
    h: LindbladCouplings,
    model: Model = "simplified",
    transcription: Transcription = "derived",
) -> tuple[np.ndarray, np.ndarray]:
    """``(M, c)`` with ``d/dtau x = M @ x + c`` (already divided by ``lam``)."""
    eye = np.eye(10)
    if model == "simplified":
        _check_simplified(h)
        hom = _simplified_homogeneous(eye, osc.omega_a, osc.omega_b, h)
        drive = _simplified_drive(h)
    elif model == "general":
        hom = _general_homogeneous(eye, osc.omega_a, osc.omega_b, h, transcription)
        drive = _general_drive(h, transcription)
    else:
        raise ValueError(f"model must be 'general' or 'simplified', got {model!r}")
    return hom / osc.lam, drive / osc.lam


def stationary_state(
    osc: OscillatorParams,
    h: LindbladCouplings,
    model: Model = "simplified",
    transcription: Transcription = "derived",
) -> CovarianceState:
    """Fixed point of the coefficient ODEs by direct partial-pivot elimination.

    The simplified model is solved block by block (3x3, 3x3, 4x4).
    """
    m, c = affine_system(osc, h, model, transcription)
    if model == "simplified":
        x = np.empty(10)
        for idx in BLOCKS:
            sub = kernels.solve(m[np.ix_(idx, idx)], -c[list(idx)])
            if sub is None:
                raise NoStationaryStateError(f"singular block {idx}: no damping on this block?")
            x[list(idx)] = sub
    else:
        x = kernels.solve(m, -c)
        if x is None:
            raise NoStationaryStateError("singular 10x10 stationary system")
    return CovarianceState.from_array(x, tau=math.inf)
