"""Analytic Laplace-transform solutions of the simplified model.

The single-oscillator blocks agree with the ODEs to rounding. The cross-block
expressions are evaluated exactly as published, including coefficients that do
not solve the cross-block ODEs; the RK4 trajectory is the reference there and
:func:`lindblad_pair.integrator.compare_closed_form` measures the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DampingRates, LindbladCouplings, OscillatorParams, damping_rates
from .errors import UnsupportedParameterError, ValidationError
from .simon import SimonParams

__all__ = [
    "ClosedFormParams",
    "a_block",
    "b_block",
    "cross_block",
    "det_cs_asymptotic",
    "cross_block_asymptote",
    "closed_form_state",
]

# |1 - r| below this is treated as the equal-frequency case
R_EQUAL_TOL = 1e-12


@dataclass(frozen=True)
class ClosedFormParams:
    osc: OscillatorParams
    rates: DampingRates
    h11: float
    h33: float
    h13r: float
    h22: float
    h44: float
    h24r: float
    h12r: float
    init: SimonParams

    def __post_init__(self):
        expected = 0.5 * (self.rates.gamma_a + self.osc.r * self.rates.gamma_b)
        if not math.isclose(self.rates.gamma, expected, rel_tol=1e-12, abs_tol=1e-15):
            raise ValidationError(
                f"gamma={self.rates.gamma!r} inconsistent with (gamma_a + r gamma_b)/2 = {expected!r}"
            )

    @classmethod
    def from_couplings(
        cls, osc: OscillatorParams, h: LindbladCouplings, init: SimonParams
    ) -> "ClosedFormParams":
        return cls(
            osc=osc,
            rates=damping_rates(osc, h),
            h11=h.h11, h33=h.h33, h13r=h.h13r,
            h22=h.h22, h44=h.h44, h24r=h.h24r,
            h12r=h.h12r,
            init=init,
        )

    def couplings(self) -> LindbladCouplings:
        return LindbladCouplings(
            h11=self.h11, h22=self.h22, h33=self.h33, h44=self.h44,
            h12r=self.h12r, h13r=self.h13r, h24r=self.h24r,
            h13i=0.5 * self.rates.gamma_a * self.osc.omega_a,
            h24i=0.5 * self.rates.gamma_b * self.osc.omega_b,
        )


def _oscillator_block(tau, omega, lam, gamma, h_x, h_p, h_xp, a, b, strict):
    """Generic single-oscillator solution; ``h_x, h_p, h_xp`` drive p^2, x^2 and xp."""
    tau = np.asarray(tau, dtype=float)
    T = tau * (omega / lam)
    c2 = np.cos(2.0 * T)
    s2 = np.sin(2.0 * T)
    e = np.exp(-gamma * T)
    hx, hp, hxp = h_x / omega, h_p / omega, h_xp / omega
    g2 = gamma * gamma
    den = g2 + 4.0

    A = 0.5 * b * e * (1.0 + c2) + 0.5 * a * e * (1.0 - c2)
    C = 0.5 * a * e * (1.0 + c2) + 0.5 * b * e * (1.0 - c2)
    B = 0.5 * (b - a) * e * s2

    if gamma == 0.0:
        # 1/gamma terms pair with (1 - e^{-gamma T}) and grow linearly in T
        A = A + hx * (0.5 * T + 0.25 * s2) + hp * (0.5 * T - 0.25 * s2) + hxp * 0.5 * (1.0 - c2)
        C = C + hx * (0.5 * T - 0.25 * s2) + hp * (0.5 * T + 0.25 * s2) - hxp * 0.5 * (1.0 - c2)
    else:
        one_minus_e = -np.expm1(-gamma * T)
        A = (
            A
            + hx / (gamma * den) * (g2 * (1.0 - 0.5 * e * (1.0 + c2)) + 2.0 * one_minus_e + gamma * e * s2)
            + hp / (2.0 * gamma * den) * (-g2 * e * (1.0 - c2) + 4.0 * one_minus_e - 2.0 * gamma * e * s2)
            + hxp / den * (2.0 * (1.0 - e * c2) - gamma * e * s2)
        )
        C = (
            C
            + hx / (2.0 * gamma * den) * (-g2 * e * (1.0 - c2) + 4.0 * one_minus_e - 2.0 * gamma * e * s2)
            + hp / (2.0 * gamma * den) * (g2 * (1.0 - e * c2) + den * one_minus_e + 2.0 * gamma * e * s2)
            + hxp / den * (-2.0 * (1.0 - e * c2) + gamma * e * s2)
        )
    # the published B-row has "- 2 e sin" inside the xp-drive bracket; the ODE needs "+"
    sin_sign = -1.0 if strict else 1.0
    B = (
        B
        + (hx - hp) / den * (1.0 - e * (c2 + 0.5 * gamma * s2))
        - hxp / den * (gamma * (1.0 - e * c2) + sin_sign * 2.0 * e * s2)
    )
    return A, B, C


def a_block(tau, p: ClosedFormParams, strict: bool = False):
    """``(A11, B11, C11)`` of oscillator A at ``tau`` (scalar or array).

    ``strict=True`` evaluates the B11 expression with its published sign.
    """
    i = p.init
    return _oscillator_block(
        tau, p.osc.omega_a, p.osc.lam, p.rates.gamma_a, p.h11, p.h33, p.h13r, i.a1, i.b1, strict
    )


def b_block(tau, p: ClosedFormParams, strict: bool = False):
    """``(A22, B22, C22)``: the A-block with 1->2, 3->4, A->B substituted."""
    i = p.init
    return _oscillator_block(
        tau, p.osc.omega_b, p.osc.lam, p.rates.gamma_b, p.h22, p.h44, p.h24r, i.a2, i.b2, strict
    )


def _require_unequal(r: float) -> None:
    if abs(1.0 - r) < R_EQUAL_TOL:
        raise UnsupportedParameterError(
            "cross-block closed form divides by (1 - r); r = 1 has no literal evaluation"
        )


def cross_block(tau, p: ClosedFormParams):
    """``(A12, B12, B21, C12)`` evaluated term by term as published."""
    r = p.osc.r
    _require_unequal(r)
    G = p.rates.gamma
    a12, b12 = p.init.a12, p.init.b12
    h = p.h12r / p.osc.omega_a
    T = np.asarray(tau, dtype=float) * (p.osc.omega_a / p.osc.lam)
    e = np.exp(-G * T)
    up, dn = 1.0 + r, 1.0 - r
    Pp = G * G + up * up
    Pm = G * G + dn * dn
    D = Pp * Pm
    ca, sa = np.cos(T), np.sin(T)
    cb, sb = np.cos(r * T), np.sin(r * T)
    cp, sp = np.cos(up * T), np.sin(up * T)
    cm, sm = np.cos(dn * T), np.sin(dn * T)

    # the constant and cosine drive terms of A12 and C12 are grouped as (1 - e cos)
    # so that their cancellation at tau = 0 is exact; (G^2+1+r^2)/D = (1/Pp + 1/Pm)/2
    # and G r / D = G (1/Pm - 1/Pp) / 4
    A12 = (
        b12 * e * ca * cb
        + a12 * e * sa * sb
        + h * G / 2.0 * ((1.0 - e * cp) / Pp + (1.0 - e * cm) / Pm)
        + h * e / 2.0 * (up * sp / Pp - dn * sm / Pm)
    )
    B12 = (
        b12 * e / 4.0 * (sp + sm)
        - a12 * e / 2.0 * (3.0 / up * sp + 1.0 / dn * sm)
        + h * (G * G + 1.0 + r * r - r) / D
        - h * 3.0 * e / (4.0 * up * Pp) * (G * sp + up * cp)
        - h * e / (4.0 * dn * Pm) * (G * sm + dn * cm)
    )
    B21 = (
        b12 * e / (4.0 * up) * ((2.0 + r) / up * sp + (2.0 - r) / dn * sm)
        - a12 * e / 2.0 * (sp + sm)
        + h * (G * G + 1.0) / D
        - h * (2.0 + r) * e / (4.0 * up * Pp) * (-G * sp + up * cp)
        - h * (2.0 - r) * e / (4.0 * dn * Pm) * (-G * sm + dn * cm)
    )
    C12 = (
        a12 * e * ca * cb
        + b12 * e * sa * sb
        + h * G / 4.0 * ((1.0 - e * cm) / Pm - (1.0 - e * cp) / Pp)
        - h * e / 4.0 * (up * sp / Pp - dn * sm / Pm)
    )
    return A12, B12, B21, C12


def cross_block_asymptote(p: ClosedFormParams):
    """tau-independent terms of the cross-block expressions (their tau -> inf limit)."""
    r, G = p.osc.r, p.rates.gamma
    h = p.h12r / p.osc.omega_a
    D = (G * G + (1.0 + r) ** 2) * (G * G + (1.0 - r) ** 2)
    return (
        h * G * (G * G + 1.0 + r * r) / D,
        h * (G * G + 1.0 + r * r - r) / D,
        h * (G * G + 1.0) / D,
        h * G * r / D,
    )


def det_cs_asymptotic(p: ClosedFormParams) -> tuple[float, str]:
    """Long-time ``det C_s`` and its classification (negative means entangled)."""
    G, r = p.rates.gamma, p.osc.r
    if not G > 0:
        raise UnsupportedParameterError(f"asymptotic determinant needs gamma > 0, got {G!r}")
    pref = p.h12r / (p.osc.omega_a * (G * G + (1.0 + r) ** 2) * (G * G + (1.0 - r) ** 2))
    bracket = (r - 1.0) * G**4 + G * G * (r**3 - r * r + 2.0 * r - 2.0) - (r * r - r + 1.0)
    value = pref * pref * bracket + 0.0  # no signed zero when h12r = 0
    return value, ("entangled" if value < 0 else "unentangled")


def closed_form_state(tau, p: ClosedFormParams, strict: bool = False) -> np.ndarray:
    """All ten coefficients stacked along the last axis, in state-vector order."""
    a = a_block(tau, p, strict)
    b = b_block(tau, p, strict)
    c = cross_block(tau, p)
    return np.stack(np.broadcast_arrays(*a, *b, *c), axis=-1)
