"""RK4 integration of the coefficient ODEs and the checks built on it.

Fixed-step RK4 is the reference solution everywhere in the package. The
step-halving adaptive mode only exists for convergence studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Literal

import numpy as np

from . import kernels
from .closed_form import R_EQUAL_TOL, ClosedFormParams, a_block, b_block, closed_form_state
from .dynamics import LindbladCouplings, OscillatorParams, affine_system
from .errors import DivergenceError, ValidationError
from .simon import to_covariance_state
from .state_space import STATE_ORDER, CovarianceState

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "residual_check",
    "compare_closed_form",
]

Method = Literal["rk4", "rk4_adaptive"]

# t_end / dt within this relative distance of an integer counts as a whole number of steps
STEP_SNAP_RTOL = 1e-9
# relative tolerance on sample spacing for residual_check
SPACING_RTOL = 1e-9
MAX_HALVINGS = 40


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    dt: float = 1e-3
    sample_stride: int = 1
    method: Method = "rk4"
    adapt_tol: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be positive and finite, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValidationError(f"t_end must be positive and finite, got {self.t_end!r}")
        if isinstance(self.sample_stride, bool) or not isinstance(self.sample_stride, int):
            raise ValidationError(f"sample_stride must be an integer, got {self.sample_stride!r}")
        if self.sample_stride < 1:
            raise ValidationError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if self.method not in ("rk4", "rk4_adaptive"):
            raise ValidationError(f"unknown method {self.method!r}")
        if not self.adapt_tol > 0:
            raise ValidationError(f"adapt_tol must be positive, got {self.adapt_tol!r}")

    def step_plan(self) -> tuple[int, float]:
        """``(n_full, last_dt)``: whole steps of ``dt`` then one shortened step."""
        ratio = self.t_end / self.dt
        n = round(ratio)
        if abs(ratio - n) <= STEP_SNAP_RTOL * max(1.0, ratio):
            return int(n), 0.0
        n = math.floor(ratio)
        return n, self.t_end - n * self.dt


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution. ``states[k]`` is the state vector at ``taus[k]``."""

    taus: np.ndarray
    states: np.ndarray
    osc: OscillatorParams
    couplings: LindbladCouplings
    model: str = "simplified"
    transcription: str = "derived"

    def __post_init__(self):
        object.__setattr__(self, "taus", _readonly(self.taus))
        object.__setattr__(self, "states", _readonly(self.states))
        if self.states.shape != (self.taus.size, len(STATE_ORDER)):
            raise ValueError(f"states shape {self.states.shape} does not match {self.taus.size} samples")
        if self.taus.size > 1 and not np.all(np.diff(self.taus) > 0):
            raise ValueError("taus must be strictly increasing")

    def __len__(self) -> int:
        return self.taus.size

    def state(self, k: int) -> CovarianceState:
        return CovarianceState.from_array(self.states[k], tau=float(self.taus[k]))

    @property
    def samples(self) -> list[tuple[float, CovarianceState]]:
        return [(float(t), self.state(k)) for k, t in enumerate(self.taus)]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_ORDER.index(name)]

    def det_cs(self) -> np.ndarray:
        s = self.states
        return s[:, 9] * s[:, 6] - s[:, 7] * s[:, 8]

    def omega_sq(self, which: str = "A") -> np.ndarray:
        a, b, c = self._block(which)
        return a * c - b * b

    def d_decoh(self, which: str = "A") -> np.ndarray:
        """Squared decoherence length ``<x^2> / (2 Omega^2)`` per sample."""
        a, b, c = self._block(which)
        return c / (2.0 * (a * c - b * b))

    def d_corr(self, which: str = "A") -> np.ndarray:
        return self._block(which)[2]

    def _block(self, which: str):
        if which == "A":
            return self.states[:, 0], self.states[:, 1], self.states[:, 2]
        if which == "B":
            return self.states[:, 3], self.states[:, 4], self.states[:, 5]
        raise ValueError(f"subsystem must be 'A' or 'B', got {which!r}")


def _sample_taus(cfg: IntegratorConfig, n_full: int, last_dt: float) -> np.ndarray:
    n_steps = n_full + (1 if last_dt > 0 else 0)
    steps = list(range(0, n_steps + 1, cfg.sample_stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    taus = np.array(steps, dtype=float) * cfg.dt
    taus[-1] = cfg.t_end
    return taus


def _adaptive_segment(m, c, x, span, h0, tol):
    """Advance ``x`` by ``span`` with step halving on a step-doubling error estimate."""
    t = 0.0
    h = min(h0, span)
    while t < span:
        h = min(h, span - t)
        for _ in range(MAX_HALVINGS):
            full = kernels.rk4_step(m, c, x, h)
            half = kernels.rk4_step(m, c, kernels.rk4_step(m, c, x, 0.5 * h), 0.5 * h)
            err = float(np.max(np.abs(full - half)))
            if err <= tol:
                break
            h *= 0.5
        x = half
        t += h
        if not np.all(np.isfinite(x)):
            return x, False
        if err < tol / 32.0:
            h *= 2.0
    return x, True


def integrate(
    initial: CovarianceState,
    osc: OscillatorParams,
    h: LindbladCouplings,
    cfg: IntegratorConfig,
    model: str = "simplified",
    transcription: str = "derived",
    backend: str | None = None,
) -> Trajectory:
    """RK4 trajectory from ``initial`` (taken at tau = 0) to ``cfg.t_end``."""
    m, c = affine_system(osc, h, model, transcription)
    x0 = initial.as_array()
    n_full, last_dt = cfg.step_plan()
    taus = _sample_taus(cfg, n_full, last_dt)

    if cfg.method == "rk4":
        out, bad = kernels.rk4_affine(m, c, x0, cfg.dt, n_full, last_dt, cfg.sample_stride, backend)
        if bad >= 0:
            raise DivergenceError(min(bad * cfg.dt, cfg.t_end))
    else:
        out = np.empty((taus.size, x0.size))
        out[0] = x0
        x = x0.copy()
        for k in range(1, taus.size):
            x, ok = _adaptive_segment(m, c, x, taus[k] - taus[k - 1], cfg.dt, cfg.adapt_tol)
            if not ok:
                raise DivergenceError(float(taus[k]))
            out[k] = x
    return Trajectory(taus, out, osc, h, model, transcription)


def residual_check(
    traj: Trajectory,
    osc: OscillatorParams | None = None,
    h: LindbladCouplings | None = None,
    model: str | None = None,
) -> float:
    """Max over interior samples of |central difference - RHS|.

    Parameters default to those stored on the trajectory.
    """
    if len(traj) < 3:
        raise ValidationError("residual check needs at least 3 samples")
    spacing = np.diff(traj.taus)
    step = spacing[0]
    if not np.allclose(spacing, step, rtol=SPACING_RTOL, atol=0.0):
        raise ValidationError("residual check needs uniformly spaced samples")
    osc = osc or traj.osc
    h = h or traj.couplings
    model = model or traj.model
    m, c = affine_system(osc, h, model, traj.transcription)
    x = traj.states
    deriv = (x[2:] - x[:-2]) / (2.0 * step)
    rhs = x[1:-1] @ m.T + c
    return float(np.max(np.abs(deriv - rhs)))


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def compare_closed_form(traj: Trajectory, p: ClosedFormParams, strict: bool = False) -> dict[str, float]:
    """Per-component max |closed form - trajectory| over the sample grid.

    Cross-block entries are NaN when ``r = 1``, where the closed form has no
    literal evaluation.
    """
    if traj.model != "simplified":
        raise ValidationError("closed forms describe the simplified model only")
    mismatched = [
        f.name for f in fields(OscillatorParams) if not _same(getattr(traj.osc, f.name), getattr(p.osc, f.name))
    ]
    ref = p.couplings()
    mismatched += [
        f.name for f in fields(LindbladCouplings) if not _same(getattr(traj.couplings, f.name), getattr(ref, f.name))
    ]
    if not np.array_equal(traj.states[0], to_covariance_state(p.init).as_array()):
        mismatched.append("initial state")
    if mismatched:
        raise ValidationError(f"trajectory and closed-form parameters differ: {', '.join(mismatched)}")

    if abs(1.0 - p.osc.r) < R_EQUAL_TOL:
        blocks = np.stack(
            np.broadcast_arrays(*a_block(traj.taus, p, strict), *b_block(traj.taus, p, strict)), axis=-1
        )
        diff = np.abs(blocks - traj.states[:, :6]).max(axis=0)
        values = list(diff) + [math.nan] * 4
    else:
        cf = closed_form_state(traj.taus, p, strict)
        values = list(np.abs(cf - traj.states).max(axis=0))
    return {name: float(v) for name, v in zip(STATE_ORDER, values)}
