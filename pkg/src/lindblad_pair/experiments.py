"""Run configuration, figure reproduction, sweeps and CSV/SVG output."""

from __future__ import annotations

import copy
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .closed_form import (
    ClosedFormParams,
    a_block,
    b_block,
    cross_block,
    det_cs_asymptotic,
)
from .dynamics import LindbladCouplings, OscillatorParams, stationary_state
from .errors import ConfigError, NoStationaryStateError, UnsupportedParameterError
from .integrator import IntegratorConfig, Trajectory, integrate
from .simon import SimonParams, to_covariance_state

__all__ = [
    "FIGURES",
    "RunConfig",
    "EntanglementWindows",
    "default_config",
    "parse_config",
    "load_config",
    "with_override",
    "entanglement_windows",
    "run_figure",
    "figure_table",
    "run_sweep",
    "sweep_table",
    "format_number",
    "write_csv",
    "read_csv",
    "format_csv",
    "write_svg",
]

FIGURES = ("1", "2", "3a", "3b", "4")
CASES = {"A": (0.0, 0.0), "B": (0.5, -0.5)}
DEFAULT_GAMMA = 0.25
HYSTERESIS = 1e-8
# stationary and asymptotic determinants further apart than this are flagged
INCONSISTENCY_ATOL = 1e-6

_DEFAULTS = {
    "oscillator": {"omega_a": 1.0, "omega_b": 3.0, "lambda": 1.0},
    "couplings": {"h11": 1.0, "h22": 2.0, "h33": 1.0, "h44": 4.0, "h13r": 1.0, "h24r": 1.0, "h12r": 1.0},
    "initial": {"a1": 0.5, "b1": 0.5, "a2": 0.5, "b2": 0.5, "a12": 0.0, "b12": 0.0},
    "model": "simplified",
    "transcription": "derived",
    "integrator": {"dt": 1e-3, "t_end": 15.0, "sample_stride": 10, "method": "rk4", "adapt_tol": 1e-9},
    "outputs": {"csv_path": None, "svg_path": None, "precision": 9},
}
_SECTIONS = {
    "oscillator": {"omega_a", "omega_b", "lambda"},
    "couplings": {f.name for f in fields(LindbladCouplings)},
    "damping": {"gamma_a", "gamma_b"},
    "initial": {f.name for f in fields(SimonParams)},
    "integrator": {f.name for f in fields(IntegratorConfig)},
    "outputs": {"csv_path", "svg_path", "precision"},
}
_SCALARS = {"model", "transcription"}
# sweepable paths that are not stored under their own name
_ALIASES = {"oscillator.r"}


@dataclass(frozen=True)
class RunConfig:
    osc: OscillatorParams
    couplings: LindbladCouplings
    init: SimonParams
    model: str
    transcription: str
    integrator: IntegratorConfig
    csv_path: str | None
    svg_path: str | None
    precision: int
    raw: dict

    def describe(self) -> str:
        """One-line summary of every parameter in effect."""
        h = {f.name: getattr(self.couplings, f.name) for f in fields(LindbladCouplings)}
        nonzero = ", ".join(f"{k}={v:g}" for k, v in h.items() if v != 0.0)
        i = self.init
        return (
            f"omega_a={self.osc.omega_a:g} omega_b={self.osc.omega_b:g} lambda={self.osc.lam:g} "
            f"r={self.osc.r:g}; {nonzero}; a1={i.a1:g} b1={i.b1:g} a2={i.a2:g} b2={i.b2:g} "
            f"a12={i.a12:g} b12={i.b12:g}; model={self.model}; dt={self.integrator.dt:g} "
            f"t_end={self.integrator.t_end:g}"
        )

    def closed_form_params(self) -> ClosedFormParams:
        return ClosedFormParams.from_couplings(self.osc, self.couplings, self.init)

    def initial_state(self):
        return to_covariance_state(self.init)


def default_config() -> dict:
    """Figure-caption parameters as a raw config document."""
    return copy.deepcopy(_DEFAULTS)


def _number(path: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: value must be finite, got {v!r}")
    return v


def _merge(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - set(_SECTIONS) - _SCALARS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = default_config()
    for name, allowed in _SECTIONS.items():
        if name not in doc:
            continue
        section = doc[name]
        if not isinstance(section, dict):
            raise ConfigError(f"{name}: expected an object")
        bad = set(section) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {name}: {', '.join(sorted(bad))}")
        merged.setdefault(name, {}).update(section)
    for name in _SCALARS:
        if name in doc:
            merged[name] = doc[name]

    couplings = merged["couplings"]
    if "damping" in merged:
        clash = {"h13i", "h24i"} & set(couplings)
        if clash:
            raise ConfigError(f"damping rates and couplings {', '.join(sorted(clash))} both given")
    elif not {"h13i", "h24i"} & set(couplings):
        merged["damping"] = {"gamma_a": DEFAULT_GAMMA, "gamma_b": DEFAULT_GAMMA}
    return merged


def parse_config(doc: dict) -> RunConfig:
    """Validate a raw config document and fill in the figure-caption defaults.

    Damping can be given either as ``damping.gamma_a/gamma_b`` or as the
    couplings ``h13i/h24i``, not both. With neither, both rates are 0.25.
    """
    raw = _merge(doc)
    o = raw["oscillator"]
    try:
        osc = OscillatorParams(
            omega_a=_number("oscillator.omega_a", o["omega_a"]),
            omega_b=_number("oscillator.omega_b", o["omega_b"]),
            lam=_number("oscillator.lambda", o["lambda"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    hvals = {k: _number(f"couplings.{k}", v) for k, v in raw["couplings"].items()}
    if "damping" in raw:
        d = raw["damping"]
        for k in ("gamma_a", "gamma_b"):
            if k not in d:
                raise ConfigError(f"damping.{k} missing")
        couplings = LindbladCouplings.from_damping(
            osc, _number("damping.gamma_a", d["gamma_a"]), _number("damping.gamma_b", d["gamma_b"]), **hvals
        )
    else:
        hvals.setdefault("h13i", 0.5 * DEFAULT_GAMMA * osc.omega_a)
        hvals.setdefault("h24i", 0.5 * DEFAULT_GAMMA * osc.omega_b)
        couplings = LindbladCouplings(**hvals)

    init = SimonParams(**{k: _number(f"initial.{k}", v) for k, v in raw["initial"].items()})

    model = raw["model"]
    if model not in ("general", "simplified"):
        raise ConfigError(f"model must be 'general' or 'simplified', got {model!r}")
    transcription = raw["transcription"]
    if transcription not in ("derived", "listed"):
        raise ConfigError(f"transcription must be 'derived' or 'listed', got {transcription!r}")

    ic = dict(raw["integrator"])
    for k in ("dt", "t_end", "adapt_tol"):
        ic[k] = _number(f"integrator.{k}", ic[k])
    try:
        integ = IntegratorConfig(**ic)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"integrator: {exc}") from exc

    out = raw["outputs"]
    precision = out["precision"]
    if isinstance(precision, bool) or not isinstance(precision, int) or not 1 <= precision <= 17:
        raise ConfigError(f"outputs.precision must be an integer in [1, 17], got {precision!r}")
    for k in ("csv_path", "svg_path"):
        if out[k] is not None and not isinstance(out[k], str):
            raise ConfigError(f"outputs.{k} must be a string or null")

    return RunConfig(osc, couplings, init, model, transcription, integ, out["csv_path"], out["svg_path"], precision, raw)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc)


def with_override(cfg: RunConfig, path: str, value: float) -> RunConfig:
    """Copy of ``cfg`` with the scalar at dotted ``path`` replaced.

    ``oscillator.r`` is accepted and sets ``omega_b = r * omega_a``.
    """
    if not math.isfinite(value):
        raise ConfigError(f"sweep value must be finite, got {value!r}")
    raw = copy.deepcopy(cfg.raw)
    if path in _ALIASES:
        raw["oscillator"]["omega_b"] = value * raw["oscillator"]["omega_a"]
        return parse_config(raw)
    parts = path.split(".")
    if len(parts) != 2 or parts[0] not in _SECTIONS or parts[1] not in _SECTIONS[parts[0]]:
        raise ConfigError(f"invalid parameter path {path!r}")
    section, key = parts
    if section == "outputs" or (section == "integrator" and key == "method"):
        raise ConfigError(f"{path} is not a numeric model parameter")
    if section == "damping" and "damping" not in raw:
        raise ConfigError(f"{path}: damping is set through couplings.h13i/h24i in this config")
    if section == "couplings" and key in ("h13i", "h24i") and "damping" in raw:
        raise ConfigError(f"{path}: damping is set through damping.gamma_a/gamma_b in this config")
    if section == "integrator" and key == "sample_stride":
        if value != int(value):
            raise ConfigError("integrator.sample_stride must be an integer")
        value = int(value)
    raw.setdefault(section, {})[key] = value
    return parse_config(raw)


# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class EntanglementWindows:
    intervals: tuple[tuple[float, float], ...]
    crossing_taus: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.intervals)


def _zero_between(taus, det, j, k) -> float:
    """Linear-interpolated zero of ``det`` at the first raw sign change in samples j..k."""
    for i in range(j, k):
        d0, d1 = det[i], det[i + 1]
        if d0 == 0.0:
            return float(taus[i])
        if (d0 < 0) != (d1 < 0) or d1 == 0.0:
            return float(taus[i] + (taus[i + 1] - taus[i]) * d0 / (d0 - d1))
    return float(taus[k])


def entanglement_windows(traj_or_taus, det=None, hysteresis: float = HYSTERESIS) -> EntanglementWindows:
    """Intervals with ``det C_s < 0`` and the sign changes between them.

    Values within ``hysteresis`` of zero do not change the current sign. A
    window opened from inside the band (no sign change) starts at the last
    in-band sample.
    """
    if isinstance(traj_or_taus, Trajectory):
        taus, det = traj_or_taus.taus, traj_or_taus.det_cs()
    else:
        taus, det = np.asarray(traj_or_taus, dtype=float), np.asarray(det, dtype=float)
    signs = np.where(det < -hysteresis, -1, np.where(det > hysteresis, 1, 0))

    intervals: list[tuple[float, float]] = []
    crossings: list[float] = []
    state = int(signs[0])
    last = 0  # last sample carrying ``state`` (or last in-band sample while state is 0)
    start = float(taus[0]) if state < 0 else None
    for k in range(1, len(taus)):
        s = int(signs[k])
        if s == 0:
            if state == 0:
                last = k
            continue
        if s == state:
            last = k
            continue
        if state == 0:
            if s < 0:
                start = float(taus[last])
        else:
            t = _zero_between(taus, det, last, k)
            crossings.append(t)
            if s < 0:
                start = t
            else:
                intervals.append((start, t))
                start = None
        state, last = s, k
    if start is not None:
        intervals.append((start, float(taus[-1])))
    return EntanglementWindows(tuple(intervals), tuple(crossings))


# ---------------------------------------------------------------- figures


def _case_config(cfg: RunConfig, case: str) -> RunConfig:
    raw = copy.deepcopy(cfg.raw)
    raw["initial"]["a12"], raw["initial"]["b12"] = CASES[case]
    return parse_config(raw)


def _trajectory(cfg: RunConfig) -> Trajectory:
    return integrate(cfg.initial_state(), cfg.osc, cfg.couplings, cfg.integrator, cfg.model, cfg.transcription)


def _d_decoh_closed(tau, p: ClosedFormParams, block):
    a, b, c = block(tau, p)
    return c / (2.0 * (a * c - b * b))


def figure_table(which: str, cfg: RunConfig | None = None, with_closed_form: bool = False):
    """Columns of one figure as ``(header, 2-D array)``."""
    if which not in FIGURES:
        raise ConfigError(f"figure must be one of {', '.join(FIGURES)}, got {which!r}")
    cfg = cfg or parse_config({})
    if which in ("1", "2"):
        traj = _trajectory(cfg)
        taus = traj.taus
        if which == "1":
            header = ["tau", "p2_A", "p2_B"]
            cols = [taus, traj.column("A11"), traj.column("A22")]
        else:
            header = ["tau", "d_decoh_A", "d_decoh_B"]
            cols = [taus, traj.d_decoh("A"), traj.d_decoh("B")]
        if with_closed_form:
            p = cfg.closed_form_params()
            if which == "1":
                cols += [a_block(taus, p)[0], b_block(taus, p)[0]]
                header += ["p2_A_cf", "p2_B_cf"]
            else:
                cols += [_d_decoh_closed(taus, p, a_block), _d_decoh_closed(taus, p, b_block)]
                header += ["d_decoh_A_cf", "d_decoh_B_cf"]
    elif which in ("3a", "3b"):
        case_cfg = _case_config(cfg, "A" if which == "3a" else "B")
        traj = _trajectory(case_cfg)
        taus = traj.taus
        names = ["A12", "B12", "B21", "C12"]
        header = ["tau", *names]
        cols = [taus, *(traj.column(n) for n in names)]
        if with_closed_form:
            cols += list(np.broadcast_arrays(*cross_block(taus, case_cfg.closed_form_params())))
            header += [f"{n}_cf" for n in names]
    else:
        trajs = {c: _trajectory(_case_config(cfg, c)) for c in CASES}
        taus = trajs["A"].taus
        header = ["tau", "det_cs_A", "det_cs_B"]
        cols = [taus, trajs["A"].det_cs(), trajs["B"].det_cs()]
        if with_closed_form:
            for c in CASES:
                a12, b12, b21, c12 = cross_block(taus, _case_config(cfg, c).closed_form_params())
                cols.append(c12 * a12 - b12 * b21)
                header.append(f"det_cs_{c}_cf")
    return header, np.column_stack(cols)


def run_figure(
    which: str,
    cfg: RunConfig | None = None,
    out_dir: str | os.PathLike = ".",
    with_closed_form: bool = False,
    svg: bool = False,
) -> list[Path]:
    """Write ``figure<id>.csv`` (and ``.svg``) into ``out_dir``; returns the paths."""
    cfg = cfg or parse_config({})
    header, table = figure_table(which, cfg, with_closed_form)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"figure{which}.csv"
    write_csv(csv_path, header, table, cfg.precision)
    paths = [csv_path]
    if svg:
        svg_path = out / f"figure{which}.svg"
        write_svg(svg_path, header, table, title=f"Figure {which}")
        paths.append(svg_path)
    return paths


# ---------------------------------------------------------------- sweeps

SWEEP_HEADER = [
    "value",
    "det_cs_end",
    "det_cs_stationary",
    "det_cs_asymptotic",
    "asymptotic_entangled",
    "window_count",
    "inconsistent",
]


def _sweep_row(cfg: RunConfig, path: str, value: float) -> list:
    c = with_override(cfg, path, value)
    traj = _trajectory(c)
    det_end = float(traj.det_cs()[-1])
    try:
        st = stationary_state(c.osc, c.couplings, c.model, c.transcription)
        det_st = st.C12 * st.A12 - st.B12 * st.B21
    except NoStationaryStateError:
        det_st = math.nan
    try:
        det_asym, label = det_cs_asymptotic(c.closed_form_params())
        ent = int(label == "entangled")
    except UnsupportedParameterError:
        det_asym, ent = math.nan, 0
    windows = entanglement_windows(traj)
    inconsistent = int(
        math.isfinite(det_st) and math.isfinite(det_asym) and abs(det_st - det_asym) > INCONSISTENCY_ATOL
    )
    return [value, det_end, det_st, det_asym, ent, windows.count, inconsistent]


def sweep_table(cfg: RunConfig, path: str, values, workers: int = 1) -> tuple[list[str], list[list]]:
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    for v in values:
        if not math.isfinite(v):
            raise ConfigError(f"sweep value must be finite, got {v!r}")
    with_override(cfg, path, values[0])  # surface path errors before any work
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _sweep_row(cfg, path, v), values))
    else:
        rows = [_sweep_row(cfg, path, v) for v in values]
    return SWEEP_HEADER, rows


def run_sweep(cfg: RunConfig, path: str, values, out: str | os.PathLike | None = None, workers: int = 1) -> str:
    """Sweep ``path`` over ``values``; returns the CSV text and writes it to ``out`` if given."""
    header, rows = sweep_table(cfg, path, values, workers)
    text = format_csv(header, rows, cfg.precision)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    return text


# ---------------------------------------------------------------- CSV / SVG


def format_number(x, precision: int = 9) -> str:
    """Shortest round-trip text of ``x`` rounded to ``precision`` significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(f"{x:.{precision}g}"))


def format_csv(header, rows, precision: int = 9) -> str:
    lines = [",".join(header)]
    lines += [",".join(format_number(v, precision) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, precision: int = 9) -> None:
    Path(path).write_text(format_csv(header, rows, precision), encoding="utf-8", newline="\n")


def _parse_token(tok: str):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def read_csv(path) -> tuple[list[str], list[list]]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    header = lines[0].split(",")
    rows = [[_parse_token(t) for t in line.split(",")] for line in lines[1:]]
    return header, rows


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")


def write_svg(path, header, table, title: str = "", width: int = 640, height: int = 400) -> None:
    """Line chart of columns 1.. against column 0, with axes and a legend."""
    table = np.asarray(table, dtype=float)
    x = table[:, 0]
    ys = table[:, 1:]
    finite = ys[np.isfinite(ys)]
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    x0, x1 = float(x[0]), float(x[-1])
    if x1 == x0:
        x1 = x0 + 1.0
    ml, mr, mt, mb = 60, 140, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="18">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{ml}" y="{height - 10}">{x0:.4g}</text>',
        f'<text x="{ml + pw}" y="{height - 10}" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{header[0]}</text>',
        f'<text x="{ml - 4}" y="{mt + 4}" text-anchor="end">{y1:.4g}</text>',
        f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end">{y0:.4g}</text>',
    ]
    if y0 < 0 < y1:
        parts.append(
            f'<line x1="{ml}" y1="{py(0.0):.2f}" x2="{ml + pw}" y2="{py(0.0):.2f}" stroke="#bbb"/>'
        )
    for j in range(ys.shape[1]):
        color = _PALETTE[j % len(_PALETTE)]
        ok = np.isfinite(ys[:, j])
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], ys[ok, j]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        ly = mt + 14 * (j + 1)
        parts.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" stroke="{color}"/>')
        parts.append(f'<text x="{ml + pw + 34}" y="{ly}">{header[j + 1]}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8", newline="\n")
