"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 numeric divergence,
3 configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .closed_form import (
    R_EQUAL_TOL,
    a_block,
    b_block,
    closed_form_state,
    cross_block_asymptote,
    det_cs_asymptotic,
)
from .dynamics import psd_check, stationary_state
from .errors import (
    ConfigError,
    DivergenceError,
    LindbladPairError,
    ModelViolationError,
    NoStationaryStateError,
    UnsupportedParameterError,
    ValidationError,
)
from .experiments import (
    CASES,
    FIGURES,
    INCONSISTENCY_ATOL,
    RunConfig,
    format_csv,
    load_config,
    parse_config,
    run_figure,
    run_sweep,
)
from .integrator import compare_closed_form, integrate
from .simon import validate_simon
from .state_space import STATE_ORDER

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGENCE = 2
EXIT_CONFIG = 3

# closed-form vs RK4 tolerance on the single-oscillator blocks
BLOCK_TOL = 1e-6


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _trajectory(cfg: RunConfig):
    return integrate(cfg.initial_state(), cfg.osc, cfg.couplings, cfg.integrator, cfg.model, cfg.transcription)


def cmd_validate(cfg: RunConfig, args) -> int:
    report = validate_simon(cfg.init)
    print(report.format())
    psd = psd_check(cfg.couplings)
    if not psd.is_psd:
        print(f"warning: coupling matrix not positive semidefinite (min eigenvalue {psd.min_eigenvalue:.6g})")
    if cfg.model == "simplified":
        extra = cfg.couplings.out_of_model()
        if extra:
            print(f"FAIL simplified model: nonzero couplings outside the model: {', '.join(extra)}")
            return EXIT_VALIDATION
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_simulate(cfg: RunConfig, args) -> int:
    traj = _trajectory(cfg)
    header = ["tau", *STATE_ORDER, "det_cs"]
    table = np.column_stack([traj.taus, traj.states, traj.det_cs()])
    _emit(format_csv(header, table, cfg.precision), cfg.csv_path)
    return EXIT_OK


def cmd_closed_form(cfg: RunConfig, args) -> int:
    p = cfg.closed_form_params()
    step = cfg.integrator.dt * cfg.integrator.sample_stride
    n = int(math.floor(args.t_end / step + 1e-9))
    taus = np.arange(n + 1) * step
    if taus[-1] < args.t_end:
        taus = np.append(taus, args.t_end)
    if abs(1.0 - p.osc.r) < R_EQUAL_TOL:
        header = ["tau", *STATE_ORDER[:6]]
        table = np.column_stack([taus, *np.broadcast_arrays(*a_block(taus, p), *b_block(taus, p))])
    else:
        header = ["tau", *STATE_ORDER]
        table = np.column_stack([taus, closed_form_state(taus, p)])
    _emit(format_csv(header, table, cfg.precision), cfg.csv_path)
    return EXIT_OK


def _stationary_lines(cfg: RunConfig):
    st = stationary_state(cfg.osc, cfg.couplings, cfg.model, cfg.transcription)
    det_st = st.C12 * st.A12 - st.B12 * st.B21
    lines = [f"{name:>4} {getattr(st, name): .9g}" for name in STATE_ORDER]
    lines.append(f"det_cs stationary   {det_st: .9g}")
    det_asym = math.nan
    try:
        det_asym, label = det_cs_asymptotic(cfg.closed_form_params())
        lines.append(f"det_cs asymptotic   {det_asym: .9g} ({label})")
    except UnsupportedParameterError as exc:
        lines.append(f"det_cs asymptotic   unavailable: {exc}")
    return st, det_st, det_asym, lines


def cmd_stationary(cfg: RunConfig, args) -> int:
    _, det_st, det_asym, lines = _stationary_lines(cfg)
    print("\n".join(lines))
    if math.isfinite(det_asym) and abs(det_st - det_asym) > INCONSISTENCY_ATOL:
        print("INCONSISTENT: stationary and asymptotic determinants differ")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    if cfg.model != "simplified":
        raise ValidationError("compare needs the simplified model")
    traj = _trajectory(cfg)
    p = cfg.closed_form_params()
    diffs = compare_closed_form(traj, p)
    status = EXIT_OK
    print("component  max|closed form - RK4|")
    for name in STATE_ORDER:
        asserted = name in STATE_ORDER[:6]
        d = diffs[name]
        tag = ("ok" if d <= BLOCK_TOL else "FAIL") if asserted else "reported"
        if asserted and not d <= BLOCK_TOL:
            status = EXIT_VALIDATION
        print(f"{name:>9}  {d:.3e}  {tag}")
    st, det_st, det_asym, _ = _stationary_lines(cfg)
    print()
    print("cross block   stationary       closed-form asymptote")
    if abs(1.0 - p.osc.r) >= R_EQUAL_TOL:
        for name, value in zip(STATE_ORDER[6:], cross_block_asymptote(p)):
            print(f"{name:>11}  {getattr(st, name): .9g}  {value: .9g}")
    print(f"{'det_cs':>11}  {det_st: .9g}  {det_asym: .9g}")
    if math.isfinite(det_asym) and abs(det_st - det_asym) > INCONSISTENCY_ATOL:
        print("INCONSISTENT: stationary solve and asymptotic closed form disagree")
    return status


def cmd_figure(args) -> int:
    cfg = load_config(args.config) if args.config else parse_config({})
    print(f"figure {args.which}: {cfg.describe()}")
    cases = {"3a": "A", "3b": "B", "4": "AB"}.get(args.which, "")
    for c in cases:
        a12, b12 = CASES[c]
        print(f"  case {c} uses a12={a12:g} b12={b12:g}")
    for path in run_figure(args.which, cfg, args.out, args.with_closed_form, args.svg):
        print(path)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc
    text = run_sweep(cfg, args.param, values, workers=args.workers)
    _emit(text, args.out or cfg.csv_path)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the configuration code, not argparse's 2 (divergence here)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lindblad-pair", description="Gaussian covariance dynamics of two coupled Lindblad oscillators."
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (
        ("validate", "check the initial state and couplings"),
        ("simulate", "integrate and write the trajectory CSV"),
        ("compare", "closed forms vs RK4, and the stationary/asymptotic report"),
        ("stationary", "stationary state by direct linear solve"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")

    p = sub.add_parser("closed-form", help="evaluate the closed-form solutions on a grid")
    p.add_argument("config")
    p.add_argument("--t-end", type=float, required=True)

    p = sub.add_parser("figure", help="reproduce one figure as CSV")
    p.add_argument("which", choices=FIGURES)
    p.add_argument("--out", default=".")
    p.add_argument("--with-closed-form", action="store_true")
    p.add_argument("--svg", action="store_true", help="also write a line chart")
    p.add_argument("--config", help="JSON overrides of the figure parameters")

    p = sub.add_parser("sweep", help="summaries over values of one parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="dotted path, e.g. couplings.h12r or oscillator.r")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "closed-form": cmd_closed_form,
    "compare": cmd_compare,
    "stationary": cmd_stationary,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure":
            return cmd_figure(args)
        if args.command == "closed-form" and not (math.isfinite(args.t_end) and args.t_end > 0):
            raise ConfigError(f"--t-end must be positive, got {args.t_end!r}")
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValidationError, ModelViolationError, NoStationaryStateError, UnsupportedParameterError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except LindbladPairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
