"""Acceptance criteria 1-10, one PASS/FAIL line each at the stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed even
when output capture is on.
"""

import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import CASE_A, CASE_B, random_valid_state
from lindblad_pair.closed_form import ClosedFormParams, a_block, cross_block_asymptote, det_cs_asymptotic
from lindblad_pair.dynamics import LindbladCouplings, OscillatorParams, stationary_state
from lindblad_pair.experiments import entanglement_windows, figure_table, parse_config
from lindblad_pair.integrator import IntegratorConfig, compare_closed_form, integrate
from lindblad_pair.simon import to_covariance_state
from lindblad_pair.state_space import CovarianceState, ambiguity_eval, covariances_from_ambiguity


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    # compile the numba kernel once so runtime checks time the computation only
    osc = OscillatorParams(1.0, 3.0, 1.0)
    integrate(to_covariance_state(CASE_A), osc, LindbladCouplings(), IntegratorConfig(t_end=0.01))


def _solve_exact(rows, rhs):
    """Gauss-Jordan over Fractions."""
    n = len(rows)
    m = [list(map(F, r)) + [F(b)] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] / m[col][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


# Fig.-1 parameters as exact rationals
WA, WB = F(1), F(3)
GA, GB = F(1, 8), F(3, 8)  # h13i, h24i
G = GA + GB


def _exact_a_block():
    # 0 = -2 wa B - 2 g A + h11;  0 = wa A - wa C - 2 g B - h13r;  0 = 2 wa B - 2 g C + h33
    return _solve_exact(
        [[-2 * GA, -2 * WA, 0], [WA, -2 * GA, -WA], [0, 2 * WA, -2 * GA]], [-1, 1, -1]
    )


def _exact_cross_block():
    # unknowns (A12, B12, B21, C12); only A12 is driven, by h12r = 1
    return _solve_exact(
        [
            [-G, -WB, -WA, 0],
            [WB, -G, 0, -WA],
            [WA, 0, -G, -WB],
            [0, WA, WB, -G],
        ],
        [-1, 0, 0, 0],
    )


def test_criterion_1_initial_values(osc, couplings, report):
    t0 = time.perf_counter()
    ta = integrate(to_covariance_state(CASE_A), osc, couplings, IntegratorConfig(t_end=15.0, sample_stride=10))
    tb = integrate(to_covariance_state(CASE_B), osc, couplings, IntegratorConfig(t_end=15.0, sample_stride=10))
    elapsed = time.perf_counter() - t0
    s = ta.state(0)
    ok = (
        (s.A11, s.A22, s.C11, s.C22) == (0.5, 0.5, 0.5, 0.5)
        and (s.B11, s.B22, s.B12, s.B21) == (0.0, 0.0, 0.0, 0.0)
        and tb.det_cs()[0] == -0.25
        and elapsed < 1.0
    )
    report(1, ok, f"A11=A22=C11=C22=0.5, B=0, case-B det C_s(0)={float(tb.det_cs()[0])!r}, runtime {elapsed:.3f} s")


def test_criterion_2_stationary_a_block(osc, couplings, cf_params, report):
    t0 = time.perf_counter()
    st = stationary_state(osc, couplings)
    lin = np.array([st.A11, st.B11, st.C11])
    cf = np.array(a_block(200.0, cf_params), dtype=float)
    elapsed = time.perf_counter() - t0
    exact = np.array([float(v) for v in _exact_a_block()])
    hand = np.array([4.49231, -0.06154, 3.50769])
    ok = (
        np.abs(lin - hand).max() <= 1e-5
        and np.abs(cf - hand).max() <= 1e-5
        and np.abs(lin - exact).max() <= 1e-9
        and np.abs(cf - exact).max() <= 1e-9
        and elapsed < 1.0
    )
    report(
        2,
        ok,
        f"stationary {lin.round(6)}, a_block(200) {cf.round(6)}, vs exact 3x3 solve "
        f"{max(np.abs(lin - exact).max(), np.abs(cf - exact).max()):.1e}, runtime {elapsed:.3f} s",
    )


@pytest.mark.parametrize("init", ["A", "B"])
def test_criterion_3_closed_form_blocks(osc, couplings, init, report):
    simon = CASE_A if init == "A" else CASE_B
    p = ClosedFormParams.from_couplings(osc, couplings, simon)
    traj = integrate(to_covariance_state(simon), osc, couplings, IntegratorConfig(t_end=10.0, dt=1e-4, sample_stride=10))
    diff = compare_closed_form(traj, p)
    worst = max(diff[k] for k in ("A11", "B11", "C11", "A22", "B22", "C22"))
    report(3, worst <= 1e-6, f"case {init}: max |closed form - RK4(dt=1e-4)| on A/B blocks = {worst:.2e}")


def test_criterion_4_documented_inconsistency(osc, couplings, cf_params, report):
    st = stationary_state(osc, couplings)
    stat = np.array([st.A12, st.B12, st.B21, st.C12])
    asym = np.array(cross_block_asymptote(cf_params))
    det_st = st.C12 * st.A12 - st.B12 * st.B21
    det_asym, label = det_cs_asymptotic(cf_params)

    exact_stat = _exact_cross_block()
    exact_det = exact_stat[3] * exact_stat[0] - exact_stat[1] * exact_stat[2]
    # constants of the printed cross-block forms at gamma = 1/2, r = 3, D = 1105/16
    exact_asym = [F(82, 1105), F(116, 1105), F(20, 1105), F(24, 1105)]
    exact_asym_det = exact_asym[3] * exact_asym[0] - exact_asym[1] * exact_asym[2]

    err_stat = max(np.abs(stat - [float(v) for v in exact_stat]).max(), abs(det_st - float(exact_det)))
    err_asym = max(np.abs(asym - [float(v) for v in exact_asym]).max(), abs(det_asym - float(exact_asym_det)))
    hand_stat = np.array([0.074208, 0.358373, -0.112209, 0.043437])
    hand_asym = np.array([0.074208, 0.104978, 0.018100, 0.021719])
    ok = err_stat <= 1e-6 and err_asym <= 1e-6 and abs(det_st - det_asym) > 1e-6 and det_st > 0 > det_asym
    report(
        4,
        ok,
        f"stationary cross block {stat.round(6)} det {det_st:.6f} vs asymptotic {asym.round(6)} "
        f"det {det_asym:.4e} ({label}); errors vs exact solve {err_stat:.1e} / {err_asym:.1e}; "
        f"vs printed hand values {np.abs(stat - hand_stat).max():.1e} / {np.abs(asym - hand_asym).max():.1e}",
    )


def test_criterion_5_equal_frequency_classification(report):
    values = []
    for gamma in (0.1, 0.5, 2.0):
        osc = OscillatorParams(1.0, 1.0, 1.0)
        h = LindbladCouplings.from_damping(osc, gamma, gamma, h12r=1.0)
        values.append(det_cs_asymptotic(ClosedFormParams.from_couplings(osc, h, CASE_A)))
    ok = all(v < 0 and label == "entangled" for v, label in values)
    report(5, ok, "r=1, Gamma in {0.1, 0.5, 2}: " + ", ".join(f"{v:.3e} ({label})" for v, label in values))


def test_criterion_6_unitary_conservation(osc, report):
    s0 = CovarianceState(0.9, 0.2, 0.4, 0.6, -0.1, 0.7, 0.1, 0.05, -0.02, 0.3)
    traj = integrate(s0, osc, LindbladCouplings(), IntegratorConfig(t_end=10.0, dt=1e-3))
    drift = {w: float(np.abs(traj.omega_sq(w) - traj.omega_sq(w)[0]).max()) for w in "AB"}
    report(6, max(drift.values()) < 1e-9, f"Omega_A^2 drift {drift['A']:.1e}, Omega_B^2 drift {drift['B']:.1e}")


def test_criterion_7_rk4_order(osc, couplings, report):
    x0 = to_covariance_state(CASE_B)
    dt = 0.04

    def end(step):
        return integrate(x0, osc, couplings, IntegratorConfig(t_end=10.0, dt=step)).states[-1]

    ref = end(dt / 4)
    e1, e2 = np.abs(end(dt) - ref).max(), np.abs(end(dt / 2) - ref).max()
    ratio = e1 / e2
    report(7, 12.0 <= ratio <= 20.0, f"dt={dt}: error {e1:.2e} -> {e2:.2e}, ratio {ratio:.2f}")


def test_criterion_8_covariance_extraction(report):
    # moderate states: with a 1e-3 step the truncation error grows like (entry * step)^2
    rng = np.random.default_rng(20261019)
    worst = 0.0
    for _ in range(100):
        s = random_valid_state(rng)
        rec = covariances_from_ambiguity(lambda Q, r: ambiguity_eval(s, Q, r))
        worst = max(worst, float(np.abs(rec.as_array() - s.as_array()).max()))
    report(8, worst <= 1e-6, f"100 random valid states, max extraction error {worst:.2e}")


@pytest.fixture(scope="module")
def fig_cfg():
    return parse_config({})


def test_criterion_9_decoherence_lengths_start_at_one(fig_cfg, report):
    _, t = figure_table("2", fig_cfg)
    report("9a", t[0, 1] == 1.0 and t[0, 2] == 1.0, f"d_decoh_A(0)={float(t[0, 1])!r}, d_decoh_B(0)={float(t[0, 2])!r}")


def test_criterion_9_decoherence_lengths_cross_near_0_6(fig_cfg, report):
    _, t = figure_table("2", fig_cfg)
    diff = t[1:, 1] - t[1:, 2]  # skip tau = 0, where both start at 1.0
    k = np.flatnonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))
    tau = t[1:, 0]
    cross = [float(tau[j] + (tau[j + 1] - tau[j]) * diff[j] / (diff[j] - diff[j + 1])) for j in k]
    first = cross[0] if cross else float("nan")
    report("9b", abs(first - 0.6) <= 0.2, f"first crossing after tau=0 at {first:.4f} (target 0.6 +- 0.2)")


def test_criterion_9_revival(fig_cfg, report):
    _, t = figure_table("4", fig_cfg)
    w = entanglement_windows(t[:, 0], t[:, 2])
    report("9c", len(w.crossing_taus) >= 1, f"case B det C_s sign changes on [0, 15] at {np.round(w.crossing_taus, 4)}")


def test_criterion_9_b_settles_first(fig_cfg, report):
    cfg = parse_config({"integrator": {"t_end": 40.0}})
    _, t = figure_table("1", cfg)
    st = stationary_state(cfg.osc, cfg.couplings)

    def settle(col, target):
        outside = np.flatnonzero(np.abs(col - target) > 0.01 * abs(target))
        return float(t[outside[-1] + 1, 0])

    ta, tb = settle(t[:, 1], st.A11), settle(t[:, 2], st.A22)
    report("9d", tb < ta, f"within 1% of asymptote: B at tau={tb:.3f}, A at tau={ta:.3f}")


def test_criterion_10_figure4_determinism(tmp_path, report):
    outputs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "lindblad_pair.cli", "figure", "4", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append((out / "figure4.csv").read_bytes())
    report(10, outputs[0] == outputs[1], f"two `figure 4` runs, {len(outputs[0])} bytes each, identical")
