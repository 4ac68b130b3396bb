"""The ten acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line (printed again in the terminal summary)
before asserting, so a failing criterion still reports its measured values.
"""

import time

import numpy as np
import pytest

from conftest import record

from confscat.characteristic import LambdaSchedule, solve_hoermander, solve_picard
from confscat.evolution import EvolutionConfig, evolve, frame_diagnostics, relative_drift
from confscat.geometry import (
    LEMMA_INEQUALITIES,
    einstein_cylinder_metric,
    lemma_audit,
    scri_plus,
    smallest_admissible_u0,
)
from confscat.harness import (
    conformal_residuals,
    equivalence_constants,
    glue_experiment,
    mode_error,
    picard_setup,
    sigma0_bump,
    trace_constant,
)
from confscat.oracles import cylinder_grid
from confscat.scattering import (
    bump_profile,
    fit_loglog_slope,
    lipschitz_sample,
    round_trip_error,
    scattering_map,
    scattering_operator,
)

N_REF = 400
SCHED = LambdaSchedule.geometric(6)
C_SCATTER = 2.0


def test_criterion_01_linear_modes():
    t0 = time.perf_counter()
    ns = (100, 200, 400)
    worst_scaled, orders = 0.0, []
    for k in range(4):
        for n in ns:
            worst_scaled = max(worst_scaled, mode_error(k, n) / (np.pi / n) ** 2)
        # modes 1 and 3 vanish to first order at T = pi/2, so the order is read on [0, pi/2]
        sup = [mode_error(k, n, sup=True) for n in ns]
        orders += list(np.log2(np.array(sup[:-1]) / sup[1:]))
    runtime = time.perf_counter() - t0
    ok = worst_scaled <= 5.0 and all(abs(o - 2) <= 0.2 for o in orders) and runtime < 5.0
    record(1, ok, f"max err/h^2 = {worst_scaled:.3f} (<= 5), orders {min(orders):.3f}..{max(orders):.3f} "
                  f"(2 +- 0.2), {runtime:.2f} s (< 5)")
    assert ok


def test_criterion_02_defocusing_energy():
    g = einstein_cylinder_metric()
    drifts = {}
    for a in (0.1, 0.3, 1.0):
        hist = evolve(g, sigma0_bump(cylinder_grid(N_REF), a), EvolutionConfig(t_end=np.pi))
        drifts[a] = relative_drift(frame_diagnostics(hist)["E_full"])
    ok = max(drifts.values()) <= 1e-4
    record(2, ok, "drift " + ", ".join(f"a={a}: {d:.2e}" for a, d in drifts.items()) + " (<= 1e-4)")
    assert ok


def test_criterion_03_conformal_covariance():
    good, bad = conformal_residuals((N_REF, 2 * N_REF, 4 * N_REF))
    order = float(np.log2(good[-2] / good[-1]))
    control = float(np.log2(bad[-2] / bad[-1]))
    # the control tends to a nonzero floor, so its observed order falls well below 1
    ok = abs(order - 2) <= 0.3 and control < 1.0 and bad[-1] > good[-1]
    record(3, ok, f"residual order {order:.3f} (2 +- 0.3); control residuals "
                  + ", ".join(f"{b:.3g}" for b in bad) + f" (order {control:.3f} < 1)")
    assert ok


def test_criterion_04_hoermander():
    g = einstein_cylinder_metric(T_range=(-np.pi, np.pi))
    runs = [solve_hoermander(g, scri_plus(), bump_profile(0.1, n).characteristic(), SCHED)
            for n in (N_REF, 2 * N_REF)]
    decreasing = all(bool(np.all(np.diff(r.differences) < 0)) for r in runs)
    c = [trace_constant(r, SCHED.values[-1]) for r in runs]
    growth = c[1] / c[0]
    ok = decreasing and growth <= 1.2
    record(4, ok, f"lambda differences decreasing: {decreasing}; C_h = {c[0]:.3f}, C_h/2 = {c[1]:.3f}, "
                  f"growth {growth:.3f} (<= 1.2)")
    assert ok


def test_criterion_05_energy_equivalence():
    lo0, hi0, _ = equivalence_constants(N_REF // 2, 0.1)
    lo1, hi1, _ = equivalence_constants(N_REF, 0.1)
    var = max(abs(lo1 - lo0) / lo1, abs(hi1 - hi0) / hi1)
    ok = lo1 > 0 and np.isfinite(hi1) and var <= 0.2
    record(5, ok, f"c_low = {lo1:.4f}, c_high = {hi1:.4f}, refinement change {var:.2e} (<= 0.2)")
    assert ok


def test_criterion_06_picard():
    pair, ts, tS, _ = picard_setup(1.0, 0.2, 0.05)
    run = solve_picard(pair, ts, tS, 0.2, n_max=8, tol_abs=1e-60)
    ratios = run.log_ratios()
    # the first ratio is still pre-asymptotic
    tail = ratios[1:] if ratios.size > 1 else ratios
    super_geometric = run.diverged_at is None and tail.size > 0 and bool(np.min(tail) >= 2.0)
    pair5, ts5, tS5, _ = picard_setup(1.0, 0.5, 5.0)
    neg = solve_picard(pair5, ts5, tS5, 0.5)
    control = neg.diverged_at is not None
    ok = super_geometric and control
    record(6, ok, "log ratios " + ", ".join(f"{r:.3f}" for r in ratios) + " (asymptotic >= 2); "
                  f"amplitude 5 divergence reported: {control}")
    assert ok


def test_criterion_07_lemma_audit():
    u0 = smallest_admissible_u0(1.0, 0.1, n=200, u_max=1e4)
    assert u0 is not None
    rep = lemma_audit(1.0, u0, 0.1, n=200, bisect=False)
    ineq = min(rep.margins[k] for k in LEMMA_INEQUALITIES)
    ok = abs(u0) <= 1e4 and ineq > 0 and rep.morawetz_margin > 0 and len(LEMMA_INEQUALITIES) == 5
    record(7, ok, f"u0 = {u0:.3f}, min inequality margin {ineq:.3e}, Morawetz margin {rep.morawetz_margin:.3e}")
    assert ok


def test_criterion_08_gluing():
    err, gap, _ = glue_experiment(N_REF)
    bound = 5 * (np.pi / N_REF) ** 2
    ok = err <= bound
    record(8, ok, f"final-frame L_inf difference {err:.3e} (<= 5 h^2 = {bound:.3e}), interface gap {gap:.2e}")
    assert ok


def test_criterion_09_scattering():
    amps = (0.05, 0.1, 0.2)
    devs = [scattering_map(bump_profile(a, N_REF, "scri_minus"), sched=SCHED, with_linear=False)
            .linear_reference_deviation for a in amps]
    slope = fit_loglog_slope(amps, devs)
    within = all(d <= 0.02 + C_SCATTER * a * a for a, d in zip(amps, devs))
    rt = round_trip_error(bump_profile(0.1, N_REF), sched=SCHED)
    ok = within and abs(slope - 2) <= 0.3 and rt <= 0.02
    record(9, ok, "deviations " + ", ".join(f"{d:.4f}" for d in devs) + f" (<= 0.02 + {C_SCATTER} a^2), "
                  f"slope {slope:.3f} (2 +- 0.3), round trip {rt:.4f} (<= 0.02)")
    assert ok


@pytest.mark.slow
def test_criterion_10_bi_lipschitz():
    t0 = time.perf_counter()
    center = bump_profile(0.0, N_REF, "scri_minus")
    stats = lipschitz_sample(lambda th: scattering_operator(th, True, SCHED), center, 0.1, 100, seed=0,
                             workers=1)
    runtime = time.perf_counter() - t0
    ok = 0.5 <= stats["min"] and stats["max"] <= 2.0 and runtime < 600
    record(10, ok, f"ratios in [{stats['min']:.4f}, {stats['max']:.4f}] over 100 pairs (within [0.5, 2.0]), "
                   f"{runtime:.0f} s single-threaded (< 600)")
    assert ok
