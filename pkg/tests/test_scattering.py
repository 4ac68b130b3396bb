import csv

import numpy as np
import pytest

from confscat.characteristic import LambdaSchedule
from confscat.fields import CauchyData, GridError, scri_grid
from confscat.harness import sigma0_bump
from confscat.oracles import bump_function, cylinder_grid, dalembert_oracle
from confscat.scattering import (
    REPORT_COLUMNS,
    RadiationProfile,
    bump_profile,
    fit_loglog_slope,
    inverse_trace,
    linear_trace_bicontinuity,
    linear_trace_operator,
    lipschitz_sample,
    round_trip_error,
    scattering_map,
    scattering_operator,
    thread_count,
    trace_backward,
    trace_forward,
    write_scattering_report,
)

ORACLE = dalembert_oracle(*bump_function(1.0, 0.5))


def _zero(n=100):
    g = cylinder_grid(n)
    return CauchyData.from_arrays(g, np.zeros(g.n), np.zeros(g.n))


# -- profiles --------------------------------------------------------------------------

def test_profile_invariants():
    g = scri_grid(50)
    with pytest.raises(ValueError):
        RadiationProfile("scri_plus", g, np.ones(g.n))
    with pytest.raises(ValueError):
        RadiationProfile("scri_zero", g, np.zeros(g.n))
    with pytest.raises(GridError):
        RadiationProfile("scri_plus", g, np.zeros(g.n + 1))
    with pytest.raises(GridError):
        bump_profile(0.1, 50) - bump_profile(0.1, 50, kind="scri_minus")


def test_bump_profile_h1_cached():
    p = bump_profile(0.2, 200)
    assert p.h1_norm > 0
    assert p.scaled(2.0).h1_norm == pytest.approx(2 * p.h1_norm, rel=1e-12)


# -- traces ------------------------------------------------------------------------------

@pytest.mark.parametrize("op", [trace_forward, trace_backward, linear_trace_operator])
def test_trace_of_zero(op):
    assert not np.any(op(_zero()).values)


@pytest.mark.parametrize("kind,op", [("scri_plus", trace_forward), ("scri_minus", trace_backward)])
def test_trace_matches_dalembert(kind, op):
    errs = []
    for n in (100, 200, 400):
        tr = op(ORACLE.cauchy_data(0.0, n), cubic=False)
        errs.append(np.max(np.abs(tr.values - ORACLE.extras["profile"](kind, n))))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(np.abs(orders - 2.0) <= 0.2)


def test_trace_linearity():
    d = sigma0_bump(cylinder_grid(200), 1.0)
    base = linear_trace_operator(d)
    for a in (-0.5, 3.0):
        got = linear_trace_operator(d.scaled(a)).values
        assert np.max(np.abs(got - a * base.values)) <= 1e-12 * abs(a) * np.max(np.abs(base.values))


def test_trace_additivity():
    g = cylinder_grid(200)
    d1 = sigma0_bump(g, 0.7)
    d2 = ORACLE.cauchy_data(0.0, 200)
    lhs = linear_trace_operator(d1 + d2).values
    rhs = linear_trace_operator(d1).values + linear_trace_operator(d2).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_time_symmetric_data_reflects():
    # zero velocity: the solution is even in T, so theta^-(s) = theta^+(-s)
    d = sigma0_bump(cylinder_grid(200), 0.5)
    plus, minus = trace_forward(d), trace_backward(d)
    assert np.max(np.abs(plus.values - minus.values[::-1])) <= 1e-12
    assert np.max(np.abs(plus.values)) > 0.1


def test_linear_trace_bicontinuity_stable():
    a = linear_trace_bicontinuity(200)
    b = linear_trace_bicontinuity(400)
    for r in (a, b):
        assert r["product"] >= 1.0 and np.isfinite(r["product"])
    for key in ("norm", "inverse_norm", "product"):
        assert b[key] == pytest.approx(a[key], rel=0.2)


# -- inverse trace -----------------------------------------------------------------------------

def test_inverse_trace_of_zero():
    d = inverse_trace(bump_profile(0.0, 100))
    assert not np.any(d.position.values) and not np.any(d.velocity.values)


def test_round_trip_small_linear_profile():
    assert round_trip_error(bump_profile(0.05, 400), cubic=False) <= 0.02


def test_round_trip_improves_with_lambda_max():
    th = bump_profile(0.1, 200)
    errs = [round_trip_error(th, sched=LambdaSchedule.geometric(k), use_glue=False) for k in (2, 3, 4, 5, 6)]
    assert np.all(np.diff(errs) < 0)


def test_round_trip_scri_minus():
    assert round_trip_error(bump_profile(0.05, 400, kind="scri_minus")) <= 0.02


# -- scattering map ----------------------------------------------------------------------------

def test_scattering_zero():
    rep = scattering_map(bump_profile(0.0, 100, kind="scri_minus"))
    assert not np.any(rep.output.values)
    assert rep.linear_reference_deviation == 0.0


def test_scattering_requires_scri_minus():
    with pytest.raises(ValueError):
        scattering_operator(bump_profile(0.1, 100))


def test_linear_scattering_is_minus_identity():
    # a long schedule pushes the lambda error below the h^2 error
    sched = LambdaSchedule.geometric(10)
    for n in (200, 400):
        th = bump_profile(0.1, n, kind="scri_minus")
        out = scattering_operator(th, cubic=False, sched=sched)
        assert np.max(np.abs(out.values + th.values)) <= 3 * (np.pi / n) ** 2


def test_linear_scattering_is_homogeneous():
    th = bump_profile(0.1, 200, kind="scri_minus")
    base = scattering_operator(th, cubic=False)
    for a in (-2.0, 5.0):
        assert np.max(np.abs(scattering_operator(th.scaled(a), cubic=False).values - a * base.values)) <= 1e-12


def test_cubic_correction_is_third_order():
    th = bump_profile(1.0, 200, kind="scri_minus")
    c = []
    for a in (0.05, 0.1, 0.2):
        p = th.scaled(a)
        c.append((scattering_operator(p) - scattering_operator(p, cubic=False)).h1_norm / a**3)
    assert max(c) / min(c) <= 1.05


def test_linear_reference_deviation_small():
    rep = scattering_map(bump_profile(0.05, 200, kind="scri_minus"), with_round_trip=True)
    assert rep.linear_reference_deviation <= 0.02 + 2 * 0.05**2
    assert rep.nonlinear_deviation < rep.linear_reference_deviation
    assert 0 <= rep.metadata["rt_error"] <= 0.05
    assert rep.amplitude == pytest.approx(0.05)


def test_scattering_deterministic():
    th = bump_profile(0.1, 200, kind="scri_minus")
    a, b = scattering_map(th), scattering_map(th)
    assert np.array_equal(a.output.values, b.output.values)
    assert a.linear_reference_deviation == b.linear_reference_deviation


def test_loglog_slope():
    x = np.array([0.05, 0.1, 0.2])
    assert fit_loglog_slope(x, 3 * x**2) == pytest.approx(2.0, rel=1e-12)


# -- Lipschitz sampling ----------------------------------------------------------------------

def test_lipschitz_identity():
    c = bump_profile(0.0, 100)
    r = lipschitz_sample(lambda p: p, c, 0.5, 10, seed=1, workers=1)
    assert np.allclose(r["ratios"], 1.0, rtol=1e-12)


def test_lipschitz_double():
    c = bump_profile(0.0, 100)
    r = lipschitz_sample(lambda p: p.scaled(2.0), c, 0.5, 10, seed=1, workers=1)
    assert np.allclose(r["ratios"], 2.0, rtol=1e-12)


def test_lipschitz_seeded_and_thread_independent():
    c = bump_profile(0.0, 100)
    op = lambda p: p.scaled(-1.0) + p.with_values(p.values**3)  # noqa: E731
    a = lipschitz_sample(op, c, 0.5, 12, seed=4, workers=1)
    b = lipschitz_sample(op, c, 0.5, 12, seed=4, workers=3)
    assert np.array_equal(a["ratios"], b["ratios"])
    assert a["histogram"].sum() == 12


def test_lipschitz_rejects_bad_arguments():
    c = bump_profile(0.0, 50)
    with pytest.raises(ValueError):
        lipschitz_sample(lambda p: p, c, 0.0, 5, seed=0)
    with pytest.raises(ValueError):
        lipschitz_sample(lambda p: p, c, 0.1, 1, seed=0)


def test_scattering_lipschitz_near_linear_regime():
    c = bump_profile(0.0, 200, kind="scri_minus")
    r = lipschitz_sample(scattering_operator, c, 0.1, 6, seed=0, workers=1)
    assert 0.8 <= r["min"] <= r["max"] <= 1.25


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("CONFSCAT_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("CONFSCAT_THREADS", "-1")
    with pytest.raises(ValueError):
        thread_count()


# -- report -------------------------------------------------------------------------------------

def test_report_csv(tmp_path):
    p = tmp_path / "scattering_report.csv"
    row = dict(case="bump", amplitude=0.1, h=0.01, lambda_max=0.99, rt_error=0.01, lin_dev=0.003,
               lip_min=0.9, lip_max=1.1)
    write_scattering_report([row], p)
    rows = list(csv.reader(open(p)))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert rows[1][0] == "bump" and float(rows[1][4]) == 0.01
