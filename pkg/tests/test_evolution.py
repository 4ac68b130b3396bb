import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confscat.characteristic import sigma0_energy
from confscat.energy import cauchy_energy
from confscat.evolution import (
    BlowUpError,
    ConfigError,
    EvolutionConfig,
    DIAGNOSTIC_COLUMNS,
    SolutionHistory,
    cone_tangent_norm,
    conformal_identity_residual,
    evolve,
    evolve_difference,
    evolve_on_slowed,
    frame_diagnostics,
    manufactured_residual,
    relative_drift,
    tabulate_history,
)
from confscat.fields import CauchyData, GridError, Grid1D
from confscat.geometry import (
    ParameterError,
    einstein_cylinder_metric,
    minkowski_compactification,
    minkowski_metric,
)
from confscat.harness import conformal_residuals, sigma0_bump
from confscat.oracles import cylinder_grid, cylinder_mode, manufactured_oracle
from confscat.scattering import bump_profile

CYL = einstein_cylinder_metric()
CYL2 = einstein_cylinder_metric(T_range=(-np.pi, np.pi))


def _zero(n=64):
    g = cylinder_grid(n)
    return CauchyData.from_arrays(g, np.zeros(g.n), np.zeros(g.n))


# -- config ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        EvolutionConfig(t_end=1.0, cfl=1.2)
    with pytest.raises(ConfigError):
        EvolutionConfig(t_end=1.0, nonlinearity="quintic")
    with pytest.raises(ConfigError):
        EvolutionConfig(t_end=1.0, nonlinearity="potential")
    with pytest.raises(ConfigError):
        EvolutionConfig(t_end=-1.0, direction="forward")


def test_cfl_violation_rejected():
    d = _zero(100)
    with pytest.raises(ConfigError):
        evolve(CYL, d, EvolutionConfig(t_end=1.0, dt=d.grid.spacing))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_reported():
    g = cylinder_grid(64)
    chi = g.nodes
    psi = 1e200 * np.sin(chi)
    psi[0] = psi[-1] = 0.0
    with pytest.raises(BlowUpError):
        evolve(CYL, CauchyData.from_arrays(g, psi, np.zeros(g.n)), EvolutionConfig(t_end=1.0))


# -- evolve ---------------------------------------------------------------------------

def test_zero_data_zero_history():
    h = evolve(CYL, _zero(), EvolutionConfig(t_end=1.0))
    assert not np.any(h.positions) and not np.any(h.velocities)


def test_mode_n1_at_half_period():
    errs = []
    for n in (100, 200):
        o = cylinder_mode(1)
        h = evolve(CYL, o.cauchy_data(0.0, n), EvolutionConfig(t_end=np.pi / 2, nonlinearity="linear"))
        exact = -np.sin(2 * h.grid.nodes)
        errs.append(np.max(np.abs(h.final.position.values - exact)) / h.grid.spacing**2)
    assert max(errs) <= 5.0


def test_cubic_energy_drift_reference():
    h = evolve(CYL, sigma0_bump(cylinder_grid(400), 0.1), EvolutionConfig(t_end=np.pi))
    assert relative_drift(frame_diagnostics(h)["E_full"]) <= 1e-4


def test_linear_energy_drift_full_period():
    o = cylinder_mode(2)
    h = evolve(CYL2, o.cauchy_data(0.0, 400), EvolutionConfig(t_end=2 * np.pi, nonlinearity="linear"))
    assert relative_drift(frame_diagnostics(h)["E_lin"]) <= 1e-6


def test_time_reversal():
    d0 = sigma0_bump(cylinder_grid(400), 0.5)
    fwd = evolve(CYL, d0, EvolutionConfig(t_end=1.0))
    back = evolve(CYL, fwd.final, EvolutionConfig(t_end=0.0, t0=1.0))
    assert np.max(np.abs(back.final.position.values - d0.position.values)) <= 1e-10
    assert np.max(np.abs(back.final.velocity.values - d0.velocity.values)) <= 1e-10


def test_linear_modes_are_periodic():
    for k in range(3):
        errs = []
        for n in (100, 200):
            d0 = cylinder_mode(k).cauchy_data(0.0, n)
            h = evolve(CYL2, d0, EvolutionConfig(t_end=2 * np.pi, nonlinearity="linear"))
            errs.append(np.max(np.abs(h.final.position.values - d0.position.values)))
        assert errs[1] <= errs[0] / 3.5


def test_defocusing_bound():
    for a in (0.3, 1.0):
        h = evolve(CYL, sigma0_bump(cylinder_grid(200), a), EvolutionConfig(t_end=np.pi))
        d = frame_diagnostics(h)
        assert np.all(d["E_lin"] <= d["E_full"][0] * (1 + 1e-3))


def test_uniqueness_across_step_sizes():
    d0 = sigma0_bump(cylinder_grid(200), 0.5)
    h = d0.grid.spacing
    t_end = 64 * h
    a = evolve(CYL, d0, EvolutionConfig(t_end=t_end, cfl=0.5, dt=h / 4))
    b = evolve(CYL, d0, EvolutionConfig(t_end=t_end, cfl=0.5, dt=h / 2))
    diff = np.max(np.abs(a.final.position.values - b.final.position.values))
    assert diff <= 2.0 * h**2


def test_diagnostics_columns(tmp_path):
    h = evolve(CYL, sigma0_bump(cylinder_grid(64), 0.1), EvolutionConfig(t_end=0.2))
    p = tmp_path / "diag.csv"
    h.write_diagnostics(p)
    assert p.read_text().splitlines()[0] == ",".join(DIAGNOSTIC_COLUMNS)


def test_history_stamps_monotone():
    g = cylinder_grid(16)
    z = np.zeros((3, g.n))
    with pytest.raises(ValueError):
        SolutionHistory(g, CYL, EvolutionConfig(t_end=1.0), [0.0, 0.5, 0.4], z, z)


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.0, 2.0))
def test_linear_evolution_is_linear(a):
    d0 = sigma0_bump(cylinder_grid(64), 1.0)
    cfg = EvolutionConfig(t_end=0.5, nonlinearity="linear")
    h1 = evolve(CYL, d0, cfg)
    h2 = evolve(CYL, d0.scaled(a), cfg)
    assert np.allclose(h2.positions, a * h1.positions, rtol=0, atol=1e-13)


# -- slowed evolution -----------------------------------------------------------------

def test_slowed_zero():
    th = bump_profile(0.0, 200).characteristic()
    s = evolve_on_slowed(CYL2, 0.7, th)
    assert not np.any(s.history.positions) and not np.any(s.sigma0.position.values)


def test_slowed_rejects_lambda():
    th = bump_profile(0.1, 100).characteristic()
    with pytest.raises(ParameterError):
        evolve_on_slowed(CYL2, 1.0, th)
    with pytest.raises(ParameterError):
        evolve_on_slowed(CYL2, 0.4, th)


def test_cone_tangent_norm():
    assert cone_tangent_norm(CYL2, 0.99) == pytest.approx(0.0199, abs=1e-12)
    assert cone_tangent_norm(CYL2, 0.5) == pytest.approx(0.75)


def test_slowed_energy_comparable_to_cone_norm():
    # broad bump; for narrow bumps the lambda = 1/2 ratio drops below 1/3
    th = bump_profile(0.1, 400, width=0.9).characteristic()
    cone = th.h1_norm**2
    for lam in (0.5, 0.9):
        s = evolve_on_slowed(CYL2, lam, th)
        assert np.all(np.isfinite(s.history.positions))
        assert 1 / 3 <= sigma0_energy(s.sigma0) / cone <= 3


# -- difference equation --------------------------------------------------------------

def _pair(n=200, a=0.3, b=0.25, t_end=2.0):
    g = cylinder_grid(n)
    u = evolve(CYL, sigma0_bump(g, a), EvolutionConfig(t_end=t_end))
    v = evolve(CYL, sigma0_bump(g, b), EvolutionConfig(t_end=t_end))
    return u, v


def test_difference_of_equal_histories():
    u, _ = _pair()
    delta, direct = evolve_difference(CYL, u, u)
    assert not np.any(delta.positions) and not np.any(direct.positions)


def test_difference_matches_subtraction():
    u, v = _pair()
    delta, direct = evolve_difference(CYL, u, v)
    for k in range(0, len(delta), 10):
        gap = cauchy_energy(delta.frame(k) - direct.frame(k), CYL, form="linear")
        ref = cauchy_energy(direct.frame(k), CYL, form="linear")
        assert np.sqrt(gap / ref) <= 0.05


def test_difference_incompatible():
    u, _ = _pair(n=100)
    _, v = _pair(n=200)
    with pytest.raises(GridError):
        evolve_difference(CYL, u, v)


def test_zero_potential_is_free_equation():
    o = cylinder_mode(1)
    d0 = o.cauchy_data(0.0, 200)
    cfg = EvolutionConfig(t_end=np.pi / 2, nonlinearity="potential", potential_eval=lambda t: np.zeros(d0.grid.n))
    h = evolve(CYL, d0, cfg)
    err = np.max(np.abs(h.final.position.values - o.psi(np.pi / 2, h.grid.nodes)))
    assert err <= 5 * d0.grid.spacing**2


# -- conformal identity -------------------------------------------------------------

def test_conformal_residual_zero_solution():
    pair = minkowski_compactification(r_max=5.0)
    g = minkowski_metric(r_max=5.0, t_range=(0.0, 3.0))
    grid = Grid1D.uniform("r", 0.0, 5.0, 200, ("dirichlet_zero", "dirichlet_zero"))
    z = np.zeros(grid.n)
    h = evolve(g, CauchyData.from_arrays(grid, z, z), EvolutionConfig(t_end=2.0))
    assert conformal_identity_residual(pair, h) == 0.0


def test_conformal_residual_second_order():
    good, _ = conformal_residuals((200, 400), r_max=5.0, amplitude=0.2)
    assert good[0] / good[1] == pytest.approx(4.0, abs=0.5)


def test_conformal_residual_negative_control():
    # phi_hat = t r, i.e. xi = t r^2, is not a solution
    pair = minkowski_compactification(r_max=10.0)
    g = minkowski_metric(r_max=10.0, t_range=(0.0, 3.0))
    res = []
    for n in (200, 400, 800):
        grid = Grid1D.uniform("r", 0.0, 10.0, n, ("dirichlet_zero", "open"))
        stamps = np.linspace(0, 2, int(round(2 / (grid.spacing / 4))) + 1)
        hist = tabulate_history(g, grid, stamps, lambda t, r: t * r * r)
        res.append(conformal_identity_residual(pair, hist))
    assert min(res) > 1.0


# -- manufactured solutions ------------------------------------------------------------

def test_manufactured_zero():
    r = manufactured_residual(CYL, lambda t, x: 0 * x, cylinder_grid(64), 0.3)
    assert not np.any(r.values)


def test_manufactured_mode_leaves_cubic_term():
    grid = cylinder_grid(200)
    o = cylinder_mode(1)
    r = manufactured_residual(CYL, o.psi, grid, 0.7)
    x = grid.nodes[1:-1]
    cubic = o.psi(0.7, x) ** 3 / np.sin(x) ** 2
    assert np.max(np.abs(r.values[1:-1] - cubic)) <= grid.spacing**2


def test_forced_evolution_recovers_closed_form():
    def f(T, x):
        return 0.3 * (1 + 0.5 * np.sin(T)) * np.sin(x) ** 2 * np.cos(x)

    def ft(T, x):
        return 0.15 * np.cos(T) * np.sin(x) ** 2 * np.cos(x)

    o = manufactured_oracle(f, ft)
    errs = []
    for n in (100, 200, 400):
        h = evolve(CYL, o.cauchy_data(0.0, n), EvolutionConfig(t_end=1.0, source=o.extras["source"]))
        errs.append(np.max(np.abs(h.final.position.values - f(1.0, h.grid.nodes))))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)
    assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.2)
