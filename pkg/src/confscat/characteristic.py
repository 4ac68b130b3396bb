"""Characteristic solvers and the assembly of local solutions.

Three solvers live here:

* the slowdown driver: a schedule of slowed solves from the past cone of
  ``i+`` (scri^+ on the cylinder) down to ``T = 0``, with consecutive
  differences, Richardson extrapolation in ``1 - lam`` and a trace check;
* the characteristic lattice on the cylinder (``lam = 1``), used as the
  near-``i0`` piece and as an independent Cauchy marcher;
* a Picard iteration on the rescaled Schwarzschild patch near ``i0``,
  each iterate a linear characteristic problem in ``(u, R)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import (
    CauchyData,
    CharacteristicData,
    CoverageError,
    Grid1D,
    GridError,
    cone_h1_norm,
    restrict_to_surface,
    scri_grid,
    slice_norms,
)
from .geometry import (
    ModelMetric,
    ParameterError,
    cylinder_foliation,
    einstein_cylinder_metric,
    hs_leaf_R,
    patch_null_surfaces,
    scri_plus,
)
from .evolution import (
    BlowUpError,
    ConfigError,
    EvolutionConfig,
    SolutionHistory,
    cone_to_chi,
    evolve,
    evolve_on_slowed,
    null_lattice_solve,
)

TOL_REL = 1e-2
TOL_ABS = 1e-8
TOL_GLUE = 1e-6


class ConvergenceError(RuntimeError):
    """Raised on request when a schedule or an iteration fails to settle."""


class GlueError(ValueError):
    """Interface mismatch between two pieces; ``discrepancy`` holds the L2 gap."""

    def __init__(self, message, discrepancy):
        super().__init__(message)
        self.discrepancy = discrepancy


# -- lambda schedule ------------------------------------------------------------

@dataclass(frozen=True)
class LambdaSchedule:
    values: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "values", v)
        if not v:
            raise ParameterError("empty schedule")
        if v[0] < 0.5 or v[-1] >= 1.0:
            raise ParameterError("schedule must lie in [1/2, 1)")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ParameterError("schedule must be strictly increasing")

    @classmethod
    def geometric(cls, n_max=6):
        """lam_n = 1 - 2^-(n+1), n = 0..n_max."""
        return cls(tuple(1.0 - 2.0 ** (-n - 1) for n in range(n_max + 1)))

    @property
    def count(self):
        return len(self.values)

    @property
    def n_max(self):
        return len(self.values) - 1


# -- slowdown driver ------------------------------------------------------------

def sigma0_energy(d: CauchyData, g: Optional[ModelMetric] = None) -> float:
    """Linear energy ``||phi||_H1^2 + ||d_T phi||_L2^2`` of reduced data on T = 0."""
    return slice_norms(d, cylinder_foliation(g or einstein_cylinder_metric()))["energy"]


def richardson(d_prev: CauchyData, d_last: CauchyData, lam_prev, lam_last) -> CauchyData:
    """First-order extrapolation to lam = 1 from two schedule entries."""
    e1, e2 = 1 - lam_prev, 1 - lam_last
    return d_last.scaled(e1 / (e1 - e2)) - d_prev.scaled(e2 / (e1 - e2))


def cone_trace(g, d: CauchyData, grid: Optional[Grid1D] = None, cubic=True) -> CharacteristicData:
    """Evolve Sigma_0 data forward on the cylinder and restrict phi to scri^+."""
    n = d.grid.n - 1
    cfg = EvolutionConfig(t_end=np.pi, t0=d.stamp, nonlinearity="cubic_defocusing" if cubic else "linear")
    hist = evolve(g, d, cfg)
    return restrict_to_surface(hist, scri_plus(), grid or scri_grid(n))


def cone_distance(a: CharacteristicData, b: CharacteristicData) -> float:
    if not a.grid.same_as(b.grid):
        raise GridError("cone data on different grids")
    return cone_h1_norm(CharacteristicData(a.surface, a.grid, a.values - b.values))


@dataclass
class HoermanderRun:
    schedule: LambdaSchedule
    per_lambda: list
    differences: list
    extrapolated: CauchyData
    trace_check: float
    theta: CharacteristicData
    converged: bool
    report: str
    trace_check_rel: float = 0.0
    energies: list = field(default_factory=list)
    cone_norm: float = 0.0

    @property
    def h(self):
        return self.extrapolated.grid.spacing

    @property
    def closest(self) -> CauchyData:
        return self.per_lambda[-1]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "E_sigma0", "diff_prev"])
            for k, (lam, e) in enumerate(zip(self.schedule.values, self.energies)):
                w.writerow([repr(lam), repr(e), "" if k == 0 else repr(self.differences[k - 1])])


def _check_vertex(theta: CharacteristicData, cells=2):
    if np.any(theta.values[-cells:] != 0.0):
        raise ParameterError("cone data touch the vertex i+")


def solve_hoermander(
    g: ModelMetric,
    cone,
    theta: CharacteristicData,
    sched: Optional[LambdaSchedule] = None,
    cfg: Optional[EvolutionConfig] = None,
    *,
    tol_rel=TOL_REL,
    strict=False,
    check_trace=True,
) -> HoermanderRun:
    """Slowed solves over a lambda schedule with convergence bookkeeping.

    ``cone`` must be the scri^+ surface of the cylinder; ``theta`` samples
    phi on it over the ``s`` grid. Convergence means the last three
    difference energies decrease and the final one is at most
    ``tol_rel`` times the first. An unconverged run is returned with a
    report; ``strict=True`` raises :class:`ConvergenceError` instead.
    """
    if cone.kind != "scri_plus":
        raise ParameterError("the slowdown driver works on the cylinder's scri^+ cone")
    sched = sched or LambdaSchedule.geometric()
    cfg = cfg or EvolutionConfig(t_end=0.0)
    cubic = cfg.nonlinearity == "cubic_defocusing"
    norm = cone_h1_norm(theta)
    if not np.isfinite(norm):
        raise ValueError("cone data with infinite H1 norm")
    _check_vertex(theta)
    per = [evolve_on_slowed(g, lam, theta, cfg, keep_history=False).sigma0 for lam in sched.values]
    energies = [sigma0_energy(d, g) for d in per]
    diffs = [sigma0_energy(b - a, g) for a, b in zip(per, per[1:])]
    if sched.count >= 2:
        extra = richardson(per[-2], per[-1], sched.values[-2], sched.values[-1])
    else:
        extra = per[-1]
    converged, report = _judge_differences(diffs, tol_rel)
    if strict and not converged:
        raise ConvergenceError(report)
    tc = tc_rel = 0.0
    if check_trace and norm > 0:
        tr = cone_trace(g, per[-1], theta.grid, cubic)
        tc = cone_distance(tr, theta)
        tc_rel = tc / norm
    return HoermanderRun(sched, per, diffs, extra, tc, theta, converged, report, tc_rel, energies, norm)


def _judge_differences(diffs, tol_rel):
    if not diffs:
        return True, "single lambda: nothing to compare"
    if all(d == 0 for d in diffs):
        return True, "trivially converged (zero data)"
    if all(b >= a for a, b in zip(diffs, diffs[1:])):
        return False, "not converged: differences never decrease over the schedule"
    tail = diffs[-4:]
    mono = all(b < a for a, b in zip(tail, tail[1:]))
    small = diffs[-1] <= tol_rel * diffs[0]
    if mono and small:
        return True, f"converged: last difference {diffs[-1]:.3e} <= {tol_rel:g} x first"
    why = [] if mono else ["tail not monotone"]
    if not small:
        why.append(f"last/first = {diffs[-1] / diffs[0]:.3e} > {tol_rel:g}")
    return False, "not converged: " + ", ".join(why)


# -- characteristic lattice on the cylinder -------------------------------------

@dataclass(frozen=True)
class PatchPiece:
    """Cauchy data of a local solution on one leaf, valid for chi in [lo, hi]."""

    data: CauchyData
    lo: float
    hi: float
    label: str = "patch"

    @property
    def stamp(self):
        return self.data.stamp


def characteristic_sigma0(theta: CharacteristicData, cubic=True, n_cells=None) -> CauchyData:
    """Sigma_0 data of the characteristic problem on scri^+ (lattice, lam = 1)."""
    grid, psi0 = cone_to_chi(theta, n_cells)
    lat = null_lattice_solve(psi0, None, 1.0, cubic)
    return CauchyData.from_arrays(grid, lat.level(0), lat.velocity(0), 0.0)


def characteristic_patch(theta: CharacteristicData, chi_min, cubic=True, n_cells=None) -> PatchPiece:
    """Near-i0 piece on Sigma_0 from the characteristic lattice, kept on [chi_min, pi]."""
    return PatchPiece(characteristic_sigma0(theta, cubic, n_cells), float(chi_min), np.pi, "characteristic")


def _half_nodes(v):
    """Four-point interpolation to chi_{k+1/2} with odd reflection at the poles."""
    ext = np.concatenate(([-v[1]], v, [-v[-2]]))
    return (-ext[:-3] + 9 * ext[1:-2] + 9 * ext[2:-1] - ext[3:]) / 16


def lattice_evolve(g: ModelMetric, d0: CauchyData, t_end: float, cubic=True) -> SolutionHistory:
    """Backward Cauchy march on the cylinder's characteristic lattice.

    Nodes alternate between integer levels ``T0 - m h`` at ``chi = k h`` and
    half levels at ``chi = (k + 1/2) h``; the first half level comes from a
    third-order Taylor step. Domains of dependence are exact, which makes
    this the tool for building local pieces. Only ``t_end < T0`` is supported.
    """
    grid = d0.grid
    h = grid.spacing
    t0 = d0.stamp
    steps = (t0 - t_end) / h
    if steps <= 0 or abs(steps - round(steps)) > 1e-9:
        raise ConfigError("lattice march needs t_end = T0 - m h with m >= 1")
    steps = int(round(steps))
    chi = grid.nodes
    chih = chi[:-1] + h / 2
    inv = np.zeros_like(chih) if not cubic else 1 / np.sin(chih) ** 2
    psi, vel = d0.position.values, d0.velocity.values
    p, v = _half_nodes(psi), _half_nodes(vel)
    d2p = _half_nodes(np.gradient(np.gradient(psi, h), h))
    d2v = _half_nodes(np.gradient(np.gradient(vel, h), h))
    ptt = d2p - p**3 * inv
    vtt = d2v - 3 * p**2 * v * inv
    below = p - h / 2 * v + h * h / 8 * ptt - h**3 / 48 * vtt
    # the half level above T0 closes the velocity formula on the first frame
    above = p + h / 2 * v + h * h / 8 * ptt + h**3 / 48 * vtt
    levels = [psi.copy()]
    halves = [above, below]
    cur, half = psi.copy(), below
    for _ in range(steps):
        c = 0.5 * (half[1:] + half[:-1])
        nxt = np.zeros_like(cur)
        src = 0.0
        if cubic:
            src = 0.25 * h * h * c**3 / np.sin(chi[1:-1]) ** 2
        nxt[1:-1] = half[1:] + half[:-1] - cur[1:-1] - src
        new_half = np.empty_like(half)
        e = np.concatenate(([0.0], nxt[1:-1], [0.0]))
        cc = 0.5 * (e[1:] + e[:-1])
        hsrc = 0.25 * h * h * cc**3 * inv if cubic else 0.0
        new_half[:] = e[1:] + e[:-1] - half - hsrc
        levels.append(nxt)
        halves.append(new_half)
        cur, half = nxt, new_half
    pos = np.array(levels)
    hv = np.array(halves)
    dh = (hv[:-1] - hv[1:]) / h  # d_T psi at chi_{k+1/2} on each integer level
    vel_out = np.zeros_like(pos)
    vel_out[:, 1:-1] = 0.5 * (dh[:, 1:] + dh[:, :-1])
    vel_out[0] = vel
    stamps = t0 - h * np.arange(steps + 1)
    if not np.all(np.isfinite(pos)):
        raise BlowUpError(float(stamps[-1]))
    cfg = EvolutionConfig(t_end=t_end, t0=t0, nonlinearity="cubic_defocusing" if cubic else "linear")
    return SolutionHistory(grid, g, cfg, stamps, pos, vel_out, dt=-h)


# -- gluing ---------------------------------------------------------------------

def _piece_on_leaf(piece, leaf):
    if isinstance(piece, PatchPiece):
        if abs(piece.stamp - leaf) > 1e-12:
            raise CoverageError(f"piece lives on T={piece.stamp}, interface is T={leaf}")
        return piece.data, piece.lo, piece.hi
    if isinstance(piece, SolutionHistory):
        k = np.flatnonzero(np.abs(piece.stamps - leaf) <= 1e-9 * max(1.0, abs(leaf)))
        if k.size == 0:
            raise CoverageError(f"history has no frame at T={leaf}")
        return piece.frame(int(k[0])), 0.0, np.pi
    if isinstance(piece, CauchyData):
        return piece, 0.0, np.pi
    raise TypeError(f"cannot glue a {type(piece).__name__} onto a cylinder leaf")


def _blend_weight(chi, a, b):
    t = np.clip((chi - a) / (b - a), 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * t)


def glue(
    piece_timelike_region,
    piece_patch,
    interface: float,
    *,
    target: Optional[float] = 0.0,
    cfg: Optional[EvolutionConfig] = None,
    g: Optional[ModelMetric] = None,
    tol_glue=TOL_GLUE,
    band=None,
) -> SolutionHistory:
    """Assemble Cauchy data on the leaf T = ``interface`` and evolve to ``target``.

    The timelike piece is used near the pole chi = 0, the patch piece near
    chi = pi, and a cosine partition of unity joins them across ``band``
    (default: the whole overlap of their coverage). Pieces may be
    histories (full coverage), :class:`PatchPiece` or bare CauchyData.
    The L2 gap of the two pieces over the band must not exceed
    ``tol_glue``.
    """
    g = g or einstein_cylinder_metric(T_range=(-np.pi, np.pi))
    da, a_lo, a_hi = _piece_on_leaf(piece_timelike_region, interface)
    db, b_lo, b_hi = _piece_on_leaf(piece_patch, interface)
    if not da.grid.same_as(db.grid):
        raise GridError("pieces on different grids")
    grid = da.grid
    lo, hi = band if band is not None else (b_lo, a_hi)
    lo, hi = max(lo, b_lo), min(hi, a_hi)
    if a_lo > 0.0 or b_hi < np.pi:
        raise CoverageError("pieces must reach their own poles")
    if hi - lo < 2 * grid.spacing:
        raise CoverageError(f"overlap [{lo:.4f}, {hi:.4f}] narrower than two cells")
    chi = grid.nodes
    m = (chi >= lo - 1e-12) & (chi <= hi + 1e-12)
    dp = db.position.values - da.position.values
    dv = db.velocity.values - da.velocity.values
    gap = float(np.sqrt(grid.spacing * np.sum(dp[m] ** 2 + dv[m] ** 2)))
    if gap > tol_glue:
        raise GlueError(f"interface mismatch {gap:.3e} exceeds tol_glue {tol_glue:.3e}", gap)
    w = _blend_weight(chi, lo, hi)
    # a + w (b - a) reproduces a exactly when the pieces coincide
    glued = CauchyData.from_arrays(
        grid, da.position.values + w * dp, da.velocity.values + w * dv, interface
    )
    if target is None or target == interface:
        cf = EvolutionConfig(t_end=interface, t0=interface)
        return SolutionHistory(
            grid, g, cf, np.array([interface]), glued.position.values[None], glued.velocity.values[None], dt=None
        )
    from dataclasses import replace

    cf = replace(cfg, t_end=target, t0=interface, direction=None) if cfg else EvolutionConfig(
        t_end=target, t0=interface
    )
    return evolve(g, glued, cf)


# -- Picard iteration on the Schwarzschild patch --------------------------------

@dataclass
class PatchSolution:
    """phi on the (u, R) patch: ``values[i, k]`` at ``u[i]`` (decreasing), ``R[k]``."""

    u: np.ndarray
    R: np.ndarray
    values: np.ndarray
    m: float
    u0: float

    def __sub__(self, other):
        return PatchSolution(self.u, self.R, self.values - other.values, self.m, self.u0)

    def derivatives(self):
        """(d_u phi, d_R phi) on the nodes, second order."""
        du = np.gradient(self.values, self.u, axis=0, edge_order=2)
        dR = np.gradient(self.values, self.R, axis=1, edge_order=2)
        return du, dR


@dataclass
class PicardRun:
    iterates: list
    diff_energies: list
    converged: bool
    bound_curve: list
    report: str
    diverged_at: Optional[int] = None
    eps: float = 0.0
    data_energy: float = 0.0
    leaves: tuple = ()

    def resolved(self, floor_rel=1e-24):
        """Difference energies above the round-off floor ``floor_rel * data_energy``."""
        d = np.asarray(self.diff_energies, float)
        floor = floor_rel * max(self.data_energy, np.finfo(float).tiny)
        k = np.flatnonzero(d <= floor)
        return d[: k[0]] if k.size else d

    def log_ratios(self, floor_rel=1e-24):
        """Ratios ``log d_{n+1} / log d_n`` over the resolved differences.

        Under a ``K^(3^n)`` envelope these tend to 3; a geometric
        contraction drives them towards 1.
        """
        d = self.resolved(floor_rel)
        if d.size < 2 or np.any(d >= 1):
            return np.array([])
        ld = np.log(d)
        return ld[1:] / ld[:-1]

    def decrement_ratios(self, floor_rel=1e-24):
        """Ratios of successive log-decrements ``log(d_n / d_{n+1})``."""
        dec = -np.diff(np.log(self.resolved(floor_rel)))
        return dec[1:] / dec[:-1] if dec.size >= 2 else np.array([])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "sup_diff_energy", "envelope"])
            for n, (d, e) in enumerate(zip(self.diff_energies, self.bound_curve), start=1):
                w.writerow([n, repr(d), repr(e)])


def patch_grids(m, u0, eps, n_u=400, n_R=80, u_span=10.0):
    """u nodes from u_span * u0 up to u0 and R nodes up to the eps leaf at u0."""
    u = np.linspace(u_span * u0, u0, n_u + 1)
    r_top = float(hs_leaf_R(np.array([u0]), eps, m)[0])
    R = np.linspace(0.0, r_top, n_R + 1)
    return u, R


def _patch_linear_solve(u, R, theta_u, theta_R, m, src):
    """One linear characteristic solve ``w_R = 2 m R phi + src``, ``w = 2 phi_u + F phi_R``.

    Marches from u0 (``u[0]``) to decreasing u with classical RK4;
    ``src`` lives on the nodes and is averaged to the half steps. The scri
    values ``phi(u, 0) = theta_u`` are imposed exactly at every node.
    """
    F = R**2 * (1 - 2 * m * R)
    w0 = 2 * np.gradient(theta_u, u, edge_order=2)
    out = np.empty((u.size, R.size))
    out[0] = theta_R
    out[0, 0] = theta_u[0]

    def rhs(phi, w_edge, s):
        w = w_edge + cumulative_trapezoid(2 * m * R * phi + s, R, initial=0.0)
        return 0.5 * (w - F * np.gradient(phi, R, edge_order=2))

    phi = out[0].copy()
    for i in range(u.size - 1):
        du = u[i + 1] - u[i]
        wm = 0.5 * (w0[i] + w0[i + 1])
        sm = 0.5 * (src[i] + src[i + 1])
        k1 = rhs(phi, w0[i], src[i])
        k2 = rhs(phi + 0.5 * du * k1, wm, sm)
        k3 = rhs(phi + 0.5 * du * k2, wm, sm)
        k4 = rhs(phi + du * k3, w0[i + 1], src[i + 1])
        phi = phi + du / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        phi[0] = theta_u[i + 1]
        if not np.all(np.isfinite(phi)) or np.max(np.abs(phi)) > 1e150:
            raise BlowUpError(float(u[i + 1]))
        out[i + 1] = phi
    return out


def solve_picard(
    pair,
    theta_scri: CharacteristicData,
    theta_s: CharacteristicData,
    eps: float,
    cfg: Optional[EvolutionConfig] = None,
    *,
    n_max=12,
    tol_abs=TOL_ABS,
    n_leaves=11,
    strict=False,
) -> PicardRun:
    """Picard iteration ``box phi_n - 2 m R phi_n = phi_{n-1}^3`` on the patch.

    ``theta_scri`` samples phi on scri (parameter u, ending at u0) and
    ``theta_s`` on S_{u0} (parameter R from 0). The iteration stops when the
    sup over sampled leaves H_s (s in [0, eps]) of the difference energy
    drops below ``tol_abs``, and reports divergence as soon as that energy
    grows (from the second difference on) or the solve blows up.
    """
    from .energy import hs_energy

    m, u0 = pair.params["m"], pair.params["u0"]
    # march from u0 towards i0: work with decreasing u internally
    u = theta_scri.grid.nodes[::-1]
    th_u = theta_scri.values[::-1]
    R = theta_s.grid.nodes
    if abs(u[0] - u0) > 1e-9 * abs(u0):
        raise CoverageError("scri data must end at u0")
    if abs(th_u[0] - theta_s.values[0]) > 1e-9 * (1 + abs(theta_s.values[0])):
        raise ParameterError("corner values of the two data sets disagree")
    r_edge = float(hs_leaf_R(np.array([u0]), eps, m)[0])
    if R[-1] < r_edge * (1 - 1e-9):
        raise CoverageError("S_u0 data do not reach the eps leaf")
    cubic = cfg is None or cfg.nonlinearity == "cubic_defocusing"
    leaves = tuple(np.linspace(0.0, eps, n_leaves))
    zero = np.zeros((u.size, R.size))
    iterates = []
    diffs = []
    report, diverged, converged = "", None, False
    try:
        phi = _patch_linear_solve(u, R, th_u, theta_s.values, m, zero)
    except BlowUpError as exc:
        return PicardRun([], [], False, [], f"diverged at n=0 (blow-up at u={exc.args[0]})", 0, eps)
    iterates.append(PatchSolution(u, R, phi, m, u0))
    data_e = max(hs_energy(iterates[0], s, m, u0)["total"] for s in leaves)
    if not cubic or np.max(np.abs(phi)) == 0.0:
        return PicardRun(iterates, [], True, [], "converged at n=0", None, eps, data_e, leaves)
    for n in range(1, n_max + 1):
        try:
            nxt = _patch_linear_solve(u, R, th_u, theta_s.values, m, phi**3)
        except BlowUpError as exc:
            diverged = n
            report = f"diverged at n={n} (blow-up at u={exc.args[0]:.4g})"
            break
        cand = PatchSolution(u, R, nxt, m, u0)
        d = max(hs_energy(cand - iterates[-1], s, m, u0)["total"] for s in leaves)
        iterates.append(cand)
        diffs.append(d)
        phi = nxt
        if not np.isfinite(d) or (len(diffs) >= 2 and d > diffs[-2]):
            diverged = n
            report = f"diverged at n={n}: difference energy {d:.3e} grew"
            break
        if d < tol_abs:
            converged = True
            report = f"converged at n={n}: difference energy {d:.3e} < {tol_abs:g}"
            break
    else:
        report = f"not converged after n_max={n_max}"
    env = _envelope(diffs)
    if strict and not converged:
        raise ConvergenceError(report)
    return PicardRun(iterates, diffs, converged, env, report, diverged, eps, data_e, leaves)


def _envelope(diffs):
    """Smallest K with d_n <= K^(3^n) for every recorded difference (as a curve)."""
    d = np.asarray(diffs, float)
    pos = d > 0
    if not np.any(pos) or not np.all(np.isfinite(d)):
        return [float("nan")] * d.size
    n = np.arange(1, d.size + 1)
    # exact zeros (round-off floor reached) satisfy any envelope
    K = float(np.max(np.exp(np.log(d[pos]) / 3.0 ** n[pos])))
    return list(K ** (3.0**n))


def picard_data(m, u0, eps, amplitude, n_u=400, n_R=80, u_span=10.0):
    """Bump data on scri_{u0} and S_{u0} with matching (zero) corner values."""
    u, R = patch_grids(m, u0, eps, n_u, n_R, u_span)
    scri, s_u0 = patch_null_surfaces(m, u0)
    a, b = u0 * 1.5, u0 * 6.0
    z = (2 * u - (a + b)) / (b - a)
    bump = np.zeros_like(u)
    inside = np.abs(z) < 1
    bump[inside] = np.exp(1 - 1 / (1 - z[inside] ** 2))
    zr = 2 * R / R[-1] - 1
    rb = np.zeros_like(R)
    ir = np.abs(zr) < 1
    rb[ir] = np.exp(1 - 1 / (1 - zr[ir] ** 2))
    gu = Grid1D(coord_name="u", nodes=u, boundary=("open", "open"))
    gR = Grid1D(coord_name="R", nodes=R, boundary=("open", "open"))
    return (
        CharacteristicData(scri, gu, amplitude * bump),
        CharacteristicData(s_u0, gR, 0.5 * amplitude * rb),
    )


# -- reports --------------------------------------------------------------------

def convergence_report(run: Union[HoermanderRun, PicardRun]) -> dict:
    """Fitted rates and a pass/fail verdict for either kind of run."""
    if isinstance(run, HoermanderRun):
        d = np.asarray(run.differences, float)
        if d.size == 0 or np.all(d == 0):
            return {"kind": "hoermander", "status": "trivially converged", "slope": 0.0, "passed": True, "rows": []}
        eps = 1 - np.asarray(run.schedule.values[1:])
        ok = d > 0
        # d ~ (1 - lam)^slope; a positive slope means the differences shrink
        slope = float(np.polyfit(np.log2(eps[ok]), np.log2(d[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
        rows = [("lambda_diff", float(l), float(x)) for l, x in zip(run.schedule.values[1:], d)]
        return {
            "kind": "hoermander",
            "status": run.report,
            "slope": slope,
            "passed": run.converged,
            "trace_check": run.trace_check,
            "rows": rows,
        }
    d = np.asarray(run.diff_energies, float)
    if run.diverged_at is not None:
        status = f"diverged at n={run.diverged_at}"
    elif d.size == 0:
        status = "trivially converged"
    else:
        status = run.report
    rat = run.log_ratios()
    rows = [("picard_diff", n + 1, float(x)) for n, x in enumerate(d)]
    rows += [("log_ratio", n + 2, float(x)) for n, x in enumerate(rat)]
    return {
        "kind": "picard",
        "status": status,
        "log_ratios": [float(r) for r in rat],
        "passed": run.diverged_at is None and (run.converged or d.size == 0),
        "diverged_at": run.diverged_at,
        "rows": rows,
    }


def write_report_csv(report: dict, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "index", "value"])
        for row in report["rows"]:
            w.writerow([row[0], repr(row[1]), repr(row[2])])
