"""Leapfrog evolution of the reduced cubic conformal wave equation.

On an ultrastatic chart ``-dt^2 + dx^2 + A(x)^2 dOmega^2`` the conformal
equation for a zonal field ``phi`` becomes, with ``psi = A phi``,

    psi_tt = psi_xx - V psi - psi^3 / A^2 + source,

where ``V = A''/(3A) + (1 - A'^2)/(3A^2)`` vanishes on the Einstein cylinder
and on Minkowski space. The cylinder reduces to ``psi_TT = psi_chichi -
psi^3/sin^2 chi`` with Dirichlet poles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .fields import (
    FOUR_PI,
    CauchyData,
    CharacteristicData,
    CoverageError,
    Grid1D,
    GridError,
    ScalarFieldGrid,
    areal_arrays,
    reduced_norms,
)
from .geometry import ConformalPair, ModelMetric, ParameterError

NONLINEARITIES = ("cubic_defocusing", "linear", "potential")
DIAGNOSTIC_COLUMNS = ("stamp", "E_lin", "E_full", "L2", "H1", "L4^4", "max_abs")


class ConfigError(ValueError):
    """Invalid evolution configuration (including CFL violations)."""


class BlowUpError(FloatingPointError):
    def __init__(self, stamp):
        super().__init__(f"non-finite values appeared at stamp {stamp:.6g}")
        self.stamp = stamp


@dataclass(frozen=True)
class EvolutionConfig:
    """Step control and equation variant for :func:`evolve`.

    ``t_end`` is the final parameter value; ``t_end < t0`` evolves backward.
    ``dt`` defaults to the largest step not exceeding ``cfl * h`` that
    divides the interval evenly. ``potential_eval(t)`` returns the ``H^2``
    multiplier on the grid nodes, ``mask(t, x)`` an optional indicator that
    multiplies it, and ``source(t, x)`` an inhomogeneity added to the
    right-hand side.
    """

    t_end: float
    cfl: float = 0.25
    dt: Optional[float] = None
    nonlinearity: str = "cubic_defocusing"
    potential_eval: Optional[Callable] = None
    mask: Optional[Callable] = None
    source: Optional[Callable] = None
    direction: Optional[str] = None
    t0: float = 0.0
    record_every: int = 1

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ConfigError(f"cfl={self.cfl} outside (0, 1)")
        if self.nonlinearity not in NONLINEARITIES:
            raise ConfigError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.nonlinearity == "potential" and self.potential_eval is None:
            raise ConfigError("potential nonlinearity needs potential_eval")
        want = "forward" if self.t_end >= self.t0 else "backward"
        if self.direction is not None and self.direction != want:
            raise ConfigError(f"direction {self.direction} inconsistent with t0={self.t0}, t_end={self.t_end}")
        if self.record_every < 1:
            raise ConfigError("record_every must be positive")

    def steps(self, h):
        span = self.t_end - self.t0
        if span == 0:
            return 0, 0.0
        if self.dt is not None:
            if abs(self.dt) > self.cfl * h * (1 + 1e-12):
                raise ConfigError(f"dt={self.dt} violates cfl {self.cfl} at h={h}")
            n = max(1, int(round(abs(span) / abs(self.dt))))
            if abs(n * abs(self.dt) - abs(span)) > 1e-9 * abs(span):
                raise ConfigError("dt does not divide the evolution interval")
        else:
            # guard against ceil(4N + tiny) on exactly divisible intervals
            n = max(1, math.ceil(abs(span) / (self.cfl * h) - 1e-9))
        return n, span / n


class SolutionHistory:
    """Time-ordered reduced Cauchy data produced by an evolution.

    Stored as arrays; ``frames`` and :meth:`frame` build :class:`CauchyData`
    views on demand.
    """

    def __init__(self, grid, metric, config, stamps, positions, velocities, dt=None, diagnostics=None):
        self.grid = grid
        self.metric = metric
        self.config = config
        self.stamps = np.asarray(stamps, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        self.velocities = np.asarray(velocities, dtype=float)
        self.dt = dt
        if self.positions.shape != (self.stamps.size, grid.n) or self.velocities.shape != self.positions.shape:
            raise GridError("history arrays do not match grid and stamps")
        if self.stamps.size > 1:
            d = np.diff(self.stamps)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("stamps must be strictly monotone")
        for arr in (self.positions, self.velocities):
            arr.setflags(write=False)
        self._diagnostics = diagnostics

    def __len__(self):
        return self.stamps.size

    def frame(self, k) -> CauchyData:
        return CauchyData.from_arrays(self.grid, self.positions[k], self.velocities[k], float(self.stamps[k]))

    @property
    def frames(self):
        return [self.frame(k) for k in range(len(self))]

    @property
    def initial(self):
        return self.frame(0)

    @property
    def final(self):
        return self.frame(-1)

    @property
    def diagnostics(self):
        if self._diagnostics is None:
            self._diagnostics = frame_diagnostics(self)
        return self._diagnostics

    def write_diagnostics(self, path):
        d = self.diagnostics
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(DIAGNOSTIC_COLUMNS)
            for row in zip(*(d[c] for c in DIAGNOSTIC_COLUMNS)):
                w.writerow([f"{v:.17g}" for v in row])


# -- reduced operator --------------------------------------------------------------

def linear_potential(metric, x):
    """Zeroth-order coefficient V of the reduced operator, zero at poles."""
    A, dA, ddA = areal_arrays(metric, x)
    pole = np.abs(A) < 1e-14
    Af = np.where(pole, 1.0, A)
    V = np.where(pole, 0.0, ddA / (3 * Af) + (1 - dA**2) / (3 * Af**2))
    # the model charts have V = 0 up to rounding
    return np.where(np.abs(V) < 1e-12, 0.0, V)


def _require_reduced(metric, grid):
    if metric.areal_derivs is None or metric.lapse_eval is None:
        raise ConfigError(f"metric {metric.name!r} has no ultrastatic reduction")
    if metric.slowdown != 1.0:
        raise ConfigError("use evolve_on_slowed for slowed metrics")
    if grid.boundary != ("dirichlet_zero", "dirichlet_zero"):
        raise ConfigError("evolution requires dirichlet_zero ends")


class _ReducedOperator:
    """Right-hand side psi_xx - V psi - N(psi) + source on interior nodes."""

    def __init__(self, metric, grid, cfg):
        self.h = grid.spacing
        self.x = grid.nodes
        A = areal_arrays(metric, self.x)[0]
        self.invA2 = np.zeros_like(A)
        self.invA2[1:-1] = 1.0 / A[1:-1] ** 2
        self.V = linear_potential(metric, self.x)
        self.has_V = bool(np.any(self.V[1:-1] != 0))
        self.cfg = cfg
        self.cubic = cfg.nonlinearity == "cubic_defocusing"

    def laplacian(self, psi):
        out = np.zeros_like(psi)
        out[..., 1:-1] = (psi[..., 2:] - 2 * psi[..., 1:-1] + psi[..., :-2]) / self.h**2
        return out

    def K(self, psi):
        """Discrete positive operator -D2 + V (Dirichlet)."""
        out = -self.laplacian(psi)
        if self.has_V:
            out[..., 1:-1] += self.V[1:-1] * psi[..., 1:-1]
        return out

    def __call__(self, psi, t):
        out = -self.K(psi)
        cfg = self.cfg
        if self.cubic:
            # (psi/A)^2 psi; the end nodes carry invA2 = 0 and psi = 0
            out -= psi**3 * self.invA2
        if cfg.potential_eval is not None:
            P = np.asarray(cfg.potential_eval(t), dtype=float)
            if cfg.mask is not None:
                P = P * cfg.mask(t, self.x)
            out -= P * psi
        if cfg.source is not None:
            out += np.asarray(cfg.source(t, self.x), dtype=float)
        out[0] = out[-1] = 0.0
        return out


def evolve(g: ModelMetric, d0: CauchyData, cfg: EvolutionConfig) -> SolutionHistory:
    """Leapfrog integration of the reduced equation from ``d0``.

    The first step is the Taylor step ``psi^1 = psi^0 + dt v^0 + dt^2/2 L``,
    and frame velocities are centered differences, computed for the last
    frame from one extra step. With this pairing a forward run followed by a
    backward run from its final frame retraces the same discrete orbit.
    """
    grid = d0.grid
    _require_reduced(g, grid)
    if d0.stamp != cfg.t0:
        # the data carry their own start time
        cfg = replace(cfg, t0=float(d0.stamp), direction=None)
    n_steps, dt = cfg.steps(grid.spacing)
    L = _ReducedOperator(g, grid, cfg)
    t0 = cfg.t0
    every = cfg.record_every
    keep = list(range(0, n_steps + 1, every))
    if keep[-1] != n_steps:
        keep.append(n_steps)
    pos = np.empty((len(keep), grid.n))
    vel = np.empty_like(pos)
    stamps = np.array([t0 + k * dt for k in keep])
    if n_steps:
        stamps[-1] = cfg.t_end

    prev = np.array(d0.position.values, dtype=float)
    v0 = np.array(d0.velocity.values, dtype=float)
    cur = prev + dt * v0 + 0.5 * dt**2 * L(prev, t0)
    cur[0] = cur[-1] = 0.0
    pos[0], vel[0] = prev, v0
    slot = 1
    dt2 = dt * dt
    # after the loop body for step k: prev = psi^k, cur = psi^(k+1)
    for k in range(1, n_steps + 1):
        t = t0 + k * dt
        nxt = 2 * cur - prev + dt2 * L(cur, t)
        if slot < len(keep) and keep[slot] == k:
            pos[slot] = cur
            vel[slot] = (nxt - prev) / (2 * dt)
            slot += 1
        if k % 64 == 0 and not np.all(np.isfinite(nxt)):
            raise BlowUpError(t)
        prev, cur = cur, nxt
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        bad = int(np.argmax(~np.all(np.isfinite(pos), axis=1) | ~np.all(np.isfinite(vel), axis=1)))
        raise BlowUpError(float(stamps[bad]))
    return SolutionHistory(grid, g, cfg, stamps, pos, vel, dt=dt)


def frame_diagnostics(hist: SolutionHistory) -> dict:
    """Per-frame energies and norms, vectorised over the history.

    ``E_lin`` is the modified quadratic energy
    ``1/2|v|^2 + 1/2<psi, K psi> - dt^2/8 |K psi|^2`` (times ``4 pi``), which
    leapfrog conserves exactly in the linear case; ``E_full`` adds the
    quartic term for the cubic equation.
    """
    grid, g = hist.grid, hist.metric
    psi, v = hist.positions, hist.velocities
    h = grid.spacing
    dt = hist.dt or 0.0
    L = _ReducedOperator(g, grid, hist.config)
    Kpsi = L.K(psi)
    # Dirichlet ends vanish, so the trapezoid weight is h on every interior node
    E_lin = FOUR_PI * h * (
        0.5 * np.sum(v**2, axis=-1) + 0.5 * np.sum(psi * Kpsi, axis=-1) - dt**2 / 8 * np.sum(Kpsi**2, axis=-1)
    )
    q = reduced_norms(psi, v, grid, g)
    quartic = 0.25 * q["L4^4"]
    E_full = E_lin + quartic if hist.config.nonlinearity == "cubic_defocusing" else E_lin.copy()
    return {
        "stamp": hist.stamps,
        "E_lin": E_lin,
        "E_full": E_full,
        "L2": np.sqrt(q["L2sq"]),
        "H1": np.sqrt(q["L2sq"] + q["gradsq"]),
        "L4^4": q["L4^4"],
        "max_abs": q["max_abs"],
    }


def relative_drift(values):
    values = np.asarray(values, dtype=float)
    scale = abs(values[0]) if values[0] != 0 else max(np.max(np.abs(values)), 1e-300)
    return float(np.max(np.abs(values - values[0])) / scale) if np.any(values) else 0.0


def tabulate_history(g, grid, stamps, f, ft=None, config=None):
    """History sampled from a closed-form reduced field ``f(t, x)``.

    ``ft`` is the time derivative; when omitted it is taken by a centered
    difference with step ``1e-5``.
    """
    stamps = np.asarray(stamps, dtype=float)
    T, X = np.meshgrid(stamps, grid.nodes, indexing="ij")
    pos = f(T, X)
    if ft is None:
        e = 1e-5
        vel = (f(T + e, X) - f(T - e, X)) / (2 * e)
    else:
        vel = ft(T, X)
    pos = np.broadcast_to(pos, T.shape).astype(float)
    vel = np.broadcast_to(vel, T.shape).astype(float)
    cfg = config or EvolutionConfig(t_end=float(stamps[-1]), t0=float(stamps[0]), nonlinearity="linear")
    dt = float(stamps[1] - stamps[0]) if stamps.size > 1 else None
    return SolutionHistory(grid, g, cfg, stamps, pos, vel, dt=dt)


# -- slowed evolution from a cone ---------------------------------------------------

@dataclass
class SlowedSolution:
    """Result of one slowed solve: lattice-level history and the data on T = 0."""

    lam: float
    history: Optional[SolutionHistory]
    sigma0: CauchyData
    steps: int
    dsigma: float
    cone_metric_value: float = field(default=0.0)


def cone_tangent_norm(g, lam, x=(np.pi / 2, np.pi / 2)):
    """g_lambda of the ingoing cone tangent d_T - d_chi (equals 1 - lambda^2)."""
    from .geometry import slow_metric

    return slow_metric(g, lam).dot(np.asarray(x, float), np.array([1.0, -1.0]))


def cone_to_chi(data: CharacteristicData, n_cells=None):
    """phi on the scri^+ cone, sampled over s, to psi on the chi grid at sigma = 0."""
    s = data.grid.nodes
    n = n_cells or (s.size - 1)
    grid = Grid1D.uniform("chi", 0.0, np.pi, n, ("dirichlet_zero", "dirichlet_zero"))
    chi = grid.nodes
    s_of_chi = np.pi / 2 - chi
    if s.size == n + 1 and np.allclose(s[::-1], s_of_chi, atol=1e-12, rtol=0):
        theta = data.values[::-1].copy()
    else:
        theta = np.interp(s_of_chi, s, data.values, left=0.0, right=0.0)
    psi = theta * np.sin(chi)
    psi[0] = psi[-1] = 0.0
    return grid, psi


def _split_characteristic(psi0, w, chi, lam):
    """Exact linear split psi = F(chi + lam T) + G(chi - lam T) of cone data.

    Returns vectorised callables ``F`` and ``G`` extended by the pole
    reflections (odd about chi = 0 and chi = pi, hence 2 pi periodic).
    """
    from scipy.integrate import cumulative_trapezoid
    from scipy.interpolate import CubicSpline

    A = 1.0 - lam * lam
    W = cumulative_trapezoid(w, chi, initial=0.0)
    g_spline = CubicSpline(chi, 0.5 * ((1 + lam) * psi0 - A / lam * W))
    f_spline = CubicSpline(chi, 0.5 * ((1 - lam) * psi0 + A / lam * W)) if lam < 1 else None
    lp = lam * np.pi

    def fold(x):
        return (np.asarray(x, dtype=float) + np.pi) % (2 * np.pi) - np.pi

    def g_direct(q):
        return g_spline((q + lp) / (1 + lam))

    def f_direct(p):
        if f_spline is None:
            return np.zeros_like(p)
        return f_spline((p - lp) / (1 - lam))

    def F(p):
        p = fold(p)
        out = np.empty_like(p)
        hi = p >= lp
        out[hi] = f_direct(p[hi])
        out[~hi] = -g_direct(np.clip(-p[~hi], -lp, np.pi))
        return out

    def G(q):
        q = fold(q)
        out = np.empty_like(q)
        lo = q < -lp
        out[~lo] = g_direct(q[~lo])
        out[lo] = -f_direct(np.clip(-q[lo], lp, np.pi))
        return out

    return F, G


@dataclass
class NullLattice:
    """Values of psi on the slowed characteristic lattice.

    Nodes sit at ``U = lam T - chi = i h`` and ``V = lam T + chi = j h``;
    ``values[i - i0, j - j0]``. Nodes on or above the cone carry the exact
    linear extension of the cone data.
    """

    lam: float
    h: float
    n: int
    i0: int
    j0: int
    values: np.ndarray

    def at(self, i, j):
        return self.values[np.asarray(i) - self.i0, np.asarray(j) - self.j0]

    def level(self, m):
        """psi on T = m h / lam at chi = k h, k = 0..n (nodes i + j = 2m)."""
        k = np.arange(self.n + 1)
        return self.at(m - k, m + k)

    def half_level(self, m2):
        """psi on i + j = m2 (odd) at chi = (k + 1/2) h, k = 0..n-1."""
        k = np.arange(self.n)
        return self.at((m2 - 1) // 2 - k, (m2 + 1) // 2 + k)

    def velocity(self, m):
        """Centered T-derivative on level m from the two adjacent half levels."""
        half = (self.half_level(2 * m + 1) - self.half_level(2 * m - 1)) * (self.lam / self.h)
        out = np.zeros(self.n + 1)
        out[1:-1] = 0.5 * (half[1:] + half[:-1])
        return out


def null_lattice_solve(psi0, w, lam, cubic=True, top_level=0):
    """March the characteristic lattice from the cone T + chi = pi down to T = 0.

    In ``U = lam T - chi`` and ``V = lam T + chi`` the slowed reduced
    equation is ``4 psi_UV = -psi^3 / sin^2 chi``, so the diamond rule
    ``psi_S = psi_E + psi_W - psi_N - h^2 src / 4`` is exact for the linear
    part. ``lam = 1`` is the characteristic (Goursat) problem on scri^+, in
    which case ``w`` is ignored. Cubic sources at cell centers use a
    second-order extrapolation from the two levels above.
    ``top_level`` extends the box so that ``level(m)`` is available up to it.
    """
    psi0 = np.asarray(psi0, dtype=float)
    n = psi0.size - 1
    h = np.pi / n
    chi = np.linspace(0.0, np.pi, n + 1)
    w = np.zeros_like(psi0) if w is None or lam == 1 else np.asarray(w, dtype=float)
    F, G = _split_characteristic(psi0, w, chi, lam)
    i0, j0 = -2 * n - 2, -2
    j_hi = max(n + 2, top_level + n + 1)
    ii = np.arange(i0, max(n, top_level) + 1)
    jj = np.arange(j0, j_hi + 1)
    vals = F(jj[None, :] * h) + G(-ii[:, None] * h)
    for j in range(n, -1, -1):
        cj = j - j0
        if lam < 1:
            top = min(j - 1, math.floor((2 * lam * n - j * (1 + lam)) / (1 - lam) - 1e-9))
        else:
            if j >= n:
                continue
            top = j - 1
        bot = j - 2 * n
        if top < bot:
            continue
        idx = np.arange(bot, top + 1) - i0
        east = vals[idx, cj + 1]
        north = vals[idx + 1, cj + 1]
        d = east - north
        if cubic:
            c = 0.75 * (east + north) - 0.25 * (vals[idx, cj + 2] + vals[idx + 1, cj + 2])
            sc = np.sin((j - ii[idx]) * h / 2)
            d -= 0.25 * h * h * c**3 / np.where(sc > 1e-14, sc * sc, np.inf)
        if top + 1 == j:
            vals[j - i0, cj] = 0.0
        start = vals[top + 1 - i0, cj]
        vals[idx, cj] = start + np.cumsum(d[::-1])[::-1]
        vals[bot - i0, cj] = 0.0
    if not np.all(np.isfinite(vals)):
        raise BlowUpError(0.0)
    return NullLattice(lam, h, n, i0, j0, vals)


def evolve_on_slowed(
    g: ModelMetric,
    lam: float,
    data_on_cone: CharacteristicData,
    cfg: Optional[EvolutionConfig] = None,
    *,
    n_cells=None,
    cone_velocity=None,
    keep_history=True,
) -> SlowedSolution:
    """Solve the slowed equation from the cone ``T + chi = pi`` down to T = 0.

    With ``sigma = T + chi - pi`` the slowed reduced equation reads
    ``(1 - lam^2) psi_ss = lam^2 (2 psi_schi + psi_chichi - psi^3/sin^2 chi)``.
    Its characteristics are ``chi +- lam T = const``, one of them nearly
    tangent to the cone, so the solve runs on the lattice of those
    characteristics (see :func:`null_lattice_solve`) rather than on a
    sigma grid; the fast family then carries the thin layer it creates near
    ``chi = pi`` without dispersion. The transversal datum is
    ``d_sigma psi = cone_velocity`` (zero by default).

    The returned history holds the lattice levels ``T = m h / lam`` from the
    cone apex down to 0; nodes above the cone carry the linear extension of
    the cone data.
    """
    if not 0.5 <= lam < 1.0:
        if lam == 1.0:
            raise ParameterError("lambda = 1 makes the cone characteristic; nothing to slow")
        raise ParameterError(f"lambda={lam} outside [1/2, 1)")
    if g.areal_derivs is None:
        raise ConfigError("slowed evolution needs an ultrastatic chart")
    gl = cone_tangent_norm(g, lam)
    if not gl > 0:
        raise ConfigError("cone is not spacelike for the slowed metric")
    cubic = cfg is None or cfg.nonlinearity == "cubic_defocusing"
    grid, psi0 = cone_to_chi(data_on_cone, n_cells)
    n = grid.n - 1
    w = np.zeros_like(psi0) if cone_velocity is None else np.asarray(cone_velocity, dtype=float)
    m_top = math.floor(lam * n + 1e-9) if keep_history else 0
    lat = null_lattice_solve(psi0, w, lam, cubic, top_level=m_top + 1)
    sigma0 = CauchyData.from_arrays(grid, lat.level(0), lat.velocity(0), 0.0)
    hist = None
    if keep_history:
        ms = np.arange(m_top, -1, -1)
        stamps = ms * lat.h / lam
        pos = np.array([lat.level(m) for m in ms])
        vel = np.array([lat.velocity(m) for m in ms])
        pos[:, 0] = pos[:, -1] = 0.0
        hcfg = EvolutionConfig(
            t_end=0.0, t0=float(stamps[0]), nonlinearity="cubic_defocusing" if cubic else "linear"
        )
        hist = SolutionHistory(grid, g, hcfg, stamps, pos, vel, dt=-lat.h / lam)
    return SlowedSolution(lam, hist, sigma0, n, -lat.h / lam, gl)


# -- difference equation ----------------------------------------------------------

def evolve_difference(g: ModelMetric, u_hist: SolutionHistory, v_hist: SolutionHistory):
    """Evolve delta = u - v through the linear equation with potential H^2.

    The potential is ``(u^2 + u v + v^2)/A^2`` frame by frame, so the discrete
    evolution factors the cubic difference exactly. Returns
    ``(delta_history, direct_difference_history)``.
    """
    from .energy import difference_envelope

    if not u_hist.grid.same_as(v_hist.grid) or not np.array_equal(u_hist.stamps, v_hist.stamps):
        raise GridError("histories are not on a common grid")
    if u_hist.dt is None or u_hist.dt != v_hist.dt or u_hist.config.record_every != 1:
        raise GridError("histories must record every step with a common dt")
    grid = u_hist.grid
    A = areal_arrays(g, grid.nodes)[0]
    invA2 = np.zeros_like(A)
    invA2[1:-1] = 1 / A[1:-1] ** 2
    env = difference_envelope(u_hist.positions, v_hist.positions)
    table = env * invA2
    t0, dt = u_hist.stamps[0], u_hist.dt
    last = table.shape[0] - 1

    def potential(t):
        return table[min(last, int(round((t - t0) / dt)))]

    cfg = replace(
        u_hist.config,
        nonlinearity="potential",
        potential_eval=potential,
        source=None,
        dt=dt,
        direction=None,
    )
    d0 = CauchyData.from_arrays(
        grid,
        u_hist.positions[0] - v_hist.positions[0],
        u_hist.velocities[0] - v_hist.velocities[0],
        float(t0),
    )
    delta = evolve(g, d0, cfg)
    direct = SolutionHistory(
        grid, g, cfg, u_hist.stamps,
        u_hist.positions - v_hist.positions, u_hist.velocities - v_hist.velocities, dt=dt,
    )
    return delta, direct


# -- conformal covariance and manufactured solutions ---------------------------------

def reduced_residual(g, psi, T, x):
    """psi_TT - psi_xx + V psi + psi^3/A^2 by centered differences on a box.

    ``psi`` has shape ``(len(T), len(x))`` on uniform axes; returns the
    residual on interior points.
    """
    hT, hx = T[1] - T[0], x[1] - x[0]
    ptt = (psi[2:, 1:-1] - 2 * psi[1:-1, 1:-1] + psi[:-2, 1:-1]) / hT**2
    pxx = (psi[1:-1, 2:] - 2 * psi[1:-1, 1:-1] + psi[1:-1, :-2]) / hx**2
    xi = x[1:-1]
    A = areal_arrays(g, xi)[0]
    V = linear_potential(g, xi)
    c = psi[1:-1, 1:-1]
    return ptt - pxx + V * c + c**3 / A**2


DEFAULT_BOX = ((0.3, 1.0), (0.4, 1.4))


def conformal_identity_residual(pair: ConformalPair, phys_hist: SolutionHistory, box=DEFAULT_BOX, spacing=None):
    """Max residual of the transported physical solution under the rescaled operator.

    The physical reduced history is fitted by a bicubic spline, mapped to
    the rescaled chart through the coordinate map, converted to the rescaled
    reduced field ``psi = xi * A_resc / (Omega * A_phys)`` and fed to the
    rescaled reduced operator by finite differences on ``box`` with spacing
    equal to the physical grid spacing (or ``spacing``).
    """
    g = pair.rescaled
    if g.areal_derivs is None:
        raise ConfigError("rescaled metric has no ultrastatic reduction")
    t, r = phys_hist.stamps, phys_hist.grid.nodes
    vals = phys_hist.positions
    if t[0] > t[-1]:
        t, vals = t[::-1], vals[::-1]
    spline = RectBivariateSpline(t, r, vals, kx=3, ky=3)
    H = spacing or phys_hist.grid.spacing
    (Ta, Tb), (xa, xb) = box
    nT = max(4, int(round((Tb - Ta) / H)))
    nx = max(4, int(round((xb - xa) / H)))
    TT = np.linspace(Ta, Tb, nT + 1)
    XX = np.linspace(xa, xb, nx + 1)
    P = np.array([[pair.inverse_map((a, b)) for b in XX] for a in TT])
    tp, rp = P[..., 0], P[..., 1]
    if tp.min() < t[0] or tp.max() > t[-1] or rp.min() < r[0] or rp.max() > r[-1]:
        raise CoverageError("rescaled box maps outside the physical history")
    xi = spline.ev(tp, rp)
    om = np.vectorize(lambda a, b: pair.omega_eval((a, b)))(tp, rp)
    A_phys = areal_arrays(pair.physical, rp)[0]
    A_resc = areal_arrays(g, np.broadcast_to(XX, tp.shape))[0]
    psi = xi * A_resc / (om * A_phys)
    return float(np.max(np.abs(reduced_residual(g, psi, TT, XX))))


def manufactured_residual(g: ModelMetric, f: Callable, grid: Grid1D, t: float, h=None) -> ScalarFieldGrid:
    """Forcing that makes the reduced closed form ``f(t, x)`` an exact solution.

    Returns ``f_tt - f_xx + V f + f^3/A^2`` on the grid, with derivatives by
    centered differences of step ``h`` (the grid spacing by default); the
    end values are zeroed to respect Dirichlet tags.
    """
    x = grid.nodes
    out = manufactured_source(g, f, h or grid.spacing)(t, x)
    if "dirichlet_zero" in grid.boundary:
        out = out.copy()
        if grid.boundary[0] == "dirichlet_zero":
            out[0] = 0.0
        if grid.boundary[1] == "dirichlet_zero":
            out[-1] = 0.0
    return ScalarFieldGrid(grid, out, t)


def manufactured_source(g, f, h):
    """Callable ``source(t, x)`` for :class:`EvolutionConfig`."""

    def source(t, x):
        x = np.asarray(x, dtype=float)
        f0 = f(t, x)
        ftt = (f(t + h, x) - 2 * f0 + f(t - h, x)) / h**2
        fxx = (f(t, x + h) - 2 * f0 + f(t, x - h)) / h**2
        A = areal_arrays(g, x)[0]
        pole = np.abs(A) < 1e-14
        quot = np.where(pole, 0.0, f0**3 / np.where(pole, 1.0, A) ** 2)
        return ftt - fxx + linear_potential(g, x) * f0 + quot

    return source
