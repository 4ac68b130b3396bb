"""Radiation fields, their inverses and the scattering map on the cylinder.

Profiles live on scri^+ or scri^- over the angle ``s`` in (-pi/2, pi/2);
on the Minkowski side ``u = tan s`` (respectively ``v = tan s``). The
inverse trace on scri^+ combines the slowdown solve, which is reliable
away from i0, with the characteristic lattice near i0. Profiles on scri^-
are handled by time reflection, which maps scri^- at ``s`` to scri^+ at
``-s``.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from .characteristic import (
    LambdaSchedule,
    PatchPiece,
    characteristic_patch,
    glue,
    solve_hoermander,
)
from .evolution import EvolutionConfig, evolve
from .fields import (
    CauchyData,
    CharacteristicData,
    GridError,
    Grid1D,
    cone_h1_norm,
    restrict_to_surface,
    scri_grid,
)
from .geometry import einstein_cylinder_metric, scri_minus, scri_plus

SURFACE_KINDS = ("scri_plus", "scri_minus")
REPORT_COLUMNS = ("case", "amplitude", "h", "lambda_max", "rt_error", "lin_dev", "lip_min", "lip_max")
# blend band on Sigma_0 between the slowdown data and the near-i0 lattice piece
GLUE_BAND = (5 * np.pi / 6, 11 * np.pi / 12)
TOL_GLUE_REL = 5e-2


def _metric():
    return einstein_cylinder_metric(T_range=(-np.pi, np.pi))


def _surface(kind):
    if kind == "scri_plus":
        return scri_plus()
    if kind == "scri_minus":
        return scri_minus()
    raise ValueError(f"surface kind must be one of {SURFACE_KINDS}")


@dataclass(frozen=True)
class RadiationProfile:
    surface_kind: str
    grid: Grid1D
    values: np.ndarray
    h1_norm: float = field(init=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.nodes.shape:
            raise GridError("values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("non-finite profile")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("profiles must vanish at the ends of the parameter range")
        object.__setattr__(self, "h1_norm", cone_h1_norm(self.characteristic()))

    def characteristic(self) -> CharacteristicData:
        return CharacteristicData(_surface(self.surface_kind), self.grid, self.values)

    @classmethod
    def from_characteristic(cls, d: CharacteristicData, clean_ends=True):
        v = d.values.copy()
        if clean_ends:
            v[0] = v[-1] = 0.0
        return cls(d.surface.kind, d.grid, v)

    def l2_norm(self):
        m = _surface(self.surface_kind).contracted_measure(self.grid.nodes)
        return float(np.sqrt(trapezoid(self.values**2 * m, self.grid.nodes)))

    def with_values(self, values, kind=None):
        return RadiationProfile(kind or self.surface_kind, self.grid, values)

    def __add__(self, other):
        self._check(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self.with_values(self.values - other.values)

    def scaled(self, a):
        return self.with_values(a * self.values)

    def _check(self, other):
        if other.surface_kind != self.surface_kind or not self.grid.same_as(other.grid):
            raise GridError("profiles on different surfaces or grids")


def bump(s, center=0.0, width=0.6):
    """Smooth compactly supported bump, 1 at the centre."""
    z = (np.asarray(s, dtype=float) - center) / width
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    out[inside] = np.exp(1 - 1 / (1 - z[inside] ** 2))
    return out


def bump_profile(amplitude, n_cells=400, kind="scri_plus", center=0.0, width=0.6):
    grid = scri_grid(n_cells)
    return RadiationProfile(kind, grid, amplitude * bump(grid.nodes, center, width))


# -- traces ---------------------------------------------------------------------

def _trace(d0: CauchyData, kind, cubic, grid):
    g = _metric()
    t_end = np.pi if kind == "scri_plus" else -np.pi
    cfg = EvolutionConfig(t_end=t_end, t0=d0.stamp, nonlinearity="cubic_defocusing" if cubic else "linear")
    hist = evolve(g, d0, cfg)
    n = d0.grid.n - 1
    tr = restrict_to_surface(hist, _surface(kind), grid or scri_grid(n))
    return RadiationProfile.from_characteristic(tr)


def trace_forward(d0: CauchyData, cubic=True, grid=None) -> RadiationProfile:
    """Radiation field on scri^+ of the solution with data d0 on Sigma_0."""
    return _trace(d0, "scri_plus", cubic, grid)


def trace_backward(d0: CauchyData, cubic=True, grid=None) -> RadiationProfile:
    """Radiation field on scri^- of the solution with data d0 on Sigma_0."""
    return _trace(d0, "scri_minus", cubic, grid)


def linear_trace_operator(d0: CauchyData, grid=None) -> RadiationProfile:
    """The trace to scri^+ for the linear equation."""
    return trace_forward(d0, cubic=False, grid=grid)


# -- inverse trace --------------------------------------------------------------

@dataclass
class InverseTrace:
    data: CauchyData
    hoermander: object
    glued: bool
    glue_gap: float


def inverse_trace_run(
    theta: RadiationProfile,
    cubic=True,
    sched: Optional[LambdaSchedule] = None,
    use_glue=True,
    band=GLUE_BAND,
    tol_glue_rel=TOL_GLUE_REL,
) -> InverseTrace:
    """Sigma_0 data whose trace is ``theta``, with the intermediate records."""
    kind = theta.surface_kind
    vals = theta.values if kind == "scri_plus" else theta.values[::-1]
    plus = CharacteristicData(scri_plus(), theta.grid, vals)
    g = _metric()
    cfg = EvolutionConfig(t_end=0.0, nonlinearity="cubic_defocusing" if cubic else "linear")
    run = solve_hoermander(g, plus.surface, plus, sched, cfg, check_trace=False)
    data = run.extrapolated
    gap = 0.0
    glued = False
    if use_glue and np.any(vals != 0):
        patch = characteristic_patch(plus, band[0], cubic)
        scale = float(np.sqrt(data.grid.spacing * np.sum(data.position.values**2 + data.velocity.values**2)))
        piece = PatchPiece(data, 0.0, band[1], "slowdown")
        hist = glue(piece, patch, 0.0, target=None, g=g, tol_glue=tol_glue_rel * scale, band=band)
        data = hist.frame(0)
        glued = True
        dp = patch.data.position.values - run.extrapolated.position.values
        dv = patch.data.velocity.values - run.extrapolated.velocity.values
        chi = data.grid.nodes
        m = (chi >= band[0]) & (chi <= band[1])
        gap = float(np.sqrt(data.grid.spacing * np.sum(dp[m] ** 2 + dv[m] ** 2)))
    if kind == "scri_minus":
        data = data.time_reflected()
    return InverseTrace(data, run, glued, gap)


def inverse_trace(theta: RadiationProfile, cubic=True, sched=None, use_glue=True) -> CauchyData:
    """Solve the characteristic problem from scri^+ (or scri^-) down to Sigma_0.

    The cone datum is completed by ``T(phi) = 0``; the slowdown schedule is
    extrapolated to ``lam = 1`` and, near i0, replaced by the characteristic
    lattice across :data:`GLUE_BAND`.
    """
    return inverse_trace_run(theta, cubic, sched, use_glue).data


def round_trip_error(theta: RadiationProfile, cubic=True, sched=None, use_glue=True) -> float:
    """Relative H1 distance between theta and the trace of its inverse trace."""
    d = inverse_trace(theta, cubic, sched, use_glue)
    back = _trace(d, theta.surface_kind, cubic, theta.grid)
    if theta.h1_norm == 0:
        return 0.0 if back.h1_norm == 0 else np.inf
    return (back - theta).h1_norm / theta.h1_norm


# -- scattering map ---------------------------------------------------------------

@dataclass
class ScatteringReport:
    input: RadiationProfile
    output: RadiationProfile
    norms: dict
    linear_reference_deviation: float
    nonlinear_deviation: Optional[float]
    metadata: dict

    @property
    def amplitude(self):
        return float(np.max(np.abs(self.input.values)))


def scattering_operator(theta_minus: RadiationProfile, cubic=True, sched=None) -> RadiationProfile:
    """S = T^+ o (T^-)^{-1}, output on scri^+."""
    if theta_minus.surface_kind != "scri_minus":
        raise ValueError("the scattering map takes a profile on scri^-")
    d = inverse_trace(theta_minus, cubic, sched)
    return trace_forward(d, cubic, theta_minus.grid)


def _rel_l2(a: RadiationProfile, b_values, ref: RadiationProfile):
    m = _surface(a.surface_kind).contracted_measure(a.grid.nodes)
    num = np.sqrt(trapezoid((a.values - b_values) ** 2 * m, a.grid.nodes))
    den = ref.l2_norm()
    return float(num / den) if den > 0 else 0.0


def scattering_map(
    theta_minus: RadiationProfile, cubic=True, sched=None, with_linear=True, with_round_trip=False
) -> ScatteringReport:
    """Scatter a scri^- profile and compare with the linear reference ``-theta``.

    ``linear_reference_deviation`` is ``||S(theta) + theta|| / ||theta||`` in
    the scri L2 norm. With ``with_linear`` the same pipeline is also run
    for the linear equation and ``nonlinear_deviation`` reports
    ``||S(theta) - S_lin(theta)|| / ||theta||``, which removes the common
    discretisation error and isolates the cubic contribution.
    """
    t0 = time.perf_counter()
    sched = sched or LambdaSchedule.geometric()
    inv = inverse_trace_run(theta_minus, cubic, sched)
    out = trace_forward(inv.data, cubic, theta_minus.grid)
    meta = {"h": theta_minus.grid.spacing, "lambda_max": sched.values[-1], "glue_gap": inv.glue_gap}
    if with_round_trip:
        back = trace_backward(inv.data, cubic, theta_minus.grid)
        meta["rt_error"] = (back - theta_minus).h1_norm / theta_minus.h1_norm if theta_minus.h1_norm else 0.0
    lin_dev = _rel_l2(out, -theta_minus.values, theta_minus)
    nl_dev = None
    if with_linear and cubic:
        lin = scattering_operator(theta_minus, False, sched)
        nl_dev = _rel_l2(out, lin.values, theta_minus)
    meta["runtime"] = time.perf_counter() - t0
    norms = {"input_h1": theta_minus.h1_norm, "output_h1": out.h1_norm, "input_l2": theta_minus.l2_norm()}
    return ScatteringReport(theta_minus, out, norms, lin_dev, nl_dev, meta)


def fit_loglog_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -- sampling -------------------------------------------------------------------

def thread_count():
    raw = os.environ.get("CONFSCAT_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("CONFSCAT_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def random_profile(rng, center: RadiationProfile, radius, n_modes=4, width=0.9):
    """A band-limited bump inside the H1 ball of the given radius around ``center``."""
    s = center.grid.nodes
    env = bump(s, 0.0, width)
    c = rng.uniform(-1.0, 1.0, n_modes)
    shape = env * sum(ck * np.cos(k * np.pi * s / (2 * width)) for k, ck in enumerate(c))
    shape[0] = shape[-1] = 0.0
    p = center.with_values(shape)
    if p.h1_norm == 0:
        return center
    r = radius * rng.uniform(0.05, 1.0)
    return center + p.scaled(r / p.h1_norm)


def lipschitz_sample(
    op: Callable, center: RadiationProfile, radius, n_pairs, seed, n_bins=10, workers=None
) -> dict:
    """Ratios ``||op(a) - op(b)|| / ||a - b||`` (H1) over seeded random pairs."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    if n_pairs < 2:
        raise ValueError("need at least two pairs")
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < n_pairs:
        a = random_profile(rng, center, radius)
        b = random_profile(rng, center, radius)
        if (a - b).h1_norm == 0:
            continue  # degenerate pair, draw again
        pairs.append((a, b))

    def one(pair):
        a, b = pair
        return (op(a) - op(b)).h1_norm / (a - b).h1_norm

    n_workers = workers or thread_count()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            ratios = np.array(list(pool.map(one, pairs)))
    else:
        ratios = np.array([one(p) for p in pairs])
    hist, edges = np.histogram(ratios, bins=n_bins)
    return {
        "min": float(ratios.min()),
        "max": float(ratios.max()),
        "mean": float(ratios.mean()),
        "ratios": ratios,
        "histogram": hist,
        "edges": edges,
    }


def linear_trace_bicontinuity(n_cells=200, n_samples=8, seed=0, radius=1.0) -> dict:
    """Sampled operator and inverse norms of the linear trace (energy to cone H1)."""
    from .characteristic import sigma0_energy

    rng = np.random.default_rng(seed)
    grid = Grid1D.uniform("chi", 0.0, np.pi, n_cells, ("dirichlet_zero", "dirichlet_zero"))
    chi = grid.nodes
    fwd, inv = [], []
    for _ in range(n_samples):
        c = rng.uniform(-1, 1, (2, 4))
        pos = sum(c[0, k] * np.sin((k + 1) * chi) for k in range(4)) * radius
        vel = sum(c[1, k] * np.sin((k + 1) * chi) for k in range(4)) * radius
        d = CauchyData.from_arrays(grid, pos, vel)
        tr = linear_trace_operator(d)
        e = np.sqrt(sigma0_energy(d))
        fwd.append(tr.h1_norm / e)
        inv.append(e / tr.h1_norm)
    return {"norm": max(fwd), "inverse_norm": max(inv), "product": max(fwd) * max(inv)}


def write_scattering_report(rows, path):
    """rows: mappings with the :data:`REPORT_COLUMNS` keys."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], str) else repr(r[c]) for c in REPORT_COLUMNS])
