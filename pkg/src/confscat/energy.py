"""Energy functionals and the audits built on them.

Slice energies on the cylinder are written for reduced data
``psi = sin(chi) phi``: the quadratic part ``1/2 int (psi_t^2 + psi_chi^2)``
equals ``1/2 int (phi_t^2 + phi_chi^2 + phi^2) sin^2``, i.e. the conformal
mass term comes for free. Patch energies on H_s are quoted per unit solid
angle. Fitted constants are reported, never asserted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .fields import (
    FOUR_PI,
    CauchyData,
    CharacteristicData,
    CoverageError,
    GridError,
    ScalarFieldGrid,
    areal_arrays,
    cone_h1_norm,
    derivative_values,
    restrict_to_surface,
    unreduce,
)
from .geometry import Foliation, hs_leaf_R

FORMS = ("linear", "with_quartic")
ENERGY_AUDIT_COLUMNS = ("audit", "parameter", "value", "fitted_constant", "resolution")


# -- stress-energy ------------------------------------------------------------------

@dataclass
class StressEnergyEval:
    """T_ab = d_a phi d_b phi - g_ab (1/2 |d phi|^2 + phi^2/2 [+ phi^4/4]) on a history.

    In the signature used here (-+++) the contraction with a future timelike
    unit vector is nonnegative.
    """

    metric: object
    field_frames: object
    form: str = "with_quartic"

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")

    def _fields(self):
        h = self.field_frames
        grid = h.grid
        phi = unreduce(h.positions, grid, h.metric)
        phit = unreduce(h.velocities, grid, h.metric)
        phix = derivative_values(phi, grid.spacing, 1, ("parity_even", "parity_even"))
        return phi, phit, phix

    def contraction(self, X):
        """T(X, X) on every node of every frame for the chart vector X = (X^t, X^x)."""
        phi, pt, px = self._fields()
        a, b = float(X[0]), float(X[1])
        # g = diag(-1, 1) on the (t, x) block of an ultrastatic chart
        norm = -a * a + b * b
        grad2 = -pt**2 + px**2
        pot = 0.5 * phi**2 + (0.25 * phi**4 if self.form == "with_quartic" else 0.0)
        return (a * pt + b * px) ** 2 - norm * (0.5 * grad2 + pot)

    def min_contraction(self, n_vectors=16, seed=0):
        """Smallest T(X, X) over random unit future timelike X."""
        rng = np.random.default_rng(seed)
        worst = np.inf
        for v in np.tanh(rng.normal(size=n_vectors)) * 0.99:
            X = np.array([1.0, v]) / np.sqrt(1 - v * v)
            worst = min(worst, float(np.min(self.contraction(X))))
        return worst


# -- slice energies -----------------------------------------------------------------

@dataclass
class EnergyCurve:
    parameter: np.ndarray
    values: np.ndarray
    kinetic: np.ndarray
    gradient: np.ndarray
    mass: np.ndarray
    quartic: np.ndarray

    def __post_init__(self):
        for name in ("parameter", "values", "kinetic", "gradient", "mass", "quartic"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("kinetic", "gradient", "mass", "quartic"):
            if np.any(getattr(self, name) < -1e-14 * (1 + np.max(np.abs(self.values)))):
                raise ValueError(f"negative {name} component")

    @classmethod
    def from_values(cls, t, e):
        z = np.zeros_like(np.asarray(e, float))
        return cls(np.asarray(t, float), np.asarray(e, float), z, np.asarray(e, float), z, z)


def reduced_energy_parts(psi, vel, grid, metric):
    """Kinetic, gradient, mass and quartic parts of the slice energy, with 4 pi."""
    x = grid.nodes
    A = areal_arrays(metric, x)[0]
    phi = unreduce(psi, grid, metric)
    phit = unreduce(vel, grid, metric)
    phix = derivative_values(phi, grid.spacing, 1, ("parity_even", "parity_even"))
    w = FOUR_PI * A**2
    kin = 0.5 * trapezoid(phit**2 * w, x, axis=-1)
    grad = 0.5 * trapezoid(phix**2 * w, x, axis=-1)
    mass = 0.5 * trapezoid(phi**2 * w, x, axis=-1)
    quart = 0.25 * trapezoid(phi**4 * w, x, axis=-1)
    return kin, grad, mass, quart


def slice_energy_curve(hist, fol: Optional[Foliation] = None, form="with_quartic") -> EnergyCurve:
    """Per-frame slice energies of a reduced history with their breakdown."""
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    t = np.asarray(hist.stamps, dtype=float)
    if fol is not None:
        lo, hi = fol.interval
        tmin, tmax = float(np.min(t)), float(np.max(t))
        if lo < tmin - 1e-9 or hi > tmax + 1e-9:
            raise CoverageError(f"history spans [{tmin}, {tmax}], foliation needs [{lo}, {hi}]")
        if fol.leaf_coordinate != hist.grid.coord_name:
            raise GridError("foliation and history use different leaf coordinates")
    kin, grad, mass, quart = reduced_energy_parts(hist.positions, hist.velocities, hist.grid, hist.metric)
    if form == "linear":
        quart = np.zeros_like(quart)
    return EnergyCurve(t, kin + grad + mass + quart, kin, grad, mass, quart)


def cauchy_energy(d: CauchyData, metric, form="with_quartic") -> float:
    kin, grad, mass, quart = reduced_energy_parts(d.position.values, d.velocity.values, d.grid, metric)
    return float(kin + grad + mass + (quart if form == "with_quartic" else 0.0))


# -- cone energies ------------------------------------------------------------------

def cone_energy(d: CharacteristicData, quartic=True) -> float:
    """Cone H1 norm squared plus half the L4^4 integral against the cone measure."""
    e = cone_h1_norm(d) ** 2
    if quartic:
        e += 0.5 * float(trapezoid(d.values**4 * d.surface.contracted_measure(d.grid.nodes), d.grid.nodes))
    return e


def cone_vs_slice_equivalence(hist, cone, fol: Optional[Foliation] = None, grid=None):
    """min and max over frames of E(Sigma_tau) / E(cone).

    Both energies are taken in the doubled normalisation
    ``||phi||_H1^2 + ||phi_t||^2 + 1/2 ||phi||_4^4``, which matches the
    cone functional :func:`cone_energy`. Histories of the linear equation
    drop the quartic terms on both sides.
    """
    cfg = getattr(hist, "config", None)
    linear = getattr(cfg, "nonlinearity", None) == "linear"
    curve = slice_energy_curve(hist, fol, form="linear" if linear else "with_quartic")
    trace = restrict_to_surface(hist, cone, grid)
    ce = cone_energy(trace, quartic=not linear)
    if ce == 0.0 or np.all(curve.values == 0.0):
        raise ZeroDivisionError("zero solution: equivalence ratio undefined")
    ratios = 2 * curve.values / ce
    return float(np.min(ratios)), float(np.max(ratios))


# -- patch energies -----------------------------------------------------------------

def _leaf_sample(patch, s, m):
    u = patch.u
    Rs = hs_leaf_R(u, s, m)
    R = patch.R
    if np.max(Rs) > R[-1] * (1 + 1e-12):
        raise CoverageError(f"leaf s={s} leaves the patch (R up to {np.max(Rs):.3e} > {R[-1]:.3e})")
    du, dR = patch.derivatives()
    hR = R[1] - R[0]
    pos = np.clip(Rs / hR, 0, R.size - 1 - 1e-12)
    k = np.floor(pos).astype(int)
    a = pos - k
    rows = np.arange(u.size)

    def at(f):
        return (1 - a) * f[rows, k] + a * f[rows, np.minimum(k + 1, R.size - 1)]

    return u, Rs, at(patch.values), at(du), at(dR)


def hs_energy(patch_solution, s, m, u0) -> dict:
    """Energy of a patch solution on the leaf H_s, per unit solid angle.

    Integrand ``u^2 phi_u^2 + (R/|u|) phi_R^2 + phi^2/2 + phi^4/4`` in ``du``;
    the angular gradient vanishes for zonal fields. ``|u|`` is floored at
    ``|u0| 1e-12``.
    """
    if not 0.0 <= s <= 1.0:
        raise CoverageError(f"s={s} outside [0, 1]")
    u, R, phi, pu, pR = _leaf_sample(patch_solution, s, m)
    order = np.argsort(u)
    u, R, phi, pu, pR = (x[order] for x in (u, R, phi, pu, pR))
    au = np.maximum(np.abs(u), abs(u0) * 1e-12)
    parts = {
        "u_term": float(trapezoid(u**2 * pu**2, u)),
        "R_term": float(trapezoid(R / au * pR**2, u)),
        "mass": float(trapezoid(0.5 * phi**2, u)),
        "quartic": float(trapezoid(0.25 * phi**4, u)),
    }
    parts["total"] = sum(parts.values())
    return parts


def scri_energy(theta: CharacteristicData) -> dict:
    """Data energy on scri_{u0}: the s = 0 integrand in u (per unit solid angle)."""
    u = theta.grid.nodes
    order = np.argsort(u)
    u, th = u[order], theta.values[order]
    du = np.gradient(th, u, edge_order=2)
    lin = float(trapezoid(u**2 * du**2 + 0.5 * th**2, u))
    q = float(trapezoid(th**4, u))
    return {"linear": lin, "L4^4": q, "total": lin + 0.25 * q}


def s_u0_energy(theta_s: CharacteristicData, m, u0) -> dict:
    """Flux of the linear stress-energy through S_{u0} against the Morawetz field.

    On ``u = u0`` with generator ``d_R`` the contraction is
    ``-u0^2 (F phi_R^2/2 + phi^2/2) - 2 (1 + u0 R) phi_R^2``; each term is
    counted with its modulus so the flux is a norm.
    """
    R = theta_s.grid.nodes
    th = theta_s.values
    F = R**2 * (1 - 2 * m * R)
    pR = np.gradient(th, R, edge_order=2)
    lin = float(trapezoid(u0**2 * (0.5 * F * pR**2 + 0.5 * th**2) + 2 * np.abs(1 + u0 * R) * pR**2, R))
    q = float(trapezoid(th**4, R))
    return {"linear": lin, "L4^4": q, "total": lin + 0.25 * q}


def a_priori_audit(run, theta_scri, theta_s) -> dict:
    """Two-sided comparison of data energies with sup_s E(H_s) for a Picard run."""
    if not run.iterates:
        raise ValueError("run holds no iterate")
    final = run.iterates[-1]
    m, u0 = final.m, final.u0
    data = scri_energy(theta_scri)["total"] + s_u0_energy(theta_s, m, u0)["total"]
    leaf = [hs_energy(final, s, m, u0)["total"] for s in run.leaves]
    top = max(leaf)
    if data == 0 or top == 0:
        return {"data": data, "leaf_sup": top, "c_low": 0.0, "c_high": 0.0}
    return {"data": data, "leaf_sup": top, "c_low": min(leaf) / data, "c_high": top / data}


# -- difference machinery -------------------------------------------------------------

def difference_envelope(u_frame, v_frame):
    """Pointwise ``u^2 + u v + v^2`` (= (u + v/2)^2 + 3 v^2 / 4 >= 0)."""
    if isinstance(u_frame, ScalarFieldGrid):
        if not isinstance(v_frame, ScalarFieldGrid) or not u_frame.grid.same_as(v_frame.grid):
            raise GridError("frames on different grids")
        u, v = u_frame.values, v_frame.values
        return ScalarFieldGrid(u_frame.grid, (u + 0.5 * v) ** 2 + 0.75 * v * v, u_frame.stamp)
    u = np.asarray(u_frame, dtype=float)
    v = np.asarray(v_frame, dtype=float)
    if u.shape != v.shape:
        raise GridError("frames of different shapes")
    return (u + 0.5 * v) ** 2 + 0.75 * v * v


def groenwall_audit(curve: EnergyCurve, source_curve: Optional[EnergyCurve] = None, max_points=1500) -> float:
    """Smallest C with ``|E(t) - E(s)| <= C int_s^t (E + source)`` on all grid pairs."""
    t = curve.parameter
    e = curve.values
    src = np.zeros_like(e) if source_curve is None else source_curve.values
    if source_curve is not None and not np.allclose(source_curve.parameter, t):
        raise GridError("curves on different parameter grids")
    order = np.argsort(t)
    t, e, src = t[order], e[order], src[order]
    integral = cumulative_trapezoid(np.abs(e) + np.abs(src), t, initial=0.0)
    if t.size > max_points:
        pick = np.unique(np.linspace(0, t.size - 1, max_points).round().astype(int))
        t, e, integral = t[pick], e[pick], integral[pick]
    de = np.abs(e[:, None] - e[None, :])
    di = np.abs(integral[:, None] - integral[None, :])
    ok = di > 0
    if not np.any(ok):
        return 0.0
    c = np.max(np.where(ok, de / np.where(ok, di, 1.0), 0.0))
    return float(c)


def lipschitz_difference_audit(u_hist, v_hist, cone, grid=None) -> dict:
    """Constants in both directions of the slice/cone difference inequality.

    ``forward = max_T S(T) / D`` and ``inverse = max_T D / S(T)`` with
    ``S`` the slice difference energy and ``D`` the cone H1 distance
    squared; ``forward * inverse >= 1`` always.
    """
    if not u_hist.grid.same_as(v_hist.grid) or not np.allclose(u_hist.stamps, v_hist.stamps):
        raise GridError("histories on different grids")
    dpos = u_hist.positions - v_hist.positions
    dvel = u_hist.velocities - v_hist.velocities
    kin, grad, mass, _ = reduced_energy_parts(dpos, dvel, u_hist.grid, u_hist.metric)
    S = 2 * (kin + grad + mass)
    tu = restrict_to_surface(u_hist, cone, grid)
    tv = restrict_to_surface(v_hist, cone, grid)
    D = cone_h1_norm(CharacteristicData(tu.surface, tu.grid, tu.values - tv.values)) ** 2
    if D == 0.0 and np.all(S == 0.0):
        return {"forward": 0.0, "inverse": 0.0, "slice": S, "cone": D, "product": 0.0}
    fwd = float(np.max(S) / D) if D > 0 else np.inf
    inv = float(D / np.min(S)) if np.min(S) > 0 else np.inf
    return {"forward": fwd, "inverse": inv, "slice": S, "cone": D, "product": fwd * inv}


def energy_continuity_probe(hist, form="with_quartic", max_points=1500) -> dict:
    """Largest difference quotient of the slice energy and its ratio to sup E."""
    curve = slice_energy_curve(hist, form=form)
    t, e = curve.parameter, curve.values
    if t.size > max_points:
        pick = np.unique(np.linspace(0, t.size - 1, max_points).round().astype(int))
        t, e = t[pick], e[pick]
    dt = np.abs(t[:, None] - t[None, :])
    de = np.abs(e[:, None] - e[None, :])
    ok = dt > 0
    mod = float(np.max(np.where(ok, de / np.where(ok, dt, 1.0), 0.0))) if np.any(ok) else 0.0
    sup = float(np.max(np.abs(e))) if e.size else 0.0
    return {"modulus": mod, "sup_energy": sup, "fitted_C": mod / sup if sup > 0 else 0.0}


# -- reporting ----------------------------------------------------------------------

def write_energy_audit(rows, path):
    """rows: iterable of (audit, parameter, value, fitted_constant, resolution)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ENERGY_AUDIT_COLUMNS)
        for r in rows:
            w.writerow([r[0]] + [x if isinstance(x, str) else repr(x) for x in r[1:]])
