"""Charts, model metrics and closed-form coordinate maps.

Every metric in this module uses the (-+++) signature. The active block is
the 2x2 metric on the two non-angular coordinates; the suppressed angular
part is ``areal**2`` times the unit round metric on the 2-sphere.

Two model geometries are provided:

* the Einstein cylinder ``-dT^2 + dchi^2 + sin^2(chi) dOmega^2`` together
  with the Penrose compactification of Minkowski space onto it, and
* the conformally rescaled Schwarzschild patch near spacelike infinity in
  retarded coordinates ``(u, R = 1/r)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import wrightomega

SIGNATURE = "-+++"

#: relative half-width of the central stencils used by :func:`scalar_curvature`
CURVATURE_STEP = 1e-4

#: band around zero inside which :func:`causal_type` reports ``"null"``
NULL_TOLERANCE = 1e-10


class DomainError(ValueError):
    """A point lies outside the region where a map or metric is defined."""


class ParameterError(ValueError):
    """A model parameter is outside its admissible range."""


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple
    ranges: tuple
    reduction: str = "spherical"

    def __post_init__(self):
        if len(self.coords) != 2 or len(self.ranges) != 2:
            raise ValueError("charts carry exactly two active coordinates")
        for lo, hi in self.ranges:
            if not hi > lo:
                raise ValueError(f"degenerate range ({lo}, {hi}) in chart {self.name}")

    def contains(self, x, pad=0.0):
        return all(lo - pad <= xi <= hi + pad for xi, (lo, hi) in zip(x, self.ranges))


@dataclass(frozen=True)
class ModelMetric:
    """Evaluator bundle for a spherically symmetric model metric.

    ``component_eval(x)`` returns ``(block, areal)``. ``areal_derivs(x1)``
    returns ``(A, A', A'')`` in the spatial coordinate for ultrastatic charts
    and is what the reduced evolution uses. ``lapse_eval`` and
    ``spatial_eval`` are ``None`` on charts without a declared time function.
    ``slowdown`` records the factor applied by :func:`slow_metric`.
    """

    chart: Chart
    component_eval: Callable
    lapse_eval: Optional[Callable] = None
    spatial_eval: Optional[Callable] = None
    scal_eval: Optional[Callable] = None
    areal_derivs: Optional[Callable] = None
    convention: str = SIGNATURE
    slowdown: float = 1.0
    name: str = ""

    def block(self, x):
        return np.asarray(self.component_eval(x)[0], dtype=float)

    def areal(self, x):
        return float(self.component_eval(x)[1])

    def dot(self, x, v, w=None):
        w = v if w is None else w
        return float(np.asarray(v) @ self.block(x) @ np.asarray(w))

    @property
    def ultrastatic(self):
        return self.areal_derivs is not None and self.lapse_eval is not None


@dataclass(frozen=True)
class ConformalPair:
    """Physical metric, rescaled metric and the map between their charts.

    ``jacobian(x_phys)`` is the matrix d(rescaled coords)/d(physical coords).
    """

    physical: ModelMetric
    rescaled: ModelMetric
    omega_eval: Callable
    coordinate_map: Callable
    inverse_map: Callable
    jacobian: Callable
    params: dict = field(default_factory=dict)

    def transported_physical(self, x_phys):
        """Physical block and areal factor expressed in rescaled coordinates."""
        block, areal = self.physical.component_eval(x_phys)
        jinv = np.linalg.inv(self.jacobian(x_phys))
        return jinv.T @ np.asarray(block) @ jinv, areal

    def mismatch(self, x_phys):
        """Max componentwise |g - Omega^2 ghat| at one matched point."""
        om = self.omega_eval(x_phys)
        gh, ah = self.transported_physical(x_phys)
        g, a = self.rescaled.component_eval(self.coordinate_map(x_phys))
        return max(np.max(np.abs(np.asarray(g) - om**2 * gh)), abs(a**2 - om**2 * ah**2))


@dataclass(frozen=True)
class Foliation:
    """A one-parameter family of spacelike leaves in a chart.

    ``leaf_eval(p)`` returns a callable mapping an array of leaf coordinates
    to chart points of shape ``(n, 2)``. ``normal_eval(p, x)`` returns the
    future unit normal and ``volume_eval(p, q)`` the induced volume density
    (sphere included) with respect to the leaf coordinate ``q``.
    """

    parameter: str
    interval: tuple
    leaf_eval: Callable
    normal_eval: Callable
    volume_eval: Callable
    leaf_coordinate: str
    metric: ModelMetric
    aux: dict = field(default_factory=dict)

    def check(self, p):
        lo, hi = self.interval
        if not lo - 1e-14 <= p <= hi + 1e-14:
            raise ParameterError(f"{self.parameter}={p} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class NullSurface:
    kind: str
    parameter: str
    interval: tuple
    locus_eval: Callable
    generator_eval: Callable
    transversal_eval: Optional[Callable]
    metric: ModelMetric
    vertex: Optional[tuple] = None

    def contracted_measure(self, p):
        """Density of ``n ⌟ dmu[g]`` pulled back to the surface parameter."""
        if self.transversal_eval is None:
            raise ValueError(f"surface {self.kind} carries no transversal vector")
        p = np.atleast_1d(np.asarray(p, dtype=float))
        out = np.empty_like(p)
        for i, pi in enumerate(p):
            x = self.locus_eval(pi)
            block, areal = self.metric.component_eval(x)
            n = self.transversal_eval(pi)
            dx = self.tangent(pi)
            vol = np.sqrt(abs(np.linalg.det(block))) * areal**2
            out[i] = 4 * np.pi * vol * abs(n[0] * dx[1] - n[1] * dx[0])
        return out

    def tangent(self, p, eps=1e-6):
        xp = np.asarray(self.locus_eval(p + eps))
        xm = np.asarray(self.locus_eval(p - eps))
        return (xp - xm) / (2 * eps)

    def generator_scale(self, p):
        """Factor c with generator = c * d(locus)/d(parameter)."""
        l = np.asarray(self.generator_eval(p), dtype=float)
        dx = self.tangent(p)
        return float(l @ dx / (dx @ dx))


# -- model metrics -------------------------------------------------------------

def _ultrastatic(chart, areal_derivs, name, scal_eval=None):
    def component_eval(x):
        return np.diag([-1.0, 1.0]), areal_derivs(x[1])[0]

    metric = ModelMetric(
        chart=chart,
        component_eval=component_eval,
        lapse_eval=lambda x: 1.0,
        spatial_eval=lambda x: np.array([[1.0]]),
        areal_derivs=areal_derivs,
        name=name,
    )
    if scal_eval is None:
        scal_eval = lambda x: scalar_curvature(metric, x)  # noqa: E731
    return ModelMetric(**{**metric.__dict__, "scal_eval": scal_eval})


def einstein_cylinder_metric(T_range=(0.0, np.pi)):
    """The reduced metric ``-dT^2 + dchi^2`` with areal factor ``sin(chi)``."""
    chart = Chart("cylinder", ("T", "chi"), (tuple(T_range), (0.0, np.pi)))
    return _ultrastatic(
        chart,
        lambda c: (np.sin(c), np.cos(c), -np.sin(c)),
        "einstein_cylinder",
    )


def minkowski_metric(r_max=50.0, t_range=(-50.0, 50.0)):
    chart = Chart("minkowski", ("t", "r"), (tuple(t_range), (0.0, r_max)))
    return _ultrastatic(
        chart,
        lambda r: (r, np.ones_like(r) if np.ndim(r) else 1.0, np.zeros_like(r) if np.ndim(r) else 0.0),
        "minkowski",
    )


def cylinder_to_minkowski(x):
    T, chi = x
    a, b = np.tan((T + chi) / 2), np.tan((T - chi) / 2)
    return np.array([(a + b) / 2, (a - b) / 2])


def minkowski_compactification(r_max=50.0):
    """Penrose map of Minkowski space into the Einstein cylinder."""
    phys = minkowski_metric(r_max=r_max)
    resc = einstein_cylinder_metric(T_range=(-np.pi, np.pi))

    def fwd(x):
        t, r = x
        if r < 0:
            raise DomainError("r must be non-negative")
        p, q = np.arctan(t + r), np.arctan(t - r)
        return np.array([p + q, p - q])

    def omega(x):
        t, r = x
        if r < 0:
            raise DomainError("r must be non-negative")
        return 2 * np.cos(np.arctan(t - r)) * np.cos(np.arctan(t + r))

    def jac(x):
        t, r = x
        a, b = 1 / (1 + (t + r) ** 2), 1 / (1 + (t - r) ** 2)
        return np.array([[a + b, a - b], [a - b, a + b]])

    return ConformalPair(phys, resc, omega, fwd, cylinder_to_minkowski, jac, {"m": 0.0})


# -- Schwarzschild near spacelike infinity --------------------------------------

def tortoise(r, m):
    """Tortoise coordinate with dr*/dr = (1 - 2m/r)^-1 and r*(4m) = 4m."""
    r = np.asarray(r, dtype=float)
    if m < 0:
        raise ParameterError("mass must be non-negative")
    if m == 0:
        return r + 0.0
    if np.any(r <= 2 * m):
        raise DomainError("tortoise coordinate needs r > 2m")
    out = r + 2 * m * np.log(r / (2 * m) - 1)
    return out if out.ndim else float(out)


def inverse_tortoise(rstar, m):
    """Areal radius r > 2m with tortoise(r, m) == rstar."""
    rstar = np.asarray(rstar, dtype=float)
    if m == 0:
        return rstar + 0.0
    # r/2m - 1 = x solves x + log x = r*/2m - 1
    x = np.real(wrightomega(rstar / (2 * m) - 1))
    out = 2 * m * (1 + x)
    return out if out.ndim else float(out)


def schwarzschild_rescaled_pair(m, u0=-100.0):
    """Schwarzschild in (u, r) and its rescaling by Omega = 1/r in (u, R).

    The rescaled metric is ``-R^2 (1 - 2mR) du^2 + 2 du dR + dOmega^2``.
    """
    if not m > 0:
        raise ParameterError("mass must be positive")
    if not u0 < 0:
        raise ParameterError("u0 must be negative")
    r_min = 2 * m
    phys_chart = Chart("schwarzschild_ur", ("u", "r"), ((-np.inf, u0), (r_min, np.inf)))
    resc_chart = Chart("schwarzschild_uR", ("u", "R"), ((-np.inf, u0), (0.0, 1 / r_min)))

    def phys_components(x):
        u, r = x
        if r <= 2 * m:
            raise DomainError("evaluation at r <= 2m")
        f = 1 - 2 * m / r
        return np.array([[-f, -1.0], [-1.0, 0.0]]), r

    def resc_components(x):
        u, R = x
        if R * 2 * m >= 1:
            raise DomainError("evaluation at r <= 2m")
        return np.array([[-(R**2) * (1 - 2 * m * R), 1.0], [1.0, 0.0]]), 1.0

    physical = ModelMetric(phys_chart, phys_components, name="schwarzschild")
    physical = ModelMetric(**{**physical.__dict__, "scal_eval": lambda x: scalar_curvature(physical, x)})
    rescaled = ModelMetric(resc_chart, resc_components, name="schwarzschild_rescaled")
    rescaled = ModelMetric(**{**rescaled.__dict__, "scal_eval": lambda x: scalar_curvature(rescaled, x)})

    def fwd(x):
        u, r = x
        if r <= 2 * m:
            raise DomainError("evaluation at r <= 2m")
        return np.array([u, 1.0 / r])

    def inv(y):
        u, R = y
        return np.array([u, 1.0 / R])

    def omega(x):
        if x[1] <= 2 * m:
            raise DomainError("evaluation at r <= 2m")
        return 1.0 / x[1]

    def jac(x):
        return np.array([[1.0, 0.0], [0.0, -1.0 / x[1] ** 2]])

    return ConformalPair(physical, rescaled, omega, fwd, inv, jac, {"m": m, "u0": u0})


# -- slowdown and causal structure ---------------------------------------------

def slow_metric(g, lam):
    """Scale the time-time component by lam^2, keeping the spatial part."""
    if not 0.5 <= lam <= 1.0:
        raise ParameterError(f"slowdown factor {lam} outside [1/2, 1]")
    if g.lapse_eval is None:
        raise ParameterError("metric has no lapse/spatial split")
    if lam == 1.0:
        return g

    def component_eval(x):
        block, areal = g.component_eval(x)
        block = np.array(block, dtype=float)
        block[0, 0] *= lam**2
        return block, areal

    slowed = ModelMetric(
        chart=g.chart,
        component_eval=component_eval,
        lapse_eval=g.lapse_eval,
        spatial_eval=g.spatial_eval,
        areal_derivs=g.areal_derivs,
        convention=g.convention,
        slowdown=g.slowdown * lam,
        name=f"{g.name}_slowed",
    )
    return ModelMetric(**{**slowed.__dict__, "scal_eval": lambda x: scalar_curvature(slowed, x)})


def causal_type(g, x, v, tol=NULL_TOLERANCE):
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("zero vector has no causal type")
    q = g.dot(x, v)
    scale = max(1.0, float(v @ v))
    if abs(q) <= tol * scale:
        return "null"
    return "timelike" if q < 0 else "spacelike"


# -- foliations and null surfaces ----------------------------------------------

def cylinder_foliation(g=None, interval=(0.0, np.pi)):
    """Constant-T slices of the Einstein cylinder (full 3-spheres)."""
    g = g or einstein_cylinder_metric()

    def leaf(T):
        return lambda chi: np.column_stack([np.full_like(np.asarray(chi, float), T), chi])

    return Foliation(
        parameter="T",
        interval=tuple(interval),
        leaf_eval=leaf,
        normal_eval=lambda T, x: np.array([1.0 / g.lapse_eval(x), 0.0]),
        volume_eval=lambda T, chi: 4 * np.pi * np.sin(chi) ** 2,
        leaf_coordinate="chi",
        metric=g,
    )


def scri_plus(g=None):
    """Future null infinity chi = pi - T as the past cone of i+.

    The parameter ``s`` lies in (-pi/2, pi/2) and relates to the Minkowski
    retarded time by ``u = tan(s)``.
    """
    g = g or einstein_cylinder_metric(T_range=(-np.pi, np.pi))
    return NullSurface(
        kind="scri_plus",
        parameter="s",
        interval=(-np.pi / 2, np.pi / 2),
        locus_eval=lambda s: np.array([s + np.pi / 2, np.pi / 2 - s]),
        generator_eval=lambda s: np.array([1.0, -1.0]),
        transversal_eval=lambda s: np.array([1.0, 1.0]),
        metric=g,
        vertex=(np.pi, 0.0),
    )


def scri_minus(g=None):
    """Past null infinity chi = pi + T, parameter ``s`` with ``v = tan(s)``."""
    g = g or einstein_cylinder_metric(T_range=(-np.pi, np.pi))
    return NullSurface(
        kind="scri_minus",
        parameter="s",
        interval=(-np.pi / 2, np.pi / 2),
        locus_eval=lambda s: np.array([s - np.pi / 2, np.pi / 2 + s]),
        generator_eval=lambda s: np.array([1.0, 1.0]),
        transversal_eval=lambda s: np.array([1.0, -1.0]),
        metric=g,
        vertex=(-np.pi, 0.0),
    )


def tau_of_s(s):
    """Reparametrisation of the H_s foliation, [0, 1] -> [0, 2]."""
    return -2 * (np.sqrt(s) - 1)


def hs_leaf_R(u, s, m):
    """Inverse radius R on the leaf {u = -s r*}; R = 0 on the s = 0 leaf."""
    u = np.asarray(u, dtype=float)
    if s == 0:
        return np.zeros_like(u)
    return 1.0 / inverse_tortoise(np.abs(u) / s, m)


def hs_foliation(m, u0):
    pair = schwarzschild_rescaled_pair(m, u0)
    g = pair.rescaled

    def leaf(s):
        if not 0 <= s <= 1:
            raise ParameterError(f"s={s} outside [0, 1]")
        return lambda u: np.column_stack([u, hs_leaf_R(u, s, m)])

    def dR_du(s, u, eps=1e-6):
        return (hs_leaf_R(u + eps, s, m) - hs_leaf_R(u - eps, s, m)) / (2 * eps)

    def normal(s, x):
        u, R = x
        slope = float(dR_du(s, u))
        covector = np.array([-slope, 1.0])
        block = g.block(x)
        n = np.linalg.solve(block, covector)
        nn = n @ block @ n
        if nn >= 0:
            raise DomainError("leaf is not spacelike at this point")
        n = n / np.sqrt(-nn)
        if g.dot(x, n, morawetz_field(u, R)) > 0:
            n = -n
        return n

    def volume(s, u):
        u = np.asarray(u, dtype=float)
        R = hs_leaf_R(u, s, m)
        slope = dR_du(s, u)
        guu = -(R**2) * (1 - 2 * m * R)
        return 4 * np.pi * np.sqrt(np.maximum(guu + 2 * slope, 0.0))

    return Foliation(
        parameter="s",
        interval=(0.0, 1.0),
        leaf_eval=leaf,
        normal_eval=normal,
        volume_eval=volume,
        leaf_coordinate="u",
        metric=g,
        aux={"tau": tau_of_s, "m": m, "u0": u0},
    )


def patch_null_surfaces(m, u0):
    """The scri portion R = 0 (u <= u0) and the transverse null surface u = u0."""
    g = schwarzschild_rescaled_pair(m, u0).rescaled
    scri = NullSurface(
        kind="scri_plus",
        parameter="u",
        interval=(-np.inf, u0),
        locus_eval=lambda u: np.array([u, 0.0]),
        generator_eval=lambda u: np.array([1.0, 0.0]),
        transversal_eval=lambda u: np.array([0.0, 1.0]),
        metric=g,
    )
    s_u0 = NullSurface(
        kind="transverse_null",
        parameter="R",
        interval=(0.0, 1 / (2 * m)),
        locus_eval=lambda R: np.array([u0, R]),
        generator_eval=lambda R: np.array([0.0, 1.0]),
        transversal_eval=lambda R: np.array([1.0, 0.5 * R**2 * (1 - 2 * m * R)]),
        metric=g,
    )
    return scri, s_u0


def morawetz_field(u, R):
    """Components (u^2, -2(1 + uR)) of the vector field on the patch."""
    return np.array([u**2, -2 * (1 + u * R)])


def approximate_morawetz_field(u, R, m):
    """The field u d_u + v d_v with v = u + 2 r*, written in (u, R)."""
    r = 1.0 / R
    v = u + 2 * tortoise(r, m)
    # d_v at fixed u moves r* by 1/2: dR = -(R^2/2)(1 - 2mR) dv
    return np.array([u, 0.0]) + v * np.array([0.0, -0.5 * R**2 * (1 - 2 * m * R)])


# -- curvature -------------------------------------------------------------------

def _full_metric(g, y):
    block, areal = g.component_eval(y[:2])
    G = np.zeros((4, 4))
    G[:2, :2] = block
    G[2, 2] = areal**2
    G[3, 3] = areal**2 * np.sin(y[2]) ** 2
    return G


def _christoffel(g, y, steps):
    G = _full_metric(g, y)
    Ginv = np.linalg.inv(G)
    dG = np.empty((4, 4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = steps[k]
        dG[k] = (_full_metric(g, y + e) - _full_metric(g, y - e)) / (2 * steps[k])
    # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    lower = 0.5 * (np.einsum("bdc->dbc", dG) + np.einsum("cdb->dbc", dG) - dG)
    return np.einsum("ad,dbc->abc", Ginv, lower), Ginv


def scalar_curvature(g, x, step=CURVATURE_STEP):
    """Ricci scalar of the full 4-metric from finite-difference Christoffels.

    The angular point is fixed on the equator. Raises :class:`DomainError`
    near a pole of the areal factor or where the metric degenerates.
    """
    x = np.asarray(x, dtype=float)
    areal = g.component_eval(x)[1]
    if abs(areal) < 1e-3:
        raise DomainError("too close to a pole of the areal factor")
    if abs(np.linalg.det(g.block(x))) < 1e-12:
        raise DomainError("degenerate metric block")
    y = np.array([x[0], x[1], np.pi / 2, 0.0])
    steps = step * np.maximum(1.0, np.abs(y))
    steps[3] = step
    Gam, Ginv = _christoffel(g, y, steps)
    dGam = np.empty((4, 4, 4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = steps[k]
        dGam[k] = (_christoffel(g, y + e, steps)[0] - _christoffel(g, y - e, steps)[0]) / (2 * steps[k])
    # R_bd = d_a Gam^a_bd - d_d Gam^a_ba + Gam^a_ae Gam^e_bd - Gam^a_de Gam^e_ba
    ricci = (
        np.einsum("aabd->bd", dGam)
        - np.einsum("daba->bd", dGam)
        + np.einsum("aae,ebd->bd", Gam, Gam)
        - np.einsum("ade,eba->bd", Gam, Gam)
    )
    return float(np.einsum("bd,bd->", Ginv, ricci))


# -- lemma audit ---------------------------------------------------------------------

LEMMA_INEQUALITIES = ("r<r*<(1+e)r", "1<Rr*<1+e", "0<R|u|<1+e", "1-e<1-2mR<1", "0<s<1")


@dataclass
class LemmaReport:
    m: float
    u0: float
    epsilon: float
    margins: dict
    morawetz_margin: float
    passed: bool
    violation: Optional[dict]
    smallest_u0: Optional[float] = None


def _lemma_margins(m, u, s, eps):
    rstar = np.abs(u) / s
    r = inverse_tortoise(rstar, m)
    R = 1.0 / r
    ru = R * np.abs(u)
    checks = {
        "r<r*<(1+e)r": np.minimum(rstar - r, (1 + eps) * r - rstar) / r,
        "1<Rr*<1+e": np.minimum(R * rstar - 1, 1 + eps - R * rstar),
        "0<R|u|<1+e": np.minimum(ru, 1 + eps - ru),
        "1-e<1-2mR<1": np.minimum(2 * m * R - 0.0, eps - 2 * m * R) if m > 0 else np.full_like(R, eps),
        "0<s<1": np.minimum(s, 1 - s) + np.zeros_like(R),
    }
    if m == 0:
        # flat case: the 2mR inequality holds with slack eps on both sides
        checks["1-e<1-2mR<1"] = np.full_like(R, eps)
    F = R**2 * (1 - 2 * m * R)
    # -g(T,T)/u^2 for the vector field of morawetz_field
    timelike = F * u**2 + 4 * (1 + u * R)
    return checks, timelike, (u, r, R)


def _lemma_grid(m, u0, eps, n):
    # u in [10 u0, u0]; s in (0, 1) open at both ends, where the strict
    # inequality on s holds by construction of the region
    u = np.linspace(10 * u0, u0, n)
    s = np.linspace(0, 1, n + 2)[1:-1]
    U, S = np.meshgrid(u, s, indexing="ij")
    return _lemma_margins(m, U, S, eps)


def lemma_audit(m, u0, epsilon, n=200, bisect=True, u_max=1e4):
    """Audit the decay inequalities and Morawetz timelikeness on a grid."""
    if m < 0 or epsilon <= 0:
        raise ParameterError("need m >= 0 and epsilon > 0")
    checks, timelike, (U, r, R) = _lemma_grid(m, u0, epsilon, n)
    margins = {k: float(np.min(v)) for k, v in checks.items()}
    mor = float(np.min(timelike))
    passed = all(v > 0 for v in margins.values()) and mor > 0
    violation = None
    if not passed:
        worst = min(margins, key=margins.get)
        idx = np.unravel_index(np.argmin(checks[worst]), checks[worst].shape)
        violation = {"inequality": worst, "u": float(U[idx]), "r": float(r[idx]), "margin": margins[worst]}
    report = LemmaReport(m, u0, epsilon, margins, mor, passed, violation)
    if bisect:
        report.smallest_u0 = smallest_admissible_u0(m, epsilon, n=n, u_max=u_max)
    return report


def _lemma_passes(m, u0, eps, n):
    checks, timelike, _ = _lemma_grid(m, u0, eps, n)
    return all(np.min(v) > 0 for v in checks.values()) and np.min(timelike) > 0


def smallest_admissible_u0(m, eps, n=200, u_max=1e4, rtol=1e-4):
    """Smallest |u0| (as a negative u0) for which the audit passes, or None."""
    hi = u_max
    if not _lemma_passes(m, -hi, eps, n):
        return None
    lo = 1e-3
    if _lemma_passes(m, -lo, eps, n):
        return -lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _lemma_passes(m, -mid, eps, n):
            hi = mid
        else:
            lo = mid
    return -hi
