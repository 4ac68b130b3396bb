"""Discrete fields on 1+1 reduced charts, stencils, norms and snapshot I/O.

On the ultrastatic charts the stored unknown is the reduced field
``psi = A * phi`` where ``A`` is the areal factor (``sin(chi)`` on the
cylinder, ``r`` on Minkowski). Norms of ``phi`` are computed from ``psi``
with the measure rewritten so that no quotient is ever taken at a pole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from .geometry import Foliation, NullSurface

BOUNDARY_TAGS = ("dirichlet_zero", "parity_even", "parity_odd", "open")
MIN_NODES = 8
FOUR_PI = 4 * np.pi


class GridError(ValueError):
    """Inconsistent grids or grid metadata."""


class CoverageError(ValueError):
    """A requested surface or leaf leaves the region covered by a history."""


@dataclass(frozen=True, eq=False)
class Grid1D:
    coord_name: str
    nodes: np.ndarray
    boundary: tuple = ("open", "open")

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < MIN_NODES:
            raise GridError(f"need at least {MIN_NODES} nodes")
        d = np.diff(nodes)
        if np.any(d <= 0):
            raise GridError("nodes must be strictly increasing")
        h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
        # relative to the node magnitude, since linspace rounds at that scale
        if np.max(np.abs(d - h)) > 1e-12 * max(h, np.max(np.abs(nodes))) * 4:
            raise GridError("nodes are not uniformly spaced")
        if len(self.boundary) != 2 or any(b not in BOUNDARY_TAGS for b in self.boundary):
            raise GridError(f"boundary tags must be two of {BOUNDARY_TAGS}")
        object.__setattr__(self, "boundary", tuple(self.boundary))

    @classmethod
    def uniform(cls, coord_name, a, b, n_cells, boundary=("open", "open")):
        return cls(coord_name, np.linspace(a, b, n_cells + 1), boundary)

    @property
    def spacing(self):
        return (self.nodes[-1] - self.nodes[0]) / (self.nodes.size - 1)

    @property
    def n(self):
        return self.nodes.size

    def same_as(self, other):
        return (
            self.coord_name == other.coord_name
            and self.boundary == other.boundary
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
        )

    def __eq__(self, other):
        return isinstance(other, Grid1D) and self.same_as(other)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ScalarFieldGrid:
    grid: Grid1D
    values: np.ndarray
    stamp: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.nodes.shape:
            raise GridError("values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError(f"non-finite field values at stamp {self.stamp}")
        tol = 1e-12 * (1.0 + np.max(np.abs(v)))
        for end, tag in zip((0, -1), self.grid.boundary):
            if tag == "dirichlet_zero" and abs(v[end]) > tol:
                raise GridError(f"nonzero value {v[end]} at a dirichlet end")

    def __add__(self, other):
        _check_same(self.grid, other.grid)
        return ScalarFieldGrid(self.grid, self.values + other.values, self.stamp)

    def __sub__(self, other):
        _check_same(self.grid, other.grid)
        return ScalarFieldGrid(self.grid, self.values - other.values, self.stamp)

    def scaled(self, a):
        return ScalarFieldGrid(self.grid, a * self.values, self.stamp)


@dataclass(frozen=True)
class CauchyData:
    """Reduced position ``psi`` and its normal derivative on one leaf."""

    position: ScalarFieldGrid
    velocity: ScalarFieldGrid

    def __post_init__(self):
        _check_same(self.position.grid, self.velocity.grid)

    @classmethod
    def from_arrays(cls, grid, psi, vel, stamp=0.0):
        return cls(ScalarFieldGrid(grid, psi, stamp), ScalarFieldGrid(grid, vel, stamp))

    @property
    def grid(self):
        return self.position.grid

    @property
    def stamp(self):
        return self.position.stamp

    def __add__(self, other):
        return CauchyData(self.position + other.position, self.velocity + other.velocity)

    def __sub__(self, other):
        return CauchyData(self.position - other.position, self.velocity - other.velocity)

    def scaled(self, a):
        return CauchyData(self.position.scaled(a), self.velocity.scaled(a))

    def time_reflected(self):
        return CauchyData(self.position, self.velocity.scaled(-1.0))


@dataclass(frozen=True)
class CharacteristicData:
    """Values of ``phi`` on a null surface, sampled along its parameter."""

    surface: NullSurface
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.nodes.shape:
            raise GridError("values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("non-finite characteristic data")
        if self.surface.kind == "cone" and self.surface.vertex is not None:
            if v[-1] != 0.0:
                raise ValueError("cone data must vanish near the vertex")

    @property
    def h1_norm(self):
        return cone_h1_norm(self)


def _check_same(g1, g2):
    if not g1.same_as(g2):
        raise GridError("grids differ")


# -- stencils ------------------------------------------------------------------

def _ghost(v, tag, side):
    """Ghost value beyond one end (last axis), or None for one-sided handling."""
    f0, f1 = (v[..., 0], v[..., 1]) if side == 0 else (v[..., -1], v[..., -2])
    if tag == "parity_even":
        return f1
    if tag in ("parity_odd", "dirichlet_zero"):
        return 2 * f0 - f1
    return None


def derivative_values(v, h, order, boundary=("open", "open")):
    """Second-order first or second derivative along the last axis."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if n < 2 * order + 1:
        raise GridError("too few nodes for the stencil")
    out = np.empty_like(v)
    if order == 1:
        out[..., 1:-1] = (v[..., 2:] - v[..., :-2]) / (2 * h)
    else:
        out[..., 1:-1] = (v[..., 2:] - 2 * v[..., 1:-1] + v[..., :-2]) / h**2
    for side, tag in zip((0, 1), boundary):
        ghost = _ghost(v, tag, side)
        i, j, k, l, m, sgn = (0, 1, 2, 3, 4, 1.0) if side == 0 else (-1, -2, -3, -4, -5, -1.0)
        if ghost is not None:
            if order == 1:
                out[..., i] = sgn * (v[..., j] - ghost) / (2 * h)
            else:
                out[..., i] = (v[..., j] - 2 * v[..., i] + ghost) / h**2
        elif order == 1:
            out[..., i] = sgn * (-3 * v[..., i] + 4 * v[..., j] - v[..., k]) / (2 * h)
        else:
            # five-point one-sided stencil, second order
            out[..., i] = (35 * v[..., i] - 104 * v[..., j] + 114 * v[..., k] - 56 * v[..., l] + 11 * v[..., m]) / (12 * h**2)
    return out


def derivative(f: ScalarFieldGrid, order: int) -> ScalarFieldGrid:
    """Centered derivative with boundary handling from the grid tags.

    Dirichlet and odd-parity ends use an odd reflection, so the second
    derivative there is exactly zero; even-parity ends use an even
    reflection; open ends use one-sided second-order stencils.
    """
    g = f.grid
    vals = derivative_values(f.values, g.spacing, order, g.boundary)
    # the derivative of a dirichlet field need not vanish at the end
    tags = tuple("open" if b == "dirichlet_zero" and order == 1 else b for b in g.boundary)
    out_grid = g if tags == g.boundary else Grid1D(g.coord_name, g.nodes, tags)
    return ScalarFieldGrid(out_grid, vals, f.stamp)


# -- reduced-field helpers -------------------------------------------------------

def areal_arrays(metric, x):
    A, dA, ddA = metric.areal_derivs(np.asarray(x, dtype=float))
    shape = np.shape(x)
    return (np.broadcast_to(A, shape).astype(float), np.broadcast_to(dA, shape).astype(float),
            np.broadcast_to(ddA, shape).astype(float))


def unreduce(psi, grid, metric):
    """phi = psi / A with the one-sided limit psi_x / A' where A vanishes."""
    A, dA, _ = areal_arrays(metric, grid.nodes)
    psi = np.asarray(psi, dtype=float)
    pole = np.abs(A) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = psi / np.where(pole, 1.0, A)
    if np.any(pole):
        dpsi = derivative_values(psi, grid.spacing, 1, ("parity_odd", "parity_odd"))
        phi[..., pole] = dpsi[..., pole] / dA[pole]
    return phi


def _reduced_gradient(psi, grid, metric):
    """A * d_x(phi) = psi_x - (A'/A) psi, zero at poles."""
    A, dA, _ = areal_arrays(metric, grid.nodes)
    dpsi = derivative_values(psi, grid.spacing, 1, grid.boundary)
    pole = np.abs(A) < 1e-14
    ratio = np.where(pole, 0.0, dA / np.where(pole, 1.0, A))
    return np.where(pole, 0.0, dpsi - ratio * psi)


def _power_quotient(psi, A, p):
    """psi^p / A^(p-2) with the pole value taken as zero (psi vanishes there)."""
    pole = np.abs(A) < 1e-14
    return np.where(pole, 0.0, psi**p / np.where(pole, 1.0, A) ** (p - 2))


def reduced_norms(psi, vel, grid, metric):
    """Norm ingredients of phi for reduced data, vectorised over leading axes.

    Returns a dict of squared (``L2sq``, ``gradsq``, ``velsq``) and power
    (``L4^4``, ``L6^6``) integrals including the sphere factor, plus
    ``max_abs`` of phi.
    """
    x = grid.nodes
    A = areal_arrays(metric, x)[0]
    return {
        "L2sq": FOUR_PI * trapezoid(psi**2, x, axis=-1),
        "gradsq": FOUR_PI * trapezoid(_reduced_gradient(psi, grid, metric) ** 2, x, axis=-1),
        "velsq": FOUR_PI * trapezoid(vel**2, x, axis=-1),
        "L4^4": FOUR_PI * trapezoid(_power_quotient(psi, A, 4), x, axis=-1),
        "L6^6": FOUR_PI * trapezoid(_power_quotient(psi, A, 6), x, axis=-1),
        "max_abs": np.max(np.abs(unreduce(psi, grid, metric)), axis=-1),
    }


def slice_norms(d: CauchyData, fol: Foliation, parameter: Optional[float] = None) -> dict:
    """H1, L2, L4 and L6 norms of phi and the slice energy on a full leaf.

    ``d`` holds reduced data ``(psi, d_T psi)``. The returned dict has keys
    ``H1``, ``L2``, ``L2_velocity``, ``L4``, ``L6``, ``L4^4`` and ``energy``
    (``H1**2 + L2_velocity**2``). Quadrature is trapezoidal with the sphere
    factor ``4 pi`` included.
    """
    grid = d.grid
    if grid.coord_name != fol.leaf_coordinate:
        raise GridError(f"data on {grid.coord_name}, leaf parameterised by {fol.leaf_coordinate}")
    if parameter is not None:
        fol.check(parameter)
    q = reduced_norms(d.position.values, d.velocity.values, grid, fol.metric)
    h1sq = q["L2sq"] + q["gradsq"]
    return {
        "H1": float(np.sqrt(h1sq)),
        "L2": float(np.sqrt(q["L2sq"])),
        "L2_velocity": float(np.sqrt(q["velsq"])),
        "L4": float(q["L4^4"] ** 0.25),
        "L4^4": float(q["L4^4"]),
        "L6": float(q["L6^6"] ** (1 / 6)),
        "energy": float(h1sq + q["velsq"]),
    }


def cone_h1_norm(d: CharacteristicData) -> float:
    """sqrt of the integral of (d_l phi)^2 + phi^2 against the contracted measure."""
    s = d.surface
    if s.transversal_eval is None:
        raise ValueError(f"surface {s.kind} carries no transversal vector")
    p = d.grid.nodes
    measure = s.contracted_measure(p)
    # generator components relative to d(locus)/dp
    scale = np.array([s.generator_scale(pi) for pi in p])
    dphi = derivative_values(d.values, d.grid.spacing, 1, d.grid.boundary) * scale
    return float(np.sqrt(trapezoid((dphi**2 + d.values**2) * measure, p)))


def scri_grid(n_cells, coord_name="s"):
    """Uniform grid over the closed scri parameter range [-pi/2, pi/2]."""
    return Grid1D.uniform(coord_name, -np.pi / 2, np.pi / 2, n_cells, ("open", "open"))


def restrict_to_surface(hist, surface: NullSurface, grid: Optional[Grid1D] = None, quantity="phi"):
    """Bilinear interpolation of a history onto a null surface.

    ``quantity`` selects ``"phi"`` (the unreduced field, default) or
    ``"psi"`` (the stored reduced field). The default grid is the scri
    parameter grid matching the history's spatial spacing.
    """
    if grid is None:
        n = int(round(np.pi / hist.grid.spacing))
        grid = scri_grid(n)
    stamps = hist.stamps
    vals = hist.positions
    if quantity == "phi":
        vals = np.vstack([unreduce(v, hist.grid, hist.metric) for v in vals])
    elif quantity != "psi":
        raise ValueError("quantity must be 'phi' or 'psi'")
    if stamps[0] > stamps[-1]:
        stamps, vals = stamps[::-1], vals[::-1]
    pts = np.array([surface.locus_eval(p) for p in grid.nodes])
    tol = 1e-9 * max(1.0, abs(stamps[-1]))
    x = hist.grid.nodes
    if (np.any(pts[:, 0] < stamps[0] - tol) or np.any(pts[:, 0] > stamps[-1] + tol)
            or np.any(pts[:, 1] < x[0] - tol) or np.any(pts[:, 1] > x[-1] + tol)):
        raise CoverageError(f"surface {surface.kind} leaves the covered region")
    pts[:, 0] = np.clip(pts[:, 0], stamps[0], stamps[-1])
    pts[:, 1] = np.clip(pts[:, 1], x[0], x[-1])
    interp = RegularGridInterpolator((stamps, x), vals, method="linear")
    return CharacteristicData(surface, grid, interp(pts))


# -- snapshots -------------------------------------------------------------------

def write_snapshot(path, f: ScalarFieldGrid):
    g = f.grid
    lines = [
        f"# coord={g.coord_name} stamp={f.stamp:.17g} n={g.n} h={g.spacing:.17g} "
        f"boundary={','.join(g.boundary)}"
    ]
    lines += [f"{x:.17g} {v:.17g}" for x, v in zip(g.nodes, f.values)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> ScalarFieldGrid:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing snapshot header")
        meta = dict(item.split("=", 1) for item in header[1:].split())
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (int(meta["n"]), 2):
        raise ValueError(f"{path}: expected {meta['n']} rows")
    grid = Grid1D(meta["coord"], data[:, 0], tuple(meta["boundary"].split(",")))
    return ScalarFieldGrid(grid, data[:, 1], float(meta["stamp"]))
