"""Closed-form solutions used to verify the solvers.

All oracles are expressed through the reduced cylinder field
``psi = sin(chi) * phi``. For the spherically symmetric free wave the
Penrose map gives ``r * Omega = sin(chi)``, so the reduced field equals the
Minkowski quantity ``xi = r * phi_hat`` evaluated at the image point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .evolution import manufactured_source
from .fields import CauchyData, Grid1D, scri_grid
from .geometry import DomainError, einstein_cylinder_metric

ORACLE_KINDS = ("dalembert", "cylinder_mode", "manufactured")


@dataclass
class OracleSolution:
    """Closed-form reduced solution ``psi(T, chi)`` with its time derivative.

    ``valid(T, chi)`` reports where the closed form is the solution of the
    cylinder problem; ``extras`` holds kind-specific evaluators such as
    radiation profiles or a forcing term.
    """

    kind: str
    psi: Callable
    psi_t: Callable
    valid: Callable
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ValueError(f"oracle kind must be one of {ORACLE_KINDS}")

    def cauchy_data(self, T=0.0, n_cells=400) -> CauchyData:
        grid = cylinder_grid(n_cells)
        chi = grid.nodes
        if not np.all(self.valid(T, chi)):
            raise DomainError(f"leaf T={T} leaves the validity domain")
        psi = self.psi(T, chi)
        vel = self.psi_t(T, chi)
        psi[0] = psi[-1] = vel[0] = vel[-1] = 0.0
        return CauchyData.from_arrays(grid, psi, vel, T)

    def frame(self, T, chi):
        return self.psi(T, np.asarray(chi, dtype=float))

    def fd_residual(self, h, T=(0.2, 0.6), chi=(0.8, 1.6)) -> float:
        """Max of ``psi_TT - psi_chichi`` (plus forcing, if any) by centered differences."""
        TT = np.arange(T[0], T[1] + h / 2, h)
        XX = np.arange(chi[0], chi[1] + h / 2, h)
        P = self.psi(TT[:, None], XX[None, :])
        r = (P[2:, 1:-1] - 2 * P[1:-1, 1:-1] + P[:-2, 1:-1]) / h**2
        r -= (P[1:-1, 2:] - 2 * P[1:-1, 1:-1] + P[1:-1, :-2]) / h**2
        if "forcing" in self.extras:
            r -= self.extras["forcing"](TT[1:-1, None], XX[None, 1:-1])
        return float(np.max(np.abs(r)))


def cylinder_grid(n_cells) -> Grid1D:
    return Grid1D.uniform("chi", 0.0, np.pi, n_cells, ("dirichlet_zero", "dirichlet_zero"))


def cylinder_mode(n: int) -> OracleSolution:
    """Linear eigenmode ``cos((n+1) T) sin((n+1) chi)``."""
    if n < 0:
        raise ValueError("mode index must be non-negative")
    k = n + 1
    return OracleSolution(
        "cylinder_mode",
        lambda T, chi: np.cos(k * T) * np.sin(k * chi),
        lambda T, chi: -k * np.sin(k * T) * np.sin(k * chi),
        lambda T, chi: np.ones(np.broadcast(T, chi).shape, dtype=bool),
        {"n": n},
    )


def bump_function(center=1.0, width=0.5, amplitude=1.0, power=8):
    """Polynomial bump ``a (1 - z^2)^power`` and its derivative.

    Its derivatives stay moderate, so second-order schemes reach their
    asymptotic regime at desk resolutions.
    """

    def h(x):
        z = (np.asarray(x, dtype=float) - center) / width
        return np.where(np.abs(z) < 1, amplitude * (1 - z**2) ** power, 0.0)

    def dh(x):
        z = (np.asarray(x, dtype=float) - center) / width
        return np.where(np.abs(z) < 1, -2 * power * amplitude * z * (1 - z**2) ** (power - 1) / width, 0.0)

    return h, dh


def _tan_half(a):
    # h(tan(a/2)) vanishes for compact h once |a| reaches pi
    a = np.asarray(a, dtype=float)
    inside = np.abs(a) < np.pi
    return np.where(inside, np.tan(np.where(inside, a, 0.0) / 2), np.inf), inside


def dalembert_oracle(h: Callable, dh: Callable, probe=(-50.0, 0.0)) -> OracleSolution:
    """Free spherical wave ``xi(t, r) = h(t - r) - h(t + r)`` on the cylinder.

    ``h`` must vanish on ``(-inf, 0]``; the check samples ``probe``. The
    radiation fields are ``h(tan s)/cos s`` on scri^+ and its negative on
    scri^-, with ``u = tan s`` and ``v = tan s`` respectively.
    """
    xs = np.linspace(probe[0], probe[1], 2001)
    if np.any(h(xs) != 0.0):
        raise DomainError("the profile's support touches r = 0")

    def H(a):
        x, inside = _tan_half(a)
        out = np.zeros_like(x)
        out[inside] = h(x[inside])
        return out

    def dH(a):
        x, inside = _tan_half(a)
        out = np.zeros_like(x)
        out[inside] = 0.5 * (1 + x[inside] ** 2) * dh(x[inside])
        return out

    def psi(T, chi):
        T, chi = np.broadcast_arrays(np.asarray(T, float), np.asarray(chi, float))
        return H(T - chi) - H(T + chi)

    def psi_t(T, chi):
        T, chi = np.broadcast_arrays(np.asarray(T, float), np.asarray(chi, float))
        return dH(T - chi) - dH(T + chi)

    def valid(T, chi):
        return np.abs(np.asarray(T)) + np.asarray(chi) <= np.pi + 1e-12

    def profile(kind, n_cells=400):
        s = scri_grid(n_cells).nodes
        c = np.cos(s)
        inner = np.abs(s) < np.pi / 2
        v = np.zeros_like(s)
        v[inner] = h(np.tan(s[inner])) / c[inner]
        return -v if kind == "scri_minus" else v

    def physical(t, r):
        t, r = np.broadcast_arrays(np.asarray(t, float), np.asarray(r, float))
        return h(t - r) - h(t + r)

    return OracleSolution("dalembert", psi, psi_t, valid, {"profile": profile, "physical": physical})


def physical_residual(oracle: OracleSolution, h, t=(0.5, 2.0), r=(0.5, 2.0)) -> float:
    """``xi_tt - xi_rr`` of a d'Alembert oracle by centered differences in (t, r)."""
    f = oracle.extras["physical"]
    tt = np.arange(t[0], t[1] + h / 2, h)
    rr = np.arange(r[0], r[1] + h / 2, h)
    X = f(tt[:, None], rr[None, :])
    a = (X[2:, 1:-1] - 2 * X[1:-1, 1:-1] + X[:-2, 1:-1]) / h**2
    b = (X[1:-1, 2:] - 2 * X[1:-1, 1:-1] + X[1:-1, :-2]) / h**2
    return float(np.max(np.abs(a - b)))


def manufactured_oracle(f: Callable, ft: Callable, h_fd=1e-3, metric=None) -> OracleSolution:
    """Any smooth ``f(T, chi)`` vanishing at the poles, made exact by a forcing term.

    ``extras['source']`` plugs into :class:`EvolutionConfig`; ``'forcing'``
    is the linear part ``f_TT - f_chichi``, so that ``fd_residual`` checks
    the closed form itself.
    """
    g = metric or einstein_cylinder_metric(T_range=(-np.pi, np.pi))
    src = manufactured_source(g, f, h_fd)

    def forcing(T, chi):
        f0 = f(T, chi)
        return ((f(T + h_fd, chi) - 2 * f0 + f(T - h_fd, chi)) - (f(T, chi + h_fd) - 2 * f0 + f(T, chi - h_fd))) / h_fd**2

    return OracleSolution(
        "manufactured", f, ft,
        lambda T, chi: np.ones(np.broadcast(T, chi).shape, dtype=bool),
        {"source": src, "forcing": forcing},
    )
