"""Checks on the closed-form solutions themselves, independent of the solvers."""

import numpy as np
import pytest

from confscat.fields import scri_grid
from confscat.geometry import DomainError
from confscat.oracles import (
    OracleSolution,
    bump_function,
    cylinder_grid,
    cylinder_mode,
    dalembert_oracle,
    manufactured_oracle,
    physical_residual,
)

H, DH = bump_function(1.0, 0.5)
DAL = dalembert_oracle(H, DH)


def test_bump_vanishes_outside_support():
    x = np.array([-1.0, 0.0, 0.5, 1.5, 3.0])
    assert not np.any(H(x)) and not np.any(DH(x))
    assert H(1.0) == 1.0 and DH(1.0) == 0.0


def test_bump_derivative_matches_finite_difference():
    x = np.linspace(0.55, 1.45, 37)
    e = 1e-6
    assert np.allclose(DH(x), (H(x + e) - H(x - e)) / (2 * e), atol=1e-6)


def test_zero_profile_gives_zero_oracle():
    zero = dalembert_oracle(lambda x: 0 * np.asarray(x, float), lambda x: 0 * np.asarray(x, float))
    assert not np.any(zero.psi(0.3, cylinder_grid(50).nodes))
    assert not np.any(zero.extras["profile"]("scri_plus", 50))


def test_support_touching_origin_rejected():
    h, dh = bump_function(0.0, 0.5)
    with pytest.raises(DomainError):
        dalembert_oracle(h, dh)


def test_physical_residual_vanishes():
    # with equal steps in t and r the centered scheme is exact on h(t - r), so only rounding is left
    for h in (0.02, 0.01):
        assert physical_residual(DAL, h) <= 1e-6
        assert DAL.fd_residual(h, T=(0.2, 0.6), chi=(0.3, 1.0)) <= 1e-6


def test_physical_residual_negative_control():
    bad = OracleSolution("dalembert", DAL.psi, DAL.psi_t, DAL.valid,
                         {"physical": lambda t, r: np.asarray(t) * np.asarray(r) ** 2})
    assert physical_residual(bad, 0.01) >= 1.0


def test_radiation_fields_are_opposite():
    plus = DAL.extras["profile"]("scri_plus", 200)
    minus = DAL.extras["profile"]("scri_minus", 200)
    assert np.array_equal(plus, -minus)
    assert np.max(plus) > 0


def test_radiation_field_is_limit_of_reduced_field():
    # on scri^+ the reduced field at (pi/2 + s, pi/2 - s) divided by cos s is the profile
    s = scri_grid(200).nodes[1:-1]
    v = DAL.psi(np.pi / 2 + s, np.pi / 2 - s) / np.cos(s)
    assert np.allclose(v, DAL.extras["profile"]("scri_plus", 200)[1:-1], atol=1e-12)


def test_dalembert_validity_domain():
    assert DAL.valid(0.0, np.pi)
    assert not DAL.valid(0.5, 3.0)
    with pytest.raises(DomainError):
        DAL.cauchy_data(0.5, 100)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_cylinder_mode_examples(n):
    o = cylinder_mode(n)
    k = n + 1
    chi = cylinder_grid(64).nodes
    assert np.allclose(o.psi(0.0, chi), np.sin(k * chi))
    assert np.allclose(o.psi(np.pi / (2 * k), chi), 0.0, atol=1e-15)
    assert o.fd_residual(0.005) <= 1e-3


def test_cylinder_mode_rejects_negative_index():
    with pytest.raises(ValueError):
        cylinder_mode(-1)


def test_oracle_kind_checked():
    with pytest.raises(ValueError):
        OracleSolution("other", np.sin, np.cos, lambda T, x: True)


def test_manufactured_oracle_residual_vanishes():
    def f(T, x):
        return (1 + 0.5 * np.sin(T)) * np.sin(x) ** 2

    def ft(T, x):
        return 0.5 * np.cos(T) * np.sin(x) ** 2

    o = manufactured_oracle(f, ft)
    # fd_residual subtracts the forcing, leaving only the finite-difference error
    r = [o.fd_residual(h) for h in (0.02, 0.01)]
    assert r[1] <= 1e-3 and r[0] / r[1] == pytest.approx(4.0, rel=0.15)
