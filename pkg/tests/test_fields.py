import os

import numpy as np
import pytest

from superframes.fields import (BodyVanishesError, ConformalGrid, Field, ThetaPoly,
                                check_nilpotency, d_theta, d_x, field_from_csv,
                                field_to_csv)


def grid(n=41, hw=1.0):
    return ConformalGrid(0, hw, n)


def test_grid_conjugate_pair():
    g = grid(11)
    assert np.array_equal(g.x2, np.conj(g.x1))
    assert g.h == pytest.approx(2.0 / 10)


# -- theta derivatives --------------------------------------------------------

def test_dtheta_linear():
    g = grid(9)
    f = Field.constant(g, ThetaPoly.from_terms({(0, 0): 2.0, (1, 0): 3.0}))
    assert np.allclose(d_theta(f, 3).body(), 3.0)
    assert d_theta(d_theta(f, 3), 3).max_abs() == 0.0


def test_dtheta_metric_entry():
    # f = e^u (a theta3 + b)^2 -> d3 f = 2a e^u (a theta3 + b)
    g = grid(17)
    a, b = 1.5, 0.5
    u = Field.from_x(g, lambda x1, x2: np.log(1 + 0.1 * x1 * x2))
    W = ThetaPoly.from_terms({(0, 0): b, (1, 0): a})
    f = u.exp() * W * W
    expect = 2 * a * u.exp() * W
    got = d_theta(f, 3)
    assert np.allclose(got.values, expect.values)


def test_dtheta_triple_annihilates():
    g = grid(9)
    f = Field.constant(g, ThetaPoly.from_terms({(2, 2): 1.0, (1, 0): 2.0}))
    d3 = d_theta(d_theta(d_theta(f, 3), 3), 3)
    assert d3.max_abs() == 0.0


def test_dtheta_dx_commute_exactly():
    g = grid(21)
    base = Field.from_x(g, lambda x1, x2: np.exp(0.3 * (x1 + x2)))
    f = base * ThetaPoly.from_terms({(0, 0): 1.0, (1, 1): 2.0, (2, 0): 0.5})
    a = d_theta(d_x(f, 1), 3)
    b = d_x(d_theta(f, 3), 1)
    assert np.array_equal(a.values, b.values)


# -- x derivatives ------------------------------------------------------------

def test_dx_quadratic_exact():
    g = grid(21)
    f = Field.from_x(g, lambda x1, x2: x1 ** 2)
    err = np.abs(d_x(f, 1).body() - 2 * g.x1).max()
    assert err < 1e-12


def test_dx_wirtinger_identity():
    g = grid(21)
    f = Field.from_x(g, lambda x1, x2: x1 * x2)
    assert np.abs(d_x(f, 1).body() - g.x2).max() < 1e-12
    assert np.abs(d_x(f, 2).body() - g.x1).max() < 1e-12


def test_dx_log_analytic_oracle():
    g = grid(101)
    f = Field.from_x(g, lambda x1, x2: np.log(1 + x1 * x2))
    expect = g.x2 / (1 + g.x1 * g.x2)
    err = np.abs(d_x(f, 1).body() - expect).max()
    assert err <= 50 * g.h ** 2


def test_dx_convergence_order():
    errs = []
    for n in (51, 101):
        g = grid(n)
        f = Field.from_x(g, lambda x1, x2: np.log(1 + x1 * x2))
        expect = g.x2 / (1 + g.x1 * g.x2)
        errs.append(np.abs(d_x(f, 1).body() - expect).max())
    assert errs[0] / errs[1] >= 3.5


# -- nilpotency reports -------------------------------------------------------

def test_nilpotency_pass():
    g = grid(9)
    f = Field.constant(g, ThetaPoly.from_terms({(2, 0): 1.0}))
    rep = check_nilpotency(f, 3, 3)
    assert rep["pass"]


def test_nilpotency_violation_magnitude():
    g = grid(9)
    f = Field.constant(g, ThetaPoly.from_terms({(0, 0): 1.0, (2, 0): 1e-3}))
    rep = check_nilpotency(f, 2, 2)
    assert rep["violation3"] == pytest.approx(1e-3)
    assert not rep["pass"]


def test_nilpotency_constant_psi_factor():
    g = grid(9)
    f = Field.constant(g, 2.0)  # constant odd-sector metric entry
    assert check_nilpotency(f, 2, 2)["pass"]


# -- functional calculus ------------------------------------------------------

def poly_field(g):
    base = Field.from_x(g, lambda x1, x2: 1.5 + 0.2 * x1 * x2)
    return base + Field.constant(g, ThetaPoly.from_terms(
        {(1, 0): 0.3 + 0.1j, (0, 1): 0.3 - 0.1j, (1, 1): 0.25}))


def test_exp_log_roundtrip():
    g = grid(15)
    f = poly_field(g)
    assert np.abs((f.exp().log() - f).values).max() < 1e-12


def test_reciprocal():
    g = grid(15)
    f = poly_field(g)
    one = f * f.reciprocal()
    assert np.abs(one.body() - 1.0).max() < 1e-12
    assert np.abs((one - 1.0).values).max() < 1e-12


def test_sqrt():
    g = grid(15)
    f = poly_field(g)
    r = f.sqrt()
    assert np.abs((r * r - f).values).max() < 1e-12


def test_body_vanishes_error():
    g = grid(15)
    f = Field.from_x(g, lambda x1, x2: x1 * x2)  # zero at center
    with pytest.raises(BodyVanishesError):
        f.reciprocal()


def test_conjugation_swaps_theta_axes():
    g = grid(9)
    w = Field.constant(g, ThetaPoly.from_terms(
        {(0, 0): 1.0, (1, 0): 0.5 + 0.5j, (0, 1): 0.5 - 0.5j}))
    assert w.is_real()
    q = Field.from_x(g, lambda x1, x2: x1) * ThetaPoly.from_terms({(1, 0): 1.0})
    qc = q.conj()
    assert np.array_equal(qc.sector(0, 1), np.conj(q.sector(1, 0)))


# -- csv ----------------------------------------------------------------------

def test_csv_roundtrip_exact(tmp_path):
    g = grid(9)
    rng = np.random.default_rng(5)
    values = rng.normal(size=(9, 9, 3, 2)) + 1j * rng.normal(size=(9, 9, 3, 2))
    f = Field(g, values)
    path = os.path.join(tmp_path, "f.csv")
    field_to_csv(f, path)
    f2 = field_from_csv(g, path)
    assert np.array_equal(f.values, f2.values)
    with open(path, "rb") as fh:
        data = fh.read()
    assert b"\r" not in data  # LF line endings
    assert data.splitlines()[0].startswith(b"s,t,c00_re,c00_im")
