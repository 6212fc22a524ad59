import json

import numpy as np
import pytest

from superframes import cases
from superframes.casedefs import CaseSpec
from superframes.fields import BodyVanishesError, ConformalGrid, Field
from superframes.frames import (FieldMatrix, MissingFieldError, assemble,
                                curvature_excess, gauss_codazzi_fields,
                                gauss_codazzi_residual, zero_curvature_fields,
                                zero_curvature_residual)


def grid(n=41, hw=1.0):
    return ConformalGrid(0, hw, n)


def plane_geom(g):
    z = Field.zero(g)
    return {"u": z, "Q": z, "H": z}


# -- assembly -----------------------------------------------------------------

def test_assemble_plane_all_zero():
    g = grid(11)
    fs = assemble(CaseSpec("euc-f0"), plane_geom(g))
    for i in (1, 2):
        assert fs.matrix(i).max_abs() == 0.0


def test_assemble_euc_f0_unit_hopf_entries():
    g = grid(11)
    z = Field.zero(g)
    geom = {"u": z, "Q": Field.constant(g, 1.0), "H": z}
    fs = assemble(CaseSpec("euc-f0"), geom)
    U1 = fs.matrix(1)
    assert np.allclose(U1.get(0, 2).body(), 1.0)
    assert np.allclose(U1.get(2, 1).body(), -2.0)
    others = {(r, c): f for (r, c), f in U1.entries.items() if (r, c) not in ((0, 2), (2, 1))}
    assert all(f.max_abs() < 1e-14 for f in others.values())


def test_assemble_hyp_c1_constant_omega_structure():
    # alpha = beta = 0, gamma = 1: only the G-block and delta rows survive
    # in the odd-direction matrices
    g = grid(11)
    spec = CaseSpec("hyp-f3-c1", alpha=0, beta=0, gamma=1.0, k=1.0, c=-1.0)
    geom = {"u": Field.zero(g), "H": Field.constant(g, 1.0),
            "G": Field.constant(g, 1.0)}
    fs = assemble(spec, geom)
    U3 = fs.matrix(3)
    expected_u3 = {(3, 4), (3, 5), (4, 2), (5, 2)}
    live = {rc for rc, f in U3.entries.items() if f.max_abs() > 1e-14}
    assert live == expected_u3
    U4 = fs.matrix(4)
    live4 = {rc for rc, f in U4.entries.items() if f.max_abs() > 1e-14}
    assert live4 == {(2, 4), (2, 5), (4, 3), (5, 3)}


def test_assemble_missing_field():
    g = grid(11)
    with pytest.raises(MissingFieldError, match="euc-f0.*'H'"):
        assemble(CaseSpec("euc-f0"), {"u": Field.zero(g), "Q": Field.zero(g)})


def test_assemble_divides_by_vanishing_factor():
    g = grid(11)
    spec = CaseSpec("euc-f2", a=1.0, b=0.0, k=1.0)  # odd factor has zero body
    z = Field.zero(g)
    geom = {"u": z, "q": z, "h": Field.constant(g, 1.0)}
    with pytest.raises(BodyVanishesError):
        assemble(spec, geom)


# -- zero curvature -----------------------------------------------------------

def test_zcc_zero_matrices():
    g = grid(11)
    fs = assemble(CaseSpec("euc-f0"), plane_geom(g))
    rep = zero_curvature_residual(fs)
    assert rep.overall_max == 0.0
    assert rep.passed


def test_zcc_constant_commuting():
    g = grid(11)
    A = np.diag([1.0, 2.0, 3.0]).astype(complex)
    mats = {}
    for i in (1, 2):
        M = FieldMatrix(g, 3)
        for r in range(3):
            M.set(r, r, A[r, r])
        mats[i] = M
    from superframes.frames import FrameSystem
    fs = FrameSystem(CaseSpec("euc-f0"), g, 3, (1, 2), mats)
    assert zero_curvature_residual(fs).overall_max == 0.0


def test_zcc_flat_liouville_family():
    g = grid(81)
    spec = CaseSpec("euc-f0")
    b = cases.body_family(spec, g, h0=1.0)
    rep = zero_curvature_residual(assemble(spec, b.fields))
    assert rep.overall_max <= 50 * g.h ** 2
    assert rep.passed


def test_gc_halving_reduces_by_3_5():
    res = []
    for n in (81, 161):
        g = grid(n)
        spec = CaseSpec("euc-f0")
        b = cases.body_family(spec, g, h0=1.0)
        res.append(gauss_codazzi_residual(spec, b.fields).overall_max)
    assert res[0] / res[1] >= 3.5


# -- scalar equations ---------------------------------------------------------

def test_gc_plane_zero():
    g = grid(11)
    rep = gauss_codazzi_residual(CaseSpec("euc-f0"), plane_geom(g))
    assert rep.overall_max == 0.0


def test_gc_curved_sign_check():
    # c = -1, Q = 0, H = 0: the factor equation becomes d1 d2 u = e^u / 2
    g = grid(81)
    spec = CaseSpec("cur-f0", c=-1.0)
    b = cases.body_family(spec, g, h0=0.0, f=lambda z: z / 3,
                          fprime=lambda z: 1 / 3 + 0 * z)
    rep = gauss_codazzi_residual(spec, b.fields)
    assert rep.passed


@pytest.mark.parametrize("tag,kw", [
    ("euc-f0", {}),
    ("euc-f2", {"a": 1.0, "b": 1.0}),
    ("euc-f3-c1", {"alpha": 0.3 + 0.4j, "gamma": 1.0}),
    ("euc-f3-c2", {"alpha": 1.0, "beta": 0.5 + 0.25j, "gamma": 1.2}),
    ("cur-f0", {"c": -1.0}),
    ("hyp-f3-c1", {"alpha": 1.0, "beta": 1.0, "gamma": 1.0, "c": -1.0}),
])
def test_route_equivalence(tag, kw):
    # scalar equations passing implies the matrix route passes
    g = grid(61)
    spec = CaseSpec(tag, k=1.0, **kw)
    if tag == "hyp-f3-c1":
        b = cases.hyp_case1_family(spec, g)
    elif tag == "cur-f0":
        b = cases.body_family(spec, g, h0=0.0, f=lambda z: z / 3,
                              fprime=lambda z: 1 / 3 + 0 * z)
    else:
        b = cases.body_family(spec, g, h0=0.5)
    assert gauss_codazzi_residual(spec, b.fields).passed
    assert zero_curvature_residual(assemble(spec, b.fields)).passed


def test_theta_sector_separation():
    g = grid(61)
    spec = CaseSpec("euc-f3-c1", alpha=0.5, gamma=1.0, k=1.0)
    b = cases.body_family(spec, g, h0=0.5)
    rep = zero_curvature_residual(assemble(spec, b.fields))
    tol = 50 * g.h ** 2
    for e in rep.entries:
        assert e.max <= tol, (e.name, e.sector, e.max)


def test_euc_f3_c2_restricts_to_body_matrices():
    g = grid(21)
    spec32 = CaseSpec("euc-f3-c2", alpha=1.0, beta=0.5, gamma=1.2)
    b = cases.body_family(spec32, g, h0=1.0)
    fs32 = assemble(spec32, b.fields)
    fs0 = assemble(CaseSpec("euc-f0"), b.fields)
    keep = {0: 0, 1: 1, 4: 2}
    for i in (1, 2):
        big = fs32.matrix(i)
        small = fs0.matrix(i)
        for (r, c), f in big.entries.items():
            assert r in keep and c in keep
            assert np.array_equal(f.values, small.get(keep[r], keep[c]).values)
        assert len(big.entries) == len(small.entries)
    assert fs32.matrix(3).entries == {} and fs32.matrix(4).entries == {}


def test_curved_f2_delegates_to_body_case():
    g = grid(41)
    spec = CaseSpec("cur-f0", c=-2.0)
    b = cases.body_family(spec, g, h0=1.0)
    rep_f2 = cases.curved_f2_residual(spec, b.fields)
    rep_f0 = gauss_codazzi_residual(spec, b.fields)
    assert rep_f2.to_json() == rep_f0.to_json()


def test_hyp_c2_reduced_equation_liouville():
    g = grid(81)
    spec = CaseSpec("hyp-f3-c2", c=-0.5)
    b = cases.hyp_case2_family(spec, g)
    rep = gauss_codazzi_residual(spec, b.fields)
    assert rep.passed


# -- report -------------------------------------------------------------------

def test_report_json_schema(tmp_path):
    g = grid(21)
    rep = gauss_codazzi_residual(CaseSpec("euc-f0"), plane_geom(g))
    path = tmp_path / "rep.json"
    rep.write(path)
    doc = json.loads(path.read_text())
    for key in ("case", "grid", "pairs", "overall_max", "pass"):
        assert key in doc
    for e in doc["pairs"]:
        assert set(e) >= {"i", "j", "sector", "max", "l2"}


def test_excess_is_exact_offset():
    # the extra curvature term is added as one literal array addition,
    # so the defect against the body equations is bitwise recoverable
    rng = np.random.default_rng(0)
    g = grid(21)
    u = Field(g, rng.normal(size=(21, 21)).astype(complex))
    q = Field(g, (rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21))))
    h = Field(g, rng.normal(size=(21, 21)).astype(complex))
    spec2 = CaseSpec("euc-f2", a=1.3, b=0.4, k=0.9)
    res2 = gauss_codazzi_fields(spec2, {"u": u, "q": q, "h": h})["gauss"]
    res0 = gauss_codazzi_fields(CaseSpec("euc-f0"), {"u": u, "Q": q, "H": h})["gauss"]
    expected = res0 + curvature_excess(spec2, u)
    assert np.array_equal(res2.values, expected.values)
