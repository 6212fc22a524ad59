import numpy as np
import pytest
from scipy.linalg import expm

from superframes import cases, integrator
from superframes.casedefs import CASE_TAGS, CaseSpec
from superframes.fields import ConformalGrid, Field, tp_pad
from superframes.frames import FieldMatrix, FrameSystem, assemble


def grid(n=41, hw=1.0):
    return ConformalGrid(0, hw, n)


def plane_geom(g):
    z = Field.zero(g)
    return {"u": z, "Q": z, "H": z}


def constant_system(g, A, dim):
    mats = {}
    for i in (1, 2):
        M = FieldMatrix(g, dim)
        for r in range(dim):
            for c in range(dim):
                if A[r, c] != 0:
                    M.set(r, c, A[r, c])
        mats[i] = M
    return FrameSystem(CaseSpec("euc-f0"), g, dim, (1, 2), mats)


# -- propagation --------------------------------------------------------------

def test_plane_frame_constant():
    g = grid(31)
    fs = assemble(CaseSpec("euc-f0"), plane_geom(g))
    ff = integrator.propagate(fs, geom=plane_geom(g), check_compatibility=False)
    assert np.abs(ff.values - ff.values[15, 15]).max() == 0.0


def test_constant_commuting_matches_exponential():
    g = grid(41)
    A = 0.3 * np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0.5]], dtype=complex)
    fs = constant_system(g, A, 3)
    om0 = np.eye(3, dtype=complex)[..., None, None]
    ff = integrator.propagate(fs, omega0=om0, check_compatibility=False)
    # U1 = U2 = A: d/ds Omega = 2A Omega, no t dependence
    errs = []
    for i in range(0, g.n, 8):
        expected = expm(2 * A * g.s[i])
        errs.append(np.abs(ff.values[i, 20, :, :, 0, 0] - expected).max())
    assert max(errs) <= 50 * g.h ** 4


def test_incompatible_system_warns():
    g = grid(21)
    geom = plane_geom(g)
    fs = assemble(CaseSpec("euc-f0"), geom)
    fs.matrix(1).set(0, 1, Field.from_x(g, lambda x1, x2: x2))  # breaks zcc
    with pytest.warns(UserWarning, match="compatibility"):
        integrator.propagate(fs, geom=geom)


def test_curved_body_invariant_drift():
    g = grid(101)
    spec = CaseSpec("cur-f0", c=-1.0)
    b = cases.body_family(spec, g, h0=0.0, f=lambda z: z / 3,
                          fprime=lambda z: 1 / 3 + 0 * z)
    fs = assemble(spec, b.fields)
    ff = integrator.propagate(fs, geom=b.fields, check_compatibility=False)
    F, rep = integrator.reconstruct(ff, b.fields)
    assert rep["position_norm_drift"] <= 100 * g.h ** 2
    assert rep["relation_drift"] <= 100 * g.h ** 2
    assert rep["pass"]


def test_relation_drift_halves_by_3_5():
    drifts = []
    spec = CaseSpec("cur-f0", c=-1.0)
    for n in (51, 101):
        g = grid(n)
        b = cases.body_family(spec, g, h0=0.0, f=lambda z: z / 3,
                              fprime=lambda z: 1 / 3 + 0 * z)
        fs = assemble(spec, b.fields)
        ff = integrator.propagate(fs, geom=b.fields, check_compatibility=False)
        _, rep = integrator.reconstruct(ff, b.fields)
        drifts.append(rep["relation_drift"])
    assert drifts[0] / drifts[1] >= 3.5


def test_gauge_covariance_right_multiplication():
    g = grid(41)
    spec = CaseSpec("cur-f0", c=-1.0)
    b = cases.body_family(spec, g, h0=0.0, f=lambda z: z / 3,
                          fprime=lambda z: 1 / 3 + 0 * z)
    fs = assemble(spec, b.fields)
    om0 = integrator.initial_frame(spec, b.fields)
    rng = np.random.default_rng(2)
    S = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    ff = integrator.propagate(fs, omega0=om0, check_compatibility=False)
    om0S = np.einsum("rcpq,cd->rdpq", om0, S)
    ffS = integrator.propagate(fs, omega0=om0S, check_compatibility=False)
    rhs = np.einsum("ijrcpq,cd->ijrdpq", ff.values, S)
    rel = np.abs(ffS.values - rhs).max() / np.abs(rhs).max()
    assert rel <= 1e-12


def test_path_independence_bounded_by_holonomy():
    g = grid(61)
    spec = CaseSpec("euc-f0")
    b = cases.body_family(spec, g, h0=1.0)
    fs = assemble(spec, b.fields)
    f1 = integrator.propagate(fs, geom=b.fields, check_compatibility=False,
                              order="s-first")
    f2 = integrator.propagate(fs, geom=b.fields, check_compatibility=False,
                              order="t-first")
    diff = np.abs(f1.values - f2.values).max()
    hol = integrator.holonomy(fs)
    scale = np.abs(f1.values).max()
    assert diff <= hol.max * g.n ** 2 * scale


# -- holonomy -----------------------------------------------------------------

def test_holonomy_zero_for_plane():
    g = grid(21)
    fs = assemble(CaseSpec("euc-f0"), plane_geom(g))
    assert integrator.holonomy(fs).max == 0.0


def test_holonomy_convergence_order():
    spec = CaseSpec("euc-f0")
    systems = []
    for n in (51, 101):
        g = grid(n)
        b = cases.body_family(spec, g, h0=1.0)
        systems.append(assemble(spec, b.fields))
    rep = integrator.holonomy_order(*systems)
    assert rep.order >= 2.0


def test_holonomy_perturbation_grows_linearly():
    g = grid(41)
    spec = CaseSpec("euc-f0")
    b = cases.body_family(spec, g, h0=1.0)
    base = integrator.holonomy(assemble(spec, b.fields)).max

    def perturbed(delta):
        fs = assemble(spec, b.fields)
        fs.matrix(1).set(0, 1, Field.constant(g, delta))
        return integrator.holonomy(fs).max

    d1 = perturbed(0.2) - base
    d2 = perturbed(0.4) - base
    assert d2 / d1 == pytest.approx(2.0, rel=0.2)


# -- reconstruction -----------------------------------------------------------

def test_plane_reconstruction_exact():
    g = grid(31)
    geom = plane_geom(g)
    fs = assemble(CaseSpec("euc-f0"), geom)
    ff = integrator.propagate(fs, geom=geom, check_compatibility=False)
    F, rep = integrator.reconstruct(ff, geom)
    assert rep["path_independence"] == 0.0
    assert rep["relation_drift"] == 0.0
    assert rep["metric_recovery_max"] <= 1e-12


def test_sphere_family_metric_recovery():
    g = grid(81)
    spec = CaseSpec("euc-f0")
    b = cases.body_family(spec, g, h0=1.0)
    fs = assemble(spec, b.fields)
    ff = integrator.propagate(fs, geom=b.fields, check_compatibility=False)
    F, rep = integrator.reconstruct(ff, b.fields)
    assert rep["metric_recovery_max"] <= 100 * g.h ** 2
    assert rep["path_independence"] <= 100 * g.h ** 2


# -- initial frames and theta transport ----------------------------------------

CASE_BUILDERS = {
    "euc-f0": lambda g: cases.body_family(CaseSpec("euc-f0"), g, h0=1.0),
    "euc-f2": lambda g: cases.body_family(
        CaseSpec("euc-f2", a=1.0, b=1.0, k=1.0), g, h0=0.5),
    "euc-f3-c1": lambda g: cases.body_family(
        CaseSpec("euc-f3-c1", alpha=0.3 + 0.4j, gamma=1.0, k=1.0), g, h0=0.5),
    "euc-f3-c2": lambda g: cases.body_family(
        CaseSpec("euc-f3-c2", alpha=1.0, beta=0.5 + 0.25j, gamma=1.2), g, h0=1.0),
    "cur-f0": lambda g: cases.body_family(
        CaseSpec("cur-f0", c=-1.0), g, h0=0.0,
        f=lambda z: z / 3, fprime=lambda z: 1 / 3 + 0 * z),
    "hyp-f3-c1": lambda g: cases.hyp_case1_family(
        CaseSpec("hyp-f3-c1", alpha=1.0, beta=1.0, gamma=1.0, k=1.0, c=-1.0), g),
    "hyp-f3-c2": lambda g: cases.hyp_case2_family(CaseSpec("hyp-f3-c2", c=-1.0), g),
}


@pytest.mark.parametrize("tag", CASE_TAGS)
def test_initial_frame_satisfies_relations(tag):
    g = grid(21)
    b = CASE_BUILDERS[tag](g)
    om0 = integrator.initial_frame(b.spec, b.fields)
    rel = integrator.frame_relations(om0[None, None], b.spec)[0, 0]
    exp = integrator.expected_relations(b.spec, b.fields, g, om0.shape[0])
    ic, jc = g.center_index
    exp0 = exp[ic, jc]
    p = max(rel.shape[-2], exp0.shape[-2])
    q = max(rel.shape[-1], exp0.shape[-1])
    err = np.abs(tp_pad(rel, p, q) - tp_pad(exp0, p, q)).max()
    assert err <= 1e-10, (tag, err)


def test_theta_transport_rebuilds_initial_frame():
    g = grid(15)
    spec = CaseSpec("euc-f2", a=1.0, b=2.0, k=1.0)
    b = cases.body_family(spec, g, h0=0.5)
    fs = assemble(spec, b.fields)
    om0 = integrator.initial_frame(spec, b.fields)
    om_grid = np.broadcast_to(om0, (g.n, g.n) + om0.shape).copy()
    omT = integrator.theta_transport(fs, om_grid, 3)
    p = max(omT.shape[-2], om_grid.shape[-2])
    q = max(omT.shape[-1], om_grid.shape[-1])
    assert np.abs(tp_pad(omT, p, q) - tp_pad(om_grid, p, q)).max() == 0.0
