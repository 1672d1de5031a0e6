import json
import math

import numpy as np
import pytest
from conftest import constant_loop

from holophase import analysis, model, uhlmann, wz
from holophase.errors import EmptyDome, InvalidConfig, NoBracket, NotClosed, StepTooLarge
from holophase.linalg import fro

TC = 1 / math.log(2 + math.sqrt(3))


# -- critical temperature -------------------------------------------------------


def test_tc_closed_form_value():
    # sech(1/T) = 1/2  <=>  1/T = arccosh(2)
    assert analysis.equator_tc_closed_form() == pytest.approx(1 / math.acosh(2.0), rel=1e-15)
    assert analysis.equator_tc_closed_form() == pytest.approx(0.7593257, abs=1e-7)


@pytest.mark.parametrize("radius", [1.0, 2.5])
def test_tc_equator(radius):
    tc = analysis.critical_temperature("equator", {"R": radius}, tol=1e-6 * radius)
    assert abs(tc - radius * TC) < 1e-6 * radius


def test_tc_tb4d():
    assert analysis.critical_temperature("tb4d", {"m": -3}) == pytest.approx(TC, abs=1e-6)
    assert analysis.critical_temperature("tb4d", {"m": -1.5}) is None
    with pytest.raises(NoBracket):
        analysis.critical_temperature("tb4d", {"m": -1.5}, strict=True)
    tc_inside = analysis.critical_temperature("tb4d", {"m": -2.5})
    assert 0 < tc_inside < TC


def test_tc_numeric_route():
    tc = analysis.critical_temperature("equator", {"R": 1.0}, method="numeric", steps=512, tol=1e-7)
    assert tc == pytest.approx(TC, abs=1e-6)


def test_tc_bracket_given_directly():
    assert analysis.critical_temperature("equator", bracket=(0.5, 1.0)) == pytest.approx(TC, abs=1e-6)


def test_tc_bad_config():
    with pytest.raises(InvalidConfig):
        analysis.critical_temperature("torus")
    with pytest.raises(InvalidConfig):
        analysis.critical_temperature("equator", bracket=(1.0, 0.5))
    with pytest.raises(InvalidConfig):
        analysis.critical_temperature("equator", method="guess")


# -- phase diagram ------------------------------------------------------------------


def test_diagram_low_and_high_t_rows():
    ms = (-4.5, -1.5)
    grid = analysis.phase_diagram((-4.5, -1.5), 7, (0.01, 10.0), 2)
    col = {round(float(m), 6): j for j, m in enumerate(grid.m)}
    for m in (-3.5, -3.0, -2.5):
        assert grid.phase[col[m], 0] == math.pi
    for m in ms:
        assert grid.phase[col[m], 0] == 0.0
    gapless = np.abs(np.abs(grid.m + 3) - 1) > 1e-12
    assert np.all(grid.phase[gapless, 1] == 0.0)
    assert np.all(np.isnan(grid.phase[~gapless]))


def test_diagram_gap_columns_marked():
    grid = analysis.phase_diagram((-5, -1), 9, (0.1, 1.0), 3)
    for j, m in enumerate(grid.m):
        if abs(abs(m + 3) - 1) < 1e-12:
            assert all(s == "error:GAP_CLOSURE_ON_PATH" for s in grid.status[j])
            assert np.all(np.isnan(grid.phase[j]))
        else:
            assert all(s == "defined" for s in grid.status[j])


def test_diagram_axes_and_threads():
    a = analysis.phase_diagram((-5, -1), 21, (0.02, 1.2), 15, threads=1, T_log=True)
    b = analysis.phase_diagram((-5, -1), 21, (0.02, 1.2), 15, threads=8, T_log=True)
    assert np.all(np.diff(a.m) > 0) and np.all(np.diff(a.T) > 0)
    assert a.phase.shape == (21, 15) == a.status.shape
    assert np.array_equal(a.phase, b.phase, equal_nan=True)
    assert np.array_equal(a.integral, b.integral, equal_nan=True)
    assert (a.status == b.status).all()


@pytest.mark.parametrize("args", [
    ((-1, -5), 5, (0.1, 1), 5),
    ((-5, -1), 5, (0.0, 1), 5),
    ((-5, -1), 5, (1.0, 1.0), 5),
    ((-5, -1), 1, (0.1, 1), 5),
])
def test_diagram_invalid(args):
    with pytest.raises(InvalidConfig):
        analysis.phase_diagram(*args)


def test_dome_fit_bands():
    grid = analysis.phase_diagram((-5, -1), 81, (0.02, 1.2), 60)
    fit = analysis.dome_fit(grid)
    assert 0.70 <= fit.amplitude <= 0.80
    assert 0.40 <= fit.exponent <= 0.50
    assert fit.residual < 5e-3
    assert np.all(np.abs(fit.m + 3) <= 0.95 + 1e-12)
    centre = int(np.argmin(np.abs(fit.m + 3)))
    assert fit.tc[centre] == pytest.approx(TC, abs=1e-5)


def test_dome_fit_empty():
    with pytest.raises(EmptyDome):
        analysis.dome_fit(analysis.phase_diagram((-4, -2), 11, (3.0, 10.0), 5))


# -- winding number -------------------------------------------------------------------


def diag_winding(n, w=1, dim=4, full=False):
    t = np.linspace(0, 1, n + 1)
    out = np.tile(np.eye(dim, dtype=complex), (n + 1, 1, 1))
    if full:
        out *= np.exp(2j * np.pi * w * t)[:, None, None]
    else:
        out[:, 0, 0] = np.exp(2j * np.pi * w * t)
    out[-1] = out[0]
    return out


def test_winding_examples():
    assert analysis.winding_number(np.tile(np.eye(4), (9, 1, 1))).kappa == 0
    one = analysis.winding_number(diag_winding(64))
    assert one.kappa == 1 and one.residual < 1e-6
    four = analysis.winding_number(diag_winding(64, full=True))
    assert four.kappa == 4 and four.residual < 1e-6


def test_winding_additive():
    a, b = diag_winding(32, 1), diag_winding(48, -3, full=True)
    cat = np.concatenate([a, b[1:] @ a[-1]])
    ka, kb = analysis.winding_number(a).kappa, analysis.winding_number(b).kappa
    assert analysis.winding_number(cat).kappa == ka + kb == -11


def test_winding_errors():
    d = diag_winding(64)
    with pytest.raises(NotClosed):
        analysis.winding_number(d[:-1])
    with pytest.raises(StepTooLarge):
        analysis.winding_number(diag_winding(4))


# -- zero-temperature decomposition ------------------------------------------------------


def test_zero_t_low_temperature_limit(rng):
    for _ in range(10):
        p = model.sphere_point(rng.uniform(0.2, 2.9), rng.uniform(0, 2 * np.pi), 1.3)
        dp = rng.normal(size=5)
        a_u = uhlmann.connection_gamma(p, dp, 1e-4 * 1.3)
        assert fro(a_u - analysis.zero_t_connection(p, dp)) < 1e-3


def test_zero_t_eigenbasis_blocks(rng):
    for _ in range(10):
        p = model.sphere_point(rng.uniform(0.2, 2.9), rng.uniform(0, 2 * np.pi))
        dp = rng.normal(size=5)
        v = model.eigensystem_analytic(p).vectors
        z = v.conj().T @ analysis.zero_t_connection(p, dp) @ v
        # -sum |d psi><psi| cancels A_WZ on the diagonal blocks ...
        assert fro(z[:2, :2]) < 1e-10 and fro(z[2:, 2:]) < 1e-10
        # ... while the A_WZ term alone carries exactly the WZ blocks.
        w = v.conj().T @ analysis.wz_operator(p, dp) @ v
        s = wz.wz_connection_analytic(p, dp)
        assert fro(w[:2, :2] - s.a_plus) < 1e-10 and fro(w[2:, 2:] - s.a_minus) < 1e-10
        # off-diagonal blocks are the inter-level part of -V^+ dV
        dv = v.conj().T @ model.frame_derivative(p, dp)
        assert fro(z[:2, 2:] + dv[:2, 2:]) < 1e-10


def test_zero_t_zero_tangent():
    p = model.sphere_point(1.0, 2.0)
    assert fro(analysis.zero_t_connection(p, np.zeros(5))) == 0.0


def test_decomposition_holonomy_equator():
    loop = model.make_loop("equator", 4096)
    diff = fro(analysis.decomposition_holonomy(loop).matrix - uhlmann.holonomy(loop, 1e-3).matrix)
    assert diff < 1e-4


def test_unitary_family_checks():
    eq = model.make_loop("equator", 256)
    assert analysis.is_unitary_family(eq)
    assert not analysis.is_unitary_family(model.make_loop("tb4d-kx", 256, m=-2.5))
    d = analysis.unitary_family_samples(eq)
    h0 = model.hamiltonian(eq.points[0])
    for k in (0, 50, 200):
        assert fro(d[k] @ h0 @ d[k].conj().T - model.hamiltonian(eq.points[k])) < 1e-12


def test_commutator_diagnostics_equator():
    op, block = analysis.commutator_norms(model.make_loop("equator", 256))
    assert op < 1e-10
    assert block > 1.0


# -- correspondence -----------------------------------------------------------------------


def test_correspondence_equator_match():
    rep = analysis.correspondence(model.make_loop("equator", 2048))
    assert rep.verdict == "match" and rep.converged
    assert rep.theta_u_limit == pytest.approx(math.pi, abs=1e-3)
    assert rep.theta_wz.phase == math.pi
    assert rep.unitary_family and rep.kappa == 0 and rep.kappa_residual < 1e-6
    json.dumps(rep.to_dict())


def test_correspondence_kx_mismatch():
    rep = analysis.correspondence(model.make_loop("tb4d-kx", 1024, m=-3))
    assert rep.verdict == "mismatch"
    assert rep.theta_u_limit == math.pi and rep.theta_wz.phase == 0.0
    assert rep.theta_wz_transported.phase == math.pi
    assert any("transported" in n for n in rep.notes)


def test_correspondence_constant_match():
    rep = analysis.correspondence(constant_loop())
    assert rep.verdict == "match" and rep.theta_u_limit == 0.0 and rep.theta_wz.phase == 0.0
    assert rep.kappa == 0


def test_correspondence_undecided_when_ladder_unconverged():
    # rungs straddle T_c, so the ladder is still moving at its last rung pair
    rep = analysis.correspondence(model.make_loop("equator", 512), [2.0, 1.0, 0.8, 0.7])
    assert rep.verdict == "undecided" and not rep.converged


def test_correspondence_ladder_validation():
    loop = model.make_loop("equator", 64)
    with pytest.raises(InvalidConfig):
        analysis.correspondence(loop, [0.1, 0.01, 0.001])
    with pytest.raises(InvalidConfig):
        analysis.correspondence(loop, [0.1, 0.2, 0.01, 0.001])


def test_circular_distance():
    assert analysis.circular_distance(math.pi, -math.pi) == 0.0
    assert analysis.circular_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
