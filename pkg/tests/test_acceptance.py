"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints (and records for the end-of-run summary) a single
``criterion N: PASS|FAIL  detail`` line.
"""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from holophase import analysis, cli, model, selftest, uhlmann, wz
from holophase.linalg import EigenSystem, dagger, fro

TC_CLOSED = 1 / math.log(2 + math.sqrt(3))  # 0.75932567...
TC_LITERAL = 0.759269  # value as printed in the criteria text; 5.7e-5 below the closed form
TEMPS = (0.3, 0.759, 2.0)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def single_jump(phases):
    """True when the sequence is pi ... pi, 0 ... 0 with both parts non-empty."""
    phases = np.asarray(phases)
    if not np.all((phases == math.pi) | (phases == 0.0)):
        return False
    flips = np.count_nonzero(np.diff(phases) != 0)
    return flips == 1 and phases[0] == math.pi and phases[-1] == 0.0


@pytest.mark.slow
def test_criterion_01_equator_sweep():
    loop = model.make_loop("equator", 4096)
    temps = np.geomspace(0.1, 10.0, 200)
    phases = [uhlmann.phase(loop, float(t)).phase for t in temps]
    jump = single_jump(phases)
    tc = analysis.critical_temperature("equator", {"R": 1.0}, method="numeric", steps=4096, tol=1e-7)
    err = abs(tc - TC_CLOSED)
    report(1, jump and err < 1e-5,
           f"single jump={jump}, T_c={tc:.7f}, |T_c - 1/ln(2+sqrt3)|={err:.1e} (tol 1e-5; "
           f"printed literal {TC_LITERAL} differs from the closed form by {TC_CLOSED - TC_LITERAL:.1e})")


def test_criterion_02_equator_closed_form():
    loop = model.make_loop("equator", 4096)
    worst = max(float(fro(uhlmann.holonomy(loop, t).matrix - uhlmann.equator_holonomy_analytic(t)))
                for t in TEMPS)
    report(2, worst < 1e-6, f"max Frobenius gap {worst:.1e} at T in {TEMPS} (tol 1e-6)")


def test_criterion_03_scalar_wz_phase():
    loop = model.make_loop("equator", 4096)
    u = wz.wz_holonomy(loop, "minus").matrix
    gap = float(fro(u + np.eye(2)))
    theta = wz.scalar_wz_phase(loop).phase
    report(3, gap < 1e-6 and theta == math.pi, f"||U_- + 1||={gap:.1e}, theta_WZ={theta!r}")


def test_criterion_04_match_case():
    loop = model.make_loop("equator", 4096)
    theta = uhlmann.phase(loop, 1e-3).phase
    rep = analysis.correspondence(loop)
    ok = abs(theta - math.pi) < 1e-3 and rep.verdict == "match"
    report(4, ok, f"theta_U(T=1e-3)={theta:.6f}, verdict={rep.verdict}")


def test_criterion_05_tb4d_sweep():
    temps = np.geomspace(0.02, 2.0, 200)
    phases = [uhlmann.tb4d_phase_analytic(-3.0, float(t)).phase for t in temps]
    jump = single_jump(phases)
    tc = analysis.critical_temperature("tb4d", {"m": -3.0}, tol=1e-7)
    tc_err = abs(tc - TC_LITERAL)
    loop = model.make_loop("tb4d-kx", 4096, m=-3.0)
    worst = max(float(fro(uhlmann.holonomy(loop, t).matrix - uhlmann.tb4d_holonomy_analytic(-3.0, t)))
                for t in TEMPS)
    ok = jump and tc_err < 1e-4 and worst < 1e-6
    report(5, ok, f"single jump={jump}, T_c={tc:.7f} (|dT|={tc_err:.1e}, tol 1e-4), "
                  f"holonomy gap {worst:.1e} (tol 1e-6)")


def test_criterion_06_phase_diagram():
    t0 = time.perf_counter()
    grid = analysis.phase_diagram((-5.0, -1.0), 81, (0.02, 1.2), 60)
    fit = analysis.dome_fit(grid)
    seconds = time.perf_counter() - t0
    row = grid.phase[:, 0]
    inside = np.abs(grid.m + 3) < 1 - 1e-12
    outside = np.abs(grid.m + 3) > 1 + 1e-12
    row_ok = bool(np.all(row[inside] == math.pi) and np.all(row[outside] == 0.0))
    ok = (row_ok and 0.70 <= fit.amplitude <= 0.80 and 0.40 <= fit.exponent <= 0.50
          and seconds <= 300)
    report(6, ok, f"T=0.02 row ok={row_ok}, A={fit.amplitude:.4f}, p={fit.exponent:.4f}, "
                  f"residual={fit.residual:.1e}, {seconds:.1f} s")


def test_criterion_07_mismatch_case():
    rep = analysis.correspondence(model.make_loop("tb4d-kx", 4096, m=-3.0))
    ok = rep.theta_u_limit == math.pi and rep.theta_wz.phase == 0.0 and rep.verdict == "mismatch"
    report(7, ok, f"theta_U(T->0)={rep.theta_u_limit!r}, theta_WZ={rep.theta_wz.phase!r}, "
                  f"verdict={rep.verdict}")


def test_criterion_08_form_equivalence():
    rng = np.random.default_rng(selftest.SEED)
    gap = block = 0.0
    for _ in range(100):
        p, dp, temp = selftest._random_sample(rng)
        lp, lm = model.thermal_weights(float(model.norm(p)), temp)
        vecs = model.eigensystem_analytic(p).vectors
        eig = EigenSystem(np.array([lp, lp, lm, lm]), vecs)
        a_g = uhlmann.connection_gamma(p, dp, temp)
        a_s = uhlmann.connection_spectral(eig, model.thermal_density_derivative(p, dp, temp))
        a_a = uhlmann.connection_alt(eig, model.frame_derivative(p, dp))
        gap = max(gap, float(fro(a_g - a_s)), float(fro(a_g - a_a)), float(fro(a_s - a_a)))
        b = dagger(vecs) @ a_g @ vecs
        block = max(block, float(np.abs(b[:2, :2]).max()), float(np.abs(b[2:, 2:]).max()))
    report(8, gap < 1e-9 and block < 1e-10, f"max form gap {gap:.1e} (tol 1e-9), "
                                            f"max diagonal-block entry {block:.1e} (tol 1e-10)")


def test_criterion_09_transport_residual():
    sizes = (512, 1024, 2048, 4096)
    res = [uhlmann.transport_check(model.make_loop("equator", n), 0.5) for n in sizes]
    ok = all(a > b for a, b in zip(res, res[1:]))
    report(9, ok, "residuals " + ", ".join(f"N={n}: {r:.2e}" for n, r in zip(sizes, res)))


def test_criterion_10_winding_and_decomposition():
    n = 256
    t = np.linspace(0.0, 1.0, n + 1)
    phase = np.exp(2j * np.pi * t)
    phase[-1] = 1.0
    const = np.tile(np.eye(4, dtype=complex), (n + 1, 1, 1))
    one = const.copy()
    one[:, 0, 0] = phase
    four = const * phase[:, None, None]
    results = [analysis.winding_number(d) for d in (const, one, four)]
    kappas = [r.kappa for r in results]
    resid = max(r.residual for r in results)
    loop = model.make_loop("equator", 4096)
    dec = float(fro(analysis.decomposition_holonomy(loop).matrix - uhlmann.holonomy(loop, 1e-3).matrix))
    ok = kappas == [0, 1, 4] and resid < 1e-6 and dec < 1e-4
    report(10, ok, f"kappa={kappas}, max residual {resid:.1e}, decomposition gap {dec:.1e} (tol 1e-4)")


@pytest.mark.slow
def test_criterion_11_determinism(tmp_path, capsys):
    outs = []
    for threads in (1, 8):
        path = tmp_path / f"diagram_{threads}.csv"
        code = cli.main(["diagram", "--threads", str(threads), "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    same = outs[0] == outs[1]
    report(11, same, f"diagram output {len(outs[0])} bytes, identical for --threads 1 and 8: {same}")
