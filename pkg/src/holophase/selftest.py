"""Built-in invariant checks behind ``holophase selftest``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import model, uhlmann, wz
from .errors import HolophaseError
from .linalg import EigenSystem, dagger, fro

SEED = 20240611


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_sample(rng: np.random.Generator):
    # R/T <= 10 keeps lambda_+ ~ e^{-2R/T}/2 well above the rank floor.
    r = rng.uniform(0.3, 3.0)
    p = rng.normal(size=5)
    p *= r / np.linalg.norm(p)
    dp = rng.normal(size=5)
    temp = float(r * np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    return p, dp, temp


def _three_forms(p, dp, temp):
    lp, lm = model.thermal_weights(float(model.norm(p)), temp)
    vecs = model.eigensystem_analytic(p).vectors
    eig = EigenSystem(np.array([lp, lp, lm, lm]), vecs)
    a_gamma = uhlmann.connection_gamma(p, dp, temp)
    a_spec = uhlmann.connection_spectral(eig, model.thermal_density_derivative(p, dp, temp))
    a_alt = uhlmann.connection_alt(eig, model.frame_derivative(p, dp))
    return eig, a_gamma, a_spec, a_alt


def suite_clifford(quick: bool) -> tuple[bool, str]:
    g = model.GAMMA
    anti = np.einsum("aij,bjk->abik", g, g) + np.einsum("bij,ajk->abik", g, g)
    target = 2.0 * np.eye(5)[:, :, None, None] * np.eye(4)
    err = float(np.abs(anti - target).max())
    herm = float(np.abs(g - dagger(g)).max())
    return err < 1e-14 and herm == 0.0, f"max |{{G_a,G_b}} - 2 delta| = {err:.1e}"


def suite_form_equivalence(quick: bool, samples: int = 20) -> tuple[bool, str]:
    tol = 1e-4 if quick else 1e-9
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(samples):
        _, a_gamma, a_spec, a_alt = _three_forms(*_random_sample(rng))
        worst = max(worst, float(fro(a_gamma - a_spec)), float(fro(a_gamma - a_alt)))
    return worst < tol, f"max Frobenius gap {worst:.1e} (tol {tol:g})"


def suite_unitarity(quick: bool) -> tuple[bool, str]:
    tol = 1e-9
    n = uhlmann.QUICK_STEPS if quick else uhlmann.DEFAULT_STEPS
    worst = 0.0
    for loop in (model.make_loop("equator", n), model.make_loop("latitude", n, theta=0.9)):
        for temp in (0.3, 1.0):
            u = uhlmann.holonomy(loop, temp).matrix
            worst = max(worst, float(fro(dagger(u) @ u - np.eye(4))))
        for sub in ("plus", "minus"):
            u = wz.wz_holonomy(loop, sub).matrix
            worst = max(worst, float(fro(dagger(u) @ u - np.eye(2))))
    return worst < tol, f"max ||U^+U - 1||_F = {worst:.1e}"


def suite_block_vanishing(quick: bool, samples: int = 20) -> tuple[bool, str]:
    tol = 1e-4 if quick else 1e-10
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(samples):
        eig, a_gamma, _, _ = _three_forms(*_random_sample(rng))
        b = dagger(eig.vectors) @ a_gamma @ eig.vectors
        worst = max(worst, float(np.abs(b[:2, :2]).max()), float(np.abs(b[2:, 2:]).max()))
    return worst < tol, f"max |diagonal block entry| = {worst:.1e} (tol {tol:g})"


def suite_richardson(quick: bool) -> tuple[bool, str]:
    """Sampled equator (chord midpoints): error must drop >= 3.5x per doubling."""
    sizes = (256, 512, 1024) if quick else (512, 1024, 2048)
    temp = 1.0
    exact = uhlmann.equator_holonomy_analytic(temp)
    errs = []
    for n in sizes:
        pts = model.make_loop("equator", n).points
        loop = model.make_loop("explicit", points=pts)
        errs.append(float(fro(uhlmann.holonomy(loop, temp).matrix - exact)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(r >= 3.5 for r in ratios)
    return ok, "errors " + ", ".join(f"{e:.2e}" for e in errs) + " ratios " + ", ".join(f"{r:.2f}" for r in ratios)


def suite_closed_form(quick: bool) -> tuple[bool, str]:
    tol = 1e-4 if quick else 1e-6
    n = uhlmann.QUICK_STEPS if quick else uhlmann.DEFAULT_STEPS
    loop = model.make_loop("equator", n)
    worst = 0.0
    for temp in (0.3, 0.759, 2.0):
        u = uhlmann.holonomy(loop, temp).matrix
        worst = max(worst, float(fro(u - uhlmann.equator_holonomy_analytic(temp))))
    return worst < tol, f"equator holonomy vs closed form {worst:.1e} (tol {tol:g})"


SUITES: dict[str, Callable[[bool], tuple[bool, str]]] = {
    "clifford": suite_clifford,
    "form-equivalence": suite_form_equivalence,
    "unitarity": suite_unitarity,
    "block-vanishing": suite_block_vanishing,
    "richardson": suite_richardson,
    "closed-form": suite_closed_form,
}


def run(quick: bool = False) -> list[SuiteResult]:
    out = []
    for name, fn in SUITES.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn(quick)
        except (HolophaseError, ArithmeticError, ValueError) as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append(SuiteResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(results: list[SuiteResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    return "\n".join(lines) + "\n"
