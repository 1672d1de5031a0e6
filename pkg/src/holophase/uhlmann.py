"""Uhlmann connection, holonomy and phase for thermal states of the model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GapClosureOnPath, NoConvergence, RankDeficient
from .linalg import EigenSystem, align_frame, dagger, degenerate_clusters, psd_sqrt, unitary_exp_batch
from .model import (
    GAP_FLOOR,
    LoopPath,
    check_gap,
    check_temperature,
    chi,
    norm,
    thermal_density,
)

MAG_FLOOR = 1e-9
# Traces here have modulus <= 1; an imaginary part below this is roundoff and
# the trace is treated as real, so quantized phases come out as exactly 0 or pi.
REAL_SNAP_ATOL = 1e-12
RANK_FLOOR = 1e-14
DEFAULT_STEPS = 4096
QUICK_STEPS = 512
QUAD_START = 64
QUAD_TOL = 1e-9
QUAD_MAX = 2**20

# Constant matrix of the kx-loop connection; exp(-I K) = cos(I) - sin(I) K.
_KX_LOOP_MATRIX = np.array(
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=np.complex128
)


@dataclass(frozen=True)
class Holonomy:
    matrix: np.ndarray
    steps: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "steps": self.steps,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Holonomy":
        mat = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
        if mat.shape != (data["dim"], data["dim"]):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {data['dim']}")
        return cls(mat, int(data["steps"]))


@dataclass(frozen=True)
class PhaseResult:
    phase: float  # in (-pi, pi]; nan when near-critical
    trace_value: complex
    magnitude: float
    status: str  # "defined" | "near-critical"

    @property
    def defined(self) -> bool:
        return self.status == "defined"


def principal_arg(z: complex) -> float:
    z = complex(z)
    if abs(z.imag) <= REAL_SNAP_ATOL:
        return 0.0 if z.real >= 0.0 else math.pi
    phase = math.atan2(z.imag, z.real)
    return math.pi if phase == -math.pi else phase


def phase_from_trace(z: complex, mag_floor: float = MAG_FLOOR) -> PhaseResult:
    z = complex(z)
    mag = abs(z)
    if mag < mag_floor:
        return PhaseResult(math.nan, z, mag, "near-critical")
    return PhaseResult(principal_arg(z), z, mag, "defined")


# ---------------------------------------------------------------------------
# Connection forms
# ---------------------------------------------------------------------------


def gamma_form_matrix(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """The 4x4 matrix M(R, dR) with A_U = -(1 - sech(R/T)) M / (2 R^2).  Batches over leading axes."""
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    r1, r2, r3, r4, r5 = np.moveaxis(p, -1, 0)
    d1, d2, d3, d4, d5 = np.moveaxis(dp, -1, 0)
    i = 1j
    m = np.empty(np.broadcast(r1, d1).shape + (4, 4), dtype=np.complex128)
    m[..., 0, 0] = i * (r2 * d1 - r1 * d2 + r4 * d3 - r3 * d4)
    m[..., 0, 1] = (r1 - i * r2) * (d3 - i * d4) - (r3 - i * r4) * (d1 - i * d2)
    m[..., 0, 2] = -r5 * d3 + i * r5 * d4 + (r3 - i * r4) * d5
    m[..., 0, 3] = -r5 * d1 + i * r5 * d2 + (r1 - i * r2) * d5
    m[..., 1, 0] = (r3 + i * r4) * (d1 + i * d2) - (r1 + i * r2) * (d3 + i * d4)
    m[..., 1, 1] = i * (-r2 * d1 + r1 * d2 - r4 * d3 + r3 * d4)
    m[..., 1, 2] = (r1 + i * r2) * d5 - r5 * (d1 + i * d2)
    m[..., 1, 3] = r5 * d3 + i * r5 * d4 - (r3 + i * r4) * d5
    m[..., 2, 0] = r5 * d3 + i * r5 * d4 - (r3 + i * r4) * d5
    m[..., 2, 1] = r5 * d1 - i * r5 * d2 - (r1 - i * r2) * d5
    m[..., 2, 2] = i * (r2 * d1 - r1 * d2 - r4 * d3 + r3 * d4)
    m[..., 2, 3] = (r1 - i * r2) * (d3 + i * d4) - (r3 + i * r4) * (d1 - i * d2)
    m[..., 3, 0] = r5 * d1 + i * r5 * d2 - (r1 + i * r2) * d5
    m[..., 3, 1] = -r5 * d3 + i * r5 * d4 + (r3 - i * r4) * d5
    m[..., 3, 2] = (r3 - i * r4) * (d1 + i * d2) - (r1 + i * r2) * (d3 - i * d4)
    m[..., 3, 3] = i * (-r2 * d1 + r1 * d2 + r4 * d3 - r3 * d4)
    return m


def connection_gamma(p: np.ndarray, dp: np.ndarray, temperature: float) -> np.ndarray:
    """Uhlmann connection contracted with ``dp`` in the Gamma-matrix form."""
    check_temperature(temperature)
    p = np.asarray(p, dtype=float)
    check_gap(p)
    r = norm(p)
    pref = -chi(r, temperature) / (2.0 * r * r)
    return pref[..., None, None] * gamma_form_matrix(p, dp)


def connection_spectral(eig: EigenSystem, drho: np.ndarray) -> np.ndarray:
    """Uhlmann connection from rho's spectrum and a direction d(rho).

    d(sqrt rho) comes from the first divided difference of sqrt in the
    eigenbasis: (d sqrt rho)_ij = (d rho)_ij / (sqrt l_i + sqrt l_j).
    """
    lam = np.asarray(eig.values, dtype=float)
    if lam.min() <= RANK_FLOOR:
        raise RankDeficient(f"density matrix eigenvalue {lam.min():.3e} is not positive")
    v = eig.vectors
    d = dagger(v) @ drho @ v
    sq = np.sqrt(lam)
    dsq = d / (sq[:, None] + sq[None, :])
    comm = dsq * (sq[None, :] - sq[:, None])  # [d sqrt(rho), sqrt(rho)] in the eigenbasis
    return v @ (-comm / (lam[:, None] + lam[None, :])) @ dagger(v)


def connection_alt(eig: EigenSystem, dvecs: np.ndarray) -> np.ndarray:
    """Uhlmann connection from eigenvector derivatives d|j> (columns of ``dvecs``).

    Coefficients (sqrt l_i - sqrt l_j)^2 / (l_i + l_j) vanish inside each
    degenerate block, so only inter-level couplings survive.
    """
    lam = np.asarray(eig.values, dtype=float)
    if lam.min() <= RANK_FLOOR:
        raise RankDeficient(f"density matrix eigenvalue {lam.min():.3e} is not positive")
    v = eig.vectors
    sq = np.sqrt(lam)
    coef = (sq[:, None] - sq[None, :]) ** 2 / (lam[:, None] + lam[None, :])
    return -v @ (coef * (dagger(v) @ dvecs)) @ dagger(v)


def aligned_frame_step(eig_ref: EigenSystem, eig_next: EigenSystem) -> np.ndarray:
    """Finite difference of two numerically computed eigenbases.

    Each degenerate cluster of ``eig_next`` is first rotated onto
    ``eig_ref`` so that arbitrary gauge jumps do not enter the difference.
    """
    v_next = np.array(eig_next.vectors, copy=True)
    for idx in degenerate_clusters(eig_ref.values):
        v_next[:, idx] = align_frame(eig_ref.vectors[:, idx], v_next[:, idx])
    return v_next - eig_ref.vectors


# ---------------------------------------------------------------------------
# Holonomy and phase
# ---------------------------------------------------------------------------


def _segment_factors(loop: LoopPath, temperature: float) -> np.ndarray:
    check_temperature(temperature)
    check_gap(loop.points, scale=loop.scale)
    check_gap(loop.mid_points, scale=loop.scale)
    conn = connection_gamma(loop.mid_points, loop.increments, temperature)
    return unitary_exp_batch(-conn)


def holonomy(loop: LoopPath, temperature: float) -> Holonomy:
    """Path-ordered exp(-oint A_U), later segments multiplied on the left."""
    factors = _segment_factors(loop, temperature)
    return Holonomy(kernels.ordered_product(factors), loop.steps)


def partial_holonomies(loop: LoopPath, temperature: float) -> np.ndarray:
    """Phase factors U_k at every sample, U_0 = 1 and U_{k+1} = E_k U_k."""
    return kernels.cumulative_product(_segment_factors(loop, temperature))


def phase(loop: LoopPath, temperature: float, hol: Holonomy | None = None) -> PhaseResult:
    """arg Tr[rho(0) U] with rho(0) the thermal state at the loop's first sample."""
    if hol is None:
        hol = holonomy(loop, temperature)
    rho0 = thermal_density(loop.points[0], temperature).rho
    return phase_from_trace(np.trace(rho0 @ hol.matrix))


def transport_check(loop: LoopPath, temperature: float) -> float:
    """Largest discrete violation of W^+ dW = dW^+ W along the horizontal lift, per unit t."""
    us = partial_holonomies(loop, temperature)
    w = np.array([psd_sqrt(thermal_density(p, temperature).rho) for p in loop.points]) @ us
    dw = np.diff(w, axis=0)
    lhs = dagger(w[:-1]) @ dw
    viol = np.sqrt(np.sum(np.abs(lhs - dagger(lhs)) ** 2, axis=(1, 2)))
    return float(viol.max() * loop.steps)


# ---------------------------------------------------------------------------
# Closed-form references
# ---------------------------------------------------------------------------


def equator_holonomy_analytic(temperature: float, radius: float = 1.0) -> np.ndarray:
    """exp(-i pi chi sigma_3) (+) exp(i pi chi sigma_1)."""
    check_temperature(temperature)
    x = math.pi * float(chi(radius, temperature))
    out = np.zeros((4, 4), dtype=np.complex128)
    out[0, 0] = np.exp(-1j * x)
    out[1, 1] = np.exp(1j * x)
    out[2, 2] = out[3, 3] = math.cos(x)
    out[2, 3] = out[3, 2] = 1j * math.sin(x)
    return out


def equator_phase_analytic(temperature: float, radius: float = 1.0) -> PhaseResult:
    """arg cos(pi chi); rho(0) has unit trace so no extra overlap factor enters."""
    check_temperature(temperature)
    return phase_from_trace(math.cos(math.pi * float(chi(radius, temperature))))


def _simpson_converged(a: float, temperature: float, start: int, tol: float, max_points: int) -> float:
    n = start
    prev = kernels.simpson_kx(a, temperature, n)
    while n < max_points:
        n *= 2
        cur = kernels.simpson_kx(a, temperature, n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise NoConvergence(f"Simpson did not reach {tol:g} within {max_points} points (m+3={a})")


def tb4d_I(
    m: float,
    temperature: float,
    quad_points: int | None = None,
    tol: float = QUAD_TOL,
    max_points: int = QUAD_MAX,
) -> float:
    """Integral of (sech(R/T) - 1)/(2R^2) [(m+3) cos k + 1] over k in [0, 2 pi].

    ``quad_points`` fixes the (even) number of Simpson intervals; by default
    the count doubles from 64 until successive values differ by < ``tol``.
    """
    check_temperature(temperature)
    a = float(m) + 3.0
    rmin = abs(abs(a) - 1.0)
    if rmin <= GAP_FLOOR:
        raise GapClosureOnPath(f"gap closes on the kx loop at m = {m}")
    if quad_points is not None:
        if quad_points < 2 or quad_points % 2:
            raise ValueError("quad_points must be a positive even number")
        return kernels.simpson_kx(a, temperature, quad_points)
    return _simpson_converged(a, temperature, QUAD_START, tol, max_points)


def tb4d_holonomy_analytic(m: float, temperature: float, integral: float | None = None) -> np.ndarray:
    i_val = tb4d_I(m, temperature) if integral is None else integral
    return math.cos(i_val) * np.eye(4) - math.sin(i_val) * _KX_LOOP_MATRIX


def tb4d_phase_analytic(m: float, temperature: float, quad_points: int | None = None) -> PhaseResult:
    """arg cos I(m, T); rho(0) is traceless off the identity so only cos I survives."""
    return phase_from_trace(math.cos(tb4d_I(m, temperature, quad_points)))
