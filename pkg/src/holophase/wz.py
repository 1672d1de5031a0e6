"""Wilczek-Zee connection, holonomy and scalar phase of the degenerate levels.

Frames are 4x2 arrays whose columns span one degenerate subspace; the
excited (+R) subspace uses the closed-form vectors (a, b) and the ground
(-R) subspace (c, d).  A transported frame equals the initial frame times
the holonomy, F(1) = F(0) U.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GaugeDiscontinuity, GaugePole
from .linalg import (
    OVERLAP_FLOOR,
    align_frame,
    dagger,
    herm_eig,
    herm_eig_batch,
    psd_sqrt,
    unitary_exp_batch,
)
from .model import LoopPath, _check_pole, branch_frame, check_gap, hamiltonian, norm, projectors
from .uhlmann import Holonomy, PhaseResult, phase_from_trace

_SIGNS = {"plus": +1, "minus": -1}


@dataclass(frozen=True)
class WZConnectionSample:
    a_plus: np.ndarray  # (..., 2, 2)
    a_minus: np.ndarray

    def operator(self, p: np.ndarray) -> np.ndarray:
        """Sum over subspaces of F A F^+, the connection as a 4x4 operator."""
        out = 0.0
        for sign, block in ((+1, self.a_plus), (-1, self.a_minus)):
            f = branch_frame(p, sign)
            out = out + f @ block @ dagger(f)
        return out

    def block_matrix(self) -> np.ndarray:
        """4x4 block-diagonal assembly in the (a, b, c, d) basis."""
        shape = self.a_plus.shape[:-2] + (4, 4)
        out = np.zeros(shape, dtype=np.complex128)
        out[..., :2, :2] = self.a_plus
        out[..., 2:, 2:] = self.a_minus
        return out


@dataclass(frozen=True)
class WZHolonomy:
    u_minus: np.ndarray
    u_plus: np.ndarray
    steps: int


def _subspace_sign(subspace: str) -> int:
    try:
        return _SIGNS[subspace]
    except KeyError:
        raise ValueError(f"subspace must be 'plus' or 'minus', got {subspace!r}") from None


def wz_block_analytic(p: np.ndarray, dp: np.ndarray, sign: int) -> np.ndarray:
    """Closed-form 2x2 WZ connection of the ``sign`` subspace in the (a,b) or (c,d) frame.

    The printed off-diagonal element is <second|d first>; the other corner
    follows from anti-Hermiticity.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    check_gap(p)
    _check_pole(p, sign)
    r1, r2, r3, r4, r5 = np.moveaxis(p, -1, 0)
    d1, d2, d3, d4, d5 = np.moveaxis(dp, -1, 0)
    r = norm(p)
    den = 2j * r * (r - sign * r5)
    diag = (r2 * d1 - r1 * d2 - r4 * d3 + r3 * d4) / den
    off = (r1 * d4 - r4 * d1 - r2 * d3 + r3 * d2 + 1j * (r1 * d3 - r3 * d1 + r2 * d4 - r4 * d2)) / den
    out = np.empty(np.shape(r) + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = diag
    out[..., 1, 1] = -diag
    out[..., 1, 0] = off
    out[..., 0, 1] = -np.conj(off)
    return out


def wz_connection_analytic(p: np.ndarray, dp: np.ndarray) -> WZConnectionSample:
    return WZConnectionSample(wz_block_analytic(p, dp, +1), wz_block_analytic(p, dp, -1))


def _overlap_block(f0: np.ndarray, f1: np.ndarray) -> np.ndarray:
    ov = dagger(f0) @ f1
    smin = np.linalg.svd(ov, compute_uv=False).min(axis=-1)
    if np.any(smin < OVERLAP_FLOOR):
        raise GaugeDiscontinuity(f"successive frames nearly orthogonal (s_min = {float(np.min(smin)):.3e})")
    a = dagger(f0) @ (f1 - f0)
    return 0.5 * (a - dagger(a))


def wz_connection_numeric(frame_prev: np.ndarray, frame_next: np.ndarray) -> WZConnectionSample:
    """Finite-difference <psi_i|d psi_j> from two 4x4 frames with columns (a, b, c, d)."""
    frame_prev = np.asarray(frame_prev, dtype=np.complex128)
    frame_next = np.asarray(frame_next, dtype=np.complex128)
    return WZConnectionSample(
        _overlap_block(frame_prev[..., :, :2], frame_next[..., :, :2]),
        _overlap_block(frame_prev[..., :, 2:], frame_next[..., :, 2:]),
    )


def wz_holonomy_from_frames(frames: np.ndarray) -> Holonomy:
    """Holonomy from N+1 sampled frames (N+1, 4, D) of one subspace.

    Frames must be gauge-aligned between neighbours.  When the last frame is
    F_0 C rather than F_0, the closing rotation C is folded in: U = C W.
    """
    frames = np.asarray(frames, dtype=np.complex128)
    conn = _overlap_block(frames[:-1], frames[1:])
    prod = kernels.ordered_product(unitary_exp_batch(-conn))
    closing = dagger(frames[0]) @ frames[-1]
    return Holonomy(closing @ prod, frames.shape[0] - 1)


def _numeric_frames(loop: LoopPath, sign: int) -> np.ndarray:
    """Eigenframes of H along the loop, rotated for continuity and started at frame 0."""
    _, vecs = herm_eig_batch(hamiltonian(loop.points))
    cols = slice(2, 4) if sign > 0 else slice(0, 2)  # eigenvalues ascending
    raw = vecs[:, :, cols]
    out = np.empty_like(raw)
    out[0] = raw[0]
    for k in range(1, raw.shape[0]):
        out[k] = align_frame(out[k - 1], raw[k])
    return out


def wz_holonomy(loop: LoopPath, subspace: str = "minus", method: str = "analytic") -> Holonomy:
    """P exp(-oint A) on one degenerate subspace (2x2).

    ``analytic`` integrates the closed-form connection at segment midpoints in
    the closed-form frame; ``transport`` aligns numerically computed
    eigenframes sample to sample and reads U off the transported endpoint.
    """
    sign = _subspace_sign(subspace)
    if method == "analytic":
        conn = wz_block_analytic(loop.mid_points, loop.increments, sign)
        return Holonomy(kernels.ordered_product(unitary_exp_batch(-conn)), loop.steps)
    if method == "transport":
        check_gap(loop.points, scale=loop.scale)
        frames = _numeric_frames(loop, sign)
        # Transport G_{k+1} = align(G_k, F_{k+1}) keeps G parallel; G_N = F_0 U.
        u = dagger(frames[0]) @ frames[-1]
        return Holonomy(u, loop.steps)
    raise ValueError(f"method must be 'analytic' or 'transport', got {method!r}")


def wz_holonomies(loop: LoopPath, method: str = "analytic") -> WZHolonomy:
    return WZHolonomy(
        wz_holonomy(loop, "minus", method).matrix, wz_holonomy(loop, "plus", method).matrix, loop.steps
    )


def scalar_wz_phase(loop: LoopPath, method: str = "analytic", hol: Holonomy | None = None) -> PhaseResult:
    """arg Tr_-[P_- U_-] / D for the ground subspace (D = 2)."""
    if hol is None:
        hol = wz_holonomy(loop, "minus", method)
    return phase_from_trace(np.trace(hol.matrix) / hol.dim)


def _ground_frame_at(p: np.ndarray) -> np.ndarray:
    try:
        return branch_frame(p, -1)
    except GaugePole:
        return herm_eig(hamiltonian(p)).vectors[:, :2]


def scalar_wz_phase_purified(loop: LoopPath, method: str = "analytic") -> PhaseResult:
    """Overlap <W_-(0)|W_-(tau)> with W_- = sqrt(P_-) U / sqrt(D).

    The ground holonomy is lifted to the 4x4 unitary F U F^+ + (1 - P_-),
    which acts as U on the ground subspace and trivially elsewhere.
    """
    hol = wz_holonomy(loop, "minus", method)
    p0 = loop.points[0]
    frame = _ground_frame_at(p0)
    _, p_minus = projectors(p0)
    lift = frame @ hol.matrix @ dagger(frame) + (np.eye(4) - p_minus)
    dim = hol.dim
    root = psd_sqrt(0.5 * (p_minus + dagger(p_minus)))
    w0 = root / np.sqrt(dim)
    w1 = root @ lift / np.sqrt(dim)
    return phase_from_trace(np.trace(dagger(w0) @ w1))
