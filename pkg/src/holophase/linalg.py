"""Small dense complex linear algebra on top of the Jacobi kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    GaugeDiscontinuity,
    NoConvergence,
    NotAntiHermitian,
    NotHermitian,
    NotPSD,
    RankDeficient,
)

HERMITIAN_RTOL = 1e-12
ANTI_HERMITIAN_RTOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
# Eigenvalues closer than this (relative to ||H||) belong to one cluster.
DEGENERACY_RTOL = 1e-10
PSD_FLOOR = 1e-12
RANK_FLOOR = 1e-12
# Smallest singular value of an inter-frame overlap before alignment is refused.
OVERLAP_FLOOR = 1e-3


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray  # ascending
    vectors: np.ndarray  # columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.conj(m), -1, -2)


def fro(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))


def _eigh_checked(h: np.ndarray):
    w, v, sweeps = kernels.jacobi_eigh_batch(h, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if np.any(sweeps < 0):
        raise NoConvergence(f"Jacobi exceeded {JACOBI_MAX_SWEEPS} sweeps")
    return w, v


def herm_eig_batch(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=np.complex128)
    skew = fro(h - dagger(h))
    if np.any(skew > HERMITIAN_RTOL * np.maximum(fro(h), 1e-300)):
        raise NotHermitian(f"||H - H^+||_F = {float(np.max(skew)):.3e}")
    return _eigh_checked(h)


def herm_eig(h: np.ndarray) -> EigenSystem:
    """Eigen-decompose a Hermitian matrix with cyclic Jacobi.

    Within a degenerate cluster the returned basis is orthonormal but
    otherwise arbitrary.
    """
    w, v = herm_eig_batch(np.asarray(h)[None])
    return EigenSystem(w[0], v[0])


def check_anti_hermitian(a: np.ndarray) -> None:
    skew = fro(a + dagger(a))
    if np.any(skew >= ANTI_HERMITIAN_RTOL * (1.0 + fro(a))):
        raise NotAntiHermitian(f"||A + A^+||_F = {float(np.max(skew)):.3e}")


def unitary_exp_batch(a: np.ndarray) -> np.ndarray:
    """exp(A) for a stack of anti-Hermitian matrices via the spectrum of iA."""
    a = np.asarray(a, dtype=np.complex128)
    check_anti_hermitian(a)
    h = 1j * a
    h = 0.5 * (h + dagger(h))
    w, v = _eigh_checked(h)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def unitary_exp(a: np.ndarray) -> np.ndarray:
    return unitary_exp_batch(np.asarray(a)[None])[0]


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix; tiny negatives clamp to 0."""
    eig = herm_eig(rho)
    if eig.values[0] < -PSD_FLOOR:
        raise NotPSD(f"smallest eigenvalue {eig.values[0]:.3e}")
    root = np.sqrt(np.clip(eig.values, 0.0, None))
    return (eig.vectors * root) @ eig.vectors.conj().T


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Closest unitary to ``m`` in Frobenius norm, M (M^+ M)^(-1/2)."""
    m = np.asarray(m, dtype=np.complex128)
    gram = m.conj().T @ m
    eig = herm_eig(0.5 * (gram + gram.conj().T))
    smin = np.sqrt(max(eig.values[0], 0.0))
    if smin <= RANK_FLOOR:
        raise RankDeficient(f"smallest singular value {smin:.3e}")
    inv_root = (eig.vectors / np.sqrt(eig.values)) @ eig.vectors.conj().T
    return m @ inv_root


def align_frame(reference: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Rotate ``frame`` within its span so that reference^+ frame is Hermitian PSD."""
    overlap = frame.conj().T @ reference
    smin = np.linalg.svd(overlap, compute_uv=False).min()
    if smin < OVERLAP_FLOOR:
        raise GaugeDiscontinuity(f"frame overlap nearly singular (s_min = {smin:.3e})")
    return frame @ polar_unitary(overlap)


def degenerate_clusters(values: np.ndarray, rtol: float = DEGENERACY_RTOL) -> list[np.ndarray]:
    """Group indices of ascending ``values`` into numerically degenerate clusters."""
    scale = max(float(np.max(np.abs(values))), 1e-300)
    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] < rtol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.asarray(g) for g in groups]
