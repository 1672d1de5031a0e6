"""Four-level Hamiltonian H = sum_i R_i Gamma^i with two doubly degenerate levels.

Parameter points are plain float arrays of shape ``(5,)`` (or ``(..., 5)``
for batches).  Energies and temperatures share one dimensionless unit with
hbar = k_B = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GapClosure, GaugePole, NonpositiveTemperature, OpenPath, TooFewSegments
from .kernels import chi_vectorized
from .linalg import EigenSystem

GAP_FLOOR = 1e-8
POLE_FLOOR = 1e-8
MIN_SEGMENTS = 8

_S0 = np.eye(2, dtype=np.complex128)
_S1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_S3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)

GAMMA = np.array(
    [np.kron(_S1, _S1), np.kron(_S1, _S2), np.kron(_S1, _S3), np.kron(_S2, _S0), np.kron(_S3, _S0)]
)
GAMMA.setflags(write=False)


@dataclass(frozen=True)
class GammaSet:
    gammas: np.ndarray  # (5, 4, 4)
    commutators: np.ndarray  # (5, 5, 4, 4), Gamma^{ab} = (i/2)[Gamma^a, Gamma^b]


def gamma_matrices() -> GammaSet:
    g = GAMMA
    comm = 0.5j * (np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g))
    return GammaSet(g.copy(), comm)


def norm(p: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(p), axis=-1))


def check_gap(p: np.ndarray, scale: float = 1.0) -> None:
    r = norm(p)
    floor = max(GAP_FLOOR * scale, 1e-300)
    if np.any(r <= floor):
        raise GapClosure(f"|R| = {float(np.min(r)):.3e} is below the gap floor {floor:.1e}")


def check_temperature(temperature: float) -> None:
    if not temperature > 0.0:
        raise NonpositiveTemperature(f"temperature must be positive, got {temperature!r}")


def hamiltonian(p: np.ndarray) -> np.ndarray:
    return np.tensordot(np.asarray(p, dtype=float), GAMMA, axes=([-1], [0]))


def _check_pole(p: np.ndarray, sign: int) -> None:
    r = norm(p)
    if np.any(np.abs(r - sign * p[..., 4]) <= POLE_FLOOR * r):
        branch = "excited" if sign > 0 else "ground"
        raise GaugePole(f"|R_5| reaches {'+' if sign > 0 else '-'}R: {branch} frame undefined")


def branch_frame(p: np.ndarray, sign: int) -> np.ndarray:
    """Closed-form eigenvectors for energy ``sign * R`` as columns (a,b) or (c,d)."""
    p = np.asarray(p, dtype=float)
    check_gap(p)
    _check_pole(p, sign)
    r1, r2, r3, r4, r5 = np.moveaxis(p, -1, 0)
    r = norm(p)
    nrm = np.sqrt(2.0 * r * (r - sign * r5))
    zero = np.zeros_like(r1)
    first = np.stack([-r3 + 1j * r4, -r1 - 1j * r2, r5 - sign * r + 0j, zero + 0j], axis=-1)
    second = np.stack([-r1 + 1j * r2, r3 + 1j * r4, zero + 0j, r5 - sign * r + 0j], axis=-1)
    return np.stack([first, second], axis=-1) / nrm[..., None, None]


def branch_frame_derivative(p: np.ndarray, dp: np.ndarray, sign: int) -> np.ndarray:
    """Directional derivative of :func:`branch_frame` along ``dp``."""
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    check_gap(p)
    _check_pole(p, sign)
    r1, r2, r3, r4, r5 = np.moveaxis(p, -1, 0)
    d1, d2, d3, d4, d5 = np.moveaxis(dp, -1, 0)
    r = norm(p)
    dr = np.sum(p * dp, axis=-1) / r
    q = 2.0 * r * (r - sign * r5)
    dq = 2.0 * dr * (r - sign * r5) + 2.0 * r * (dr - sign * d5)
    nrm = np.sqrt(q)
    dnrm = dq / (2.0 * nrm)
    zero = np.zeros_like(r1) + 0j
    v1 = np.stack([-r3 + 1j * r4, -r1 - 1j * r2, r5 - sign * r + 0j, zero], axis=-1)
    v2 = np.stack([-r1 + 1j * r2, r3 + 1j * r4, zero, r5 - sign * r + 0j], axis=-1)
    dv1 = np.stack([-d3 + 1j * d4, -d1 - 1j * d2, d5 - sign * dr + 0j, zero], axis=-1)
    dv2 = np.stack([-d1 + 1j * d2, d3 + 1j * d4, zero, d5 - sign * dr + 0j], axis=-1)
    v = np.stack([v1, v2], axis=-1)
    dv = np.stack([dv1, dv2], axis=-1)
    return dv / nrm[..., None, None] - v * (dnrm / q)[..., None, None]


@dataclass(frozen=True)
class AnalyticEigensystem:
    vectors: np.ndarray  # columns psi_a, psi_b, psi_c, psi_d
    energies: np.ndarray  # (+R, +R, -R, -R)


def eigensystem_analytic(p: np.ndarray) -> AnalyticEigensystem:
    p = np.asarray(p, dtype=float)
    vec = np.concatenate([branch_frame(p, +1), branch_frame(p, -1)], axis=-1)
    r = float(norm(p))
    return AnalyticEigensystem(vec, np.array([r, r, -r, -r]))


def frame_derivative(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """d(psi_a, psi_b, psi_c, psi_d) along ``dp``."""
    return np.concatenate(
        [branch_frame_derivative(p, dp, +1), branch_frame_derivative(p, dp, -1)], axis=-1
    )


def projectors(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    check_gap(p)
    n = hamiltonian(p) / norm(p)[..., None, None]
    eye = np.eye(4)
    return 0.5 * (eye + n), 0.5 * (eye - n)


@dataclass(frozen=True)
class ThermalState:
    rho: np.ndarray
    temperature: float
    lambda_plus: float
    lambda_minus: float
    p_plus: np.ndarray
    p_minus: np.ndarray
    partition: float


def thermal_weights(r: float, temperature: float) -> tuple[float, float]:
    """(lambda_+, lambda_-) = e^{-/+ R/T} / (4 cosh(R/T)), overflow-safe."""
    x = r / temperature
    ex = np.exp(-2.0 * x)
    lam_plus = 0.5 * ex / (1.0 + ex)
    return float(lam_plus), float(0.5 / (1.0 + ex))


def thermal_density(p: np.ndarray, temperature: float) -> ThermalState:
    """rho = (1 - tanh(R/T) R_hat.Gamma) / 4 with its spectral data."""
    check_temperature(temperature)
    p = np.asarray(p, dtype=float)
    r = float(norm(p))
    p_plus, p_minus = projectors(p)
    lam_plus, lam_minus = thermal_weights(r, temperature)
    x = r / temperature
    rho = 0.25 * (np.eye(4) - np.tanh(x) * hamiltonian(p) / r)
    # Z overflows to inf for R/T beyond ~700; it is informational only.
    with np.errstate(over="ignore"):
        z = 4.0 * np.cosh(x)
    return ThermalState(rho, float(temperature), lam_plus, lam_minus, p_plus, p_minus, float(z))


def thermal_eigensystem(p: np.ndarray, temperature: float) -> EigenSystem:
    """Eigensystem of rho in the closed-form frame: values (l+, l+, l-, l-) ascending."""
    check_temperature(temperature)
    lam_plus, lam_minus = thermal_weights(float(norm(p)), temperature)
    vec = eigensystem_analytic(p).vectors
    return EigenSystem(np.array([lam_plus, lam_plus, lam_minus, lam_minus]), vec)


def thermal_density_derivative(p: np.ndarray, dp: np.ndarray, temperature: float) -> np.ndarray:
    """Directional derivative of the thermal density matrix along ``dp`` at fixed T."""
    check_temperature(temperature)
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    check_gap(p)
    r = float(norm(p))
    rhat = p / r
    dr = float(rhat @ dp)
    drhat = (dp - rhat * dr) / r
    x = r / temperature
    sech2 = 1.0 / np.cosh(x) ** 2 if x < 350 else 0.0
    return -0.25 * (sech2 * dr / temperature * hamiltonian(rhat) + np.tanh(x) * hamiltonian(drhat))


def sphere_point(theta: float, phi: float, radius: float = 1.0) -> np.ndarray:
    s = radius / np.sqrt(2.0) * np.sin(theta)
    return np.array(
        [s * np.cos(phi), s * np.sin(phi), s * np.cos(phi), s * np.sin(phi), radius * np.cos(theta)]
    )


def tb4d_point(k, m: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return np.array([np.sin(k[0]), np.sin(k[1]), np.sin(k[2]), np.sin(k[3]), m + np.cos(k).sum()])


@dataclass(frozen=True)
class LoopPath:
    """A closed, uniformly parameterized curve in R-space.

    ``mid_points``/``increments`` feed the midpoint rule of the path-ordered
    products; family loops use the exact curve midpoint and tangent times the
    parameter step, explicit loops use chord averages and chord differences.
    """

    family: str
    points: np.ndarray  # (N+1, 5), points[0] == points[N]
    mid_points: np.ndarray  # (N, 5)
    increments: np.ndarray  # (N, 5)
    coords: np.ndarray | None = None  # (N+1, k) family coordinates
    params: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.points.shape[0] - 1

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.steps + 1)

    @property
    def scale(self) -> float:
        return max(float(np.max(np.abs(self.points))), 1e-300)


def _check_segments(n: int) -> None:
    if n < MIN_SEGMENTS:
        raise TooFewSegments(f"a loop needs at least {MIN_SEGMENTS} segments, got {n}")


def _sphere_loop(n: int, radius: float, theta: float, family: str) -> LoopPath:
    phi = np.linspace(0.0, 2.0 * np.pi, n + 1)
    pts = np.array([sphere_point(theta, f, radius) for f in phi])
    pts[-1] = pts[0]
    dphi = 2.0 * np.pi / n
    mid = 0.5 * (phi[:-1] + phi[1:])
    s = radius / np.sqrt(2.0) * np.sin(theta)
    mids = np.array([sphere_point(theta, f, radius) for f in mid])
    tang = np.stack(
        [-s * np.sin(mid), s * np.cos(mid), -s * np.sin(mid), s * np.cos(mid), np.zeros_like(mid)],
        axis=-1,
    )
    coords = np.stack([np.full_like(phi, theta), phi], axis=-1)
    return LoopPath(family, pts, mids, tang * dphi, coords, {"R": radius, "theta": theta})


def _tb4d_loop(n: int, m: float) -> LoopPath:
    kx = np.linspace(0.0, 2.0 * np.pi, n + 1)
    pts = np.array([tb4d_point([k, 0, 0, 0], m) for k in kx])
    pts[-1] = pts[0]
    mid = 0.5 * (kx[:-1] + kx[1:])
    mids = np.array([tb4d_point([k, 0, 0, 0], m) for k in mid])
    zero = np.zeros_like(mid)
    tang = np.stack([np.cos(mid), zero, zero, zero, -np.sin(mid)], axis=-1)
    flat = np.zeros_like(kx)
    coords = np.column_stack([kx, flat, flat, flat, np.full_like(kx, m)])
    return LoopPath("tb4d-kx", pts, mids, tang * (2.0 * np.pi / n), coords, {"m": m})


def _explicit_loop(points) -> LoopPath:
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 5:
        raise ValueError(f"explicit loop needs shape (N+1, 5), got {pts.shape}")
    _check_segments(pts.shape[0] - 1)
    if not np.array_equal(pts[0], pts[-1]):
        raise OpenPath("first and last samples of an explicit loop must be identical")
    return LoopPath("explicit", pts, 0.5 * (pts[:-1] + pts[1:]), np.diff(pts, axis=0))


def make_loop(family: str, n: int | None = None, **params) -> LoopPath:
    """Build a closed loop.

    Families: ``equator`` (``R``), ``latitude`` (``R``, ``theta``),
    ``tb4d-kx`` (``m``) and ``explicit`` (``points``).
    """
    if family == "explicit":
        return _explicit_loop(params["points"])
    if n is None:
        raise TypeError("family loops need the segment count n")
    _check_segments(n)
    if family == "equator":
        return _sphere_loop(n, float(params.get("R", 1.0)), np.pi / 2, "equator")
    if family == "latitude":
        return _sphere_loop(n, float(params.get("R", 1.0)), float(params["theta"]), "latitude")
    if family in ("tb4d-kx", "tb4d"):
        return _tb4d_loop(n, float(params["m"]))
    raise ValueError(f"unknown loop family {family!r}")


def load_loop(path: str | Path) -> LoopPath:
    """Read an explicit loop: one sample per line, five whitespace-separated reals."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 values, got {len(fields)}")
        rows.append([float(f) for f in fields])
    return make_loop("explicit", points=rows)


def save_loop(loop: LoopPath, path: str | Path) -> None:
    lines = [" ".join(repr(float(x)) for x in row) for row in loop.points]
    Path(path).write_text("\n".join(lines) + "\n")


def chi(r, temperature):
    """1 - sech(R/T)."""
    return chi_vectorized(np.asarray(r, dtype=float) / temperature)
