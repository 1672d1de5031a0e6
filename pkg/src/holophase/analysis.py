"""Critical temperatures, the (m, T) phase diagram, dome fits, winding
numbers and the zero-temperature comparison of Uhlmann and WZ phases."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import logm
from scipy.optimize import curve_fit

from . import kernels, uhlmann, wz
from .errors import (
    EmptyDome,
    GaugePole,
    HolophaseError,
    InvalidConfig,
    NoBracket,
    NoConvergence,
    NotClosed,
    StepTooLarge,
)
from .linalg import dagger, fro, unitary_exp_batch
from .model import (
    LoopPath,
    branch_frame,
    frame_derivative,
    make_loop,
    norm,
    thermal_density,
)
from .uhlmann import DEFAULT_STEPS, PhaseResult

SCAN_POINTS = 64
DOME_WINDOW = 0.95
DOME_REFINE_STEPS = 20
MATCH_TOL = 1e-2
LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
UNITARY_FAMILY_RTOL = 1e-9


def circular_distance(a: float, b: float) -> float:
    """|a - b| reduced modulo 2 pi to [0, pi]."""
    d = math.fmod(abs(a - b), 2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


# ---------------------------------------------------------------------------
# Critical temperature
# ---------------------------------------------------------------------------


def equator_tc_closed_form(radius: float = 1.0) -> float:
    """T_c solving sech(R/T) = 1/2, i.e. R / ln(2 + sqrt 3)."""
    return radius / math.log(2.0 + math.sqrt(3.0))


def _order_parameter(model: str, params: dict, method: str, steps: int):
    """Real scalar whose sign gives the phase: positive for 0, negative for pi."""
    if model == "equator":
        radius = float(params.get("R", 1.0))
        if method == "analytic":
            return lambda t: math.cos(math.pi * float(uhlmann.chi(radius, t)))
        loop = make_loop("equator", steps, R=radius)
    elif model == "tb4d":
        m = float(params["m"])
        if method == "analytic":
            return lambda t: math.cos(uhlmann.tb4d_I(m, t))
        loop = make_loop("tb4d-kx", steps, m=m)
    else:
        raise InvalidConfig(f"model must be 'equator' or 'tb4d', got {model!r}")
    if method != "numeric":
        raise InvalidConfig(f"method must be 'analytic' or 'numeric', got {method!r}")

    def numeric(t: float) -> float:
        rho0 = thermal_density(loop.points[0], t).rho
        return float(np.trace(rho0 @ uhlmann.holonomy(loop, t).matrix).real)

    return numeric


def _default_bracket(model: str, params: dict) -> tuple[float, float]:
    scale = float(params.get("R", 1.0)) if model == "equator" else 1.0
    return 0.02 * scale, 10.0 * scale


def critical_temperature(
    model: str,
    params: dict | None = None,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-6,
    method: str = "analytic",
    steps: int = DEFAULT_STEPS,
    strict: bool = False,
) -> float | None:
    """Temperature of the pi -> 0 jump, by bisection to |dT| < tol.

    If the bracket ends do not straddle a sign change, 64 log-spaced points
    are scanned for the first one.  Without any, returns None (or raises
    NoBracket when ``strict``).
    """
    params = dict(params or {})
    lo, hi = bracket if bracket is not None else _default_bracket(model, params)
    if not 0.0 < lo < hi:
        raise InvalidConfig(f"bracket must satisfy 0 < T_lo < T_hi, got ({lo}, {hi})")
    if not tol > 0.0:
        raise InvalidConfig("tol must be positive")
    f = _order_parameter(model, params, method, steps)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi >= 0.0:
        grid = np.geomspace(lo, hi, SCAN_POINTS)
        vals = [f(t) for t in grid]
        for i in range(SCAN_POINTS - 1):
            if vals[i] * vals[i + 1] < 0.0:
                lo, hi, f_lo = float(grid[i]), float(grid[i + 1]), vals[i]
                break
        else:
            if strict:
                raise NoBracket(f"no phase jump in T in [{lo:g}, {hi:g}] ({SCAN_POINTS}-point scan)")
            return None
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Phase diagram and dome fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseDiagramGrid:
    m: np.ndarray  # (M,)
    T: np.ndarray  # (K,)
    phase: np.ndarray  # (M, K); nan unless status is "defined"
    magnitude: np.ndarray  # (M, K) |cos I|; nan on error
    integral: np.ndarray  # (M, K) I(m, T); nan on error
    status: np.ndarray  # (M, K) "defined" | "near-critical" | "error:<CODE>"


def _axis(lo: float, hi: float, num: int, log: bool, name: str) -> np.ndarray:
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise InvalidConfig(f"{name} range must have positive length, got [{lo}, {hi}]")
    if num < 2:
        raise InvalidConfig(f"{name} grid needs at least 2 points, got {num}")
    if log:
        if lo <= 0.0:
            raise InvalidConfig(f"log spacing needs a positive {name} range")
        return np.geomspace(lo, hi, num)
    return np.linspace(lo, hi, num)


def _diagram_column(m: float, temps: np.ndarray, quad_points: int | None):
    out = []
    for t in temps:
        try:
            i_val = uhlmann.tb4d_I(m, float(t), quad_points)
        except HolophaseError as exc:
            out.append((math.nan, math.nan, math.nan, f"error:{exc.code}"))
            continue
        res = uhlmann.phase_from_trace(math.cos(i_val))
        out.append((res.phase, res.magnitude, i_val, res.status))
    return out


def phase_diagram(
    m_range: tuple[float, float],
    m_steps: int,
    T_range: tuple[float, float],
    T_steps: int,
    threads: int = 1,
    T_log: bool = False,
    quad_points: int | None = None,
) -> PhaseDiagramGrid:
    """Uhlmann phase of the tb4d kx loop on an (m, T) grid.

    Columns run on a thread pool and are gathered by index, so the result
    does not depend on ``threads``.  Cell failures are recorded, not raised.
    """
    if T_range[0] <= 0.0:
        raise InvalidConfig(f"temperatures must be positive, got T_min = {T_range[0]}")
    ms = _axis(float(m_range[0]), float(m_range[1]), int(m_steps), False, "m")
    ts = _axis(float(T_range[0]), float(T_range[1]), int(T_steps), T_log, "T")
    if threads < 1:
        raise InvalidConfig("threads must be >= 1")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        cols = list(pool.map(lambda m: _diagram_column(float(m), ts, quad_points), ms))
    phase = np.array([[c[0] for c in col] for col in cols])
    mag = np.array([[c[1] for c in col] for col in cols])
    integral = np.array([[c[2] for c in col] for col in cols])
    status = np.array([[c[3] for c in col] for col in cols], dtype=object)
    return PhaseDiagramGrid(ms, ts, phase, mag, integral, status)


@dataclass(frozen=True)
class DomeFit:
    amplitude: float
    exponent: float
    residual: float  # RMS deviation of the fit from the boundary points
    m: np.ndarray  # boundary samples used in the fit
    tc: np.ndarray

    def to_dict(self) -> dict:
        return {"A": self.amplitude, "p": self.exponent, "residual": self.residual}


def _dome(a, amp, p):
    return amp * (1.0 - a * a) ** p


def _column_boundary(grid: PhaseDiagramGrid, j: int, refine_steps: int) -> float | None:
    m = float(grid.m[j])
    pi_idx = None
    for k, st in enumerate(grid.status[j]):
        if st != "defined":
            continue
        if grid.phase[j, k] == math.pi:
            pi_idx = k
        elif pi_idx is not None:
            lo, hi = float(grid.T[pi_idx]), float(grid.T[k])
            for _ in range(refine_steps):
                mid = 0.5 * (lo + hi)
                if math.cos(uhlmann.tb4d_I(m, mid)) < 0.0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        else:
            return None
    return None


def dome_fit(
    grid: PhaseDiagramGrid, window: float = DOME_WINDOW, refine_steps: int = DOME_REFINE_STEPS
) -> DomeFit:
    """Fit T_c(m) = A [1 - (m+3)^2]^p to the refined pi/0 boundary with |m+3| <= window."""
    xs, ys = [], []
    for j, m in enumerate(grid.m):
        a = float(m) + 3.0
        if abs(a) > window:
            continue
        tc = _column_boundary(grid, j, refine_steps)
        if tc is not None:
            xs.append(a)
            ys.append(tc)
    if len(xs) < 3:
        raise EmptyDome(f"only {len(xs)} boundary points inside |m+3| <= {window}")
    xs_arr, ys_arr = np.array(xs), np.array(ys)
    (amp, p), _ = curve_fit(_dome, xs_arr, ys_arr, p0=(0.75, 0.5))
    resid = float(np.sqrt(np.mean((_dome(xs_arr, amp, p) - ys_arr) ** 2)))
    return DomeFit(float(amp), float(p), resid, xs_arr - 3.0, ys_arr)


# ---------------------------------------------------------------------------
# Winding number
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindingResult:
    kappa: int
    raw: float
    residual: float


def winding_number(
    samples: np.ndarray, closure_tol: float = 1e-9, max_step: float = 0.5
) -> WindingResult:
    """(1 / 2 pi i) sum_k Tr log(D_{k+1} D_k^+) over a closed list of unitaries."""
    d = np.asarray(samples, dtype=np.complex128)
    if d.ndim != 3 or d.shape[0] < 2:
        raise InvalidConfig(f"expected (N+1, n, n) unitaries, got shape {d.shape}")
    gap = float(fro(d[-1] - d[0]))
    if gap > closure_tol:
        raise NotClosed(f"||D_N - D_0||_F = {gap:.3e}")
    inc = d[1:] @ dagger(d[:-1])
    eye = np.eye(d.shape[-1])
    step = np.linalg.norm(inc - eye, ord=2, axis=(-2, -1))
    if np.any(step >= max_step):
        k = int(np.argmax(step))
        raise StepTooLarge(f"||D_(k+1) D_k^+ - 1|| = {step[k]:.3f} at k = {k}")
    raw = float(np.sum(np.angle(np.linalg.eigvals(inc))) / (2.0 * math.pi))
    kappa = int(round(raw))
    residual = abs(raw - kappa)
    if residual >= 0.1:
        raise NoConvergence(f"winding sum {raw:.4f} is not near an integer")
    return WindingResult(kappa, raw, residual)


# ---------------------------------------------------------------------------
# Zero-temperature decomposition
# ---------------------------------------------------------------------------


def _frames(p: np.ndarray) -> np.ndarray:
    return np.concatenate([branch_frame(p, +1), branch_frame(p, -1)], axis=-1)


def wz_operator(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """WZ connection as a 4x4 operator, sum over subspaces of F A F^+."""
    return wz.wz_connection_analytic(p, dp).operator(p)


def frame_rotation(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """sum_i |d psi_i><psi_i| = dV V^+ (= dD D^+ for D = V V(0)^+)."""
    return frame_derivative(p, dp) @ dagger(_frames(p))


def zero_t_connection(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """T -> 0 limit of the Uhlmann connection: A_WZ - sum_i |d psi_i><psi_i|.  Batches."""
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    return wz_operator(p, dp) - frame_rotation(p, dp)


def decomposition_holonomy(loop: LoopPath) -> uhlmann.Holonomy:
    """P exp(-oint (A_WZ - dD D^+)) along ``loop``."""
    conn = zero_t_connection(loop.mid_points, loop.increments)
    return uhlmann.Holonomy(kernels.ordered_product(unitary_exp_batch(-conn)), loop.steps)


def is_unitary_family(loop: LoopPath, rtol: float = UNITARY_FAMILY_RTOL) -> bool:
    """Constant spectrum along the loop, so H(t) = D(t) H(0) D(t)^+."""
    r = norm(loop.points)
    return bool(np.ptp(r) <= rtol * max(float(r.max()), 1e-300))


def unitary_family_samples(loop: LoopPath) -> np.ndarray:
    """D_k = V(t_k) V(0)^+ from the closed-form frames at every sample."""
    v = _frames(loop.points)
    return v @ dagger(v[0])


def transported_family_samples(loop: LoopPath) -> np.ndarray:
    """D_k = V_k V_0^+ from parallel-transported eigenframes made single-valued.

    Each subspace frame G_k is transported by overlap alignment, then
    untwisted by exp(-t log U) with U = G_0^+ G_N (principal log), so that
    V_N = V_0.  Used where the closed-form frames have a pole on the loop.
    """
    t = loop.t
    cols = []
    for sign in (+1, -1):
        g = wz._numeric_frames(loop, sign)
        u = dagger(g[0]) @ g[-1]
        log_u = logm(u)
        log_u = 0.5 * (log_u - dagger(log_u))
        cols.append(g @ unitary_exp_batch(-t[:, None, None] * log_u))
    v = np.concatenate(cols, axis=-1)
    v[-1] = v[0]
    return v @ dagger(v[0])


def commutator_norms(loop: LoopPath) -> tuple[float, float]:
    """max over the loop of ||[A_WZ, dD D^+]||_F per unit parameter squared.

    The first value uses A_WZ as the operator sum_i F_i A_i F_i^+; the
    second uses the block-diagonal eigenbasis matrix of A_WZ, placed next to
    dD D^+ in the original basis.
    """
    tang = loop.increments * loop.steps
    a = wz_operator(loop.mid_points, tang)
    blocks = wz.wz_connection_analytic(loop.mid_points, tang).block_matrix()
    b = frame_rotation(loop.mid_points, tang)
    return float(fro(a @ b - b @ a).max()), float(fro(blocks @ b - b @ blocks).max())


# ---------------------------------------------------------------------------
# Correspondence of theta_U(T -> 0) and theta_WZ
# ---------------------------------------------------------------------------


def _result_dict(res: PhaseResult | None) -> dict | None:
    if res is None:
        return None
    return {
        "phase": None if math.isnan(res.phase) else res.phase,
        "magnitude": res.magnitude,
        "status": res.status,
    }


@dataclass
class CorrespondenceReport:
    loop: dict
    temperatures: list[float]
    theta_u: list[PhaseResult]
    theta_u_limit: float
    theta_wz: PhaseResult
    verdict: str  # "match" | "mismatch" | "undecided"
    converged: bool
    unitary_family: bool
    theta_wz_transported: PhaseResult | None = None
    kappa: int | None = None
    kappa_residual: float | None = None
    commutator_norm: float | None = None
    commutator_norm_block: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "loop": self.loop,
            "temperatures": list(self.temperatures),
            "theta_U": [_result_dict(r) for r in self.theta_u],
            "theta_U_limit": None if math.isnan(self.theta_u_limit) else self.theta_u_limit,
            "theta_WZ": _result_dict(self.theta_wz),
            "theta_WZ_transported": _result_dict(self.theta_wz_transported),
            "verdict": self.verdict,
            "converged": self.converged,
            "unitary_family": self.unitary_family,
            "kappa": self.kappa,
            "kappa_residual": self.kappa_residual,
            "commutator_norm": self.commutator_norm,
            "commutator_norm_block": self.commutator_norm_block,
            "notes": list(self.notes),
        }


def _ladder_converged(results: list[PhaseResult]) -> bool:
    """Last two rungs defined and agreeing, distances to the last rung non-increasing."""
    if len(results) < 2 or not (results[-1].defined and results[-2].defined):
        return False
    last = results[-1].phase
    dists = [circular_distance(r.phase, last) for r in results if r.defined]
    if dists[-2] >= MATCH_TOL:
        return False
    return all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))


def correspondence(loop: LoopPath, T_ladder=None) -> CorrespondenceReport:
    """Compare lim_{T->0} theta_U with theta_WZ along ``loop``."""
    scale = float(norm(loop.points).max())
    temps = [scale * f for f in LADDER] if T_ladder is None else [float(t) for t in T_ladder]
    if len(temps) < 4:
        raise InvalidConfig("the temperature ladder needs at least 4 rungs")
    if any(t <= 0.0 for t in temps) or any(b >= a for a, b in zip(temps, temps[1:])):
        raise InvalidConfig("the temperature ladder must be positive and strictly descending")
    notes: list[str] = []
    theta_u = [uhlmann.phase(loop, t) for t in temps]
    converged = _ladder_converged(theta_u)
    limit = theta_u[-1].phase
    try:
        theta_wz = wz.scalar_wz_phase(loop, "analytic")
    except GaugePole:
        theta_wz = wz.scalar_wz_phase(loop, "transport")
        notes.append("closed-form frame hits a pole; theta_WZ from transported frames")
    try:
        transported = wz.scalar_wz_phase(loop, "transport")
    except HolophaseError as exc:
        transported = None
        notes.append(f"transported theta_WZ unavailable: {exc.code}")
    if not converged or not theta_wz.defined:
        verdict = "undecided"
    elif circular_distance(limit, theta_wz.phase) < MATCH_TOL:
        verdict = "match"
    else:
        verdict = "mismatch"
    report = CorrespondenceReport(
        loop={"family": loop.family, "steps": loop.steps, "params": dict(loop.params)},
        temperatures=temps,
        theta_u=theta_u,
        theta_u_limit=limit,
        theta_wz=theta_wz,
        verdict=verdict,
        converged=converged,
        unitary_family=is_unitary_family(loop),
        theta_wz_transported=transported,
        notes=notes,
    )
    if report.unitary_family:
        try:
            try:
                samples = unitary_family_samples(loop)
                report.commutator_norm, report.commutator_norm_block = commutator_norms(loop)
            except GaugePole:
                samples = transported_family_samples(loop)
                notes.append("closed-form frame hits a pole; D built from transported frames")
            wind = winding_number(samples)
            report.kappa, report.kappa_residual = wind.kappa, wind.residual
        except HolophaseError as exc:
            notes.append(f"winding number unavailable: {exc.code}")
    return report
