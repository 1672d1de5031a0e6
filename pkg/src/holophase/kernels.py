"""Hot numeric kernels.

Each kernel exists twice: a scalar-loop version written for ``numba.njit``
and a batch-vectorized numpy version.  ``jacobi_eigh_batch`` and friends
dispatch on :data:`holophase._backend.BACKEND`; :func:`implementation`
returns a specific variant so the two can be compared directly.
"""

from __future__ import annotations

import math

import numpy as np

from . import _backend

# ---------------------------------------------------------------------------
# Cyclic complex Jacobi
# ---------------------------------------------------------------------------


def _jacobi_loops(a, tol, max_sweeps):
    nbatch = a.shape[0]
    n = a.shape[1]
    w = np.empty((nbatch, n))
    v = np.empty((nbatch, n, n), dtype=np.complex128)
    sweeps = np.empty(nbatch, dtype=np.int64)
    for b in range(nbatch):
        m = a[b].copy()
        vb = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            vb[i, i] = 1.0
        fro = 0.0
        for i in range(n):
            for j in range(n):
                fro += m[i, j].real ** 2 + m[i, j].imag ** 2
        thresh = tol * math.sqrt(fro)
        sweep = 0
        converged = False
        while True:
            off = 0.0
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off += m[i, j].real ** 2 + m[i, j].imag ** 2
            if math.sqrt(off) <= thresh:
                converged = True
                break
            if sweep >= max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p, q]
                    mag = abs(apq)
                    if mag == 0.0:
                        continue
                    e = apq / mag
                    ec = e.conjugate()
                    theta = (m[q, q].real - m[p, p].real) / (2.0 * mag)
                    if abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = m[k, p]
                        akq = m[k, q]
                        m[k, p] = c * akp - s * ec * akq
                        m[k, q] = s * e * akp + c * akq
                    for k in range(n):
                        apk = m[p, k]
                        aqk = m[q, k]
                        m[p, k] = c * apk - s * e * aqk
                        m[q, k] = s * ec * apk + c * aqk
                    m[p, q] = 0.0
                    m[q, p] = 0.0
                    m[p, p] = m[p, p].real
                    m[q, q] = m[q, q].real
                    for k in range(n):
                        vkp = vb[k, p]
                        vkq = vb[k, q]
                        vb[k, p] = c * vkp - s * ec * vkq
                        vb[k, q] = s * e * vkp + c * vkq
            sweep += 1
        sweeps[b] = sweep if converged else -1
        d = np.empty(n)
        for i in range(n):
            d[i] = m[i, i].real
        order = np.argsort(d, kind="mergesort")
        for i in range(n):
            w[b, i] = d[order[i]]
            for k in range(n):
                v[b, k, i] = vb[k, order[i]]
    return w, v, sweeps


def _jacobi_vectorized(a, tol, max_sweeps):
    m = np.array(a, dtype=np.complex128, copy=True)
    nbatch, n, _ = m.shape
    v = np.zeros_like(m)
    v[:, np.arange(n), np.arange(n)] = 1.0
    offmask = ~np.eye(n, dtype=bool)
    thresh = tol * np.sqrt(np.sum(m.real**2 + m.imag**2, axis=(1, 2)))
    sweeps = np.full(nbatch, -1, dtype=np.int64)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.where(offmask, m.real**2 + m.imag**2, 0.0), axis=(1, 2)))
        done = off <= thresh
        sweeps[done & (sweeps < 0)] = sweep
        if done.all() or sweep == max_sweeps:
            break
        for p, q in pairs:
            apq = m[:, p, q]
            mag = np.abs(apq)
            act = (mag > 0.0) & ~done
            if not act.any():
                continue
            safe = np.where(act, mag, 1.0)
            e = np.where(act, apq / safe, 1.0)
            ec = e.conj()
            theta = (m[:, q, q].real - m[:, p, p].real) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            th = np.where(big, 1.0, theta)
            t = 1.0 / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(th < 0.0, -t, t)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(act, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cc = c[:, None]
            mp = m[:, :, p].copy()
            mq = m[:, :, q].copy()
            m[:, :, p] = cc * mp - (s * ec)[:, None] * mq
            m[:, :, q] = (s * e)[:, None] * mp + cc * mq
            rp = m[:, p, :].copy()
            rq = m[:, q, :].copy()
            m[:, p, :] = cc * rp - (s * e)[:, None] * rq
            m[:, q, :] = (s * ec)[:, None] * rp + cc * rq
            m[:, p, q] = np.where(act, 0.0, m[:, p, q])
            m[:, q, p] = np.where(act, 0.0, m[:, q, p])
            m[:, p, p] = m[:, p, p].real
            m[:, q, q] = m[:, q, q].real
            vp = v[:, :, p].copy()
            vq = v[:, :, q].copy()
            v[:, :, p] = cc * vp - (s * ec)[:, None] * vq
            v[:, :, q] = (s * e)[:, None] * vp + cc * vq
    d = np.real(np.diagonal(m, axis1=1, axis2=2)).copy()
    order = np.argsort(d, axis=1, kind="mergesort")
    w = np.take_along_axis(d, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, sweeps


# ---------------------------------------------------------------------------
# Ordered products: result = E[N-1] ... E[1] E[0]
# ---------------------------------------------------------------------------


def _ordered_product_loops(e):
    nsteps = e.shape[0]
    n = e.shape[1]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        out[i, i] = 1.0
    tmp = np.empty((n, n), dtype=np.complex128)
    for k in range(nsteps):
        for i in range(n):
            for j in range(n):
                acc = 0.0j
                for l in range(n):
                    acc += e[k, i, l] * out[l, j]
                tmp[i, j] = acc
        out[:, :] = tmp
    return out


def _ordered_product_tree(e):
    mats = np.asarray(e, dtype=np.complex128)
    if mats.shape[0] == 0:
        return np.eye(mats.shape[1], dtype=np.complex128)
    while mats.shape[0] > 1:
        carry = mats[-1:] if mats.shape[0] % 2 else None
        body = mats[:-1] if carry is not None else mats
        mats = body[1::2] @ body[0::2]
        if carry is not None:
            mats = np.concatenate([mats, carry])
    return mats[0].copy()


def _cumulative_product_loops(e):
    nsteps = e.shape[0]
    n = e.shape[1]
    out = np.zeros((nsteps + 1, n, n), dtype=np.complex128)
    for i in range(n):
        out[0, i, i] = 1.0
    for k in range(nsteps):
        for i in range(n):
            for j in range(n):
                acc = 0.0j
                for l in range(n):
                    acc += e[k, i, l] * out[k, l, j]
                out[k + 1, i, j] = acc
    return out


def _cumulative_product_numpy(e):
    e = np.asarray(e, dtype=np.complex128)
    out = np.empty((e.shape[0] + 1,) + e.shape[1:], dtype=np.complex128)
    out[0] = np.eye(e.shape[1])
    for k in range(e.shape[0]):
        out[k + 1] = e[k] @ out[k]
    return out


# ---------------------------------------------------------------------------
# Composite Simpson sum for the kx-loop integral of the 4D model
# ---------------------------------------------------------------------------


def _simpson_kx_loops(a, temperature, n):
    h = 2.0 * math.pi / n
    total = 0.0
    for j in range(n + 1):
        k = j * h
        ck = math.cos(k)
        r2 = a * a + 2.0 * a * ck + 1.0
        if r2 < 0.0:
            r2 = 0.0
        x = math.sqrt(r2) / temperature
        if x < 1.0:
            sh = math.sinh(0.5 * x)
            chi = 2.0 * sh * sh / math.cosh(x)
        else:
            ex = math.exp(-x)
            chi = 1.0 - 2.0 * ex / (1.0 + ex * ex)
        f = -chi / (2.0 * r2) * (a * ck + 1.0)
        if j == 0 or j == n:
            wgt = 1.0
        elif j % 2 == 1:
            wgt = 4.0
        else:
            wgt = 2.0
        total += wgt * f
    return total * h / 3.0


def chi_vectorized(x):
    """Thermal weight 1 - sech(x) for x >= 0, without cancellation or overflow."""
    x = np.asarray(x, dtype=float)
    small = x < 1.0
    xs = np.where(small, x, 0.0)
    xl = np.where(small, 1.0, x)
    ex = np.exp(-xl)
    return np.where(small, 2.0 * np.sinh(0.5 * xs) ** 2 / np.cosh(xs), 1.0 - 2.0 * ex / (1.0 + ex * ex))


def _simpson_kx_numpy(a, temperature, n):
    k = np.arange(n + 1) * (2.0 * math.pi / n)
    ck = np.cos(k)
    r2 = np.maximum(a * a + 2.0 * a * ck + 1.0, 0.0)
    f = -chi_vectorized(np.sqrt(r2) / temperature) / (2.0 * r2) * (a * ck + 1.0)
    wgt = np.full(n + 1, 2.0)
    wgt[1::2] = 4.0
    wgt[0] = wgt[-1] = 1.0
    return float(np.dot(wgt, f)) * (2.0 * math.pi / n) / 3.0


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_VARIANTS = {
    "jacobi": {"numba": _jacobi_loops, "numpy": _jacobi_vectorized},
    "ordered_product": {"numba": _ordered_product_loops, "numpy": _ordered_product_tree},
    "cumulative_product": {"numba": _cumulative_product_loops, "numpy": _cumulative_product_numpy},
    "simpson_kx": {"numba": _simpson_kx_loops, "numpy": _simpson_kx_numpy},
}


def implementation(name: str, backend: str | None = None):
    """Return kernel ``name`` for ``backend`` (defaults to the active one)."""
    backend = backend or _backend.BACKEND
    fn = _VARIANTS[name][backend]
    if backend == "numba":
        return _backend.compile_numba(fn)
    return fn


def jacobi_eigh_batch(a: np.ndarray, tol: float, max_sweeps: int):
    """Eigen-decompose a stack of Hermitian matrices.

    Returns ``(values, vectors, sweeps)``; ``sweeps[b] == -1`` flags a matrix
    that did not converge within ``max_sweeps``.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return implementation("jacobi")(a, float(tol), int(max_sweeps))


def ordered_product(e: np.ndarray) -> np.ndarray:
    return implementation("ordered_product")(np.ascontiguousarray(e, dtype=np.complex128))


def cumulative_product(e: np.ndarray) -> np.ndarray:
    return implementation("cumulative_product")(np.ascontiguousarray(e, dtype=np.complex128))


def simpson_kx(a: float, temperature: float, n: int) -> float:
    return float(implementation("simpson_kx")(float(a), float(temperature), int(n)))
