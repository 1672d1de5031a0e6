"""Both kernel backends must agree to roundoff."""

import numpy as np
import pytest
from conftest import random_anti_hermitian, random_hermitian

from holophase import _backend, kernels, linalg

backends = ["numpy"] + (["numba"] if _backend.numba_available() else [])


@pytest.mark.parametrize("backend", backends)
def test_jacobi_backend(rng, backend):
    h = np.array([random_hermitian(rng, 4) for _ in range(16)])
    w, v, sweeps = kernels.implementation("jacobi", backend)(h, 1e-14, 100)
    assert np.all(sweeps >= 0)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(h), atol=1e-12)
    resid = h @ v - v * w[:, None, :]
    assert np.abs(resid).max() < 1e-12


def test_jacobi_flags_non_convergence(rng):
    h = np.array([random_hermitian(rng, 4)])
    for backend in backends:
        _, _, sweeps = kernels.implementation("jacobi", backend)(h, 1e-14, 0)
        assert sweeps[0] == -1


@pytest.mark.parametrize("backend", backends)
def test_products_backend(rng, backend):
    e = linalg.unitary_exp_batch(np.array([random_anti_hermitian(rng) for _ in range(37)]))
    ref = np.eye(4, dtype=complex)
    cums = [ref]
    for m in e:
        ref = m @ ref
        cums.append(ref)
    prod = kernels.implementation("ordered_product", backend)(e)
    cum = kernels.implementation("cumulative_product", backend)(e)
    np.testing.assert_allclose(prod, ref, atol=1e-12)
    np.testing.assert_allclose(cum, np.array(cums), atol=1e-12)


@pytest.mark.parametrize("backend", backends)
def test_simpson_backend(backend):
    fn = kernels.implementation("simpson_kx", backend)
    t = 0.7
    # a = 0: R = 1, integrand constant, I = pi (sech(1/T) - 1)
    assert fn(0.0, t, 64) == pytest.approx(np.pi * (1 / np.cosh(1 / t) - 1), abs=1e-13)


def test_backends_agree(rng):
    if len(backends) < 2:
        pytest.skip("numba not installed")
    h = np.array([random_hermitian(rng, 4) for _ in range(8)])
    wa, _, _ = kernels.implementation("jacobi", "numpy")(h, 1e-14, 100)
    wb, _, _ = kernels.implementation("jacobi", "numba")(h, 1e-14, 100)
    np.testing.assert_allclose(wa, wb, atol=1e-13)
    for a, t in [(0.5, 0.3), (-0.4, 0.05), (1.7, 1.0)]:
        va = kernels.implementation("simpson_kx", "numpy")(a, t, 1024)
        vb = kernels.implementation("simpson_kx", "numba")(a, t, 1024)
        assert va == pytest.approx(vb, abs=1e-12)


def test_chi_stable():
    x = np.array([0.5, 1.0, 5.0, 800.0])
    np.testing.assert_allclose(kernels.chi_vectorized(x), 1 - 1 / np.cosh(np.minimum(x, 700)), rtol=1e-12)
    # the naive form cancels to 0 here; x^2/2 is the leading term
    assert kernels.chi_vectorized(np.array([1e-8]))[0] == pytest.approx(0.5e-16, rel=1e-6)


def test_backend_env_validation(monkeypatch):
    monkeypatch.setenv(_backend.BACKEND_ENV, "fortran")
    with pytest.raises(ValueError):
        _backend._resolve()
    monkeypatch.setenv(_backend.BACKEND_ENV, "numpy")
    assert _backend._resolve() == "numpy"
