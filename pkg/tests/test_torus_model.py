"""Torus model descriptors, q variants, grids and the coframe field."""

import numpy as np
import pytest

from hlc_lab.torus_spectral import (ModelError, QSpec, SpectralGrid, TorusModel, build_coframe,
                                    coframe_on)
from hlc_lab.torus_spectral import fourier


def test_qspec_validation():
    with pytest.raises(ModelError):
        QSpec.constant(0.0)
    with pytest.raises(ModelError):
        QSpec.exp_sin(0)
    with pytest.raises(ModelError):
        QSpec.sampled(-np.ones((4, 4)))
    with pytest.raises(ModelError):
        QSpec.sampled(np.ones((4, 3)))
    with pytest.raises(ModelError):
        QSpec("cosine")


def test_exp_sin_derivatives_match_finite_differences():
    q = QSpec.exp_sin()
    y = np.linspace(0, 1, 7)
    h = 1e-6
    v, d1, d2 = q.evaluate(y, y)
    fd1 = (q.evaluate(y + h, y)[0] - q.evaluate(y - h, y)[0]) / (2 * h)
    fd2 = (q.evaluate(y, y + h)[0] - q.evaluate(y, y - h)[0]) / (2 * h)
    assert np.allclose(d1, fd1, rtol=1e-7, atol=1e-7)
    assert np.allclose(d2, fd2, rtol=1e-7, atol=1e-7)
    assert np.all(v > 0)


def test_sampled_interpolant_exact_on_trig_polynomials():
    M = 16
    y = fourier.nodes(M)
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    f = lambda a, b: 2 + np.cos(2 * np.pi * (a + 2 * b)) + 0.5 * np.sin(2 * np.pi * 3 * a)
    q = QSpec.sampled(f(Y1, Y2))
    z = np.array([0.1234, 0.77])
    v, d1, _ = q.evaluate(z, z)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    assert np.allclose(v, f(Z1, Z2), atol=1e-13)
    exact_d1 = -2 * np.pi * np.sin(2 * np.pi * (Z1 + 2 * Z2)) + 0.5 * 6 * np.pi * np.cos(6 * np.pi * Z1)
    assert np.allclose(d1, exact_d1, atol=1e-11)


def test_sampled_labels_distinguish_arrays():
    rng = np.random.default_rng(0)
    a, b = QSpec.random_trig(rng), QSpec.random_trig(rng)
    assert a != b and hash(a) != hash(b)
    again = QSpec.random_trig(np.random.default_rng(0))
    assert again == a and np.array_equal(again.samples, a.samples)


def test_model_and_grid_validation():
    with pytest.raises(ModelError):
        TorusModel(0, 1, QSpec.constant())
    with pytest.raises(ModelError):
        TorusModel(1, 2, QSpec.constant())
    with pytest.raises(ModelError):
        SpectralGrid(12, modes=(0, 0))
    with pytest.raises(ModelError):
        SpectralGrid(2, modes=(0, 0))
    with pytest.raises(ModelError):
        SpectralGrid(8)
    with pytest.raises(ModelError):
        SpectralGrid(8, modes=(0, 0), passive_N=4)
    with pytest.raises(ModelError):
        SpectralGrid.block(8, (0,)).shape(4)


def test_grid_shapes():
    assert SpectralGrid.block(8, (1, -1)).shape(4) == (8, 8)
    assert SpectralGrid.full(8, 4).shape(6) == (4, 4, 4, 4, 8, 8)
    assert SpectralGrid.block(8, (0, 0)).refined().N == 16


@pytest.mark.parametrize("q", [QSpec.constant(2.0), QSpec.exp_sin(), QSpec.exp_sin(3)])
def test_compatibility_on_grid(q):
    rep = TorusModel(2, 1, q).check_compatibility(SpectralGrid.block(16, (0,) * 4))
    assert rep["taming"] and rep["symmetric"]
    assert rep["J_squared"] < 1e-12
    assert rep["q_min"] > 0


def test_flat_coframe_is_holomorphic():
    cof = build_coframe(TorusModel(1, 1, QSpec.constant(1.0)), 8)
    assert np.max(np.abs(cof.a)) == 0 and np.max(np.abs(cof.b)) == 0
    assert np.max(np.abs(cof.Gamma)) == 0


def test_coframe_duality_and_structure_coefficients():
    model = TorusModel(1, 1, QSpec.exp_sin())
    cof = build_coframe(model, 16)
    assert cof.duality_defect() < 1e-14
    y = fourier.nodes(16)
    s = 2 * np.pi * (y[:, None] + y[None, :])
    # q_1 = q_2 = 2 pi q cos(s), so a = (1 + i) pi cos(s) / 2 and b = conj(a)
    a_exact = (1 + 1j) * np.pi * np.cos(s) / 2
    assert np.max(np.abs(cof.a - a_exact)) < 1e-13
    assert np.max(np.abs(cof.b - np.conj(a_exact))) < 1e-13


def test_coframe_on_arbitrary_points():
    model = TorusModel(2, 2, QSpec.exp_sin())
    cof = coframe_on(model, [0.1, 0.3], [0.05])
    assert cof.q.shape == (2, 1)
    assert cof.duality_defect() < 1e-14
    # both perturbed planes carry sqrt(q) as their metric scale
    assert np.allclose(cof.scale[..., 0] ** 2, cof.q) and np.allclose(cof.scale[..., 1] ** 2, cof.q)
    assert np.allclose(cof.scale[..., 2], 1.0)


def test_fourier_diff_exact_below_nyquist():
    N = 16
    x = fourier.nodes(N)
    for k in range(-7, 8):
        f = np.exp(2j * np.pi * k * x)
        assert np.allclose(fourier.diff(f, 0), 2j * np.pi * k * f, atol=1e-11)
        assert np.allclose(fourier.diff_matrix(N) @ f, 2j * np.pi * k * f, atol=1e-11)
    E = fourier.free_basis(N)
    assert np.allclose(E.conj().T @ E, np.eye(N - 1), atol=1e-13)
