"""Assembled operators on torus forms: structure equations, bookkeeping, adjoints and residuals."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlc_lab.torus_spectral import (PIECES, FormSpace, QSpec, SpectralGrid, TorusModel, adjoint,
                                    adjoint_residual, apply_d_coordinate, assemble,
                                    band_limited_trial, build_coframe, d_squared_residual,
                                    decomposition_residual, laplacian, pointwise)
from hlc_lab.torus_spectral.assembly import apply_free

EXP_SIN = TorusModel(1, 1, QSpec.exp_sin())
FLAT = TorusModel(1, 1, QSpec.constant(1.0))


def theta1(model, grid):
    """The constant-coefficient form theta^1 in the (1,0) space."""
    S = FormSpace(model, grid, (1, 0))
    u = np.zeros((S.ncomp, S.G), complex)
    u[S.index[(0,)]] = 1.0
    return S, u.ravel()


def component(op, v, mono):
    return op.target.components(v)[op.target.index[mono]].reshape(op.target.shape)


# monomial indices on T^4: theta^1 = 0, theta^2 = 1, conj theta^1 = 2, conj theta^2 = 3


def test_structure_equations_on_theta1():
    grid = SpectralGrid.block(16, (0, 0))
    cof = build_coframe(EXP_SIN, 16)
    S, u = theta1(EXP_SIN, grid)
    mubar = assemble("mubar", S, EXP_SIN, grid)
    v = mubar @ u
    assert np.max(np.abs(component(mubar, v, (2, 3)) - cof.a)) < 1e-13
    de = assemble("del", S, EXP_SIN, grid)
    v = de @ u
    assert np.max(np.abs(component(de, v, (0, 1)) + cof.b)) < 1e-13
    db = assemble("delbar", S, EXP_SIN, grid)
    v = db @ u
    # delbar theta^1 = -b theta^2 ^ conj theta^1 - a theta^1 ^ conj theta^2
    assert np.max(np.abs(component(db, v, (1, 2)) + cof.b)) < 1e-13
    assert np.max(np.abs(component(db, v, (0, 3)) + cof.a)) < 1e-13
    mu = assemble("mu", S, EXP_SIN, grid)
    assert mu.target.ncomp == 0 or np.max(np.abs(mu @ u)) == 0


def test_integrable_pieces_vanish():
    grid = SpectralGrid.block(8, (1, 0))
    assert assemble("mubar", (1, 0), FLAT, grid).matrix.count_nonzero() == 0
    assert abs(laplacian("mubar", (1, 0), FLAT, grid).matrix).max() == 0
    assert abs(adjoint(assemble("mu", (0, 2), FLAT, grid)).matrix).max() == 0


bidegrees_t4 = [(p, q) for p in range(3) for q in range(3)]


@given(st.sampled_from(sorted(PIECES)), st.sampled_from(bidegrees_t4))
def test_bidegree_bookkeeping(tag, bideg):
    grid = SpectralGrid.block(8, (1, -1))
    op = assemble(tag, bideg, EXP_SIN, grid)
    dp, dq = PIECES[tag]
    expect = (bideg[0] + dp, bideg[1] + dq)
    if op.target.ncomp:
        assert op.target.bidegrees == [expect]
    assert op.shape == (op.target.size, op.source.size)


@pytest.mark.parametrize("model", [EXP_SIN, TorusModel(2, 2, QSpec.exp_sin()),
                                   TorusModel(1, 1, QSpec.random_trig(np.random.default_rng(5)))],
                         ids=["t4", "t6", "t4-trig"])
def test_decomposition_matches_d(model):
    grid = SpectralGrid.block(16, (1,) + (0,) * (model.real_dim - 3))
    for k in range(0, model.real_dim):
        assert decomposition_residual(model, grid, k) <= 1e-10


def test_coordinate_route_matches_d():
    grid = SpectralGrid.block(16, (0, 1))
    rng = np.random.default_rng(2)
    for k in (0, 1, 2):
        S = FormSpace(EXP_SIN, grid, k)
        d = assemble("d", S, EXP_SIN, grid)
        u = band_limited_trial(S, rng, K=2)
        ref = d @ u
        other = apply_d_coordinate(EXP_SIN, grid, k, u)
        assert d.target.norm(ref - other) / S.norm(u) < 1e-10


@pytest.mark.parametrize("k", [0, 1, 2])
def test_d_squared_vanishes_when_resolved(k):
    for N in (16, 32):
        assert d_squared_residual(EXP_SIN, SpectralGrid.block(N, (1, 0)), k) <= 1e-8
    assert d_squared_residual(FLAT, SpectralGrid.block(8, (1, 0)), k) <= 1e-12


def test_d_squared_converges_under_refinement():
    # products of coefficients alias at N = 8; from N = 16 the residual is at rounding level
    r8 = d_squared_residual(EXP_SIN, SpectralGrid.block(8, (1, 0)), 1)
    r16 = d_squared_residual(EXP_SIN, SpectralGrid.block(16, (1, 0)), 1)
    assert r16 < 1e-8 * r8


@pytest.mark.parametrize("tag,bideg", [("del", (1, 0)), ("delbar", (0, 1)), ("mu", (0, 1)),
                                       ("mubar", (1, 0)), ("d", 1)])
def test_discrete_adjoint(tag, bideg):
    op = assemble(tag, bideg, EXP_SIN, SpectralGrid.block(16, (0, 1)))
    assert adjoint_residual(op) <= 1e-10
    assert adjoint(adjoint(op)).matrix.shape == op.matrix.shape


def test_flat_function_laplacian_fourier_oracle():
    N = 8
    for modes in [(0, 0), (1, -1)]:
        grid = SpectralGrid.block(N, modes)
        lap = laplacian("d", 0, FLAT, grid)
        S = lap.source
        x1, x2 = S.nodes()
        ks = range(-(N // 2) + 1, N // 2)
        for k1, k2 in itertools.product(ks, ks):
            f = np.exp(2j * np.pi * (k1 * x1 + k2 * x2)).ravel()
            lam = 4 * np.pi ** 2 * (modes[0] ** 2 + modes[1] ** 2 + k1 ** 2 + k2 ** 2)
            assert np.max(np.abs(lap @ f - lam * f)) < 1e-9 * max(lam, 1)


def test_flat_function_laplacian_spectrum():
    N = 8
    grid = SpectralGrid.block(N, (0, 1))
    lap = laplacian("d", 0, FLAT, grid).matrix.toarray()
    from hlc_lab.torus_spectral import fourier
    E = np.kron(fourier.free_basis(N), fourier.free_basis(N))
    ev = np.sort(np.linalg.eigvalsh(E.conj().T @ lap @ E))
    ks = np.arange(-(N // 2) + 1, N // 2)
    expect = np.sort([4 * np.pi ** 2 * (1 + a * a + b * b) for a in ks for b in ks])
    assert np.allclose(ev, expect, rtol=1e-12)


def test_matrix_free_application_matches_matrices():
    grid = SpectralGrid.block(16, (1, 0))
    rng = np.random.default_rng(4)
    for tag, bideg in [("delbar", (1, 0)), ("mubar", (1, 0)), ("del", (0, 1))]:
        op = assemble(tag, bideg, EXP_SIN, grid)
        X = rng.normal(size=(op.source.size, 2)) + 1j * rng.normal(size=(op.source.size, 2))
        Y = rng.normal(size=(op.target.size, 2)) + 1j * rng.normal(size=(op.target.size, 2))
        ref = op.matrix @ X
        assert np.max(np.abs(apply_free(op, X) - ref)) < 1e-10 * np.max(np.abs(ref))
        ref_h = op.matrix.conj().T @ Y
        assert np.max(np.abs(apply_free(op, Y, conj=True) - ref_h)) < 1e-10 * np.max(np.abs(ref_h))
        adj = adjoint(op)
        assert np.max(np.abs(apply_free(adj, Y) - adj.matrix @ Y)) < 1e-10 * np.max(np.abs(adj.matrix @ Y))


def test_pointwise_star_squares_to_sign():
    grid = SpectralGrid.block(8, (0, 1))
    rng = np.random.default_rng(1)
    for bideg in [(1, 0), (0, 1), (1, 1)]:
        star = pointwise("star", bideg, EXP_SIN, grid)
        back = pointwise("star", star.target, EXP_SIN, grid)
        u = band_limited_trial(star.source, rng)
        k = sum(bideg)
        assert np.max(np.abs(back @ (star @ u) - (-1) ** (k * (4 - k)) * u)) < 1e-12


def test_pointwise_star_is_isometry():
    grid = SpectralGrid.block(8, (0, 1))
    rng = np.random.default_rng(3)
    star = pointwise("star", (1, 0), EXP_SIN, grid)
    u = band_limited_trial(star.source, rng)
    assert abs(star.target.norm(star @ u) - star.source.norm(u)) < 1e-12 * star.source.norm(u)
