"""Kernel dimensions: gap certification, solvers, block reduction and determinism."""

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlc_lab.torus_spectral import (ModelError, QSpec, SpectralGrid, TorusModel, ell_dim, harmonic_dim,
                                    kernel_dimension, mode_block, passive_modes,
                                    smallest_singular_values)

EXP_SIN = TorusModel(1, 1, QSpec.exp_sin())
FLAT = TorusModel(1, 1, QSpec.constant(1.0))


def test_kernel_dimension_cases():
    assert kernel_dimension(np.array([1e-14, 2e-14, 3.0, 4.0]), 10.0) == (2, 1.5e14)
    dim, gap = kernel_dimension(np.array([2.0, 3.0]), 10.0)
    assert dim == 0 and gap == pytest.approx(2.0 / 1e-7)
    dim, gap = kernel_dimension(np.array([0.0, 1.0]), 1.0)
    assert dim == 1 and gap == np.inf
    assert kernel_dimension(np.array([0.0, 0.0]), 1.0) == (2, 0.0)


@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6), st.integers(0, 3))
def test_kernel_dimension_counts_planted_zeros(nonzero, zeros):
    sv = np.sort(np.concatenate([np.full(zeros, 1e-15), nonzero]))
    dim, gap = kernel_dimension(sv, 1.0)
    assert dim == zeros
    assert gap >= 1e3


def test_passive_modes():
    modes = passive_modes(TorusModel(2, 1, QSpec.constant()), 1)
    assert len(modes) == 81 and modes == sorted(modes) and (0, 0, 0, 0) in modes
    assert len(passive_modes(EXP_SIN, 2)) == 25


def test_dense_and_iterative_agree():
    ops = mode_block(EXP_SIN, 16, (0, 1))
    a = smallest_singular_values(ops, count=6, method="dense")
    b = smallest_singular_values(ops, count=6, method="lobpcg")
    assert np.allclose(a.singular_values, b.singular_values, rtol=1e-8)
    assert a.sigma_max == b.sigma_max
    with pytest.raises(ModelError):
        smallest_singular_values(ops, method="arnoldi")


def test_kernel_vectors_are_annihilated():
    ops = mode_block(EXP_SIN, 16, (0, 0))
    res = smallest_singular_values(ops, count=4)
    v = res.vectors[:, 0]
    nv = ops[0].source.norm(v)
    r = np.sqrt(sum(op.target.norm(op @ v) ** 2 for op in ops))
    assert abs(nv - 1) < 1e-10
    assert r < 1e-8 * res.sigma_max


def test_zero_block_carries_kernel_at_16():
    assert harmonic_dim((1, 0), EXP_SIN, SpectralGrid.block(16, (0, 0)), refine=False).dim == 1
    for modes in [(1, 0), (0, -1), (1, 1)]:
        rep = harmonic_dim((1, 0), EXP_SIN, SpectralGrid.block(16, modes), refine=False)
        assert rep.dim == 0 and rep.gap_ratio >= 1e3


def test_flat_t4_dimensions():
    for bideg in [(1, 0), (0, 1)]:
        rep = harmonic_dim(bideg, FLAT, 8)
        assert rep.determinate and rep.dim == 2
    assert ell_dim((1, 0), FLAT, 8).dim == 2


def test_unsupported_bidegree():
    with pytest.raises(ModelError):
        harmonic_dim((1, 1), EXP_SIN, 8)
    with pytest.raises(ModelError):
        harmonic_dim((1, 0), EXP_SIN, 8, quantity="betti")


def test_report_serializes():
    rep = harmonic_dim((1, 0), EXP_SIN, 8)
    doc = json.loads(json.dumps(rep.as_dict()))
    assert doc["dim"] == 1 and doc["determinate"] is True
    assert len(doc["blocks"]) == 18  # 9 blocks at N and at 2N
    assert len(doc["singular_values"]) == 2 * doc["dim"] + 4


def test_same_seed_same_numbers():
    a = harmonic_dim((1, 0), EXP_SIN, 16, refine=False, seed=3)
    b = harmonic_dim((1, 0), EXP_SIN, 16, refine=False, seed=3)
    assert a.singular_values == b.singular_values and a.gap_ratio == b.gap_ratio


def test_thread_pool_matches_serial(monkeypatch):
    serial = harmonic_dim((1, 0), EXP_SIN, 8, refine=False)
    monkeypatch.setenv("HLC_LAB_THREADS", "3")
    pooled = harmonic_dim((1, 0), EXP_SIN, 8, refine=False)
    assert [b.modes for b in pooled.blocks] == [b.modes for b in serial.blocks]
    assert pooled.as_dict() == serial.as_dict()
