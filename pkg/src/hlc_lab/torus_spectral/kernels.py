"""Numerical kernels of stacked operators on band-limited discrete forms.

The unknowns are the Fourier coefficients ``z`` of each component with
``|k| < N/2`` on every collocated circle (the Nyquist mode is excluded: the
collocation derivative annihilates it, which would create spurious kernel).
For operators ``A_1..A_r`` on a common source space the quantity computed is

    sigma_j^2 = j-th eigenvalue of  sum_i A_i^H W_i A_i   relative to   W_s,

i.e. the singular values of the stacked operator between the discrete L^2
spaces. Small problems are solved densely; larger ones by LOBPCG with a
flat-symbol preconditioner followed by a Rayleigh-Ritz singular value
decomposition of the stacked operator itself, so that zero singular values
are resolved to about ``eps * sigma_max`` rather than ``sqrt(eps)``.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import DiscreteOperator, FormSpace, apply_free, stacked
from .model import ModelError, SpectralGrid, TorusModel

__all__ = [
    "SpectrumResult",
    "HarmonicReport",
    "smallest_singular_values",
    "kernel_dimension",
    "harmonic_dim",
    "ell_dim",
    "mode_block",
    "passive_modes",
    "KERNEL_OPERATORS",
    "ELL_OPERATORS",
]

DENSE_LIMIT = 400
GAP_THRESHOLD = 1e3
REL_TOL = 1e-8

# stacked operators whose kernel is h^{p,q} (resp. ell^{p,q}) on a bidegree
KERNEL_OPERATORS = {
    (1, 0): [("delbar", False), ("mubar", False)],
    (0, 1): [("del", False), ("mu", False)],
}
ELL_OPERATORS = [("delbar", False), ("delbar", True), ("mu", False), ("mu", True)]


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HLC_LAB_THREADS", "1")))
    except ValueError:
        return 1


class _FreeBasis:
    """Orthonormal Nyquist-free Fourier basis for every component of a form space."""

    def __init__(self, space: FormSpace):
        self.space = space
        self.shape = space.shape
        self.masks = [np.abs(np.fft.fftfreq(n, 1.0 / n)) < n / 2 for n in self.shape]
        sel = np.ones(self.shape, bool)
        for ax, mk in enumerate(self.masks):
            sh = [1] * len(self.shape)
            sh[ax] = -1
            sel = sel & mk.reshape(sh)
        self.sel = sel
        self.per_comp = int(sel.sum())
        self.size = space.ncomp * self.per_comp
        # squared wavenumber per free coefficient, for the preconditioner
        k2 = np.zeros(self.shape)
        circles = [c for c in space.grid.circles(space.model.real_dim)]
        fixed = sum((2 * np.pi * v) ** 2 for kind, v in circles if kind == "mode")
        for ax, n in enumerate(self.shape):
            sh = [1] * len(self.shape)
            sh[ax] = -1
            k2 = k2 + ((2 * np.pi * np.fft.fftfreq(n, 1.0 / n)) ** 2).reshape(sh)
        self.k2 = np.tile(k2[sel] + fixed, space.ncomp)

    def to_values(self, Z: np.ndarray) -> np.ndarray:
        """Coefficient columns ``(size, r)`` -> grid values ``(ncomp * G, r)``."""
        r = Z.shape[1]
        nc = self.space.ncomp
        full = np.zeros((nc, r) + self.shape, complex)
        Zc = Z.reshape(nc, self.per_comp, r)
        full[(slice(None), slice(None)) + np.nonzero(self.sel)] = np.swapaxes(Zc, 1, 2)
        axes = tuple(range(2, 2 + len(self.shape)))
        vals = np.fft.ifftn(full, axes=axes, norm="ortho")
        return np.swapaxes(vals.reshape(nc, r, -1), 1, 2).reshape(nc * self.space.G, r)

    def to_coeffs(self, X: np.ndarray) -> np.ndarray:
        """Adjoint of :meth:`to_values`."""
        r = X.shape[1]
        nc = self.space.ncomp
        vals = np.swapaxes(X.reshape(nc, self.space.G, r), 1, 2).reshape((nc, r) + self.shape)
        axes = tuple(range(2, 2 + len(self.shape)))
        F = np.fft.fftn(vals, axes=axes, norm="ortho")
        Z = F[(slice(None), slice(None)) + np.nonzero(self.sel)]
        return np.swapaxes(Z, 1, 2).reshape(nc * self.per_comp, r)


@dataclass
class SpectrumResult:
    """Smallest singular values of a stacked operator and the matching vectors."""

    singular_values: np.ndarray
    vectors: np.ndarray  # grid values, columns, orthonormal for the source product
    sigma_max: float
    method: str


def _sigma_max(ops: Sequence[DiscreteOperator]) -> float:
    mats = [op.normalized() for op in ops]
    n = mats[0].shape[1]

    def mv(x):
        return sum(M.conj().T @ (M @ x) for M in mats)

    A = spla.LinearOperator((n, n), matvec=mv, dtype=complex)
    v0 = np.random.default_rng(12345).standard_normal(n).astype(complex)
    lam = spla.eigsh(A, k=1, which="LA", v0=v0, tol=1e-6, return_eigenvectors=False)
    return float(np.sqrt(max(lam[0], 0.0)))


def _ritz(ops, basis: _FreeBasis, V: np.ndarray):
    """Singular values of the stacked operator restricted to ``span(E V)``."""
    X = basis.to_values(V)
    w = basis.space.weights
    G = X.conj().T @ (w[:, None] * X)
    G = 0.5 * (G + G.conj().T)
    R = sla.cholesky(G, lower=False)
    X = sla.solve_triangular(R, X.T, trans="T", lower=False).T  # X R^{-1}
    rows = [np.sqrt(op.target.weights)[:, None] * (op.matrix @ X) for op in ops]
    B = np.vstack(rows)
    U, s, Vh = np.linalg.svd(B, full_matrices=False)
    order = np.argsort(s)
    return s[order], X @ Vh.conj().T[:, order]


def smallest_singular_values(ops: Sequence[DiscreteOperator], count: int = 8,
                             method: str = "auto", seed: int = 0) -> SpectrumResult:
    """The ``count`` smallest singular values of ``[A_1; ...; A_r]`` on band-limited forms."""
    if not ops:
        raise ModelError("no operators to stack")
    space = ops[0].source
    basis = _FreeBasis(space)
    count = min(count, basis.size)
    smax = _sigma_max(ops)
    if method == "auto":
        method = "dense" if basis.size <= DENSE_LIMIT else "lobpcg"
    if method == "dense":
        V = np.eye(basis.size, dtype=complex)
        s, X = _ritz(ops, basis, V)
        return SpectrumResult(s[:count], X[:, :count], smax, "dense")
    if method != "lobpcg":
        raise ModelError(f"unknown method {method!r}")
    w = space.weights

    def K(Z):
        X = basis.to_values(Z.reshape(basis.size, -1))
        Y = sum(apply_free(op, op.target.weights[:, None] * apply_free(op, X), conj=True) for op in ops)
        return basis.to_coeffs(Y)

    def M(Z):
        Z = Z.reshape(basis.size, -1)
        return basis.to_coeffs(w[:, None] * basis.to_values(Z))

    wbar = float(np.mean(w))
    shift = (2 * np.pi) ** 2
    pre = 1.0 / (wbar * (basis.k2 + shift))

    def T(Z):
        return pre[:, None] * Z.reshape(basis.size, -1)

    n = basis.size
    Kop = spla.LinearOperator((n, n), matmat=K, matvec=lambda z: K(z[:, None])[:, 0], dtype=complex)
    Mop = spla.LinearOperator((n, n), matmat=M, matvec=lambda z: M(z[:, None])[:, 0], dtype=complex)
    Top = spla.LinearOperator((n, n), matmat=T, matvec=lambda z: T(z[:, None])[:, 0], dtype=complex)
    rng = np.random.default_rng(seed)
    block = count + 4
    X0 = rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block))
    # bias the start toward smooth vectors
    X0 *= (1.0 / (1.0 + basis.k2))[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lam, V = spla.lobpcg(Kop, X0, B=Mop, M=Top, largest=False, tol=1e-12 * smax ** 2, maxiter=100)
    s, X = _ritz(ops, basis, V)
    return SpectrumResult(s[:count], X[:, :count], smax, "lobpcg")


def kernel_dimension(sv: np.ndarray, sigma_max: float, rel_tol: float = REL_TOL) -> tuple[int, float]:
    """``(dim, gap_ratio)`` for ascending singular values ``sv``.

    ``dim`` counts values below ``rel_tol * sigma_max``. The gap ratio is the
    first retained value over the last discarded one; with nothing discarded
    it is the first value over the cut itself.
    """
    cut = rel_tol * sigma_max
    dim = int(np.sum(sv < cut))
    if dim >= len(sv):
        return dim, 0.0
    lo = sv[dim - 1] if dim else cut
    return dim, float(np.inf) if lo == 0 else float(sv[dim] / lo)


@dataclass
class BlockResult:
    modes: tuple[int, ...]
    N: int
    dim: int
    gap_ratio: float
    singular_values: list[float]
    method: str


@dataclass
class HarmonicReport:
    """Numerical kernel dimension of a stacked operator with its certification data."""

    bidegree: tuple[int, int]
    N: int
    dim: int
    singular_values: list[float]
    gap_ratio: float
    stabilized: bool
    determinate: bool
    quantity: str = "h"
    refined_dim: int | None = None
    refined_gap_ratio: float | None = None
    blocks: list[BlockResult] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "bidegree": list(self.bidegree),
            "N": self.N,
            "dim": self.dim,
            "singular_values": [float(v) for v in self.singular_values],
            "gap_ratio": _finite(self.gap_ratio),
            "stabilized": self.stabilized,
            "determinate": self.determinate,
            "refined_dim": self.refined_dim,
            "refined_gap_ratio": None if self.refined_gap_ratio is None else _finite(self.refined_gap_ratio),
        }
        if self.blocks:
            out["blocks"] = [{"modes": list(b.modes), "N": b.N, "dim": b.dim,
                              "gap_ratio": _finite(b.gap_ratio), "method": b.method} for b in self.blocks]
        return out


def _finite(x: float):
    return "inf" if np.isinf(x) else float(x)


def passive_modes(model: TorusModel, radius: int = 1) -> list[tuple[int, ...]]:
    """All passive Fourier multi-indices with entries in ``[-radius, radius]``, sorted."""
    r = range(-radius, radius + 1)
    return sorted(product(r, repeat=model.real_dim - 2))


def _entries_for(quantity: str, bidegree):
    if quantity == "h":
        if tuple(bidegree) not in KERNEL_OPERATORS:
            raise ModelError(f"h is implemented for bidegrees (1,0) and (0,1), not {bidegree}")
        return KERNEL_OPERATORS[tuple(bidegree)]
    if quantity == "ell":
        return ELL_OPERATORS
    raise ModelError(f"unknown quantity {quantity!r}")


def mode_block(model: TorusModel, N: int, modes, bidegree=(1, 0), quantity: str = "h") -> list[DiscreteOperator]:
    """The stacked kernel operator restricted to one passive Fourier mode."""
    grid = SpectralGrid.block(N, modes)
    return stacked(_entries_for(quantity, bidegree), tuple(bidegree), model, grid)


def _solve(ops, rel_tol, method, seed):
    count = 2 * ops[0].source.ncomp + 4
    res = smallest_singular_values(ops, count=count, method=method, seed=seed)
    dim, gap = kernel_dimension(res.singular_values, res.sigma_max, rel_tol)
    return res, dim, gap


def _block_job(args):
    model, N, modes, bidegree, quantity, rel_tol, method, seed = args
    ops = mode_block(model, N, modes, bidegree, quantity)
    res, dim, gap = _solve(ops, rel_tol, method, seed)
    return BlockResult(tuple(modes), N, dim, gap, [float(v) for v in res.singular_values], res.method)


def _blocks_at(model, N, bidegree, quantity, radius, rel_tol, method, seed):
    jobs = [(model, N, m, tuple(bidegree), quantity, rel_tol, method, seed) for m in passive_modes(model, radius)]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(_block_job, jobs))
    else:
        results = [_block_job(j) for j in jobs]
    return sorted(results, key=lambda b: b.modes)


def _summary(blocks):
    dim = sum(b.dim for b in blocks)
    gap = min(b.gap_ratio for b in blocks)
    zero = [b for b in blocks if not any(b.modes)]
    sv = zero[0].singular_values if zero else blocks[0].singular_values
    return dim, gap, sv


def harmonic_dim(bidegree, model: TorusModel, grid: SpectralGrid | int, rel_tol: float = REL_TOL,
                 radius: int = 1, refine: bool = True, quantity: str = "h", method: str = "auto",
                 seed: int = 0, gap_threshold: float = GAP_THRESHOLD) -> HarmonicReport:
    """Kernel dimension of ``[delbar; mubar]`` on (1,0) or ``[del; mu]`` on (0,1).

    ``grid`` is either an active resolution ``N`` (block reduction over the
    passive modes with entries in ``[-radius, radius]``) or a full
    ``SpectralGrid``. With ``refine`` the computation is repeated at ``2N``
    and the report is determinate only if both gap ratios reach
    ``gap_threshold`` and the dimensions agree.
    """
    bidegree = tuple(bidegree)

    def run(g):
        if isinstance(g, (int, np.integer)):
            blocks = _blocks_at(model, int(g), bidegree, quantity, radius, rel_tol, method, seed)
            dim, gap, sv = _summary(blocks)
            return int(g), dim, gap, sv, blocks
        ops = stacked(_entries_for(quantity, bidegree), bidegree, model, g)
        res, dim, gap = _solve(ops, rel_tol, method, seed)
        return g.N, dim, gap, [float(v) for v in res.singular_values], []

    N, dim, gap, sv, blocks = run(grid)
    keep = sv[: 2 * dim + 4]
    rdim = rgap = None
    stabilized = False
    if refine:
        finer = 2 * grid if isinstance(grid, (int, np.integer)) else grid.refined()
        _, rdim, rgap, _, rblocks = run(finer)
        stabilized = rdim == dim
        blocks = blocks + rblocks
    determinate = gap >= gap_threshold and (not refine or (stabilized and rgap >= gap_threshold))
    return HarmonicReport(bidegree, N, dim, keep, gap, stabilized, determinate, quantity,
                          rdim, rgap, blocks)


def ell_dim(bidegree, model, grid, **kw) -> HarmonicReport:
    """``ell^{p,q}``: kernel of ``[delbar; delbar^*; mu; mu^*]`` on ``(p, q)``."""
    return harmonic_dim(bidegree, model, grid, quantity="ell", **kw)
