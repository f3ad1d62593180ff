"""Sparse pseudospectral operators on forms of a torus model.

A discrete form is a stack of grid functions, one per monomial ``zeta^S`` of
the coframe ``zeta = (theta, conj theta)``, flattened component-major.
Derivatives are exact on trigonometric interpolants (Nyquist dropped);
coefficients multiply pointwise at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .. import bigraded_exterior as bx
from ..exact import to_complex
from . import fourier
from .model import CoframeField, ModelError, SpectralGrid, TorusModel, build_coframe

__all__ = [
    "PIECES",
    "FormSpace",
    "DiscreteOperator",
    "assemble",
    "adjoint",
    "laplacian",
    "pointwise",
    "coframe",
    "apply_d_coordinate",
    "stacked",
    "apply_free",
]

PIECES = {"mu": (2, -1), "del": (1, 0), "delbar": (0, 1), "mubar": (-1, 2)}


@lru_cache(maxsize=64)
def coframe(model: TorusModel, N: int) -> CoframeField:
    return build_coframe(model, N)


def _sign_merge(parts):
    sign, t = bx.merge_sign(parts)
    return sign, t


def bidegree_monomials(m: int, p: int, q: int) -> list[tuple[int, ...]]:
    if not (0 <= p <= m and 0 <= q <= m):
        return []
    return [tuple(I) + tuple(m + k for k in K)
            for I in combinations(range(m), p) for K in combinations(range(m), q)]


def bidegree_of(mono: Sequence[int], m: int) -> tuple[int, int]:
    p = sum(1 for a in mono if a < m)
    return p, len(mono) - p


class FormSpace:
    """Discrete forms with the given bidegrees on ``grid``.

    ``bidegrees`` is a ``(p, q)`` pair or a list of pairs; an integer ``k``
    means every bidegree of total degree ``k``.
    """

    def __init__(self, model: TorusModel, grid: SpectralGrid, bidegrees):
        self.model, self.grid = model, grid
        m = model.m
        if isinstance(bidegrees, (int, np.integer)):
            k = int(bidegrees)
            bidegrees = [(p, k - p) for p in range(max(0, k - m), min(m, k) + 1)]
        elif isinstance(bidegrees, tuple) and len(bidegrees) == 2 and isinstance(bidegrees[0], (int, np.integer)):
            bidegrees = [bidegrees]
        self.bidegrees = [tuple(b) for b in bidegrees]
        self.monomials = [s for (p, q) in self.bidegrees for s in bidegree_monomials(m, p, q)]
        self.index = {s: i for i, s in enumerate(self.monomials)}
        self.shape = grid.shape(model.real_dim)
        self.G = int(np.prod(self.shape))

    def __repr__(self):
        return f"FormSpace({self.bidegrees}, N={self.grid.N})"

    @property
    def ncomp(self) -> int:
        return len(self.monomials)

    @property
    def size(self) -> int:
        return self.ncomp * self.G

    def broadcast(self, plane_values: np.ndarray) -> np.ndarray:
        """Active-plane array ``(N, N)`` as a flat grid function."""
        full = np.broadcast_to(plane_values, self.shape)
        return np.ascontiguousarray(full).ravel()

    def scale_of(self, mono: Sequence[int]) -> np.ndarray:
        """``s_S = prod sqrt(q_plane)`` with ``zeta^S = s_S zeta_std^S``."""
        cof = coframe(self.model, self.grid.N)
        s = np.ones(cof.q.shape)
        for A in mono:
            s = s * cof.scale[..., A % self.model.m]
        return s

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights ``h * |zeta^S|^2`` (``det g = 1``), flat."""
        h = self.grid.cell_volume(self.model.real_dim)
        if self.ncomp == 0:
            return np.zeros(0)
        w = [self.broadcast(self.scale_of(S) ** 2 * 2.0 ** len(S)) * h for S in self.monomials]
        return np.concatenate(w)

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        return complex(np.sum(self.weights * u * np.conj(v)))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(u) ** 2)))

    def components(self, u: np.ndarray) -> np.ndarray:
        return u.reshape(self.ncomp, *self.shape)

    def nodes(self) -> list[np.ndarray]:
        """Coordinates of the collocated circles, as open meshgrids."""
        grids = [fourier.nodes(n) for n in self.shape]
        return np.meshgrid(*grids, indexing="ij", sparse=True)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Sparse matrix between discrete form spaces.

    ``terms`` (first-order operators only) keeps the symbolic description
    ``(t, s, coord, coefficient)`` used for matrix-free application;
    ``parent`` is set on adjoints.
    """

    matrix: sp.csr_matrix
    tag: str
    source: FormSpace
    target: FormSpace
    terms: tuple | None = None
    parent: "DiscreteOperator | None" = None

    def __matmul__(self, u):
        return self.matrix @ u

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    @property
    def shape(self):
        return self.matrix.shape

    def normalized(self) -> sp.csr_matrix:
        """``W_t^{1/2} A W_s^{-1/2}``: the operator in orthonormal coordinates."""
        wt = sp.diags(np.sqrt(self.target.weights))
        ws = sp.diags(1.0 / np.sqrt(self.source.weights))
        return (wt @ self.matrix @ ws).tocsr()


def _diff_operator(grid: SpectralGrid, real_dim: int, coord: int) -> sp.spmatrix:
    key = (grid.N, grid.modes, grid.passive_N, real_dim, coord)
    return _diff_cache(*key)


@lru_cache(maxsize=256)
def _diff_cache(N, modes, passive_N, real_dim, coord):
    grid = SpectralGrid(N, modes, passive_N)
    circles = grid.circles(real_dim)
    kind, val = circles[coord]
    shape = grid.shape(real_dim)
    G = int(np.prod(shape))
    if kind == "mode":
        return sp.identity(G, dtype=complex, format="csr") * (2j * np.pi * val)
    axis = sum(1 for c in circles[:coord] if c[0] == "grid")
    mats = [sp.identity(n, format="csr") for n in shape]
    mats[axis] = sp.csr_matrix(fourier.diff_matrix(shape[axis]))
    out = mats[0]
    for M in mats[1:]:
        out = sp.kron(out, M, format="csr")
    return out.astype(complex)


def _derivative(f: np.ndarray, grid: SpectralGrid, real_dim: int, coord: int, axis0: int) -> np.ndarray:
    """``d/dx^coord`` of grid values ``f`` whose collocated axes start at ``axis0``."""
    circles = grid.circles(real_dim)
    kind, val = circles[coord]
    if kind == "mode":
        return (2j * np.pi * val) * f
    axis = axis0 + sum(1 for c in circles[:coord] if c[0] == "grid")
    return fourier.diff(f, axis=axis)


def apply_free(op: DiscreteOperator, X: np.ndarray, conj: bool = False) -> np.ndarray:
    """``A X`` (or ``A^H X`` with ``conj``) for value columns ``X``, derivatives by FFT.

    Agrees with ``op.matrix`` to rounding; falls back to the matrix when the
    operator carries no symbolic terms.
    """
    if op.terms is None and op.parent is not None and op.parent.terms is not None:
        par = op.parent
        ws, wt = par.source.weights[:, None], par.target.weights[:, None]
        # adjoint = W_s^{-1} A^H W_t, and its conjugate transpose W_t A W_s^{-1}
        if not conj:
            return apply_free(par, wt * X, conj=True) / ws
        return wt * apply_free(par, X / ws)
    if op.terms is None:
        M = op.matrix.conj().T if conj else op.matrix
        return M @ X
    src, tgt = (op.target, op.source) if conj else (op.source, op.target)
    r = X.shape[1]
    shape = op.source.shape
    real_dim = op.source.model.real_dim
    Xc = X.reshape((src.ncomp,) + shape + (r,))
    out = np.zeros((tgt.ncomp,) + shape + (r,), complex)
    for t, s, coord, c in op.terms:
        cc = c[..., None]
        if not conj:
            f = Xc[s] if coord is None else _derivative(Xc[s], op.source.grid, real_dim, coord, 0)
            out[t] += cc * f
        else:
            g = np.conj(cc) * Xc[t]
            # the collocation derivative is real skew, and a mode factor 2 pi i n is imaginary
            out[s] += g if coord is None else -_derivative(g, op.source.grid, real_dim, coord, 0)
    return out.reshape(tgt.ncomp * op.source.G, r)


def _piece_of_shift(shift):
    for name, s in PIECES.items():
        if s == tuple(shift):
            return name
    raise AssertionError(f"unexpected bidegree shift {shift}")


def _terms(model: TorusModel, cof: CoframeField, src: FormSpace):
    """Yield ``(piece, target monomial, source index, coefficient (N,N), coord or None, sign)``."""
    m, D = model.m, model.real_dim
    tp = lambda A: (1, 0) if A < m else (0, 1)
    for s_idx, S in enumerate(src.monomials):
        # df ^ zeta^S
        for B in range(D):
            sign, T = _sign_merge(((B,), S))
            if not sign:
                continue
            piece = "del" if B < m else "delbar"
            for i in range(D):
                c = cof.Cinv[..., i, B]
                if np.all(c == 0):
                    continue
                yield piece, T, s_idx, sign * c, i
        # f d(zeta^S)
        for r, A in enumerate(S):
            for B in range(D):
                for Dd in range(B + 1, D):
                    g = cof.Gamma[..., A, B, Dd]
                    if not np.any(g):
                        continue
                    sign, T = _sign_merge((S[:r], (B, Dd), S[r + 1:]))
                    if not sign:
                        continue
                    if r % 2:
                        sign = -sign
                    shift = tuple(np.add(tp(B), tp(Dd)) - np.array(tp(A)))
                    yield _piece_of_shift(shift), T, s_idx, sign * g, None


def _target_space(model, grid, src: FormSpace, tag: str) -> FormSpace:
    if tag == "d":
        degs = {sum(b) for b in src.bidegrees}
        if len(degs) != 1:
            raise ModelError("d needs a source of a single total degree")
        return FormSpace(model, grid, degs.pop() + 1)
    dp, dq = PIECES[tag]
    return FormSpace(model, grid, [(p + dp, q + dq) for (p, q) in src.bidegrees])


def assemble(tag: str, bidegree, model: TorusModel, grid: SpectralGrid) -> DiscreteOperator:
    """Sparse matrix of ``mu``, ``del``, ``delbar``, ``mubar`` or ``d`` on the given forms."""
    if tag not in PIECES and tag != "d":
        raise ModelError(f"unknown operator {tag!r}")
    if grid.N < 4:
        raise ModelError("grid too small")
    src = bidegree if isinstance(bidegree, FormSpace) else FormSpace(model, grid, bidegree)
    tgt = _target_space(model, grid, src, tag)
    cof = coframe(model, grid.N)
    blocks: dict[tuple[int, int], sp.spmatrix] = {}
    diag_acc: dict[tuple[int, int], np.ndarray] = {}
    deriv_acc: dict[tuple[int, int, int], np.ndarray] = {}
    for piece, T, s_idx, c, coord in _terms(model, cof, src):
        if tag != "d" and piece != tag:
            continue
        t_idx = tgt.index.get(T)
        if t_idx is None:
            raise AssertionError(f"{piece} maps {src.monomials[s_idx]} outside the target space")
        if coord is None:
            key = (t_idx, s_idx)
            diag_acc[key] = diag_acc.get(key, 0) + c
        else:
            key = (t_idx, s_idx, coord)
            deriv_acc[key] = deriv_acc.get(key, 0) + c
    terms = []
    for (t, s), c in diag_acc.items():
        blk = sp.diags(src.broadcast(c).astype(complex))
        blocks[(t, s)] = blocks.get((t, s), 0) + blk
        terms.append((t, s, None, np.asarray(c, complex)))
    for (t, s, i), c in deriv_acc.items():
        blk = sp.diags(src.broadcast(c).astype(complex)) @ _diff_operator(grid, model.real_dim, i)
        blocks[(t, s)] = blocks.get((t, s), 0) + blk
        terms.append((t, s, i, np.asarray(c, complex)))
    M = _bmat(blocks, tgt.ncomp, src.ncomp, src.G)
    return DiscreteOperator(M, tag, src, tgt, tuple(terms))


def _bmat(blocks, nt, ns, G) -> sp.csr_matrix:
    if nt == 0 or ns == 0:
        return sp.csr_matrix((nt * G, ns * G), dtype=complex)
    grid = [[blocks.get((t, s)) for s in range(ns)] for t in range(nt)]
    # sp.bmat needs at least one block per row/column to infer shapes
    for t in range(nt):
        for s in range(ns):
            if grid[t][s] is None and (t == s or all(grid[t][x] is None for x in range(ns))):
                grid[t][s] = sp.csr_matrix((G, G), dtype=complex)
    for s in range(ns):
        if all(grid[t][s] is None for t in range(nt)):
            grid[0][s] = sp.csr_matrix((G, G), dtype=complex)
    return sp.bmat(grid, format="csr", dtype=complex)


def adjoint(op: DiscreteOperator) -> DiscreteOperator:
    """``W_s^{-1} A^H W_t``: the adjoint for the discrete L^2 products."""
    ws_inv = sp.diags(1.0 / op.source.weights) if op.source.size else sp.csr_matrix((0, 0))
    wt = sp.diags(op.target.weights) if op.target.size else sp.csr_matrix((0, 0))
    M = (ws_inv @ op.matrix.conj().T @ wt).tocsr() if op.target.size and op.source.size else \
        sp.csr_matrix((op.source.size, op.target.size), dtype=complex)
    tag = op.tag[len("adjoint-of-"):] if op.tag.startswith("adjoint-of-") else f"adjoint-of-{op.tag}"
    return DiscreteOperator(M, tag, op.target, op.source, None, op)


def _source_for(tag, bidegree):
    dp, dq = PIECES[tag]
    p, q = bidegree
    return (p - dp, q - dq)


def laplacian(tag: str, bidegree, model: TorusModel, grid: SpectralGrid) -> DiscreteOperator:
    """``delta delta^* + delta^* delta`` on ``bidegree`` (or total degree for ``d``)."""
    if tag == "d":
        k = bidegree if isinstance(bidegree, (int, np.integer)) else sum(bidegree)
        space = FormSpace(model, grid, k)
        up = assemble("d", space, model, grid)
        M = adjoint(up).matrix @ up.matrix
        if k >= 1:
            down = assemble("d", FormSpace(model, grid, k - 1), model, grid)
            M = M + down.matrix @ adjoint(down).matrix
        return DiscreteOperator(M.tocsr(), "laplacian-of-d", space, space)
    space = FormSpace(model, grid, bidegree)
    up = assemble(tag, space, model, grid)
    M = adjoint(up).matrix @ up.matrix
    p0, q0 = _source_for(tag, bidegree)
    if bidegree_monomials(model.m, p0, q0):
        down = assemble(tag, (p0, q0), model, grid)
        M = M + down.matrix @ adjoint(down).matrix
    return DiscreteOperator(M.tocsr(), f"laplacian-of-{tag}", space, space)


def stacked(entries: Iterable[tuple[str, bool]], bidegree, model, grid) -> list[DiscreteOperator]:
    """Operators ``delta`` or ``delta^*`` acting on ``bidegree``; empty targets dropped."""
    out = []
    for tag, adj in entries:
        if not adj:
            op = assemble(tag, bidegree, model, grid)
        else:
            p0, q0 = _source_for(tag, bidegree)
            if not bidegree_monomials(model.m, p0, q0):
                continue
            op = adjoint(assemble(tag, (p0, q0), model, grid))
        if op.target.size:
            out.append(op)
    return out


# ---------------------------------------------------------------- pointwise


@lru_cache(maxsize=16)
def _standard_blocks(m: int, name: str) -> dict[int, np.ndarray]:
    """Float matrices of a pointwise operator on the standard model, bigraded basis."""
    model = bx.HermitianModel.standard(m)
    op = model.operator(name)
    out = {}
    for k, M in op.blocks.items():
        out[k] = np.array([[to_complex(v) for v in row] for row in M.to_list()], dtype=complex).reshape(M.shape)
    return out


def _bigraded_index(m: int, k: int) -> dict[tuple[int, ...], int]:
    model_basis = []
    for p in range(max(0, k - m), min(m, k) + 1):
        q = k - p
        for I in combinations(range(m), p):
            for K in combinations(range(m), q):
                model_basis.append(tuple(I) + tuple(m + x for x in K))
    return {s: i for i, s in enumerate(model_basis)}


POINTWISE_DEGREE = {
    "L": lambda k, m: k + 2,
    "Lambda": lambda k, m: k - 2,
    "star": lambda k, m: 2 * m - k,
    "star_s": lambda k, m: 2 * m - k,
    "J": lambda k, m: k,
}

POINTWISE_TARGET = {
    "L": lambda p, q, m: (p + 1, q + 1),
    "Lambda": lambda p, q, m: (p - 1, q - 1),
    "star": lambda p, q, m: (m - q, m - p),
    "star_s": lambda p, q, m: (m - q, m - p),
    "J": lambda p, q, m: (p, q),
}


def pointwise(name: str, bidegree, model: TorusModel, grid: SpectralGrid) -> DiscreteOperator:
    """Zeroth-order operator ``L``, ``Lambda``, ``star``, ``star_s`` or ``J`` in the theta frame."""
    src = bidegree if isinstance(bidegree, FormSpace) else FormSpace(model, grid, bidegree)
    m = model.m
    tgt_b = [POINTWISE_TARGET[name](p, q, m) for (p, q) in src.bidegrees]
    tgt = FormSpace(model, grid, tgt_b)
    std = _standard_blocks(m, name)
    blocks = {}
    for s_idx, S in enumerate(src.monomials):
        k = len(S)
        M = std[k]
        row_index = _bigraded_index(m, POINTWISE_DEGREE[name](k, m))
        col = _bigraded_index(m, k)[S]
        sS = src.scale_of(S)
        for T, t_idx in tgt.index.items():
            v = M[row_index[T], col] if T in row_index else 0
            if v == 0:
                continue
            c = v * sS / tgt.scale_of(T)
            blocks[(t_idx, s_idx)] = sp.diags(src.broadcast(c).astype(complex))
    Mx = _bmat(blocks, tgt.ncomp, src.ncomp, src.G)
    return DiscreteOperator(Mx, name, src, tgt)


# ---------------------------------------------------- coordinate-frame route


def _compound_field(C: np.ndarray, k: int) -> tuple[list, np.ndarray]:
    """Pointwise k-th compound of ``C[..., A, a]``: minors over all index subsets."""
    D = C.shape[-1]
    subs = list(combinations(range(D), k))
    out = np.empty(C.shape[:-2] + (len(subs), len(subs)), complex)
    for i, R in enumerate(subs):
        for j, S in enumerate(subs):
            if k == 0:
                out[..., i, j] = 1
            else:
                out[..., i, j] = np.linalg.det(C[..., list(R), :][..., list(S)])
    return subs, out


def _upsample(f: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolant of ``f`` (last two axes) on a ``factor``-times finer grid."""
    if factor == 1:
        return f.astype(complex)
    N1, N2 = f.shape[-2:]
    F = np.fft.fftn(f, axes=(-2, -1))
    # raw FFT wavenumbers: the Nyquist slot must not alias onto k = 0
    k1 = np.fft.fftfreq(N1, 1.0 / N1).astype(int)
    k2 = np.fft.fftfreq(N2, 1.0 / N2).astype(int)
    idx1 = np.where(np.abs(k1) < N1 // 2)[0]
    idx2 = np.where(np.abs(k2) < N2 // 2)[0]
    fine = np.zeros(f.shape[:-2] + (factor * N1, factor * N2), complex)
    fi1 = k1[idx1] % (factor * N1)
    fi2 = k2[idx2] % (factor * N2)
    fine[..., fi1[:, None], fi2[None, :]] = F[..., idx1[:, None], idx2[None, :]]
    return np.fft.ifftn(fine, axes=(-2, -1)) * factor * factor


def apply_d_coordinate(model: TorusModel, grid: SpectralGrid, degree: int, u: np.ndarray,
                       oversample: int = 4) -> np.ndarray:
    """``d`` computed in the coordinate coframe ``dx``, as an independent check.

    ``u`` holds theta-frame coefficients on ``FormSpace(model, grid, degree)``.
    The coefficients are converted to the ``dx`` frame with pointwise minors of
    ``C``, differentiated (products are formed on an ``oversample``-times finer
    active grid so the product rule is resolved exactly for band-limited
    input) and converted back.
    """
    src = FormSpace(model, grid, degree)
    tgt = FormSpace(model, grid, degree + 1)
    D = model.real_dim
    circles = grid.circles(D)
    fine_N = grid.N * oversample
    cof_f = build_coframe(model, fine_N)
    subs_k, Mk = _compound_field(cof_f.C, degree)
    subs_k1, Minv = _compound_field(np.linalg.inv(cof_f.C), degree + 1)
    zeta_k = {s: i for i, s in enumerate(subs_k)}
    zeta_k1 = {s: i for i, s in enumerate(subs_k1)}
    ucomp = src.components(u)
    full = np.zeros((len(subs_k),) + src.shape, complex)
    for s_idx, S in enumerate(src.monomials):
        full[zeta_k[S]] = ucomp[s_idx]
    # convert to the dx frame on the fine grid, differentiate, convert back
    fine = _upsample(full, oversample)
    shp = fine.shape[1:]
    nd = len(shp)
    dx_coef = np.zeros_like(fine)
    for r in range(len(subs_k)):
        acc = 0
        for s in range(len(subs_k)):
            w = Mk[..., s, r]
            if not np.any(w):
                continue
            acc = acc + fine[s] * w
        dx_coef[r] = acc
    out_dx = np.zeros((len(subs_k1),) + shp, complex)
    grid_axes = [i for i, c in enumerate(circles) if c[0] == "grid"]
    for r, R in enumerate(subs_k):
        f = dx_coef[r]
        if not np.any(f):
            continue
        for i in range(D):
            sign, T = bx.merge_sign(((i,), R))
            if not sign:
                continue
            kind, val = circles[i]
            if kind == "mode":
                df = 2j * np.pi * val * f
            else:
                df = fourier.diff(f, axis=grid_axes.index(i))
            out_dx[zeta_k1[T]] += sign * df
    back = np.zeros_like(out_dx)
    for t in range(len(subs_k1)):
        acc = 0
        for r in range(len(subs_k1)):
            w = Minv[..., r, t]
            if not np.any(w):
                continue
            acc = acc + out_dx[r] * w
        back[t] = acc
    coarse = back[(slice(None),) + (slice(None),) * (nd - 2) + (slice(None, None, oversample),) * 2]
    out = np.zeros((tgt.ncomp,) + tgt.shape, complex)
    for t_idx, T in enumerate(tgt.monomials):
        out[t_idx] = coarse[zeta_k1[T]]
    return out.ravel()
