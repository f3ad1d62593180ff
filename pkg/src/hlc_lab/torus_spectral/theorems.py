"""Spectral quantities, identity residuals and dualities on torus models."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse.linalg as spla

from . import fourier
from .assembly import (PIECES, FormSpace, adjoint, assemble, coframe, laplacian, pointwise,
                       stacked)
from .kernels import (ELL_OPERATORS, GAP_THRESHOLD, REL_TOL, HarmonicReport, _FreeBasis,
                      ell_dim, harmonic_dim, kernel_dimension, passive_modes,
                      smallest_singular_values)
from .model import ModelError, QSpec, SpectralGrid, TorusModel, coframe_on

__all__ = [
    "Lambda1Report",
    "lambda1",
    "delta_mubar_norm",
    "delta_mubar_norm_global",
    "theorem13_check",
    "kahler_identity_residual",
    "laplacian_identity_residual",
    "decomposition_residual",
    "d_squared_residual",
    "adjoint_residual",
    "mubar_pointwise_rank",
    "mubar_zero_census",
    "gradient_zero_fraction",
    "cw_duality_check",
    "band_limited_trial",
]


# ----------------------------------------------------------------- trials


def band_limited_trial(space: FormSpace, rng: np.random.Generator, K: int = 3, terms: int = 6) -> np.ndarray:
    """Random form whose components are trigonometric polynomials of degree ``<= K``."""
    X = space.nodes()
    out = []
    for _ in range(space.ncomp):
        f = np.zeros(space.shape, complex)
        for _ in range(terms):
            ks = rng.integers(-K, K + 1, size=len(space.shape))
            amp = rng.normal() + 1j * rng.normal()
            f = f + amp * np.exp(2j * np.pi * sum(k * x for k, x in zip(ks, X)))
        out.append(f.ravel())
    return np.concatenate(out) if out else np.zeros(0, complex)


def _embed(vec: np.ndarray, src: FormSpace, dst: FormSpace) -> np.ndarray:
    """Copy components of ``vec`` into the matching slots of a larger space."""
    out = np.zeros(dst.size, complex)
    for i, S in enumerate(src.monomials):
        j = dst.index[S]
        out[j * dst.G:(j + 1) * dst.G] = vec[i * src.G:(i + 1) * src.G]
    return out


def _block_grid(model: TorusModel, N: int, modes=None) -> SpectralGrid:
    return SpectralGrid.block(N, modes if modes is not None else (0,) * (model.real_dim - 2))


# --------------------------------------------------------------- lambda_1


@dataclass
class Lambda1Report:
    value: float | None
    block: tuple[int, ...] | None
    harmonic_count: int
    harmonic_gap: float
    cluster_cut: float
    per_block: dict
    determinate: bool

    def as_dict(self) -> dict:
        return {"lambda1": self.value, "block": None if self.block is None else list(self.block),
                "harmonic_1forms": self.harmonic_count, "harmonic_gap_ratio": _finite(self.harmonic_gap),
                "determinate": self.determinate}


def _finite(x):
    return "inf" if np.isinf(x) else float(x)


def _hodge_ops(model, grid):
    """``[d; d^*]`` on 1-forms: its squared singular values are the eigenvalues of Delta_d."""
    d1 = assemble("d", 1, model, grid)
    d0 = assemble("d", 0, model, grid)
    return [d1, adjoint(d0)]


def lambda1(model: TorusModel, N: int, radius: int = 1, count: int | None = None,
            rel_tol: float = REL_TOL, seed: int = 0) -> Lambda1Report:
    """First nonzero eigenvalue of the Hodge Laplacian on 1-forms.

    Computed per passive Fourier block with entries in ``[-radius, radius]``;
    the harmonic cluster is ``lambda <= rel_tol * ||Delta||`` and ``lambda_1``
    is the smallest eigenvalue above it over all blocks.

    The value is determinate only when the cluster holds exactly ``b1``
    forms (Hodge) with a gap ratio of at least ``GAP_THRESHOLD``; a short
    cluster means a harmonic form is under-resolved and would be misreported
    as ``lambda_1``.
    """
    count = count or model.b1 + 6
    best, where = None, None
    per_block = {}
    harm, harm_gap = 0, np.inf
    cut_used = 0.0
    for modes in passive_modes(model, radius):
        ops = _hodge_ops(model, _block_grid(model, N, modes))
        res = smallest_singular_values(ops, count=count, seed=seed)
        lam = res.singular_values ** 2
        cut = rel_tol * res.sigma_max ** 2
        cut_used = max(cut_used, cut)
        above = lam[lam > cut]
        dim, gap = kernel_dimension(res.singular_values, res.sigma_max, rel_tol)
        harm += dim
        harm_gap = min(harm_gap, gap)
        if above.size and (best is None or above[0] < best):
            best, where = float(above[0]), tuple(modes)
        per_block[tuple(modes)] = [float(v) for v in lam]
    ok = best is not None and best > 0 and harm == model.b1 and harm_gap >= GAP_THRESHOLD
    return Lambda1Report(best, where, harm, harm_gap, cut_used, per_block, ok)


# ------------------------------------------------------------ ||Delta_mubar||


def _mubar_pointwise_matrices(cof, model: TorusModel) -> np.ndarray:
    """Per node, the matrix of mubar from 1-forms to 2-forms in orthonormal frames.

    Built directly from the structure coefficients ``Gamma``: ``mubar zeta^A``
    collects the ``zeta^B ^ zeta^D`` terms of ``d zeta^A`` with both indices
    antiholomorphic and ``A`` holomorphic.
    """
    m, D = model.m, model.real_dim
    pairs = list(combinations(range(D), 2))
    out = np.zeros(cof.q.shape + (len(pairs), D), complex)
    for A in range(m):
        for r, (B, Dd) in enumerate(pairs):
            if B >= m and Dd >= m:
                g = cof.Gamma[..., A, B, Dd]
                # |zeta^A| = sqrt(2) s_A, |zeta^B ^ zeta^D| = 2 s_B s_D
                sA = cof.scale[..., A % m]
                sT = cof.scale[..., B % m] * cof.scale[..., Dd % m]
                out[..., r, A] = g * (2 * sT) / (np.sqrt(2) * sA)
    return out


def delta_mubar_norm(model: TorusModel, N: int) -> float:
    """``max_x`` of the largest eigenvalue of ``mubar^* mubar + mubar mubar^*`` on 1-forms.

    ``mubar`` vanishes on functions, so on 1-forms the pointwise operator is
    ``mubar^* mubar`` and the value is the largest squared singular value of
    the pointwise ``mubar`` over the grid nodes.
    """
    cof = coframe(model, N)
    mats = _mubar_pointwise_matrices(cof, model)
    sv = np.linalg.svd(mats.reshape(-1, *mats.shape[-2:]), compute_uv=False)
    return float(np.max(sv[:, 0] ** 2)) if sv.size else 0.0


def delta_mubar_norm_global(model: TorusModel, N: int) -> float:
    """Cross-check: largest squared singular value of the assembled global ``mubar`` on 1-forms."""
    grid = _block_grid(model, N)
    op = assemble("mubar", FormSpace(model, grid, 1), model, grid)
    A = op.normalized()
    if A.nnz == 0:
        return 0.0
    B = (A.conj().T @ A).tocsr()
    v0 = np.random.default_rng(12345).standard_normal(B.shape[0]).astype(complex)
    lam = spla.eigsh(B, k=1, which="LA", v0=v0, tol=1e-13, return_eigenvectors=False)
    return float(lam[0])


# ------------------------------------------------- spectral gap criterion


def theorem13_check(model: TorusModel, N: int, radius: int = 1, harmonic: HarmonicReport | None = None,
                    lam: Lambda1Report | None = None, seed: int = 0) -> dict:
    """``lambda_1 > 4 ||Delta_mubar||`` should force ``b^1 = 2 h^{1,0}``.

    ``b^1 = 2n + 2`` is the known topology of the torus; ``h^{1,0}`` comes
    from :func:`harmonic_dim`. Indeterminate sub-results make the verdicts
    ``None``.
    """
    lam = lam or lambda1(model, N, radius=radius, seed=seed)
    norm = delta_mubar_norm(model, N)
    harmonic = harmonic or harmonic_dim((1, 0), model, N, radius=radius, seed=seed)
    b1 = model.b1
    hypothesis = None if not lam.determinate else bool(lam.value > 4 * norm)
    conclusion = bool(b1 == 2 * harmonic.dim) if harmonic.determinate else None
    if hypothesis is None or conclusion is None:
        implication = None
    else:
        implication = (not hypothesis) or conclusion
    return {
        "lambda1": lam.value,
        "lambda1_block": None if lam.block is None else list(lam.block),
        "delta_mubar_norm": norm,
        "bound": 4 * norm,
        "hypothesis": hypothesis,
        "b1": b1,
        "harmonic_1forms": lam.harmonic_count,
        "h10": harmonic.dim,
        "two_h10": 2 * harmonic.dim,
        "conclusion": conclusion,
        "implication_ok": implication,
    }


# ------------------------------------------------------- identity residuals


def _rel(rspace: FormSpace, r: np.ndarray, uspace: FormSpace, u: np.ndarray) -> float:
    nu = uspace.norm(u)
    return float(rspace.norm(r) / nu) if nu else 0.0


def kahler_identity_residual(model: TorusModel, grid: SpectralGrid, trials: int = 4, seed: int = 0,
                             K: int = 3) -> dict:
    """Max relative residuals of ``[Lambda, del] = i delbar^*`` and ``[Lambda, delbar] = -i del^*``.

    Trials are band-limited forms of bidegree (1,0) and (0,1). Returns the
    maxima per identity and per bidegree.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for bideg in [(1, 0), (0, 1)]:
        U = FormSpace(model, grid, bideg)
        F = FormSpace(model, grid, 0)
        for name, tag, other, coef in [("[Lambda,del]=i*delbar^*", "del", "delbar", 1j),
                                       ("[Lambda,delbar]=-i*del^*", "delbar", "del", -1j)]:
            worst = 0.0
            up = assemble(tag, U, model, grid)
            lam_up = pointwise("Lambda", up.target, model, grid)
            p0 = (bideg[0] - PIECES[other][0], bideg[1] - PIECES[other][1])
            adj = adjoint(assemble(other, p0, model, grid)) if min(p0) >= 0 else None
            for _ in range(trials):
                u = band_limited_trial(U, rng, K=K)
                # Lambda u = 0 on 1-forms, so [Lambda, delta] u = Lambda delta u
                lhs = lam_up @ (up @ u)
                lhs = _embed(lhs, lam_up.target, F) if lam_up.target.ncomp else np.zeros(F.size, complex)
                rhs = np.zeros(F.size, complex)
                if adj is not None:
                    rhs = _embed(coef * (adj @ u), adj.target, F)
                worst = max(worst, _rel(F, lhs - rhs, U, u) if F.size else 0.0)
            out[f"{name} on {bideg}"] = worst
    out["max"] = max(out.values())
    return out


def laplacian_identity_residual(model: TorusModel, grid: SpectralGrid, trials: int = 4, seed: int = 0,
                                K: int = 3, bidegrees=((1, 0), (0, 1))) -> dict:
    """Max relative residual of ``Delta_delbar + Delta_mu - Delta_del - Delta_mubar``."""
    rng = np.random.default_rng(seed)
    out = {}
    for b in bidegrees:
        S = FormSpace(model, grid, b)
        L = {t: laplacian(t, b, model, grid).matrix for t in PIECES}
        M = L["delbar"] + L["mu"] - L["del"] - L["mubar"]
        worst = 0.0
        for _ in range(trials):
            u = band_limited_trial(S, rng, K=K)
            worst = max(worst, _rel(S, M @ u, S, u))
        out[str(b)] = worst
    out["max"] = max(out.values())
    return out


def decomposition_residual(model: TorusModel, grid: SpectralGrid, degree: int, trials: int = 3,
                           seed: int = 0, K: int = 3) -> float:
    """``||(mu + del + delbar + mubar - d) u|| / ||u||`` on band-limited forms of a total degree."""
    rng = np.random.default_rng(seed)
    S = FormSpace(model, grid, degree)
    d = assemble("d", S, model, grid)
    worst = 0.0
    for _ in range(trials):
        u = band_limited_trial(S, rng, K=K)
        acc = np.zeros(d.target.size, complex)
        for t in PIECES:
            op = assemble(t, S, model, grid)
            if op.target.ncomp:
                acc += _embed(op @ u, op.target, d.target)
        worst = max(worst, _rel(d.target, acc - d @ u, S, u) if d.target.size else 0.0)
    return worst


def d_squared_residual(model: TorusModel, grid: SpectralGrid, degree: int, trials: int = 3,
                       seed: int = 0, K: int = 3) -> float:
    """``||d(d u)|| / ||u||`` on band-limited forms."""
    rng = np.random.default_rng(seed)
    S = FormSpace(model, grid, degree)
    d1 = assemble("d", S, model, grid)
    d2 = assemble("d", degree + 1, model, grid)
    worst = 0.0
    for _ in range(trials):
        u = band_limited_trial(S, rng, K=K)
        worst = max(worst, d2.target.norm(d2 @ (d1 @ u)) / S.norm(u) if d2.target.size else 0.0)
    return float(worst)


def adjoint_residual(op, trials: int = 3, seed: int = 0, K: int = 3) -> float:
    """``|<A u, w> - <u, A^* w>| / (||A u|| ||w|| + ||u|| ||A^* w||)`` on band-limited forms."""
    rng = np.random.default_rng(seed)
    adj = adjoint(op)
    worst = 0.0
    for _ in range(trials):
        u = band_limited_trial(op.source, rng, K=K)
        w = band_limited_trial(op.target, rng, K=K)
        a = op.target.inner(op @ u, w)
        b = op.source.inner(u, adj @ w)
        scale = op.target.norm(op @ u) * op.target.norm(w) + op.source.norm(u) * op.source.norm(adj @ w)
        worst = max(worst, abs(a - b) / scale if scale else 0.0)
    return float(worst)


# ------------------------------------------------------- pointwise mubar rank


def _pointwise_rank(cof, model, rtol: float = 1e-12) -> np.ndarray:
    mats = _mubar_pointwise_matrices(cof, model)
    sv = np.linalg.svd(mats.reshape(-1, *mats.shape[-2:]), compute_uv=False)
    # scale: the size of the structure coefficients of this model
    scale = max(1.0, float(np.max(np.abs(cof.Gamma))))
    return np.sum(sv > rtol * scale, axis=-1).reshape(mats.shape[:-2])


def mubar_pointwise_rank(model: TorusModel, point) -> int:
    """Rank of ``mubar: Lambda^{1,0} -> Lambda^{0,2}`` at a point of the active plane.

    ``point`` gives the two active coordinates (the passive ones do not
    matter); it may also be a full coordinate tuple, in which case its last
    two entries are used.
    """
    y1, y2 = float(point[-2]), float(point[-1])
    cof = coframe_on(model, [y1], [y2])
    return int(_pointwise_rank(cof, model)[0, 0])


def mubar_zero_census(model: TorusModel, N: int) -> dict:
    """Fraction of grid nodes where the pointwise ``mubar`` rank drops below its maximum."""
    cof = coframe(model, N)
    ranks = _pointwise_rank(cof, model)
    top = int(ranks.max())
    return {"N": N, "max_rank": top, "deficient_nodes": int(np.sum(ranks < top)),
            "fraction": float(np.mean(ranks < top))}


def gradient_zero_fraction(qspec: QSpec, M: int, rtol: float = 1e-3) -> float:
    """Fraction of an ``M x M`` grid where ``|grad q| < rtol * max |grad q|``.

    A nowhere-dense critical set gives a fraction tending to zero as ``M`` grows.
    """
    y = fourier.nodes(M)
    _, q1, q2 = qspec.evaluate(y, y)
    g = np.hypot(q1, q2)
    top = float(g.max())
    if top == 0:
        return 1.0
    return float(np.mean(g < rtol * top))


# ------------------------------------------------- conjugation and duality


def _dual_entries():
    return [("del", False), ("del", True), ("mubar", False), ("mubar", True)]


def cw_duality_check(model: TorusModel, N: int, radius: int = 1, refine: bool = True, seed: int = 0,
                     tol: float = 1e-6) -> dict:
    """``ell^{1,0} = ell^{0,1}`` and the Hodge star image of harmonic (1,0) forms.

    The star of a ``Delta_delbar + Delta_mu`` harmonic (1,0) form is a
    (m, m-1) form annihilated by ``[del; del^*; mubar; mubar^*]``; the
    residual of that stack on the computed basis is reported.
    """
    l10 = ell_dim((1, 0), model, N, radius=radius, refine=refine, seed=seed)
    l01 = ell_dim((0, 1), model, N, radius=radius, refine=refine, seed=seed)
    m = model.m
    grid = _block_grid(model, N)
    ops = stacked(ELL_OPERATORS, (1, 0), model, grid)
    res = smallest_singular_values(ops, count=2 * ops[0].source.ncomp + 4, seed=seed)
    dim, _ = kernel_dimension(res.singular_values, res.sigma_max)
    star = pointwise("star", (1, 0), model, grid)
    dual_ops = stacked(_dual_entries(), (m, m - 1), model, grid)
    worst = 0.0
    for j in range(dim):
        v = star @ res.vectors[:, j]
        nv = star.target.norm(v)
        r = np.sqrt(sum(op.target.norm(op @ v) ** 2 for op in dual_ops))
        worst = max(worst, float(r / nv) if nv else np.inf)
    determinate = l10.determinate and l01.determinate
    return {
        "ell10": l10.dim,
        "ell01": l01.dim,
        "conjugation": (l10.dim == l01.dim) if determinate else None,
        "star_dimension": dim,
        "star_residual": worst,
        "hodge_duality": bool(worst <= tol) if dim else True,
        "determinate": determinate,
        "reports": {"ell10": l10.as_dict(), "ell01": l01.as_dict()},
    }
