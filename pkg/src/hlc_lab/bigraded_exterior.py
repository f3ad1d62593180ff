"""Exact pointwise exterior algebra on a symplectic vector space.

A :class:`SymplecticSpace` carries a constant symplectic form and provides the
Lefschetz operator ``L``, the symplectic star, its adjoint ``Lambda`` and the
commutator ``B = [L, Lambda]`` as per-degree matrices in the real coframe
``e^1, ..., e^{2n}`` dual to the standard basis.

A :class:`HermitianModel` adds a compatible almost complex structure ``J`` and
with it the metric ``g(u, v) = omega(u, J v)``, the Hodge star, the action of
``J`` on forms and a complex coframe ``theta^1..theta^n`` of type (1,0).
Forms in the bigraded basis ``theta^I ^ conj(theta)^K`` are
:class:`BigradedForm` values.

All scalars are exact (rationals or Gaussian rationals); every check in this
module is a rank or equality test with no tolerance.

Conventions (computed from the definitions, frozen in the test-suite):

* ``(J psi)(v_1..v_p) = psi(J v_1, .., J v_p)`` acts on ``Lambda^{p,q}`` by
  ``i**(p - q)``.
* ``omega^{-1}(e^a, e^b)`` is the ``(a, b)`` entry of the inverse of the matrix
  ``omega(e_a, e_b)``; with this choice ``* = *_s J = J *_s``.
* ``*_s *_s = id`` in every degree.
* ``B`` acts on ``Lambda^k`` by the scalar ``k - n``, so ``[B, L] = 2L`` and
  ``[B, Lambda] = -2 Lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

from . import exact
from .exact import QQ, QQ_I, DomainMatrix

__all__ = [
    "ModelError",
    "ValidationReport",
    "SymplecticSpace",
    "HermitianModel",
    "BigradedForm",
    "GradedOperator",
    "validate_model",
    "standard_omega",
    "standard_J",
    "wedge",
    "extend_J",
    "hodge_star",
    "symplectic_star",
    "op_L",
    "op_Lambda",
    "op_B",
    "check_linear_lefschetz",
    "sl2_conventions",
    "verify_identities",
]


class ModelError(ValueError):
    """Raised for malformed or non-compatible (omega, J) input."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------- combinatorics


def subsets(size: int, k: int) -> list[tuple[int, ...]]:
    if k < 0 or k > size:
        return []
    return list(combinations(range(size), k))


def merge_sign(parts: Iterable[Iterable[int]]) -> tuple[int, tuple[int, ...] | None]:
    """Sign and sorted index tuple of ``zeta^{parts[0]} ^ zeta^{parts[1]} ^ ...``."""
    seq = [i for p in parts for i in p]
    if len(set(seq)) != len(seq):
        return 0, None
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


def _det(rows: list[list], zero, one):
    n = len(rows)
    if n == 0:
        return one
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = zero
    for j in range(n):
        a = rows[0][j]
        if not a:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _det(minor, zero, one)
        total = total + term if j % 2 == 0 else total - term
    return total


def compound(A: DomainMatrix, k: int) -> DomainMatrix:
    """k-th compound matrix: entry ``(R, S)`` is the minor ``det A[R, S]``.

    If ``A`` maps coefficient columns of 1-forms, its compound maps those of
    k-forms in the ``subsets`` ordering.
    """
    m, n = A.shape
    rows_idx, cols_idx = subsets(m, k), subsets(n, k)
    dense = A.to_list()
    dom = A.domain
    out = [[_det([[dense[r][c] for c in C] for r in R], dom.zero, dom.one) for C in cols_idx]
           for R in rows_idx]
    return DomainMatrix(out, (len(rows_idx), len(cols_idx)), dom)


def wedge_matrix(form: Mapping[tuple[int, ...], object], deg: int, size: int, k: int, domain) -> DomainMatrix:
    """Matrix of ``alpha ^ .`` from ``Lambda^k`` to ``Lambda^{k+deg}`` (any frame)."""
    src, tgt = subsets(size, k), subsets(size, k + deg)
    tindex = {t: i for i, t in enumerate(tgt)}
    out = [[domain.zero] * len(src) for _ in tgt]
    for j, s in enumerate(src):
        for mono, c in form.items():
            sign, t = merge_sign((mono, s))
            if sign:
                out[tindex[t]][j] += c if sign > 0 else -c
    return DomainMatrix(out, (len(tgt), len(src)), domain)


def standard_omega(n: int) -> DomainMatrix:
    """``omega_0 = sum_j e^{2j-1} ^ e^{2j}`` as the matrix ``omega(e_a, e_b)``."""
    rows = [[QQ(0)] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        rows[2 * j][2 * j + 1] = QQ(1)
        rows[2 * j + 1][2 * j] = QQ(-1)
    return DomainMatrix(rows, (2 * n, 2 * n), QQ)


def standard_J(n: int) -> DomainMatrix:
    """``J_0 e_{2j-1} = e_{2j}``, ``J_0 e_{2j} = -e_{2j-1}`` (columns are images)."""
    rows = [[QQ(0)] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        rows[2 * j + 1][2 * j] = QQ(1)
        rows[2 * j][2 * j + 1] = QQ(-1)
    return DomainMatrix(rows, (2 * n, 2 * n), QQ)


def _as_rational_matrix(M) -> DomainMatrix:
    if isinstance(M, DomainMatrix):
        if M.domain == QQ:
            return M
        if M.domain == QQ_I:
            if any(v.y for v in M.to_dok().values()):
                raise ModelError("omega and J must be real")
            return DomainMatrix([[v.x for v in row] for row in M.to_list()], M.shape, QQ)
        return M.convert_to(QQ)
    rows = [list(r) for r in M]
    return exact.from_rows(rows, QQ)


# ------------------------------------------------------------------ validation


@dataclass(frozen=True)
class ValidationReport:
    checks: dict[str, bool]
    witnesses: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def validate_model(omega, J=None) -> ValidationReport:
    """Check skew-symmetry, nondegeneracy, ``J^2 = -1``, taming and symmetry.

    Raises :class:`ModelError` for shape problems (non-square, mismatched or odd
    dimension); mathematical failures are reported, not raised.
    """
    W = _as_rational_matrix(omega)
    m, m2 = W.shape
    if m != m2:
        raise ModelError("omega must be square")
    if m % 2:
        raise ModelError("odd dimension: a symplectic vector space has even dimension")
    checks: dict[str, bool] = {}
    wit: dict[str, object] = {}
    checks["skew"] = exact.is_zero(W + W.transpose())
    checks["nondegenerate"] = exact.rank(W) == m
    if not checks["nondegenerate"]:
        wit["nondegenerate"] = exact.kernel(W).to_list()
    if J is None:
        return ValidationReport(checks, wit)
    Jm = _as_rational_matrix(J)
    if Jm.shape != W.shape:
        raise ModelError("dimension mismatch between omega and J")
    checks["J_squared_minus_one"] = exact.is_zero(Jm * Jm + DomainMatrix.eye(m, QQ))
    G = W * Jm  # g(u, v) = omega(u, J v) = u^T (W J) v
    checks["symmetric"] = exact.is_zero(G - G.transpose())
    # taming: omega(u, J u) = u^T sym(G) u > 0
    S = (G + G.transpose()) * QQ(1, 2)
    dense = S.to_list()
    negative = [a for a in range(m) if dense[a][a] <= 0]
    minors_pos = all(_det([row[:k] for row in dense[:k]], QQ(0), QQ(1)) > 0 for k in range(1, m + 1))
    checks["taming"] = minors_pos
    if not minors_pos:
        wit["taming"] = {"basis_vector": (negative[0] + 1) if negative else None,
                         "omega_u_Ju": str(dense[negative[0]][negative[0]]) if negative else None}
    return ValidationReport(checks, wit)


# ------------------------------------------------------------ symplectic space


@dataclass(frozen=True)
class GradedOperator:
    """Per-degree matrices of a graded linear map.

    ``blocks[k]`` maps degree ``k`` to degree ``k + shift`` (or to the degree
    given by ``target`` when the operator is not a pure shift, e.g. the stars).
    """

    name: str
    blocks: dict[int, DomainMatrix]
    frame: str = "real"
    shift: int | None = None

    def __getitem__(self, k: int) -> DomainMatrix:
        return self.blocks[k]

    def target_degree(self, k: int, n: int) -> int:
        if self.shift is not None:
            return k + self.shift
        return 2 * n - k


class SymplecticSpace:
    """Constant-coefficient symplectic form on ``R^{2n}``.

    ``omega`` is given as the skew matrix ``omega(e_a, e_b)``.
    """

    def __init__(self, omega, labels: list[str] | None = None):
        W = _as_rational_matrix(omega)
        report = validate_model(W)
        if not report.ok:
            raise ModelError(f"omega is not symplectic: {report.failed()}", report)
        self.omega = W
        self.dim = W.shape[0]
        self.n = self.dim // 2
        self.labels = labels or [f"e{a + 1}" for a in range(self.dim)]

    # basis -----------------------------------------------------------------
    def basis(self, k: int) -> list[tuple[int, ...]]:
        return subsets(self.dim, k)

    def rank_of_degree(self, k: int) -> int:
        return math.comb(self.dim, k) if 0 <= k <= self.dim else 0

    @cached_property
    def omega_form(self) -> dict[tuple[int, int], object]:
        dense = self.omega.to_list()
        return {(a, b): dense[a][b] for a in range(self.dim) for b in range(a + 1, self.dim) if dense[a][b]}

    @cached_property
    def omega_inverse(self) -> DomainMatrix:
        return self.omega.inv()

    @cached_property
    def volume_coefficient(self):
        """Coefficient of ``e^1 ^ ... ^ e^{2n}`` in ``omega^n / n!``."""
        vol = {(): QQ(1)}
        for _ in range(self.n):
            nxt: dict[tuple[int, ...], object] = {}
            for mono, c in vol.items():
                for pair, w in self.omega_form.items():
                    sign, t = merge_sign((mono, pair))
                    if sign:
                        nxt[t] = nxt.get(t, QQ(0)) + (c * w if sign > 0 else -c * w)
            vol = nxt
        return vol.get(tuple(range(self.dim)), QQ(0)) / QQ(math.factorial(self.n))

    # operators -------------------------------------------------------------
    def _per_degree(self, fn, degrees) -> dict[int, DomainMatrix]:
        return {k: fn(k) for k in degrees}

    def pairing(self, k: int) -> DomainMatrix:
        """``omega^{-1}`` extended to ``Lambda^k`` by determinants."""
        return compound(self.omega_inverse, k)

    @cached_property
    def L(self) -> GradedOperator:
        return GradedOperator("L", self._per_degree(
            lambda k: wedge_matrix(self.omega_form, 2, self.dim, k, QQ), range(self.dim + 1)), shift=2)

    def _star_from_pairing(self, pairing: DomainMatrix, k: int, vol) -> DomainMatrix:
        # (star nu)_{R^c} = sign(R, R^c) * vol * P(e^R, nu)
        src = subsets(self.dim, k)
        tgt = subsets(self.dim, self.dim - k)
        tindex = {t: i for i, t in enumerate(tgt)}
        P = pairing.to_list()
        dom = pairing.domain
        out = [[dom.zero] * len(src) for _ in tgt]
        full = set(range(self.dim))
        for r, R in enumerate(src):
            Rc = tuple(sorted(full - set(R)))
            sign, _ = merge_sign((R, Rc))
            row = tindex[Rc]
            for j in range(len(src)):
                v = P[r][j] * vol
                out[row][j] = v if sign > 0 else -v
        return DomainMatrix(out, (len(tgt), len(src)), dom)

    @cached_property
    def star_s(self) -> GradedOperator:
        vol = self.volume_coefficient
        return GradedOperator("star_s", self._per_degree(
            lambda k: self._star_from_pairing(self.pairing(k), k, vol), range(self.dim + 1)))

    @cached_property
    def star_s_inverse(self) -> GradedOperator:
        """Inverse of ``*_s``; ``blocks[k]`` maps ``Lambda^k`` back to ``Lambda^{2n-k}``."""
        return GradedOperator("star_s_inv", {
            k: self.star_s[self.dim - k].inv() for k in range(self.dim + 1)})

    @cached_property
    def Lambda(self) -> GradedOperator:
        blocks = {}
        for k in range(self.dim + 1):
            if k < 2:
                blocks[k] = exact.zeros(self.rank_of_degree(k - 2), self.rank_of_degree(k), QQ)
                continue
            blocks[k] = self.star_s_inverse[self.dim - k + 2] * self.L[self.dim - k] * self.star_s[k]
        return GradedOperator("Lambda", blocks, shift=-2)

    @cached_property
    def B(self) -> GradedOperator:
        blocks = {}
        for k in range(self.dim + 1):
            size = self.rank_of_degree(k)
            term = exact.zeros(size, size, QQ)
            if k >= 2:
                term = term + self.L[k - 2] * self.Lambda[k]
            if k + 2 <= self.dim:
                term = term - self.Lambda[k + 2] * self.L[k]
            blocks[k] = term
        return GradedOperator("B", blocks, shift=0)

    def L_power(self, r: int, k: int) -> DomainMatrix:
        """Matrix of ``L^r`` from ``Lambda^k`` (plain power of wedge with omega)."""
        M = exact.eye(self.rank_of_degree(k), QQ)
        for i in range(r):
            if k + 2 * i + 2 > self.dim:
                return exact.zeros(self.rank_of_degree(k + 2 * r), self.rank_of_degree(k), QQ)
            M = self.L[k + 2 * i] * M
        return M

    def is_lefschetz(self, k: int) -> bool:
        """``L^k : Lambda^{n-k} -> Lambda^{n+k}`` is invertible (exact rank)."""
        M = self.L_power(k, self.n - k)
        return M.shape[0] == M.shape[1] and exact.rank(M) == M.shape[0]


# ------------------------------------------------------------- Hermitian model


class HermitianModel(SymplecticSpace):
    """Symplectic vector space with an ``omega``-compatible ``J``.

    ``J`` is the matrix of the endomorphism of ``V`` (columns are images of the
    basis vectors). ``coframe`` optionally fixes the (1,0)-coframe as rows of
    coefficients in ``e^1..e^{2n}``; by default the standard model uses
    ``theta^j = e^{2j-1} + i e^{2j}`` and other models use the reduced
    ``i``-eigenbasis of ``J`` acting on ``V^*``.
    """

    def __init__(self, omega, J, coframe=None, labels=None):
        W = _as_rational_matrix(omega)
        Jm = _as_rational_matrix(J)
        report = validate_model(W, Jm)
        if not report.ok:
            raise ModelError(f"(omega, J) is not a compatible pair: {report.failed()}", report)
        super().__init__(W, labels)
        self.J = Jm
        self.validation = report
        self.coframe = self._coframe(coframe)

    @classmethod
    def standard(cls, n: int) -> "HermitianModel":
        if n < 1:
            raise ModelError("n must be positive")
        return cls(standard_omega(n), standard_J(n))

    def _coframe(self, coframe) -> DomainMatrix:
        n, dim = self.n, self.dim
        Jstar = self.J.transpose().convert_to(QQ_I)  # (J alpha)_b = sum_a alpha_a J[a, b]
        if coframe is None:
            if self.J == standard_J(n):
                rows = [[QQ_I(0, 0)] * dim for _ in range(n)]
                for j in range(n):
                    rows[j][2 * j] = QQ_I(1, 0)
                    rows[j][2 * j + 1] = QQ_I(0, 1)
                C = DomainMatrix(rows, (n, dim), QQ_I)
            else:
                shifted = Jstar - DomainMatrix.eye(dim, QQ_I) * QQ_I(0, 1)
                C = exact.kernel(shifted).transpose()
        else:
            C = coframe if isinstance(coframe, DomainMatrix) else exact.from_rows(coframe, QQ_I)
            C = C.convert_to(QQ_I)
        if C.shape != (n, dim):
            raise ModelError("coframe must have n rows of length 2n")
        resid = Jstar * C.transpose() - C.transpose() * QQ_I(0, 1)
        if not exact.is_zero(resid):
            raise ModelError("coframe rows are not of type (1,0) for J")
        if exact.rank(C) != n:
            raise ModelError("coframe rows are dependent")
        return C

    # frames ----------------------------------------------------------------
    @cached_property
    def frame_matrix(self) -> DomainMatrix:
        """Rows express ``theta^1..theta^n, conj(theta)^1..`` in ``e^1..e^{2n}``."""
        C = self.coframe.to_list()
        rows = [list(r) for r in C] + [[exact.conj(v) for v in r] for r in C]
        return DomainMatrix(rows, (self.dim, self.dim), QQ_I)

    @cached_property
    def frame_inverse(self) -> DomainMatrix:
        return self.frame_matrix.inv()

    def bigraded_basis(self, k: int) -> list[tuple[int, int, tuple[int, ...], tuple[int, ...]]]:
        """Bigraded monomials of total degree k, ordered lexicographically on (p, q, I, K).

        ``I`` and ``K`` are 1-based index tuples.
        """
        out = []
        n = self.n
        for p in range(max(0, k - n), min(n, k) + 1):
            q = k - p
            for I in combinations(range(1, n + 1), p):
                for K in combinations(range(1, n + 1), q):
                    out.append((p, q, I, K))
        return out

    def _zeta_index(self, I, K) -> tuple[int, ...]:
        return tuple(i - 1 for i in I) + tuple(self.n + k - 1 for k in K)

    @cached_property
    def _to_real(self) -> dict[int, DomainMatrix]:
        """``E_k`` with real coefficients = ``E_k @ bigraded coefficients``."""
        out = {}
        for k in range(self.dim + 1):
            Ck = compound(self.frame_matrix, k)  # rows: zeta-subsets, cols: e-subsets
            zsub = {s: i for i, s in enumerate(subsets(self.dim, k))}
            order = [zsub[self._zeta_index(I, K)] for (_, _, I, K) in self.bigraded_basis(k)]
            Ck = Ck.extract(order, list(range(Ck.shape[1])))
            out[k] = Ck.transpose()
        return out

    @cached_property
    def _from_real(self) -> dict[int, DomainMatrix]:
        out = {}
        for k in range(self.dim + 1):
            Ck = compound(self.frame_inverse, k)  # rows: e-subsets, cols: zeta-subsets
            zsub = {s: i for i, s in enumerate(subsets(self.dim, k))}
            order = [zsub[self._zeta_index(I, K)] for (_, _, I, K) in self.bigraded_basis(k)]
            Ck = Ck.extract(list(range(Ck.shape[0])), order)
            out[k] = Ck.transpose()
        return out

    def to_bigraded(self, op: GradedOperator) -> GradedOperator:
        blocks = {}
        for k, M in op.blocks.items():
            t = op.target_degree(k, self.n)
            if not 0 <= t <= self.dim:
                blocks[k] = exact.zeros(0, self.rank_of_degree(k), QQ_I)
                continue
            blocks[k] = self._from_real[t] * M.convert_to(QQ_I) * self._to_real[k]
        return GradedOperator(op.name, blocks, frame="bigraded", shift=op.shift)

    # metric data -----------------------------------------------------------
    @cached_property
    def metric(self) -> DomainMatrix:
        return self.omega * self.J

    @cached_property
    def metric_dual(self) -> DomainMatrix:
        return self.metric.inv()

    @cached_property
    def hodge_star_real(self) -> GradedOperator:
        vol = self.volume_coefficient
        return GradedOperator("star", {
            k: self._star_from_pairing(compound(self.metric_dual, k), k, vol)
            for k in range(self.dim + 1)})

    @cached_property
    def J_real(self) -> GradedOperator:
        Jstar = self.J.transpose()
        return GradedOperator("J", {k: compound(Jstar, k) for k in range(self.dim + 1)}, shift=0)

    def operator(self, name: str, frame: str = "bigraded") -> GradedOperator:
        real = {
            "L": self.L, "Lambda": self.Lambda, "B": self.B,
            "star_s": self.star_s, "star": self.hodge_star_real, "J": self.J_real,
        }[name]
        if frame == "real":
            return real
        return self._bigraded_cache(name)

    def _bigraded_cache(self, name: str) -> GradedOperator:
        cache = self.__dict__.setdefault("_bg_cache", {})
        if name not in cache:
            cache[name] = self.to_bigraded(self.operator(name, "real"))
        return cache[name]

    def hermitian_gram(self, k: int) -> DomainMatrix:
        """``G[S, T] = (zeta^S, zeta^T)`` with ``u ^ *conj(v) = (u, v) omega^n/n!``."""
        E = self._to_real[k]
        Gk = compound(self.metric_dual, k).convert_to(QQ_I)
        Ebar = DomainMatrix([[exact.conj(v) for v in row] for row in E.to_list()], E.shape, QQ_I)
        return E.transpose() * Gk * Ebar


# ------------------------------------------------------------ bigraded forms


Key = tuple[int, int, tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class BigradedForm:
    """Sparse element of ``Lambda^{*,*} V^*`` in the bigraded coframe basis."""

    model: HermitianModel
    coeffs: Mapping[Key, object]

    def __post_init__(self):
        n = self.model.n
        clean = {}
        for (p, q, I, K), c in self.coeffs.items():
            I, K = tuple(I), tuple(K)
            if len(I) != p or len(K) != q or p > n or q > n:
                raise ValueError(f"bad monomial key {(p, q, I, K)}")
            if list(I) != sorted(set(I)) or list(K) != sorted(set(K)):
                raise ValueError("index sets must be strictly increasing")
            if any(not 1 <= i <= n for i in I + K):
                raise ValueError("indices must lie in 1..n")
            c = c if QQ_I.of_type(c) else exact.to_scalar(c)
            if c:
                clean[(p, q, I, K)] = clean.get((p, q, I, K), QQ_I(0, 0)) + c
        object.__setattr__(self, "coeffs", {k: v for k, v in clean.items() if v})

    # constructors ------------------------------------------------------------
    @classmethod
    def monomial(cls, model, I=(), K=(), coeff=1) -> "BigradedForm":
        return cls(model, {(len(I), len(K), tuple(I), tuple(K)): exact.to_scalar(coeff) if not QQ_I.of_type(coeff) else coeff})

    @classmethod
    def zero(cls, model) -> "BigradedForm":
        return cls(model, {})

    @classmethod
    def one(cls, model) -> "BigradedForm":
        return cls.monomial(model)

    # vector conversion -------------------------------------------------------
    def degrees(self) -> set[int]:
        return {p + q for (p, q, _, _) in self.coeffs}

    def vector(self, k: int) -> DomainMatrix:
        basis = self.model.bigraded_basis(k)
        return exact.column([self.coeffs.get(b, QQ_I(0, 0)) for b in basis])

    @classmethod
    def from_vector(cls, model, k: int, vec: DomainMatrix) -> "BigradedForm":
        basis = model.bigraded_basis(k)
        vals = [row[0] for row in vec.to_list()]
        return cls(model, {b: v for b, v in zip(basis, vals) if v})

    def bidegrees(self) -> set[tuple[int, int]]:
        return {(p, q) for (p, q, _, _) in self.coeffs}

    # arithmetic --------------------------------------------------------------
    def _check(self, other):
        if other.model is not self.model:
            raise ValueError("forms belong to different models")

    def __add__(self, other: "BigradedForm") -> "BigradedForm":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, QQ_I(0, 0)) + v
        return BigradedForm(self.model, out)

    def __neg__(self) -> "BigradedForm":
        return BigradedForm(self.model, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BigradedForm":
        c = c if QQ_I.of_type(c) else exact.to_scalar(c)
        return BigradedForm(self.model, {k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, BigradedForm) and other.model is self.model and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0])))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for (p, q, I, K), c in sorted(self.coeffs.items()):
            mono = "^".join([f"t{i}" for i in I] + [f"tb{k}" for k in K]) or "1"
            terms.append(f"({exact.scalar_str(c)}){mono}")
        return " + ".join(terms)

    def apply(self, op: GradedOperator) -> "BigradedForm":
        """Apply a bigraded-frame operator degree by degree."""
        out = BigradedForm.zero(self.model)
        for k in sorted(self.degrees()):
            t = op.target_degree(k, self.model.n)
            if not 0 <= t <= self.model.dim:
                continue
            out = out + BigradedForm.from_vector(self.model, t, op[k] * self.vector(k))
        return out


def wedge(a: BigradedForm, b: BigradedForm) -> BigradedForm:
    """Exterior product; bidegrees add."""
    a._check(b)
    model = a.model
    out: dict[Key, object] = {}
    for (p1, q1, I1, K1), c1 in a.coeffs.items():
        for (p2, q2, I2, K2), c2 in b.coeffs.items():
            sign, s = merge_sign((model._zeta_index(I1, K1), model._zeta_index(I2, K2)))
            if not sign:
                continue
            I = tuple(i + 1 for i in s if i < model.n)
            K = tuple(i - model.n + 1 for i in s if i >= model.n)
            key = (len(I), len(K), I, K)
            v = c1 * c2
            out[key] = out.get(key, QQ_I(0, 0)) + (v if sign > 0 else -v)
    return BigradedForm(model, out)


def extend_J(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("J"))


def hodge_star(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("star"))


def symplectic_star(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("star_s"))


def op_L(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("L"))


def op_Lambda(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("Lambda"))


def op_B(form: BigradedForm) -> BigradedForm:
    return form.apply(form.model.operator("B"))


def check_linear_lefschetz(model, k: int) -> bool:
    """Whether ``L^k: Lambda^{n-k} -> Lambda^{n+k}`` is invertible.

    ``model`` may be an integer ``n`` (standard model) or any
    :class:`SymplecticSpace`; invalid ``omega`` is refused at construction.
    """
    if isinstance(model, int):
        model = HermitianModel.standard(model)
    if not 0 <= k <= model.n:
        raise ValueError("need 0 <= k <= n")
    return model.is_lefschetz(k)


# --------------------------------------------------------------- conventions


def _scalar_of(M: DomainMatrix):
    """The scalar c with M = c * Id, or None."""
    m, n = M.shape
    if m != n:
        return None
    if m == 0:
        return QQ_I(0, 0)
    c = M.to_list()[0][0]
    if exact.is_zero(M - DomainMatrix.eye(m, M.domain) * c):
        return c
    return None


def sl2_conventions(model: HermitianModel) -> dict[str, dict]:
    """Scalar actions of ``J`` on each ``Lambda^{p,q}``, of ``*_s *_s`` and ``B`` per degree."""
    n = model.n
    Jb = model.operator("J")
    j_scalars = {}
    for k in range(model.dim + 1):
        basis = model.bigraded_basis(k)
        M = Jb[k].to_list()
        for idx, (p, q, I, K) in enumerate(basis):
            j_scalars.setdefault((p, q), M[idx][idx])
    star2 = {}
    for k in range(model.dim + 1):
        star2[k] = _scalar_of((model.star_s[model.dim - k] * model.star_s[k]).convert_to(QQ_I))
    B = {k: _scalar_of(model.B[k].convert_to(QQ_I)) for k in range(model.dim + 1)}
    return {"J": j_scalars, "star_s_squared": star2, "B": B, "n": n}


def verify_identities(model: HermitianModel) -> dict[str, bool]:
    """Exhaustive exact check of the pointwise identities for one model."""
    dim, n = model.dim, model.n
    res: dict[str, bool] = {}
    S, H, Jr = model.star_s, model.hodge_star_real, model.J_real
    res["star_eq_star_s_J"] = all(
        (H[k] - S[k] * Jr[k]).is_zero_matrix for k in range(dim + 1))
    res["star_eq_J_star_s"] = all(
        (H[k] - Jr[dim - k] * S[k]).is_zero_matrix for k in range(dim + 1))
    # omega^{-1}(L u, v) = omega^{-1}(u, Lambda v) for u in Lambda^k, v in Lambda^{k+2}
    ok = True
    for k in range(dim - 1):
        lhs = model.L[k].transpose() * model.pairing(k + 2)
        rhs = model.pairing(k) * model.Lambda[k + 2]
        ok &= (lhs - rhs).is_zero_matrix
    res["L_Lambda_adjoint"] = ok
    # sl2 closure
    ok_bl = ok_bla = ok_lla = True
    for k in range(dim + 1):
        if k + 2 <= dim:
            BL = model.B[k + 2] * model.L[k] - model.L[k] * model.B[k]
            ok_bl &= (BL - model.L[k] * QQ(2)).is_zero_matrix
        if k >= 2:
            BLa = model.B[k - 2] * model.Lambda[k] - model.Lambda[k] * model.B[k]
            ok_bla &= (BLa + model.Lambda[k] * QQ(2)).is_zero_matrix
    res["B_L_eq_2L"] = ok_bl
    res["B_Lambda_eq_minus_2Lambda"] = ok_bla
    res["B_scalar_k_minus_n"] = all(
        (model.B[k] - DomainMatrix.eye(model.rank_of_degree(k), QQ) * QQ(k - n)).is_zero_matrix
        for k in range(dim + 1))
    res["lefschetz_isomorphisms"] = all(model.is_lefschetz(k) for k in range(n + 1))
    res["star_s_pairing"] = _check_star_pairing(model, model.star_s, model.pairing)
    res["hodge_star_pairing"] = _check_star_pairing(
        model, model.hodge_star_real, lambda k: compound(model.metric_dual, k))
    return res


def _check_star_pairing(model: SymplecticSpace, star: GradedOperator, pairing) -> bool:
    """``mu ^ star(nu) = P(mu, nu) vol`` on every pair of basis monomials."""
    dim = model.dim
    vol = model.volume_coefficient
    full = tuple(range(dim))
    for k in range(dim + 1):
        basis = subsets(dim, k)
        tgt = subsets(dim, dim - k)
        P = pairing(k).to_list()
        M = star[k].to_list()
        for i, mu in enumerate(basis):
            for j in range(len(basis)):
                total = QQ(0)
                for t, T in enumerate(tgt):
                    c = M[t][j]
                    if not c:
                        continue
                    sign, s = merge_sign((mu, T))
                    if sign and s == full:
                        total += c if sign > 0 else -c
                if total != P[i][j] * vol:
                    return False
    return True
