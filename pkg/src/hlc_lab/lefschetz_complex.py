"""Finite-dimensional Lefschetz complexes ``(A, L, d)``.

Cohomology, the symplectic codifferential ``d^Lambda``, the Hard Lefschetz
condition on cohomology, the ``dd^Lambda``-lemma and the Guillemin-type
Lefschetz properties of the subspaces ``ker d & ker d^Lambda``,
``im d + im d^Lambda`` and ``im d d^Lambda``.

Every verdict is decided by exact ranks; subspaces are column spans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from . import exact
from .exact import QQ, DomainMatrix

__all__ = [
    "ComplexError",
    "PreconditionError",
    "CochainComplex",
    "HLCReport",
    "betti",
    "betti_vector",
    "d_lambda",
    "check_hlc",
    "check_dd_lambda",
    "check_equivalences",
    "check_guillemin",
    "check_betti_constraints",
    "change_basis",
]


class ComplexError(ValueError):
    """Malformed complex data (shapes, ``d^2 != 0``, missing star data)."""


class PreconditionError(ValueError):
    """A check's hypothesis fails; ``witness`` describes why."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _vec(M: DomainMatrix, j: int = 0) -> list[str]:
    return [exact.scalar_str(row[j]) for row in M.to_list()]


@dataclass(frozen=True, eq=False)
class CochainComplex:
    """Graded complex with ``d_k: A^k -> A^{k+1}`` and optional ``L`` and ``*_s``.

    ``d[k]`` has shape ``(dims[k+1], dims[k])`` (``dims[2n+1] = 0``),
    ``L[k]`` has shape ``(dims[k+2], dims[k])`` and ``star_s[k]`` has shape
    ``(dims[2n-k], dims[k])``.
    """

    n: int
    dims: tuple[int, ...]
    d: Mapping[int, DomainMatrix]
    L: Mapping[int, DomainMatrix] | None = None
    star_s: Mapping[int, DomainMatrix] | None = None
    labels: Mapping[int, list[str]] | None = None

    def __post_init__(self):
        top = 2 * self.n
        if len(self.dims) != top + 1:
            raise ComplexError(f"need {top + 1} graded pieces, got {len(self.dims)}")
        dim = self._dim
        for k in range(top + 1):
            if k not in self.d or self.d[k].shape != (dim(k + 1), dim(k)):
                raise ComplexError(f"d[{k}] must have shape {(dim(k + 1), dim(k))}")
        for k in range(top):
            if not exact.is_zero(self.d[k + 1] * self.d[k]):
                raise ComplexError(f"d^2 != 0 on degree {k}")
        if self.L is not None:
            for k in range(top + 1):
                if k not in self.L or self.L[k].shape != (dim(k + 2), dim(k)):
                    raise ComplexError(f"L[{k}] must have shape {(dim(k + 2), dim(k))}")
        if self.star_s is not None:
            for k in range(top + 1):
                if k not in self.star_s or self.star_s[k].shape != (dim(top - k), dim(k)):
                    raise ComplexError(f"star_s[{k}] has the wrong shape")

    def _dim(self, k: int) -> int:
        return self.dims[k] if 0 <= k <= 2 * self.n else 0

    @property
    def top(self) -> int:
        return 2 * self.n

    @cached_property
    def domain(self):
        dom = QQ
        for M in self.d.values():
            dom = dom.unify(M.domain)
        return dom

    def dk(self, k: int) -> DomainMatrix:
        """``d: A^k -> A^{k+1}`` for any integer ``k`` (zero map outside range)."""
        if 0 <= k <= self.top:
            return self.d[k]
        return exact.zeros(self._dim(k + 1), self._dim(k), self.domain)

    def Lk(self, k: int) -> DomainMatrix:
        self._need_L()
        if 0 <= k <= self.top:
            return self.L[k]
        return exact.zeros(self._dim(k + 2), self._dim(k), self.domain)

    def L_power(self, r: int, k: int) -> DomainMatrix:
        M = exact.eye(self._dim(k), self.domain)
        for i in range(r):
            M = self.Lk(k + 2 * i) * M
        return M

    def _need_L(self):
        if self.L is None:
            raise ComplexError("complex carries no Lefschetz operator")

    def _need_star(self):
        if self.star_s is None:
            raise ComplexError("complex carries no symplectic star; d^Lambda is undefined")

    @cached_property
    def star_s_inverse(self) -> dict[int, DomainMatrix]:
        """``blocks[k]``: inverse of ``star_s[2n-k]``, mapping ``A^k -> A^{2n-k}``."""
        self._need_star()
        return {k: self.star_s[self.top - k].to_field().inv() for k in range(self.top + 1)}

    @cached_property
    def d_lambda(self) -> dict[int, DomainMatrix]:
        """``d^Lambda = (-1)^{l+1} *_s d *_s`` on ``A^l``, mapping to ``A^{l-1}``."""
        self._need_star()
        out = {}
        for l in range(self.top + 1):
            if l == 0:
                out[l] = exact.zeros(0, self._dim(0), self.domain)
                continue
            M = self.star_s[self.top - l + 1] * self.d[self.top - l] * self.star_s[l]
            out[l] = M if (l + 1) % 2 == 0 else -M
        return out

    def dlk(self, k: int) -> DomainMatrix:
        if 0 <= k <= self.top:
            return self.d_lambda[k]
        return exact.zeros(self._dim(k - 1), self._dim(k), self.domain)

    @cached_property
    def Lambda(self) -> dict[int, DomainMatrix]:
        """``Lambda = *_s^{-1} L *_s`` on ``A^k``, mapping to ``A^{k-2}``."""
        self._need_star()
        self._need_L()
        out = {}
        for k in range(self.top + 1):
            if k < 2:
                out[k] = exact.zeros(self._dim(k - 2), self._dim(k), self.domain)
                continue
            out[k] = self.star_s_inverse[self.top - k + 2] * self.L[self.top - k] * self.star_s[k]
        return out

    def Lambdak(self, k: int) -> DomainMatrix:
        if 0 <= k <= self.top:
            return self.Lambda[k]
        return exact.zeros(max(self._dim(k - 2), 0), self._dim(k), self.domain)

    def label(self, k: int, j: int) -> str:
        if self.labels and k in self.labels:
            return self.labels[k][j]
        return f"A{k}[{j}]"


# ------------------------------------------------------------------ cohomology


def betti(c: CochainComplex, k: int) -> int:
    if not 0 <= k <= c.top:
        raise ValueError(f"degree {k} outside 0..{c.top}")
    return c._dim(k) - exact.rank(c.dk(k)) - exact.rank(c.dk(k - 1))


def betti_vector(c: CochainComplex) -> tuple[int, ...]:
    return tuple(betti(c, k) for k in range(c.top + 1))


def d_lambda(c: CochainComplex) -> dict[int, DomainMatrix]:
    return dict(c.d_lambda)


def cohomology_representatives(c: CochainComplex, k: int, dual: bool = False) -> DomainMatrix:
    """Columns spanning a complement of ``im`` inside ``ker`` (pivot order).

    With ``dual=True`` the complex ``(A, d^Lambda)`` is used instead.
    """
    if dual:
        Z, B = exact.kernel(c.dlk(k)), exact.image(c.dlk(k + 1))
    else:
        Z, B = exact.kernel(c.dk(k)), exact.image(c.dk(k - 1))
    if Z.shape[1] == 0:
        return exact.zeros(c._dim(k), 0, c.domain)
    return exact.complement_columns(B, Z)


def _induced(M: DomainMatrix, H: DomainMatrix, B_tgt: DomainMatrix) -> tuple[int, DomainMatrix]:
    """Rank of ``[M]`` on classes ``H`` modulo ``B_tgt`` and coefficients of a kernel class."""
    image = M * H if H.shape[1] else exact.zeros(M.shape[0], 0, M.domain)
    stacked = exact.hstack(image, B_tgt)
    r = exact.rank(stacked) - exact.rank(B_tgt)
    ker = exact.kernel(exact.hstack(image, -B_tgt) if B_tgt.shape[1] else image) if H.shape[1] else None
    if ker is not None and ker.shape[1]:
        ker = ker.extract(list(range(H.shape[1])), list(range(ker.shape[1])))
        ker = exact.image(ker)
    return r, ker


def commutator_witness(c: CochainComplex):
    """``None`` when ``dL = Ld``; otherwise a witness pair for ``[d, L] != 0``."""
    for k in range(c.top + 1):
        C = c.dk(k + 2) * c.Lk(k) - c.Lk(k + 1) * c.dk(k)
        if exact.is_zero(C):
            continue
        for (i, j), v in sorted(C.to_dok().items()):
            if v:
                x = [exact.scalar_str(QQ(1) if t == j else QQ(0)) for t in range(c._dim(k))]
                return {"degree": k, "basis_vector": c.label(k, j), "x": x,
                        "dLx_minus_Ldx": _vec(C.extract(list(range(C.shape[0])), [j]))}
    return None


def _require_commuting(c: CochainComplex):
    w = commutator_witness(c)
    if w is not None:
        raise PreconditionError("[d, L] != 0: L does not descend to cohomology", w)


def lefschetz_space_witness(c: CochainComplex):
    """``None`` when every ``L^k: A^{n-k} -> A^{n+k}`` is invertible."""
    for k in range(c.n + 1):
        M = c.L_power(k, c.n - k)
        if M.shape[0] != M.shape[1] or exact.rank(M) != M.shape[0]:
            return {"k": k, "rank": exact.rank(M), "source_dim": M.shape[1], "target_dim": M.shape[0]}
    return None


# ------------------------------------------------------------------------ HLC


@dataclass(frozen=True)
class HLCEntry:
    k: int
    source_betti: int
    target_betti: int
    rank: int | None
    isomorphism: bool
    witness: dict | None = None


@dataclass(frozen=True)
class HLCReport:
    entries: tuple[HLCEntry, ...]
    operator: str = "L"

    @property
    def holds(self) -> bool:
        return all(e.isomorphism for e in self.entries)

    @property
    def failing(self) -> list[int]:
        return [e.k for e in self.entries if not e.isomorphism]

    def as_dict(self) -> dict:
        return {
            "operator": self.operator,
            "holds": self.holds,
            "per_k": [
                {"k": e.k, "source_betti": e.source_betti, "target_betti": e.target_betti,
                 "rank": e.rank, "isomorphism": e.isomorphism, "witness": e.witness}
                for e in self.entries
            ],
        }


def _class_witness(c, k_src, H, coeffs):
    if coeffs is None or coeffs.shape[1] == 0:
        return None
    x = H * coeffs.extract(list(range(coeffs.shape[0])), [0])
    lead = next(row[0] for row in x.to_list() if row[0])
    x = x * (x.domain.one / lead)
    vals = x.to_list()
    terms = [(j, row[0]) for j, row in enumerate(vals) if row[0]]
    readable = " + ".join(
        (c.label(k_src, j) if v == 1 else f"({exact.scalar_str(v)}){c.label(k_src, j)}") for j, v in terms)
    return {"degree": k_src, "class": readable, "vector": _vec(x)}


def check_hlc(c: CochainComplex) -> HLCReport:
    """Induced ``[L^k]: H^{n-k} -> H^{n+k}`` for ``k = 0..n`` (exact ranks)."""
    _require_commuting(c)
    entries = []
    for k in range(c.n + 1):
        src, tgt = c.n - k, c.n + k
        bs, bt = betti(c, src), betti(c, tgt)
        H = cohomology_representatives(c, src)
        B = exact.image(c.dk(tgt - 1))
        r, ker = _induced(c.L_power(k, src), H, B)
        iso = bs == bt and r == bs
        wit = None
        if not iso:
            wit = _class_witness(c, src, H, ker) or {"reason": "not surjective" if bs == bt or r == bs else "betti mismatch",
                                                     "source_betti": bs, "target_betti": bt}
        entries.append(HLCEntry(k, bs, bt, r, iso, wit))
    return HLCReport(tuple(entries), "L")


def check_hlc_dual(c: CochainComplex) -> HLCReport:
    """``[Lambda^k]: H_{d^Lambda}^{n+k} -> H_{d^Lambda}^{n-k}``."""
    entries = []
    for k in range(c.n + 1):
        src, tgt = c.n + k, c.n - k
        Hs = cohomology_representatives(c, src, dual=True)
        Ht = cohomology_representatives(c, tgt, dual=True)
        bs, bt = Hs.shape[1], Ht.shape[1]
        M = exact.eye(c._dim(src), c.domain)
        for i in range(k):
            M = c.Lambdak(src - 2 * i) * M
        B = exact.image(c.dlk(tgt + 1))
        r, ker = _induced(M, Hs, B)
        iso = bs == bt and r == bs
        wit = None if iso else (_class_witness(c, src, Hs, ker) or {"source_dim": bs, "target_dim": bt})
        entries.append(HLCEntry(k, bs, bt, r, iso, wit))
    return HLCReport(tuple(entries), "Lambda")


# ---------------------------------------------------------------- dd^Lambda


def _subspaces(c: CochainComplex, k: int) -> dict[str, DomainMatrix]:
    K = exact.intersect(exact.kernel(c.dk(k)), exact.kernel(c.dlk(k)))
    I = exact.subspace_sum(exact.image(c.dk(k - 1)), exact.image(c.dlk(k + 1)))
    DD = exact.image(c.dk(k - 1) * c.dlk(k))
    return {"ker": K, "im": I, "im_ddl": DD}


@dataclass(frozen=True)
class DDLambdaReport:
    per_degree: tuple[dict, ...]

    @property
    def holds(self) -> bool:
        return all(e["holds"] for e in self.per_degree)

    def first_failure(self):
        for e in self.per_degree:
            if not e["holds"]:
                return e
        return None


def check_dd_lambda(c: CochainComplex) -> DDLambdaReport:
    """Compare ``ker d & ker d^L & (im d + im d^L)`` with ``im d d^L`` in each degree."""
    out = []
    for k in range(c.top + 1):
        S = _subspaces(c, k)
        lhs = exact.intersect(S["ker"], S["im"])
        rhs = S["im_ddl"]
        lhs_in = exact.contains(rhs, lhs)
        rhs_in = exact.contains(lhs, rhs)
        entry = {"degree": k, "lhs_dim": lhs.shape[1], "rhs_dim": exact.rank(rhs),
                 "holds": lhs_in and rhs_in, "witness": None}
        if not lhs_in:
            for j in range(lhs.shape[1]):
                col = lhs.extract(list(range(lhs.shape[0])), [j])
                if not exact.contains(rhs, col):
                    entry["witness"] = {"side": "lhs_not_in_rhs", "vector": _vec(col)}
                    break
        elif not rhs_in:
            for j in range(rhs.shape[1]):
                col = rhs.extract(list(range(rhs.shape[0])), [j])
                if not exact.contains(lhs, col):
                    entry["witness"] = {"side": "rhs_not_in_lhs", "vector": _vec(col)}
                    break
        out.append(entry)
    return DDLambdaReport(tuple(out))


# ------------------------------------------------------------- equivalences


def _maps_into(M: DomainMatrix, S_src: DomainMatrix, S_tgt: DomainMatrix) -> bool:
    if S_src.shape[1] == 0:
        return True
    return exact.contains(S_tgt, M * S_src)


def harmonic_surjective(c: CochainComplex) -> bool:
    """``ker d & ker d^Lambda -> H_d`` is onto in every degree."""
    for k in range(c.top + 1):
        K = _subspaces(c, k)["ker"]
        B = exact.image(c.dk(k - 1))
        if exact.rank(exact.hstack(K, B)) != c._dim(k) - exact.rank(c.dk(k)):
            return False
    return True


def sl2_descends(c: CochainComplex) -> bool:
    """``L`` and ``Lambda`` preserve ``ker d & ker d^Lambda`` and its part inside ``im d``."""
    Ks = {k: _subspaces(c, k)["ker"] for k in range(-2, c.top + 3)}
    KB = {k: exact.intersect(Ks[k], exact.image(c.dk(k - 1))) if Ks[k].shape[1] else Ks[k]
          for k in Ks}
    for k in range(c.top + 1):
        for M, t in ((c.Lk(k), k + 2), (c.Lambdak(k), k - 2)):
            if M.shape[0] == 0:
                continue
            if not _maps_into(M, Ks[k], Ks[t]) or not _maps_into(M, KB[k], KB[t]):
                return False
    return True


@dataclass(frozen=True)
class EquivalenceReport:
    dd_lambda_lemma: bool
    harmonic_representatives: bool
    hlc_cohomology: bool
    hlc_dual_cohomology: bool

    @property
    def values(self) -> tuple[bool, bool, bool, bool]:
        return (self.dd_lambda_lemma, self.harmonic_representatives,
                self.hlc_cohomology, self.hlc_dual_cohomology)

    @property
    def consistent(self) -> bool:
        return len(set(self.values)) == 1

    def as_dict(self) -> dict:
        return {"dd_lambda_lemma": self.dd_lambda_lemma,
                "harmonic_representatives": self.harmonic_representatives,
                "hlc_cohomology": self.hlc_cohomology,
                "hlc_dual_cohomology": self.hlc_dual_cohomology,
                "consistent": self.consistent}


def check_equivalences(c: CochainComplex) -> EquivalenceReport:
    """Evaluate the four equivalent conditions independently."""
    _require_commuting(c)
    return EquivalenceReport(
        check_dd_lambda(c).holds,
        harmonic_surjective(c) and sl2_descends(c),
        check_hlc(c).holds,
        check_hlc_dual(c).holds,
    )


# ----------------------------------------------------------------- Guillemin


def _subspace_is_lefschetz(c: CochainComplex, spaces: dict[int, DomainMatrix], op: str) -> tuple[bool, dict | None]:
    n = c.n
    for k in range(c.top + 1):
        M = c.Lk(k) if op == "L" else c.Lambdak(k)
        t = k + 2 if op == "L" else k - 2
        if M.shape[0] and not _maps_into(M, spaces[k], spaces.get(t, exact.zeros(M.shape[0], 0, c.domain))):
            return False, {"degree": k, "reason": f"{op} does not preserve the subspace"}
    for k in range(n + 1):
        src = n - k if op == "L" else n + k
        tgt = n + k if op == "L" else n - k
        S, T = spaces[src], spaces[tgt]
        M = exact.eye(c._dim(src), c.domain)
        for i in range(k):
            M = (c.Lk(src + 2 * i) if op == "L" else c.Lambdak(src - 2 * i)) * M
        img_rank = exact.rank(M * S) if S.shape[1] else 0
        if not (S.shape[1] == T.shape[1] == img_rank):
            return False, {"k": k, "source_dim": S.shape[1], "target_dim": T.shape[1], "rank": img_rank}
    return True, None


def check_guillemin(c: CochainComplex) -> dict:
    """Lefschetz property of the three subspaces, for ``L`` and for ``Lambda``."""
    wit = lefschetz_space_witness(c)
    if wit is not None:
        raise PreconditionError("(A, L) is not a Lefschetz space", wit)
    _require_commuting(c)
    per = {k: _subspaces(c, k) for k in range(c.top + 1)}
    out = {}
    for name in ("ker", "im", "im_ddl"):
        spaces = {k: per[k][name] for k in per}
        for op in ("L", "Lambda"):
            ok, w = _subspace_is_lefschetz(c, spaces, op)
            out[f"{name}/{op}"] = {"lefschetz": ok, "witness": w}
    out["all"] = all(v["lefschetz"] for v in out.values())
    return out


# ---------------------------------------------------------- Betti constraints


def check_betti_constraints(b) -> dict:
    """Necessary conditions on Betti numbers, checked for ``0 <= k < n-1`` as stated.

    Returns a mapping from a constraint label to its verdict.
    """
    b = list(b)
    if len(b) % 2 != 1:
        raise ValueError("need a vector of length 2n+1")
    n = (len(b) - 1) // 2
    out = {}
    for k in range(max(n - 1, 0)):
        if 2 * k + 1 < len(b):
            out[f"b{2 * k + 1} even"] = b[2 * k + 1] % 2 == 0
        out[f"b{k} <= b{k + 2}"] = b[k] <= b[k + 2]
        out[f"b{2 * k} > 0"] = b[2 * k] > 0
    return out


# -------------------------------------------------------------- base change


def change_basis(c: CochainComplex, P: Mapping[int, DomainMatrix]) -> CochainComplex:
    """Conjugate every map by invertible ``P[k]`` (new coordinates ``x' = P[k] x``)."""
    Pinv = {k: P[k].to_field().inv() for k in P}

    def conj(M, src, tgt):
        if M.shape[0] == 0 or M.shape[1] == 0:
            return M
        return P[tgt] * M * Pinv[src]

    top = c.top
    d = {k: conj(c.d[k], k, k + 1) if k < top else c.d[k] for k in range(top + 1)}
    L = None if c.L is None else {k: conj(c.L[k], k, k + 2) if k + 2 <= top else c.L[k] for k in range(top + 1)}
    S = None if c.star_s is None else {k: conj(c.star_s[k], k, top - k) for k in range(top + 1)}
    return CochainComplex(c.n, c.dims, d, L, S)
