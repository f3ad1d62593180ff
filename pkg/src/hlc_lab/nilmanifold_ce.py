"""Chevalley-Eilenberg complexes of Lie algebras from structure constants.

Brackets are given 1-based as ``[e_i, e_j] = sum_k c^k_{ij} e_k``; the
differential on the dual basis is ``d e^k = - sum_{i<j} c^k_{ij} e^i ^ e^j``,
extended to ``Lambda^* g^*`` as a graded derivation. The cohomology of a
nilmanifold is read off this complex (Nomizu's theorem).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import exact
from .bigraded_exterior import SymplecticSpace, compound, merge_sign, subsets, wedge_matrix
from .exact import QQ, DomainMatrix
from .lefschetz_complex import CochainComplex, change_basis

__all__ = [
    "LieAlgebraError",
    "SpecFormatError",
    "LieAlgebraSpec",
    "build_ce",
    "builtin_example_nonhlc",
    "abelian",
    "validate_symplectic",
    "SymplecticReport",
    "load_spec_json",
    "omega_vector",
    "CATALOG",
    "random_lefschetz_complex",
]


class LieAlgebraError(ValueError):
    """Structure constants that do not define a Lie algebra."""

    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class SpecFormatError(ValueError):
    """Malformed input document."""


def _q(v) -> Fraction:
    if isinstance(v, float):
        raise SpecFormatError("structure constants must be exact rationals, e.g. \"1/2\"")
    try:
        return Fraction(v.strip() if isinstance(v, str) else v)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise SpecFormatError(f"not a rational: {v!r}") from exc


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants ``brackets[(i, j)][k] = c^k_{ij}`` for ``i < j`` (1-based)."""

    dim: int
    brackets: Mapping[tuple[int, int], Mapping[int, Fraction]] = field(default_factory=dict)
    name: str = ""

    @classmethod
    def from_triples(cls, dim: int, triples: Iterable[Sequence], name: str = "") -> "LieAlgebraSpec":
        """Build from ``(i, j, k, value)`` entries; ``i > j`` is folded by antisymmetry."""
        if not isinstance(dim, int) or dim < 1:
            raise SpecFormatError("dim must be a positive integer")
        br: dict[tuple[int, int], dict[int, Fraction]] = {}
        for t in triples:
            if len(t) != 4:
                raise SpecFormatError(f"bracket entry must be [i, j, k, value]: {t!r}")
            i, j, k, v = t
            if not all(isinstance(x, int) and 1 <= x <= dim for x in (i, j, k)):
                raise SpecFormatError(f"indices out of range 1..{dim}: {t!r}")
            v = _q(v)
            if i == j:
                if v:
                    raise LieAlgebraError(f"[e{i}, e{i}] must vanish", (i, i, k))
                continue
            if i > j:
                i, j, v = j, i, -v
            slot = br.setdefault((i, j), {})
            slot[k] = slot.get(k, Fraction(0)) + v
        clean = {ij: {k: v for k, v in cs.items() if v} for ij, cs in br.items()}
        return cls(dim, {ij: cs for ij, cs in clean.items() if cs}, name)

    @classmethod
    def from_salamon(cls, text: str, name: str = "") -> "LieAlgebraSpec":
        """Parse notation like ``"(0,0,0,12,13,14+23)"``: entry k lists ``d e^k``.

        A summand ``ij`` means ``+e^i ^ e^j`` (single-digit indices, optional
        sign prefix), so ``c^k_{ij} = -1``.
        """
        body = text.strip().strip("()")
        entries = [s.strip() for s in body.split(",")]
        triples = []
        for k, entry in enumerate(entries, start=1):
            if entry == "0":
                continue
            for term in entry.replace("-", "+-").split("+"):
                term = term.strip()
                if not term:
                    continue
                sign = -1 if term.startswith("-") else 1
                digits = term.lstrip("-")
                if len(digits) != 2:
                    raise SpecFormatError(f"bad term {term!r}")
                i, j = int(digits[0]), int(digits[1])
                triples.append((i, j, k, -sign))
        return cls.from_triples(len(entries), triples, name or text)

    def c(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.brackets.get((i, j), {}).get(k, Fraction(0))
        return -self.brackets.get((j, i), {}).get(k, Fraction(0))

    def bracket(self, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for i, a in x.items():
            for j, b in y.items():
                if i == j:
                    continue
                for k, v in self._row(i, j).items():
                    out[k] = out.get(k, Fraction(0)) + a * b * v
        return {k: v for k, v in out.items() if v}

    def _row(self, i, j):
        if i < j:
            return self.brackets.get((i, j), {})
        return {k: -v for k, v in self.brackets.get((j, i), {}).items()}

    def jacobi_violation(self) -> tuple[int, int, int] | None:
        """First triple ``i < j < k`` (1-based) where the Jacobi sum is nonzero."""
        for i, j, k in combinations(range(1, self.dim + 1), 3):
            e = lambda a: {a: Fraction(1)}
            total: dict[int, Fraction] = {}
            for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
                for t, v in self.bracket(self.bracket(e(x), e(y)), e(z)).items():
                    total[t] = total.get(t, Fraction(0)) + v
            if any(total.values()):
                return (i, j, k)
        return None

    def differential_1(self) -> dict[int, dict[tuple[int, int], Fraction]]:
        """``d e^k`` as ``{k: {(i, j): coeff}}`` with 0-based ``i < j``."""
        out: dict[int, dict[tuple[int, int], Fraction]] = {k: {} for k in range(self.dim)}
        for (i, j), cs in self.brackets.items():
            for k, v in cs.items():
                out[k - 1][(i - 1, j - 1)] = out[k - 1].get((i - 1, j - 1), Fraction(0)) - v
        return out

    def to_json(self) -> dict:
        br = [[i, j, k, str(v)] for (i, j), cs in sorted(self.brackets.items()) for k, v in sorted(cs.items())]
        return {"dim": self.dim, "brackets": br}


def labels_for(dim: int, k: int) -> list[str]:
    return ["e" + "^e".join(str(i + 1) for i in S) if S else "1" for S in subsets(dim, k)]


def _d_matrices(dim: int, d1: Mapping[int, Mapping[tuple[int, int], Fraction]]) -> dict[int, DomainMatrix]:
    d1q = {k: {ij: QQ(v.numerator, v.denominator) for ij, v in terms.items()} for k, terms in d1.items()}
    mats = {}
    for k in range(dim + 1):
        src, tgt = subsets(dim, k), subsets(dim, k + 1)
        tindex = {t: i for i, t in enumerate(tgt)}
        rows = [[QQ(0)] * len(src) for _ in tgt]
        for col, S in enumerate(src):
            for r, s in enumerate(S):
                for pair, v in d1q[s].items():
                    sign, T = merge_sign((S[:r], pair, S[r + 1:]))
                    if not sign:
                        continue
                    if r % 2:
                        sign = -sign
                    rows[tindex[T]][col] += v if sign > 0 else -v
        mats[k] = DomainMatrix(rows, (len(tgt), len(src)), QQ)
    return mats


def build_ce(spec: LieAlgebraSpec) -> CochainComplex:
    """Chevalley-Eilenberg complex; rejects structure constants failing Jacobi."""
    bad = spec.jacobi_violation()
    if bad is not None:
        raise LieAlgebraError(f"Jacobi identity fails on (e{bad[0]}, e{bad[1]}, e{bad[2]})", bad)
    m = spec.dim
    if m % 2:
        # odd dimension: pad to the CochainComplex layout of length 2n+1 is impossible
        raise SpecFormatError("odd-dimensional algebras cannot carry a symplectic form")
    d = _d_matrices(m, spec.differential_1())
    dims = tuple(len(subsets(m, k)) for k in range(m + 1))
    labels = {k: labels_for(m, k) for k in range(m + 1)}
    return CochainComplex(m // 2, dims, d, labels=labels)


def omega_vector(dim: int, omega: Iterable[Sequence]) -> dict[tuple[int, int], object]:
    """``[(i, j, value), ...]`` (1-based) as a 0-based 2-form dictionary over QQ."""
    form: dict[tuple[int, int], object] = {}
    for t in omega:
        if len(t) != 3:
            raise SpecFormatError(f"omega entry must be [i, j, value]: {t!r}")
        i, j, v = t
        if not all(isinstance(x, int) and 1 <= x <= dim for x in (i, j)):
            raise SpecFormatError(f"omega indices out of range: {t!r}")
        v = _q(v)
        if i == j:
            continue
        if i > j:
            i, j, v = j, i, -v
        key = (i - 1, j - 1)
        form[key] = form.get(key, QQ(0)) + QQ(v.numerator, v.denominator)
    return {k: v for k, v in form.items() if v}


def _omega_matrix(dim: int, form) -> DomainMatrix:
    rows = [[QQ(0)] * dim for _ in range(dim)]
    for (a, b), v in form.items():
        rows[a][b] += v
        rows[b][a] -= v
    return DomainMatrix(rows, (dim, dim), QQ)


@dataclass(frozen=True)
class SymplecticReport:
    closed: bool
    nondegenerate: bool
    witnesses: dict

    @property
    def ok(self) -> bool:
        return self.closed and self.nondegenerate


def validate_symplectic(c: CochainComplex, omega) -> tuple[SymplecticReport, CochainComplex | None]:
    """Check ``d omega = 0`` and ``omega^n != 0``; on success attach ``L`` and ``*_s``.

    ``omega`` is a list of ``(i, j, value)`` triples or a 0-based form dict.
    """
    dim = 2 * c.n
    form = omega if isinstance(omega, dict) else omega_vector(dim, omega)
    basis2 = subsets(dim, 2)
    vec = exact.column([form.get(S, QQ(0)) for S in basis2], QQ)
    dw = c.d[2] * vec
    closed = exact.is_zero(dw)
    W = _omega_matrix(dim, form)
    nondeg = exact.rank(W) == dim
    wit = {}
    if not closed:
        lab = labels_for(dim, 3)
        wit["d_omega"] = {lab[i]: exact.scalar_str(row[0]) for i, row in enumerate(dw.to_list()) if row[0]}
    if not nondeg:
        ker = exact.kernel(W)
        wit["kernel_vector"] = [exact.scalar_str(r[0]) for r in ker.to_list()]
    report = SymplecticReport(closed, nondeg, wit)
    if not report.ok:
        return report, None
    space = SymplecticSpace(W)
    L = {k: wedge_matrix(form, 2, dim, k, QQ) for k in range(dim + 1)}
    S = {k: space.star_s[k] for k in range(dim + 1)}
    return report, CochainComplex(c.n, c.dims, dict(c.d), L, S, c.labels)


def builtin_example_nonhlc() -> tuple[LieAlgebraSpec, list[tuple[int, int, str]]]:
    """Four-dimensional nilpotent algebra ``[e1,e2]=e3, [e1,e3]=e4`` with ``omega = e^14 + e^23``."""
    spec = LieAlgebraSpec.from_triples(4, [(1, 2, 3, 1), (1, 3, 4, 1)], name="example-3-2")
    return spec, [(1, 4, "1"), (2, 3, "1")]


def abelian(dim: int = 4) -> tuple[LieAlgebraSpec, list[tuple[int, int, str]]]:
    if dim < 2 or dim % 2:
        raise SpecFormatError("abelian model needs an even dimension >= 2")
    omega = [(2 * j + 1, 2 * j + 2, "1") for j in range(dim // 2)]
    return LieAlgebraSpec(dim, {}, name=f"abelian-{dim}"), omega


def load_spec_json(source) -> tuple[LieAlgebraSpec, list | None]:
    """Parse ``{"dim", "brackets": [[i, j, k, "p/q"]], "omega": [[i, j, "p/q"]]}``."""
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"invalid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict) or "dim" not in doc:
        raise SpecFormatError("document must be an object with a 'dim' field")
    brackets = doc.get("brackets", [])
    if not isinstance(brackets, list):
        raise SpecFormatError("'brackets' must be a list")
    spec = LieAlgebraSpec.from_triples(doc["dim"], [tuple(b) if isinstance(b, list) else b for b in brackets])
    omega = doc.get("omega")
    if omega is not None:
        if not isinstance(omega, list):
            raise SpecFormatError("'omega' must be a list")
        omega = [tuple(w) if isinstance(w, list) else w for w in omega]
        omega_vector(spec.dim, omega)  # validate format early
    return spec, omega


# --------------------------------------------------------------- random family

# Nilpotent algebras in the notation of ``LieAlgebraSpec.from_salamon``.
CATALOG = (
    "(0,0,0,0)",
    "(0,0,0,12)",
    "(0,0,12,13)",
    "(0,0,0,0,0,0)",
    "(0,0,0,0,0,12)",
    "(0,0,0,0,12,13)",
    "(0,0,0,12,13,23)",
    "(0,0,0,12,13,14)",
    "(0,0,0,12,13,24)",
    "(0,0,12,13,23,14)",
    "(0,0,0,12,14,24)",
    "(0,0,12,13,14,15)",
)


def _random_rational(rng: random.Random, lo=-3, hi=3) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice((1, 1, 2, 3)))


def _random_invertible(rng: random.Random, m: int) -> DomainMatrix:
    while True:
        rows = [[_random_rational(rng) for _ in range(m)] for _ in range(m)]
        P = DomainMatrix([[QQ(v.numerator, v.denominator) for v in r] for r in rows], (m, m), QQ)
        if exact.rank(P) == m:
            return P


def random_lefschetz_complex(rng: random.Random, dims=(4, 6), twist: bool = True, tries: int = 20):
    """A random Lefschetz complex ``(Lambda g^*, omega ^, d)`` satisfying ``[d, L] = 0``.

    An algebra is drawn from :data:`CATALOG`, a random closed nondegenerate
    ``omega`` is drawn from the closed 2-forms, coordinates are changed by a
    random rational matrix and, with ``twist``, ``d`` may be replaced by
    ``d + alpha ^`` for a random closed 1-form ``alpha``.

    Returns ``(complex, info)``.
    """
    names = [s for s in CATALOG if len(s.strip("()").split(",")) in dims]
    for _ in range(tries):
        name = rng.choice(names)
        spec = LieAlgebraSpec.from_salamon(name)
        c = build_ce(spec)
        m = spec.dim
        Z2 = exact.kernel(c.d[2])
        form = None
        for _ in range(10):
            coeffs = [_random_rational(rng) for _ in range(Z2.shape[1])]
            vec = Z2 * exact.column(coeffs, QQ)
            cand = {S: row[0] for S, row in zip(subsets(m, 2), vec.to_list()) if row[0]}
            if exact.rank(_omega_matrix(m, cand)) == m:
                form = cand
                break
        if form is None:
            continue
        rep, cs = validate_symplectic(c, form)
        info = {"algebra": name, "omega": {"".join(str(i + 1) for i in S): str(v) for S, v in sorted(form.items())}}
        if twist and rng.random() < 0.5:
            Z1 = exact.kernel(c.d[1])
            coeffs = [_random_rational(rng) for _ in range(Z1.shape[1])]
            alpha_vec = Z1 * exact.column(coeffs, QQ)
            alpha = {(i,): row[0] for i, row in enumerate(alpha_vec.to_list()) if row[0]}
            if alpha:
                d = {k: cs.d[k] + wedge_matrix(alpha, 1, m, k, QQ) for k in range(m + 1)}
                cs = CochainComplex(cs.n, cs.dims, d, cs.L, cs.star_s, cs.labels)
                info["twist"] = {f"e{i[0] + 1}": str(v) for i, v in sorted(alpha.items())}
        P = _random_invertible(rng, m)
        blocks = {k: compound(P, k) for k in range(m + 1)}
        cs = change_basis(cs, blocks)
        return cs, info
    raise RuntimeError("no symplectic algebra drawn; increase tries")
