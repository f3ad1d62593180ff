"""Exact linear algebra over Q and Q(i).

Thin helpers on top of sympy's ``DomainMatrix``. Subspaces are always passed
around as matrices whose *columns* span them; an empty subspace of an ambient
space of dimension ``m`` is an ``m x 0`` matrix.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from sympy import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

__all__ = [
    "QQ",
    "QQ_I",
    "DomainMatrix",
    "gauss",
    "to_scalar",
    "scalar_str",
    "conj",
    "zeros",
    "eye",
    "from_rows",
    "column",
    "rank",
    "kernel",
    "image",
    "hstack",
    "intersect",
    "subspace_sum",
    "contains",
    "complement_columns",
    "solve",
    "is_zero",
    "to_complex",
]


def gauss(re=0, im=0):
    """Gaussian rational ``re + i*im`` with rational parts."""
    return QQ_I(QQ(Fraction(re).numerator, Fraction(re).denominator),
                QQ(Fraction(im).numerator, Fraction(im).denominator))


def to_scalar(value, domain=QQ_I):
    """Convert ints, Fractions, ``"p/q"`` strings or ``(re, im)`` pairs."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, tuple):
        z = gauss(*value)
        return z if domain == QQ_I else domain.convert_from(z, QQ_I)
    if isinstance(value, complex):
        raise TypeError("floating complex values are not exact scalars")
    if isinstance(value, float):
        raise TypeError("floats are not exact scalars; pass a Fraction or 'p/q'")
    f = Fraction(value)
    q = QQ(f.numerator, f.denominator)
    return q if domain == QQ else QQ_I(q, 0)


def scalar_str(x) -> str:
    """Render an exact scalar as ``"p/q"`` or ``"a+bi"`` style text."""
    if hasattr(x, "x") and hasattr(x, "y"):
        re, im = Fraction(int(x.x.numerator), int(x.x.denominator)), Fraction(
            int(x.y.numerator), int(x.y.denominator))
        if im == 0:
            return str(re)
        if re == 0:
            return f"{im}i"
        sign = "+" if im > 0 else "-"
        return f"{re}{sign}{abs(im)}i"
    return str(Fraction(int(x.numerator), int(x.denominator)))


def conj(x):
    if hasattr(x, "y"):
        return QQ_I(x.x, -x.y)
    return x


def to_complex(x) -> complex:
    if hasattr(x, "y"):
        return complex(float(x.x), float(x.y))
    return complex(float(x))


def zeros(rows: int, cols: int, domain=QQ_I) -> DomainMatrix:
    return DomainMatrix.zeros((rows, cols), domain)


def eye(n: int, domain=QQ_I) -> DomainMatrix:
    return DomainMatrix.eye(n, domain)


def from_rows(rows: Sequence[Sequence], domain=QQ_I) -> DomainMatrix:
    rows = [[to_scalar(v, domain) if not _is_elem(v, domain) else v for v in r] for r in rows]
    ncols = len(rows[0]) if rows else 0
    return DomainMatrix(rows, (len(rows), ncols), domain)


def _is_elem(v, domain) -> bool:
    try:
        return domain.of_type(v)
    except Exception:
        return False


def column(entries: Sequence, domain=QQ_I) -> DomainMatrix:
    return from_rows([[e] for e in entries], domain)


def _unify(*mats: DomainMatrix) -> list[DomainMatrix]:
    dom = mats[0].domain
    for m in mats[1:]:
        if m.domain != dom:
            dom = dom.unify(m.domain)
    return [m if m.domain == dom else m.convert_to(dom) for m in mats]


def rank(M: DomainMatrix) -> int:
    if 0 in M.shape:
        return 0
    return M.rank()


def kernel(M: DomainMatrix) -> DomainMatrix:
    """Basis of the null space, as columns."""
    rows, cols = M.shape
    if cols == 0:
        return zeros(0, 0, M.domain)
    if rows == 0:
        return eye(cols, M.domain)
    ns = M.to_field().nullspace()
    return ns.transpose()


def image(M: DomainMatrix) -> DomainMatrix:
    """Basis of the column space: the pivot columns of ``M``."""
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return zeros(rows, 0, M.domain)
    _, pivots = M.to_field().rref()
    if not pivots:
        return zeros(rows, 0, M.domain)
    return M.extract(list(range(rows)), list(pivots))


def hstack(*mats: DomainMatrix) -> DomainMatrix:
    mats = [m for m in mats]
    nonempty = [m for m in mats if m.shape[1] > 0]
    if not nonempty:
        return zeros(mats[0].shape[0], 0, mats[0].domain)
    nonempty = _unify(*nonempty)
    if len(nonempty) == 1:
        return nonempty[0]
    return nonempty[0].hstack(*nonempty[1:])


def subspace_sum(U: DomainMatrix, W: DomainMatrix) -> DomainMatrix:
    return image(hstack(U, W))


def intersect(U: DomainMatrix, W: DomainMatrix) -> DomainMatrix:
    """Basis of col(U) ∩ col(W)."""
    m = U.shape[0]
    if U.shape[1] == 0 or W.shape[1] == 0:
        return zeros(m, 0, U.domain)
    U, W = image(U), image(W)
    U, W = _unify(U, W)
    ns = kernel(hstack(U, -W))
    if ns.shape[1] == 0:
        return zeros(m, 0, U.domain)
    coeffs = ns.extract(list(range(U.shape[1])), list(range(ns.shape[1])))
    return image(U.matmul(coeffs))


def contains(U: DomainMatrix, W: DomainMatrix) -> bool:
    """True when col(W) ⊂ col(U)."""
    if W.shape[1] == 0:
        return True
    return rank(hstack(U, W)) == rank(U)


def complement_columns(B: DomainMatrix, Z: DomainMatrix) -> DomainMatrix:
    """Columns of ``Z`` completing ``col(B)`` to ``col(B) + col(Z)``.

    Chosen by column-pivot order of ``[B | Z]``, so the choice is deterministic.
    """
    nb = B.shape[1]
    if Z.shape[1] == 0:
        return Z
    stacked = hstack(B, Z)
    _, pivots = stacked.to_field().rref()
    picked = [p - nb for p in pivots if p >= nb]
    if not picked:
        return zeros(Z.shape[0], 0, stacked.domain)
    Z = _unify(Z, stacked)[0]
    return Z.extract(list(range(Z.shape[0])), picked)


def solve(M: DomainMatrix, b: DomainMatrix):
    """A particular solution ``x`` of ``M x = b`` or ``None`` if inconsistent."""
    M, b = _unify(M.to_field(), b.to_field())
    rows, cols = M.shape
    if cols == 0:
        return zeros(0, 1, M.domain) if is_zero(b) else None
    aug = M.hstack(b)
    red, pivots = aug.rref()
    if cols in pivots:
        return None
    x = [M.domain.zero] * cols
    dense = red.to_list()
    for r, p in enumerate(pivots):
        x[p] = dense[r][cols]
    return DomainMatrix([[v] for v in x], (cols, 1), M.domain)


def is_zero(M: DomainMatrix) -> bool:
    if 0 in M.shape:
        return True
    return M.is_zero_matrix


def entries(M: DomainMatrix) -> list[list]:
    return M.to_list()


def iter_nonzero(M: DomainMatrix) -> Iterable[tuple[int, int, object]]:
    for (i, j), v in M.to_dok().items():
        if v:
            yield i, j, v
