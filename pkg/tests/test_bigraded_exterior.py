"""Pointwise exterior algebra: conventions, hand-computed oracles and exhaustive identities."""

import pytest
from hypothesis import given, strategies as st

from hlc_lab import exact
from hlc_lab.bigraded_exterior import (BigradedForm, HermitianModel, ModelError, SymplecticSpace,
                                       check_linear_lefschetz, extend_J, hodge_star, op_B, op_L,
                                       op_Lambda, sl2_conventions, standard_J, standard_omega,
                                       symplectic_star, validate_model, verify_identities, wedge)
from hlc_lab.exact import QQ, QQ_I, DomainMatrix


def theta(model, *I, bar=(), c=1):
    return BigradedForm.monomial(model, I, bar, c)


@pytest.fixture(scope="module")
def m2():
    return HermitianModel.standard(2)


# ---------------------------------------------------------------- exact helpers


def test_kernel_image_rank_complement():
    M = exact.from_rows([[1, 2, 3], [2, 4, 6]], QQ)
    assert exact.rank(M) == 1
    K = exact.kernel(M)
    assert K.shape == (3, 2) and exact.is_zero(M * K)
    assert exact.rank(exact.image(M)) == 1
    U = exact.from_rows([[1], [0], [0]], QQ)
    W = exact.from_rows([[1, 0], [0, 1], [0, 0]], QQ)
    assert exact.contains(W, U) and not exact.contains(U, W)
    assert exact.intersect(U, W).shape[1] == 1
    assert exact.complement_columns(U, W).shape[1] == 1


def test_gaussian_scalars():
    z = exact.gauss("1/2", -3)
    assert exact.conj(z) == exact.gauss("1/2", 3)
    assert exact.to_complex(z) == complex(0.5, -3)
    assert exact.scalar_str(exact.gauss(0, 1)) == "1i"


# ------------------------------------------------------------------ validation


def test_validate_standard_pair():
    rep = validate_model(standard_omega(2), standard_J(2))
    assert rep.ok, rep.failed()


def test_validate_flipped_plane_fails_taming():
    J = standard_J(2).to_list()
    J[2][3], J[3][2] = -J[2][3], -J[3][2]  # reverse J on the second plane
    rep = validate_model(standard_omega(2), DomainMatrix(J, (4, 4), QQ))
    assert not rep.checks["taming"]
    assert rep.checks["J_squared_minus_one"]


def test_validate_singular_omega():
    W = exact.from_rows([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], QQ)
    rep = validate_model(W)
    assert not rep.checks["nondegenerate"]
    with pytest.raises(ModelError):
        SymplecticSpace(W)


def test_validate_shape_errors():
    with pytest.raises(ModelError):
        validate_model([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])


# ---------------------------------------------------------------------- wedge


def test_wedge_examples(m2):
    t1, t2 = theta(m2, 1), theta(m2, 2)
    tb2 = theta(m2, bar=(2,))
    assert wedge(t1, theta(m2, bar=(1,))) == theta(m2, 1, bar=(1,))
    assert wedge(t1, t1) == BigradedForm.zero(m2)
    assert wedge(t1 + t2, tb2) == theta(m2, 1, bar=(2,)) + theta(m2, 2, bar=(2,))
    assert wedge(t2, t1) == -theta(m2, 1, 2)


forms_n2 = st.dictionaries(
    st.sampled_from([(1, 0, (1,), ()), (1, 0, (2,), ()), (0, 1, (), (1,)), (0, 1, (), (2,)),
                     (1, 1, (1,), (2,)), (2, 0, (1, 2), ()), (0, 0, (), ())]),
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda t: QQ_I(*t)),
    max_size=4,
)


@given(forms_n2, forms_n2, forms_n2)
def test_wedge_associative_and_bilinear(a, b, c):
    m = HermitianModel.standard(2)
    A, B, C = (BigradedForm(m, x) for x in (a, b, c))
    assert wedge(wedge(A, B), C) == wedge(A, wedge(B, C))
    assert wedge(A, B + C) == wedge(A, B) + wedge(A, C)


# ----------------------------------------------------------------- J and stars


def test_J_scalars(m2):
    conv = sl2_conventions(m2)["J"]
    for (p, q), s in conv.items():
        assert s == QQ_I(0, 1) ** ((p - q) % 4)
    assert extend_J(theta(m2, 1, bar=(2,))) == theta(m2, 1, bar=(2,))
    assert extend_J(theta(m2, 1)) == theta(m2, 1, c=exact.gauss(0, 1))


@given(forms_n2)
def test_J_twice_is_sign_of_degree(a):
    m = HermitianModel.standard(2)
    A = BigradedForm(m, a)
    for k in A.degrees():
        part = BigradedForm(m, {key: v for key, v in A.coeffs.items() if key[0] + key[1] == k})
        assert extend_J(extend_J(part)) == part.scale((-1) ** k)


def test_stars_on_unit_and_volume(m2):
    one = BigradedForm.one(m2)
    vol = wedge(op_L(one), op_L(one)).scale(QQ(1, 2))
    assert hodge_star(one) == vol
    assert symplectic_star(one) == vol
    assert hodge_star(vol) == one


def test_hodge_star_theta1_n2(m2):
    # real oracle: *e1 = e234, *e2 = -e134, so *theta^1 = e234 - i e134 = theta^1 ^ theta^2 ^ conj(theta^2) / 2
    assert hodge_star(theta(m2, 1)) == theta(m2, 1, 2, bar=(2,), c=QQ_I(QQ(1, 2), QQ(0)))


def test_real_hodge_star_orthonormal_frame(m2):
    H = m2.hodge_star_real[1].to_list()
    basis3 = m2.basis(3)
    col_e1 = {basis3[i]: H[i][0] for i in range(4) if H[i][0]}
    col_e2 = {basis3[i]: H[i][1] for i in range(4) if H[i][1]}
    assert col_e1 == {(1, 2, 3): 1}
    assert col_e2 == {(0, 2, 3): -1}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_star_s_squared_is_identity(n):
    conv = sl2_conventions(HermitianModel.standard(n))
    assert all(v == QQ_I(1, 0) for v in conv["star_s_squared"].values())


def test_lambda_omega_n2(m2):
    omega = op_L(BigradedForm.one(m2))
    assert op_Lambda(omega) == BigradedForm.one(m2).scale(2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_B_is_k_minus_n(n):
    B = sl2_conventions(HermitianModel.standard(n))["B"]
    assert {k: int(v.x) for k, v in B.items()} == {k: k - n for k in range(2 * n + 1)}
    assert all(v.y == 0 for v in B.values())


def test_op_B_on_form(m2):
    assert op_B(theta(m2, 1)) == theta(m2, 1).scale(-1)


# -------------------------------------------------------------- Lefschetz maps


def test_linear_lefschetz_examples():
    assert check_linear_lefschetz(2, 1)
    assert check_linear_lefschetz(3, 3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_identities_exhaustive(n):
    res = verify_identities(HermitianModel.standard(n))
    assert all(res.values()), {k: v for k, v in res.items() if not v}


@st.composite
def compatible_pairs(draw):
    """``(P^T omega_0 P, P^{-1} J_0 P)`` for a random invertible rational ``P``."""
    n = draw(st.integers(1, 2))
    m = 2 * n
    entries = draw(st.lists(st.integers(-2, 2), min_size=m * m, max_size=m * m))
    P = DomainMatrix([[QQ(entries[i * m + j]) for j in range(m)] for i in range(m)], (m, m), QQ)
    P = P + DomainMatrix.eye(m, QQ) * QQ(9)  # strictly diagonally dominant, hence invertible
    W = P.transpose() * standard_omega(n) * P
    J = P.inv() * standard_J(n) * P
    return W, J


@given(compatible_pairs())
def test_identities_on_random_compatible_pairs(pair):
    W, J = pair
    res = verify_identities(HermitianModel(W, J))
    assert all(res.values()), {k: v for k, v in res.items() if not v}
