import numpy as np
import pytest

from singext.amodel import AModel, ThetaRelation
from singext.bmodel import BModel, build_delta, eval_rhat, rhat_perturbation_bound
from singext.errors import ConditionError, ConfigurationError, DomainError, PoleError
from singext.gram import GramSpec, antitriangular_gram, eta
from singext.model_space import ModelVector, SingularFamily, krein_q
from singext.spectral import SpectralOperator, apply_L, resolvent_L

from conftest import cvec, finite_vector, oracle


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))


def vec_rel(u, v):
    return (u - v).max_abs() / max(1.0, u.max_abs(), v.max_abs())


def rand_element(B, rng):
    return B.element(finite_vector(B.op, B.m + 2, rng), cvec(rng, B.d), cvec(rng, B.d), B.random_perp(rng))


def broken_a2(G):
    G = G.copy()
    G[0, 1] += 0.05j
    G[1, 0] -= 0.05j
    return GramSpec(G, 2, 1)


@pytest.fixture(scope="module")
def B_tilde(fam, gtilde):
    return BModel(fam, gtilde)


@pytest.fixture(scope="module")
def B_tilde2(fam2, gtilde2):
    return BModel(fam2, gtilde2)


@pytest.fixture(scope="module")
def B_one(fam1):
    return BModel(fam1, GramSpec(np.array([[0.8]]), 1, 1))


def test_build_delta_examples(gtilde2):
    dp = build_delta(GramSpec(np.array([[2.5]]), 1, 1), -1.0)
    assert dp.Delta[0, 0] == -2.5 and dp.DeltaHat[0, 0] == -1.0
    a, b, z1 = 0.6, 1.7, 0.3
    dp = build_delta(GramSpec(np.array([[0.0, a], [a, b]]), 2, 1), z1)
    assert dp.Delta[0, 0] == pytest.approx(z1 * b + a, rel=1e-15)
    assert dp.DeltaHat[0, 0] == pytest.approx(z1 + a / b, rel=1e-15)
    poles = build_delta(gtilde2, -1.0).poles
    assert np.max(np.abs(poles.imag)) < 1e-10


def test_deltahat_oracle(B_tilde):
    assert B_tilde.dp.DeltaHat[0, 0].real == pytest.approx(oracle("deltahat_m2_N2000"), rel=1e-12)


def test_rhat_examples(B_tilde, B_one, rng):
    for label, z in (("i", 1j), ("2+i", 2 + 1j)):
        assert B_tilde.rhat(z)[0, 0] == pytest.approx(oracle(f"rhat_m2_N2000_{label}"), rel=1e-12)
        assert B_tilde.weyl(z).M[0, 0] == pytest.approx(oracle(f"MB_m2_N2000_{label}"), rel=1e-12)
    a, b = 0.6, 1.7
    dp = build_delta(GramSpec(np.array([[0.0, a], [a, b]]), 2, 1), 0.0)
    assert eval_rhat(1 + 1j, dp)[0, 0] == pytest.approx(b / (a / b - 1 - 1j), rel=1e-14)
    z = 0.2 + 0.9j
    assert B_one.rhat(z)[0, 0] == pytest.approx(0.8 / (-1.0 - z), rel=1e-15)
    with pytest.raises(PoleError):
        eval_rhat(a / b, dp)


def test_rhat_symmetric(B_tilde2, rng):
    for _ in range(10):
        z = complex(*rng.normal(size=2))
        assert rel(B_tilde2.rhat(np.conj(z)), B_tilde2.rhat(z).conj().T) < 1e-13


def test_m1_degeneracy(fam1, B_one, rng):
    """At m = 1 the B-model is the A-model: DeltaHat = z1, rhat = r, no H_A^perp."""
    A = AModel(fam1, B_one.G)
    assert abs(B_one.dp.DeltaHat[0, 0] - (-1.0)) < 1e-12
    assert B_one.perp.dim == 0
    for _ in range(12):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 3))
        assert rel(B_one.rhat(z), A.r(z)) < 1e-12
        assert rel(B_one.weyl(z).M, A.weyl(z).M) < 1e-12
        c = cvec(rng, 1)
        assert vec_rel(B_one.vector(B_one.gamma(z, c)), A.vector(A.gamma(z, c))) < 1e-12
    f, c, chi = finite_vector(A.op, 3, rng), cvec(rng, 1), cvec(rng, 1)
    out_b = B_one.apply_max(B_one.element(f, c, chi))
    out_a = A.apply_max(A.element(f, c, chi))
    assert vec_rel(out_b, out_a) == 0


def test_m1_symmetry_any_hermitian(fam1):
    B = BModel(fam1, GramSpec(np.array([[-3.0]]), 1, 1), strict=False)
    assert B.check_symmetry(20, 0).max_residual < 1e-9


def test_conditions_enforced(fam, gtilde):
    with pytest.raises(ConditionError):
        BModel(fam, broken_a2(gtilde.GA))
    with pytest.raises(ConditionError):
        BModel(fam, GramSpec(np.array([[0.0, 0.3], [0.3, -2.0]]), 2, 1))


def test_apply_max_examples(B_tilde, rng):
    f = finite_vector(B_tilde.op, 4, rng)
    out = B_tilde.apply_max(B_tilde.element(f))
    assert np.allclose(out.regular.coeffs, apply_L(f).coeffs) and np.allclose(out.singular, 0)
    base = rand_element(B_tilde, rng)
    kp = B_tilde.random_perp(rng)
    other = B_tilde.element(base.f_sharp, base.c, base.chi, base.k_perp + kp)
    diff = B_tilde.apply_max(other) - B_tilde.apply_max(base)
    assert not np.any(diff.regular.coeffs)
    assert B_tilde.in_perp(diff.singular) and np.allclose(diff.singular, kp)
    with pytest.raises(DomainError):
        B_tilde.apply_max(B_tilde.element(k_perp=eta([1.0], 2)))


def test_boundary_values_examples(B_tilde2, rng):
    B = B_tilde2
    f = finite_vector(B.op, 4, rng)
    x = B.element(f, k_perp=B.random_perp(rng))
    assert np.allclose(B.gamma0(x), 0)
    assert np.allclose(B.gamma1(x), B.fam.pair_phi(f)[0])
    chi = cvec(rng, 2)
    assert np.allclose(B.gamma1(B.element(chi=chi)), -B.dp.G_min @ chi)
    y = B.random_kernel_element(rng)
    assert np.allclose(B.fam.pair_phi(y.f_sharp)[0], B.dp.G_min @ y.chi)
    assert np.allclose(B.gamma0(y), 0) and np.allclose(B.gamma1(y), 0, atol=1e-12)


def anti2_positive():
    H = np.zeros((2, 2, 2), dtype=complex)
    H[0, 0] = [1.0, 2.0]
    H[1, 1] = [0.5, 1.5]
    H[0, 1] = [0.3j, 0.4 - 0.2j]
    H[1, 0] = np.conj(H[0, 1])
    return GramSpec(antitriangular_gram(H, 2), 2, 2)


@pytest.mark.parametrize("which", ["tilde", "tilde2", "anti2"])
def test_green_identity(which, B_tilde, B_tilde2, fam2, rng):
    B = {"tilde": B_tilde, "tilde2": B_tilde2}.get(which) or BModel(fam2, anti2_positive())
    for _ in range(50):
        lhs, rhs = B.boundary_form(rand_element(B, rng), rand_element(B, rng))
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
    assert B.check_symmetry(50, 7).max_residual < 1e-9


def test_broken_a2_negative_control(fam, gtilde, rng):
    B = BModel(fam, broken_a2(gtilde.GA), strict=False)
    assert not B.report.a2
    assert B.check_symmetry(50, 0).max_residual > 1e-3


def test_surjectivity_witness(B_tilde2, rng):
    chi0, chi1 = cvec(rng, 2), cvec(rng, 2)
    x = B_tilde2.surjectivity_witness(chi0, chi1)
    assert np.allclose(B_tilde2.gamma0(x), chi0)
    assert rel(B_tilde2.gamma1(x), chi1) < 1e-10


def test_eigen_field(B_tilde, B_tilde2, rng):
    for B in (B_tilde, B_tilde2):
        for _ in range(20):
            z = complex(rng.uniform(-4, 4), rng.uniform(0.2, 4) * rng.choice([-1, 1]))
            c = cvec(rng, B.d)
            x = B.gamma(z, c)
            assert B.in_perp(x.k_perp)
            assert vec_rel(B.apply_max(x), B.vector(x) * z) < 1e-9
            assert np.allclose(B.gamma0(x), c)


def test_weyl_two_path_and_strictness(B_tilde, B_tilde2, rng):
    for B in (B_tilde, B_tilde2):
        for _ in range(12):
            z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 3))
            M = B.weyl(z).M
            via = np.column_stack([B.gamma1(B.gamma(z, e)) for e in np.eye(B.d)])
            assert rel(via, M) < 1e-8
            im = (M - M.conj().T) / (2j * z.imag)
            assert np.linalg.eigvalsh(im)[0] > 0


def test_imag_rhat_identity(B_tilde2, rng):
    for _ in range(10):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 3))
        lhs, rhs = B_tilde2.imag_rhat_identity(z)
        assert rel(lhs, rhs) < 1e-12
        assert np.linalg.eigvalsh((rhs + rhs.conj().T) / 2)[0] > 0


def test_similarity_form_with_inverse_square_does_not_hold(B_tilde):
    # G_min^{-2} rhat^* G_min^{-1} rhat differs from Im rhat / Im z unless G_min = 1
    z = 1j
    R = B_tilde.rhat(z)
    g = B_tilde.dp.G_min[0, 0].real
    lhs, _ = B_tilde.imag_rhat_identity(z)
    stated = R.conj() * R / g**3
    assert abs(lhs[0, 0] - stated[0, 0]) > 0.1 * abs(lhs[0, 0])


def test_resolvent_B0_examples(B_tilde, rng):
    z = 0.4 + 1.2j
    f = finite_vector(B_tilde.op, 2, rng)
    out = B_tilde.resolvent_B0(z, ModelVector(f, np.zeros(2)))
    assert np.allclose(out.f_sharp.coeffs, resolvent_L(z, f).coeffs)
    assert np.allclose(out.chi, 0) and np.allclose(out.k_perp, 0)
    kp = B_tilde.random_perp(rng)
    out = B_tilde.resolvent_B0(z, ModelVector(B_tilde.op.zeros(2), kp))
    assert B_tilde.vector(out).max_abs() < 1e-14
    with pytest.raises(PoleError):
        B_tilde.resolvent_B0(B_tilde.dp.DeltaHat[0, 0], ModelVector(f, np.zeros(2)))


@pytest.mark.parametrize("which", ["tilde", "tilde2"])
def test_resolvent_identity_and_membership(which, B_tilde, B_tilde2, rng):
    B = B_tilde if which == "tilde" else B_tilde2
    theta = ThetaRelation.scalar(0.5, B.d)
    for _ in range(5):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.3, 3))
        w = complex(rng.uniform(-3, 3), -rng.uniform(0.3, 3))
        v = ModelVector(finite_vector(B.op, B.m, rng), cvec(rng, B.m * B.d))
        Rz, Rw = B.resolvent(z, theta, v), B.resolvent(w, theta, v)
        lhs = B.vector(Rz) - B.vector(Rw)
        rhs = B.vector(B.resolvent(z, theta, B.vector(Rw))) * (z - w)
        assert vec_rel(lhs, rhs) < 1e-8
        assert vec_rel(B.apply_max(Rz) - B.vector(Rz) * z, v) < 1e-9
        assert theta.contains(B.gamma0(Rz), B.gamma1(Rz))
        R0 = B.resolvent(z, ThetaRelation.zero(B.d), v)
        assert vec_rel(B.vector(R0), B.vector(B.resolvent_B0(z, v))) == 0


def test_compressed_resolvent(B_tilde, B_tilde2, rng):
    for B in (B_tilde, B_tilde2):
        theta = ThetaRelation.scalar(1.5, B.d)
        for _ in range(5):
            z = complex(rng.uniform(-3, 3), rng.uniform(0.3, 3))
            f = finite_vector(B.op, B.m, rng)
            full = B.vector(B.resolvent(z, theta, ModelVector(f, np.zeros(B.m * B.d)))).regular
            assert rel(B.compressed_resolvent(z, theta, f).coeffs, full.coeffs) < 1e-8
            zero = B.compressed_resolvent(z, ThetaRelation.zero(B.d), f)
            assert np.array_equal(zero.coeffs, resolvent_L(z, f).coeffs)


def test_compressed_resolvent_scalar_denominator(B_tilde, rng):
    theta, z = -0.7, 2.0 + 0.3j
    f = finite_vector(B_tilde.op, 2, rng)
    base = resolvent_L(z, f)
    num, _ = B_tilde.fam.pair_phi(base)
    Q, _ = krein_q(B_tilde.fam, z)
    s = num[0] / (theta - Q[0, 0] - B_tilde.rhat(z)[0, 0])
    expect = base + resolvent_L(z, B_tilde.fam.h_m([s]))
    assert rel(B_tilde.compressed_resolvent(z, ThetaRelation.scalar(theta), f).coeffs, expect.coeffs) < 1e-13


def test_rhat_truncation_bound(op_half, fam, gtilde):
    half = SingularFamily.power_law(op_half, 2, 1)
    B1, B2 = BModel(half, half.gram_spec()), BModel(fam, gtilde)
    for z in (1j, 2 + 1j, -0.5 + 0.2j):
        bound = rhat_perturbation_bound(half.gram_spec(), half.gram_tilde()[1], -1.0, z)
        diff = abs(B1.rhat(z)[0, 0] - B2.rhat(z)[0, 0])
        assert 0 < diff <= bound


def test_simplicity_fixture(B_tilde):
    pts = [1j, 2j, 4j, 8j, 1 + 1j, 2 + 2j, 2 + 1j, 4 + 2j]
    rep = B_tilde.check_simplicity(pts)
    assert rep.verdict == "simple" and rep.sigma_min > rep.threshold
    assert rep.as_dict()["verdict"] == "simple"


def test_simplicity_degenerate_control():
    op = SpectralOperator.power(N=200)
    coeffs = np.zeros((1, 200))
    coeffs[0, :3] = [1.0, 0.5, 0.25]
    fam = SingularFamily.explicit(op, 1, coeffs)
    B = BModel(fam, GramSpec(np.array([[1.0]]), 1, 1))
    rep = B.check_simplicity([1j, 2j, 4j, 1 + 1j])
    assert rep.verdict == "degenerate" and rep.sigma_min <= 1e-13


def test_simplicity_input_checks(B_tilde):
    with pytest.raises(ConfigurationError):
        B_tilde.check_simplicity([1.0, 2j])
    rep = B_tilde.check_simplicity([1j, 2j, 4j, 8j])
    assert rep.probe == 1
    # fewer equations than unknowns leaves a nonzero solution next to the trivial one
    rep = B_tilde.check_simplicity([1j], probe=3)
    assert rep.sigma_min == 0 and rep.verdict == "degenerate"
