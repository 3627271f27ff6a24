import numpy as np
import pytest

from singext.errors import ConfigurationError
from singext.gram import GramSpec, eta
from singext.model_space import (
    ModelVector,
    SingularFamily,
    coords_from_pairings,
    coords_of_combination,
    h_perp_basis,
    krein_q,
    metric,
    perp_part,
    phi_map,
)
from singext.spectral import SpectralOperator, apply_b, inner

from conftest import cvec, oracle, oracle_matrix


def test_h_coefficients(fam, op):
    k = np.arange(1, op.N + 1)
    assert np.allclose(fam.h(0, 1).coeffs, np.sqrt(k * k + 1.0) / np.sqrt(k), rtol=1e-14)
    for j in (1, 2, 3):
        assert np.allclose(apply_b(j, fam.h(0, j)).coeffs, fam.phi[0].coeffs, rtol=1e-13)
    with pytest.raises(ConfigurationError):
        fam.h(0, 4)


def test_gram_tilde_matches_oracle(fam):
    G, T = fam.gram_tilde()
    ref = np.array(oracle("gram_m2_N2000"))
    full = np.array(oracle("gram_m2_full"))
    assert np.allclose(G.real, ref, rtol=1e-13, atol=0)
    assert np.all(G.imag == 0)
    # the infinite sums lie within the reported tail bounds, up to roundoff
    roundoff = 8 * np.finfo(float).eps * np.abs(full)
    assert np.all(np.abs(full - G.real) <= T + roundoff)
    assert np.array_equal(G, G.conj().T)
    assert np.linalg.eigvalsh(G)[0] > 0


def test_gram_tilde_d2_matches_oracle(fam2):
    G, _ = fam2.gram_tilde()
    assert np.allclose(G, oracle_matrix("gram_m2_d2_N2000"), rtol=1e-12, atol=1e-15)


def test_gram_tilde_m1(fam1):
    G, _ = fam1.gram_tilde()
    assert G[0, 0].real == pytest.approx(oracle("gram_m1_N2000"), rel=1e-13)


def test_gram_tilde_doubling_within_tail_bound(fam, op_half):
    half = SingularFamily.power_law(op_half, 2, 1)
    G1, T1 = half.gram_tilde()
    G2, _ = fam.gram_tilde()
    assert np.allclose(G1.real, np.array(oracle("gram_m2_N1000")), rtol=1e-13, atol=0)
    assert np.all(np.abs(G2 - G1) <= T1)


def test_gram_tilde_conditions(gtilde, gtilde2):
    for G in (gtilde, gtilde2):
        f = G.flags
        assert f.hermitian and f.invertible and f.a2 and f.min_positive
        assert not f.gacomm
        assert G.GA[0, 0].real > 0


def test_membership(fam, fam2):
    for diag in fam.membership() + fam2.membership():
        assert diag[0].status == "converged"
        assert diag[1].status == "diverging"


def test_linear_dependence_rejected(op):
    row = np.ones(op.N)
    with pytest.raises(ConfigurationError):
        SingularFamily.explicit(op, 1, [row, 2 * row])


def test_coordinates(fam2, rng):
    m, d = 2, 2
    assert np.allclose(coords_of_combination(fam2, eta([1, 0], m)), eta([1, 0], m), atol=1e-10)
    assert np.allclose(coords_of_combination(fam2, np.zeros(m * d)), 0)
    c = cvec(rng, m * d)
    assert np.allclose(coords_of_combination(fam2, c), c, rtol=1e-8, atol=1e-8)


def test_coords_warns_when_ill_conditioned(fam):
    with pytest.warns(RuntimeWarning):
        coords_from_pairings(fam, [1.0, 1.0], np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]))


def test_krein_q_oracle(fam):
    for label, z in (("i", 1j), ("2+i", 2 + 1j)):
        Q, tb = krein_q(fam, z)
        assert Q[0, 0] == pytest.approx(oracle(f"q_m2_N2000_{label}"), rel=1e-12)
        assert abs(Q[0, 0] - oracle(f"q_m2_full_{label}")) <= tb


def test_krein_q_basic(fam2, rng):
    assert np.allclose(krein_q(fam2, -1.0)[0], 0)
    z = complex(*rng.normal(size=2))
    assert np.allclose(krein_q(fam2, np.conj(z))[0], krein_q(fam2, z)[0].conj().T, rtol=1e-13, atol=1e-15)


def test_metric_examples(op, rng):
    G = GramSpec(np.array([[0.0, 1.0], [1.0, 0.0]]), 2, 1)
    f = ModelVector(op.basis(1, 2), np.zeros(2))
    g = ModelVector(op.zeros(2), np.array([1.0, 0.0]))
    assert metric(f, g, G) == 0
    assert metric(g, g, G) == 0  # neutral vector
    Gp = GramSpec(np.array([[2.0, 0.5], [0.5, 1.0]]), 2, 1)
    coeffs = np.zeros(op.N, dtype=complex)
    coeffs[:5] = cvec(rng, 5)
    v = ModelVector(op.vector(coeffs, 2), cvec(rng, 2))
    assert metric(v, v, Gp).real > 0
    assert metric(v, v, Gp) == pytest.approx(inner(2, v.regular, v.regular) + np.vdot(v.singular, Gp.GA @ v.singular))


def test_h_perp_basis_examples():
    assert h_perp_basis(GramSpec(np.array([[3.0]]), 1, 1)).dim == 0
    a, b = 0.7, 1.3
    G = GramSpec(np.array([[0.0, a], [a, b]]), 2, 1)
    P = h_perp_basis(G)
    assert P.dim == 1
    v = P.vectors[:, 0]
    assert abs(v[0] * (-a) - v[1] * b) < 1e-12  # parallel to (b, -a)
    # orthogonal to H_A^min = span{eta(c)}
    assert abs(np.vdot(eta([1.0], 2), G.GA @ v)) < 1e-12


def test_h_perp_basis_indefinite_flag():
    # [G d]_2 = 0 forces d = (1, -1) * t; the restricted form is -1 < 0
    G = GramSpec(np.array([[0.0, 1.0], [1.0, 1.0]]), 2, 1)
    P = h_perp_basis(G)
    assert P.dim == 1 and P.indefinite and not P.orthonormal


def test_phi_map_and_decomposition(gtilde2, rng):
    G = gtilde2
    c = cvec(rng, 2)
    assert np.allclose(phi_map(eta(c, 2), G), c)
    P = h_perp_basis(G)
    for v in P.vectors.T:
        assert np.allclose(phi_map(v, G), 0, atol=1e-12)
    for _ in range(10):
        dvec = cvec(rng, 4)
        perp = perp_part(dvec, G)
        assert np.allclose(eta(phi_map(dvec, G), 2) + perp, dvec, atol=1e-14)
        assert np.allclose(G.bracket_m(perp), 0, atol=1e-12)


def test_phi_map_requires_invertible_gmin():
    G = GramSpec(np.array([[1.0, 1.0], [1.0, 0.0]]), 2, 1)
    with pytest.raises(ConfigurationError):
        phi_map([1.0, 0.0], G)


def test_metric_on_min_positive_iff_gmin_positive(gtilde):
    # restricted to coordinates eta(c), the form is c^* G_min c
    assert np.linalg.eigvalsh(gtilde.G_min)[0] > 0
    G = GramSpec(np.array([[1.0, 0.2], [0.2, -0.5]]), 2, 1)
    assert not G.flags.min_positive


def test_explicit_family_tail_unknown():
    op = SpectralOperator.explicit([1.0, 2.0, 3.0, 5.0], 0.0)
    fam = SingularFamily.explicit(op, 1, [[1.0, 1.0, 1.0, 1.0]])
    assert fam.phi[0].tail is None
    assert fam.membership()[0][0].status != "converged"
