import numpy as np
import pytest

from gkverify.exterior import (
    ComplexForm,
    clifford_act,
    exp_two_form,
    interior_matrix,
    wedge,
)
from gkverify.gcs import (
    Degenerate,
    GCStructure,
    NotPure,
    annihilator,
    bfield_j,
    commutation_check,
    j_from_complex,
    j_from_poisson,
    j_from_spinor,
    pairing_matrix,
    spinor_from_j,
)

I_STD = np.array([[0.0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
OMEGA_STD = ComplexForm(4, {(0, 1): 1.0, (2, 3): 1.0})

# quaternionic triple on R^4 used by the flat examples
OMEGA_1 = ComplexForm(4, {(0, 1): 1.0, (2, 3): 1.0})
OMEGA_2 = ComplexForm(4, {(0, 2): 1.0, (1, 3): -1.0})
OMEGA_3 = ComplexForm(4, {(0, 3): 1.0, (1, 2): 1.0})


def random_symplectic_form(rng, dim=4):
    while True:
        m = rng.normal(size=(dim, dim))
        m = m - m.T
        if abs(np.linalg.det(m)) > 1e-3:
            coeffs = {(i, j): m[i, j] for i in range(dim) for j in range(i + 1, dim)}
            return ComplexForm(dim, coeffs)


def structure_residuals(j: GCStructure):
    q = pairing_matrix(j.dim)
    sq = np.abs(j.mat @ j.mat + np.eye(2 * j.dim)).max()
    orth = np.abs(j.mat.T @ q @ j.mat - q).max()
    return sq, orth


class TestAnnihilator:
    def test_symplectic_annihilator_matches_graph(self):
        ann = annihilator(exp_two_form(1j * OMEGA_STD))
        w = interior_matrix(OMEGA_STD)
        for a in ann.basis:
            # elements have the shape X - i * i_X omega
            assert np.abs(a.cov + 1j * (w @ a.vec)).max() < 1e-10

    def test_scalar_spinor_is_degenerate(self):
        with pytest.raises(NotPure):
            annihilator(ComplexForm.unit(4))

    def test_b_field_spinor_residuals(self):
        # degenerate imaginary part: still a pure spinor with a rank-4
        # solution space, but no structure (E meets its conjugate)
        rho = exp_two_form(ComplexForm(4, {(0, 1): 1.0, (2, 3): 1j}))
        ann = annihilator(rho, require_nondegenerate=False)
        assert len(ann.basis) == 4
        for a in ann.basis:
            assert clifford_act(a, rho).norm() < 1e-12
        with pytest.raises(Degenerate):
            annihilator(rho)

    def test_rank_guard(self):
        # degree-2 form with degenerate imaginary part: annihilator rank 4
        # exists but E meets conj(E)
        rho = exp_two_form(ComplexForm(4, {(0, 1): 1j}))
        with pytest.raises(NotPure):
            annihilator(rho)


class TestJFromSpinor:
    def test_symplectic_block_form(self):
        j = j_from_spinor(exp_two_form(1j * OMEGA_STD))
        w = interior_matrix(OMEGA_STD).real
        expected = np.zeros((8, 8))
        expected[:4, 4:] = -np.linalg.inv(w)
        expected[4:, :4] = w
        assert np.abs(j.mat - expected).max() < 1e-12

    def test_upper_right_is_minus_inverse(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            om = random_symplectic_form(rng)
            j = j_from_spinor(exp_two_form(1j * om))
            w = interior_matrix(om).real
            assert np.abs(j.upper_right() + np.linalg.inv(w)).max() < 1e-12

    def test_b_field_reduction(self):
        j0 = j_from_spinor(exp_two_form(1j * OMEGA_STD))
        jb = j_from_spinor(exp_two_form(ComplexForm(4, {}) + 1j * OMEGA_STD))
        assert np.abs(j0.mat - jb.mat).max() < 1e-12

    def test_b_field_structure_residuals(self):
        rho = exp_two_form(ComplexForm(4, {(0, 1): 1.0 + 1j, (2, 3): 1j}))
        j = j_from_spinor(rho)
        sq, orth = structure_residuals(j)
        assert sq < 1e-10 and orth < 1e-10

    def test_matches_closed_form(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            om = random_symplectic_form(rng)
            bre = random_symplectic_form(rng)
            beta = bre + 1j * om
            j1 = j_from_spinor(exp_two_form(beta))
            j2 = bfield_j(beta)
            assert np.abs(j1.mat - j2.mat).max() < 1e-9


class TestJFromComplex:
    def test_block_diagonal(self):
        j = j_from_complex(I_STD)
        assert np.abs(j.mat[:4, :4] - I_STD).max() == 0
        assert np.abs(j.mat[4:, 4:] + I_STD.T).max() == 0
        assert np.abs(j.mat[:4, 4:]).max() == 0

    def test_random_conjugated(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
            i_mat = q @ I_STD @ q.T
            j = j_from_complex(i_mat)
            sq, orth = structure_residuals(j)
            assert sq < 1e-10 and orth < 1e-10

    def test_eigenspace(self):
        j = j_from_complex(I_STD)
        w, v = np.linalg.eig(j.mat)
        plus = v[:, np.abs(w - 1j) < 1e-10]
        assert plus.shape[1] == 4
        # spanned by holomorphic vectors and antiholomorphic covectors:
        # tangent parts satisfy I X = i X, covector parts I^T xi = -i xi
        for k in range(4):
            x, xi = plus[:4, k], plus[4:, k]
            assert np.abs(I_STD @ x - 1j * x).max() < 1e-10
            assert np.abs(I_STD.T @ xi + 1j * xi).max() < 1e-10

    def test_rejects_non_complex_structure(self):
        with pytest.raises(ValueError):
            j_from_complex(np.eye(4))


class TestJFromPoisson:
    # explicit holomorphic frame d/dz_j for the standard structure
    FRAME = 0.5 * np.array([[1, 0], [-1j, 0], [0, 1], [0, -1j]])

    def test_zero_bivector_gives_conjugate_complex_structure(self):
        # spinor-consistent convention: sigma = 0 degenerates to the
        # conjugate block structure, not j_from_complex(I) itself
        j = j_from_poisson(I_STD, np.zeros((2, 2)), frame=self.FRAME)
        assert np.abs(j.mat - j_from_complex(-I_STD).mat).max() < 1e-10

    def test_invertible_bivector_matches_spinor(self):
        sigma = np.array([[0.0, 1.0], [-1.0, 0.0]])
        j = j_from_poisson(I_STD, sigma, frame=self.FRAME)
        dz1dz2 = ComplexForm(4, {(0, 2): 1.0, (1, 3): -1.0, (0, 3): 1j, (1, 2): 1j})
        js = j_from_spinor(exp_two_form(dz1dz2))
        assert np.abs(j.mat - js.mat).max() < 1e-9

    def test_upper_right_block_is_induced_real_bivector(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            s = rng.normal() + 1j * rng.normal()
            sigma = np.array([[0, s], [-s, 0]])
            j = j_from_poisson(I_STD, sigma, frame=self.FRAME)
            # oracle: on a real covector xi the bivector acts as
            # 2i (sigma xi^{1,0} - conj(sigma) xi^{0,1})
            z = self.FRAME
            p_full = np.hstack([z, z.conj()])
            zeta = np.linalg.inv(p_full)[:2]
            block = j.upper_right()
            for _ in range(3):
                xi = rng.normal(size=4)
                hol = zeta @ xi  # components on the (1,0) coframe
                expected = 2j * (z @ (sigma @ hol)) - 2j * (z.conj() @ (sigma.conj() @ hol.conj()))
                assert np.abs(block @ xi - expected.real).max() < 1e-9

    def test_rejects_non_antisymmetric(self):
        with pytest.raises(ValueError):
            j_from_poisson(I_STD, np.eye(2), frame=self.FRAME)


class TestSpinorFromJ:
    def test_roundtrip_symplectic(self):
        rho = exp_two_form(ComplexForm(4, {(0, 1): 0.3 + 1j, (2, 3): 1j, (0, 2): 0.2}))
        j = j_from_spinor(rho)
        rec = spinor_from_j(j)
        rec = rec * (rho.scalar_part / rec.scalar_part)
        assert (rec - rho).norm() < 1e-9 * rho.norm()

    def test_complex_type_has_no_scalar_part(self):
        j = j_from_complex(I_STD)
        rho = spinor_from_j(j)
        assert abs(rho.scalar_part) < 1e-10
        assert rho.degree_part(4).norm() > 0.1


class TestCommutationCheck:
    def test_flat_quaternionic_pair_passes(self):
        beta1 = OMEGA_1 + 0.5j * (OMEGA_2 - OMEGA_3)
        beta2 = 0.5j * (OMEGA_2 + OMEGA_3)
        rep = commutation_check(beta1, beta2, k=1)
        assert rep.passed
        assert rep.hyp1_residual < 1e-14
        assert rep.hyp2_residual < 1e-14
        assert rep.commutator_norm < 1e-12
        assert rep.definite

    def test_scaled_holomorphic_pair_fails_second_hypothesis(self):
        dz1dz2 = ComplexForm(4, {(0, 2): 1.0, (1, 3): -1.0, (0, 3): 1j, (1, 2): 1j})
        beta1 = dz1dz2
        beta2 = 2.0 * dz1dz2
        rep = commutation_check(beta1, beta2, k=1)
        assert rep.hyp1_residual < 1e-14
        assert rep.hyp2_residual > 1e-2
        assert not rep.passed

    def test_coincident_forms_fail_nonvanishing(self):
        beta = OMEGA_1 + 1j * (OMEGA_2 + OMEGA_3)
        rep = commutation_check(beta, beta, k=1)
        assert rep.nonvanish1 == 0
        assert not rep.hypotheses_hold
        assert not rep.passed


def test_gcstructure_validation():
    with pytest.raises(ValueError):
        GCStructure(4, np.eye(8))
