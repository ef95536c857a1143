"""Pointwise generalized complex structures on R^d.

A structure is a real endomorphism J of T + T* (block order: T then T*)
with J^2 = -1, orthogonal for the neutral pairing.  Constructors build J
from pure spinors, complex structures, and holomorphic bivectors.

Convention fixed here once and used everywhere: the +i eigenspace of a
spinor-built J is the Clifford annihilator of the spinor.  This matches
the symplectic block form [[0, -w^-1], [w, 0]] exactly.  For the top
holomorphic form dz_1...dz_n the annihilator convention is the conjugate
of the block-diagonal complex-structure form, so ``j_from_poisson`` (which
is spinor-consistent) degenerates at sigma = 0 to ``j_from_complex(-I)``,
not ``j_from_complex(I)``; see the docstrings of both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gkverify.exterior import (
    ComplexForm,
    GeneralizedVector,
    clifford_act,
    exp_two_form,
    interior,
    interior_matrix,
    two_form_matrix,
    wedge,
)

__all__ = [
    "NotPure",
    "Degenerate",
    "GCStructure",
    "AnnihilatorBasis",
    "CommutationReport",
    "pairing_matrix",
    "annihilator",
    "j_from_spinor",
    "j_from_complex",
    "j_from_poisson",
    "bfield_j",
    "spinor_from_j",
    "holomorphic_frame",
    "commutation_check",
]

SVD_RELATIVE_THRESHOLD = 1e-9


class NotPure(ValueError):
    """The form is not a pure spinor (annihilator rank is not d)."""


class Degenerate(NotPure):
    """The annihilator meets its conjugate: no almost complex structure."""


def pairing_matrix(dim: int) -> np.ndarray:
    """Gram matrix of the neutral pairing, (A, B) = A^T Q B."""
    q = np.zeros((2 * dim, 2 * dim))
    q[:dim, dim:] = -0.5 * np.eye(dim)
    q[dim:, :dim] = -0.5 * np.eye(dim)
    return q


@dataclass
class GCStructure:
    """Validated generalized complex structure."""

    dim: int
    mat: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=float)
        d = self.dim
        if self.mat.shape != (2 * d, 2 * d):
            raise ValueError("matrix must be 2d x 2d")
        if np.abs(self.mat @ self.mat + np.eye(2 * d)).max() > self.tol:
            raise ValueError("J^2 != -1")
        q = pairing_matrix(d)
        if np.abs(self.mat.T @ q @ self.mat - q).max() > self.tol:
            raise ValueError("J is not orthogonal for the neutral pairing")

    def __matmul__(self, other: "GCStructure") -> np.ndarray:
        return self.mat @ other.mat

    def commutator_norm(self, other: "GCStructure") -> float:
        return float(np.abs(self.mat @ other.mat - other.mat @ self.mat).max())

    def upper_right(self) -> np.ndarray:
        """T* -> T block (the real Poisson bivector of the structure)."""
        return self.mat[: self.dim, self.dim :].copy()


@dataclass
class AnnihilatorBasis:
    """Basis of the Clifford annihilator E of a pure spinor; E has rank d."""

    dim: int
    basis: list[GeneralizedVector] = field(repr=False)

    def matrix(self) -> np.ndarray:
        """Columns are the stacked basis elements, shape (2d, d)."""
        return np.array([a.stacked() for a in self.basis]).T


def _clifford_matrix(rho: ComplexForm) -> np.ndarray:
    """Matrix of A -> A.rho over the basis (e_0..e_{d-1}, dx_0..dx_{d-1})."""
    d = rho.dim
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        cols.append(interior(e, rho).to_vector())
    for j in range(d):
        cols.append(wedge(ComplexForm.basis(d, (j,)), rho).to_vector())
    return np.array(cols).T


def annihilator(
    rho: ComplexForm,
    rel_tol: float = SVD_RELATIVE_THRESHOLD,
    require_nondegenerate: bool = True,
) -> AnnihilatorBasis:
    """Solve A . rho = 0 by dense SVD null-space extraction.

    Raises NotPure when the solution space does not have dimension d and
    Degenerate (a NotPure subclass) when it meets its conjugate, i.e. when
    the spinor does not define an almost complex structure on T + T*.
    Pass require_nondegenerate=False to get the raw solution space of a
    pure spinor whose structure is degenerate.
    """
    d = rho.dim
    m = _clifford_matrix(rho)
    _, s, vh = np.linalg.svd(m)
    cutoff = rel_tol * (s[0] if s[0] > 0 else 1.0)
    null = vh.conj().T[:, np.concatenate([s, np.zeros(2 * d - len(s))]) < cutoff]
    if null.shape[1] != d:
        raise NotPure(f"annihilator has rank {null.shape[1]}, expected {d}")
    if require_nondegenerate:
        stacked = np.hstack([null, null.conj()])
        sv = np.linalg.svd(stacked, compute_uv=False)
        if sv[-1] < rel_tol * sv[0]:
            raise Degenerate("annihilator meets its conjugate")
    return AnnihilatorBasis(d, [GeneralizedVector.from_stacked(d, null[:, j]) for j in range(d)])


def _j_from_eigenspace(e_basis: np.ndarray, dim: int, tol: float = 1e-10) -> GCStructure:
    """Real J with the span of e_basis as +i eigenspace."""
    q, _ = np.linalg.qr(e_basis)
    p = np.hstack([q, q.conj()])
    diag = np.diag([1j] * dim + [-1j] * dim)
    j = p @ diag @ np.linalg.inv(p)
    imag_max = np.abs(j.imag).max()
    if imag_max > 1e-9:
        raise Degenerate(f"eigenspace is not graded by conjugation (imag {imag_max:.2e})")
    return GCStructure(dim, j.real, tol=tol)


def j_from_spinor(rho: ComplexForm, tol: float = 1e-10) -> GCStructure:
    """J with Ann(rho) as its +i eigenspace.

    For rho = exp(i w) this reproduces the symplectic block form
    [[0, -w^-1], [w, 0]] where w is the map X -> i_X w.
    """
    ann = annihilator(rho)
    return _j_from_eigenspace(ann.matrix(), rho.dim, tol=tol)


def j_from_complex(i_mat: np.ndarray, tol: float = 1e-10) -> GCStructure:
    """Block diagonal J = diag(I, -I^T) of an almost complex structure."""
    i_mat = np.asarray(i_mat, dtype=float)
    d = i_mat.shape[0]
    if np.abs(i_mat @ i_mat + np.eye(d)).max() > 1e-9:
        raise ValueError("input is not an almost complex structure (I^2 != -1)")
    j = np.zeros((2 * d, 2 * d))
    j[:d, :d] = i_mat
    j[d:, d:] = -i_mat.T
    return GCStructure(d, j, tol=tol)


def holomorphic_frame(i_mat: np.ndarray) -> np.ndarray:
    """Deterministic basis of the +i eigenspace of I on T x C, shape (d, d/2)."""
    i_mat = np.asarray(i_mat, dtype=float)
    w, v = np.linalg.eig(i_mat)
    cols = [v[:, k] for k in range(len(w)) if abs(w[k] - 1j) < 1e-8]
    # eig order is backend dependent; sort by first significant component
    cols.sort(key=lambda z: tuple(np.round(np.abs(z), 12)))
    frame = np.array(cols).T
    q, _ = np.linalg.qr(frame)
    return q


def j_from_poisson(
    i_mat: np.ndarray,
    sigma: np.ndarray,
    frame: np.ndarray | None = None,
    tol: float = 1e-10,
) -> GCStructure:
    """GCS of a holomorphic bivector sigma on a complex structure I.

    sigma is the antisymmetric n x n coefficient matrix in the holomorphic
    frame Z_1..Z_n (default: ``holomorphic_frame(i_mat)``), for the bivector
    sum_{k<l} sigma[k,l] Z_k ^ Z_l.  The +i eigenspace is spanned by the
    conjugate frame together with zeta_k + sum_l sigma[k,l] Z_l, where zeta
    is the dual (1,0) coframe.  This is the spinor-consistent convention:
    when sigma is invertible the result equals ``j_from_spinor(exp(beta))``
    for the 2-form beta inverse to sigma, and at sigma = 0 it degenerates
    to ``j_from_complex(-i_mat)`` (the conjugate convention; the two differ
    by a global conjugation that no single choice removes).
    """
    i_mat = np.asarray(i_mat, dtype=float)
    d = i_mat.shape[0]
    n = d // 2
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (n, n):
        raise ValueError(f"sigma must be {n} x {n}")
    if np.abs(sigma + sigma.T).max() > 1e-12 * max(1.0, np.abs(sigma).max()):
        raise ValueError("sigma must be antisymmetric")
    z = holomorphic_frame(i_mat) if frame is None else np.asarray(frame, dtype=complex)
    p_full = np.hstack([z, z.conj()])
    zeta = np.linalg.inv(p_full)[:n]  # rows: dual (1,0) coframe
    cols = []
    for j in range(n):
        vec = np.zeros(2 * d, dtype=complex)
        vec[:d] = z[:, j].conj()
        cols.append(vec)
    for k in range(n):
        vec = np.zeros(2 * d, dtype=complex)
        vec[d:] = zeta[k]
        vec[:d] = z @ sigma[k]
        cols.append(vec)
    return _j_from_eigenspace(np.array(cols).T, d, tol=tol)


def bfield_j(beta: ComplexForm, tol: float = 1e-10) -> GCStructure:
    """Closed-form J of exp(beta) for a degree-2 beta with Im beta invertible.

    Equal to ``j_from_spinor(exp_two_form(beta))`` but O(d^3): the B-part
    conjugates the symplectic block form of the imaginary part.
    """
    if not beta.is_homogeneous(2):
        raise ValueError("expected a degree-2 form")
    d = beta.dim
    bmap = interior_matrix(beta).real  # map X -> i_X Re(beta)
    wmap = interior_matrix(beta).imag
    j0 = np.zeros((2 * d, 2 * d))
    j0[:d, d:] = -np.linalg.inv(wmap)
    j0[d:, :d] = wmap
    c = np.eye(2 * d)
    c[d:, :d] = bmap
    cinv = np.eye(2 * d)
    cinv[d:, :d] = -bmap
    return GCStructure(d, c @ j0 @ cinv, tol=tol)


def spinor_from_j(j: GCStructure, rel_tol: float = SVD_RELATIVE_THRESHOLD) -> ComplexForm:
    """Recover the pure spinor line of J (normalized to unit norm).

    The spinor is the simultaneous kernel of the Clifford action of the -i
    eigenspace of J; unique up to scale for a valid structure.
    """
    d = j.dim
    w, v = np.linalg.eig(j.mat)
    ebar = v[:, np.abs(w + 1j) < 1e-8]  # -i eigenvectors annihilate rho
    if ebar.shape[1] != d:
        raise NotPure("J has no d-dimensional -i eigenspace")
    blocks = []
    for k in range(d):
        a = GeneralizedVector.from_stacked(d, ebar[:, k])
        cols = []
        for mask in range(1 << d):
            basis_form = ComplexForm(d, {mask: 1.0})
            cols.append(clifford_act(a, basis_form).to_vector())
        blocks.append(np.array(cols).T)
    stacked = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stacked)
    null = vh.conj().T[:, s < rel_tol * s[0]]
    if null.shape[1] != 1:
        raise NotPure(f"spinor line has dimension {null.shape[1]}")
    return ComplexForm.from_vector(d, null[:, 0])


# -- commuting-pair test --------------------------------------------------


@dataclass
class CommutationReport:
    """Outcome of the algebraic commuting-pair test for exp(beta_1), exp(beta_2).

    Norms are reported raw and normalized by ||difference||^power so the
    verdict is scale free.
    """

    k: int
    hyp1_residual: float
    hyp2_residual: float
    hyp1_residual_normalized: float
    hyp2_residual_normalized: float
    nonvanish1: float
    nonvanish2: float
    commutator_norm: float
    kernel_signature: np.ndarray
    definite: bool
    hypotheses_hold: bool
    passed: bool


def _power(form: ComplexForm, n: int) -> ComplexForm:
    out = ComplexForm.unit(form.dim)
    for _ in range(n):
        out = wedge(out, form)
    return out


def _kernel_vectors(diff: ComplexForm, rel_tol: float = SVD_RELATIVE_THRESHOLD) -> np.ndarray:
    m = interior_matrix(diff)
    _, s, vh = np.linalg.svd(m)
    return vh.conj().T[:, s < rel_tol * s[0]]


def commutation_check(
    beta1: ComplexForm,
    beta2: ComplexForm,
    k: int,
    hyp_tol: float = 1e-10,
    commutator_tol: float = 1e-9,
    definite_tol: float = 1e-8,
    nonvanish_tol: float = 1e-8,
) -> CommutationReport:
    """Rank and definiteness test for a commuting pair of even structures.

    Checks (beta1 - beta2)^(k+1) = 0 = (beta1 - conj(beta2))^(k+1) with
    nonvanishing k-th powers on R^{4k}, builds both structures and measures
    the commutator, and evaluates the Hermitian form (beta2 - conj(beta2))
    on the kernel of beta1 - beta2, which must be definite for a metric.
    """
    beta1._check_dim(beta2)
    d = beta1.dim
    if d != 4 * k:
        raise ValueError(f"dimension {d} does not match 4k with k={k}")
    for name, form in (("beta1", beta1), ("beta2", beta2)):
        if not form.is_homogeneous(2):
            raise ValueError(f"{name} must be a degree-2 form")
        im = two_form_matrix(form).imag
        if abs(np.linalg.det(im)) < 1e-12:
            raise ValueError(f"imaginary part of {name} is degenerate")

    diff = beta1 - beta2
    diff_bar = beta1 - beta2.conjugate()
    hyp1 = _power(diff, k + 1).norm()
    hyp2 = _power(diff_bar, k + 1).norm()
    nv1 = _power(diff, k).norm()
    nv2 = _power(diff_bar, k).norm()
    scale1 = max(1.0, diff.norm()) ** (k + 1)
    scale2 = max(1.0, diff_bar.norm()) ** (k + 1)

    j1 = j_from_spinor(exp_two_form(beta1))
    j2 = j_from_spinor(exp_two_form(beta2))
    comm = j1.commutator_norm(j2)

    kernel = _kernel_vectors(diff)
    m2 = two_form_matrix(beta2 - beta2.conjugate())
    herm = kernel.T @ m2 @ kernel.conj()
    herm = (herm + herm.conj().T) / 2
    eigs = np.linalg.eigvalsh(herm)
    definite = bool(np.all(eigs > definite_tol) or np.all(eigs < -definite_tol))

    hypotheses = (
        hyp1 / scale1 < hyp_tol
        and hyp2 / scale2 < hyp_tol
        and nv1 > nonvanish_tol
        and nv2 > nonvanish_tol
        and kernel.shape[1] == 2 * k
    )
    passed = hypotheses and comm < commutator_tol and definite
    return CommutationReport(
        k=k,
        hyp1_residual=hyp1,
        hyp2_residual=hyp2,
        hyp1_residual_normalized=hyp1 / scale1,
        hyp2_residual_normalized=hyp2 / scale2,
        nonvanish1=nv1,
        nonvanish2=nv2,
        commutator_norm=comm,
        kernel_signature=eigs,
        definite=definite,
        hypotheses_hold=hypotheses,
        passed=passed,
    )
