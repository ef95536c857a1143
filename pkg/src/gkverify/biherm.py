"""Bihermitian data of a commuting pair of generalized complex structures.

Extraction follows the graph construction: the eigenspace of J1 J2 on
which the neutral pairing is positive definite is the graph of b - g for
a Riemannian g and a 2-form b; J1 restricted to the two eigenspaces
induces the complex structures I+ and I-.  The reconstruction formula is
the b-conjugated block matrix in I+/-, omega+/- and is an exact inverse
of extraction (tested to 1e-8).

Sign conventions, fixed by the round trip and by the decomposition
identities on the flat quaternionic example (see tests):

* pairing (X+xi, X+xi) = -i_X xi, so the pairing-positive graph carries
  ``g = -sym(section)``; ``b`` is stored as the 2-form whose coefficient
  matrix equals the skew part of the section, which is the sign that
  satisfies beta1 = b + i omega_+ - (p-1) conj(gamma)/2 directly;
* omega_pm(X, Y) = g(X, I_pm Y);
* I- is minus the structure J1 induces on the complementary eigenspace
  (this yields I- = -I in the Kahler case);
* ``definiteness`` records the sign of (J1 J2 A, A); the second structure
  is reconstructed with the prefactor -definiteness.  Pairs built from two
  closed forms exp(beta) with the annihilator convention come out with
  definiteness -1 when (beta1-conj(beta1))(X, conj X) > 0 on the kernel,
  +1 otherwise; for +1 pairs the decomposition identities hold for the
  partner conj(beta2), and gamma is formed accordingly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from gkverify.exterior import (
    ComplexForm,
    eval_two_form,
    form_from_matrix,
    two_form_matrix,
    wedge,
)
from gkverify.gcs import GCStructure, NotPure, pairing_matrix, spinor_from_j

__all__ = [
    "NotCommuting",
    "IndefiniteMetric",
    "TypeViolation",
    "BihermitianPoint",
    "extract",
    "reconstruct",
    "decomposition_check",
    "DecompositionReport",
    "angle_from_liouville",
    "poisson_sigma",
    "PoissonSigmaResult",
    "real_poisson",
    "RealPoissonResult",
    "selfdual_b_check",
    "SelfdualReport",
    "hodge_star_two_form",
    "synthetic_point",
]


class NotCommuting(ValueError):
    """J1 and J2 do not commute within tolerance."""


class IndefiniteMetric(ValueError):
    """(J1 J2 A, A) is not definite, or the graph metric is not positive."""


class TypeViolation(ValueError):
    """g([I+, I-] . , .) has a (1,1) component above tolerance."""


@dataclass
class BihermitianPoint:
    """Pointwise bihermitian package extracted from a commuting pair."""

    dim: int
    g: np.ndarray
    b: np.ndarray  # 2-form coefficient matrix, see module docstring
    i_plus: np.ndarray
    i_minus: np.ndarray
    omega_plus: ComplexForm
    omega_minus: ComplexForm
    p: float
    p_residual: float
    definiteness: int
    gamma: ComplexForm | None = None
    sigma_plus: np.ndarray | None = None
    frame_plus: np.ndarray | None = None

    def b_form(self) -> ComplexForm:
        return form_from_matrix(self.b)

    def omega_map(self, sign: int) -> np.ndarray:
        """Matrix of X -> i_X omega_pm."""
        i_mat = self.i_plus if sign > 0 else self.i_minus
        return i_mat.T @ self.g


def _eigenspace_basis(k_mat: np.ndarray, sign: int) -> np.ndarray:
    proj = (np.eye(k_mat.shape[0]) + sign * k_mat) / 2
    u, s, _ = np.linalg.svd(proj)
    return u[:, s > 0.5]


def _definiteness(gram_eigs: np.ndarray, tol: float = 1e-10) -> int:
    if np.all(gram_eigs > tol):
        return 1
    if np.all(gram_eigs < -tol):
        return -1
    return 0


def _oneone_part(form: ComplexForm, i_mat: np.ndarray) -> ComplexForm:
    m = two_form_matrix(form)
    return form_from_matrix((m + i_mat.T @ m @ i_mat) / 2)


def _form_inner(a: ComplexForm, b: ComplexForm) -> complex:
    keys = set(a.coeffs) | set(b.coeffs)
    return sum(a.coefficient(k) * np.conj(b.coefficient(k)) for k in keys)


def holomorphic_gram_schmidt(i_mat: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g-orthonormal basis of the +i eigenspace of I, shape (d, d/2)."""
    w, v = np.linalg.eig(i_mat)
    z = v[:, np.abs(w - 1j) < 1e-8].copy()
    for a in range(z.shape[1]):
        for b in range(a):
            z[:, a] -= (z[:, b].conj() @ g @ z[:, a]) * z[:, b]
        z[:, a] /= np.sqrt(np.real(z[:, a].conj() @ g @ z[:, a]))
    return z


def _sigma_from_metric(
    g: np.ndarray, i_plus: np.ndarray, i_minus: np.ndarray, frame: np.ndarray
) -> tuple[np.ndarray, float]:
    """sigma_+ from S = g([I+, I-] ., .): (0,2) part raised by the metric.

    Returns (sigma, relative (1,1)-part norm).  The normalization -i/4 in
    the orthonormal frame is fixed by sigma gamma = 2i on the flat
    quaternionic example.
    """
    s_mat = g @ (i_plus @ i_minus - i_minus @ i_plus)
    scale = max(np.abs(s_mat).max(), 1e-300)
    oneone = (s_mat + i_plus.T @ s_mat @ i_plus) / 2
    violation = np.abs(oneone).max() / scale
    n = frame.shape[1]
    s02 = np.array(
        [[frame[:, j].conj() @ s_mat @ frame[:, k].conj() for k in range(n)] for j in range(n)]
    )
    return -0.25j * s02, violation


def extract(j1: GCStructure, j2: GCStructure, commute_tol: float = 1e-9) -> BihermitianPoint:
    """Extract (g, b, I+, I-, omega+, omega-, p, gamma, sigma+) from a pair.

    Raises NotCommuting when [J1, J2] exceeds tolerance and
    IndefiniteMetric when (J1 J2 A, A) is not definite.
    """
    d = j1.dim
    if j2.dim != d:
        raise ValueError("dimension mismatch")
    comm = j1.commutator_norm(j2)
    if comm > commute_tol:
        raise NotCommuting(f"commutator norm {comm:.3e}")
    k_mat = j1.mat @ j2.mat
    q = pairing_matrix(d)
    bases = {s: _eigenspace_basis(k_mat, s) for s in (+1, -1)}
    defs = {s: _definiteness(np.linalg.eigvalsh(bases[s].T @ q @ bases[s])) for s in (+1, -1)}
    if defs[+1] == 1:
        v_plus, v_minus, delta = bases[+1], bases[-1], +1
    elif defs[-1] == 1:
        v_plus, v_minus, delta = bases[-1], bases[+1], -1
    else:
        raise IndefiniteMetric(f"pairing signs on eigenspaces: {defs[+1]}, {defs[-1]}")

    x, xi = v_plus[:d], v_plus[d:]
    if abs(np.linalg.det(x)) < 1e-12:
        raise IndefiniteMetric("positive eigenspace is not a graph over T")
    section = xi @ np.linalg.inv(x)
    g = -(section + section.T) / 2
    if np.linalg.eigvalsh(g).min() <= 0:
        raise IndefiniteMetric("graph metric is not positive definite")
    b = (section - section.T) / 2

    xm, xim = v_minus[:d], v_minus[d:]
    section_m = xim @ np.linalg.inv(xm)
    a11, a12 = j1.mat[:d, :d], j1.mat[:d, d:]
    i_plus = a11 + a12 @ section
    i_minus = -(a11 + a12 @ section_m)

    omega_plus = form_from_matrix(g @ i_plus)
    omega_minus = form_from_matrix(g @ i_minus)
    oneone = _oneone_part(omega_minus, i_plus)
    denom = _form_inner(omega_plus, omega_plus).real
    p = float((_form_inner(oneone, omega_plus) / denom).real)
    p_residual = (oneone - p * omega_plus).norm()

    gamma = None
    try:
        rho1 = spinor_from_j(j1)
        rho2 = spinor_from_j(j2)
        if abs(rho1.scalar_part) > 1e-8 and abs(rho2.scalar_part) > 1e-8:
            beta1 = rho1.degree_part(2) / rho1.scalar_part
            beta2 = rho2.degree_part(2) / rho2.scalar_part
            beta2_eff = beta2 if delta == -1 else beta2.conjugate()
            gamma = (beta1 - beta2_eff).conjugate()
    except NotPure:
        pass

    frame = holomorphic_gram_schmidt(i_plus, g)
    sigma, _ = _sigma_from_metric(g, i_plus, i_minus, frame)

    return BihermitianPoint(
        dim=d,
        g=g,
        b=b,
        i_plus=i_plus,
        i_minus=i_minus,
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        p=p,
        p_residual=p_residual,
        definiteness=delta,
        gamma=gamma,
        sigma_plus=sigma,
        frame_plus=frame,
    )


def reconstruct(bp: BihermitianPoint, tol: float = 1e-9) -> tuple[GCStructure, GCStructure]:
    """Rebuild (J1, J2) from the bihermitian package (inverse of extract)."""
    d = bp.dim
    w_plus = bp.omega_map(+1)
    w_minus = bp.omega_map(-1)
    try:
        wp_inv = np.linalg.inv(w_plus)
        wm_inv = np.linalg.inv(w_minus)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteMetric("singular Hermitian form") from exc

    conj = np.eye(2 * d)
    conj[d:, :d] = bp.b  # the stored coefficient matrix is the graph skew part
    conj_inv = np.eye(2 * d)
    conj_inv[d:, :d] = -bp.b

    def middle(s_i: int, s_w: int) -> np.ndarray:
        m = np.zeros((2 * d, 2 * d))
        m[:d, :d] = (bp.i_plus + s_i * bp.i_minus) / 2
        m[:d, d:] = -(wp_inv + s_w * wm_inv) / 2
        m[d:, :d] = (w_plus + s_w * w_minus) / 2
        m[d:, d:] = -(bp.i_plus.T + s_i * bp.i_minus.T) / 2
        return m

    j1 = conj @ middle(-1, +1) @ conj_inv
    j2 = -bp.definiteness * (conj @ middle(+1, -1) @ conj_inv)
    return GCStructure(d, j1, tol=tol), GCStructure(d, j2, tol=tol)


# -- identity verification -------------------------------------------------


@dataclass
class DecompositionReport:
    """Residuals of the closed-form decomposition identities at a point.

    All identities are evaluated for the sign of b that fits best; the
    chosen sign is reported (the stored convention makes it +1).
    """

    b_sign: int
    beta1_residual: float
    beta2_residual: float
    omega_minus_residual: float
    q1: complex
    q2: complex
    q_difference_residual: float
    volume_identity_residual: float  # (1-p^2) w+^2 = 2|rc|^2 gamma gammabar
    q1_volume_residual: float
    q2_volume_residual: float
    rho_coef: complex
    rho_coef_residual: float
    max_residual: float


def _effective_pair(
    beta1: ComplexForm, beta2: ComplexForm, bp: BihermitianPoint
) -> tuple[ComplexForm, ComplexForm, ComplexForm]:
    beta2_eff = beta2 if bp.definiteness == -1 else beta2.conjugate()
    gamma = (beta1 - beta2_eff).conjugate()
    return beta1, beta2_eff, gamma


def decomposition_check(
    beta1: ComplexForm, beta2: ComplexForm, bp: BihermitianPoint
) -> DecompositionReport:
    """Verify the b/omega/gamma decomposition identities of the pair.

    Checks, with gamma = conj(beta1) - conj(beta2_eff) and p from bp:
    beta1 = b + i omega_+ - (p-1) conj(gamma)/2, the same for beta2 with
    (p+1), the omega_- expansion, q1 - q2 = 1, the volume identity
    (1-p^2) omega_+^2 = 2 |rc|^2 gamma conj(gamma) with rc = i(p^2-1)/4,
    and the two quadratic identities that determine q1, q2.
    """
    beta1, beta2_eff, gamma = _effective_pair(beta1, beta2, bp)
    gbar = gamma.conjugate()
    p = bp.p
    omega_plus, omega_minus = bp.omega_plus, bp.omega_minus

    best = None
    for sign in (+1, -1):
        b_form = sign * bp.b_form()
        r1 = (beta1 - b_form - 1j * omega_plus + (p - 1) / 2 * gbar).norm()
        r2 = (beta2_eff - b_form - 1j * omega_plus + (p + 1) / 2 * gbar).norm()
        if best is None or r1 + r2 < best[1] + best[2]:
            best = (sign, r1, r2, b_form)
    sign, r1, r2, b_form = best

    r3 = (omega_minus - p * omega_plus - 1j * (p * p - 1) / 4 * gbar + 1j * (p * p - 1) / 4 * gamma).norm()

    gbar_sq = _form_inner(gbar, gbar)
    q1 = _form_inner(beta1 - b_form - 1j * omega_plus, gbar) / gbar_sq
    q2 = _form_inner(beta2_eff - b_form - 1j * omega_plus, gbar) / gbar_sq
    rq = abs(q1 - q2 - 1.0)

    rc = 1j * (p * p - 1) / 4
    top_w2 = wedge(omega_plus, omega_plus).top_coefficient()
    top_gg = wedge(gamma, gbar).top_coefficient()
    r_vol = abs((1 - p * p) * top_w2 - 2 * abs(rc) ** 2 * top_gg)
    r_q1 = abs(-((1 - p) ** 2) * top_w2 - 2j * (q1 - 1j * rc) * np.conj(rc) * top_gg)
    r_q2 = abs((1 + p) ** 2 * top_w2 - 2j * (q2 + 1j * rc) * np.conj(rc) * top_gg)

    # coefficient of gamma-bar in the (2,0)+(0,2) remainder of omega_-
    o02 = bp.omega_minus - _oneone_part(bp.omega_minus, bp.i_plus)
    rho_coef = _form_inner(o02, gbar) / gbar_sq
    r_rho = abs(rho_coef - rc)

    residuals = [r1, r2, r3, rq, r_vol, r_q1, r_q2, r_rho]
    return DecompositionReport(
        b_sign=sign,
        beta1_residual=r1,
        beta2_residual=r2,
        omega_minus_residual=r3,
        q1=q1,
        q2=q2,
        q_difference_residual=rq,
        volume_identity_residual=r_vol,
        q1_volume_residual=r_q1,
        q2_volume_residual=r_q2,
        rho_coef=rho_coef,
        rho_coef_residual=r_rho,
        max_residual=max(residuals),
    )


def angle_from_liouville(
    beta1: ComplexForm, beta2: ComplexForm, gamma: ComplexForm
) -> tuple[float, float]:
    """Two angle-function estimates from the Liouville volume identities.

    (beta1 - conj(beta1))^2 = (p - 1) gamma conj(gamma) and
    (beta2 - conj(beta2))^2 = -(p + 1) gamma conj(gamma); both squares are
    invariant under conjugating beta2, so the estimates do not depend on
    the definiteness normalization.
    """
    gg = wedge(gamma, gamma.conjugate()).top_coefficient()
    if abs(gg) < 1e-14:
        raise ValueError("gamma wedge conj(gamma) vanishes")
    d1 = beta1 - beta1.conjugate()
    d2 = beta2 - beta2.conjugate()
    p1 = 1 + wedge(d1, d1).top_coefficient() / gg
    p2 = -1 - wedge(d2, d2).top_coefficient() / gg
    return float(p1.real), float(p2.real)


@dataclass
class PoissonSigmaResult:
    sigma: np.ndarray
    frame: np.ndarray
    type_violation: float
    inverse_identity_residual: float | None


def poisson_sigma(bp: BihermitianPoint, type_tol: float = 1e-9) -> PoissonSigmaResult:
    """Holomorphic bivector sigma_+ from S = g([I+, I-] ., .).

    Verifies that S is of type (2,0)+(0,2) (raises TypeViolation above
    tolerance), extracts the (0,2) part in the orthonormal I+-holomorphic
    frame, applies the metric isomorphism, and, when gamma is available,
    reports the residual of sigma gamma = 2i id on the (1,0) frame.
    """
    frame = bp.frame_plus if bp.frame_plus is not None else holomorphic_gram_schmidt(bp.i_plus, bp.g)
    sigma, violation = _sigma_from_metric(bp.g, bp.i_plus, bp.i_minus, frame)
    if violation > type_tol:
        raise TypeViolation(f"(1,1) component of S has relative norm {violation:.3e}")
    residual = None
    if bp.gamma is not None:
        n = frame.shape[1]
        gam = np.array(
            [[eval_two_form(bp.gamma, frame[:, j], frame[:, k]) for k in range(n)] for j in range(n)]
        )
        residual = float(np.abs(sigma @ gam - 2j * np.eye(n)).max())
    return PoissonSigmaResult(sigma, frame, violation, residual)


@dataclass
class RealPoissonResult:
    bivector: np.ndarray
    kernel_dim: int


def real_poisson(j: GCStructure, rel_tol: float = 1e-9) -> RealPoissonResult:
    """Upper-right block of J (T* -> T), a real Poisson bivector."""
    block = j.upper_right()
    s = np.linalg.svd(block, compute_uv=False)
    scale = s[0] if s[0] > 0 else 1.0
    kernel = int(np.sum(s < rel_tol * scale))
    return RealPoissonResult(block, kernel)


# -- self-duality ---------------------------------------------------------


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        sign = 1
        lst = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if lst[i] > lst[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


_EPS4 = _levi_civita4()


def hodge_star_two_form(form: ComplexForm, g: np.ndarray, orientation: int = 1) -> ComplexForm:
    """Hodge star of a 2-form on R^4 for the metric g."""
    m = two_form_matrix(form)
    ginv = np.linalg.inv(g)
    up = ginv @ m @ ginv
    dens = orientation * np.sqrt(np.linalg.det(g))
    star = 0.5 * dens * np.einsum("abcd,cd->ab", _EPS4, up)
    return form_from_matrix(star)


@dataclass
class SelfdualReport:
    rank: int
    singular_values: np.ndarray
    b_asd_norm: float
    rank_deficient: bool
    b_selfdual: bool
    equivalent: bool


def selfdual_b_check(
    beta1: ComplexForm,
    beta2: ComplexForm,
    bp: BihermitianPoint,
    rank_tol: float = 1e-8,
    asd_tol: float = 1e-8,
) -> SelfdualReport:
    """Real-linear-dependence of {Re beta_i, Im beta_i} vs self-duality of b.

    The four real 2-forms beta_i + conj(beta_i), -i(beta_i - conj(beta_i))
    are linearly dependent over R exactly when b is self-dual for g (with
    the orientation in which omega_+^2 is positive); the report asserts
    the equivalence of the two computed facts.
    """
    if beta1.dim != 4:
        raise ValueError("self-duality test requires dimension 4")
    forms = [
        beta1 + beta1.conjugate(),
        beta2 + beta2.conjugate(),
        -1j * (beta1 - beta1.conjugate()),
        -1j * (beta2 - beta2.conjugate()),
    ]
    rows = np.array([f.to_vector().real for f in forms])
    rows = rows[:, [m for m in range(16) if bin(m).count("1") == 2]]
    s = np.linalg.svd(rows, compute_uv=False)
    scale = max(s[0], 1e-300)
    rank = int(np.sum(s > rank_tol * scale))

    top_w2 = wedge(bp.omega_plus, bp.omega_plus).top_coefficient()
    orientation = 1 if top_w2.real > 0 else -1
    b_form = bp.b_form()
    star_b = hodge_star_two_form(b_form, bp.g, orientation)
    b_asd = ((b_form - star_b) / 2).norm()
    b_scale = max(b_form.norm(), 1.0)

    rank_deficient = rank < 4
    b_selfdual = b_asd < asd_tol * b_scale
    return SelfdualReport(
        rank=rank,
        singular_values=s,
        b_asd_norm=b_asd,
        rank_deficient=rank_deficient,
        b_selfdual=b_selfdual,
        equivalent=(rank_deficient == b_selfdual),
    )


# -- synthetic data --------------------------------------------------------


def synthetic_point(
    rng: np.random.Generator,
    p: float | None = None,
    selfdual_b: bool | None = None,
) -> tuple[ComplexForm, ComplexForm, ComplexForm]:
    """Random valid decomposition data (beta1, beta2, b_form) on R^4.

    Built directly from the closed-form identities: a compatible (g, I+)
    pair near the standard one, omega_+ = g(., I+ .), a nondegenerate
    (2,0)-form gamma, an angle value p in (-1, 1), and b either a random
    self-dual combination or with an anti-self-dual part mixed in.
    """
    i_std = np.array([[0.0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
    omega = ComplexForm(4, {(0, 1): 1.0, (2, 3): 1.0})
    # gamma spanning the (2,0) line of the standard structure
    dz1dz2 = ComplexForm(
        4, {(0, 2): 1.0, (1, 3): -1.0, (0, 3): 1j, (1, 2): 1j}
    )  # (dx0+i dx1)(dx2+i dx3)
    c = (0.4 + 0.8 * rng.random()) * np.exp(2j * np.pi * rng.random())
    gamma = c * dz1dz2
    if p is None:
        p = float(rng.uniform(-0.9, 0.9))
    if selfdual_b is None:
        selfdual_b = bool(rng.random() < 0.5)
    coeffs = rng.normal(size=3) * 0.3
    b_form = (
        coeffs[0] * omega
        + coeffs[1] * (gamma + gamma.conjugate()) * 0.5
        + coeffs[2] * (1j * (gamma.conjugate() - gamma)) * 0.5
    )
    if not selfdual_b:
        asd = ComplexForm(4, {(0, 1): 1.0, (2, 3): -1.0})
        b_form = b_form + (0.2 + 0.3 * rng.random()) * asd
    gbar = gamma.conjugate()
    beta1 = b_form + 1j * omega - (p - 1) / 2 * gbar
    beta2 = b_form + 1j * omega - (p + 1) / 2 * gbar
    return beta1, beta2, b_form
