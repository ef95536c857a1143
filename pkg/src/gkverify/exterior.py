"""Complex-coefficient exterior algebra on R^d, 2 <= d <= 8.

Forms are stored sparsely as ``{index-subset bitmask: coefficient}``.  The
sign of any product is the parity of the merge permutation of the two index
words, computed branch-free from popcounts, so no precomputed sign tables
are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ComplexForm",
    "GeneralizedVector",
    "wedge",
    "interior",
    "clifford_act",
    "exp_two_form",
    "pairing",
    "two_form_matrix",
    "interior_matrix",
    "form_from_matrix",
]

DEFAULT_TOL = 1e-10

Indices = Sequence[int]


def _mask_of(indices: Indices, dim: int) -> int:
    mask = 0
    prev = -1
    for i in indices:
        if not 0 <= i < dim:
            raise ValueError(f"index {i} out of range for dimension {dim}")
        if i <= prev:
            raise ValueError("index tuples must be strictly increasing")
        prev = i
        mask |= 1 << i
    return mask


def _indices_of(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _merge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation of index words a and b (disjoint)."""
    sign = 1
    while b:
        low = b & -b
        if (a >> low.bit_length()).bit_count() & 1:
            sign = -sign
        b ^= low
    return sign


class ComplexForm:
    """A mixed-degree exterior form with complex coefficients.

    Keys of ``coeffs`` may be given as strictly increasing index tuples or
    directly as bitmasks; they are stored as bitmasks.  Missing keys are
    zero.  Equality is coefficient-wise within a tolerance (exact for exact
    inputs since no arithmetic is performed by the comparison).
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: Mapping | None = None):
        if not 2 <= dim <= 8:
            raise ValueError("dimension must be between 2 and 8")
        self.dim = dim
        self.coeffs: dict[int, complex] = {}
        if coeffs:
            for key, val in coeffs.items():
                mask = key if isinstance(key, int) else _mask_of(key, dim)
                if mask >= 1 << dim:
                    raise ValueError("basis index exceeds dimension")
                c = complex(val)
                if c != 0:
                    self.coeffs[mask] = self.coeffs.get(mask, 0.0) + c

    # -- constructors -------------------------------------------------

    @classmethod
    def unit(cls, dim: int) -> "ComplexForm":
        return cls(dim, {0: 1.0})

    @classmethod
    def basis(cls, dim: int, indices: Indices, coeff: complex = 1.0) -> "ComplexForm":
        return cls(dim, {tuple(indices): coeff})

    @classmethod
    def from_vector(cls, dim: int, vec: np.ndarray) -> "ComplexForm":
        f = cls(dim)
        for mask, c in enumerate(np.asarray(vec).ravel()):
            if c != 0:
                f.coeffs[mask] = complex(c)
        return f

    # -- accessors -----------------------------------------------------

    def coefficient(self, indices: Indices | int) -> complex:
        mask = indices if isinstance(indices, int) else _mask_of(indices, self.dim)
        return self.coeffs.get(mask, 0.0)

    def degree_part(self, k: int) -> "ComplexForm":
        return ComplexForm(
            self.dim, {m: c for m, c in self.coeffs.items() if m.bit_count() == k}
        )

    @property
    def scalar_part(self) -> complex:
        return self.coeffs.get(0, 0.0)

    def top_coefficient(self) -> complex:
        """Coefficient of dx_0 ^ ... ^ dx_{d-1}."""
        return self.coeffs.get((1 << self.dim) - 1, 0.0)

    def degrees(self) -> set[int]:
        return {m.bit_count() for m in self.coeffs}

    def is_homogeneous(self, k: int) -> bool:
        return all(m.bit_count() == k for m in self.coeffs)

    def terms(self) -> Iterable[tuple[tuple[int, ...], complex]]:
        for mask in sorted(self.coeffs):
            yield _indices_of(mask), self.coeffs[mask]

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(1 << self.dim, dtype=complex)
        for mask, c in self.coeffs.items():
            vec[mask] = c
        return vec

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    # -- algebra -------------------------------------------------------

    def conjugate(self) -> "ComplexForm":
        return ComplexForm(self.dim, {m: c.conjugate() for m, c in self.coeffs.items()})

    def __add__(self, other: "ComplexForm") -> "ComplexForm":
        self._check_dim(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return ComplexForm(self.dim, out)

    def __sub__(self, other: "ComplexForm") -> "ComplexForm":
        return self + (-1.0) * other

    def __neg__(self) -> "ComplexForm":
        return (-1.0) * self

    def __mul__(self, scalar: complex) -> "ComplexForm":
        return ComplexForm(self.dim, {m: c * scalar for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "ComplexForm":
        return self * (1.0 / scalar)

    def equals(self, other: "ComplexForm", tol: float = DEFAULT_TOL) -> bool:
        if self.dim != other.dim:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(
            abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0)) <= tol for k in keys
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexForm):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # mutable dict payload; equality is tolerance based

    def _check_dim(self, other: "ComplexForm") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __repr__(self) -> str:
        terms = ", ".join(f"{idx}: {c:.4g}" for idx, c in self.terms())
        return f"ComplexForm(dim={self.dim}, {{{terms}}})"


@dataclass(frozen=True)
class GeneralizedVector:
    """An element X + xi of (T + T*) x C at a point: vec is X, cov is xi."""

    dim: int
    vec: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=complex).reshape(-1)
        cov = np.asarray(self.cov, dtype=complex).reshape(-1)
        if len(vec) != self.dim or len(cov) != self.dim:
            raise ValueError("vec and cov must have length dim")
        object.__setattr__(self, "vec", vec)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_stacked(cls, dim: int, stacked: np.ndarray) -> "GeneralizedVector":
        stacked = np.asarray(stacked, dtype=complex).reshape(-1)
        return cls(dim, stacked[:dim], stacked[dim:])

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.vec, self.cov])

    def conjugate(self) -> "GeneralizedVector":
        return GeneralizedVector(self.dim, self.vec.conjugate(), self.cov.conjugate())

    def norm(self) -> float:
        return float(np.linalg.norm(self.stacked()))


# -- operations ---------------------------------------------------------


def wedge(a: ComplexForm, b: ComplexForm) -> ComplexForm:
    """Graded-commutative exterior product."""
    a._check_dim(b)
    out: dict[int, complex] = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, 0.0) + _merge_sign(ma, mb) * ca * cb
    return ComplexForm(a.dim, out)


def interior(vector: np.ndarray, a: ComplexForm) -> ComplexForm:
    """Contraction i_X a; an antiderivation lowering degree by one."""
    vec = np.asarray(vector, dtype=complex).reshape(-1)
    if len(vec) != a.dim:
        raise ValueError(f"dimension mismatch: {len(vec)} vs {a.dim}")
    out: dict[int, complex] = {}
    for mask, c in a.coeffs.items():
        sign = 1
        rest = mask
        while rest:
            low = rest & -rest
            j = low.bit_length() - 1
            x = vec[j]
            if x != 0:
                m = mask ^ low
                out[m] = out.get(m, 0.0) + sign * x * c
            sign = -sign
            rest ^= low
    return ComplexForm(a.dim, out)


def clifford_act(a: GeneralizedVector, rho: ComplexForm) -> ComplexForm:
    """Clifford action (X + xi) . rho = i_X rho + xi ^ rho.

    Squares to the quadratic form i_X xi (MINUS the neutral pairing of
    ``pairing``, whose sign convention puts (e0+dx0, e0+dx0) = -1).
    """
    if a.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {rho.dim}")
    xi = ComplexForm(a.dim, {1 << j: a.cov[j] for j in range(a.dim) if a.cov[j] != 0})
    return interior(a.vec, rho) + wedge(xi, rho)


def exp_two_form(beta: ComplexForm) -> ComplexForm:
    """Nilpotent exponential 1 + beta + beta^2/2! + ... of a 2-form."""
    if not beta.is_homogeneous(2):
        raise ValueError("exp_two_form requires a homogeneous degree-2 form")
    out = ComplexForm.unit(beta.dim)
    term = ComplexForm.unit(beta.dim)
    for k in range(1, beta.dim // 2 + 1):
        term = wedge(term, beta) / k
        if not term.coeffs:
            break
        out = out + term
    return out


def pairing(a: GeneralizedVector, b: GeneralizedVector) -> complex:
    """Symmetric bilinear pairing with (X+xi, X+xi) = -i_X xi.

    Polarization forces (A, B) = -(i_X eta + i_Y xi)/2.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return -0.5 * (np.dot(a.vec, b.cov) + np.dot(b.vec, a.cov))


# -- two-form / matrix conversions ---------------------------------------


def two_form_matrix(beta: ComplexForm) -> np.ndarray:
    """Antisymmetric matrix M with M[i, j] = beta(e_i, e_j)."""
    if not beta.is_homogeneous(2):
        raise ValueError("expected a homogeneous degree-2 form")
    d = beta.dim
    m = np.zeros((d, d), dtype=complex)
    for mask, c in beta.coeffs.items():
        i, j = _indices_of(mask)
        m[i, j] = c
        m[j, i] = -c
    return m


def interior_matrix(beta: ComplexForm) -> np.ndarray:
    """Matrix of the map X -> i_X beta (covector as a column)."""
    return two_form_matrix(beta).T


def form_from_matrix(m: np.ndarray, dim: int | None = None) -> ComplexForm:
    """Inverse of ``two_form_matrix``: antisymmetric matrix to a 2-form."""
    m = np.asarray(m)
    d = dim or m.shape[0]
    coeffs = {}
    for i in range(d):
        for j in range(i + 1, d):
            if m[i, j] != 0:
                coeffs[(1 << i) | (1 << j)] = complex(m[i, j])
    return ComplexForm(d, coeffs)


def eval_two_form(beta: ComplexForm, x: np.ndarray, y: np.ndarray) -> complex:
    """beta(X, Y) for (complex) vectors X, Y."""
    m = two_form_matrix(beta)
    return complex(np.asarray(x).reshape(-1) @ m @ np.asarray(y).reshape(-1))
