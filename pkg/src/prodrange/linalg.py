"""Dense complex linear algebra on tensor-product spaces.

Matrices carry their factor dimensions so that Kronecker products, partial
traces and reshuffling know the product structure.  The Hermitian
eigensolver is a cyclic complex Jacobi iteration; singular value
decompositions are derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    BadFactorIndex,
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotUnitary,
)

HERMITIAN_RTOL = 1e-10
UNITARY_TOL = 1e-10
PHASE_EPS = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_RTOL = 1e-13


@dataclass(frozen=True)
class ComplexMatrix:
    """Square complex matrix acting on ``C^{m_1} x ... x C^{m_k}``."""

    dims: tuple[int, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionMismatch(f"factor dimensions must be >= 1, got {dims}")
        n = int(np.prod(dims))
        data = np.array(self.data, dtype=complex)
        if data.shape != (n, n):
            raise DimensionMismatch(
                f"dims {dims} need a {n}x{n} matrix, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        """Spectral norm."""
        if self.n == 0:
            return 0.0
        return float(np.linalg.norm(self.data, 2))

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def adjoint(self) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, self.data.conj().T)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        a = self.data
        return np.linalg.norm(a - a.conj().T) <= rtol * max(np.linalg.norm(a), 1e-300)

    def hermitian_part(self) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, (self.data + self.data.conj().T) / 2)

    def skew_part(self) -> "ComplexMatrix":
        return ComplexMatrix(self.dims, (self.data - self.data.conj().T) / 2)

    def rotate(self, theta: float) -> "ComplexMatrix":
        """Hermitian part of ``exp(-i theta) X``."""
        a = np.exp(-1j * theta) * self.data
        return ComplexMatrix(self.dims, (a + a.conj().T) / 2)

    def __add__(self, other):
        if isinstance(other, ComplexMatrix):
            _same_dims(self, other)
            return ComplexMatrix(self.dims, self.data + other.data)
        return ComplexMatrix(self.dims, self.data + complex(other) * np.eye(self.n))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ComplexMatrix):
            _same_dims(self, other)
            return ComplexMatrix(self.dims, self.data - other.data)
        return ComplexMatrix(self.dims, self.data - complex(other) * np.eye(self.n))

    def __mul__(self, scalar):
        return ComplexMatrix(self.dims, complex(scalar) * self.data)

    __rmul__ = __mul__

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        _same_dims(self, other)
        return ComplexMatrix(self.dims, self.data @ other.data)

    def tensor(self) -> np.ndarray:
        """View as a tensor with axes (bra_1..bra_k, ket_1..ket_k)."""
        return self.data.reshape(self.dims + self.dims)


def as_matrix(x, dims: Sequence[int] | None = None) -> ComplexMatrix:
    if isinstance(x, ComplexMatrix):
        if dims is not None and tuple(dims) != x.dims:
            return ComplexMatrix(tuple(dims), x.data)
        return x
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    return ComplexMatrix(tuple(dims) if dims is not None else (a.shape[0],), a)


def diag(values, dims: Sequence[int] | None = None) -> ComplexMatrix:
    v = np.asarray(values, dtype=complex)
    return as_matrix(np.diag(v), dims if dims is not None else (len(v),))


def identity(dims: Sequence[int]) -> ComplexMatrix:
    dims = tuple(dims)
    return ComplexMatrix(dims, np.eye(int(np.prod(dims))))


def _same_dims(a: ComplexMatrix, b: ComplexMatrix):
    if a.dims != b.dims:
        raise DimensionMismatch(f"factor dimensions differ: {a.dims} vs {b.dims}")


# --------------------------------------------------------------------------
# Eigen / singular value decompositions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray     # ascending, real
    eigenvectors: np.ndarray    # orthonormal columns

    def residual(self, x: ComplexMatrix | np.ndarray) -> float:
        a = x.data if isinstance(x, ComplexMatrix) else np.asarray(x)
        v = self.eigenvectors
        return float(np.max(np.linalg.norm(a @ v - v * self.eigenvalues, axis=0), initial=0.0))


def fix_phase(v: np.ndarray, eps: float = PHASE_EPS) -> np.ndarray:
    """Scale ``v`` so that its first entry with modulus > eps is real positive."""
    flat = np.ravel(v)
    idx = np.flatnonzero(np.abs(flat) > eps)
    if idx.size == 0:
        return np.array(v, dtype=complex)
    z = flat[idx[0]]
    return np.asarray(v, dtype=complex) * (abs(z) / z)


def _jacobi_sweeps(a: np.ndarray):
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v
    thresh = JACOBI_RTOL * scale
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= thresh:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300 or r < 1e-18 * thresh:
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                pc = phase.conjugate()
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] acting on (p, q)
                u00, u01, u10, u11 = c, s, -s * pc, c * pc
                cp = a[:, p].copy()
                cq = a[:, q]
                a[:, p] = cp * u00 + cq * u10
                a[:, q] = cp * u01 + cq * u11
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = rp * np.conj(u00) + rq * np.conj(u10)
                a[q, :] = rp * np.conj(u01) + rq * np.conj(u11)
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = vp * u00 + vq * u10
                v[:, q] = vp * u01 + vq * u11
    raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def eig_hermitian(x: ComplexMatrix | np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues are ascending.  Each eigenvector has its first non-negligible
    component real positive; within a numerically degenerate eigenvalue the
    vectors are ordered lexicographically (descending), which makes the
    output deterministic.
    """
    a = x.data if isinstance(x, ComplexMatrix) else np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got shape {a.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_RTOL * max(scale, 1e-300):
        raise NotHermitian("matrix is not Hermitian within relative tolerance 1e-10")
    work = (a + a.conj().T) / 2
    w, v = _jacobi_sweeps(np.array(work, dtype=complex))
    v = np.column_stack([fix_phase(v[:, i]) for i in range(v.shape[1])]) if v.size else v
    tie = 1e-10 * max(scale, 1.0)

    def lex(i):
        col = v[:, i]
        return tuple(x for z in col for x in (round(z.real, 12), round(z.imag, 12)))

    order = list(np.argsort(w, kind="stable"))
    out = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and w[order[j]] - w[order[i]] <= tie:
            j += 1
        group = sorted(order[i:j], key=lex, reverse=True)
        out.extend(group)
        i = j
    out = np.array(out, dtype=int)
    return EigenDecomposition(w[out], v[:, out])


def _gram_schmidt_complete(u: np.ndarray, keep: int) -> np.ndarray:
    """Re-orthonormalise the first ``keep`` columns of ``u`` and fill the rest."""
    p, r = u.shape
    basis = []
    for i in range(keep):
        x = u[:, i].astype(complex)
        for _ in range(2):
            for b in basis:
                x = x - b * np.vdot(b, x)
        nrm = np.linalg.norm(x)
        basis.append(x / nrm)
    e = 0
    while len(basis) < r:
        x = np.zeros(p, dtype=complex)
        x[e] = 1.0
        e += 1
        for _ in range(2):
            for b in basis:
                x = x - b * np.vdot(b, x)
        nrm = np.linalg.norm(x)
        if nrm > 1e-8:
            basis.append(x / nrm)
    return np.column_stack(basis) if basis else np.zeros((p, 0), dtype=complex)


def svd(m: np.ndarray):
    """Thin SVD ``m = U diag(s) V^dagger`` built on the Jacobi eigensolver.

    Right vectors come from the eigendecomposition of ``m^dagger m``; left
    vectors are ``m v / s`` re-orthonormalised, with null directions
    completed by Gram-Schmidt.  Returns ``(U, s, V)`` with ``s`` descending
    and ``min(p, q)`` columns.
    """
    m = np.asarray(m, dtype=complex)
    p, q = m.shape
    if q > p:
        u, s, v = svd(m.conj().T)
        return v, s, u
    ed = eig_hermitian(m.conj().T @ m)
    v = ed.eigenvectors[:, ::-1]
    mv = m @ v
    s = np.linalg.norm(mv, axis=0)
    order = np.argsort(-s, kind="stable")
    s, v, mv = s[order], v[:, order], mv[:, order]
    r = min(p, q)
    s, v, mv = s[:r], v[:, :r], mv[:, :r]
    cutoff = 1e-13 * max(s[0] if r else 0.0, 1e-300)
    keep = int(np.sum(s > cutoff))
    u = np.zeros((p, r), dtype=complex)
    u[:, :keep] = mv[:, :keep] / s[:keep]
    u = _gram_schmidt_complete(u, keep)
    s = s.copy()
    s[keep:] = 0.0
    return u, s, v


# --------------------------------------------------------------------------
# Tensor structure
# --------------------------------------------------------------------------


def kron(a: ComplexMatrix, b: ComplexMatrix, *more: ComplexMatrix) -> ComplexMatrix:
    mats = [as_matrix(a), as_matrix(b)] + [as_matrix(m) for m in more]
    data = reduce(np.kron, [m.data for m in mats])
    dims = tuple(d for m in mats for d in m.dims)
    return ComplexMatrix(dims, data)


def kron_sum(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """``A x 1 + 1 x B``."""
    a, b = as_matrix(a), as_matrix(b)
    data = np.kron(a.data, np.eye(b.n)) + np.kron(np.eye(a.n), b.data)
    return ComplexMatrix(a.dims + b.dims, data)


def partial_trace(x: ComplexMatrix, which: int | Sequence[int]) -> ComplexMatrix:
    """Trace out factor ``which`` (0-based) or a collection of factors."""
    x = as_matrix(x)
    k = x.nfactors
    which = [which] if np.isscalar(which) else list(which)
    if k < 2:
        raise BadFactorIndex("partial trace needs at least two factors")
    if not which or any(not 0 <= w < k for w in which) or len(set(which)) != len(which):
        raise BadFactorIndex(f"bad factor index {which} for {k} factors")
    if len(which) == k:
        raise BadFactorIndex("cannot trace out every factor")
    t = x.tensor()
    # trace highest axes first so remaining axis numbers stay valid
    cur_k = k
    for w in sorted(which, reverse=True):
        t = np.trace(t, axis1=w, axis2=w + cur_k)
        cur_k -= 1
    dims = tuple(d for i, d in enumerate(x.dims) if i not in which)
    n = int(np.prod(dims))
    return ComplexMatrix(dims, t.reshape(n, n))


def reshuffle(x: ComplexMatrix):
    """Realignment ``<i,j|X^R|i',j'> = <i,i'|X|j,j'>`` of a bipartite operator.

    For dims (K, K) the result is again a ``ComplexMatrix`` with dims (K, K)
    and the map is an involution.  For dims (K, M) with K != M the result is
    the rectangular K^2 x M^2 array.
    """
    x = as_matrix(x)
    if x.nfactors != 2:
        raise DimensionMismatch(f"reshuffle needs a bipartite operator, got dims {x.dims}")
    k, m = x.dims
    t = x.data.reshape(k, m, k, m)            # (i, a, j, b)
    y = t.transpose(0, 2, 1, 3).reshape(k * k, m * m)
    if k == m:
        return ComplexMatrix((k, k), y)
    return y


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``X = sum_i sqrt(mu_i) L_i x R_i`` with orthonormal factor families."""

    coefficients: np.ndarray        # mu_i, descending
    left: tuple[np.ndarray, ...]
    right: tuple[np.ndarray, ...]
    kind: str                       # "operator" or "state"

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        if not self.rank:
            return np.zeros(0)
        terms = [np.sqrt(mu) * np.kron(a, b)
                 for mu, a, b in zip(self.coefficients, self.left, self.right)]
        return np.sum(terms, axis=0)


def operator_schmidt(x: ComplexMatrix, drop_rtol: float = 1e-13) -> SchmidtDecomposition:
    """Operator Schmidt decomposition through the SVD of the realigned matrix.

    Terms with ``sqrt(mu) <= drop_rtol * ||X||_HS`` are dropped.  Rectangular
    (K != M) operators use the K^2 x M^2 realignment.
    """
    x = as_matrix(x)
    if x.nfactors != 2:
        raise DimensionMismatch(f"operator Schmidt needs dims (K, M), got {x.dims}")
    k, m = x.dims
    y = reshuffle(x)
    y = y.data if isinstance(y, ComplexMatrix) else y
    u, s, v = svd(y)
    hs = np.linalg.norm(x.data)
    left, right, mus = [], [], []
    for i, sv in enumerate(s):
        if sv <= drop_rtol * max(hs, 1e-300):
            continue
        a = u[:, i].reshape(k, k)
        b = v[:, i].conj().reshape(m, m)
        ph = fix_phase(a)
        factor = ph.ravel()[np.flatnonzero(np.abs(a.ravel()) > PHASE_EPS)[0]] / \
            a.ravel()[np.flatnonzero(np.abs(a.ravel()) > PHASE_EPS)[0]]
        left.append(ph)
        right.append(b / factor)
        mus.append(sv * sv)
    return SchmidtDecomposition(np.array(mus), tuple(left), tuple(right), "operator")


def pure_schmidt(psi, dims: Sequence[int], tol: float = 1e-10) -> SchmidtDecomposition:
    """Schmidt decomposition of a bipartite unit vector.

    Coefficients are the eigenvalues of ``A A^dagger`` for the K x M
    coefficient matrix A; zero coefficients are kept so that ``rank`` equals
    ``min(K, M)``.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if len(dims) != 2:
        raise DimensionMismatch(f"bipartite dims required, got {dims}")
    k, m = (int(d) for d in dims)
    if k * m != psi.size:
        raise DimensionMismatch(f"vector of length {psi.size} does not fit dims {dims}")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise DimensionMismatch("state must have unit norm")
    a = psi.reshape(k, m)
    ed = eig_hermitian(a @ a.conj().T)
    mu = np.clip(ed.eigenvalues[::-1], 0.0, None)
    us = ed.eigenvectors[:, ::-1]
    r = min(k, m)
    left, right = [], []
    for i in range(r):
        ui = us[:, i]
        w = a.T @ ui.conj()
        nrm = np.linalg.norm(w)
        left.append(ui)
        right.append(w / nrm if nrm > 1e-14 else w)
    # zero-coefficient right vectors are completed to an orthonormal family
    keep = int(np.sum(mu[:r] > 1e-28))
    rmat = _gram_schmidt_complete(np.column_stack(right), keep)
    right = [rmat[:, i] for i in range(r)]
    return SchmidtDecomposition(mu[:r], tuple(left), tuple(right), "state")


def schmidt_gap(psi, dims: Sequence[int]) -> float:
    """``1 - mu_1``: zero exactly for product vectors (after normalisation)."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    s = np.linalg.svd(psi.reshape(dims[0], dims[1]), compute_uv=False)
    return float(max(1.0 - s[0] ** 2, 0.0))


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotUnitary(f"square matrix required, got shape {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > tol:
        raise NotUnitary("matrix is not unitary within tolerance")
    return u


def local_unitary(us: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [check_unitary(u) for u in us])


def apply_local_unitary(x: ComplexMatrix, us: Sequence[np.ndarray]) -> ComplexMatrix:
    """``(U_1 x ... x U_k) X (U_1 x ... x U_k)^dagger``."""
    x = as_matrix(x)
    if len(us) != x.nfactors or any(np.shape(u)[0] != d for u, d in zip(us, x.dims)):
        raise DimensionMismatch(
            f"local unitaries {[np.shape(u) for u in us]} do not match dims {x.dims}")
    big = local_unitary(us)
    return ComplexMatrix(x.dims, big @ x.data @ big.conj().T)


@dataclass(frozen=True)
class ProductStateTuple:
    """A product vector ``psi_1 x ... x psi_k`` stored factor by factor."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        fs = tuple(np.array(f, dtype=complex).ravel() for f in self.factors)
        for f in fs:
            f.setflags(write=False)
        object.__setattr__(self, "factors", fs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return all(abs(np.linalg.norm(f) - 1.0) <= tol for f in self.factors)

    def vector(self) -> np.ndarray:
        return reduce(np.kron, self.factors)

    def value(self, x: ComplexMatrix | np.ndarray) -> complex:
        a = x.data if isinstance(x, ComplexMatrix) else np.asarray(x)
        v = self.vector()
        return complex(np.vdot(v, a @ v))

    @classmethod
    def basis(cls, dims: Sequence[int], indices: Sequence[int] | None = None):
        indices = indices or [0] * len(dims)
        fs = []
        for d, i in zip(dims, indices):
            e = np.zeros(d, dtype=complex)
            e[i] = 1.0
            fs.append(e)
        return cls(tuple(fs))
