"""Spectral-index bounds for Hermitian bipartite operators.

Any subspace of C^K x C^M of dimension d = (K-1)(M-1)+1 contains a product
vector.  Applied to the top and bottom d eigenvectors of X this gives

    lambda_max over product states >= lambda_{K+M-1},
    lambda_min over product states <= lambda_{(K-1)(M-1)+1},

with 1-based ascending eigenvalue indices.  The (K-1)(M-1)-dimensional
subspace spanned by E_ij + E_{i+1,j+1} contains no product vector, which
shows the index bounds cannot be improved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotFound
from .linalg import ComplexMatrix, ProductStateTuple, as_matrix, eig_hermitian
from .rng import haar_vectors, stream

SPAN_TOL = 1e-8
DEFAULT_SPAN_RESTARTS = 64


def _second_schmidt(vec: np.ndarray, dims) -> float:
    v = vec / np.linalg.norm(vec)
    s = np.linalg.svd(v.reshape(dims[0], dims[1]), compute_uv=False)
    return float(s[1] ** 2) if s.size > 1 else 0.0


@dataclass(frozen=True)
class SpanSearch:
    """Outcome of a product-vector search in a subspace."""

    state: ProductStateTuple
    residual: float         # distance of the product vector from the span
    mu2: float              # second Schmidt coefficient of its projection
    restarts_used: int


def find_product_state_in_span(vectors, dims, max_iters: int = 500,
                               restarts: int = DEFAULT_SPAN_RESTARTS, seed: int = 0,
                               tol: float = SPAN_TOL) -> SpanSearch:
    """Search for a product vector ``a x b`` inside ``span(vectors)``.

    ``vectors`` holds an orthonormal family as columns.  Batched alternation
    (project ``a x b`` onto the span, take the best rank-one approximation of
    the projection) is followed by a Gauss-Newton polish of ``a`` and ``b``.
    Raises ``NotFound`` when no restart gets within ``tol``; this certifies
    only failure of the search.
    """
    k, m = (int(d) for d in dims)
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    n, d = v.shape
    if n != k * m:
        raise DimensionMismatch(f"vectors of length {n} do not fit dims {dims}")
    if np.linalg.norm(v.conj().T @ v - np.eye(d)) > 1e-8:
        raise DimensionMismatch("span vectors must be orthonormal")
    if d == n:
        st = ProductStateTuple.basis((k, m))
        return SpanSearch(st, 0.0, 0.0, 0)
    q = np.linalg.qr(v, mode="complete")[0][:, d:]     # orthonormal complement
    proj = v @ v.conj().T
    rng = stream(seed, 0x5EA)
    a = haar_vectors(rng, restarts, k)
    b = haar_vectors(rng, restarts, m)
    for _ in range(max_iters):
        x = (a[:, :, None] * b[:, None, :]).reshape(restarts, n)
        y = (x @ proj.T).reshape(restarts, k, m)
        u, s, vh = np.linalg.svd(y)
        a_new, b_new = u[:, :, 0], vh[:, 0, :]
        done = np.max(np.abs(np.abs(np.einsum("ri,ri->r", a.conj(), a_new)) - 1)) < 1e-14
        a, b = a_new, b_new
        # s[:, 0] is the overlap of the projected vector with its rank-one part
        if done or 1.0 - np.max(s[:, 0]) ** 2 < 1e-10:
            break
    x = (a[:, :, None] * b[:, None, :]).reshape(restarts, n)
    res = np.linalg.norm(x @ q.conj(), axis=1)
    best = None
    for r in np.argsort(res, kind="stable")[: min(restarts, 8)]:
        ar, br, rr = _polish(q, a[r], b[r])
        if best is None or rr < best[2]:
            best = (ar, br, rr, int(r))
        if rr <= tol:
            break
    ar, br, rr, used = best
    vec = np.kron(ar, br)
    mu2 = _second_schmidt(proj @ vec, (k, m)) if np.linalg.norm(proj @ vec) > 1e-12 else 1.0
    if rr > tol:
        raise NotFound(f"no product vector found within {tol} of the span "
                       f"(best distance {rr:.3e})", best_residual=float(rr))
    return SpanSearch(ProductStateTuple((ar, br)), float(rr), mu2, used + 1)


def _polish(q: np.ndarray, a: np.ndarray, b: np.ndarray, iters: int = 50):
    """Gauss-Newton on ``Q^dagger (a x b) = 0`` with renormalisation."""
    k, m = a.size, b.size
    qh = q.conj().T
    res = np.linalg.norm(qh @ np.kron(a, b))
    for _ in range(iters):
        r = qh @ np.kron(a, b)
        ja = qh @ np.kron(np.eye(k), b[:, None])
        jb = qh @ np.kron(a[:, None], np.eye(m))
        step = np.linalg.lstsq(np.hstack([ja, jb]), -r, rcond=None)[0]
        a2 = a + step[:k]
        b2 = b + step[k:]
        a2 /= np.linalg.norm(a2)
        b2 /= np.linalg.norm(b2)
        res2 = np.linalg.norm(qh @ np.kron(a2, b2))
        if res2 >= res:
            break
        a, b, res = a2, b2, res2
        if res < 1e-15:
            break
    return a, b, float(res)


@dataclass(frozen=True)
class EntangledSubspace:
    dims: tuple[int, int]
    basis: np.ndarray           # (KM, (K-1)(M-1)), orthonormal columns
    raw: np.ndarray             # unnormalised vectorised E_ij + E_{i+1,j+1}

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def entangled_subspace(k: int, m: int) -> EntangledSubspace:
    """Span of vec(E_ij + E_{i+1,j+1}), i < K, j < M, with vec(A) = sum A_kl |k, l>."""
    if k < 2 or m < 2:
        raise DimensionMismatch("entangled subspace needs K, M >= 2")
    cols = []
    for i in range(k - 1):
        for j in range(m - 1):
            a = np.zeros((k, m))
            a[i, j] = 1.0
            a[i + 1, j + 1] = 1.0
            cols.append(a.reshape(-1))
    raw = np.column_stack(cols).astype(complex)
    q, r = np.linalg.qr(raw)
    # fix signs so the first nonzero entry of each vector is positive
    sgn = np.sign(np.diag(r).real)
    sgn[sgn == 0] = 1
    q = q * sgn
    return EntangledSubspace((k, m), q, raw)


@dataclass(frozen=True)
class SpectralBoundReport:
    dims: tuple[int, int]
    eigenvalues: np.ndarray
    max_index: int              # 1-based index K+M-1
    min_index: int              # 1-based index (K-1)(M-1)+1
    max_bound: float            # product maximum is at least this
    min_bound: float            # product minimum is at most this
    max_witness: ProductStateTuple | None
    min_witness: ProductStateTuple | None
    diagnostics: dict = field(default_factory=dict)

    def witness_values(self, x) -> tuple[float | None, float | None]:
        a = as_matrix(x).data
        hi = self.max_witness.value(a).real if self.max_witness else None
        lo = self.min_witness.value(a).real if self.min_witness else None
        return lo, hi

    def to_json(self) -> dict:
        def enc(st):
            if st is None:
                return None
            return [[[float(z.real), float(z.imag)] for z in f] for f in st.factors]
        return {
            "dims": list(self.dims),
            "spectrum": [float(e) for e in self.eigenvalues],
            "max_index": self.max_index,
            "min_index": self.min_index,
            "max_bound": self.max_bound,
            "min_bound": self.min_bound,
            "max_witness": enc(self.max_witness),
            "min_witness": enc(self.min_witness),
            "diagnostics": self.diagnostics,
        }


def bound_report(x, seed: int = 0, restarts: int = DEFAULT_SPAN_RESTARTS) -> SpectralBoundReport:
    """Index bounds and product-state witnesses for a Hermitian bipartite X."""
    xm = as_matrix(x)
    if xm.nfactors != 2:
        raise DimensionMismatch(f"bipartite operator required, got dims {xm.dims}")
    k, m = xm.dims
    ed = eig_hermitian(xm)
    w, v = ed.eigenvalues, ed.eigenvectors
    d = (k - 1) * (m - 1) + 1
    hi_idx, lo_idx = k + m - 1, d
    diag = {"subspace_dim": d}
    top = v[:, hi_idx - 1:]
    bottom = v[:, :d]
    witnesses = []
    for name, span in (("max", top), ("min", bottom)):
        try:
            found = find_product_state_in_span(span, (k, m), restarts=restarts, seed=seed)
            witnesses.append(found.state)
            diag[f"{name}_residual"] = found.residual
            diag[f"{name}_mu2"] = found.mu2
        except NotFound as exc:
            witnesses.append(None)
            diag[f"{name}_residual"] = exc.best_residual
            diag[f"{name}_search_failed"] = True
    return SpectralBoundReport((k, m), w, hi_idx, lo_idx, float(w[hi_idx - 1]),
                               float(w[lo_idx - 1]), witnesses[0], witnesses[1], diag)


def optimality_witness_operator(k: int, m: int) -> ComplexMatrix:
    """``1 - P`` with P the projector onto the completely entangled subspace.

    Its spectrum has (K-1)(M-1) zeros, yet every product state has a strictly
    positive expectation value.
    """
    sub = entangled_subspace(k, m)
    p = sub.basis @ sub.basis.conj().T
    data = np.eye(k * m) - p
    return ComplexMatrix((k, m), (data + data.conj().T) / 2)
