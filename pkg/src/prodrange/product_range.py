"""Product numerical range over product vectors psi_1 x ... x psi_k.

Routes:

* ``pnr_sample``: Haar-random product states.
* ``pnr_parametrized``: locally diagonalisable operators, where the range is
  the image of products of probability simplices.
* ``pnr_tensor_product``: ``A x B`` via the Minkowski product W(A) W(B).
* ``pnr_hermitian_extrema``: alternating (see-saw) optimisation.
* ``barycenter_witness``: a product state attaining tr X / N.
* ``schmidt_outer_bound``: a guaranteed raster superset from the operator
  Schmidt decomposition.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from itertools import combinations
from typing import Sequence

import numpy as np

from . import bounds as _bounds
from .errors import AttainFailure, DimensionMismatch, NotFound, NotHermitian, NotProductDiagonal
from .linalg import (
    ComplexMatrix,
    ProductStateTuple,
    as_matrix,
    local_unitary,
    operator_schmidt,
    partial_trace,
)
from .minkowski import (
    _sum_masks,
    minkowski_product,
    product_mask,
)
from .numrange import attain_value, numerical_radius_upper, numerical_range_boundary
from .regions import Frame, PointCloud, RasterMask
from .rng import haar_product_states, stream

CHUNK = 4096
SEESAW_RTOL = 1e-12
SEESAW_MAX_SWEEPS = 500
DEFAULT_RESTARTS = 32
DIAGONAL_RTOL = 1e-10


def default_threads() -> int:
    env = os.environ.get("PRODRANGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# Report types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HermitianExtrema:
    minimum: float
    maximum: float
    min_witness: ProductStateTuple
    max_witness: ProductStateTuple
    min_history: np.ndarray = field(repr=False, default=None)
    max_history: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class RadiusBounds:
    lower: float
    upper: float
    witness: ProductStateTuple | None

    @property
    def value(self) -> float:
        return self.lower


@dataclass(frozen=True)
class PnrReport:
    """Artifacts of one product-numerical-range computation."""

    method: str
    dims: tuple[int, ...]
    points: np.ndarray = field(repr=False)
    states: tuple | None = field(repr=False, default=None)
    hermitian_interval: HermitianExtrema | None = None
    radius: RadiusBounds | None = None
    barycenter: tuple[complex, ProductStateTuple] | None = None
    region: object = field(repr=False, default=None)
    covering_radius: float = 0.0
    extras: dict = field(default_factory=dict, compare=False)

    def state(self, i: int) -> ProductStateTuple:
        """Generating product state of ``points[i]``."""
        if self.states is None:
            raise ValueError(f"{self.method} report keeps no states")
        if callable(self.states[0]):
            return self.states[0](i)
        return ProductStateTuple(tuple(f[i] for f in self.states))

    def cloud(self) -> PointCloud:
        return PointCloud(self.points, self.covering_radius)

    def to_json(self, max_points: int | None = None) -> dict:
        pts = self.points if max_points is None else self.points[:max_points]

        def st(s):
            return None if s is None else [[[float(z.real), float(z.imag)] for z in f]
                                           for f in s.factors]

        out = {"method": self.method, "dims": list(self.dims),
               "points": [[float(z.real), float(z.imag)] for z in pts]}
        if self.hermitian_interval is not None:
            h = self.hermitian_interval
            out["extrema"] = {"min": h.minimum, "max": h.maximum,
                              "witnesses": {"min": st(h.min_witness), "max": st(h.max_witness)}}
        if self.radius is not None:
            out["radius"] = {"lower": self.radius.lower, "upper": self.radius.upper,
                             "witness": st(self.radius.witness)}
        if self.barycenter is not None:
            z, w = self.barycenter
            out["barycenter"] = {"value": [float(z.real), float(z.imag)], "witness": st(w)}
        if self.covering_radius:
            out["covering_radius"] = self.covering_radius
        return out


# --------------------------------------------------------------------------
# Product-state algebra
# --------------------------------------------------------------------------


def product_vectors(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Batched Kronecker product: factors of shape (n, m_r) -> (n, prod m_r)."""
    n = factors[0].shape[0]
    return reduce(lambda p, f: (p[:, :, None] * f[:, None, :]).reshape(n, -1), factors)


def rayleigh_batch(x: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """<psi|X|psi> row by row."""
    return np.einsum("ni,ni->n", psi.conj(), psi @ x.T)


def _check_multipartite(xm: ComplexMatrix):
    if xm.nfactors < 2:
        raise DimensionMismatch(f"operator needs at least two factors, got dims {xm.dims}")


def _sample_chunk(x: np.ndarray, dims, seed: int, chunk_id: int, size: int):
    rng = stream(seed, chunk_id)
    factors = haar_product_states(rng, size, dims)
    return factors, rayleigh_batch(x, product_vectors(factors))


def pnr_sample(x, n_samples: int = 10_000, seed: int = 0, threads: int | None = None,
               keep_states: bool = True) -> PnrReport:
    """Rayleigh quotients of Haar-random product states.

    Chunk ``c`` of 4096 samples always uses stream ``(seed, c)``, so the
    output does not depend on ``threads``.
    """
    xm = as_matrix(x)
    _check_multipartite(xm)
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)
    threads = default_threads() if threads is None else max(1, int(threads))
    jobs = list(enumerate(sizes))

    def run(job):
        cid, size = job
        return _sample_chunk(xm.data, xm.dims, seed, cid, size)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    if parts:
        values = np.concatenate([p[1] for p in parts])
        states = tuple(np.concatenate([p[0][r] for p in parts]) for r in range(xm.nfactors))
    else:
        values = np.zeros(0, dtype=complex)
        states = tuple(np.zeros((0, d), dtype=complex) for d in xm.dims)
    radius = RadiusBounds(float(np.abs(values).max()) if values.size else 0.0,
                          numerical_radius_upper(xm), None)
    if values.size:
        i = int(np.argmax(np.abs(values)))
        radius = RadiusBounds(radius.lower, radius.upper,
                              ProductStateTuple(tuple(f[i] for f in states)))
    return PnrReport("sampled", xm.dims, values, states if keep_states else None,
                     radius=radius)


# --------------------------------------------------------------------------
# Product-diagonalisable parametrisation
# --------------------------------------------------------------------------


def simplex_grid(m: int, n: int) -> np.ndarray:
    """All probability vectors in R^m with entries in {0, 1/(n-1), ..., 1}.

    For m = 2 this is ``(p, 1-p)`` with p on a uniform grid of n points.
    """
    if m == 1:
        return np.ones((1, 1))
    steps = n - 1
    rows = []
    # stars and bars: choose m-1 bar positions among steps+m-1 slots
    for bars in combinations(range(steps + m - 1), m - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(steps + m - 2 - prev)
        rows.append(parts)
    w = np.array(rows, dtype=float) / steps
    if m == 2:
        w = w[::-1]
    return w


def covering_radius(lam: np.ndarray, n: int) -> float:
    """Bound on the distance from any point of the parametrised set to the
    nearest grid image.

    Moving factor r's weights by at most h_r in l1 norm moves the value by at
    most h_r D_r / 2, where D_r bounds differences of eigenvalues along r; the
    nearest lattice point is within h_r = 1/(n-1) (m_r = 2) or
    m_r/(n-1) in l1.
    """
    k = lam.ndim
    total = 0.0
    for r in range(k):
        m = lam.shape[r]
        if m == 1:
            continue
        moved = np.moveaxis(lam, r, 0).reshape(m, -1)
        diff = np.abs(moved[:, None, :] - moved[None, :, :]).max()
        h = (1.0 if m == 2 else m) / (n - 1)
        total += diff * h / 2
    return float(total)


def _diagonal_check(xm: ComplexMatrix, us):
    if us is None:
        y = xm.data
        big = None
    else:
        if len(us) != xm.nfactors:
            raise DimensionMismatch("one local unitary per factor required")
        big = local_unitary(us)
        y = big @ xm.data @ big.conj().T
    off = y - np.diag(np.diag(y))
    if np.linalg.norm(off) > DIAGONAL_RTOL * max(np.linalg.norm(xm.data), 1e-300):
        raise NotProductDiagonal("operator is not diagonal in the given product basis")
    return np.diag(y).reshape(xm.dims), big


def pnr_parametrized(x, local_us: Sequence[np.ndarray] | None = None,
                     grid_per_factor: int = 101, threads: int | None = None) -> PnrReport:
    """Cloud ``{sum p1_l1 ... pk_lk lambda_l1..lk}`` over simplex grids.

    ``local_us`` are the unitaries diagonalising X as
    ``(U1 x ... x Uk) X (U1 x ... x Uk)^dagger``; without them X itself must
    be diagonal.  Generating states are rebuilt on demand by ``state(i)``.
    """
    xm = as_matrix(x)
    lam, _ = _diagonal_check(xm, local_us)
    grids = [simplex_grid(m, grid_per_factor) for m in xm.dims]
    # contract one factor at a time: t has shape (g1, ..., gr, m_{r+1}, ..., m_k)
    t = lam
    for r, g in enumerate(grids):
        t = np.tensordot(g, t, axes=([1], [r]))      # new axis 0
        t = np.moveaxis(t, 0, r)
    points = t.ravel()
    shape = tuple(g.shape[0] for g in grids)
    us = None if local_us is None else [np.asarray(u, dtype=complex) for u in local_us]

    def state_at(i: int) -> ProductStateTuple:
        idx = np.unravel_index(int(i), shape)
        fs = []
        for r, (g, j) in enumerate(zip(grids, idx)):
            v = np.sqrt(g[j]).astype(complex)
            if us is not None:
                v = us[r].conj().T @ v
            fs.append(v)
        return ProductStateTuple(tuple(fs))

    cov = covering_radius(lam, grid_per_factor)
    rep = PnrReport("parametrized", xm.dims, points, (state_at,), covering_radius=cov,
                    extras={"grid_shape": shape, "eigenvalues": lam})
    return rep


# --------------------------------------------------------------------------
# Tensor products through Minkowski products
# --------------------------------------------------------------------------


def pnr_tensor_product(a, b, *more, resolution: int = 512, n_angles: int = 256,
                       method: str = "auto") -> PnrReport:
    """Product range of ``A x B (x ...)`` as the Minkowski product W(A) W(B) ...

    Zero-free convex factors go through log-polar ribbons; otherwise the
    product is rasterised.
    """
    mats = [as_matrix(f) for f in (a, b) + more]
    polys = [numerical_range_boundary(m, n_angles).polygon() for m in mats]
    region = polys[0]
    for p in polys[1:]:
        region = minkowski_product(region, p, resolution=resolution, method=method)
    dims = tuple(d for m in mats for d in m.dims)
    if isinstance(region, RasterMask):
        pts = region.cell_centers()
    elif isinstance(region, PointCloud):
        pts = region.points
    else:
        pts = region.vertices
    return PnrReport("minkowski", dims, pts, region=region,
                     extras={"factor_ranges": polys})


# --------------------------------------------------------------------------
# See-saw
# --------------------------------------------------------------------------


_LETTERS = "abcdefghijklmnopqrstuvwxy"


def _contract_except(xt: np.ndarray, factors, r: int) -> np.ndarray:
    """Batched (x_{s != r} <psi_s|) X (x_{s != r} |psi_s>) -> (R, m_r, m_r)."""
    k = len(factors)
    bra = _LETTERS[:k]
    ket = _LETTERS[k:2 * k]
    ops = [xt]
    subs = [bra + ket]
    for s in range(k):
        if s == r:
            continue
        ops += [factors[s].conj(), factors[s]]
        subs += ["z" + bra[s], "z" + ket[s]]
    expr = ",".join(subs) + "->z" + bra[r] + ket[r]
    return np.einsum(expr, *ops, optimize=_einsum_path(expr, tuple(o.shape for o in ops)))


@lru_cache(maxsize=256)
def _einsum_path(expr: str, shapes: tuple) -> list:
    return np.einsum_path(expr, *(np.empty(sh, dtype=complex) for sh in shapes), optimize="greedy")[0]


def seesaw(x, sense: str = "max", restarts: int = DEFAULT_RESTARTS, seed: int = 0,
           warm_starts: Sequence[ProductStateTuple] = (), max_sweeps: int = SEESAW_MAX_SWEEPS):
    """Alternating optimisation of <psi|X|psi> over product states.

    Each factor in turn is replaced by the extreme eigenvector of X
    contracted with all other factors.  Returns ``(value, witness, history)``
    where ``history[t, j]`` is restart ``j``'s value after sweep ``t``.
    """
    xm = as_matrix(x)
    if not xm.is_hermitian():
        raise NotHermitian("see-saw needs a Hermitian operator")
    sign = 1.0 if sense == "max" else -1.0
    a = sign * xm.hermitian_part().data
    dims = xm.dims
    k = len(dims)
    xt = a.reshape(dims + dims)
    rng = stream(seed, 0x5EE)
    factors = [f for f in haar_product_states(rng, restarts, dims)]
    if warm_starts:
        for r in range(k):
            extra = np.array([w.factors[r] for w in warm_starts])
            factors[r] = np.concatenate([extra, factors[r]])
    tol = SEESAW_RTOL * (1 + xm.norm())
    value = rayleigh_batch(a, product_vectors(factors)).real
    hist = [value]
    for _ in range(max_sweeps):
        for r in range(k):
            m = _contract_except(xt, factors, r)
            m = (m + np.conj(np.swapaxes(m, 1, 2))) / 2
            w, v = np.linalg.eigh(m)
            factors[r] = v[:, :, -1]
        new = rayleigh_batch(a, product_vectors(factors)).real
        hist.append(new)
        gain = np.max(new - value)
        value = new
        if gain < tol:
            break
    best = int(np.argmax(value))
    wit = ProductStateTuple(tuple(f[best] for f in factors))
    return sign * float(value[best]), wit, sign * np.array(hist)


def _warm_starts(xm: ComplexMatrix, seed: int, sense: str):
    if xm.nfactors != 2:
        return []
    try:
        rep = _bounds.bound_report(xm, seed=seed, restarts=16)
    except (NotFound, NotHermitian):
        return []
    w = rep.max_witness if sense == "max" else rep.min_witness
    return [w] if w is not None else []


def pnr_hermitian_extrema(x, n_restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                          warm: bool = True) -> HermitianExtrema:
    """(min, max) of <psi|X|psi> over product states by see-saw.

    Bipartite inputs are warm-started from the eigen-subspace product states
    of the index bounds.  Results are local optima, within [lambda_1, lambda_N].
    """
    xm = as_matrix(x)
    _check_multipartite(xm)
    if not xm.is_hermitian():
        raise NotHermitian("Hermitian operator required")
    hi, hw, hh = seesaw(xm, "max", n_restarts, seed,
                        _warm_starts(xm, seed, "max") if warm else ())
    lo, lw, lh = seesaw(xm, "min", n_restarts, seed,
                        _warm_starts(xm, seed, "min") if warm else ())
    return HermitianExtrema(lo, hi, lw, hw, lh, hh)


def product_numerical_radius(x, n_restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                             n_theta: int = 64) -> RadiusBounds:
    """Lower and upper bounds on max |<psi|X|psi>| over product states.

    Hermitian X: the lower bound comes from the see-saw extrema and the
    upper bound is the spectral radius.  Otherwise the lower bound maximises
    Re(e^{-i theta} X) by see-saw over a theta grid and the upper bound is
    the numerical radius of X.
    """
    xm = as_matrix(x)
    _check_multipartite(xm)
    if xm.is_hermitian():
        ext = pnr_hermitian_extrema(xm, n_restarts, seed)
        if abs(ext.maximum) >= abs(ext.minimum):
            lower, wit = abs(ext.maximum), ext.max_witness
        else:
            lower, wit = abs(ext.minimum), ext.min_witness
        upper = float(np.max(np.abs(np.linalg.eigvalsh(xm.hermitian_part().data))))
        return RadiusBounds(lower, max(upper, lower), wit)
    best, wit = -1.0, None
    for th in 2 * np.pi * np.arange(n_theta) / n_theta:
        h = xm.rotate(th)
        _, w, _ = seesaw(h, "max", max(4, n_restarts // 4), seed)
        val = abs(w.value(xm.data))
        if val > best:
            best, wit = val, w
    upper = numerical_radius_upper(xm)
    return RadiusBounds(best, max(upper, best), wit)


# --------------------------------------------------------------------------
# Barycenter
# --------------------------------------------------------------------------


def _contract_last(xm: ComplexMatrix, v: np.ndarray) -> ComplexMatrix:
    """(1 x <v|) X (1 x |v>) on the remaining factors."""
    dims = xm.dims
    m = dims[-1]
    n = xm.n // m
    t = xm.data.reshape(n, m, n, m)
    out = np.einsum("b,ibjc,c->ij", v.conj(), t, v)
    return ComplexMatrix(dims[:-1], out)


def barycenter_witness(x) -> ProductStateTuple:
    """Product state whose value is tr X / N.

    Factors are fixed right to left: the last factor attains the barycenter
    of the partial trace over the others, then X is contracted with it.  The
    contracted operator has the same barycenter, so the step repeats.
    """
    xm = as_matrix(x)
    _check_multipartite(xm)
    factors = []
    cur = xm
    while cur.nfactors > 1:
        red = partial_trace(cur, list(range(cur.nfactors - 1)))
        target = red.trace() / red.n
        try:
            v = attain_value(red, target)
        except Exception as exc:
            raise AttainFailure(f"barycenter step failed: {exc}") from exc
        factors.append(v)
        cur = _contract_last(cur, v)
    target = cur.trace() / cur.n
    try:
        v = attain_value(cur, target)
    except Exception as exc:
        raise AttainFailure(f"barycenter step failed: {exc}") from exc
    factors.append(v)
    return ProductStateTuple(tuple(factors[::-1]))


# --------------------------------------------------------------------------
# Schmidt outer bound
# --------------------------------------------------------------------------


def schmidt_outer_bound(x, n_terms: int | None = None, resolution: int = 256,
                        n_angles: int = 256) -> RasterMask:
    """Raster superset of the product range from ``X = sum sqrt(mu_i) A_i x B_i``.

    Each term contributes sqrt(mu_i) W(A_i) W(B_i), taken with circumscribed
    polygons and conservative rasters; the terms are summed.  Truncating
    ``n_terms`` below the Schmidt rank drops the superset guarantee.
    """
    xm = as_matrix(x)
    if xm.nfactors != 2:
        raise DimensionMismatch("Schmidt bound needs a bipartite operator")
    sd = operator_schmidt(xm)
    r = sd.rank if n_terms is None else min(n_terms, sd.rank)
    terms = []
    for i in range(r):
        wa = numerical_range_boundary(sd.left[i], n_angles).outer_polygon()
        wb = numerical_range_boundary(sd.right[i], n_angles).outer_polygon()
        terms.append((wa.transform(np.sqrt(sd.coefficients[i])), wb))
    if not terms:
        return RasterMask(Frame(0j, 1.0, (1, 1)), np.ones((1, 1), dtype=bool))
    reach = sum(a.max_modulus() * b.max_modulus() for a, b in terms)
    cell = 2.0 * max(reach, 1e-12) / resolution
    out = None
    for a, b in terms:
        p = (a.vertices[:, None] * b.vertices[None, :]).ravel()
        frame = Frame.covering(p.real.min(), p.real.max(), p.imag.min(), p.imag.max(),
                               cell=cell, margin=3, anchor_zero=True)
        m = product_mask(a, b, conservative=True, frame=frame)
        out = m if out is None else _sum_masks(out, m, conservative=True)
    return out


# --------------------------------------------------------------------------
# Projections
# --------------------------------------------------------------------------


def pnr_projections(x, n_restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """Extrema of the Hermitian part H(X) and of -i S(X), S(X) = (X - X^dagger)/2.

    The real parts of the product range form the interval [min H, max H]
    and the imaginary parts [min(-iS), max(-iS)].
    """
    xm = as_matrix(x)
    _check_multipartite(xm)
    h = xm.hermitian_part()
    s = xm.skew_part()
    reports = []
    for op, name in ((h, "hermitian"), (ComplexMatrix(xm.dims, -1j * s.data), "skew")):
        op = ComplexMatrix(op.dims, (op.data + op.data.conj().T) / 2)
        ext = pnr_hermitian_extrema(op, n_restarts, seed)
        reports.append(PnrReport("seesaw", xm.dims,
                                 np.array([ext.minimum, ext.maximum], dtype=complex),
                                 hermitian_interval=ext, extras={"part": name}))
    return reports[0], reports[1], s


def interpolate_product_states(x, start: ProductStateTuple, end: ProductStateTuple,
                               target: float, tol: float = 1e-12) -> ProductStateTuple:
    """Product state with Re<psi|X|psi> = target on the factorwise geodesic.

    Requires ``target`` to lie between the values of ``start`` and ``end``.
    """
    a = as_matrix(x).data

    def geo(t):
        fs = []
        for u, w in zip(start.factors, end.factors):
            ph = np.vdot(u, w)
            w2 = w * (np.conj(ph) / abs(ph)) if abs(ph) > 1e-15 else w
            c = np.clip(abs(np.vdot(u, w2)), -1.0, 1.0)
            ang = np.arccos(c)
            if ang < 1e-15:
                fs.append(u.copy())
                continue
            perp = w2 - u * np.vdot(u, w2)
            perp /= np.linalg.norm(perp)
            fs.append(np.cos(t * ang) * u + np.sin(t * ang) * perp)
        return ProductStateTuple(tuple(fs))

    f0 = start.value(a).real - target
    f1 = end.value(a).real - target
    if f0 == 0:
        return start
    if f1 == 0:
        return end
    if f0 * f1 > 0:
        raise ValueError("target is not bracketed by the endpoint values")
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        fm = geo(mid).value(a).real - target
        if (fm < 0) == (f0 < 0):
            lo = mid
        else:
            hi = mid
        if abs(fm) <= tol or hi - lo < 1e-16:
            break
    return geo((lo + hi) / 2)
