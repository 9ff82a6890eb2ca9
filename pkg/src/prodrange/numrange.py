"""Classical numerical range W(X) = {<v|X|v> : |v| = 1}.

The boundary is traced with support functions: for each angle theta the top
eigenvector of the Hermitian part of exp(-i theta) X touches the support line
in direction theta.  ``attain_value`` solves the inverse problem for a point
inside W(X) by reducing to 2x2 compressions, whose ranges are ellipses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import AttainFailure, DegenerateBoundary, ValueOutsideRange
from .linalg import as_matrix
from .regions import ConvexPolygon, convex_hull, segment_distance

DEFAULT_ANGLES = 256
FACET_RTOL = 1e-9
MAX_REFINE_DEPTH = 10


class Membership(str, enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class RangeBoundary:
    """Support-function samples of W(X).

    Arrays are aligned: facet angles contribute two entries (the facet
    endpoints) with the same angle.
    """

    thetas: np.ndarray
    support: np.ndarray
    points: np.ndarray
    witnesses: np.ndarray       # (len, N) unit vectors
    norm: float

    def polygon(self) -> ConvexPolygon:
        """Inscribed polygon: hull of the attained boundary points."""
        return ConvexPolygon(convex_hull(self.points, tol=1e-13))

    def outer_polygon(self) -> ConvexPolygon:
        """Circumscribed polygon from consecutive support lines.

        Contains W(X) exactly (up to rounding), since it is the intersection
        of the sampled supporting half-planes.
        """
        th, h = _unique_angles(self.thetas, self.support)
        if th.size < 3 or np.max(np.diff(np.concatenate([th, [th[0] + 2 * np.pi]]))) >= np.pi - 1e-9:
            return self.polygon()
        th2 = np.roll(th, -1)
        h2 = np.roll(h, -1)
        delta = np.mod(th2 - th, 2 * np.pi)
        z = np.exp(1j * th) * (h + 1j * (h2 - h * np.cos(delta)) / np.sin(delta))
        hull = convex_hull(z, tol=1e-13)
        if hull.size < 3:
            return self.polygon()
        return ConvexPolygon(hull)

    def is_degenerate(self, tol: float | None = None) -> bool:
        tol = self._tol(tol)
        return abs(self.polygon().area()) < tol * tol

    def _tol(self, tol):
        return 1e-9 * (1 + self.norm) if tol is None else tol


def _unique_angles(th, h):
    th = np.mod(np.asarray(th), 2 * np.pi)
    order = np.argsort(th, kind="stable")
    th, h = th[order], np.asarray(h)[order]
    keep = np.concatenate([[True], np.diff(th) > 1e-15])
    return th[keep], h[keep]


def _support_points(x: np.ndarray, thetas: np.ndarray, tol: float):
    """Boundary points, support values and witnesses for a batch of angles."""
    e = np.exp(-1j * thetas)[:, None, None]
    h = (e * x + np.conj(e) * x.conj().T) / 2
    w, v = np.linalg.eigh(h)
    out = []
    for k, th in enumerate(thetas):
        top = w[k, -1]
        deg = np.flatnonzero(w[k] >= top - tol)
        if deg.size == 1:
            vec = v[k][:, -1]
            out.append([(th, top, vec)])
            continue
        # flat facet: extremes of the projected cross-section
        basis = v[k][:, deg]
        kk = basis.conj().T @ x @ basis
        t = (np.exp(-1j * th) * kk - np.exp(1j * th) * kk.conj().T) / 2j
        tw, tv = np.linalg.eigh((t + t.conj().T) / 2)
        lo = basis @ tv[:, 0]
        hi = basis @ tv[:, -1]
        out.append([(th, top, lo), (th, top, hi)] if tw[-1] - tw[0] > tol else [(th, top, lo)])
    return out


def numerical_range_boundary(x, n_angles: int = DEFAULT_ANGLES, refine: bool = True,
                             max_depth: int = MAX_REFINE_DEPTH) -> RangeBoundary:
    """Support-function trace of the boundary of W(X).

    Angles start on a uniform grid of ``n_angles``; where neighbouring
    boundary points are farther apart than ||X||/64 the angle interval is
    bisected (up to ``max_depth`` times) unless the gap is a flat facet.
    """
    if n_angles < 3:
        raise ValueError("n_angles must be at least 3")
    xm = as_matrix(x)
    a = xm.data
    nrm = xm.norm()
    tol = FACET_RTOL * (1 + nrm)
    gap = max(nrm, 1e-300) / 64
    thetas = 2 * np.pi * np.arange(n_angles) / n_angles
    entries = dict(zip(thetas.tolist(), _support_points(a, thetas, tol)))
    if refine and nrm > 0:
        depth = 0
        while depth < max_depth:
            th = np.array(sorted(entries))
            nxt = np.concatenate([th[1:], [th[0] + 2 * np.pi]])
            mids = []
            for t0, t1 in zip(th, nxt):
                p0 = entries[t0][-1][2]
                p1 = entries[t1 % (2 * np.pi) if t1 >= 2 * np.pi else t1][0][2]
                z0 = np.vdot(p0, a @ p0)
                z1 = np.vdot(p1, a @ p1)
                if abs(z1 - z0) > gap and t1 - t0 > 1e-9:
                    mids.append((t0 + t1) / 2)
            if not mids:
                break
            mids = np.mod(np.array(mids), 2 * np.pi)
            new = _support_points(a, mids, tol)
            added = False
            for t, pts in zip(mids.tolist(), new):
                if t not in entries:
                    entries[t] = pts
                    added = True
            if not added:
                break
            depth += 1
    th_list, h_list, p_list, w_list = [], [], [], []
    for t in sorted(entries):
        for th, h, vec in entries[t]:
            th_list.append(th)
            h_list.append(h)
            w_list.append(vec)
            p_list.append(np.vdot(vec, a @ vec))
    return RangeBoundary(np.array(th_list), np.array(h_list), np.array(p_list),
                         np.array(w_list), nrm)


def signed_distance(boundary: RangeBoundary, z) -> np.ndarray:
    return boundary.polygon().signed_distance(z)


def contains(boundary: RangeBoundary, z: complex, tol: float | None = None) -> Membership:
    """Membership of ``z`` in the polygonal W(X) with a signed-distance margin."""
    tol = boundary._tol(tol)
    poly = boundary.polygon()
    if poly.is_degenerate or abs(poly.area()) < tol * tol:
        v = poly.vertices
        if v.size >= 3:
            # thin polygon: accept only if it is numerically a segment
            far = np.argmax(np.abs(v - v[0]))
            d = segment_distance(v, v[0], v[far])
            if np.max(d) > tol:
                raise DegenerateBoundary("near-zero-area range that is not a segment")
            v = np.array([v[0], v[far]])
        d = float(segment_distance(np.array([z]), v[0], v[-1])[0])
        return Membership.BOUNDARY if d <= tol else Membership.OUTSIDE
    sd = float(poly.signed_distance(np.array([z]))[0])
    if abs(sd) <= tol:
        return Membership.BOUNDARY
    return Membership.INSIDE if sd > 0 else Membership.OUTSIDE


def hermitian_interval(x) -> tuple[float, float]:
    w = np.linalg.eigvalsh(as_matrix(x).hermitian_part().data)
    return float(w[0]), float(w[-1])


def numerical_radius_upper(x, n_angles: int = 512) -> float:
    """Upper bound on max |W(X)| from sampled support values."""
    xm = as_matrix(x)
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    e = np.exp(-1j * th)[:, None, None]
    h = (e * xm.data + np.conj(e) * xm.data.conj().T) / 2
    top = np.linalg.eigvalsh(h)[:, -1]
    return float(np.max(top) / np.cos(np.pi / n_angles))


# --------------------------------------------------------------------------
# Inverse problem
# --------------------------------------------------------------------------


def _rq(a: np.ndarray, v: np.ndarray) -> complex:
    return complex(np.vdot(v, a @ v) / np.vdot(v, v).real)


def _two_point(a: np.ndarray, u: np.ndarray, w: np.ndarray, z: complex,
               tol: float) -> np.ndarray | None:
    """Unit vector in span{u, w} whose Rayleigh quotient is ``z`` on [z_u, z_w].

    Along ``x(t) = cos t u + s sin t w`` the transverse part of the value is
    proportional to Im(s c) for a fixed c, so with ``s`` parallel to conj(c)
    the value runs along the chord from z_u to z_w and bisection on t finds z.
    """
    u = u / np.linalg.norm(u)
    w = w / np.linalg.norm(w)
    zu, zw = _rq(a, u), _rq(a, w)
    if abs(z - zu) <= tol:
        return u
    if abs(z - zw) <= tol:
        return w
    d = zw - zu
    if abs(d) < 1e-300:
        return None
    rot = np.conj(d) / abs(d)
    b = rot * (a - zu * np.eye(a.shape[0]))
    c = np.vdot(u, b @ w) - np.conj(np.vdot(w, b @ u))
    s = np.conj(c) / abs(c) if abs(c) > 1e-300 else 1.0 + 0j
    if (s * np.vdot(u, w)).real < 0:
        s = -s
    target = (rot * (z - zu)).real
    if not (-tol <= target <= abs(d) + tol):
        return None

    def path(t):
        return np.cos(t) * u + s * np.sin(t) * w

    lo, hi = 0.0, np.pi / 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if _rq(b, path(mid)).real < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    x = path((lo + hi) / 2)
    return x / np.linalg.norm(x)


def _bary(p, a, b, c):
    m = np.array([[a.real - c.real, b.real - c.real], [a.imag - c.imag, b.imag - c.imag]])
    rhs = np.array([p.real - c.real, p.imag - c.imag])
    try:
        l1, l2 = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return None
    return np.array([l1, l2, 1 - l1 - l2])


def attain_value(x, z: complex, boundary: RangeBoundary | None = None,
                 tol: float | None = None) -> np.ndarray:
    """Unit vector ``v`` with ``<v|X|v> = z`` for ``z`` in W(X).

    Raises ``ValueOutsideRange`` when ``z`` is outside W(X) by more than the
    tolerance, and ``AttainFailure`` if the construction does not verify.
    """
    xm = as_matrix(x)
    a = xm.data
    nrm = xm.norm()
    z = complex(z)
    goal = 1e-8 * (1 + nrm)
    tol = 1e-9 * (1 + nrm) if tol is None else tol
    n = a.shape[0]
    if n == 1:
        if abs(a[0, 0] - z) <= goal:
            return np.ones(1, dtype=complex)
        raise ValueOutsideRange(f"{z} is not in the one-point range {a[0, 0]}")
    if boundary is None:
        boundary = numerical_range_boundary(xm, 128)
    # necessary test against the exact support values
    th = boundary.thetas
    margin = (np.exp(-1j * th) * z).real - boundary.support
    if np.max(margin) > tol:
        raise ValueOutsideRange(f"{z} lies outside the numerical range")
    # scalar multiple of the identity
    if boundary.polygon().vertices.size == 1:
        return boundary.witnesses[0] / np.linalg.norm(boundary.witnesses[0])

    for attempt in range(4):
        v = _attain_in_boundary(a, z, boundary, goal)
        if v is not None and abs(_rq(a, v) - z) <= goal:
            return v / np.linalg.norm(v)
        # z may sit in the sliver outside the inscribed polygon: refine angles
        boundary = numerical_range_boundary(xm, 4 * len(boundary.thetas), max_depth=12)
    raise AttainFailure(f"could not construct a vector attaining {z}")


def _attain_in_boundary(a, z, boundary: RangeBoundary, goal):
    pts = boundary.points
    wit = boundary.witnesses
    # direct hit on a boundary point
    j = int(np.argmin(np.abs(pts - z)))
    if abs(pts[j] - z) <= goal:
        return wit[j]
    hull = boundary.polygon().vertices
    if hull.size == 2 or boundary.polygon().area() < goal * goal:
        # segment-shaped range: interpolate between the extreme witnesses
        i0 = int(np.argmin((pts * np.conj(hull[-1] - hull[0])).real))
        i1 = int(np.argmax((pts * np.conj(hull[-1] - hull[0])).real))
        return _two_point(a, wit[i0], wit[i1], z, goal)
    idx = [int(np.argmin(np.abs(pts - h))) for h in hull]
    p = pts[idx]
    # fan triangulation from vertex 0
    for k in range(1, len(idx) - 1):
        lam = _bary(z, p[0], p[k], p[k + 1])
        if lam is None or np.min(lam) < -1e-12:
            continue
        v1, v2, v3 = wit[idx[0]], wit[idx[k]], wit[idx[k + 1]]
        if lam[0] > 1 - 1e-14:
            return v1
        # q on edge [p2, p3] along the ray from p1 through z
        s = lam[2] / (lam[1] + lam[2])
        q = p[k] + s * (p[k + 1] - p[k])
        vq = _two_point(a, v2, v3, q, goal * 1e-2)
        if vq is None:
            continue
        qv = _rq(a, vq)
        return _two_point(a, v1, vq, z, goal) if abs(qv - z) > goal else vq
    # outside the inscribed polygon but within the support test
    return None
