"""Minkowski sums and products of planar regions.

Zero-free convex factors multiply exactly in log-polar coordinates, where
products become sums of "ribbons" bounded by log-radius curves.  Everything
else goes through rasters, using that for compact sets

    Z1 Z2 = (boundary(Z2) . Z1) U (boundary(Z1) . Z2),

so the product is a union of scaled copies of one convex factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .errors import AngleOverflow, ContainsZero
from .raster import SQUARE, Accumulator, boundary_cells, rasterize_on, region_to_mask
from .regions import (
    ConvexPolygon,
    Frame,
    PointCloud,
    Polygon,
    RasterMask,
    convex_hull,
)

ZERO_TOL = 1e-12
RIBBON_SAMPLES = 1024
RASTER_RESOLUTION = 512
FILL_STEP = 0.25          # cells between consecutive scaled copies
DEGENERATE_THICKEN = 0.75  # cells


# --------------------------------------------------------------------------
# Log-polar ribbons
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogPolarRibbon:
    """Region ``{r e^{i(xi + rotation)} : xi in [0, phi_max], log r in [r_minus, r_plus]}``.

    ``xi`` is the sample grid; log-radius bounds are linear between samples.
    """

    phi_max: float
    xi: np.ndarray
    r_minus: np.ndarray
    r_plus: np.ndarray
    rotation: float = 0.0

    def __post_init__(self):
        if self.phi_max >= np.pi and self.phi_max < 2 * np.pi - 1e-15 and self.xi.size < 2:
            raise ValueError("ribbon grid too coarse")

    def lower(self, xi) -> np.ndarray:
        return np.interp(xi, self.xi, self.r_minus)

    def upper(self, xi) -> np.ndarray:
        return np.interp(xi, self.xi, self.r_plus)

    def to_polygon(self) -> Polygon:
        """Boundary loop: outer curve forward, inner curve backward."""
        rot = np.exp(1j * self.rotation)
        outer = np.exp(self.r_plus + 1j * self.xi)
        inner = np.exp(self.r_minus + 1j * self.xi)[::-1]
        if self.phi_max == 0:
            return Polygon(rot * np.array([inner[0], outer[0]]))
        return Polygon(rot * np.concatenate([outer, inner]))

    def max_modulus(self) -> float:
        return float(np.exp(self.r_plus.max()))


def _ray_hits(verts: np.ndarray, xi: np.ndarray):
    """Smallest and largest |z| on each ray arg z = xi hitting the polygon boundary."""
    v = verts
    if v.size == 1:
        edges_a, edges_b = v, v
    elif v.size == 2:
        edges_a, edges_b = v[:1], v[1:]
    else:
        edges_a, edges_b = v, np.roll(v, -1)
    d = np.exp(1j * xi)[:, None]
    a = edges_a[None, :]
    e = (edges_b - edges_a)[None, :]

    def cross(p, q):
        return p.real * q.imag - p.imag * q.real

    den = cross(d, e)
    scale = max(np.abs(v).max(), 1e-300)
    par = np.abs(den) < 1e-14 * max(np.abs(e).max(), 1e-300)
    safe = np.where(par, 1.0, den)
    # d t = a + s e  ->  t = cross(a, e)/cross(d, e), s = cross(a, d)/cross(d, e)
    t = cross(a, e) / safe
    s = cross(a, d) / safe
    ok = (~par) & (s >= -1e-9) & (s <= 1 + 1e-9) & (t >= -1e-12 * scale)
    tmin = np.where(ok, t, np.inf).min(axis=1)
    tmax = np.where(ok, t, -np.inf).max(axis=1)
    # edges lying on a ray through the origin contribute both endpoints
    on_ray = par & (np.abs(cross(d, a)) <= 1e-12 * scale)
    for end in (a, a + e):
        same = on_ray & ((end * np.conj(d)).real > 0)
        r = np.abs(end) * np.ones_like(t.real)
        tmin = np.minimum(tmin, np.where(same, r, np.inf).min(axis=1))
        tmax = np.maximum(tmax, np.where(same, r, -np.inf).max(axis=1))
    # vertices exactly on the ray (grazing at the angular extremes)
    vd = v[None, :] * np.conj(d)
    hit = (np.abs(vd.imag) <= 1e-12 * scale) & (vd.real > 0)
    r = np.abs(v)[None, :] * np.ones(hit.shape)
    tmin = np.minimum(tmin, np.where(hit, r, np.inf).min(axis=1))
    tmax = np.maximum(tmax, np.where(hit, r, -np.inf).max(axis=1))
    return tmin, tmax


def _zero_free(z: ConvexPolygon) -> bool:
    return bool(z.signed_distance(np.array([0j]))[0] < -ZERO_TOL)


def to_ribbon(z: ConvexPolygon, n_samples: int = RIBBON_SAMPLES) -> LogPolarRibbon:
    """Log-polar description of a zero-free convex polygon.

    The region is rotated so its minimal argument is 0; the rotation is
    stored on the ribbon and undone by ``to_polygon``.
    """
    if not _zero_free(z):
        raise ContainsZero("region contains 0; use the raster product")
    v = z.vertices
    ref = np.angle(np.mean(v))
    rel = np.angle(v * np.exp(-1j * ref))
    rotation = ref + rel.min()
    w = v * np.exp(-1j * rotation)
    args = np.angle(w)
    phi_max = float(max(args.max(), 0.0))
    if phi_max < 1e-14:
        m = np.abs(w)
        return LogPolarRibbon(0.0, np.zeros(1), np.array([np.log(m.min())]),
                              np.array([np.log(m.max())]), float(rotation))
    xi = np.linspace(0.0, phi_max, n_samples)
    tmin, tmax = _ray_hits(w, xi)
    # rounding at the angular extremes can leave a ray without hits
    bad = ~np.isfinite(tmin) | ~np.isfinite(tmax)
    if bad.any():
        for k in np.flatnonzero(bad):
            j = int(np.argmin(np.abs(np.angle(w * np.exp(-1j * xi[k])))))
            tmin[k] = tmax[k] = abs(w[j])
    return LogPolarRibbon(phi_max, xi, np.log(tmin), np.log(tmax), float(rotation))


def _refine_peak(f: np.ndarray, j: int, sign: float) -> float:
    """Vertex value of the parabola through samples j-1, j, j+1."""
    if j == 0 or j == f.size - 1:
        return f[j]
    y0, y1, y2 = f[j - 1], f[j], f[j + 1]
    den = y0 - 2 * y1 + y2
    if sign * den >= 0:
        return y1
    cand = y1 - (y2 - y0) ** 2 / (8 * den)
    return max(y1, cand) if sign > 0 else min(y1, cand)


def log_polar_product(r1: LogPolarRibbon, r2: LogPolarRibbon,
                      n_samples: int = RIBBON_SAMPLES, n_scan: int = 512) -> LogPolarRibbon:
    """Product of two ribbons: arguments add and log-radii add.

    ``R+(xi) = max_phi r1+(phi) + r2+(xi - phi)`` and ``R-`` with ``min``,
    over admissible phi, scanned on a grid with parabolic refinement.
    """
    phi = r1.phi_max + r2.phi_max
    if phi >= 2 * np.pi:
        raise AngleOverflow(f"angular spans add to {phi:.6f} >= 2 pi")
    rot = r1.rotation + r2.rotation
    if phi == 0:
        return LogPolarRibbon(0.0, np.zeros(1), r1.r_minus[:1] + r2.r_minus[:1],
                              r1.r_plus[:1] + r2.r_plus[:1], rot)
    xi = np.linspace(0.0, phi, n_samples)
    lo = np.maximum(0.0, xi - r2.phi_max)
    hi = np.minimum(r1.phi_max, xi)
    s = np.linspace(0.0, 1.0, n_scan)
    grid = lo[:, None] + (hi - lo)[:, None] * s[None, :]
    f_plus = r1.upper(grid) + r2.upper(xi[:, None] - grid)
    f_minus = r1.lower(grid) + r2.lower(xi[:, None] - grid)
    jp = np.argmax(f_plus, axis=1)
    jm = np.argmin(f_minus, axis=1)
    rp = np.array([_refine_peak(f_plus[k], jp[k], 1.0) for k in range(n_samples)])
    rm = np.array([_refine_peak(f_minus[k], jm[k], -1.0) for k in range(n_samples)])
    return LogPolarRibbon(phi, xi, rm, rp, rot)


# --------------------------------------------------------------------------
# Raster machinery
# --------------------------------------------------------------------------


def _vertex_box(z1, z2):
    """Exact bounding box of Z1 Z2 for convex inputs (extremes at vertex pairs)."""
    p = (z1.vertices[:, None] * z2.vertices[None, :]).ravel()
    return p.real.min(), p.real.max(), p.imag.min(), p.imag.max()


def _frame_for(box, resolution, cell=None):
    return Frame.covering(*box, resolution=resolution, anchor_zero=True, cell=cell)


def product_mask(z1: ConvexPolygon, z2: ConvexPolygon, resolution: int = RASTER_RESOLUTION,
                 conservative: bool = False, frame: Frame | None = None,
                 step: float = FILL_STEP) -> RasterMask:
    """Raster of Z1 Z2 for convex polygons (points and segments allowed).

    Copies ``w Z1`` for ``w`` along the boundary of Z2 (and vice versa) are
    filled by cell centers, spaced so consecutive copies move by at most
    ``step`` cells.  With ``conservative`` every copy is grown by the
    spacing error plus half a cell diagonal, so every cell touching the true
    product is marked.
    """
    if frame is None:
        frame = _frame_for(_vertex_box(z1, z2), resolution)
    acc = Accumulator(frame)
    c = frame.cell
    for fixed, moving in ((z1, z2), (z2, z1)):
        reach = max(fixed.max_modulus(), 1e-300)
        spacing = step * c / reach
        ws = moving.boundary_samples(spacing)
        if conservative:
            grow = spacing / 2 * reach + c / np.sqrt(2) * (1 + 1e-9)
        else:
            grow = DEGENERATE_THICKEN * c if fixed.is_degenerate else 0.0
        nonzero = np.abs(ws) > 1e-300
        if fixed.vertices.size >= 3 and not fixed.is_degenerate:
            # offsetting w Z by g is w (Z + (g / |w|) m) with fixed miter vectors m
            w = ws[nonzero][:, None]
            batch = w * fixed.vertices[None, :]
            if grow > 0:
                batch = batch + grow * (w / np.abs(w)) * fixed.miter_directions()[None, :]
            if batch.size:
                acc.add_convex_batch(batch)
            ws = ws[~nonzero]
        for w in ws:
            p = fixed.transform(w) if abs(w) > 1e-300 else ConvexPolygon.point(0j)
            if grow > 0 or p.is_degenerate:
                p = p.offset(max(grow, DEGENERATE_THICKEN * c if p.is_degenerate else 0.0))
            acc.add_convex(p.vertices)
    return RasterMask(frame, acc.mask())


def _sum_masks(m1: RasterMask, m2: RasterMask, conservative: bool) -> RasterMask:
    """Minkowski sum of two masks on lattices with equal cell sizes."""
    c = m1.cell
    if not np.isclose(m2.cell, c, rtol=1e-12):
        raise ValueError("raster sum needs equal cell sizes")
    conv = fftconvolve(m1.mask.astype(float), m2.mask.astype(float)) > 0.5
    origin = m1.frame.origin + m2.frame.origin
    frame = Frame(origin, c, conv.shape)
    if conservative:
        conv = ndimage.binary_dilation(np.pad(conv, 1), structure=SQUARE)
        frame = Frame(origin - c * (1 + 1j), c, conv.shape)
    return RasterMask(frame, conv)


def _to_lattice(region, cell: float, conservative: bool = False) -> RasterMask:
    box = region.bbox()
    frame = Frame.covering(*box, cell=cell, margin=2, anchor_zero=True)
    if isinstance(region, ConvexPolygon):
        p = region.offset(cell / np.sqrt(2) * (1 + 1e-9)) if conservative else region
        if p.is_degenerate:
            p = p.offset(DEGENERATE_THICKEN * cell)
        acc = Accumulator(frame)
        acc.add_convex(p.vertices)
        return RasterMask(frame, acc.mask())
    if isinstance(region, RasterMask):
        from .raster import resample
        if conservative:
            frame = Frame.covering(*box, cell=cell, margin=3, anchor_zero=True)
            centers = frame.centers().ravel()
            hit = region.contains(centers, tol=cell / np.sqrt(2))
            return RasterMask(frame, hit.reshape(frame.shape))
        return resample(region, frame)
    if isinstance(region, PointCloud):
        r = region.covering_radius if region.covering_radius > 0 else None
        return rasterize_on(region, frame, r)
    return region_to_mask(region, frame)


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


def _as_region(z):
    if isinstance(z, (ConvexPolygon, Polygon, PointCloud, RasterMask)):
        return z
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    return ConvexPolygon(convex_hull(arr)) if arr.size <= 2 else PointCloud(arr)


def _single_point(z):
    if isinstance(z, ConvexPolygon) and z.vertices.size == 1:
        return complex(z.vertices[0])
    if isinstance(z, PointCloud) and np.unique(z.points).size == 1 and z.covering_radius == 0:
        return complex(z.points[0])
    return None


def _scale(z, w: complex, shift: complex = 0.0):
    if isinstance(z, (ConvexPolygon, Polygon)):
        return z.transform(w, shift)
    if isinstance(z, PointCloud):
        return PointCloud(w * z.points + shift, abs(w) * z.covering_radius)
    if isinstance(z, RasterMask):
        if w == 1:
            f = z.frame
            return RasterMask(Frame(f.origin + shift, f.cell, f.shape), z.mask)
        return PointCloud(w * z.cell_centers() + shift, abs(w) * z.cell / np.sqrt(2))
    raise TypeError(type(z).__name__)


def convex_sum(z1: ConvexPolygon, z2: ConvexPolygon) -> ConvexPolygon:
    """Exact sum of convex polygons by merging edge sequences."""
    a, b = z1.vertices, z2.vertices
    if a.size < 3 or b.size < 3:
        return ConvexPolygon(convex_hull((a[:, None] + b[None, :]).ravel()))
    ia = int(np.lexsort((a.real, a.imag))[0])
    ib = int(np.lexsort((b.real, b.imag))[0])
    a = np.roll(a, -ia)
    b = np.roll(b, -ib)
    ea = np.roll(a, -1) - a
    eb = np.roll(b, -1) - b
    ang_a = np.mod(np.angle(ea), 2 * np.pi)
    ang_b = np.mod(np.angle(eb), 2 * np.pi)
    edges = np.concatenate([ea, eb])
    order = np.argsort(np.concatenate([ang_a, ang_b]), kind="stable")
    pts = a[0] + b[0] + np.concatenate([[0], np.cumsum(edges[order])[:-1]])
    return ConvexPolygon(convex_hull(pts))


def minkowski_sum(z1, z2, resolution: int = RASTER_RESOLUTION, conservative: bool = False):
    """``{a + b : a in Z1, b in Z2}``.

    Convex polygons sum exactly; point clouds sum pairwise; otherwise have
    both regions rasterized on a shared lattice and convolved.
    """
    z1, z2 = _as_region(z1), _as_region(z2)
    p = _single_point(z1)
    if p is not None:
        return _scale(z2, 1.0, p)
    p = _single_point(z2)
    if p is not None:
        return _scale(z1, 1.0, p)
    if isinstance(z1, ConvexPolygon) and isinstance(z2, ConvexPolygon):
        return convex_sum(z1, z2)
    if isinstance(z1, PointCloud) and isinstance(z2, PointCloud):
        return PointCloud((z1.points[:, None] + z2.points[None, :]).ravel(),
                          z1.covering_radius + z2.covering_radius)
    return raster_sum([z1, z2], resolution=resolution, conservative=conservative)


def raster_sum(regions, resolution: int = RASTER_RESOLUTION, conservative: bool = False,
               cell: float | None = None) -> RasterMask:
    """Sum of several regions on one lattice (0 is a cell center)."""
    boxes = np.array([r.bbox() for r in regions])
    if cell is None:
        span = max(boxes[:, 1].sum() - boxes[:, 0].sum(), boxes[:, 3].sum() - boxes[:, 2].sum())
        cell = span / (resolution - 8)
    masks = [_to_lattice(r, cell, conservative) for r in regions]
    out = masks[0]
    for m in masks[1:]:
        out = _sum_masks(out, m, conservative)
    return _crop(out)


def _crop(m: RasterMask, margin: int = 2) -> RasterMask:
    r, c = np.nonzero(m.mask)
    if r.size == 0:
        return m
    r0, c0 = max(r.min() - margin, 0), max(c.min() - margin, 0)
    r1, c1 = min(r.max() + margin + 1, m.mask.shape[0]), min(c.max() + margin + 1, m.mask.shape[1])
    f = m.frame
    frame = Frame(f.origin + f.cell * complex(c0, r0), f.cell, (r1 - r0, c1 - c0))
    return RasterMask(frame, m.mask[r0:r1, c0:c1])


def minkowski_product(z1, z2, resolution: int = RASTER_RESOLUTION, conservative: bool = False,
                      method: str = "auto"):
    """``{a b : a in Z1, b in Z2}``.

    Zero-free convex polygons use the log-polar ribbon product and return a
    ``Polygon``; other convex inputs are rasterized; point clouds multiply
    pairwise.  ``method`` may force ``"ribbon"`` or ``"raster"``.
    """
    z1, z2 = _as_region(z1), _as_region(z2)
    for a, b in ((z1, z2), (z2, z1)):
        p = _single_point(a)
        if p is not None and method != "raster":
            if p == 0:
                return ConvexPolygon.point(0j)
            return _scale(b, p)
    if isinstance(z1, ConvexPolygon) and isinstance(z2, ConvexPolygon):
        ribbon_ok = _zero_free(z1) and _zero_free(z2) and not conservative
        if method == "ribbon" or (method == "auto" and ribbon_ok):
            r1, r2 = to_ribbon(z1), to_ribbon(z2)
            if r1.phi_max + r2.phi_max < 2 * np.pi:
                return log_polar_product(r1, r2).to_polygon()
        return product_mask(z1, z2, resolution=resolution, conservative=conservative)
    for a, b in ((z1, z2), (z2, z1)):
        if isinstance(a, (Polygon, RasterMask)) and isinstance(b, ConvexPolygon):
            return polygon_product_mask(a, b, resolution=resolution)
    c1 = _cloud_of(z1)
    c2 = _cloud_of(z2)
    pts = (c1.points[:, None] * c2.points[None, :]).ravel()
    cover = c1.covering_radius * np.abs(c2.points).max() + c2.covering_radius * np.abs(c1.points).max() \
        + c1.covering_radius * c2.covering_radius
    return PointCloud(pts, cover)


def _cloud_of(z, n: int = 400) -> PointCloud:
    if isinstance(z, PointCloud):
        return z
    if isinstance(z, RasterMask):
        return z.to_cloud()
    if isinstance(z, (ConvexPolygon, Polygon)):
        box = z.bbox()
        span = max(box[1] - box[0], box[3] - box[2], 1e-12)
        frame = Frame.covering(*box, resolution=int(np.sqrt(n)) + 8)
        return region_to_mask(z, frame).to_cloud() if span > 0 else PointCloud(z.vertices)
    raise TypeError(type(z).__name__)


def _outline_points(z, spacing: float) -> np.ndarray:
    """Boundary points of a polygon (sampled) or of a mask (boundary cell centers)."""
    if isinstance(z, RasterMask):
        return boundary_cells(z)
    return z.boundary_samples(spacing)


def polygon_product_mask(poly, conv: ConvexPolygon,
                         resolution: int = RASTER_RESOLUTION) -> RasterMask:
    """Raster of ``S C`` for a simple polygon or raster mask S and a convex polygon C.

    Copies ``b C`` for boundary points b of S are filled directly; copies
    ``w S`` for w on the boundary of C are marked by testing ``c / w`` in S
    for every cell center c in their bounding box.
    """
    x0, x1, y0, y1 = poly.bbox()
    corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])
    p = (corners[:, None] * conv.vertices[None, :]).ravel()
    frame = _frame_for((p.real.min(), p.real.max(), p.imag.min(), p.imag.max()), resolution)
    acc = Accumulator(frame)
    c = frame.cell
    pmax = max(poly.max_modulus(), 1e-300)
    spacing = FILL_STEP * c / max(conv.max_modulus(), 1e-300)
    for w in _outline_points(poly, spacing):
        q = conv.transform(w) if abs(w) > 1e-300 else ConvexPolygon.point(0j)
        if q.is_degenerate:
            q = q.offset(DEGENERATE_THICKEN * c)
        acc.add_convex(q.vertices)
    spacing = FILL_STEP * c / pmax
    ws = [w for w in conv.boundary_samples(spacing) if abs(w) >= 1e-300]
    if isinstance(poly, Polygon):
        pv = poly.vertices
        edge_pts = poly.boundary_samples(c / 2 / pmax)
        for w in ws:
            acc.add_simple(w * pv)
            acc.add_points(w * edge_pts)
        return RasterMask(frame, acc.mask())
    m = acc.mask()
    flat = m.ravel()
    xs = frame.origin.real + c * np.arange(frame.shape[1])
    ys = frame.origin.imag + c * np.arange(frame.shape[0])
    for w in ws:
        box = w * corners
        cs = np.flatnonzero((xs >= box.real.min() - c) & (xs <= box.real.max() + c))
        rs = np.flatnonzero((ys >= box.imag.min() - c) & (ys <= box.imag.max() + c))
        if cs.size == 0 or rs.size == 0:
            continue
        ctr = xs[cs][None, :] + 1j * ys[rs][:, None]
        inside = poly.contains((ctr / w).ravel(), tol=0.0)
        idx = (rs[:, None] * frame.shape[1] + cs[None, :]).ravel()
        flat[idx[inside]] = True
    return RasterMask(frame, m)


def star_shaped_probe(m: RasterMask, center: complex = 0j, n_rays: int = 720,
                      tol_cells: float = 0.0) -> dict:
    """Ray-membership scan: along each ray from ``center`` the mask should be
    an initial segment.  Reports the number of rays that re-enter the mask.

    A gap only counts when one of its samples lies more than ``tol_cells``
    cells from every marked cell; shallow gaps are staircase artefacts on
    rays that run close to the boundary.
    """
    f = m.frame
    rows, cols = f.shape
    depth = ndimage.distance_transform_edt(~m.mask)
    rmax = np.abs(m.cell_centers() - center).max() + f.cell
    steps = np.arange(0, rmax, f.cell / 2)
    bad = 0
    worst = 0
    deepest = 0.0
    for th in 2 * np.pi * np.arange(n_rays) / n_rays:
        z = center + steps * np.exp(1j * th)
        hit = m.contains(z)
        if not hit.any():
            continue
        last = np.flatnonzero(hit).max()
        gap = np.flatnonzero(~hit[: last + 1])
        if not gap.size:
            continue
        r, c = f.index_of(z[gap])
        inside = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
        d = np.where(inside, depth[np.clip(r, 0, rows - 1), np.clip(c, 0, cols - 1)], np.inf).max()
        deepest = max(deepest, float(d))
        if d > tol_cells:
            bad += 1
            worst = max(worst, int(gap.size))
    return {"rays": n_rays, "violating_rays": bad, "max_gap_samples": worst,
            "max_gap_depth_cells": deepest, "tol_cells": tol_cells}
