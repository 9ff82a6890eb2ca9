"""Rasterization, topology and distances of planar regions.

Foreground is 4-connected and background 8-connected, which keeps the
Euler relation ``components - holes = V - E + F`` exact on the cell complex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import EmptyMask, ParseError
from .regions import (
    ConvexPolygon,
    Frame,
    PointCloud,
    Polygon,
    RasterMask,
    convex_hull,
)

CROSS = ndimage.generate_binary_structure(2, 1)
SQUARE = ndimage.generate_binary_structure(2, 2)
CONVEX_RATIO = 0.995


def common_frame(regions, resolution: int = 512, margin: int = 4,
                 cell: float | None = None) -> Frame:
    boxes = np.array([r.bbox() for r in regions], dtype=float)
    return Frame.covering(boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(),
                          boxes[:, 3].max(), resolution=resolution, margin=margin, cell=cell)


# --------------------------------------------------------------------------
# Filling
# --------------------------------------------------------------------------


class Accumulator:
    """Row-wise difference array; many convex fills are combined cheaply."""

    def __init__(self, frame: Frame):
        self.frame = frame
        rows, cols = frame.shape
        self.diff = np.zeros((rows, cols + 1), dtype=np.int32)

    def add_convex(self, verts: np.ndarray, eps: float = 1e-9):
        """Mark cells whose centers lie in the convex polygon ``verts`` (CCW)."""
        f = self.frame
        v = (np.asarray(verts, dtype=complex) - f.origin) / f.cell
        rows, cols = f.shape
        if v.size < 3:
            return
        y = v.imag
        lo, hi = int(np.argmin(y)), int(np.argmax(y))
        r0 = max(int(np.ceil(y[lo] - eps)), 0)
        r1 = min(int(np.floor(y[hi] + eps)), rows - 1)
        if r1 < r0:
            return
        n = v.size
        # CCW: lo -> hi runs along the right chain, hi -> lo along the left chain
        right = v[[(lo + k) % n for k in range((hi - lo) % n + 1)]]
        left = v[[(hi + k) % n for k in range((lo - hi) % n + 1)]][::-1]
        ys = np.arange(r0, r1 + 1, dtype=float)
        xr = _chain_x(right, ys, "right")
        xl = _chain_x(left, ys, "left")
        c0 = np.maximum(np.ceil(np.minimum(xl, xr) - eps), 0).astype(np.int64)
        c1 = np.minimum(np.floor(np.maximum(xl, xr) + eps), cols - 1).astype(np.int64)
        ok = c1 >= c0
        rr = ys.astype(np.int64)[ok]
        # rows are distinct within one polygon, so plain fancy indexing is safe
        self.diff[rr, c0[ok]] += 1
        self.diff[rr, c1[ok] + 1] -= 1

    def add_convex_batch(self, verts: np.ndarray, eps: float = 1e-9, chunk: int = 512):
        """``add_convex`` for a stack of convex polygons, shape (P, n), n >= 3."""
        v = np.asarray(verts, dtype=complex)
        if v.ndim != 2 or v.shape[1] < 3:
            raise ValueError("need an array of shape (P, n) with n >= 3")
        for s in range(0, v.shape[0], chunk):
            self._convex_batch(v[s:s + chunk], eps)

    def _convex_batch(self, verts, eps):
        f = self.frame
        rows, cols = f.shape
        v = (verts - f.origin) / f.cell
        p_count, n = v.shape
        a = v.ravel()
        b = np.roll(v, -1, axis=1).ravel()
        pid = np.repeat(np.arange(p_count), n)
        ya, yb = a.imag, b.imag
        lo = np.maximum(np.ceil(np.minimum(ya, yb) - eps), 0).astype(np.int64)
        hi = np.minimum(np.floor(np.maximum(ya, yb) + eps), rows - 1).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total == 0:
            return
        e = np.repeat(np.arange(a.size), cnt)
        j = lo[e] + np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        dy = yb[e] - ya[e]
        flat = np.abs(dy) < 1e-12
        t = np.clip((j - ya[e]) / np.where(flat, 1.0, dy), 0.0, 1.0)
        t[flat] = 0.0
        x = a.real[e] + t * (b.real[e] - a.real[e])
        # a horizontal edge covers the whole stretch between its ends
        xs = np.concatenate([x, b.real[e][flat]])
        ps = np.concatenate([pid[e], pid[e][flat]])
        js = np.concatenate([j, j[flat]])
        j0 = int(js.min())
        span = int(js.max()) - j0 + 1
        left = np.full((p_count, span), np.inf)
        right = np.full((p_count, span), -np.inf)
        np.minimum.at(left, (ps, js - j0), xs)
        np.maximum.at(right, (ps, js - j0), xs)
        hit = np.isfinite(left)
        r = np.nonzero(hit)[1] + j0
        c0 = np.maximum(np.ceil(left[hit] - eps), 0).astype(np.int64)
        c1 = np.minimum(np.floor(right[hit] + eps), cols - 1).astype(np.int64)
        ok = c1 >= c0
        width = cols + 1
        size = rows * width
        self.diff += (np.bincount(r[ok] * width + c0[ok], minlength=size)
                      - np.bincount(r[ok] * width + c1[ok] + 1, minlength=size)
                      ).reshape(rows, width).astype(np.int32)

    def add_simple(self, verts: np.ndarray, eps: float = 1e-9):
        """Even-odd scanline fill of a closed polygon by cell centers."""
        f = self.frame
        rows, cols = f.shape
        a = (np.asarray(verts, dtype=complex) - f.origin) / f.cell
        if a.size < 3:
            return
        b = np.roll(a, -1)
        ya, yb = a.imag, b.imag
        lo = np.maximum(np.ceil(np.minimum(ya, yb)), 0).astype(np.int64)
        hi = np.minimum(np.ceil(np.maximum(ya, yb)) - 1, rows - 1).astype(np.int64)
        cnt = np.where(ya != yb, np.maximum(hi - lo + 1, 0), 0)
        total = int(cnt.sum())
        if total == 0:
            return
        e = np.repeat(np.arange(a.size), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        j = lo[e] + offs
        t = (j - ya[e]) / (yb[e] - ya[e])
        x = a.real[e] + t * (b.real[e] - a.real[e])
        order = np.lexsort((x, j))
        j, x = j[order], x[order]
        # half-open row rule gives an even crossing count on every row
        jl, xl, xr = j[0::2], x[0::2], x[1::2]
        c0 = np.maximum(np.ceil(xl - eps), 0).astype(np.int64)
        c1 = np.minimum(np.floor(xr + eps), cols - 1).astype(np.int64)
        ok = c1 >= c0
        np.add.at(self.diff, (jl[ok], c0[ok]), 1)
        np.add.at(self.diff, (jl[ok], c1[ok] + 1), -1)

    def add_points(self, z):
        f = self.frame
        row, col = f.index_of(np.asarray(z, dtype=complex))
        rows, cols = f.shape
        ok = (row >= 0) & (row < rows) & (col >= 0) & (col < cols)
        np.add.at(self.diff, (row[ok], col[ok]), 1)
        np.add.at(self.diff, (row[ok], col[ok] + 1), -1)

    def mask(self) -> np.ndarray:
        return np.cumsum(self.diff, axis=1)[:, :-1] > 0


def _chain_x(chain: np.ndarray, ys: np.ndarray, side: str) -> np.ndarray:
    """x of a y-monotone chain at heights ``ys``; flat runs take the outer end."""
    y = np.maximum.accumulate(chain.imag)
    x = chain.real
    yu, start = np.unique(y, return_index=True)
    if yu.size != y.size:
        red = np.maximum if side == "right" else np.minimum
        x = red.reduceat(x, start)
    return np.interp(ys, yu, x)


def fill_convex(poly: ConvexPolygon, frame: Frame, thicken: float = 0.0) -> np.ndarray:
    """Cell-center fill; degenerate polygons are thickened to ``thicken`` cells."""
    acc = Accumulator(frame)
    p = poly
    if p.is_degenerate or thicken > 0:
        p = p.offset(max(thicken, 0.75 if p.is_degenerate else 0.0) * frame.cell)
    acc.add_convex(p.vertices)
    return acc.mask()


def fill_polygon(poly: Polygon, frame: Frame) -> np.ndarray:
    """Even-odd fill of a simple polygon by cell centers, boundary-inclusive."""
    acc = Accumulator(frame)
    acc.add_simple(poly.vertices)
    # thin parts may slip between centers; mark every cell holding a boundary sample
    acc.add_points(poly.boundary_samples(frame.cell / 2))
    return acc.mask()


def region_to_mask(region, frame: Frame, radius: float | None = None) -> RasterMask:
    if isinstance(region, RasterMask):
        return resample(region, frame)
    if isinstance(region, ConvexPolygon):
        return RasterMask(frame, fill_convex(region, frame))
    if isinstance(region, Polygon):
        return RasterMask(frame, fill_polygon(region, frame))
    if isinstance(region, PointCloud):
        return rasterize_on(region, frame, radius)
    raise TypeError(f"not a region: {type(region).__name__}")


def resample(m: RasterMask, frame: Frame) -> RasterMask:
    """Nearest-cell resampling onto another frame."""
    if m.frame == frame:
        return m
    inside = m.contains(frame.centers().ravel())
    return RasterMask(frame, inside.reshape(frame.shape))


# --------------------------------------------------------------------------
# Point clouds
# --------------------------------------------------------------------------


def median_spacing(points: np.ndarray) -> float:
    """Median nearest-neighbour distance of distinct points."""
    z = np.unique(np.asarray(points, dtype=complex))
    if z.size < 2:
        return 0.0
    sub = z
    if z.size > 200_000:
        sub = z[:: int(np.ceil(z.size / 200_000))]
    xy = np.column_stack([z.real, z.imag])
    tree = cKDTree(xy)
    d, _ = tree.query(np.column_stack([sub.real, sub.imag]), k=2)
    return float(np.median(d[:, 1]))


def rasterize_on(cloud, frame: Frame, radius: float | None = None,
                 supersample: int = 3) -> RasterMask:
    """Mark cells covered by the cloud thickened by ``radius`` (plane units).

    Points are binned on an odd supersampled grid; a cell is marked when its
    center is within ``radius`` of a marked subcell center or when it holds a
    point itself.  ``radius=None`` uses 1.5x the median sample spacing.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=complex)
    pts = np.atleast_1d(pts)
    if pts.size == 0:
        raise EmptyMask("empty point cloud")
    if radius is None:
        radius = 1.5 * median_spacing(pts)
    acc = Accumulator(frame)
    acc.add_points(pts)
    coarse = acc.mask()
    if radius <= 0:
        return RasterMask(frame, coarse)
    s = int(supersample) | 1
    sub = Frame(frame.origin - frame.cell * (s // 2) / s * (1 + 1j), frame.cell / s,
                (frame.shape[0] * s, frame.shape[1] * s))
    acc_s = Accumulator(sub)
    acc_s.add_points(pts)
    fine = acc_s.mask()
    # distance (subcells) from each subcell center to the nearest marked subcell center
    dist = ndimage.distance_transform_edt(~fine)
    thr = radius / sub.cell + 0.71
    # coarse cell centers are subcells with index (r*s + s//2, c*s + s//2)
    near = dist[s // 2::s, s // 2::s] <= thr
    return RasterMask(frame, near | coarse)


def rasterize(cloud, resolution: int = 512, dilation_radius: float | None = None,
              frame: Frame | None = None) -> RasterMask:
    """Raster mask of a point cloud.

    ``dilation_radius`` is in cells; by default 1.5x the median nearest
    neighbour spacing.  A cloud carrying a covering radius is thickened by at
    least that much.
    """
    if resolution < 32:
        raise ValueError("resolution must be at least 32")
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_1d(np.asarray(cloud, dtype=complex))
    if pts.size == 0:
        raise EmptyMask("empty point cloud")
    if frame is None:
        frame = Frame.covering(pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max(),
                               resolution=resolution)
    if dilation_radius is None:
        radius = 1.5 * median_spacing(pts)
    else:
        radius = dilation_radius * frame.cell
    if isinstance(cloud, PointCloud):
        radius = max(radius, cloud.covering_radius)
    return rasterize_on(pts, frame, radius)


# --------------------------------------------------------------------------
# Topology
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionTopology:
    components: int
    genus: int
    is_convex: bool
    resolution: tuple[int, int]
    hull_area_ratio: float
    euler: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "components": self.components,
            "genus": self.genus,
            "is_convex": self.is_convex,
            "resolution": list(self.resolution),
            "hull_area_ratio": self.hull_area_ratio,
            "euler": self.euler,
            "diagnostics": self.diagnostics,
        }


def euler_characteristic(mask: np.ndarray) -> int:
    """``V - E + F`` of the complex with cells as vertices and 4-adjacency edges.

    Faces are the fully marked 2x2 blocks; with 4-connected foreground this
    equals components minus holes.
    """
    m = np.asarray(mask, dtype=bool)
    v = int(m.sum())
    e = int((m[:, 1:] & m[:, :-1]).sum() + (m[1:, :] & m[:-1, :]).sum())
    f = int((m[1:, 1:] & m[1:, :-1] & m[:-1, 1:] & m[:-1, :-1]).sum())
    return v - e + f


def _holes(component: np.ndarray) -> int:
    pad = np.pad(component, 1)
    _, n = ndimage.label(~pad, structure=SQUARE)
    return n - 1


def hull_area_ratio(mask: np.ndarray) -> float:
    r, c = np.nonzero(mask)
    if r.size == 0:
        return 0.0
    hull = convex_hull(c + 1j * r, tol=1e-12)
    poly = ConvexPolygon(hull)
    if poly.is_degenerate:
        return 1.0
    r0, r1, c0, c1 = r.min(), r.max(), c.min(), c.max()
    rr, cc = np.mgrid[r0:r1 + 1, c0:c1 + 1]
    frame = Frame(complex(c0, r0), 1.0, rr.shape)
    inhull = fill_convex_exact(poly, frame)
    return float(mask[r0:r1 + 1, c0:c1 + 1][inhull].sum() / max(inhull.sum(), 1))


def fill_convex_exact(poly: ConvexPolygon, frame: Frame) -> np.ndarray:
    acc = Accumulator(frame)
    acc.add_convex(poly.vertices)
    return acc.mask()


def topology(mask: RasterMask | np.ndarray) -> RegionTopology:
    """Components, genus and convexity of a raster mask.

    Genus counts the holes of the largest 4-connected component; holes of
    other components are listed in ``diagnostics``.
    """
    m = mask.mask if isinstance(mask, RasterMask) else np.asarray(mask, dtype=bool)
    if not m.any():
        raise EmptyMask("topology of an empty mask")
    labels, n = ndimage.label(m, structure=CROSS)
    sizes = np.bincount(labels.ravel())[1:]
    biggest = int(np.argmax(sizes)) + 1
    per = [_holes(labels[sl] == k) for k, sl in enumerate(ndimage.find_objects(labels), 1)]
    genus = per[biggest - 1]
    ratio = hull_area_ratio(m)
    euler = euler_characteristic(m)
    return RegionTopology(
        components=int(n),
        genus=int(genus),
        is_convex=bool(ratio >= CONVEX_RATIO and genus == 0 and n == 1),
        resolution=tuple(m.shape),
        hull_area_ratio=ratio,
        euler=euler,
        diagnostics={"component_sizes": sizes.tolist(), "component_genus": per,
                     "total_holes": int(sum(per))},
    )


# --------------------------------------------------------------------------
# Distances
# --------------------------------------------------------------------------


def _on_common(a: RasterMask, b: RasterMask):
    if a.frame == b.frame:
        return a, b
    cell = min(a.cell, b.cell)
    ba, bb = a.bbox(), b.bbox()
    frame = Frame.covering(min(ba[0], bb[0]), max(ba[1], bb[1]), min(ba[2], bb[2]),
                           max(ba[3], bb[3]), cell=cell, margin=2, anchor_zero=True)
    return resample(a, frame), resample(b, frame)


def hausdorff(a: RasterMask, b: RasterMask) -> float:
    """Symmetric Hausdorff distance between the cell-center sets."""
    a, b = _on_common(a, b)
    if not a.mask.any() or not b.mask.any():
        raise EmptyMask("Hausdorff distance of an empty mask")
    da = ndimage.distance_transform_edt(~a.mask)
    db = ndimage.distance_transform_edt(~b.mask)
    return float(max(db[a.mask].max(), da[b.mask].max()) * a.cell)


def iou(a: RasterMask, b: RasterMask) -> float:
    a, b = _on_common(a, b)
    inter = np.logical_and(a.mask, b.mask).sum()
    union = np.logical_or(a.mask, b.mask).sum()
    return float(inter / union) if union else 1.0


def cloud_hausdorff(p, q) -> float:
    """Hausdorff distance between two finite point sets."""
    p = np.asarray(p, dtype=complex).ravel()
    q = np.asarray(q, dtype=complex).ravel()
    tp = cKDTree(np.column_stack([p.real, p.imag]))
    tq = cKDTree(np.column_stack([q.real, q.imag]))
    d1, _ = tq.query(np.column_stack([p.real, p.imag]))
    d2, _ = tp.query(np.column_stack([q.real, q.imag]))
    return float(max(d1.max(), d2.max()))


def distance_to_mask(m: RasterMask, z) -> np.ndarray:
    """Distance from each point to the nearest marked cell center."""
    c = m.cell_centers()
    if c.size == 0:
        raise EmptyMask("distance to an empty mask")
    tree = cKDTree(np.column_stack([c.real, c.imag]))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d, _ = tree.query(np.column_stack([z.real, z.imag]))
    return d


def boundary_cells(m: RasterMask) -> np.ndarray:
    """Centers of foreground cells with a 4-neighbour in the background."""
    mask = m.mask
    inner = ndimage.binary_erosion(mask, structure=CROSS, border_value=0)
    edge = mask & ~inner
    r, c = np.nonzero(edge)
    return m.frame.origin + m.cell * (c + 1j * r)


# --------------------------------------------------------------------------
# PBM with JSON header
# --------------------------------------------------------------------------


def write_pbm(m: RasterMask, path) -> None:
    """Plain PBM (P1).  The first comment line holds the frame as JSON.

    Image row 0 is the top (largest imaginary part).
    """
    f = m.frame
    header = {"origin": [f.origin.real, f.origin.imag], "cell": f.cell}
    rows, cols = f.shape
    lines = ["P1", "# " + json.dumps(header, sort_keys=True), f"{cols} {rows}"]
    for row in m.mask[::-1]:
        lines.append(" ".join("1" if b else "0" for b in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pbm(path) -> RasterMask:
    try:
        with open(path) as fh:
            text = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    if not text or text[0].strip() != "P1":
        raise ParseError(str(path), "not a plain PBM file")
    header = None
    body = []
    for line in text[1:]:
        s = line.strip()
        if s.startswith("#"):
            if header is None:
                try:
                    header = json.loads(s[1:])
                except json.JSONDecodeError as exc:
                    raise ParseError(str(path), f"bad JSON header: {exc}") from exc
            continue
        if s:
            body.append(s)
    if header is None:
        raise ParseError(str(path), "missing JSON frame header")
    try:
        cols, rows = (int(t) for t in body[0].split())
        bits = "".join(body[1:]).replace(" ", "")
        if len(bits) != rows * cols or set(bits) - {"0", "1"}:
            raise ValueError("pixel data does not match the declared size")
        arr = np.array([b == "1" for b in bits], dtype=bool).reshape(rows, cols)[::-1]
        frame = Frame(complex(*header["origin"]), float(header["cell"]), (rows, cols))
    except (ValueError, KeyError, IndexError) as exc:
        raise ParseError(str(path), str(exc)) from exc
    return RasterMask(frame, arr)
