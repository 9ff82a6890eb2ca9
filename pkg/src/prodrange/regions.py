"""Planar regions: convex polygons, simple polygons, point clouds, raster masks.

Points of the complex plane are stored as complex numpy arrays throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from matplotlib.path import Path

from .errors import EmptyMask, ParseError

GEOM_TOL = 1e-12


def _cross(o: complex, a: complex, b: complex) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def _interior_filter(z: np.ndarray, tol: float) -> np.ndarray:
    """Drop points strictly inside the octagon of directional extremes."""
    if z.size < 64:
        return z
    dirs = np.exp(1j * np.pi * np.arange(8) / 4)
    proj = (z[None, :] * dirs[:, None].conj()).real
    ring = z[np.argmax(proj, axis=1)]
    # extremes listed by direction angle already run counterclockwise
    keep = np.concatenate([[True], np.abs(np.diff(ring)) > 0])
    ring = ring[keep]
    if ring.size > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    if ring.size < 3:
        return z
    a, b = ring, np.roll(ring, -1)
    e = b - a
    cr = e.real[:, None] * (z.imag[None, :] - a.imag[:, None]) \
        - e.imag[:, None] * (z.real[None, :] - a.real[:, None])
    margin = tol * np.abs(e)[:, None] * max(np.abs(z).max(), 1.0)
    inside = (cr > margin).all(axis=0)
    return z[~inside]


def convex_hull(points, tol: float = GEOM_TOL) -> np.ndarray:
    """Counterclockwise hull vertices (Andrew's monotone chain).

    Collinear and duplicate points are dropped.  A single point or a segment
    is returned as one or two vertices.
    """
    z = np.unique(np.asarray(points, dtype=complex).ravel())
    if z.size == 0:
        return z
    z = _interior_filter(z, tol)
    order = np.lexsort((z.imag, z.real))
    pts = [complex(p) for p in z[order]]
    scale = max(max(abs(p) for p in pts), 1.0)
    eps = tol * scale * scale
    # merge near-duplicates
    uniq = [pts[0]]
    for p in pts[1:]:
        if abs(p - uniq[-1]) > tol * scale:
            uniq.append(p)
    pts = uniq
    if len(pts) == 1:
        return np.array(pts)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # collinear input: keep the two extremes
        ends = [pts[0], pts[-1]]
        return np.array(ends) if abs(ends[1] - ends[0]) > tol * scale else np.array(ends[:1])
    return np.array(hull)


def polygon_area(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=complex)
    if v.size < 3:
        return 0.0
    w = np.roll(v, -1)
    return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))


def edges_distance(z, v: np.ndarray, closed: bool = True) -> np.ndarray:
    """Distance from each point to the polyline through ``v``."""
    z = np.asarray(z, dtype=complex)
    if v.size == 1:
        return np.abs(z - v[0])
    ends = np.roll(v, -1) if closed else v[1:]
    starts = v if closed else v[:-1]
    out = np.full(z.shape, np.inf)
    for a, b in zip(starts, ends):
        np.minimum(out, segment_distance(z, a, b), out=out)
    return out


def segment_distance(z, a: complex, b: complex) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    d = b - a
    if abs(d) == 0:
        return np.abs(z - a)
    t = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * d))


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices.

    One vertex encodes a point and two encode a segment.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex).ravel()
        if v.size == 0:
            raise EmptyMask("polygon needs at least one vertex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def hull(cls, points) -> "ConvexPolygon":
        return cls(convex_hull(points))

    @classmethod
    def point(cls, z: complex) -> "ConvexPolygon":
        return cls(np.array([complex(z)]))

    @classmethod
    def disc(cls, center: complex, radius: float, n: int = 256,
             outer: bool = False) -> "ConvexPolygon":
        """Regular n-gon approximation of a disc; ``outer`` circumscribes it."""
        t = 2 * np.pi * np.arange(n) / n
        r = radius / np.cos(np.pi / n) if outer else radius
        return cls(center + r * np.exp(1j * t))

    @property
    def kind(self) -> str:
        return {1: "point", 2: "segment"}.get(self.vertices.size, "polygon")

    @property
    def is_degenerate(self) -> bool:
        return self.vertices.size < 3

    def area(self) -> float:
        return polygon_area(self.vertices)

    def bbox(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return v.real.min(), v.real.max(), v.imag.min(), v.imag.max()

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.vertices)))

    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.abs(v[:, None] - v[None, :])))

    def transform(self, scale: complex = 1.0, shift: complex = 0.0) -> "ConvexPolygon":
        v = complex(scale) * self.vertices + complex(shift)
        if scale == 0:
            return ConvexPolygon.point(shift)
        return ConvexPolygon(v)

    def signed_distance(self, z) -> np.ndarray:
        """Positive inside, negative outside (distance to the boundary)."""
        z = np.asarray(z, dtype=complex)
        v = self.vertices
        if v.size == 1:
            return -np.abs(z - v[0])
        if v.size == 2:
            return -segment_distance(z, v[0], v[1])
        dist = edges_distance(z, v)
        inside = np.ones(z.shape, dtype=bool)
        for a, b in zip(v, np.roll(v, -1)):
            e = b - a
            inside &= e.real * (z.imag - a.imag) - e.imag * (z.real - a.real) >= 0.0
        return np.where(inside, dist, -dist)

    def contains(self, z, tol: float = 1e-9) -> np.ndarray:
        return self.signed_distance(z) >= -tol

    def boundary_samples(self, spacing: float) -> np.ndarray:
        """Points along the boundary with gaps at most ``spacing``."""
        v = self.vertices
        if v.size == 1:
            return v.copy()
        out = []
        edges = list(zip(v, np.roll(v, -1))) if v.size > 2 else [(v[0], v[1])]
        for a, b in edges:
            k = max(1, int(np.ceil(abs(b - a) / spacing)))
            out.append(a + (b - a) * np.arange(k) / k)
        if v.size == 2:
            out.append(np.array([v[1]]))
        return np.concatenate(out)

    def offset(self, d: float) -> "ConvexPolygon":
        """Convex superset of the ``d``-neighbourhood (mitered offset)."""
        if d <= 0:
            return self
        v = self.vertices
        if v.size == 1:
            return ConvexPolygon(v[0] + d * np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]))
        if v.size == 2:
            u = (v[1] - v[0]) / abs(v[1] - v[0])
            n = 1j * u
            return ConvexPolygon(np.array([
                v[0] - d * u - d * n, v[1] + d * u - d * n,
                v[1] + d * u + d * n, v[0] - d * u + d * n]))
        return ConvexPolygon(v + d * self.miter_directions())

    def miter_directions(self) -> np.ndarray:
        """Vectors m with ``offset(d).vertices == vertices + d * m`` (three or more vertices)."""
        v = self.vertices
        w = np.roll(v, -1)
        e = (w - v) / np.abs(w - v)
        out_n = -1j * e                      # outward normal for CCW
        f = np.roll(e, 1)
        q = np.roll(out_n, 1)
        # vertex i sits between edge i-1 (normal q) and edge i (normal out_n)
        den = f.real * e.imag - f.imag * e.real
        s = ((out_n - q).real * e.imag - (out_n - q).imag * e.real) / np.where(den == 0, 1, den)
        return np.where(np.abs(den) < 1e-12, out_n, q + s * f)

    def sample_interior(self, rng: np.random.Generator, n: int) -> np.ndarray:
        v = self.vertices
        if v.size == 1:
            return np.full(n, v[0])
        if v.size == 2:
            return v[0] + (v[1] - v[0]) * rng.random(n)
        tri_a = np.array([polygon_area([v[0], v[i], v[i + 1]]) for i in range(1, v.size - 1)])
        idx = rng.choice(tri_a.size, size=n, p=tri_a / tri_a.sum())
        r1, r2 = rng.random(n), rng.random(n)
        flip = r1 + r2 > 1
        r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
        return v[0] + r1 * (v[idx + 1] - v[0]) + r2 * (v[idx + 2] - v[0])


@dataclass(frozen=True)
class Polygon:
    """Simple (possibly non-convex) polygon given by its boundary loop."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex).ravel()
        if v.size == 0:
            raise EmptyMask("polygon needs at least one vertex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def area(self) -> float:
        return abs(polygon_area(self.vertices))

    def bbox(self):
        v = self.vertices
        return v.real.min(), v.real.max(), v.imag.min(), v.imag.max()

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.vertices)))

    def transform(self, scale: complex = 1.0, shift: complex = 0.0) -> "Polygon":
        return Polygon(complex(scale) * self.vertices + complex(shift))

    def path(self) -> Path:
        v = self.vertices
        return Path(np.column_stack([v.real, v.imag]), closed=False)

    def boundary_distance(self, z) -> np.ndarray:
        return edges_distance(z, self.vertices)

    def contains(self, z, tol: float = 1e-9) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        shape, z = z.shape, z.ravel()
        if self.vertices.size < 3:
            return (self.boundary_distance(z) <= tol).reshape(shape)
        inside = self.path().contains_points(np.column_stack([z.real, z.imag]))
        return (inside | (self.boundary_distance(z) <= tol)).reshape(shape)

    def boundary_samples(self, spacing: float) -> np.ndarray:
        v = self.vertices
        if v.size == 1:
            return v.copy()
        out = []
        for a, b in zip(v, np.roll(v, -1)):
            k = max(1, int(np.ceil(abs(b - a) / spacing)))
            out.append(a + (b - a) * np.arange(k) / k)
        return np.concatenate(out)


@dataclass(frozen=True)
class PointCloud:
    """Finite sample of a region.

    ``covering_radius`` is a known bound on how far any point of the sampled
    set can be from the nearest sample (0 when unknown).
    """

    points: np.ndarray
    covering_radius: float = 0.0

    def __post_init__(self):
        p = np.array(self.points, dtype=complex).ravel()
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def bbox(self):
        p = self.points
        return p.real.min(), p.real.max(), p.imag.min(), p.imag.max()

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.points)))

    def hull(self) -> ConvexPolygon:
        return ConvexPolygon.hull(self.points)


@dataclass(frozen=True)
class Frame:
    """Uniform grid; cell (row, col) is centred at ``origin + cell*(col + 1j*row)``."""

    origin: complex
    cell: float
    shape: tuple[int, int]      # (rows, cols)

    def __post_init__(self):
        if not self.cell > 0:
            raise ValueError("cell size must be positive")
        object.__setattr__(self, "origin", complex(self.origin))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    @classmethod
    def covering(cls, xmin, xmax, ymin, ymax, resolution: int = 512,
                 margin: int = 4, anchor_zero: bool = True, cell: float | None = None):
        """Square cells, ``resolution`` cells across the longer side plus a margin.

        With ``anchor_zero`` the lattice contains 0 as a cell center.
        """
        span = max(xmax - xmin, ymax - ymin, 1e-12)
        c = cell if cell is not None else span / max(resolution - 2 * margin - 1, 1)
        if anchor_zero:
            x0 = (np.floor(xmin / c) - margin) * c
            y0 = (np.floor(ymin / c) - margin) * c
        else:
            x0 = xmin - margin * c
            y0 = ymin - margin * c
        cols = int(np.ceil((xmax - x0) / c)) + margin + 1
        rows = int(np.ceil((ymax - y0) / c)) + margin + 1
        return cls(complex(x0, y0), float(c), (rows, cols))

    def centers(self) -> np.ndarray:
        r, c = self.shape
        xs = self.origin.real + self.cell * np.arange(c)
        ys = self.origin.imag + self.cell * np.arange(r)
        return xs[None, :] + 1j * ys[:, None]

    def index_of(self, z) -> tuple[np.ndarray, np.ndarray]:
        """(row, col) of the cell containing each point (may be out of range)."""
        z = np.asarray(z, dtype=complex)
        col = np.floor((z.real - self.origin.real) / self.cell + 0.5).astype(np.int64)
        row = np.floor((z.imag - self.origin.imag) / self.cell + 0.5).astype(np.int64)
        return row, col


@dataclass(frozen=True)
class RasterMask:
    frame: Frame
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.shape != self.frame.shape:
            raise ValueError(f"mask shape {m.shape} does not match frame {self.frame.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def cell(self) -> float:
        return self.frame.cell

    def area(self) -> float:
        return float(self.mask.sum()) * self.cell ** 2

    def cell_centers(self) -> np.ndarray:
        r, c = np.nonzero(self.mask)
        f = self.frame
        return f.origin + f.cell * (c + 1j * r)

    def bbox(self):
        z = self.cell_centers()
        if z.size == 0:
            raise EmptyMask("empty mask")
        h = self.cell / 2
        return z.real.min() - h, z.real.max() + h, z.imag.min() - h, z.imag.max() + h

    def max_modulus(self) -> float:
        z = self.cell_centers()
        return float(np.abs(z).max()) if z.size else 0.0

    def contains(self, z, tol: float = 0.0) -> np.ndarray:
        """Whether each point lies in a marked cell or within ``tol`` of one."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        f = self.frame
        row, col = f.index_of(z)
        rows, cols = f.shape
        k = int(np.ceil(tol / f.cell)) if tol > 0 else 0
        out = np.zeros(z.shape, dtype=bool)
        for dr in range(-k, k + 1):
            for dc in range(-k, k + 1):
                rr, cc = row + dr, col + dc
                ok = (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
                hit = np.zeros(z.shape, dtype=bool)
                hit[ok] = self.mask[rr[ok], cc[ok]]
                if dr or dc:
                    ctr = f.origin + f.cell * (cc + 1j * rr)
                    gx = np.maximum(np.abs(z.real - ctr.real) - f.cell / 2, 0.0)
                    gy = np.maximum(np.abs(z.imag - ctr.imag) - f.cell / 2, 0.0)
                    hit &= np.hypot(gx, gy) <= tol
                out |= hit
        return out

    def to_cloud(self) -> PointCloud:
        return PointCloud(self.cell_centers(), covering_radius=self.cell / np.sqrt(2))


Region = Union[ConvexPolygon, Polygon, PointCloud, RasterMask]


def region_bbox(z: Region):
    return z.bbox()


def is_point(z: Region) -> bool:
    return isinstance(z, ConvexPolygon) and z.vertices.size == 1


# --------------------------------------------------------------------------
# JSON tagged union
# --------------------------------------------------------------------------


def _pairs(z) -> list:
    return [[float(p.real), float(p.imag)] for p in np.ravel(z)]


def region_to_json(z: Region) -> dict:
    if isinstance(z, (ConvexPolygon, Polygon)):
        out = {"polygon": _pairs(z.vertices)}
        if isinstance(z, ConvexPolygon):
            out["convex"] = True
        return out
    if isinstance(z, PointCloud):
        return {"points": _pairs(z.points), "covering_radius": z.covering_radius}
    if isinstance(z, RasterMask):
        f = z.frame
        return {"raster": {
            "origin": [f.origin.real, f.origin.imag],
            "cell": f.cell,
            "rows": ["".join("1" if b else "0" for b in row) for row in z.mask],
        }}
    raise TypeError(f"not a region: {type(z).__name__}")


def region_from_json(obj: dict, path: str = "<region>") -> Region:
    try:
        if "polygon" in obj:
            v = np.array([complex(a, b) for a, b in obj["polygon"]])
            if obj.get("convex", False):
                return ConvexPolygon(v)
            hull = convex_hull(v)
            if hull.size == np.unique(v).size and abs(polygon_area(hull) - abs(polygon_area(v))) <= 1e-12 * max(1.0, abs(polygon_area(hull))):
                return ConvexPolygon(hull)
            return Polygon(v)
        if "points" in obj:
            v = np.array([complex(a, b) for a, b in obj["points"]])
            return PointCloud(v, float(obj.get("covering_radius", 0.0)))
        if "raster" in obj:
            r = obj["raster"]
            rows = r["rows"]
            m = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
            f = Frame(complex(*r["origin"]), float(r["cell"]), m.shape)
            return RasterMask(f, m)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed region: {exc}") from exc
    raise ParseError(path, "region must have one of the keys polygon, points, raster")
