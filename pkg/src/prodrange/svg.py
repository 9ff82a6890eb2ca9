"""Minimal SVG plots: point clouds, polygon outlines, raster contours, markers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .regions import ConvexPolygon, Polygon, RasterMask

MAX_POINTS = 20_000


def mask_contours(m: RasterMask) -> list[np.ndarray]:
    """Iso-0.5 contours of a mask as complex polylines in plane coordinates."""
    padded = np.pad(m.mask.astype(float), 1)
    out = []
    f = m.frame
    for c in measure.find_contours(padded, 0.5):
        rows, cols = c[:, 0] - 1, c[:, 1] - 1
        out.append(f.origin + f.cell * (cols + 1j * rows))
    return out


@dataclass
class Figure:
    """Accumulates layers, then renders a standalone SVG document."""

    title: str = ""
    size: int = 480
    layers: list = field(default_factory=list)

    def points(self, z, color: str = "#1f77b4", r: float = 0.8):
        z = np.asarray(z, dtype=complex).ravel()
        if z.size > MAX_POINTS:
            z = z[:: int(np.ceil(z.size / MAX_POINTS))]
        self.layers.append(("points", z, color, r))

    def polyline(self, z, color: str = "#000000", closed: bool = True, dash: bool = False):
        self.layers.append(("line", np.asarray(z, dtype=complex).ravel(), color, (closed, dash)))

    def region(self, reg, color: str = "#d62728"):
        if isinstance(reg, (ConvexPolygon, Polygon)):
            self.polyline(reg.vertices, color)
        elif isinstance(reg, RasterMask):
            for c in mask_contours(reg):
                self.polyline(c, color, closed=False)
        else:
            self.points(reg.points, color)

    def markers(self, z, color: str = "#000000"):
        self.layers.append(("cross", np.asarray(z, dtype=complex).ravel(), color, None))

    def _extent(self):
        zs = [layer[1] for layer in self.layers if layer[1].size]
        if not zs:
            return -1.0, 1.0, -1.0, 1.0
        z = np.concatenate(zs)
        x0, x1, y0, y1 = z.real.min(), z.real.max(), z.imag.min(), z.imag.max()
        span = max(x1 - x0, y1 - y0, 1e-9)
        pad = 0.06 * span
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        h = span / 2 + pad
        return cx - h, cx + h, cy - h, cy + h

    def render(self) -> str:
        x0, x1, y0, y1 = self._extent()
        s = self.size
        sc = s / (x1 - x0)

        def px(z):
            return (z.real - x0) * sc, (y1 - z.imag) * sc

        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" '
                 f'viewBox="0 0 {s} {s}">',
                 f'<rect width="{s}" height="{s}" fill="white"/>']
        # axes through the origin when visible
        if x0 < 0 < x1:
            ax, _ = px(np.array(0j))
            parts.append(f'<line x1="{ax:.2f}" y1="0" x2="{ax:.2f}" y2="{s}" stroke="#bbb" stroke-width="0.5"/>')
        if y0 < 0 < y1:
            _, ay = px(np.array(0j))
            parts.append(f'<line x1="0" y1="{ay:.2f}" x2="{s}" y2="{ay:.2f}" stroke="#bbb" stroke-width="0.5"/>')
        for kind, z, color, extra in self.layers:
            xs, ys = px(z)
            if kind == "points":
                parts.append(f'<g fill="{color}" fill-opacity="0.5">')
                parts += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{extra}"/>' for a, b in zip(xs, ys)]
                parts.append("</g>")
            elif kind == "line":
                closed, dash = extra
                pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
                tag = "polygon" if closed else "polyline"
                style = ' stroke-dasharray="4,3"' if dash else ""
                parts.append(f'<{tag} points="{pts}" fill="none" stroke="{color}" '
                             f'stroke-width="1"{style}/>')
            else:
                for a, b in zip(xs, ys):
                    parts.append(f'<path d="M{a - 4:.2f},{b - 4:.2f}L{a + 4:.2f},{b + 4:.2f}'
                                 f'M{a - 4:.2f},{b + 4:.2f}L{a + 4:.2f},{b - 4:.2f}" '
                                 f'stroke="{color}" stroke-width="1.2"/>')
        if self.title:
            parts.append(f'<text x="8" y="16" font-family="sans-serif" font-size="12">'
                         f'{_escape(self.title)}</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
