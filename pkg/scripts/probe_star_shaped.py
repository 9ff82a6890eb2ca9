"""Numerical probe: are products of two convex polygons star-shaped?

Two groups of random pairs are rastered and scanned along rays:

* one factor contains 0, so the product is star-shaped about 0 and the scan
  measures the raster false-positive rate;
* both factors avoid 0, where no centre is known in advance.  Candidate
  centres (the product of the factor centroids, the mask centroid and random
  marked cells) are tried until one passes.

A gap shallower than ``tol`` cells is treated as staircase noise.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from prodrange.minkowski import minkowski_product, star_shaped_probe
from prodrange.regions import ConvexPolygon, RasterMask
from prodrange.rng import stream


@dataclass
class ProbeRun:
    pairs: int = 40
    resolution: int = 256
    vertices: int = 6
    candidates: int = 24
    rays: int = 360
    tol: float = 1.5
    seed: int = 0


def _random_polygon(rng, n, shift):
    return ConvexPolygon.hull(shift + rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _centres(rng, a, b, m: RasterMask, k):
    cells = m.cell_centers()
    yield a.vertices.mean() * b.vertices.mean()
    yield cells.mean()
    yield from cells[rng.choice(cells.size, size=min(k, cells.size), replace=False)]


def main(cfg: ProbeRun) -> None:
    rng = stream(cfg.seed, 0)
    with_zero = {"n": 0, "fail": 0}
    zero_free = {"n": 0, "found": 0, "tries": []}
    while with_zero["n"] < cfg.pairs or zero_free["n"] < cfg.pairs:
        a = _random_polygon(rng, cfg.vertices, 0.0)
        b = _random_polygon(rng, cfg.vertices, rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3))
        if a.is_degenerate or b.is_degenerate:
            continue
        zero = np.array([0j])
        has_zero = bool(a.contains(zero)[0] or b.contains(zero)[0])
        group = with_zero if has_zero else zero_free
        if group["n"] >= cfg.pairs:
            continue
        m = minkowski_product(a, b, resolution=cfg.resolution, method="raster")
        group["n"] += 1
        if has_zero:
            probe = star_shaped_probe(m, 0j, cfg.rays, cfg.tol)
            with_zero["fail"] += probe["violating_rays"] > 0
            continue
        for i, c in enumerate(_centres(rng, a, b, m, cfg.candidates), 1):
            if star_shaped_probe(m, c, cfg.rays, cfg.tol)["violating_rays"] == 0:
                zero_free["found"] += 1
                zero_free["tries"].append(i)
                break
    print(f"origin in a factor : {with_zero['fail']}/{with_zero['n']} fail the scan about 0")
    tries = zero_free["tries"]
    print(f"zero-free factors  : star centre found for {zero_free['found']}/{zero_free['n']}"
          + (f", median candidate index {int(np.median(tries))}" if tries else ""))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, v in vars(ProbeRun()).items():
        ap.add_argument(f"--{f}", type=type(v), default=v)
    raise SystemExit(main(ProbeRun(**vars(ap.parse_args()))))
