import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodrange.errors import AngleOverflow, ContainsZero
from prodrange.minkowski import (
    LogPolarRibbon,
    log_polar_product,
    minkowski_product,
    minkowski_sum,
    product_mask,
    raster_sum,
    star_shaped_probe,
    to_ribbon,
)
from prodrange.raster import common_frame, hausdorff, iou, region_to_mask, topology
from prodrange.regions import ConvexPolygon, PointCloud, Polygon, RasterMask
from prodrange.rng import stream

disc = ConvexPolygon.disc


def random_convex(rng, n=5, zero_free=False):
    pts = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if zero_free:
        pts = pts * 0.3 + 1.5 * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return ConvexPolygon.hull(pts)


class TestSum:
    def test_identity_element(self):
        z = disc(1 + 1j, 0.5, 32)
        assert np.allclose(minkowski_sum(z, ConvexPolygon.point(0j)).vertices, z.vertices)

    def test_unit_square(self):
        s = minkowski_sum(ConvexPolygon([0, 1]), ConvexPolygon([0, 1j]))
        assert isinstance(s, ConvexPolygon)
        assert np.isclose(s.area(), 1.0)
        assert set(np.round(s.vertices, 12)) == {0, 1, 1 + 1j, 1j}

    def test_disc_radii_add(self):
        s = minkowski_sum(disc(0, 1, 256), disc(2, 0.5, 256))
        assert np.isclose(np.abs(s.vertices - 2).max(), 1.5, atol=1e-3)

    def test_contains_pairwise_sums(self, rng):
        a, b = random_convex(rng), random_convex(rng)
        s = minkowski_sum(a, b)
        pa, pb = a.sample_interior(rng, 100), b.sample_interior(rng, 100)
        assert np.all(s.contains((pa[:, None] + pb[None, :]).ravel(), tol=1e-9))

    def test_raster_sum_of_nonconvex(self, rng):
        ann = Polygon(np.exp(2j * np.pi * np.arange(64) / 64))
        m = minkowski_sum(ann, ConvexPolygon([0, 0.5]), resolution=256)
        assert isinstance(m, RasterMask)
        assert m.contains(np.array([1.5]), tol=m.cell).all()

    def test_raster_commutative(self, rng):
        a, b = random_convex(rng), random_convex(rng)
        cell = 0.02
        m1 = raster_sum([a, b], cell=cell)
        m2 = raster_sum([b, a], cell=cell)
        assert hausdorff(m1, m2) <= 1e-12


class TestRibbon:
    def test_disc_closed_form(self):
        r = to_ribbon(disc(2, 1, 1024))
        assert np.isclose(r.phi_max, np.pi / 3, atol=1e-4)
        assert np.isclose(r.rotation, -np.pi / 6, atol=1e-4)
        phi = r.xi + r.rotation
        c = np.cos(phi)
        disc_ = np.sqrt(np.maximum(4 * c ** 2 - 3, 0))
        inner = np.log(2 * c - disc_)
        outer = np.log(2 * c + disc_)
        mid = slice(50, -50)
        assert np.max(np.abs(r.r_plus[mid] - outer[mid])) <= 1e-4
        assert np.max(np.abs(r.r_minus[mid] - inner[mid])) <= 1e-3

    def test_segment(self):
        r = to_ribbon(ConvexPolygon([1, 2]))
        assert r.phi_max == 0 and np.isclose(r.r_minus[0], 0) and np.isclose(r.r_plus[0], np.log(2))

    def test_contains_zero(self):
        with pytest.raises(ContainsZero):
            to_ribbon(disc(0.5, 1, 64))

    def test_point_ribbon_is_neutral(self):
        one = to_ribbon(ConvexPolygon.point(1.0))
        r = to_ribbon(disc(2, 1, 256))
        p = log_polar_product(r, one)
        assert np.allclose(p.r_plus, r.r_plus, atol=1e-9)
        assert np.allclose(p.r_minus, r.r_minus, atol=1e-9)

    def test_rays_add(self):
        a = np.exp(0.3j)
        b = np.exp(1.1j)
        p = log_polar_product(to_ribbon(ConvexPolygon([a, 2 * a])), to_ribbon(ConvexPolygon([b, 3 * b])))
        assert p.phi_max == 0 and np.isclose(p.rotation, 1.4)
        assert np.isclose(np.exp(p.r_plus[0]), 6) and np.isclose(np.exp(p.r_minus[0]), 1)

    def test_angle_overflow(self):
        r = LogPolarRibbon(3.5, np.linspace(0, 3.5, 8), np.zeros(8), np.ones(8))
        with pytest.raises(AngleOverflow):
            log_polar_product(r, r)

    def test_ribbon_matches_raster(self):
        z1, z2 = disc(1, 0.7, 512), disc(1, 0.95, 512)
        rib = minkowski_product(z1, z2, method="ribbon")
        ras = minkowski_product(z1, z2, method="raster", resolution=512)
        assert isinstance(rib, Polygon) and isinstance(ras, RasterMask)
        rm = region_to_mask(rib, ras.frame)
        assert iou(rm, ras) >= 0.98
        assert hausdorff(rm, ras) <= 2 * ras.cell


class TestProduct:
    def test_identity_element(self):
        z = disc(1, 0.5, 32)
        assert np.allclose(minkowski_product(z, ConvexPolygon.point(1.0)).vertices, z.vertices)

    def test_cardioid(self):
        m = minkowski_product(disc(1, 1, 512), disc(1, 1, 512), resolution=512)
        assert isinstance(m, RasterMask)
        assert abs(m.max_modulus() - 4) <= 2 * m.cell
        assert m.contains(np.array([0j]), tol=m.cell).all()
        t = topology(m)
        assert t.genus == 0 and t.components == 1

    def test_cartesian_oval_against_raster_oracle(self):
        z1, z2 = disc(1, 0.5, 256), disc(1, 1.2, 256)
        m = minkowski_product(z1, z2, resolution=256)
        # oracle: fill pairwise products of dense interior samples on the same frame
        rng = stream(30, 0)
        pts = (z1.sample_interior(rng, 1500)[:, None] * z2.sample_interior(rng, 1500)[None, :]).ravel()
        from prodrange.raster import rasterize_on
        oracle = rasterize_on(pts, m.frame, radius=m.cell)
        assert iou(m, oracle) >= 0.97
        assert abs(m.max_modulus() - 1.5 * 2.2) <= 2 * m.cell

    def test_contains_pairwise_products(self, rng):
        for _ in range(5):
            a, b = random_convex(rng), random_convex(rng)
            m = minkowski_product(a, b, resolution=256)
            pa, pb = a.sample_interior(rng, 100), b.sample_interior(rng, 100)
            prods = (pa[:, None] * pb[None, :]).ravel()
            assert np.all(m.contains(prods, tol=m.cell if isinstance(m, RasterMask) else 1e-6))

    def test_conservative_contains_exact(self, rng):
        a, b = random_convex(rng), random_convex(rng)
        plain = product_mask(a, b, resolution=200)
        cons = product_mask(a, b, resolution=200, conservative=True, frame=plain.frame)
        assert np.all(cons.mask[plain.mask])
        pa, pb = a.sample_interior(rng, 100), b.sample_interior(rng, 100)
        assert np.all(cons.contains((pa[:, None] * pb[None, :]).ravel()))

    def test_commutative_raster(self, rng):
        a, b = random_convex(rng), random_convex(rng)
        m1 = minkowski_product(a, b, resolution=256)
        m2 = minkowski_product(b, a, resolution=256)
        assert hausdorff(m1, m2) <= 1.5 * m1.cell

    def test_associative_raster(self):
        a, b, c = disc(1, 0.6, 128), disc(1j, 0.5, 128), ConvexPolygon([0.5, 1 + 0.5j, 1.5])
        left = minkowski_product(minkowski_product(a, b, resolution=256), c, resolution=256)
        right = minkowski_product(a, minkowski_product(b, c, resolution=256), resolution=256)
        la = left if isinstance(left, RasterMask) else None
        f = common_frame([left, right], resolution=256)
        from prodrange.raster import resample
        L = resample(la, f) if la is not None else region_to_mask(left, f)
        R = region_to_mask(right, f) if not isinstance(right, RasterMask) else resample(right, f)
        diam = 4 * max(left.max_modulus(), right.max_modulus())
        assert hausdorff(L, R) <= 0.02 * diam

    def test_star_shaped_when_factor_contains_zero(self, rng):
        for _ in range(3):
            a = disc(0.2 * rng.standard_normal(), 1, 64)     # contains 0
            b = random_convex(rng)
            m = minkowski_product(a, b, resolution=200)
            probe = star_shaped_probe(m)
            assert probe["violating_rays"] == 0

    def test_star_probe_depth(self, rng):
        a = disc(0.1, 1, 6)                      # coarse hexagon containing 0
        b = random_convex(rng, zero_free=True)
        m = minkowski_product(a, b, resolution=256, method="raster")
        assert star_shaped_probe(m, tol_cells=1.5)["violating_rays"] == 0
        # zero-free factors: the hole around 0 is deep
        far = minkowski_product(disc(3, 1, 64), disc(3j, 1, 64), resolution=256, method="raster")
        probe = star_shaped_probe(far, tol_cells=1.5)
        assert probe["violating_rays"] > 0 and probe["max_gap_depth_cells"] > 10

    def test_point_cloud_fallback(self):
        c = PointCloud(np.array([1, 1j, -1]), covering_radius=0.1)
        p = minkowski_product(c, ConvexPolygon.point(2.0))
        assert np.allclose(sorted(p.points, key=np.angle), sorted([2, 2j, -2], key=np.angle))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_product_simply_connected_property(seed):
    rng = stream(seed, 9)
    a, b = random_convex(rng, 4), random_convex(rng, 4)
    m = minkowski_product(a, b, resolution=128)
    if isinstance(m, RasterMask):
        assert topology(m).genus == 0
    else:
        assert topology(region_to_mask(m, common_frame([m], 128))).genus == 0
