import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodrange import catalog
from prodrange.errors import DimensionMismatch, NotHermitian, NotProductDiagonal
from prodrange.linalg import ComplexMatrix, apply_local_unitary, identity
from prodrange.minkowski import raster_sum
from prodrange.numrange import numerical_range_boundary
from prodrange.product_range import (
    CHUNK,
    barycenter_witness,
    covering_radius,
    interpolate_product_states,
    pnr_hermitian_extrema,
    pnr_parametrized,
    pnr_projections,
    pnr_sample,
    pnr_tensor_product,
    product_numerical_radius,
    schmidt_outer_bound,
    seesaw,
    simplex_grid,
)
from prodrange.raster import cloud_hausdorff, distance_to_mask, hausdorff, rasterize, region_to_mask
from prodrange.regions import ConvexPolygon, Frame
from prodrange.rng import random_complex, random_hermitian, random_unitary, stream


def rand_op(rng, dims):
    n = int(np.prod(dims))
    return ComplexMatrix(dims, random_complex(rng, n))


def rand_herm(rng, dims, normalize=True):
    n = int(np.prod(dims))
    return ComplexMatrix(dims, random_hermitian(rng, n, normalize))


A = catalog.nonconvex_example()


class TestSampling:
    def test_identity_multiple_is_a_point(self):
        lam = 0.3 - 1.7j
        rep = pnr_sample(identity((2, 3)) * lam, 500, seed=4)
        assert np.max(np.abs(rep.points - lam)) < 1e-14

    def test_nonconvex_example_inequality(self):
        z = pnr_sample(A, 20_000, seed=1).points
        x, y = z.real, z.imag
        assert x.min() >= -1e-12 and y.min() >= -1e-12
        assert np.all(np.sqrt(np.clip(x, 0, None)) + np.sqrt(np.clip(y, 0, None)) <= 1 + 1e-9)

    def test_hermitian_within_spectrum(self, rng):
        x = rand_herm(rng, (2, 3))
        w = np.linalg.eigvalsh(x.data)
        z = pnr_sample(x, 5000, seed=2).points
        assert np.abs(z.imag).max() < 1e-12
        assert z.real.min() >= w[0] - 1e-12 and z.real.max() <= w[-1] + 1e-12

    def test_points_match_states(self, rng):
        x = rand_op(rng, (2, 2, 2))
        rep = pnr_sample(x, 300, seed=5)
        for i in (0, 17, 299):
            s = rep.state(i)
            assert s.is_normalized()
            assert abs(s.value(x) - rep.points[i]) <= 1e-10

    def test_deterministic_across_threads(self, rng):
        x = rand_op(rng, (3, 2))
        n = 2 * CHUNK + 123
        a = pnr_sample(x, n, seed=9, threads=1)
        b = pnr_sample(x, n, seed=9, threads=4)
        assert a.points.size == n
        assert np.array_equal(a.points, b.points)
        for fa, fb in zip(a.states, b.states):
            assert np.array_equal(fa, fb)

    def test_prefix_stable(self, rng):
        # chunk c always draws from stream (seed, c)
        x = rand_op(rng, (2, 2))
        short = pnr_sample(x, CHUNK, seed=3).points
        long = pnr_sample(x, 3 * CHUNK, seed=3).points
        assert np.array_equal(short, long[:CHUNK])

    def test_needs_two_factors(self):
        with pytest.raises(DimensionMismatch):
            pnr_sample(ComplexMatrix((4,), np.eye(4)), 10)

    def test_radius_bounds(self, rng):
        x = rand_op(rng, (2, 2))
        rep = pnr_sample(x, 4000, seed=0)
        assert rep.radius.lower == pytest.approx(np.abs(rep.points).max())
        assert rep.radius.lower <= rep.radius.upper + 1e-12

    def test_hermitian_samples_fill_interval(self, rng):
        x = rand_herm(rng, (2, 2))
        gaps = []
        for n in (200, 2000, 20000):
            v = np.sort(pnr_sample(x, n, seed=11).points.real)
            gaps.append(np.diff(v).max())
        assert gaps[0] > gaps[1] > gaps[2]


class TestParametrized:
    def test_simplex_grid(self):
        g = simplex_grid(3, 5)
        assert g.shape == (15, 3)  # 5 points per edge
        assert np.all(g >= 0)
        assert np.max(np.abs(g.sum(axis=1) - 1)) <= 1e-12
        assert np.array_equal(simplex_grid(2, 3), np.array([[1, 0], [0.5, 0.5], [0, 1]]))

    def test_nonconvex_example_formula(self):
        n = 21
        rep = pnr_parametrized(A, grid_per_factor=n)
        p = np.linspace(1, 0, n)
        expect = (p[:, None] * p[None, :] + 1j * (1 - p[:, None]) * (1 - p[None, :])).ravel()
        assert rep.points.size == expect.size
        assert cloud_hausdorff(rep.points, expect) <= 1e-14

    def test_points_match_states(self):
        x = catalog.three_qubit_holed()
        rep = pnr_parametrized(x, grid_per_factor=9)
        for i in (0, 100, rep.points.size - 1):
            assert abs(rep.state(i).value(x) - rep.points[i]) <= 1e-10

    def test_local_unitaries(self, rng):
        d = ComplexMatrix((2, 3), np.diag(rng.standard_normal(6) + 1j * rng.standard_normal(6)))
        us = [random_unitary(rng, 2), random_unitary(rng, 3)]
        # X = U^dagger D U so that U X U^dagger = D
        x = apply_local_unitary(d, [u.conj().T for u in us])
        rep = pnr_parametrized(x, local_us=us, grid_per_factor=7)
        ref = pnr_parametrized(d, grid_per_factor=7)
        assert np.max(np.abs(rep.points - ref.points)) <= 1e-12
        for i in (3, 50):
            assert abs(rep.state(i).value(x) - rep.points[i]) <= 1e-10

    def test_not_diagonal(self, rng):
        with pytest.raises(NotProductDiagonal):
            pnr_parametrized(rand_op(rng, (2, 2)))

    def test_equal_eigenvalues(self):
        rep = pnr_parametrized(ComplexMatrix((2, 2), 2.5 * np.eye(4)), grid_per_factor=11)
        assert np.max(np.abs(rep.points - 2.5)) < 1e-14

    def test_convex_example_fills_triangle(self):
        x = catalog.three_qubit_convex()
        rep = pnr_parametrized(x, grid_per_factor=41)
        hull = ConvexPolygon.hull(rep.points)
        tri = np.array([1, catalog.OMEGA, np.conj(catalog.OMEGA)])
        assert hull.vertices.size == 3
        d = np.abs(hull.vertices[:, None] - tri[None, :]).min(axis=0)
        assert d.max() <= 1e-6
        m = rasterize(rep.cloud(), 128, dilation_radius=0.75)
        tm = region_to_mask(ConvexPolygon(tri), m.frame)
        assert (m.mask & tm.mask).sum() / tm.mask.sum() > 0.98

    def test_covering_radius_bounds_gaps(self, rng):
        lam = (rng.standard_normal(4) + 1j * rng.standard_normal(4)).reshape(2, 2)
        x = ComplexMatrix((2, 2), np.diag(lam.ravel()))
        n = 11
        coarse = pnr_parametrized(x, grid_per_factor=n)
        fine = pnr_parametrized(x, grid_per_factor=81)
        assert covering_radius(lam, n) == coarse.covering_radius
        d = np.abs(fine.points[:, None] - coarse.points[None, :]).min(axis=1)
        assert d.max() <= coarse.covering_radius + 1e-12


class TestTensorProduct:
    def test_identity_factor(self, rng):
        a = ComplexMatrix((2,), random_complex(rng, 2))
        rep = pnr_tensor_product(a, ComplexMatrix((2,), np.eye(2)))
        w = numerical_range_boundary(a).polygon()
        m = region_to_mask(rep.region, Frame.covering(*w.bbox(), resolution=256))
        ref = region_to_mask(w, m.frame)
        assert hausdorff(m, ref) <= 2 * m.cell

    def test_matches_sampling(self):
        rng = stream(77, 0)
        for _ in range(3):
            a = ComplexMatrix((2,), random_complex(rng, 2))
            b = ComplexMatrix((2,), random_complex(rng, 2))
            rep = pnr_tensor_product(a, b, resolution=256)
            x = ComplexMatrix((2, 2), np.kron(a.data, b.data))
            cloud = pnr_sample(x, 100_000, seed=1).cloud()
            sm = rasterize(cloud, frame=rep.region.frame if hasattr(rep.region, "frame") else None)
            rm = region_to_mask(rep.region, sm.frame)
            x0, x1, y0, y1 = sm.bbox()
            diam = np.hypot(x1 - x0, y1 - y0)
            assert hausdorff(sm, rm) <= 0.02 * diam

    def test_cardioid(self):
        rep = pnr_tensor_product(catalog.jordan_block(1), catalog.jordan_block(1), resolution=256)
        assert rep.region.max_modulus() == pytest.approx(4, rel=0.01)
        assert distance_to_mask(rep.region, 0j)[0] <= 2 * rep.region.cell


class TestSeesaw:
    def test_product_operator(self, rng):
        xa = random_hermitian(rng, 2)
        xb = random_hermitian(rng, 3)
        x = ComplexMatrix((2, 3), np.kron(xa, xb))
        w = np.linalg.eigvalsh(x.data)
        ext = pnr_hermitian_extrema(x, 8, seed=0)
        assert ext.maximum == pytest.approx(w[-1], abs=1e-9)
        assert ext.minimum == pytest.approx(w[0], abs=1e-9)

    def test_diagonal_projector(self):
        ext = pnr_hermitian_extrema(ComplexMatrix((2, 2), np.diag([1.0, 0, 0, 0])), 4)
        assert ext.minimum == pytest.approx(0, abs=1e-12)
        assert ext.maximum == pytest.approx(1, abs=1e-12)

    def test_witnesses_attain_values(self, rng):
        x = rand_herm(rng, (2, 2, 2))
        ext = pnr_hermitian_extrema(x, 8, seed=1)
        assert ext.max_witness.value(x).real == pytest.approx(ext.maximum, abs=1e-10)
        assert ext.min_witness.value(x).real == pytest.approx(ext.minimum, abs=1e-10)
        w = np.linalg.eigvalsh(x.data)
        assert w[0] - 1e-10 <= ext.minimum <= ext.maximum <= w[-1] + 1e-10

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)]))
    def test_monotone(self, seed, dims):
        x = rand_herm(stream(seed, 1), dims)
        for sense in ("max", "min"):
            _, _, hist = seesaw(x, sense, restarts=6, seed=seed)
            steps = np.diff(hist, axis=0)
            tol = 1e-12 * (1 + x.norm())
            if sense == "max":
                assert steps.min() >= -tol
            else:
                assert steps.max() <= tol

    def test_beats_sampling(self, rng):
        x = rand_herm(rng, (2, 3))
        ext = pnr_hermitian_extrema(x, 16, seed=2)
        z = pnr_sample(x, 20_000, seed=2).points.real
        assert ext.maximum >= z.max() - 1e-12
        assert ext.minimum <= z.min() + 1e-12

    def test_not_hermitian(self, rng):
        with pytest.raises(NotHermitian):
            pnr_hermitian_extrema(rand_op(rng, (2, 2)))


class TestRadius:
    def test_positive_semidefinite(self, rng):
        g = random_complex(rng, 4)
        rho = ComplexMatrix((2, 2), g @ g.conj().T)
        r = product_numerical_radius(rho, 8)
        ext = pnr_hermitian_extrema(rho, 8)
        assert r.lower == pytest.approx(ext.maximum, abs=1e-10)

    def test_identity_multiple(self):
        r = product_numerical_radius(identity((2, 2)) * (3 - 4j), 4, n_theta=8)
        assert r.lower == pytest.approx(5, abs=1e-12)
        assert r.upper >= r.lower

    def test_nonconvex_example(self):
        r = product_numerical_radius(A, 8, n_theta=32)
        assert r.lower == pytest.approx(1, abs=1e-8)
        assert abs(abs(r.witness.value(A)) - r.lower) <= 1e-10
        assert r.upper >= 1 - 1e-12

    def test_bounds_bracket_samples(self, rng):
        x = rand_op(rng, (2, 2))
        r = product_numerical_radius(x, 8, n_theta=32)
        s = np.abs(pnr_sample(x, 20_000, seed=3).points).max()
        assert s <= r.lower + 1e-9
        assert r.lower <= r.upper

    def test_sampled_homogeneity_and_triangle(self, rng):
        a, b = rand_op(rng, (2, 2)), rand_op(rng, (2, 2))
        ra = np.abs(pnr_sample(a, 3000, seed=0).points)
        rb = np.abs(pnr_sample(b, 3000, seed=0).points)
        rab = np.abs(pnr_sample(a + b, 3000, seed=0).points)
        r2 = np.abs(pnr_sample(a * (2 - 1j), 3000, seed=0).points)
        assert np.max(np.abs(r2 - np.sqrt(5) * ra)) <= 1e-12 * (1 + ra.max())
        # same seed, same states: pointwise triangle inequality
        assert np.all(rab <= ra + rb + 1e-12)


class TestBarycenter:
    def test_identity(self):
        s = barycenter_witness(identity((2, 3)) * 2j)
        assert abs(s.value(identity((2, 3)) * 2j) - 2j) <= 1e-12

    def test_nonconvex_example(self):
        s = barycenter_witness(A)
        assert s.is_normalized()
        assert abs(s.value(A) - (1 + 1j) / 4) <= 1e-7

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2), (3, 2, 2)])
    def test_random(self, rng, dims):
        for _ in range(5):
            x = rand_op(rng, dims)
            s = barycenter_witness(x)
            assert s.dims == dims
            assert abs(s.value(x) - x.trace() / x.n) <= 1e-7 * (1 + x.norm())


class TestSchmidtBound:
    def test_single_term(self, rng):
        a, b = random_complex(rng, 2), random_complex(rng, 2)
        x = ComplexMatrix((2, 2), np.kron(a, b))
        bound = schmidt_outer_bound(x, resolution=256)
        rep = pnr_tensor_product(ComplexMatrix((2,), a), ComplexMatrix((2,), b), resolution=256)
        exact = region_to_mask(rep.region, bound.frame)
        assert not (exact.mask & ~bound.mask).any() or \
            distance_to_mask(bound, exact.cell_centers()).max() <= bound.cell
        assert hausdorff(bound, exact) <= 4 * bound.cell

    def test_nonconvex_example_square(self):
        bound = schmidt_outer_bound(A, resolution=256)
        x0, x1, y0, y1 = bound.bbox()
        c = 3 * bound.cell
        assert abs(x0) <= c and abs(y0) <= c and abs(x1 - 1) <= c and abs(y1 - 1) <= c
        g = np.linspace(0, 1, 41)
        sq = (g[:, None] + 1j * g[None, :]).ravel()
        assert bound.contains(sq).all()

    def test_contains_samples(self, rng):
        for dims in ((2, 2), (2, 3)):
            x = rand_op(rng, dims)
            bound = schmidt_outer_bound(x, resolution=200)
            z = pnr_sample(x, 10_000, seed=4).points
            assert bound.contains(z, tol=1e-9).all()

    def test_needs_bipartite(self):
        with pytest.raises(DimensionMismatch):
            schmidt_outer_bound(catalog.three_qubit_holed())


class TestProjections:
    def test_hermitian(self, rng):
        x = rand_herm(rng, (2, 2))
        h, s, skew = pnr_projections(x, 8)
        assert np.abs(skew.data).max() <= 1e-15
        assert abs(s.hermitian_interval.minimum) <= 1e-12
        assert abs(s.hermitian_interval.maximum) <= 1e-12

    def test_nonconvex_example(self):
        h, s, _ = pnr_projections(A, 8)
        assert h.hermitian_interval.minimum == pytest.approx(0, abs=1e-6)
        assert h.hermitian_interval.maximum == pytest.approx(1, abs=1e-6)
        assert s.hermitian_interval.minimum == pytest.approx(0, abs=1e-6)
        assert s.hermitian_interval.maximum == pytest.approx(1, abs=1e-6)

    def test_brackets_samples(self, rng):
        x = rand_op(rng, (2, 3))
        h, s, _ = pnr_projections(x, 16)
        z = pnr_sample(x, 10_000, seed=5).points
        hi, si = h.hermitian_interval, s.hermitian_interval
        assert hi.minimum - 1e-9 <= z.real.min() and z.real.max() <= hi.maximum + 1e-9
        assert si.minimum - 1e-9 <= z.imag.min() and z.imag.max() <= si.maximum + 1e-9
        # the interval is covered: sampled extremes approach the see-saw ends
        assert z.real.max() >= hi.maximum - 0.05 * (hi.maximum - hi.minimum)


class TestProperties:
    def test_translation(self, rng):
        x = rand_op(rng, (2, 2))
        alpha = 0.75 - 0.25j
        a = pnr_sample(x, 3000, seed=8)
        b = pnr_sample(x + identity((2, 2)) * alpha, 3000, seed=8)
        for fa, fb in zip(a.states, b.states):
            assert np.array_equal(fa, fb)
        assert np.max(np.abs(b.points - (a.points + alpha))) <= 1e-12 * (1 + x.norm())

    def test_scalar(self, rng):
        x = rand_op(rng, (2, 3))
        alpha = -1.5 + 2j
        a = pnr_sample(x, 3000, seed=8)
        b = pnr_sample(x * alpha, 3000, seed=8)
        for fa, fb in zip(a.states, b.states):
            assert np.array_equal(fa, fb)
        assert np.max(np.abs(b.points - alpha * a.points)) <= 1e-12 * (1 + abs(alpha) * x.norm())

    def test_local_unitary_invariance(self, rng):
        x = rand_herm(rng, (2, 2))
        y = rand_op(rng, (2, 2))
        us = [random_unitary(rng, 2), random_unitary(rng, 2)]
        zx = pnr_sample(y, 40_000, seed=1).points
        zy = pnr_sample(apply_local_unitary(y, us), 40_000, seed=2).points
        diam = np.abs(zx[:, None][:2000] - zx[None, :][:, :2000]).max()
        assert cloud_hausdorff(zx, zy) <= 0.02 * diam
        e1 = pnr_hermitian_extrema(x, 16, seed=0)
        e2 = pnr_hermitian_extrema(apply_local_unitary(x, us), 16, seed=0)
        assert e1.maximum == pytest.approx(e2.maximum, abs=1e-6)
        assert e1.minimum == pytest.approx(e2.minimum, abs=1e-6)

    def test_containment_in_numerical_range(self, rng):
        for dims in ((2, 2), (3, 2), (2, 2, 2)):
            x = rand_op(rng, dims)
            poly = numerical_range_boundary(x).outer_polygon()
            z = pnr_sample(x, 5000, seed=6).points
            assert poly.contains(z, tol=1e-9).all()

    def test_subadditive(self, rng):
        a, b = rand_op(rng, (2, 2)), rand_op(rng, (2, 2))
        ca = pnr_sample(a, 40_000, seed=1).cloud()
        cb = pnr_sample(b, 40_000, seed=2).cloud()
        total = raster_sum([rasterize(ca, 200), rasterize(cb, 200)], resolution=400)
        z = pnr_sample(a + b, 5000, seed=3).points
        assert distance_to_mask(total, z).max() <= 3 * total.cell


def test_interpolation_hits_target(rng):
    x = rand_herm(rng, (2, 2))
    ext = pnr_hermitian_extrema(x, 8)
    t = 0.3 * ext.minimum + 0.7 * ext.maximum
    s = interpolate_product_states(x, ext.min_witness, ext.max_witness, t)
    assert s.is_normalized()
    assert s.value(x).real == pytest.approx(t, abs=1e-10)
