import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urywidth.localjoin import (BallSimplexConstruction, ColoredTriangulation,
                                DualComplexError, JoinDecomposition,
                                ball_simplex_map, gromov_cube_map,
                                join_coords, locate_simplex, pi_i,
                                sample_unit_ball, tau)


class TestLocate:
    def test_segment(self):
        T = ColoredTriangulation(1, 1.0)
        s = locate_simplex([0.5], T)
        assert s.lattice_vertices().tolist() == [[0], [1]]

    def test_plane_point(self):
        T = ColoredTriangulation(2, 1.0)
        s = locate_simplex([0.7, 0.2], T)
        # fractional parts 0.7 > 0.2: walk axis 0 then axis 1
        assert s.lattice_vertices().tolist() == [[0, 0], [1, 0], [1, 1]]
        _s2, lam = T.barycentric([0.7, 0.2])
        V = s.vertices()
        assert np.allclose(lam @ V, [0.7, 0.2])
        assert lam.min() >= 0 and lam.sum() == pytest.approx(1.0)

    def test_lattice_point_tie_break(self):
        T = ColoredTriangulation(2, 1.0)
        s, lam = T.barycentric([1.0, 1.0])
        assert lam[0] == pytest.approx(1.0)
        assert np.allclose(lam[1:], 0.0)
        # lexicographically smallest permutation on full ties
        assert s.perm == (0, 1)

    def test_simplex_diameter_is_lattice_diagonal(self):
        for n in (1, 2, 3, 5):
            h = 0.3
            T = ColoredTriangulation(n, h)
            s = T.locate(np.full(n, 0.1))
            V = s.vertices()
            diam = max(np.linalg.norm(a - b) for a in V for b in V)
            assert diam == pytest.approx(h * np.sqrt(n))
            assert T.simplex_diameter == pytest.approx(h * np.sqrt(n))

    def test_coloring_all_distinct(self):
        rng = np.random.default_rng(0)
        for n in range(1, 7):
            T = ColoredTriangulation(n, 0.5)
            X = rng.uniform(-5, 5, size=(max(10_000 // n, 500), n))
            for x in X[: 10_000 // (n * n) + 50]:
                s = T.locate(x)
                colors = s.colors()
                assert len(set(colors.tolist())) == n + 1


class TestJoinCoords:
    def setup_method(self):
        self.J = JoinDecomposition(ColoredTriangulation(3, 0.25), 1, 1)

    def test_vertex_of_block(self):
        v = np.array([0.25, 0.0, 0.0])  # lattice (1,0,0): color 1, block 0
        jc = join_coords(v, self.J)
        assert jc.t[0] == pytest.approx(1.0)
        assert np.allclose(jc.z[0], v)

    def test_barycenter_equal_weights(self):
        s = self.J.tri.locate([0.05, 0.04, 0.03])
        bc = s.vertices().mean(axis=0)
        t = tau(bc, self.J)
        assert np.allclose(t, [0.5, 0.5], atol=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(-2, 2, (4000, 3))
        t, z = self.J.join_batch(X)
        rec = np.einsum("ni,nik->nk", t, np.nan_to_num(z))
        assert np.abs(rec - X).max() < 1e-9
        assert np.abs(t.sum(axis=1) - 1).max() < 1e-12
        assert t.min() >= -1e-14

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
    def test_reconstruction_property(self, xs):
        jc = join_coords(np.array(xs), self.J)
        assert np.linalg.norm(jc.reconstruct() - np.array(xs)) < 1e-9

    def test_tie_break_independence_on_faces(self):
        # a point on a shared face: mixture weights well defined regardless
        # of which incident simplex the tie-break picks
        x = np.array([0.25, 0.125, 0.125])  # fractional tie between axes 1, 2
        t0 = tau(x, self.J)
        for delta in (1e-11, -1e-11):
            t1 = tau(x + np.array([0.0, delta, -delta]), self.J)
            assert np.abs(t0 - t1).max() < 1e-9


class TestTau:
    def setup_method(self):
        self.J = JoinDecomposition(ColoredTriangulation(3, 0.25), 1, 1)

    def test_block_complex_maps_to_vertex(self):
        rng = np.random.default_rng(1)
        # points of Z_i: convex combinations inside block faces
        for _ in range(50):
            x0 = rng.uniform(-1, 1, 3)
            jc = join_coords(x0, self.J)
            for i, zi in jc.z.items():
                t = tau(zi, self.J)
                assert t[i] == pytest.approx(1.0, abs=1e-9)

    def test_continuity_at_faces(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = rng.uniform(-1, 1, 3)
            b = a + rng.normal(size=3) * 1e-7
            assert np.abs(tau(a, self.J) - tau(b, self.J)).max() < 1e-5


class TestPi:
    def setup_method(self):
        self.J = JoinDecomposition(ColoredTriangulation(3, 0.25), 1, 1)
        self.eps = self.J.tri.simplex_diameter

    def test_idempotent_and_displacement(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.uniform(-1, 1, 3)
            jc = join_coords(x, self.J)
            for i in jc.z:
                p = pi_i(x, self.J, i)
                assert np.linalg.norm(p - x) < self.eps
                assert np.allclose(pi_i(p, self.J, i), p, atol=1e-9)

    def test_dual_complex_error(self):
        v = np.array([0.25, 0.0, 0.0])  # in Z_0, so t_1 = 0
        with pytest.raises(DualComplexError):
            pi_i(v, self.J, 1)


class TestBallSimplexMap:
    @pytest.mark.parametrize("m,d,n", [(1, 1, 3), (2, 0, 2), (1, 2, 5)])
    def test_dimensions(self, m, d, n):
        bs = ball_simplex_map(m, d, 0.3)
        assert bs.n == n
        assert bs.map.target_dim == m

    def test_h_below_fineness_bound(self):
        bs = ball_simplex_map(1, 1, 0.2)
        assert bs.join.tri.h < 0.2 / (2 * np.sqrt(3))

    def test_vertex_target_witness_identity(self):
        bs = ball_simplex_map(1, 1, 0.3)
        rng = np.random.default_rng(0)
        t = np.array([1.0, 0.0])
        pts, wit = bs.fiber_samples(t, 3000, rng)
        # over a simplex vertex the fiber is (part of) Z_i and the witness
        # is the identity there
        assert np.abs(pts - wit).max() < 1e-12

    def test_fiber_samples_lie_on_fiber(self):
        bs = ball_simplex_map(1, 1, 0.3)
        rng = np.random.default_rng(0)
        t = np.array([0.35, 0.65])
        pts, wit = bs.fiber_samples(t, 4000, rng)
        assert len(pts) > 100
        tt = bs.join.tau_batch(pts)
        assert np.abs(tt - t).max() < 1e-9
        assert (np.linalg.norm(pts, axis=1) <= 1 + 1e-12).all()

    def test_witness_certificate_small_run(self):
        bs = ball_simplexmap = ball_simplex_map(1, 1, 0.25)
        rng = np.random.default_rng(1)
        tvals = rng.dirichlet(np.ones(2), size=12)
        cert = bs.witness_certificate(tvals, n_samples=20_000, seed=0)
        assert cert.extra["passes"]
        assert cert.W < 0.25
        assert cert.extra["certified_bound"] < 0.25

    def test_near_facet_witness_index_valid(self):
        bs = ball_simplex_map(1, 1, 0.3)
        i = bs.witness_index(np.array([1e-9, 1.0 - 1e-9]))
        assert i == 1


class TestGromovCube:
    def test_skeleton_values_exact(self):
        gc = gromov_cube_map(1 / 8)
        on_z0 = np.array([[0.25, 0.125, 0.7], [0.5, 0.5, 0.33]])
        assert np.abs(gc.evaluate(on_z0)[:, 0]).max() == 0.0
        on_z1 = np.array([[0.0625, 0.1875, 0.7], [0.3125, 0.4375, 0.21]])
        assert np.abs(gc.evaluate(on_z1)[:, 0] - 1.0).max() == 0.0

    def test_equidistant_points(self):
        gc = gromov_cube_map(1 / 4)
        # quarter-diagonal points: every coordinate distance to the grid
        # equals eps/4 on both the primal and the dual side
        x = np.array([[0.0625, 0.0625, 0.0625], [0.0625, 0.3125, 0.5625]])
        assert np.allclose(gc.evaluate(x)[:, 0], 0.5)

    def test_requires_integer_grid(self):
        with pytest.raises(ValueError):
            gromov_cube_map(0.3)

    def test_witnesses_land_on_skeletons(self):
        gc = gromov_cube_map(1 / 8)
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 1, (5000, 3))
        d0w = gc.skeleton_distances(gc.witness(X, "low"))[0]
        assert d0w.max() < 1e-9
        d1w = gc.skeleton_distances(gc.witness(X, "high"))[1]
        assert d1w.max() < 1e-9

    def test_two_scale_halving(self):
        diams = {}
        for eps in (1 / 4, 1 / 8):
            gc = gromov_cube_map(eps)
            cert = gc.witness_certificate(np.linspace(0.1, 0.9, 9),
                                          n_samples=30_000, seed=2)
            diams[eps] = cert.W
        ratio = diams[1 / 8] / diams[1 / 4]
        assert abs(ratio - 0.5) <= 0.2 * 0.5

    def test_certificate_both_sides(self):
        gc = gromov_cube_map(1 / 8)
        cert = gc.witness_certificate(np.array([0.2, 0.5, 0.8]),
                                      n_samples=30_000, seed=1)
        assert len(cert.fiber_table) == 3
        assert cert.extra["C"] <= 6.0


class TestSampling:
    def test_unit_ball_inside(self):
        rng = np.random.default_rng(0)
        X = sample_unit_ball(rng, 2000, 3)
        r = np.linalg.norm(X, axis=1)
        assert r.max() <= 1.0
        assert r.mean() == pytest.approx(3 / 4, abs=0.02)
