import numpy as np
import pytest

from urywidth.complexes import (Graph, SimplicialComplex, SimplicialMap,
                                barycentric_subdivide, boundary_matrix,
                                check_map_connected, connected_factorization,
                                faces_of, h1_rank, h1_onto_check,
                                subdivided_map)

from conftest import grid_patch, random_complex, random_levels_map


def hollow_triangle():
    return SimplicialComplex([(0, 1), (1, 2), (0, 2)])


class TestH1Rank:
    def test_circle(self):
        assert h1_rank(hollow_triangle()) == 1

    def test_sphere(self):
        T = SimplicialComplex([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])
        assert h1_rank(T) == 0

    def test_wedge_of_two_circles(self):
        # two hollow triangles glued at one vertex; by hand: 5 vertices,
        # 6 edges, connected, no 2-cells: rank = 6 - (5 - 1) = 2
        K = SimplicialComplex([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
        assert h1_rank(K) == 2

    def test_empty_and_point(self):
        assert h1_rank(SimplicialComplex([])) == 0
        assert h1_rank(SimplicialComplex([(0,)])) == 0

    def test_torus(self):
        def vid(i, j):
            return (i % 3) * 3 + (j % 3)

        tris = []
        for i in range(3):
            for j in range(3):
                tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
                tris.append((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))
        assert h1_rank(SimplicialComplex(tris)) == 2


class TestSubdivision:
    def test_edge(self):
        K = SimplicialComplex([(0, 1)], {0: np.array([0.0]), 1: np.array([1.0])})
        sd = barycentric_subdivide(K)
        assert len(sd.vertices) == 3
        assert len(sd.k_simplices(1)) == 2

    def test_filled_triangle(self):
        K = SimplicialComplex([(0, 1, 2)])
        sd = barycentric_subdivide(K)
        assert len(sd.vertices) == 7
        assert len(sd.k_simplices(2)) == 6

    def test_hollow_triangle_h1_preserved(self):
        sd = barycentric_subdivide(hollow_triangle())
        assert len(sd.vertices) == 6
        assert len(sd.k_simplices(1)) == 6
        assert h1_rank(sd) == 1

    def test_h1_invariance_random(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            K = random_complex(rng)
            assert h1_rank(barycentric_subdivide(K)) == h1_rank(K)

    def test_realization_setwise_identical(self):
        K = SimplicialComplex([(0, 1, 2)], {0: np.zeros(2),
                                            1: np.array([1.0, 0.0]),
                                            2: np.array([0.0, 1.0])})
        sd = barycentric_subdivide(K)
        # barycenters of faces must lie inside the original triangle
        for v in sd.vertices:
            p = sd.point(v)
            assert p.min() >= -1e-12 and p.sum() <= 1 + 1e-12


class TestFaceClosure:
    def test_closure_after_constructions(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            K = random_complex(rng)
            assert K.is_face_closed()
            assert barycentric_subdivide(K).is_face_closed()

    def test_no_duplicates(self):
        K = SimplicialComplex([(0, 1, 2), (2, 1, 0)])
        assert len(K.k_simplices(2)) == 1

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            SimplicialComplex([(0, 0, 1)])


class TestConnectedness:
    def test_identity_connected(self, unit_square):
        f = SimplicialMap(unit_square, unit_square,
                          {v: v for v in unit_square.vertices})
        ok, witness = check_map_connected(f)
        assert ok and witness is None

    def test_two_points_to_one(self):
        two = SimplicialComplex([(0,), (1,)])
        one = SimplicialComplex([(5,)])
        ok, witness = check_map_connected(SimplicialMap(two, one, {0: 5, 1: 5}))
        assert not ok
        assert witness["cell"] == (5,)
        assert witness["components"] == 2

    def test_height_on_hollow_square(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        ok, witness = check_map_connected(f)
        assert not ok
        assert witness["cell"] == (10, 11)

    def test_missed_target_is_empty_fiber(self, segment):
        src = SimplicialComplex([(0,)])
        f = SimplicialMap(src, segment, {0: 10})
        ok, witness = check_map_connected(f)
        assert not ok and witness["reason"] == "empty fiber"


class TestReebFactorization:
    def test_already_connected_is_identity_like(self, unit_square, segment):
        f = SimplicialMap(unit_square, segment, {0: 10, 1: 11, 2: 10, 3: 11})
        assert check_map_connected(f)[0]
        ft, yt, q = connected_factorization(f)
        assert check_map_connected(ft)[0]
        # the factored target realizes the image: one component, a segment
        assert len(yt.vertex_components()) == 1
        assert h1_rank(yt) == 0

    def test_two_disjoint_edges(self):
        e2 = SimplicialComplex([(0, 1), (2, 3)])
        e1 = SimplicialComplex([(7, 8)])
        f = SimplicialMap(e2, e1, {0: 7, 1: 8, 2: 7, 3: 8})
        ft, yt, q = connected_factorization(f)
        assert len(yt.vertex_components()) == 2
        assert h1_rank(yt) == 0

    def test_hollow_square_reeb_graph(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        ft, yt, q = connected_factorization(f)
        # two vertex cells and two parallel edge cells: a circle
        assert h1_rank(yt) == 1
        assert len(yt.vertex_components()) == 1
        assert check_map_connected(ft)[0]
        assert ft.is_surjective()

    def test_composition_is_subdivided_map(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        ft, yt, q = connected_factorization(f)
        sdf = subdivided_map(f)
        qf = q.compose(ft)
        assert qf.vertex_map == sdf.vertex_map
        assert qf.source.simplices == sdf.source.simplices
        assert qf.target.simplices == sdf.target.simplices

    def test_randomized_outputs_connected(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            K = grid_patch(rng)
            f, _ = random_levels_map(rng, K)
            ft, yt, q = connected_factorization(f)
            assert check_map_connected(ft)[0]

    def test_empty_source(self):
        empty = SimplicialComplex([])
        pt = SimplicialComplex([(0,)])
        ft, yt, q = connected_factorization(SimplicialMap(empty, pt, {}))
        assert len(yt.vertices) == 0


class TestH1Onto:
    def test_constant_from_disk(self, unit_square):
        pt = SimplicialComplex([(9,)])
        f = SimplicialMap(unit_square, pt, {v: 9 for v in unit_square.vertices})
        assert h1_onto_check(f)

    def test_torus_to_circle(self):
        def vid(i, j):
            return (i % 3) * 3 + (j % 3)

        tris = []
        for i in range(3):
            for j in range(3):
                tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
                tris.append((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))
        torus = SimplicialComplex(tris)
        circle = hollow_triangle()
        f = SimplicialMap(torus, circle, {v: v // 3 for v in torus.vertices})
        assert check_map_connected(f)[0]
        assert h1_onto_check(f)

    def test_rejects_non_connected(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        with pytest.raises(ValueError):
            h1_onto_check(f)

    def test_factorized_maps_onto_randomized(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            K = grid_patch(rng)
            f, _ = random_levels_map(rng, K)
            ft, _, _ = connected_factorization(f)
            assert h1_onto_check(ft)

    def test_connected_target_implies_connected_source(self):
        rng = np.random.default_rng(29)
        for _ in range(25):
            K = grid_patch(rng)
            f, _ = random_levels_map(rng, K)
            ft, yt, _ = connected_factorization(f)
            if len(yt.vertex_components()) == 1:
                assert len(ft.source.vertex_components()) == 1


class TestSerialization:
    def test_round_trip(self, unit_square):
        text = unit_square.to_json()
        back = SimplicialComplex.from_json(text)
        assert back.simplices == unit_square.simplices
        assert back.to_json() == text

    def test_map_schema(self, unit_square, segment):
        f = SimplicialMap(unit_square, segment, {0: 10, 1: 11, 2: 10, 3: 11})
        d = f.to_json_dict()
        assert d["vertex_map"]["0"] == 10


class TestGraph:
    def test_lengths_from_embedding(self, segment):
        g = Graph(segment)
        assert g.lengths[(10, 11)] == pytest.approx(1.0)

    def test_distances(self):
        from urywidth.instances import path_graph
        g = path_graph(4)
        d = g.vertex_distances(0)
        assert d[3] == pytest.approx(3.0)

    def test_rejects_two_dimensional(self, unit_square):
        with pytest.raises(ValueError):
            Graph(unit_square)
