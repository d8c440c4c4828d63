import numpy as np
import pytest

from urywidth.complexes import SimplicialComplex, SimplicialMap, h1_rank
from urywidth.foliation import (Filtration, Foliation, FoliationError,
                                chain_audit, filtration, interpolate,
                                interpolate_simplex, make_simple,
                                parametric_interpolate, sublevel)
from urywidth.instances import (angular_foliation, annulus_surface,
                                bfs_levels, cycle_graph, disk_surface,
                                path_graph, radial_foliation,
                                random_foliation_pair, two_hole_square,
                                vertex_level_foliation)


class TestFiltration:
    def test_base_value_is_half(self):
        F = filtration(path_graph(3), 0)
        assert F.node_alpha[("v", 0)] == pytest.approx(0.5)

    def test_path_graph_values(self):
        F = filtration(path_graph(3), 0)
        assert F.node_alpha[("v", 1)] == pytest.approx(0.75)
        assert F.node_alpha[("v", 2)] == pytest.approx(1.0)

    def test_single_vertex_degenerate(self):
        g = path_graph(1)
        F = filtration(g, 0)
        assert F.node_alpha[("v", 0)] == pytest.approx(0.5)
        assert F.sup_distance == 0.0

    def test_max_alpha_is_one_with_far_points(self):
        # odd cycle: the far point sits inside an edge, so vertex alphas
        # alone would not reach 1
        F = filtration(cycle_graph(5), 0)
        assert max(F.node_alpha.values()) == pytest.approx(1.0)
        assert any(n[0] == "x" for n in F.nodes)
        assert max(F.node_alpha[("v", a)] for a in range(5)) < 1.0

    def test_rejects_disconnected(self):
        two = SimplicialComplex([(0,), (1,)])
        from urywidth.complexes import Graph
        with pytest.raises(FoliationError):
            filtration(Graph(two), 0)


class TestSublevel:
    def test_half_is_single_point(self):
        F = filtration(path_graph(3), 0)
        sub = sublevel(F, 0.5)
        assert sub["nodes"] == [("v", 0)]
        assert not sub["full"] and not sub["partial"]

    def test_one_is_everything(self):
        F = filtration(path_graph(3), 0)
        sub = sublevel(F, 1.0)
        assert sub["length"] == pytest.approx(2.0)

    def test_path_interior_level(self):
        F = filtration(path_graph(3), 0)
        sub = sublevel(F, 0.8)
        assert sub["length"] == pytest.approx(1.2)
        assert sub["connected"]

    def test_below_half_empty(self):
        F = filtration(path_graph(3), 0)
        assert sublevel(F, 0.3)["empty"]

    def test_connected_at_all_levels(self):
        F = filtration(cycle_graph(5), 0)
        for t in np.linspace(0.5, 1.0, 23):
            assert sublevel(F, float(t))["connected"]


class TestMakeSimple:
    def test_already_simple_round_trip(self):
        ann = annulus_surface(6, 1)
        p = radial_foliation(ann, 6, 1)
        out = make_simple(p.map, bound=p.width + 0.5)
        assert out.width <= p.width + 1e-9

    def test_hollow_square_height(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        fol = make_simple(f, bound=1.5)
        assert fol.width == pytest.approx(1.0)
        assert h1_rank(fol.leaf_graph.complex) == 1  # the two-sided circle

    def test_bound_below_width_errors(self, hollow_square, segment):
        f = SimplicialMap(hollow_square, segment, {0: 10, 1: 10, 2: 11, 3: 11})
        with pytest.raises(FoliationError):
            make_simple(f, bound=0.5)

    def test_rejects_two_dimensional_target(self, unit_square):
        f = SimplicialMap(unit_square, unit_square,
                          {v: v for v in unit_square.vertices})
        with pytest.raises(FoliationError):
            make_simple(f, bound=100.0)


class TestFoliationType:
    def test_build_checks_connected(self, hollow_square, segment):
        from urywidth.complexes import Graph
        with pytest.raises(FoliationError):
            Foliation.build(hollow_square, Graph(segment),
                            {0: 10, 1: 10, 2: 11, 3: 11})

    def test_build_checks_surjective(self):
        ann = annulus_surface(6, 1)
        tgt = path_graph(3)
        vm = {v: v // 6 for v in ann.vertices}  # misses vertex 2
        with pytest.raises(FoliationError):
            Foliation.build(ann, tgt, vm)

    def test_width_cached_exact(self):
        ann = annulus_surface(8, 1, r_inner=0.5, r_outer=1.0)
        p = angular_foliation(ann, 8)
        # fiber over each spoke: a radial segment of length 0.5
        assert p.width == pytest.approx(0.5)


class TestInterpolate:
    def test_self_interpolation_stays_within_width(self):
        ann = annulus_surface(6, 1)
        p0 = radial_foliation(ann, 6, 1)
        fam = interpolate(p0, p0)
        assert fam.width <= 2 * p0.width + 1e-9
        assert fam.meta["endpoint0_partition_ok"]
        assert fam.meta["endpoint1_partition_ok"]
        assert fam.meta["endpoint0_width_match"]
        assert fam.meta["endpoint1_width_match"]

    def test_annulus_radial_angular(self):
        ann = annulus_surface(6, 1)
        p0 = radial_foliation(ann, 6, 1)
        p1 = angular_foliation(ann, 6)
        fam = interpolate(p0, p1)
        assert fam.beta == 1
        assert fam.bound == pytest.approx(3 * p0.width + 2 * p1.width)
        assert fam.width <= fam.bound + 1e-9
        audit = chain_audit(fam)
        assert audit.ok and audit.chain_front_max <= 2

    def test_disk_bound(self):
        p0, p1 = random_foliation_pair("disk", 0)
        fam = interpolate(p0, p1)
        assert fam.beta == 0
        assert fam.width <= 2 * p0.width + p1.width + 1e-9

    def test_sigma_mismatch_rejected(self):
        a1 = annulus_surface(6, 1)
        a2 = annulus_surface(7, 1)
        p0 = radial_foliation(a1, 6, 1)
        p1 = radial_foliation(a2, 7, 1)
        with pytest.raises(FoliationError):
            interpolate(p0, p1)

    def test_events_cover_unit_interval(self):
        ann = annulus_surface(6, 1)
        fam = interpolate(radial_foliation(ann, 6, 1), angular_foliation(ann, 6))
        assert fam.params[0] == 0.0
        assert fam.params[-1] == 1.0
        assert all(a < b for a, b in zip(fam.params, fam.params[1:]))

    def test_leaf_graphs_are_graphs(self):
        ann = annulus_surface(6, 1)
        fam = interpolate(radial_foliation(ann, 6, 1), angular_foliation(ann, 6))
        for e in fam.events:
            assert e.leaf_components >= 1
            assert e.leaf_h1 >= 0
            # events of a connected surface have connected leaf spaces
            assert e.leaf_components == 1

    @pytest.mark.parametrize("kind,beta", [("disk", 0), ("annulus", 1),
                                           ("twohole", 2)])
    def test_randomized_bound_and_chain(self, kind, beta):
        for seed in range(3):
            p0, p1 = random_foliation_pair(kind, seed)
            fam = interpolate(p0, p1)
            assert fam.beta == beta
            assert fam.width <= (beta + 2) * p0.width + (beta + 1) * p1.width + 1e-9
            audit = chain_audit(fam)
            assert audit.ok, audit.flagged_events


class TestParametric:
    def test_constant_family_slices_match_plain(self):
        # members of a constant family against p1 reproduce the plain
        # interpolation widths slice by slice
        ann = annulus_surface(6, 1)
        p0 = vertex_level_foliation(ann, bfs_levels(ann, [0]))
        p1 = vertex_level_foliation(ann, bfs_levels(ann, [3]))
        plain = interpolate(p0, p1)
        fam0 = interpolate(p0, p0, carry={"px": p1}, want_members=True)
        cone = parametric_interpolate(fam0, "px", p1)
        # base slices (t=0) reproduce the member widths
        base = {}
        for (t, s), ev in zip(cone.params, cone.events):
            if t == 0.0:
                base[s] = ev.width
        for s, w in base.items():
            k = fam0.params.index(s)
            assert w == pytest.approx(fam0.events[k].width, abs=1e-9)
        # apex slices (t=1) reproduce p1's width
        apex = [ev.width for (t, s), ev in zip(cone.params, cone.events)
                if t == 1.0]
        assert max(abs(w - p1.width) for w in apex) < 1e-9

    def test_requires_members(self):
        ann = annulus_surface(6, 1)
        p0 = radial_foliation(ann, 6, 1)
        p1 = angular_foliation(ann, 6)
        fam = interpolate(p0, p1)
        with pytest.raises(FoliationError):
            parametric_interpolate(fam, "px", p1)


class TestSimplexInterpolation:
    def test_m1_beta0_bound_three(self):
        sig = disk_surface(5, 1)
        p0 = vertex_level_foliation(sig, bfs_levels(sig, [0]))
        p1 = vertex_level_foliation(sig, bfs_levels(sig, [2]))
        fam = interpolate_simplex([p0, p1])
        assert fam.audit.beta == 0
        assert fam.audit.improved_bound == 3
        assert fam.audit.improved_ok
        assert fam.audit.chain_ok

    def test_m1_beta2_bound_seven(self):
        sig = two_hole_square(5)
        p0 = vertex_level_foliation(sig, bfs_levels(sig, [0]))
        p1 = vertex_level_foliation(sig, bfs_levels(sig, [30]))
        fam = interpolate_simplex([p0, p1])
        assert fam.audit.beta == 2
        assert fam.audit.improved_bound == 2 * 2 + 1 + 1 + 1
        assert fam.audit.improved_ok

    @pytest.mark.slow
    def test_m2_beta0_bound_seven(self):
        sig = disk_surface(5, 1)
        fols = [vertex_level_foliation(sig, bfs_levels(sig, [s]))
                for s in (0, 2, 4)]
        fam = interpolate_simplex(fols)
        assert fam.audit.improved_bound == 7
        assert fam.audit.improved_ok
        assert fam.audit.chain_ok
        assert fam.audit.transition_ok

    def test_rescaling_normalizes(self):
        sig = disk_surface(5, 1, radius=5.0)  # widths well above 1
        p0 = vertex_level_foliation(sig, bfs_levels(sig, [0]))
        p1 = vertex_level_foliation(sig, bfs_levels(sig, [2]))
        assert max(p0.width, p1.width) > 1
        fam = interpolate_simplex([p0, p1])
        assert fam.audit.scale < 1
        assert fam.audit.measured_width <= fam.audit.improved_bound

    def test_m_cap(self):
        sig = disk_surface(5, 1)
        fols = [vertex_level_foliation(sig, bfs_levels(sig, [s]))
                for s in (0, 1, 2, 3)]
        with pytest.raises(FoliationError):
            interpolate_simplex(fols)


class TestChainAudit:
    def test_no_merges_is_chain_one(self):
        ann = annulus_surface(6, 1)
        p0 = radial_foliation(ann, 6, 1)
        fam = interpolate(p0, p0)
        # chains exist only at events with fronts; never above 1 + beta
        audit = chain_audit(fam)
        assert audit.ok

    def test_missing_provenance(self):
        with pytest.raises(FoliationError):
            chain_audit("not a family")

    def test_annulus_chain_at_most_two(self):
        ann = annulus_surface(6, 1)
        fam = interpolate(radial_foliation(ann, 6, 1), angular_foliation(ann, 6))
        audit = chain_audit(fam)
        assert audit.chain_bound == 2
        assert audit.chain_front_max <= 2

    def test_disk_chain_at_most_one(self):
        p0, p1 = random_foliation_pair("disk", 1)
        fam = interpolate(p0, p1)
        audit = chain_audit(fam)
        assert audit.chain_bound == 1
        assert audit.chain_front_max <= 1


class TestEventStructure:
    def test_fiber_partition_consistency(self):
        # vertex labels at each event induce a partition refining nothing
        # illegal: labels must be constant on p1-fibers once g <= t
        ann = annulus_surface(6, 1)
        p0 = radial_foliation(ann, 6, 1)
        p1 = angular_foliation(ann, 6)
        fam = interpolate(p0, p1)
        last = fam.events[-1]
        by_p1: dict = {}
        for v, lab in last.vertex_labels.items():
            by_p1.setdefault(p1.map.vertex_map[v], set()).add(repr(lab))
        for labs in by_p1.values():
            assert len(labs) == 1

    def test_width_rows_and_json(self):
        ann = annulus_surface(6, 1)
        fam = interpolate(radial_foliation(ann, 6, 1), angular_foliation(ann, 6))
        rows = fam.width_rows()
        assert len(rows) == len(fam.events)
        d = fam.to_json_dict()
        assert d["width"] == fam.width
        assert len(d["events"]) == len(fam.events)
