"""Acceptance suite: every criterion runs at its stated tolerance and prints
one pass/fail line (run with -s to see them live).

Criteria (tolerances pinned here, not deferred):
  1  ball-width closed form, n = 1..10, 1e-12
  2  ball-to-simplex desk run (m=1, d=1, eps=0.2): 200 targets x 1e5
     samples, every witness-fiber diameter < 0.2, tolerance 0
  3  cube map at eps=1/8: two-sided witnesses, C <= 6, halving eps moves C
     by at most 25%
  4  interpolation bound on 100 randomized pairs (beta in {0,1,2}),
     exact fiber diameters, zero violations
  5  chain audit on every interpolation run: at most 1+beta swept leaves
  6  simplex interpolation (m=1, m=2, normalized): width <= 2bm+m^2+m+1;
     spot values 3 and 7
  7  recurrence closed form (2(b+2)^k - 1) w0 at 1e-12, k <= 6, b <= 10;
     constant(1,0) = 1/3
  8  skeletal construction (edge base, annulus fiber, constant metrics):
     measured <= recurrence, 20 seeds, zero violations
  9  bundle metric (m,k) in {(1,0),(1,1)}: core identity at 1e4 points to
     1e-12; pi-fiber witness widths <= C eps with C stable within 25%
     across eps in {0.1, 0.05}; metric eigenvalues within [eps, 1]
 10  structural suites: face closure, h1 subdivision invariance, factored
     maps connected and h1-onto, composed cover multiplicity
"""

import numpy as np
import pytest

RESULTS = []


def report(num, name, ok, detail=""):
    line = f"[acceptance {num:>2}] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line, flush=True)
    RESULTS.append((num, ok))
    assert ok, line


class TestCriterion1:
    def test_ball_width_reference(self):
        from urywidth.width import ball_width_reference
        worst = max(abs(ball_width_reference(n) - np.sqrt((2 * n + 2) / n))
                    for n in range(1, 11))
        ok = worst < 1e-12 and abs(ball_width_reference(2) - np.sqrt(3)) < 1e-12
        report(1, "ball-width closed form n=1..10", ok, f"max dev {worst:.2e}")


class TestCriterion2:
    def test_ball_simplex_desk_run(self):
        from urywidth.localjoin import ball_simplex_map
        bs = ball_simplex_map(1, 1, 0.2)
        rng = np.random.default_rng(2024)
        tvals = rng.dirichlet(np.ones(2), size=200)
        cert = bs.witness_certificate(tvals, n_samples=100_000, seed=0)
        ok = cert.W < 0.2 and cert.extra["passes"]
        report(2, "ball-to-simplex witness fibers below eps=0.2 "
                  "(200 targets x 1e5 samples)", ok,
               f"max diameter {cert.W:.5f}, certified bound "
               f"{cert.extra['certified_bound']:.5f}")


class TestCriterion3:
    def test_cube_two_sided_witnesses_and_scaling(self):
        from urywidth.localjoin import gromov_cube_map
        ys = np.linspace(0.05, 0.95, 19)
        cs = {}
        all_measured = True
        for eps in (1 / 8, 1 / 16):
            gc = gromov_cube_map(eps)
            cert = gc.witness_certificate(ys, n_samples=60_000, seed=11)
            cs[eps] = cert.extra["C"]
            all_measured &= len(cert.fiber_table) == len(ys)
        drift = abs(cs[1 / 16] - cs[1 / 8]) / cs[1 / 8]
        ok = all_measured and cs[1 / 8] <= 6.0 and drift <= 0.25
        report(3, "cube witnesses: C <= 6 and stable under halving", ok,
               f"C(1/8)={cs[1/8]:.3f}, C(1/16)={cs[1/16]:.3f}, "
               f"drift {100*drift:.1f}%")


@pytest.fixture(scope="module")
def interpolation_sweep():
    from urywidth.foliation import chain_audit, interpolate
    from urywidth.instances import random_foliation_pair
    runs = []
    plan = [("disk", 0, 34), ("annulus", 1, 33), ("twohole", 2, 33)]
    for kind, beta, count in plan:
        for seed in range(count):
            p0, p1 = random_foliation_pair(kind, seed)
            fam = interpolate(p0, p1, check_bound=False)
            audit = chain_audit(fam)
            bound = (beta + 2) * p0.width + (beta + 1) * p1.width
            runs.append({"kind": kind, "beta": beta, "seed": seed,
                         "family": fam, "audit": audit, "bound": bound})
    return runs


class TestCriterion4:
    def test_interpolation_bound_hundred_pairs(self, interpolation_sweep):
        violations = [r for r in interpolation_sweep
                      if r["family"].width > r["bound"] + 1e-9]
        ok = len(interpolation_sweep) == 100 and not violations
        worst = max(r["family"].width / r["bound"] for r in interpolation_sweep)
        report(4, "interpolation width bound on 100 randomized pairs", ok,
               f"violations {len(violations)}, worst width/bound {worst:.3f}")


class TestCriterion5:
    def test_chain_audit_all_runs(self, interpolation_sweep):
        flagged = [r for r in interpolation_sweep if not r["audit"].ok]
        worst = max(r["audit"].chain_front_max for r in interpolation_sweep)
        ok = not flagged
        report(5, "merge chains within 1 + beta on every run", ok,
               f"flagged {len(flagged)}, max chain {worst}")


class TestCriterion6:
    def test_simplex_interpolation_bounds(self):
        from urywidth.foliation import interpolate_simplex
        from urywidth.instances import (bfs_levels, disk_surface,
                                        two_hole_square,
                                        vertex_level_foliation)
        disk = disk_surface(5, 1)
        d0 = vertex_level_foliation(disk, bfs_levels(disk, [0]))
        d1 = vertex_level_foliation(disk, bfs_levels(disk, [2]))
        d2 = vertex_level_foliation(disk, bfs_levels(disk, [4]))
        m1 = interpolate_simplex([d0, d1])
        spot_m1 = m1.audit.improved_bound == 3 and m1.audit.improved_ok
        th = two_hole_square(5)
        t0 = vertex_level_foliation(th, bfs_levels(th, [0]))
        t1 = vertex_level_foliation(th, bfs_levels(th, [30]))
        m1b = interpolate_simplex([t0, t1])
        spot_b2 = (m1b.audit.beta == 2 and m1b.audit.improved_bound == 7
                   and m1b.audit.improved_ok)
        m2 = interpolate_simplex([d0, d1, d2])
        spot_m2 = m2.audit.improved_bound == 7 and m2.audit.improved_ok
        ok = spot_m1 and spot_b2 and spot_m2 and m2.audit.chain_ok
        report(6, "simplex interpolation bounds (m=1 and m=2, normalized)",
               ok, f"m1 width {m1.audit.measured_width:.3f} <= 3; "
                   f"m1 beta2 {m1b.audit.measured_width:.3f} <= 7; "
                   f"m2 width {m2.audit.measured_width:.3f} <= 7")


class TestCriterion7:
    def test_recurrence_closed_form(self):
        from urywidth.waist import (recurrence_closed_form, recurrence_width,
                                    waist_constant)
        worst = 0.0
        for beta in range(11):
            for w0 in (1.0, 0.37, 4.2):
                seq = recurrence_width(w0, w0, beta, 6, 0.0)
                for k, wk in enumerate(seq, start=1):
                    ref = recurrence_closed_form(w0, beta, k)
                    worst = max(worst, abs(wk - ref) / max(ref, 1.0))
        ok = worst < 1e-12 and abs(waist_constant(1, 0) - 1 / 3) < 1e-15
        report(7, "width recurrence closed form and constant(1,0)=1/3", ok,
               f"max rel dev {worst:.2e}")


class TestCriterion8:
    def test_skeletal_twenty_seeds(self):
        from urywidth.complexes import SimplicialComplex
        from urywidth.instances import (annulus_surface, bfs_levels,
                                        vertex_level_foliation)
        from urywidth.waist import constant_metric_bundle, skeletal_construction
        ann = annulus_surface(6, 1)
        base = SimplicialComplex([(0, 1)], {0: np.array([0.0]),
                                            1: np.array([1.0])})
        violations = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            srcs = rng.choice(list(ann.vertices), size=3, replace=False)
            fols = [vertex_level_foliation(ann, bfs_levels(ann, [int(s)]))
                    for s in srcs]
            B = constant_metric_bundle(base, fols[0].sigma,
                                       {0: fols[0], 1: fols[1]},
                                       {(0, 1): fols[2]})
            sc = skeletal_construction(B, check_bound=False)
            if not sc.report.certified:
                violations += 1
        ok = violations == 0
        report(8, "skeletal construction within recurrence, 20 seeds", ok,
               f"violations {violations}")


class TestCriterion9:
    @pytest.mark.parametrize("m,k", [(1, 0), (1, 1)])
    def test_bundle_configuration(self, m, k):
        from urywidth.bundlemetric import (BundleConstruction,
                                           core_identity_check,
                                           fiber_witness_bundle)
        cs = {}
        eig_ok = True
        core_ok = True
        for eps in (0.1, 0.05):
            b = BundleConstruction(m=m, k=k, eps=eps)
            rep = core_identity_check(b, n_samples=10_000, seed=1)
            core_ok &= rep["max_identity_deviation"] <= 1e-12
            rng = np.random.default_rng(0)
            P = rng.uniform(-4.5, 4.5, (10_000, b.n))
            s = b.metric_scale(P)
            eig_ok &= bool(s.min() >= eps - 1e-15 and s.max() <= 1 + 1e-15)
            cert = fiber_witness_bundle(b, np.zeros(m), n_fiber=20_000,
                                        n_graph=10_000, seed=3,
                                        n_anchors=32, local_samples=6_000)
            cs[eps] = cert.extra["C"]
        drift = abs(cs[0.05] - cs[0.1]) / cs[0.1]
        ok = core_ok and eig_ok and drift <= 0.25
        report(9, f"bundle (m={m}, k={k}): core identity, eigenvalue range, "
                  "witness scaling", ok,
               f"C(0.1)={cs[0.1]:.3f}, C(0.05)={cs[0.05]:.3f}, "
               f"drift {100*drift:.1f}%")


class TestCriterion10:
    def test_structural_suites(self):
        from conftest import grid_patch, random_complex, random_levels_map
        from urywidth.complexes import (barycentric_subdivide,
                                        check_map_connected,
                                        connected_factorization, h1_rank,
                                        h1_onto_check)
        rng = np.random.default_rng(10)
        closure_ok = all(random_complex(rng).is_face_closed()
                         for _ in range(25))
        h1_ok = True
        for _ in range(20):
            K = random_complex(rng)
            h1_ok &= h1_rank(barycentric_subdivide(K)) == h1_rank(K)
        reeb_ok = True
        onto_ok = True
        for _ in range(50):
            K = grid_patch(rng)
            f, _t = random_levels_map(rng, K)
            ft, _y, _q = connected_factorization(f)
            reeb_ok &= check_map_connected(ft)[0]
            onto_ok &= h1_onto_check(ft)
        # composed cover multiplicity (m+1)(d+1)
        from urywidth.width import BoxPiece, Cover, compose_covers
        carrier = rng.uniform(0, 1, (30_000, 2))
        cover_y = Cover([BoxPiece(np.array([-0.01]), np.array([0.6])),
                         BoxPiece(np.array([0.4]), np.array([1.01]))],
                        carrier=np.linspace(0, 1, 100)[:, None],
                        is_open=True, declared_multiplicity=2)
        parts = [[BoxPiece(np.array([-0.01, -0.01]), np.array([0.62, 0.55])),
                  BoxPiece(np.array([-0.01, 0.45]), np.array([0.62, 1.01]))],
                 [BoxPiece(np.array([0.38, -0.01]), np.array([1.01, 0.55])),
                  BoxPiece(np.array([0.38, 0.45]), np.array([1.01, 1.01]))]]
        cc = compose_covers(lambda P: P[:, :1], cover_y, parts, carrier,
                            per_piece_multiplicity=2)
        mult_ok = cc.multiplicity_on_samples() <= 4
        ok = closure_ok and h1_ok and reeb_ok and onto_ok and mult_ok
        report(10, "structural suites (closure, h1 invariance, factored "
                   "maps, cover multiplicity)", ok,
               f"closure {closure_ok}, h1 {h1_ok}, reeb {reeb_ok}, "
               f"onto {onto_ok}, mult {mult_ok}")
