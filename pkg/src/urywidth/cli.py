"""Command-line driver: construct, certify, and export the artifacts.

Exit codes: 0 all invariants pass, 1 invariant failure, 2 bad configuration.
Outputs are deterministic for a fixed config and seed (sorted JSON keys,
fixed float formatting); every manifest embeds the config hash and the
package version.  Set URYWIDTH_THREADS to pin the kernel thread count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path


def _setup_threads():
    threads = os.environ.get("URYWIDTH_THREADS")
    if threads:
        os.environ.setdefault("NUMBA_NUM_THREADS", threads)


_setup_threads()

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402


@dataclass
class RunConfig:
    """Reproducible run description; round-trips through JSON bit-exactly."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "."

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def config_hash(self) -> str:
        semantic = {"command": self.command, "params": self.params,
                    "seed": self.seed}
        return hashlib.sha256(
            json.dumps(semantic, sort_keys=True).encode()).hexdigest()[:16]


def _write_json(path: Path, payload: dict, config: RunConfig) -> None:
    payload = dict(payload)
    payload["config_hash"] = config.config_hash()
    payload["version"] = __version__
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1,
                               default=float) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    from .width import write_csv
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, header, rows)


def cmd_constants(args, config: RunConfig) -> int:
    from .waist import WaistConstants
    rows = []
    betas = range(0, args.beta + 1) if args.all_beta else [args.beta]
    for beta in betas:
        wc = WaistConstants(args.m, beta)
        rows.append((args.m, beta, wc.c_improved, wc.c_basic))
        print(f"m={args.m} beta={beta}  improved={wc.c_improved:.10g}  "
              f"basic={wc.c_basic:.10g}")
    out = Path(config.out)
    _write_json(out / "constants.json",
                {"table": [{"m": m, "beta": b, "improved": ci, "basic": cb}
                           for (m, b, ci, cb) in rows]}, config)
    _write_csv(out / "constants.csv", ["m", "beta", "improved", "basic"], rows)
    return 0


def cmd_construct(args, config: RunConfig) -> int:
    out = Path(config.out)
    if args.what == "ball-simplex":
        from .localjoin import ball_simplex_map
        bs = ball_simplex_map(args.m, args.d, args.eps)
        rng = np.random.default_rng(config.seed)
        tvals = rng.dirichlet(np.ones(args.m + 1), size=args.t_count)
        cert = bs.witness_certificate(tvals, n_samples=args.samples,
                                      seed=config.seed)
        manifest = {
            "construction": "ball-simplex",
            "m": args.m, "d": args.d, "n": bs.n, "eps": args.eps,
            "h": bs.join.tri.h, "seed": config.seed,
            "certificate": cert.to_json_dict(),
        }
        _write_json(out / "ball_simplex_manifest.json", manifest, config)
        ok = cert.extra["passes"]
        print(f"ball-simplex: max witness-fiber diameter {cert.W:.6g} "
              f"(eps {args.eps}) -> {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.what == "gromov-cube":
        from .localjoin import gromov_cube_map
        gc = gromov_cube_map(args.eps)
        ys = np.linspace(0.05, 0.95, args.t_count)
        cert = gc.witness_certificate(ys, n_samples=args.samples,
                                      seed=config.seed)
        manifest = {
            "construction": "gromov-cube", "eps": args.eps,
            "seed": config.seed, "certificate": cert.to_json_dict(),
        }
        _write_json(out / "gromov_cube_manifest.json", manifest, config)
        _write_csv(out / "gromov_cube_widths.csv", ["y", "witness_diameter"],
                   sorted((k.split("=")[1], v)
                          for k, v in cert.fiber_table.items()))
        ok = cert.extra["C"] <= args.tolerance
        print(f"gromov-cube: measured C {cert.extra['C']:.4g} "
              f"(cap {args.tolerance}) -> {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.what == "bundle":
        from .bundlemetric import (BundleConstruction, core_identity_check,
                                   fiber_witness_bundle)
        eps_values = ([float(v) for v in args.eps_sweep.split(",")]
                      if args.eps_sweep else [args.eps])
        certs = []
        for eps in eps_values:
            b = BundleConstruction(m=args.m, k=args.k, eps=eps)
            try:
                core = core_identity_check(b, seed=config.seed)
            except AssertionError as exc:
                print(f"bundle: core identity FAILED: {exc}")
                return 1
            cert = fiber_witness_bundle(b, np.zeros(args.m),
                                        n_fiber=args.samples,
                                        n_graph=min(args.samples, 20_000),
                                        seed=config.seed)
            certs.append((eps, core, cert))
        manifest = {
            "construction": "bundle", "m": args.m, "k": args.k,
            "n": args.m * args.k + 2 * args.m + args.k,
            "seed": config.seed,
            "runs": [{"eps": eps, "core_identity": core,
                      "certificate": cert.to_json_dict()}
                     for eps, core, cert in certs],
        }
        _write_json(out / "bundle_manifest.json", manifest, config)
        _write_csv(out / "bundle_widths.csv",
                   ["eps", "witness_width", "C", "pinched_diameter"],
                   [(eps, cert.W, cert.extra["C"], cert.extra["star_diameter"])
                    for eps, _core, cert in certs])
        for eps, _core, cert in certs:
            print(f"bundle (m={args.m}, k={args.k}, eps={eps}): core identity "
                  f"PASS, witness C {cert.extra['C']:.4g}, "
                  f"pinched-part diameter {cert.extra['star_diameter']:.4g}")
        return 0
    print(f"unknown construction {args.what!r}", file=sys.stderr)
    return 2


def cmd_interpolate(args, config: RunConfig) -> int:
    from .foliation import WidthBoundViolation, chain_audit, interpolate, interpolate_simplex
    from .instances import (angular_foliation, annulus_surface, bfs_levels,
                            disk_surface, radial_foliation,
                            random_foliation_pair, vertex_level_foliation)
    out = Path(config.out)
    try:
        if args.demo == "annulus":
            ann = annulus_surface(n_sectors=args.grid, n_rings=1)
            p0 = radial_foliation(ann, args.grid, 1)
            p1 = angular_foliation(ann, args.grid)
        elif args.demo in ("disk", "twohole"):
            p0, p1 = random_foliation_pair(args.demo, config.seed)
        elif args.demo == "simplex-m2":
            disk = disk_surface(n_sectors=5, n_rings=1)
            fols = [vertex_level_foliation(disk, bfs_levels(disk, [s]))
                    for s in (0, 2, 4)]
            fam = interpolate_simplex(fols)
            _write_json(out / "simplex_family.json",
                        {"audit": fam.audit.to_json_dict(),
                         "stage_widths": [st.width for st in fam.stages]},
                        config)
            ok = fam.audit.improved_ok and fam.audit.chain_ok
            print(f"simplex-m2: width {fam.audit.measured_width:.4g} <= "
                  f"{fam.audit.improved_bound} -> {'PASS' if ok else 'FAIL'}")
            return 0 if ok else 1
        else:
            print(f"unknown demo {args.demo!r}", file=sys.stderr)
            return 2
        fam = interpolate(p0, p1)
    except WidthBoundViolation as exc:
        print(f"interpolation bound FAILED: {exc}", file=sys.stderr)
        return 1
    audit = chain_audit(fam)
    _write_json(out / "interpolation.json",
                {"family": fam.to_json_dict(),
                 "chain_audit": audit.to_json_dict()}, config)
    _write_csv(out / "interpolation_widths.csv", ["t", "width"],
               fam.width_rows())
    ok = audit.ok
    print(f"interpolate {args.demo}: max width {fam.width:.6g} <= bound "
          f"{fam.bound:.6g}; chains <= {audit.chain_bound} -> "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="urywidth",
        description="Construct and numerically certify width constructions: "
                    "small-fiber maps, foliation interpolation, waist "
                    "constants, and the squeezed bundle metric.",
        epilog="Environment: URYWIDTH_THREADS sets the kernel thread count; "
               "URYWIDTH_DISABLE_NUMBA=1 forces the pure-numpy kernels. "
               "Runs are deterministic for a fixed command and --seed.")
    ap.add_argument("--out", default="urywidth_out", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a construction and certify it")
    c.add_argument("what", choices=["ball-simplex", "gromov-cube", "bundle"])
    c.add_argument("--m", type=int, default=1)
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--k", type=int, default=0)
    c.add_argument("--eps", type=float, default=0.2)
    c.add_argument("--grid", type=int, default=8, help="grid resolution")
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--t-count", type=int, default=50,
                   help="number of sampled target values")
    c.add_argument("--tolerance", type=float, default=6.0,
                   help="cap on the measured witness constant")
    c.add_argument("--eps-sweep", default=None,
                   help="comma-separated eps list (bundle): emits the "
                        "width-vs-eps CSV")
    c.set_defaults(fn=cmd_construct)

    i = sub.add_parser("interpolate", help="run an interpolation demo")
    i.add_argument("demo", choices=["annulus", "disk", "twohole", "simplex-m2"])
    i.add_argument("--grid", type=int, default=6)
    i.set_defaults(fn=cmd_interpolate)

    k = sub.add_parser("constants", help="waist constant table")
    k.add_argument("--m", type=int, default=1)
    k.add_argument("--beta", type=int, default=0)
    k.add_argument("--all-beta", action="store_true",
                   help="list all beta up to --beta")
    k.set_defaults(fn=cmd_constants)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    config = RunConfig(command=args.command,
                       params={k: v for k, v in sorted(vars(args).items())
                               if k not in ("fn", "out", "seed")},
                       seed=args.seed, out=args.out)
    try:
        return args.fn(args, config)
    except ValueError as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
