"""Command-line front end.

Subcommands: simulate, snapshot, dcrit, duality-check, contour. Exit codes:
0 success, 1 usage error, 2 data-quality error, 3 internal invariant
violation. Flags override values from an optional JSON config file; the
manifest written next to the outputs records the merged configuration and
is sufficient to reproduce every output byte-exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, contour, engine, kernels, lattice, percolation, stats
from .artifacts import (trajectory_rows, write_curve_csv, write_manifest,
                        write_ppm, write_trajectory_csv)
from .backend import backend_name
from .errors import (ConfigurationError, CouplingViolationError,
                     DataQualityError, EmpiresError, InvariantViolation)

KERNEL_CHOICES = list(kernels.CLOSED_FORM_KINDS)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def parse_lattice(text: str) -> lattice.LatticeSpec:
    try:
        topo, dims = text.split(":")
        w, h = dims.lower().split("x")
        return lattice.LatticeSpec(topo, int(w), int(h))
    except ConfigurationError:
        raise
    except Exception:
        raise ConfigurationError(
            f"bad lattice {text!r}; expected e.g. square:81x81 or hex:64x64")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _add_common(p: _Parser):
    p.add_argument("--config", default=None,
                   help="JSON file with defaults; flags take precedence")
    p.add_argument("--lattice", default=None, help="e.g. square:81x81")
    p.add_argument("--kernel", default=None)
    p.add_argument("--rate-scale", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--scheduler", default=None,
                   choices=list(engine.SCHEDULERS))
    p.add_argument("--stop-time", type=float, default=None)
    p.add_argument("--stop-regions", type=int, default=None)
    p.add_argument("--stop-fraction", type=float, default=None)
    p.add_argument("--out-dir", default=None)


_DEFAULTS = {
    "lattice": "square:81x81",
    "kernel": "constant",
    "rate_scale": 1.0,
    "seed": 1,
    "replicas": 1,
    "scheduler": engine.AGGREGATE_SAMPLER,
    "stop_time": None,
    "stop_regions": None,
    "stop_fraction": None,
    "out_dir": "out",
}


def merged_config(args, extra_defaults=None) -> dict:
    merged = dict(_DEFAULTS)
    if extra_defaults:
        merged.update(extra_defaults)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_conf = json.load(fh)
        unknown = set(file_conf) - set(merged)
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        merged.update(file_conf)
    for key in merged:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def build_stop(conf) -> engine.StopRule:
    chosen = [k for k in ("stop_time", "stop_regions", "stop_fraction")
              if conf.get(k) is not None]
    if len(chosen) > 1:
        raise ConfigurationError(f"at most one stop rule, got {chosen}")
    if not chosen:
        return engine.StopRule.single_region()
    if chosen[0] == "stop_time":
        return engine.StopRule.at_time(conf["stop_time"])
    if chosen[0] == "stop_regions":
        return engine.StopRule.at_regions(conf["stop_regions"])
    return engine.StopRule.at_fraction(conf["stop_fraction"])


def build_kernel(conf) -> kernels.KernelSpec:
    return kernels.KernelSpec(conf["kernel"], conf["rate_scale"])


def _manifest_base(command, conf, started):
    return {
        "command": command,
        "config": {k: v for k, v in conf.items()},
        "tool_version": __version__,
        "backend": backend_name(),
        "wall_clock_seconds": round(time.time() - started, 3),
    }


# ---------------------------------------------------------------------- #
# subcommands


def cmd_simulate(args) -> int:
    started = time.time()
    conf = merged_config(args)
    spec = parse_lattice(conf["lattice"])
    config = engine.EngineConfig(seed=conf["seed"], kernel=build_kernel(conf),
                                 scheduler=conf["scheduler"],
                                 stop=build_stop(conf))
    out = Path(conf["out_dir"])
    out.mkdir(parents=True, exist_ok=True)

    results = engine.run_replicas(spec, config, conf["replicas"],
                                  engine.ObserverSpec(record_events=False))
    artifacts = []
    per_replica = []
    for res in results:
        samples = stats.trajectory(res)
        per_replica.append(samples)
        path = out / f"trajectory_r{res.replica:03d}.csv"
        write_trajectory_csv(path, trajectory_rows(res.replica, conf["seed"],
                                                   samples))
        artifacts.append(str(path))
    if len(per_replica) >= 2:
        curve = stats.percolation_function(per_replica, spec.n_cells)
        curve_path = out / "curve.csv"
        write_curve_csv(curve_path, curve)
        artifacts.append(str(curve_path))

    manifest = _manifest_base("simulate", conf, started)
    manifest["artifacts"] = artifacts
    write_manifest(out / "manifest.json", manifest)
    print(f"wrote {len(artifacts)} artifact(s) to {out}")
    return 0


def cmd_snapshot(args) -> int:
    started = time.time()
    conf = merged_config(args, {"at_density": "0.075,0.025"})
    if getattr(args, "at_density", None):
        conf["at_density"] = args.at_density
    spec = parse_lattice(conf["lattice"])
    densities = _floats(conf["at_density"])
    config = engine.EngineConfig(seed=conf["seed"], kernel=build_kernel(conf),
                                 scheduler=conf["scheduler"],
                                 stop=build_stop(conf))
    out = Path(conf["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    res = engine.run(spec, config,
                     engine.ObserverSpec(record_events=False,
                                         snapshot_densities=tuple(densities)))
    artifacts = []
    reached = {snap.density for snap in res.snapshots}
    for snap in res.snapshots:
        path = out / f"snapshot_D{snap.density:g}.ppm"
        write_ppm(path, spec.width, spec.height, snap.owners)
        artifacts.append(str(path))
    for d in densities:
        if d not in reached:
            print(f"warning: density {d:g} not reached before the stop rule",
                  file=sys.stderr)

    manifest = _manifest_base("snapshot", conf, started)
    manifest["config"]["at_density"] = conf["at_density"]
    manifest["artifacts"] = artifacts
    write_manifest(out / "manifest.json", manifest)
    print(f"wrote {len(artifacts)} snapshot(s) to {out}")
    return 0


def cmd_dcrit(args) -> int:
    started = time.time()
    conf = merged_config(args, {"sizes": "41,81", "theta": 0.05,
                                "kernels": "all"})
    for key in ("sizes", "theta", "kernels"):
        value = getattr(args, key, None)
        if value is not None:
            conf[key] = value
    sizes = _ints(conf["sizes"])
    if len(sizes) < 2:
        raise ConfigurationError("dcrit needs at least 2 lattice sizes")
    if conf["replicas"] < 2:
        raise ConfigurationError("dcrit needs at least 2 replicas per size")
    kinds = (list(kernels.CLOSED_FORM_KINDS[:4]) if conf["kernels"] == "all"
             else [k.strip() for k in conf["kernels"].split(",")])
    out = Path(conf["out_dir"])
    out.mkdir(parents=True, exist_ok=True)

    rows = [("kernel", "size", "area", "dcrit_at_size", "dcrit_extrapolated",
             "spread")]
    for kind in kinds:
        kernel = kernels.KernelSpec(kind, conf["rate_scale"])
        curves = {}
        for size in sizes:
            spec = lattice.square(size, size)
            config = engine.EngineConfig(seed=conf["seed"], kernel=kernel,
                                         scheduler=conf["scheduler"],
                                         stop=engine.StopRule.single_region())
            results = engine.run_replicas(
                spec, config, conf["replicas"],
                engine.ObserverSpec(record_events=False))
            curves[spec.n_cells] = stats.percolation_function(
                [stats.trajectory(r) for r in results], spec.n_cells)
        est = stats.estimate_dcrit(curves, conf["theta"])
        for size in sizes:
            rows.append((kind, size, size * size,
                         est.per_size[size * size], est.dcrit, est.spread))
        largest = sizes[-1] * sizes[-1]
        print(f"{kind:22s} D_crit ~ {est.per_size[largest]:.4f} "
              f"(at {sizes[-1]}^2; extrapolated {est.dcrit:.4f} "
              f"+- {est.spread:.4f})")

    table = out / "dcrit.csv"
    with open(table, "w") as fh:
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")
    manifest = _manifest_base("dcrit", conf, started)
    manifest["artifacts"] = [str(table)]
    write_manifest(out / "manifest.json", manifest)
    return 0


def cmd_duality_check(args) -> int:
    started = time.time()
    conf = merged_config(args, {"size": 16, "seeds": 20, "times": "0.3,0.7"})
    for key in ("size", "seeds", "times"):
        value = getattr(args, key, None)
        if value is not None:
            conf[key] = value
    size = int(conf["size"])
    n_seeds = int(conf["seeds"])
    times = _floats(conf["times"]) if isinstance(conf["times"], str) \
        else list(conf["times"])
    out = Path(conf["out_dir"])
    out.mkdir(parents=True, exist_ok=True)

    bad = 0
    for k in range(n_seeds):
        report = percolation.couple_with_empire(conf["seed"], size, stream=k)
        if not report.ok:
            bad += 1
            print(f"FAIL stream {k}: {report.mismatch_events} mismatching "
                  f"event(s), first at {report.first_mismatch_event}")
    # component-size histograms at the requested times, accumulated over seeds
    hist: dict[float, dict[int, int]] = {t: {} for t in times}
    for k in range(n_seeds):
        _, snaps = percolation.percolate(conf["seed"], size, times, stream=k)
        for snap in snaps:
            for v in snap.vertex_counts:
                hist[snap.t][v] = hist[snap.t].get(v, 0) + 1
    hist_path = out / "component_histogram.csv"
    with open(hist_path, "w") as fh:
        fh.write("t,component_vertices,count\n")
        for t in times:
            for v in sorted(hist[t]):
                fh.write(f"{t!r},{v},{hist[t][v]}\n")

    manifest = _manifest_base("duality-check", conf, started)
    manifest["artifacts"] = [str(hist_path)]
    write_manifest(out / "manifest.json", manifest)
    if bad:
        raise CouplingViolationError(
            f"{bad}/{n_seeds} streams produced mismatched multisets")
    print(f"duality-check PASS: {n_seeds} streams x {size}x{size}, "
          f"0 mismatches; histogram at {hist_path}")
    return 0


def cmd_contour(args) -> int:
    started = time.time()
    conf = merged_config(args, {"n_max": 50, "delta": "0.05,0.1,0.2",
                                "mc_paths": 100000,
                                "identity_n": "4,6,8",
                                "identity_times": "0.05,0.2,1.0"})
    for key in ("n_max", "delta", "mc_paths", "identity_n", "identity_times"):
        value = getattr(args, key, None)
        if value is not None:
            conf[key] = value
    out = Path(conf["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    deltas = _floats(conf["delta"])

    report = contour.convergence_sum(deltas, int(conf["n_max"]))
    inner_path = out / "inner_sums.csv"
    with open(inner_path, "w") as fh:
        fh.write("half_length,inner_sum,inner_sum_over_n\n")
        for n in report.half_lengths:
            fh.write(f"{n},{float(report.inner_sums[n])!r},"
                     f"{report.linear_ratio[n]!r}\n")
    partial_path = out / "partial_sums.csv"
    with open(partial_path, "w") as fh:
        fh.write("delta,half_length,partial_sum\n")
        for delta in deltas:
            for n, s in zip(report.half_lengths, report.partial_sums[delta]):
                fh.write(f"{delta!r},{n},{s!r}\n")

    ident_path = out / "identity_check.csv"
    worst = 0.0
    with open(ident_path, "w") as fh:
        fh.write("half_length,t,exterior,interior,p_destroyed_chain,"
                 "p_weighted_pure,z,compared\n")
        for n in _ints(str(conf["identity_n"])):
            rows = contour.survival_identity_check(
                n, _floats(str(conf["identity_times"])),
                int(conf["mc_paths"]), conf["seed"])
            for r in rows:
                fh.write(f"{r.half_length},{r.t!r},{r.exterior},{r.interior},"
                         f"{r.p_with_destruction!r},{r.p_weighted_pure!r},"
                         f"{r.z!r},{int(r.compared)}\n")
                if r.compared:
                    worst = max(worst, abs(r.z))

    manifest = _manifest_base("contour", conf, started)
    manifest["artifacts"] = [str(inner_path), str(partial_path),
                             str(ident_path)]
    write_manifest(out / "manifest.json", manifest)
    tail = ", ".join(f"delta={d:g}: tail ratio {report.tail_ratio[d]:.4f}"
                     for d in deltas)
    print(f"contour: inner sums up to n={conf['n_max']} "
          f"(largest inner/n {max(report.linear_ratio.values()):.3f}); {tail}")
    print(f"identity check worst |z| = {worst:.2f}")
    return 0


# ---------------------------------------------------------------------- #


def build_parser() -> _Parser:
    parser = _Parser(prog="empires",
                     description="Simulator and analysis tools for stochastic "
                                 "merging of adjacent lattice regions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run replicas, write trajectories "
                                        "and the averaged S(D) curve")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("snapshot", help="raster snapshots at given densities")
    _add_common(p)
    p.add_argument("--at-density", default=None,
                   help="comma-separated D triggers, e.g. 0.075,0.025")
    p.set_defaults(fn=cmd_snapshot)

    p = sub.add_parser("dcrit", help="multi-size critical-density table")
    _add_common(p)
    p.add_argument("--sizes", default=None, help="e.g. 41,81")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--kernels", default=None,
                   help="comma list or 'all' (the four standard models)")
    p.set_defaults(fn=cmd_dcrit)

    p = sub.add_parser("duality-check",
                       help="verify the bond-percolation coupling")
    _add_common(p)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--times", default=None)
    p.set_defaults(fn=cmd_duality_check)

    p = sub.add_parser("contour", help="circuit-survival sums and identity "
                                       "checks")
    _add_common(p)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--delta", default=None)
    p.add_argument("--mc-paths", dest="mc_paths", type=int, default=None)
    p.add_argument("--identity-n", dest="identity_n", default=None)
    p.add_argument("--identity-times", dest="identity_times", default=None)
    p.set_defaults(fn=cmd_contour)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataQualityError as exc:
        print(f"data-quality error: {exc}", file=sys.stderr)
        return 2
    except (CouplingViolationError, InvariantViolation) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except EmpiresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
