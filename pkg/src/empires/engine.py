"""Exact event-driven simulation of the region-merging process.

Each live adjacency edge carries an independent exponential clock at its
kernel rate. Two interchangeable schedulers realise the same law:

* ``aggregate-sampler`` — waiting time Exponential(total rate), edge picked
  with probability rate/total via a Fenwick tree (O(log m) per event);
* ``per-edge-queue``    — a lazy-deletion priority queue of per-edge
  timers; timers of re-weighted edges are redrawn, which the memoryless
  property makes exact.

Runs are deterministic given (seed, replica): replica k consumes stream k
of the seed (see `empires.rng`). Simultaneous timestamps have probability
zero; the queue breaks hypothetical ties by timer insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lattice as lat
from .backend import core as _core
from .errors import ConfigurationError
from .kernels import KernelSpec
from .partition import Partition
from .rng import derive_stream

AGGREGATE_SAMPLER = "aggregate-sampler"
PER_EDGE_QUEUE = "per-edge-queue"
SCHEDULERS = (AGGREGATE_SAMPLER, PER_EDGE_QUEUE)

_SCHED_CODE = {AGGREGATE_SAMPLER: _core.SCHED_AGGREGATE,
               PER_EDGE_QUEUE: _core.SCHED_QUEUE}


@dataclass(frozen=True)
class StopRule:
    """When to end a run; exactly one rule is active per run."""

    kind: str  # "time" | "regions" | "fraction" | "single"
    value: float = 0.0

    @classmethod
    def at_time(cls, t_max: float) -> "StopRule":
        if not t_max >= 0.0:
            raise ConfigurationError("stop time must be nonnegative")
        return cls("time", float(t_max))

    @classmethod
    def at_regions(cls, target: int) -> "StopRule":
        if target < 1:
            raise ConfigurationError("region target must be >= 1")
        return cls("regions", float(target))

    @classmethod
    def at_fraction(cls, threshold: float) -> "StopRule":
        if not 0.0 < threshold <= 1.0:
            raise ConfigurationError("fraction threshold must be in (0, 1]")
        return cls("fraction", float(threshold))

    @classmethod
    def single_region(cls) -> "StopRule":
        return cls("single")

    def _code(self) -> tuple[int, float]:
        if self.kind == "time":
            return _core.STOP_TIME, self.value
        if self.kind == "regions":
            return _core.STOP_REGIONS, self.value
        if self.kind == "fraction":
            return _core.STOP_FRACTION, self.value
        if self.kind == "single":
            return _core.STOP_REGIONS, 1.0
        raise ConfigurationError(f"unknown stop rule {self.kind!r}")


@dataclass(frozen=True)
class EngineConfig:
    seed: int
    kernel: KernelSpec
    scheduler: str = AGGREGATE_SAMPLER
    stop: StopRule = StopRule.single_region()

    def __post_init__(self):
        if self.scheduler not in SCHEDULERS:
            raise ConfigurationError(f"unknown scheduler {self.scheduler!r}")


@dataclass(frozen=True)
class ObserverSpec:
    """What to record during a run.

    sample_every: statistics row every k-th event (None picks
    initial_regions // 200, the default trajectory cadence); 0 disables.
    time_probes: reference-cell region snapshots at fixed times.
    fraction_probes: first time the largest-region fraction crosses each
    threshold (ascending).
    snapshot_densities: capture the full owner map when the region density
    first drops to each value (descending).
    """

    sample_every: int | None = None
    time_probes: tuple[float, ...] = ()
    fraction_probes: tuple[float, ...] = ()
    snapshot_densities: tuple[float, ...] = ()
    reference_cell: int = 0
    record_events: bool = True


@dataclass(frozen=True)
class EventLog:
    """Merge events in time order; replays bit-identically from the seed."""

    times: list[float]
    region_a: list[int]
    region_b: list[int]
    survivor: list[int]

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.region_a, self.region_b,
                        self.survivor))


@dataclass(frozen=True)
class ProbeRow:
    """State of the reference cell's region at a fixed probe time."""

    t: float
    ref_area: int
    ref_perimeter: int
    regions: int
    sum_sq_area: int
    max_area: int


@dataclass(frozen=True)
class Snapshot:
    density: float
    t: float
    owners: list[int]


@dataclass
class RunResult:
    lattice: lat.LatticeSpec
    config: EngineConfig
    replica: int
    final_time: float
    n_events: int
    events: EventLog | None
    raw_samples: list[tuple[float, int, int, int]]  # (t, regions, sum a^2, max a)
    probes: list[ProbeRow]
    fraction_times: dict[float, float]  # threshold -> crossing time (nan if never)
    snapshots: list[Snapshot]
    partition: Partition = field(repr=False, default=None)


def default_sample_every(n_cells: int) -> int:
    return max(1, n_cells // 200)


def run(spec: lat.LatticeSpec, config: EngineConfig,
        observers: ObserverSpec = ObserverSpec(), replica: int = 0,
        partition: Partition | None = None) -> RunResult:
    """Simulate one replica to its stop rule and collect observations."""
    part = partition if partition is not None else Partition(spec)
    kernel = config.kernel
    stop_kind, stop_value = config.stop._code()
    sample_every = observers.sample_every
    if sample_every is None:
        sample_every = default_sample_every(spec.n_cells)

    time_probes = sorted(observers.time_probes)
    fraction_probes = sorted(observers.fraction_probes)
    densities = sorted(observers.snapshot_densities, reverse=True)

    (final_t, n_events, events, samples, probe_rows, frac_times,
     snaps) = part._core.gillespie_run(
        kernel.code, kernel.scale, kernel.table_fn(),
        derive_stream(config.seed, replica),
        _SCHED_CODE[config.scheduler],
        stop_kind, stop_value, sample_every,
        time_probes, observers.reference_cell, fraction_probes,
        densities, observers.record_events)

    log = None
    if events is not None:
        log = EventLog(list(events[0]), list(events[1]), list(events[2]),
                       list(events[3]))
    return RunResult(
        lattice=spec,
        config=config,
        replica=replica,
        final_time=final_t,
        n_events=n_events,
        events=log,
        raw_samples=[tuple(s) for s in samples],
        probes=[ProbeRow(*row) for row in probe_rows],
        fraction_times={thr: t for thr, t in zip(fraction_probes, frac_times)},
        snapshots=[Snapshot(d, t, list(o)) for d, t, o in snaps],
        partition=part,
    )


def run_replicas(spec: lat.LatticeSpec, config: EngineConfig, n_replicas: int,
                 observers: ObserverSpec = ObserverSpec(),
                 first_replica: int = 0) -> list[RunResult]:
    """Run independent replicas on streams first_replica..+n (sequentially;
    streams are independent, so callers may distribute them instead)."""
    return [run(spec, config, observers, replica=first_replica + k)
            for k in range(n_replicas)]


def total_initial_rate(spec: lat.LatticeSpec, config: EngineConfig) -> float:
    """Sum of edge rates of the fresh lattice (mean first waiting time is
    its reciprocal); mostly useful for sanity checks."""
    part = Partition(spec)
    total = 0.0
    kernel = config.kernel
    from .kernels import rate_from_aggregates
    for e in part.edges():
        ra = part.region(e.region_a)
        rb = part.region(e.region_b)
        total += rate_from_aggregates(kernel, ra.area, ra.perimeter,
                                      rb.area, rb.perimeter, e.shared_length)
    return total
