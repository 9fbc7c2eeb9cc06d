"""Discrete-event model of blockchain transaction processing.

The model is a single FIFO mempool drained by blocks minted at a fixed
cadence. Each transaction runs one of four benchmark methods (compute, loop,
store, read) at an integer difficulty; its block-space cost is linear in
difficulty with per-method coefficients. A block packs the queue head-first
until the next transaction would overflow the capacity, and a transaction is
final once ``finality_blocks`` further blocks exist. That is deliberately
simple: throughput then has a closed form, (capacity / block time) divided
by the workload's rate-weighted mean transaction weight, and the simulator
must converge to it under overload. That convergence is what makes the model
trustworthy enough to narrow knowledge-base intervals.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import KBError, SimulationError
from .kb import Interval, KnowledgeBase, SourceRef, validate_knowledge_base
from .bpmn import ProcessProfile

THROUGHPUT_CRITERION = "throughput-tps"
LATENCY_CRITERION = "latency-s"


class BenchMethod(str, Enum):
    COMPUTE = "compute"  # CPU-bound puzzle
    LOOP = "loop"        # counter increments
    STORE = "store"      # state writes
    READ = "read"        # state reads


class ArrivalProcess(str, Enum):
    DETERMINISTIC = "deterministic"
    POISSON = "poisson"


@dataclass(frozen=True)
class CostCoefficients:
    """Block-space cost a + b * difficulty for one method."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise SimulationError(
                f"cost coefficients need a >= 0, b >= 0, a + b > 0; got a={self.a}, b={self.b}"
            )


@dataclass(frozen=True)
class ChainParams:
    block_time: float
    block_capacity: float
    finality_blocks: int
    node_count: int
    method_costs: dict

    def __post_init__(self):
        if self.block_time <= 0:
            raise SimulationError(f"block_time must be > 0, got {self.block_time}")
        if self.block_capacity <= 0:
            raise SimulationError(f"block_capacity must be > 0, got {self.block_capacity}")
        if not isinstance(self.finality_blocks, int) or self.finality_blocks < 0:
            raise SimulationError(f"finality_blocks must be an integer >= 0, got {self.finality_blocks}")
        if not isinstance(self.node_count, int) or self.node_count < 1:
            raise SimulationError(f"node_count must be an integer >= 1, got {self.node_count}")
        costs = {BenchMethod(m): c for m, c in self.method_costs.items()}
        for method in BenchMethod:
            if method not in costs:
                raise SimulationError(f"method_costs missing '{method.value}'")
        object.__setattr__(self, "method_costs", costs)


@dataclass(frozen=True)
class WorkloadEntry:
    method: BenchMethod
    difficulty: int
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "method", BenchMethod(self.method))
        if not isinstance(self.difficulty, int) or self.difficulty < 1:
            raise SimulationError(f"difficulty must be an integer >= 1, got {self.difficulty}")
        if self.rate < 0:
            raise SimulationError(f"rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class WorkloadSpec:
    entries: tuple[WorkloadEntry, ...]
    arrival_process: ArrivalProcess = ArrivalProcess.DETERMINISTIC
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "arrival_process", ArrivalProcess(self.arrival_process))
        if not isinstance(self.seed, int) or self.seed < 0:
            raise SimulationError(f"seed must be an unsigned integer, got {self.seed}")

    @property
    def total_rate(self) -> float:
        return sum(e.rate for e in self.entries)


@dataclass(frozen=True)
class BlockStat:
    index: int
    time: float
    tx_count: int
    weight: float
    pending: int


@dataclass(frozen=True)
class LatencyStats:
    mean: float
    p50: float
    p95: float
    max: float


@dataclass(frozen=True)
class SimResult:
    duration: float
    submitted: int
    committed: int
    pending: int
    throughput: float
    latency: LatencyStats | None
    blocks: tuple[BlockStat, ...]


# ---------------------------------------------------------------------------
# Weights and the capacity oracle
# ---------------------------------------------------------------------------

def tx_weight(method: BenchMethod, difficulty: int, params: ChainParams) -> float:
    """Block space one transaction occupies: a + b * difficulty."""
    if not isinstance(difficulty, int) or difficulty < 1:
        raise SimulationError(f"difficulty must be an integer >= 1, got {difficulty}")
    coeff = params.method_costs[BenchMethod(method)]
    return coeff.a + coeff.b * difficulty


def analytic_capacity(params: ChainParams, workload: WorkloadSpec) -> float:
    """Sustainable throughput: block space per second over mean tx weight."""
    active = [e for e in workload.entries if e.rate > 0]
    total_rate = sum(e.rate for e in active)
    if total_rate <= 0:
        raise SimulationError("workload has no positive arrival rate")
    mean_weight = sum(
        e.rate * tx_weight(e.method, e.difficulty, params) for e in active
    ) / total_rate
    if mean_weight <= 0:
        raise SimulationError("mean transaction weight is zero")
    return (params.block_capacity / params.block_time) / mean_weight


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _arrival_times(
    entry: WorkloadEntry,
    process: ArrivalProcess,
    duration: float,
    rng: np.random.Generator,
) -> np.ndarray:
    if process is ArrivalProcess.DETERMINISTIC:
        # evenly spaced at the midpoint convention: (i + 0.5) / rate
        n = int(np.ceil(entry.rate * duration - 0.5))
        return (np.arange(max(n, 0)) + 0.5) / entry.rate
    n = rng.poisson(entry.rate * duration)
    return np.sort(rng.uniform(0.0, duration, n))


def simulate(params: ChainParams, workload: WorkloadSpec, duration: float) -> SimResult:
    """Run the block pipeline over ``duration`` seconds.

    Blocks are minted at t = block_time, 2*block_time, ...; each packs the
    mempool head-first until the next transaction would not fit. Latency is
    measured from arrival to the block that makes the transaction final,
    which may lie past the end of the run (the block cadence is extrapolated
    rather than truncating the tail). Identical inputs, including the seed,
    give identical results.
    """
    if duration < 10 * params.block_time:
        raise SimulationError(
            f"duration {duration} is below the warm-up guard of 10 block times "
            f"({10 * params.block_time})"
        )
    entries = [e for e in workload.entries if e.rate > 0]
    if not entries or sum(e.rate for e in entries) <= 0:
        raise SimulationError("workload has no positive arrival rate")

    children = np.random.SeedSequence(workload.seed).spawn(len(entries))
    per_entry_times = []
    per_entry_weights = []
    for entry, child in zip(entries, children):
        times = _arrival_times(entry, workload.arrival_process, duration, np.random.default_rng(child))
        weight = tx_weight(entry.method, entry.difficulty, params)
        if weight > params.block_capacity:
            raise SimulationError(
                f"transaction weight {weight:g} ({entry.method.value}, difficulty "
                f"{entry.difficulty}) exceeds block capacity {params.block_capacity:g}"
            )
        per_entry_times.append(times)
        per_entry_weights.append(np.full(len(times), weight))

    times = np.concatenate(per_entry_times)
    weights = np.concatenate(per_entry_weights)
    order = np.argsort(times, kind="stable")
    times, weights = times[order], weights[order]
    n = len(times)

    cumulative = np.concatenate([[0.0], np.cumsum(weights)])
    block_count = int(np.floor(duration / params.block_time + 1e-9))
    block_times = (np.arange(block_count) + 1) * params.block_time
    eligible = np.searchsorted(times, block_times, side="right")

    inclusion_block = np.zeros(n, dtype=np.int64)
    blocks: list[BlockStat] = []
    head = 0
    for k in range(block_count):
        fit = int(np.searchsorted(cumulative, cumulative[head] + params.block_capacity, side="right")) - 1
        new_head = min(fit, int(eligible[k]))
        inclusion_block[head:new_head] = k + 1
        blocks.append(BlockStat(
            index=k + 1,
            time=float(block_times[k]),
            tx_count=new_head - head,
            weight=float(cumulative[new_head] - cumulative[head]),
            pending=int(eligible[k]) - new_head,
        ))
        head = new_head

    committed = head
    if committed:
        latencies = (inclusion_block[:committed] + params.finality_blocks) \
            * params.block_time - times[:committed]
        latency = LatencyStats(
            mean=float(latencies.mean()),
            p50=float(np.percentile(latencies, 50)),
            p95=float(np.percentile(latencies, 95)),
            max=float(latencies.max()),
        )
    else:
        latency = None

    return SimResult(
        duration=float(duration),
        submitted=n,
        committed=committed,
        pending=n - committed,
        throughput=committed / duration,
        latency=latency,
        blocks=tuple(blocks),
    )


# ---------------------------------------------------------------------------
# Interval refinement
# ---------------------------------------------------------------------------

def _intersect(stored: Interval | None, lo: float, hi: float) -> tuple[Interval, bool]:
    """Narrow ``stored`` to the simulated band; True flags an empty overlap."""
    if stored is None:
        return Interval(lo, hi), False
    new_lo, new_hi = max(stored.lo, lo), min(stored.hi, hi)
    if new_lo > new_hi:
        return Interval(lo, hi), True
    return Interval(new_lo, new_hi), False


def refine_intervals(
    kb: KnowledgeBase,
    profile_id: str,
    params_by_profile: dict,
    workload: WorkloadSpec,
) -> KnowledgeBase:
    """Narrow one profile's throughput/latency intervals using simulation.

    Two runs drive the bands: an overloaded run (arrival scaled to twice the
    analytic capacity) pins saturation throughput, giving the band
    [0.95, 1.05] x measured; the workload as given pins latency, giving
    [0.5 x p50, 1.5 x p95]. Stored intervals are intersected with the bands.
    A stored interval disjoint from its band is replaced by the band and the
    conflict recorded in the profile's sources. Returns a new KB with the
    version bumped.
    """
    profile = kb.profile(profile_id)
    params = params_by_profile.get(profile_id)
    if params is None:
        raise SimulationError(f"no chain parameters supplied for profile '{profile_id}'")
    for cid in (THROUGHPUT_CRITERION, LATENCY_CRITERION):
        if cid not in kb.criteria_by_id:
            raise KBError(f"KB lacks criterion '{cid}' required for refinement")

    duration = 200 * params.block_time
    capacity = analytic_capacity(params, workload)
    total_rate = sum(e.rate for e in workload.entries if e.rate > 0)
    scale = max(1.0, 2.0 * capacity / total_rate)
    saturated = replace(workload, entries=tuple(
        replace(e, rate=e.rate * scale) for e in workload.entries
    ))

    sat_result = simulate(params, saturated, duration)
    load_result = sat_result if scale == 1.0 else simulate(params, workload, duration)
    if load_result.committed == 0:
        raise SimulationError(
            "workload produced no committed transactions; cannot refine latency"
        )

    thr_lo, thr_hi = 0.95 * sat_result.throughput, 1.05 * sat_result.throughput
    lat_lo, lat_hi = 0.5 * load_result.latency.p50, 1.5 * load_result.latency.p95

    attrs = dict(profile.attributes)
    thr_interval, thr_conflict = _intersect(attrs.get(THROUGHPUT_CRITERION), thr_lo, thr_hi)
    lat_interval, lat_conflict = _intersect(attrs.get(LATENCY_CRITERION), lat_lo, lat_hi)
    attrs[THROUGHPUT_CRITERION] = thr_interval
    attrs[LATENCY_CRITERION] = lat_interval

    note = (
        f"intervals refined by workload simulation: throughput band "
        f"[{thr_lo:g}, {thr_hi:g}] tx/s, latency band [{lat_lo:g}, {lat_hi:g}] s"
    )
    conflicts = [
        cid for cid, flagged in (
            (THROUGHPUT_CRITERION, thr_conflict), (LATENCY_CRITERION, lat_conflict),
        ) if flagged
    ]
    if conflicts:
        note += f"; stored {', '.join(conflicts)} disjoint from the simulated band, replaced"

    new_profile = replace(
        profile,
        attributes=attrs,
        sources=profile.sources + (SourceRef(ref=note),),
    )
    refined = KnowledgeBase(
        schema_version=kb.schema_version,
        kb_version=kb.kb_version + 1,
        criteria=kb.criteria,
        profiles=tuple(new_profile if p.id == profile_id else p for p in kb.profiles),
    )
    validate_knowledge_base(refined)
    return refined


def default_chain_params() -> ChainParams:
    """Neutral parameters for runs where none were supplied (stub generation)."""
    return ChainParams(
        block_time=2.0,
        block_capacity=2000.0,
        finality_blocks=1,
        node_count=4,
        method_costs={
            BenchMethod.COMPUTE: CostCoefficients(2.0, 2.0),
            BenchMethod.LOOP: CostCoefficients(0.2, 0.05),
            BenchMethod.STORE: CostCoefficients(1.0, 0.5),
            BenchMethod.READ: CostCoefficients(0.5, 0.0),
        },
    )


# ---------------------------------------------------------------------------
# Workload from a process profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodAssignment:
    method: BenchMethod
    difficulty: int = 1


DEFAULT_ASSIGNMENT = MethodAssignment(BenchMethod.STORE, 1)


def workload_from_profile(
    profile: ProcessProfile,
    method_mapping: dict | None = None,
) -> WorkloadSpec:
    """One workload entry per on-chain task, rate = instance rate x visits.

    Unmapped tasks default to a store of difficulty 1; zero-rate entries are
    dropped. Tasks are emitted in id order so the spec is reproducible.
    """
    mapping = method_mapping or {}
    entries = []
    for task_id in sorted(profile.onchain_tasks):
        rate = profile.instance_rate * profile.task_visits.get(task_id, 0.0)
        if rate <= 0:
            continue
        assignment = mapping.get(task_id, DEFAULT_ASSIGNMENT)
        entries.append(WorkloadEntry(assignment.method, assignment.difficulty, rate))
    return WorkloadSpec(entries=tuple(entries))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def chain_params_from_dict(raw: dict) -> ChainParams:
    if not isinstance(raw, dict):
        raise SimulationError("chain parameters must be an object")
    try:
        costs_raw = raw["method_costs"]
        return ChainParams(
            block_time=float(raw["block_time"]),
            block_capacity=float(raw["block_capacity"]),
            finality_blocks=int(raw["finality_blocks"]),
            node_count=int(raw["node_count"]),
            method_costs={
                method: CostCoefficients(float(c["a"]), float(c["b"]))
                for method, c in costs_raw.items()
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SimulationError(f"malformed chain parameters: {exc!r}") from None


def chain_params_to_dict(params: ChainParams) -> dict:
    return {
        "block_time": params.block_time,
        "block_capacity": params.block_capacity,
        "finality_blocks": params.finality_blocks,
        "node_count": params.node_count,
        "method_costs": {
            method.value: {"a": coeff.a, "b": coeff.b}
            for method, coeff in sorted(params.method_costs.items(), key=lambda mc: mc[0].value)
        },
    }


def workload_from_dict(raw: dict) -> WorkloadSpec:
    if not isinstance(raw, dict):
        raise SimulationError("workload must be an object")
    try:
        return WorkloadSpec(
            entries=tuple(
                WorkloadEntry(e["method"], int(e["difficulty"]), float(e["rate"]))
                for e in raw.get("entries", [])
            ),
            arrival_process=raw.get("arrival_process", ArrivalProcess.DETERMINISTIC.value),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SimulationError(f"malformed workload: {exc!r}") from None


def workload_to_dict(workload: WorkloadSpec) -> dict:
    return {
        "entries": [
            {"method": e.method.value, "difficulty": e.difficulty, "rate": e.rate}
            for e in workload.entries
        ],
        "arrival_process": workload.arrival_process.value,
        "seed": workload.seed,
    }


def sim_result_to_dict(result: SimResult) -> dict:
    return {
        "duration": result.duration,
        "submitted": result.submitted,
        "committed": result.committed,
        "pending": result.pending,
        "throughput": result.throughput,
        "latency": None if result.latency is None else {
            "mean": result.latency.mean,
            "p50": result.latency.p50,
            "p95": result.latency.p95,
            "max": result.latency.max,
        },
        "blocks": [
            {
                "index": b.index,
                "time": b.time,
                "tx_count": b.tx_count,
                "weight": b.weight,
                "pending": b.pending,
            }
            for b in result.blocks
        ],
    }


def occupancy_csv(result: SimResult) -> str:
    """Per-block occupancy series as CSV (header + one row per block)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["block", "time", "tx_count", "weight", "pending"])
    for b in result.blocks:
        writer.writerow([b.index, b.time, b.tx_count, b.weight, b.pending])
    return out.getvalue()
