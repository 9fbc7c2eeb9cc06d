"""Block-pipeline simulator: arrivals, packing, latency, interval refinement."""

import random

import pytest

from blade import (
    ArrivalProcess,
    BenchMethod,
    ChainParams,
    CostCoefficients,
    Interval,
    SimulationError,
    UnknownProfileError,
    WorkloadEntry,
    WorkloadSpec,
    analytic_capacity,
    dump_knowledge_base,
    refine_intervals,
    simulate,
    tx_weight,
)
from blade.perfsim import (
    LATENCY_CRITERION,
    THROUGHPUT_CRITERION,
    chain_params_from_dict,
    chain_params_to_dict,
    default_chain_params,
    occupancy_csv,
    sim_result_to_dict,
    workload_from_dict,
    workload_from_profile,
    workload_to_dict,
)
from blade import build_profile


def _params(**overrides):
    base = dict(
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
    base.update(overrides)
    return ChainParams(**base)


def _workload(*entries, **kwargs):
    return WorkloadSpec(entries=tuple(WorkloadEntry(*e) for e in entries), **kwargs)


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_cost_coefficients_must_be_nonnegative_and_not_both_zero():
    CostCoefficients(0.0, 0.1)
    with pytest.raises(SimulationError):
        CostCoefficients(-1.0, 0.5)
    with pytest.raises(SimulationError):
        CostCoefficients(0.0, 0.0)


def test_chain_params_validation():
    with pytest.raises(SimulationError):
        _params(block_time=0.0)
    with pytest.raises(SimulationError):
        _params(block_capacity=-5.0)
    with pytest.raises(SimulationError):
        _params(finality_blocks=-1)
    with pytest.raises(SimulationError):
        _params(node_count=0)
    with pytest.raises(SimulationError, match="method"):
        _params(method_costs={BenchMethod.STORE: CostCoefficients(1.0, 0.5)})


def test_workload_entry_validation():
    with pytest.raises(SimulationError):
        WorkloadEntry(BenchMethod.STORE, 0, 1.0)
    with pytest.raises(SimulationError):
        WorkloadEntry(BenchMethod.STORE, 1, -2.0)
    with pytest.raises(SimulationError):
        WorkloadSpec(entries=(), seed=-1)


def test_tx_weight_is_affine_in_difficulty():
    params = _params()
    assert tx_weight(BenchMethod.STORE, 1, params) == 1.5
    assert tx_weight(BenchMethod.STORE, 5, params) == 1.0 + 0.5 * 5
    assert tx_weight(BenchMethod.READ, 9, params) == 0.5
    with pytest.raises(SimulationError):
        tx_weight(BenchMethod.STORE, 0, params)


def test_analytic_capacity_weights_by_rate():
    params = _params()
    workload = _workload(
        (BenchMethod.STORE, 1, 30.0),   # weight 1.5
        (BenchMethod.READ, 1, 10.0),    # weight 0.5
    )
    mean_weight = (30 * 1.5 + 10 * 0.5) / 40
    assert analytic_capacity(params, workload) == pytest.approx(
        (2000.0 / 2.0) / mean_weight
    )
    with pytest.raises(SimulationError):
        analytic_capacity(params, _workload())


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def test_simulate_enforces_minimum_duration():
    with pytest.raises(SimulationError, match="warm-up"):
        simulate(_params(), _workload((BenchMethod.STORE, 1, 5.0)), duration=19.0)


def test_simulate_needs_positive_rate():
    with pytest.raises(SimulationError, match="positive arrival rate"):
        simulate(_params(), _workload((BenchMethod.STORE, 1, 0.0)), duration=100.0)


def test_simulate_rejects_transaction_wider_than_a_block():
    params = _params(block_capacity=3.0)
    workload = _workload((BenchMethod.COMPUTE, 5, 1.0))  # weight 2 + 2*5 = 12
    with pytest.raises(SimulationError, match="exceeds block capacity"):
        simulate(params, workload, duration=100.0)


def test_simulate_underload_commits_everything():
    params = _params()
    result = simulate(params, _workload((BenchMethod.STORE, 1, 5.0)), duration=100.0)
    assert result.submitted == 500
    assert result.committed == 500
    assert result.pending == 0
    assert result.throughput == pytest.approx(5.0)
    assert len(result.blocks) == 50


def test_simulate_underload_latency_is_half_block_plus_finality():
    # deterministic arrivals spread uniformly inside each block window, so
    # the mean wait to the including block is half a block time, and the
    # finality block adds exactly one more
    params = _params(block_time=2.0, finality_blocks=1)
    result = simulate(params, _workload((BenchMethod.STORE, 1, 5.0)), duration=100.0)
    assert result.latency is not None
    assert result.latency.mean == pytest.approx(1.0 + 2.0, abs=1e-9)
    assert result.latency.max <= 2.0 + 2.0


def test_simulate_conservation_and_block_capacity():
    params = _params(block_capacity=30.0)
    workload = _workload(
        (BenchMethod.STORE, 2, 12.0),
        (BenchMethod.COMPUTE, 1, 3.0),
        seed=7,
        arrival_process=ArrivalProcess.POISSON,
    )
    result = simulate(params, workload, duration=120.0)
    assert result.submitted == result.committed + result.pending
    assert sum(b.tx_count for b in result.blocks) == result.committed
    for block in result.blocks:
        assert block.weight <= params.block_capacity + 1e-9
        assert block.pending >= 0


def test_simulate_head_of_line_blocking():
    # weight 6 against capacity 10: a second transaction never fits, even
    # when it is already waiting
    params = _params(
        block_time=1.0,
        block_capacity=10.0,
        method_costs={
            BenchMethod.COMPUTE: CostCoefficients(6.0, 0.0),
            BenchMethod.LOOP: CostCoefficients(0.2, 0.05),
            BenchMethod.STORE: CostCoefficients(1.0, 0.5),
            BenchMethod.READ: CostCoefficients(0.5, 0.0),
        },
    )
    result = simulate(params, _workload((BenchMethod.COMPUTE, 1, 3.0)), duration=40.0)
    for block in result.blocks:
        assert block.tx_count <= 1
        assert block.weight in (0.0, 6.0)


def test_simulate_poisson_is_seed_deterministic():
    params = _params()
    workload = _workload(
        (BenchMethod.STORE, 1, 40.0), (BenchMethod.READ, 2, 15.0),
        arrival_process=ArrivalProcess.POISSON, seed=123,
    )
    a = simulate(params, workload, duration=100.0)
    b = simulate(params, workload, duration=100.0)
    assert sim_result_to_dict(a) == sim_result_to_dict(b)

    other = _workload(
        (BenchMethod.STORE, 1, 40.0), (BenchMethod.READ, 2, 15.0),
        arrival_process=ArrivalProcess.POISSON, seed=124,
    )
    c = simulate(params, other, duration=100.0)
    assert sim_result_to_dict(c) != sim_result_to_dict(a)


def test_simulate_saturation_approaches_analytic_capacity():
    rng = random.Random(99)
    for _ in range(5):
        params = _params(
            block_time=rng.uniform(0.5, 4.0),
            block_capacity=rng.uniform(500.0, 3000.0),
        )
        # mixed methods, unevenly split, then overloaded to 3x sustainable
        workload = _workload(
            (BenchMethod.STORE, rng.randint(1, 4), 3.0),
            (BenchMethod.COMPUTE, rng.randint(1, 3), 2.0),
            (BenchMethod.READ, rng.randint(1, 5), 1.0),
        )
        capacity = analytic_capacity(params, workload)
        scale = 3.0 * capacity / workload.total_rate
        overloaded = WorkloadSpec(entries=tuple(
            WorkloadEntry(e.method, e.difficulty, e.rate * scale)
            for e in workload.entries
        ))
        result = simulate(params, overloaded, duration=150 * params.block_time)
        assert result.throughput == pytest.approx(capacity, rel=0.02)


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def _sample_refinement(kb):
    workload = _workload((BenchMethod.STORE, 1, 50.0), (BenchMethod.READ, 1, 20.0))
    return refine_intervals(
        kb, "hyperledger-fabric", {"hyperledger-fabric": _params()}, workload
    )


def test_refine_narrows_intervals_and_bumps_version(kb):
    before_thr = kb.profile("hyperledger-fabric").attributes[THROUGHPUT_CRITERION]
    refined = _sample_refinement(kb)
    assert refined.kb_version == kb.kb_version + 1
    after = refined.profile("hyperledger-fabric")
    thr = after.attributes[THROUGHPUT_CRITERION]
    lat = after.attributes[LATENCY_CRITERION]
    assert before_thr.lo <= thr.lo <= thr.hi <= before_thr.hi
    assert thr.hi - thr.lo < before_thr.hi - before_thr.lo
    assert isinstance(lat, Interval)
    # provenance note always lands in the profile's sources
    assert "refined by workload simulation" in after.sources[-1].ref
    # the input KB is untouched
    assert kb.profile("hyperledger-fabric").attributes[THROUGHPUT_CRITERION] == before_thr
    assert kb.kb_version == refined.kb_version - 1


def test_refine_is_deterministic(kb):
    assert dump_knowledge_base(_sample_refinement(kb)) == \
        dump_knowledge_base(_sample_refinement(kb))


def test_refine_replaces_disjoint_interval_with_conflict_note(kb):
    # bitcoin's stored [3, 7] tx/s cannot overlap a simulated band near the
    # block capacity of these parameters
    workload = _workload((BenchMethod.STORE, 1, 50.0))
    refined = refine_intervals(kb, "bitcoin", {"bitcoin": _params()}, workload)
    after = refined.profile("bitcoin")
    assert after.attributes[THROUGHPUT_CRITERION].lo > 7.0
    assert "disjoint" in after.sources[-1].ref


def test_refine_unknown_profile(kb):
    with pytest.raises(UnknownProfileError):
        refine_intervals(kb, "nope", {"nope": _params()},
                         _workload((BenchMethod.STORE, 1, 5.0)))


def test_refine_needs_chain_params(kb):
    with pytest.raises(SimulationError, match="no chain parameters"):
        refine_intervals(kb, "bitcoin", {}, _workload((BenchMethod.STORE, 1, 5.0)))


# ---------------------------------------------------------------------------
# workload from a process profile
# ---------------------------------------------------------------------------

def test_workload_from_profile(sample_process):
    profile = build_profile(sample_process, instance_rate=2.0)
    workload = workload_from_profile(profile)
    assert [e.rate for e in workload.entries] == [
        pytest.approx(1.7), pytest.approx(1.7),
    ]
    assert all(e.method is BenchMethod.STORE and e.difficulty == 1
               for e in workload.entries)


def test_workload_from_profile_drops_zero_rates(sample_process):
    profile = build_profile(sample_process, instance_rate=0.0)
    assert workload_from_profile(profile).entries == ()


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_chain_params_dict_round_trip():
    params = default_chain_params()
    assert chain_params_from_dict(chain_params_to_dict(params)) == params


def test_chain_params_from_dict_rejects_missing_keys():
    with pytest.raises(SimulationError, match="malformed"):
        chain_params_from_dict({"block_time": 2.0})


def test_workload_dict_round_trip():
    workload = _workload(
        (BenchMethod.STORE, 2, 40.0), (BenchMethod.READ, 1, 30.0),
        arrival_process=ArrivalProcess.POISSON, seed=42,
    )
    assert workload_from_dict(workload_to_dict(workload)) == workload


def test_workload_from_dict_rejects_bad_method():
    with pytest.raises(SimulationError, match="malformed"):
        workload_from_dict(
            {"entries": [{"method": "teleport", "difficulty": 1, "rate": 1.0}]}
        )


def test_sample_files_parse(samples_dir):
    import json

    params = chain_params_from_dict(
        json.loads((samples_dir / "chain_params.json").read_text())
    )
    workload = workload_from_dict(
        json.loads((samples_dir / "workload.json").read_text())
    )
    result = simulate(params, workload, duration=60.0)
    assert result.committed > 0


def test_occupancy_csv_shape():
    result = simulate(_params(), _workload((BenchMethod.STORE, 1, 5.0)), 100.0)
    lines = occupancy_csv(result).splitlines()
    assert lines[0] == "block,time,tx_count,weight,pending"
    assert len(lines) == 1 + len(result.blocks)
