"""Release gate: one test per promised property, strictest tolerances.

Run with ``pytest -v tests/test_acceptance.py`` for a pass/fail line per
property (each test also prints a PASS summary visible with ``-s``/``-rA``).
Random cases use fixed seeds, so the gate is deterministic.
"""

import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from blade import (
    BenchMethod,
    BlockchainProfile,
    ChainParams,
    CostCoefficients,
    CriterionDef,
    CriterionKind,
    DecisionMatrix,
    Direction,
    Interval,
    Iso25010Category,
    KnowledgeBase,
    Operator,
    StrictRequirement,
    WorkloadEntry,
    WorkloadSpec,
    analytic_capacity,
    expected_visits,
    filter_alternatives,
    fixture_knowledge_base,
    parse_bpmn,
    parse_requirements,
    requirements_to_dict,
    simulate,
    topsis,
    validate_knowledge_base,
)
from blade.bpmn import node_visits
from blade.cli import main
from blade.perfsim import sim_result_to_dict
from blade.service import create_app

from oracles import brute_force_topsis, path_enumeration_visits
from test_bpmn import _random_dag, bpmn_doc


def _matrix(values, directions, raw_weights):
    values = np.asarray(values, dtype=np.float64)
    raw = np.asarray(raw_weights, dtype=np.float64)
    return DecisionMatrix(
        alternative_ids=tuple(f"alt-{i}" for i in range(values.shape[0])),
        criterion_ids=tuple(f"crit-{j}" for j in range(values.shape[1])),
        values=values,
        directions=tuple(
            Direction.BENEFIT if d == "benefit" else Direction.COST
            for d in directions
        ),
        weights=raw / raw.sum(),
    )


def _random_case(rng, m=None, n=None):
    m = m or rng.randint(2, 6)
    n = n or rng.randint(2, 5)
    values = [[rng.uniform(1e-9, 10.0) for _ in range(n)] for _ in range(m)]
    directions = [rng.choice(["benefit", "cost"]) for _ in range(n)]
    weights = [rng.uniform(0.01, 1.0) for _ in range(n)]
    return values, directions, weights


# ---------------------------------------------------------------------------
# ranking engine
# ---------------------------------------------------------------------------

def test_scores_match_independent_reference_on_random_matrices():
    rng = random.Random(20260822)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        values, directions, weights = _random_case(rng)
        got = topsis(_matrix(values, directions, weights))
        want = brute_force_topsis(values, directions, weights)
        worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
        assert got == pytest.approx(want, abs=1e-9)
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"1000 comparisons took {elapsed:.2f}s"
    print(f"PASS reference equivalence: 1000 matrices, max |diff| {worst:.2e}, "
          f"{elapsed:.2f}s")


def test_worked_examples_score_exactly():
    linear = topsis(_matrix([[1.0], [2.0], [3.0]], ["benefit"], [1.0]))
    assert linear == pytest.approx([0.0, 0.5, 1.0], abs=1e-9)
    assert brute_force_topsis([[1.0], [2.0], [3.0]], ["benefit"], [1.0]) == \
        pytest.approx([0.0, 0.5, 1.0], abs=1e-9)

    square = topsis(_matrix([[4.0, 3.0], [3.0, 4.0]], ["benefit", "cost"], [0.5, 0.5]))
    assert square == pytest.approx([1.0, 0.0], abs=1e-9)
    assert brute_force_topsis([[4.0, 3.0], [3.0, 4.0]], ["benefit", "cost"],
                              [0.5, 0.5]) == pytest.approx([1.0, 0.0], abs=1e-9)
    print("PASS worked examples: [1,2,3] -> [0, 0.5, 1]; "
          "[[4,3],[3,4]] -> [1, 0]")


def test_dominance_and_scale_invariance():
    rng = random.Random(31337)

    for _ in range(1000):
        values, directions, weights = _random_case(rng)
        dominant = [
            max(row[j] for row in values) * 1.5 if directions[j] == "benefit"
            else min(row[j] for row in values) / 2.0
            for j in range(len(directions))
        ]
        scores = topsis(_matrix(values + [dominant], directions, weights))
        assert scores[-1] == 1.0
        assert all(s < 1.0 for s in scores[:-1])

    for _ in range(1000):
        values, directions, weights = _random_case(rng)
        base = topsis(_matrix(values, directions, weights))
        j = rng.randrange(len(directions))
        factor = rng.choice([1e-9, 1e-4, 1e4, 1e9])
        scaled = [
            [cell * factor if k == j else cell for k, cell in enumerate(row)]
            for row in values
        ]
        assert topsis(_matrix(scaled, directions, weights)) == \
            pytest.approx(base, abs=1e-9)

    for _ in range(1000):
        values, directions, weights = _random_case(rng)
        base = topsis(_matrix(values, directions, weights))
        factor = rng.choice([1e-12, 1e-6, 1e6, 1e12])
        rescaled = [w * factor for w in weights]
        assert topsis(_matrix(values, directions, rescaled)) == \
            pytest.approx(base, abs=1e-9)

    print("PASS dominance exact and column/weight scale invariance: "
          "1000 instances each")


# ---------------------------------------------------------------------------
# strict filtering
# ---------------------------------------------------------------------------

def _constructed_kb():
    criteria = (
        CriterionDef(
            id="flag", name="flag",
            category=Iso25010Category.FUNCTIONAL_SUITABILITY,
            direction=Direction.BENEFIT, kind=CriterionKind.BOOLEAN,
        ),
        CriterionDef(
            id="range", name="range",
            category=Iso25010Category.PERFORMANCE_EFFICIENCY,
            direction=Direction.BENEFIT, kind=CriterionKind.NUMERIC_INTERVAL,
            unit="u",
        ),
        CriterionDef(
            id="grade", name="grade",
            category=Iso25010Category.MAINTAINABILITY,
            direction=Direction.BENEFIT, kind=CriterionKind.ORDINAL,
            ordinal_levels=("low", "mid", "high"),
        ),
        CriterionDef(
            id="tags", name="tags",
            category=Iso25010Category.COMPATIBILITY,
            direction=Direction.BENEFIT, kind=CriterionKind.CATEGORICAL,
        ),
    )
    profiles = []
    index = 0
    for flag in (True, False):
        for lo, hi in ((0.0, 1.0), (2.0, 5.0), (4.0, 9.0)):
            for grade in ("low", "mid", "high"):
                for tags in ({"a"}, {"a", "b"}, {"b", "c"}):
                    profiles.append(BlockchainProfile(
                        id=f"p{index:02d}",
                        name=f"p{index:02d}",
                        attributes={
                            "flag": flag,
                            "range": Interval(lo, hi),
                            "grade": grade,
                            "tags": frozenset(tags),
                        },
                        tech_tags=frozenset(),
                        sources=(),
                    ))
                    index += 1
    kb = KnowledgeBase(
        schema_version=1, kb_version=1,
        criteria=criteria, profiles=tuple(profiles),
    )
    validate_knowledge_base(kb)
    return kb


def _holds(req, attributes):
    """Independent re-statement of the constraint semantics."""
    value = attributes.get(req.criterion)
    if value is None:
        return False
    if req.criterion == "flag":
        return value == req.threshold
    if req.criterion == "range":
        if req.operator is Operator.AT_LEAST:
            return value.lo >= req.threshold
        return value.hi <= req.threshold
    if req.criterion == "grade":
        order = {"low": 0, "mid": 1, "high": 2}
        if req.operator is Operator.EQUALS:
            return value == req.threshold
        if req.operator is Operator.AT_LEAST:
            return order[value] >= order[req.threshold]
        return order[value] <= order[req.threshold]
    if req.operator is Operator.EQUALS:
        return value == frozenset({req.threshold})
    return set(req.threshold) <= set(value)


def test_filter_partition_is_sound_and_complete():
    kb = _constructed_kb()
    grid = [
        StrictRequirement("flag", Operator.EQUALS, True),
        StrictRequirement("flag", Operator.EQUALS, False),
    ]
    for threshold in (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 9.0, 10.0):
        grid.append(StrictRequirement("range", Operator.AT_LEAST, threshold))
        grid.append(StrictRequirement("range", Operator.AT_MOST, threshold))
    for level in ("low", "mid", "high"):
        for op in (Operator.EQUALS, Operator.AT_LEAST, Operator.AT_MOST):
            grid.append(StrictRequirement("grade", op, level))
    for label in ("a", "b", "c"):
        grid.append(StrictRequirement("tags", Operator.EQUALS, label))
    for labels in ({"a"}, {"b"}, {"a", "b"}, {"b", "c"}, {"a", "c"}, {"a", "b", "c"}):
        grid.append(StrictRequirement("tags", Operator.INCLUDES_ALL, frozenset(labels)))

    checked = 0
    for req in grid:
        survivors, eliminations = filter_alternatives(kb, (req,))
        assert len(survivors) + len(eliminations) == len(kb.profiles)
        for profile in survivors:
            assert _holds(req, profile.attributes), (req, profile.id)
        for elimination in eliminations:
            profile = kb.profile(elimination.alternative_id)
            assert len(elimination.violated) == 1
            assert not _holds(req, profile.attributes), (req, profile.id)
        checked += 1

    # requirement pairs: eliminations must cite exactly the violated subset
    rng = random.Random(5)
    for _ in range(200):
        pair = tuple(rng.sample(grid, 2))
        survivors, eliminations = filter_alternatives(kb, pair)
        for profile in survivors:
            assert all(_holds(r, profile.attributes) for r in pair)
        for elimination in eliminations:
            profile = kb.profile(elimination.alternative_id)
            violated = {
                (v.requirement.criterion, v.requirement.operator, v.requirement.threshold)
                for v in elimination.violated
            }
            expected = {
                (r.criterion, r.operator, r.threshold)
                for r in pair if not _holds(r, profile.attributes)
            }
            assert violated == expected, profile.id
        checked += 1
    print(f"PASS filter partition: {checked} constraint sets x "
          f"{len(kb.profiles)} profiles, all partitions exact")


# ---------------------------------------------------------------------------
# process models
# ---------------------------------------------------------------------------

def test_task_visit_counts_match_path_enumeration():
    sequence = parse_bpmn(bpmn_doc(
        [("s", "startEvent"), ("t1", "task"), ("t2", "task"), ("e", "endEvent")],
        [("s", "t1"), ("t1", "t2"), ("t2", "e")],
    ))
    assert expected_visits(sequence) == {"t1": 1.0, "t2": 1.0}

    uniform_xor = parse_bpmn(bpmn_doc(
        [("s", "startEvent"), ("g", "exclusiveGateway"),
         ("a", "task"), ("b", "task"), ("e", "endEvent")],
        [("s", "g"), ("g", "a"), ("g", "b"), ("a", "e"), ("b", "e")],
    ))
    assert expected_visits(uniform_xor) == {"a": 0.5, "b": 0.5}

    parallel = parse_bpmn(bpmn_doc(
        [("s", "startEvent"), ("g", "parallelGateway"),
         ("a", "task"), ("b", "task"), ("j", "parallelGateway"),
         ("e", "endEvent")],
        [("s", "g"), ("g", "a"), ("g", "b"), ("a", "j"), ("b", "j"), ("j", "e")],
    ))
    assert expected_visits(parallel) == {"a": 1.0, "b": 1.0}

    rng = random.Random(424242)
    worst = 0.0
    for _ in range(200):
        model = _random_dag(rng)
        assert len(model.nodes) <= 10
        got = node_visits(model)
        want = path_enumeration_visits(
            {node.id: node.kind.value for node in model.nodes},
            [(e.source, e.target, e.probability) for e in model.edges],
            "n0",
        )
        for nid, visits in want.items():
            worst = max(worst, abs(got[nid] - visits))
            assert got[nid] == pytest.approx(visits, abs=1e-12), model
    print(f"PASS visit counts: 3 gateway fixtures exact, 200 random models, "
          f"max |diff| {worst:.2e}")


# ---------------------------------------------------------------------------
# simulator
# ---------------------------------------------------------------------------

def test_simulator_saturation_conservation_determinism():
    rng = random.Random(77)
    started = time.perf_counter()
    worst_rel = 0.0
    for run in range(20):
        method_costs = {
            BenchMethod.COMPUTE: CostCoefficients(rng.uniform(1, 4), rng.uniform(0.5, 3)),
            BenchMethod.LOOP: CostCoefficients(rng.uniform(0.1, 1), rng.uniform(0.01, 0.2)),
            BenchMethod.STORE: CostCoefficients(rng.uniform(0.5, 2), rng.uniform(0.1, 1)),
            BenchMethod.READ: CostCoefficients(rng.uniform(0.2, 1), 0.0),
        }
        methods = [BenchMethod.STORE, BenchMethod.COMPUTE, BenchMethod.READ,
                   BenchMethod.LOOP]
        entries = tuple(
            WorkloadEntry(method, rng.randint(1, 5), rng.uniform(1.0, 10.0))
            for method in rng.sample(methods, rng.randint(1, 3))
        )
        # capacity far above any single weight, so packing loss stays small
        heaviest = max(
            method_costs[e.method].a + method_costs[e.method].b * e.difficulty
            for e in entries
        )
        params = ChainParams(
            block_time=rng.uniform(0.5, 3.0),
            block_capacity=rng.uniform(80.0, 150.0) * heaviest,
            finality_blocks=rng.randint(0, 3),
            node_count=rng.randint(1, 7),
            method_costs=method_costs,
        )
        workload = WorkloadSpec(
            entries=entries,
            arrival_process=rng.choice(["deterministic", "poisson"]),
            seed=rng.randint(0, 2**31),
        )
        capacity = analytic_capacity(params, workload)
        overload = 2.0 * capacity / workload.total_rate
        saturated = WorkloadSpec(
            entries=tuple(
                WorkloadEntry(e.method, e.difficulty, e.rate * overload)
                for e in workload.entries
            ),
            arrival_process=workload.arrival_process,
            seed=workload.seed,
        )
        duration = 150 * params.block_time
        result = simulate(params, saturated, duration)

        rel = abs(result.throughput - capacity) / capacity
        worst_rel = max(worst_rel, rel)
        assert rel <= 0.02, f"run {run}: {result.throughput} vs {capacity}"

        # conservation, block by block: arrived-so-far (committed + waiting)
        # never decreases and never exceeds what was submitted
        assert result.submitted == result.committed + result.pending
        assert sum(b.tx_count for b in result.blocks) == result.committed
        committed_so_far = 0
        arrived_before = 0
        for block in result.blocks:
            committed_so_far += block.tx_count
            arrived = committed_so_far + block.pending
            assert block.pending >= 0
            assert block.weight <= params.block_capacity + 1e-9
            assert arrived >= arrived_before
            assert arrived <= result.submitted
            arrived_before = arrived

        again = simulate(params, saturated, duration)
        assert sim_result_to_dict(again) == sim_result_to_dict(result)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"20 simulations took {elapsed:.2f}s"
    print(f"PASS simulator: 20 parameter sets, worst saturation error "
          f"{worst_rel:.3%}, conservation and determinism hold, {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# end to end
# ---------------------------------------------------------------------------

def test_pipeline_reproduces_golden_outputs(capsys, samples_dir, golden_dir, tmp_path):
    code = main([
        "evaluate",
        "-k", str(samples_dir / "kb.json"),
        "-r", str(samples_dir / "requirements.toml"),
        "--format", "json",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert out.encode("utf-8") == (golden_dir / "ranking.json").read_bytes()

    stub_dir = tmp_path / "stubs"
    code = main([
        "generate",
        "-k", str(samples_dir / "kb.json"),
        "-r", str(samples_dir / "requirements.toml"),
        "--bpmn", str(samples_dir / "order_process.bpmn"),
        "--rate", "2.0",
        "-o", str(stub_dir),
    ])
    capsys.readouterr()
    assert code == 0
    for name in ("architecture.json", "deploy.yaml", "contract.json"):
        assert (stub_dir / name).read_bytes() == \
            (golden_dir / "stubs" / name).read_bytes(), name
    print("PASS golden outputs: ranking JSON and 3 stub files byte-identical")


PARITY_DOCS = [
    # 1: the full sample scenario (read from disk below)
    None,
    # 2: pessimistic scalarization
    """
[[strict]]
criterion = "smart-contracts"
operator = "equals"
value = true
[preferences]
"throughput-tps" = 1.0
"latency-s" = 0.6
[options]
scalarization = "pessimistic"
""",
    # 3: optimistic scalarization with assets
    """
[preferences]
"energy-per-tx-wh" = 0.7
"throughput-tps" = 0.4
[assets]
skills = ["solidity", "go"]
infrastructure = ["kubernetes"]
affinity = 0.6
[options]
scalarization = "optimistic"
""",
    # 4: categorical equals
    """
[[strict]]
criterion = "permission-model"
operator = "equals"
value = "public"
[preferences]
"latency-s" = 0.9
""",
    # 5: includes-all
    """
[[strict]]
criterion = "contract-languages"
operator = "includes-all"
value = ["java"]
[preferences]
"tooling-maturity" = 0.8
"throughput-tps" = 0.2
""",
    # 6: ordinal threshold
    """
[[strict]]
criterion = "finality-type"
operator = "at-least"
value = "hybrid"
[preferences]
"latency-s" = 1.0
""",
    # 7: zero survivors
    """
[[strict]]
criterion = "throughput-tps"
operator = "at-least"
value = 100000
[preferences]
"latency-s" = 0.5
""",
    # 8: single preference, no strict
    """
[preferences]
"upgrade-governance" = 0.3
""",
    # 9: impute flag exercised
    """
[[strict]]
criterion = "smart-contracts"
operator = "equals"
value = true
[preferences]
"interoperability" = 0.5
"private-transactions" = 0.5
[options]
impute-missing-as-worst = true
""",
    # 10: cost-only bounds, bitcoin-friendly
    """
[[strict]]
criterion = "smart-contracts"
operator = "equals"
value = false
[preferences]
"energy-per-tx-wh" = 0.9
"latency-s" = 0.1
""",
]


def test_cli_and_service_emit_identical_bytes(capsys, samples_dir, tmp_path):
    client = TestClient(create_app(fixture_knowledge_base()))
    kb_path = str(samples_dir / "kb.json")

    documents = [
        (samples_dir / "requirements.toml").read_text() if doc is None else doc
        for doc in PARITY_DOCS
    ]
    assert len(documents) == 10
    for index, document in enumerate(documents):
        reqs_path = tmp_path / f"reqs-{index}.toml"
        reqs_path.write_text(document)
        code = main([
            "evaluate", "-k", kb_path, "-r", str(reqs_path), "--format", "json",
        ])
        cli_bytes = capsys.readouterr().out.encode("utf-8")
        assert code == 0, f"request set {index}"

        body = requirements_to_dict(parse_requirements(document))
        response = client.post("/evaluate", json=body)
        assert response.status_code == 200, f"request set {index}"
        assert cli_bytes == response.content, f"request set {index}"
    print("PASS interface parity: 10 request sets, CLI bytes == service bytes")
