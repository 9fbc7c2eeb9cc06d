"""Blockchain platform selection: filter on strict requirements, rank the
survivors with TOPSIS, check workloads against a block-pipeline simulator,
and scaffold the winning platform."""

from .errors import (
    BladeError,
    BpmnError,
    KBError,
    MatrixError,
    RequirementsError,
    SimulationError,
    StubGenerationError,
    UnknownProfileError,
    ValidationFailure,
)
from .kb import (
    BlockchainProfile,
    CriterionDef,
    CriterionKind,
    Direction,
    Interval,
    Iso25010Category,
    KnowledgeBase,
    SourceRef,
    dump_knowledge_base,
    fixture_knowledge_base,
    load_knowledge_base,
    merge_knowledge,
    validate_knowledge_base,
)
from .requirements import (
    AssetProfile,
    Operator,
    Preference,
    RequirementSet,
    Strategy,
    StrictRequirement,
    asset_affinity,
    dump_requirements,
    parse_requirements,
    requirements_from_dict,
    requirements_to_dict,
    validate_against,
)
from .mcdm import (
    DecisionMatrix,
    Elimination,
    RankedEntry,
    RankingResult,
    build_matrix,
    evaluate,
    filter_alternatives,
    ranking_to_dict,
    scalarize,
    sensitivity,
    topsis,
)
from .bpmn import (
    ProcessModel,
    ProcessProfile,
    build_profile,
    expected_visits,
    extract_embedded_requirements,
    parse_bpmn,
)
from .perfsim import (
    ArrivalProcess,
    BenchMethod,
    ChainParams,
    CostCoefficients,
    SimResult,
    WorkloadEntry,
    WorkloadSpec,
    analytic_capacity,
    refine_intervals,
    simulate,
    tx_weight,
    workload_from_profile,
)
from .stubgen import ArchitectureStub, generate_stubs, write_stub

__version__ = "0.1.0"

__all__ = [
    "BladeError", "BpmnError", "KBError", "MatrixError", "RequirementsError",
    "SimulationError", "StubGenerationError", "UnknownProfileError", "ValidationFailure",
    "BlockchainProfile", "CriterionDef", "CriterionKind", "Direction", "Interval",
    "Iso25010Category", "KnowledgeBase", "SourceRef", "dump_knowledge_base",
    "fixture_knowledge_base", "load_knowledge_base", "merge_knowledge",
    "validate_knowledge_base",
    "AssetProfile", "Operator", "Preference", "RequirementSet", "Strategy",
    "StrictRequirement", "asset_affinity", "dump_requirements", "parse_requirements",
    "requirements_from_dict", "requirements_to_dict", "validate_against",
    "DecisionMatrix", "Elimination", "RankedEntry", "RankingResult", "build_matrix",
    "evaluate", "filter_alternatives", "ranking_to_dict", "scalarize", "sensitivity",
    "topsis",
    "ProcessModel", "ProcessProfile", "build_profile", "expected_visits",
    "extract_embedded_requirements", "parse_bpmn",
    "ArrivalProcess", "BenchMethod", "ChainParams", "CostCoefficients", "SimResult",
    "WorkloadEntry", "WorkloadSpec", "analytic_capacity", "refine_intervals",
    "simulate", "tx_weight", "workload_from_profile",
    "ArchitectureStub", "generate_stubs", "write_stub",
    "__version__",
]
