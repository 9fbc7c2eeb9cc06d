"""Decision core: filtering, scalarization, TOPSIS ranking, what-if analysis.

The pipeline is filter-then-rank. Strict requirements eliminate platforms
under guaranteed-bound semantics (an interval attribute satisfies ``at-least
t`` only when its lower bound already does), then the survivors are scored
with classical TOPSIS over the positively weighted preference criteria.
Scores land in [0, 1]; 1 means the alternative coincides with the ideal
profile assembled from the best observed value per criterion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MatrixError, ValidationFailure
from .kb import (
    AttributeValue,
    BlockchainProfile,
    CriterionDef,
    CriterionKind,
    Direction,
    Interval,
    KnowledgeBase,
    attribute_kind,
    attribute_value_to_json,
)
from .requirements import (
    AssetProfile,
    Operator,
    Preference,
    RequirementSet,
    Strategy,
    StrictRequirement,
    asset_affinity,
    validate_against,
)

# Column id of the derived criterion appended when an asset profile carries
# positive weight. Not a KB criterion; computed per evaluation.
ASSET_CRITERION = "asset-affinity"


# ---------------------------------------------------------------------------
# Scalarization
# ---------------------------------------------------------------------------

def scalarize(value: AttributeValue, criterion: CriterionDef, strategy: Strategy) -> float:
    """Collapse one attribute value to a real for the decision matrix.

    Orientation is preserved: a cost interval scalarized pessimistically
    yields its upper bound, the raw worst case; TOPSIS applies the criterion
    direction afterwards. Booleans map true to 1. Categorical attributes have
    no order and cannot be scalarized; constrain them strictly instead.
    """
    kind = attribute_kind(value)
    if kind is not criterion.kind:
        raise MatrixError(
            f"value kind {kind.value} does not match criterion "
            f"'{criterion.id}' kind {criterion.kind.value}"
        )
    if kind is CriterionKind.BOOLEAN:
        return 1.0 if value else 0.0
    if kind is CriterionKind.NUMERIC_INTERVAL:
        assert isinstance(value, Interval)
        if strategy is Strategy.MIDPOINT:
            return value.midpoint
        benefit = criterion.direction is Direction.BENEFIT
        if strategy is Strategy.PESSIMISTIC:
            return value.lo if benefit else value.hi
        return value.hi if benefit else value.lo
    if kind is CriterionKind.ORDINAL:
        levels = criterion.ordinal_levels or ()
        if value not in levels:
            raise MatrixError(
                f"'{value}' is not a level of ordinal criterion '{criterion.id}'"
            )
        if len(levels) == 1:
            return 1.0
        return levels.index(value) / (len(levels) - 1)
    raise MatrixError(
        f"criterion '{criterion.id}' is categorical and cannot be scalarized; "
        "use it in strict requirements instead"
    )


# ---------------------------------------------------------------------------
# Strict filtering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    requirement: StrictRequirement
    observed: AttributeValue | None
    explanation: str


@dataclass(frozen=True)
class Elimination:
    alternative_id: str
    violated: tuple[Violation, ...]

    def __post_init__(self):
        if not self.violated:
            raise MatrixError("elimination requires at least one violation")


def format_attribute(value: AttributeValue | None) -> str:
    if value is None:
        return "absent"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Interval):
        return f"[{value.lo:g}, {value.hi:g}]"
    if isinstance(value, frozenset):
        return "{" + ", ".join(sorted(value)) + "}"
    return str(value)


def _satisfies(req: StrictRequirement, value: AttributeValue, crit: CriterionDef) -> bool:
    op = req.operator
    if crit.kind is CriterionKind.BOOLEAN:
        return value is req.threshold
    if crit.kind is CriterionKind.NUMERIC_INTERVAL:
        assert isinstance(value, Interval)
        # guaranteed-bound semantics: the whole interval must satisfy the bound
        if op is Operator.AT_LEAST:
            return value.lo >= req.threshold
        return value.hi <= req.threshold
    if crit.kind is CriterionKind.ORDINAL:
        levels = crit.ordinal_levels or ()
        idx, t_idx = levels.index(value), levels.index(req.threshold)
        if op is Operator.EQUALS:
            return idx == t_idx
        if op is Operator.AT_LEAST:
            return idx >= t_idx
        return idx <= t_idx
    assert isinstance(value, frozenset)
    if op is Operator.EQUALS:
        return value == frozenset({req.threshold})
    return frozenset(req.threshold) <= value


def filter_alternatives(
    kb: KnowledgeBase, strict: tuple[StrictRequirement, ...]
) -> tuple[list[BlockchainProfile], list[Elimination]]:
    """Partition KB profiles into survivors and eliminations.

    A profile survives only when it satisfies every strict requirement; an
    eliminated profile's record lists all violated requirements, each with
    the observed value and a plain-text explanation. Requirements must have
    been validated against the KB first.
    """
    survivors: list[BlockchainProfile] = []
    eliminations: list[Elimination] = []
    for profile in kb.profiles:
        violations: list[Violation] = []
        for req in strict:
            crit = kb.criterion(req.criterion)
            value = profile.attributes.get(req.criterion)
            if value is None:
                violations.append(Violation(
                    requirement=req,
                    observed=None,
                    explanation=f"attribute absent: requires {req.describe()}, "
                                f"but '{profile.id}' does not record '{req.criterion}'",
                ))
            elif not _satisfies(req, value, crit):
                violations.append(Violation(
                    requirement=req,
                    observed=value,
                    explanation=f"requires {req.describe()}, "
                                f"observed {format_attribute(value)}",
                ))
        if violations:
            eliminations.append(Elimination(profile.id, tuple(violations)))
        else:
            survivors.append(profile)
    return survivors, eliminations


# ---------------------------------------------------------------------------
# Decision matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    """Scalarized m-alternatives by n-criteria matrix ready for TOPSIS.

    Weights are normalized to sum 1; zero-weight columns are never included.
    """

    alternative_ids: tuple[str, ...]
    criterion_ids: tuple[str, ...]
    values: np.ndarray       # shape (m, n), float64
    directions: tuple[Direction, ...]
    weights: np.ndarray      # shape (n,), positive, sums to 1

    def __post_init__(self):
        m, n = len(self.alternative_ids), len(self.criterion_ids)
        if m < 1 or n < 1:
            raise MatrixError("decision matrix needs at least one alternative and one criterion")
        if len(set(self.alternative_ids)) != m or len(set(self.criterion_ids)) != n:
            raise MatrixError("alternative and criterion ids must be unique")
        if self.values.shape != (m, n):
            raise MatrixError(f"values shape {self.values.shape} does not match ({m}, {n})")
        if len(self.directions) != n or len(self.weights) != n:
            raise MatrixError("directions and weights must have one entry per criterion")
        if not np.isfinite(self.values).all():
            raise MatrixError("matrix values must be finite")
        if not np.isfinite(self.weights).all() or (self.weights <= 0).any():
            raise MatrixError("weights must be positive (drop zero-weight criteria)")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise MatrixError("weights must sum to 1")


def build_matrix(
    survivors: list[BlockchainProfile],
    preferences: tuple[Preference, ...],
    kb: KnowledgeBase,
    strategy: Strategy = Strategy.MIDPOINT,
    assets: AssetProfile | None = None,
    impute_missing_as_worst: bool = False,
) -> tuple[DecisionMatrix, list[str]]:
    """Assemble the decision matrix for the surviving profiles.

    Columns are the positively weighted preference criteria, in preference
    order, plus the derived asset-affinity column when an asset profile with
    positive weight is supplied. Likert weights normalize to sum 1.

    A survivor missing a preferred attribute is an error unless
    ``impute_missing_as_worst`` is set, in which case the cell takes the
    worst value observed in its column and a warning describes the fill-in.
    """
    positive = [p for p in preferences if p.weight > 0.0]
    if not positive:
        raise MatrixError("no positive-weight preferences: ranking is undefined")
    if not survivors:
        raise MatrixError("decision matrix needs at least one surviving alternative")

    warnings: list[str] = []
    column_ids: list[str] = []
    directions: list[Direction] = []
    likert: list[float] = []
    columns: list[list[float]] = []

    for pref in positive:
        crit = kb.criterion(pref.criterion)
        cells: list[float | None] = []
        for profile in survivors:
            value = profile.attributes.get(crit.id)
            if value is None:
                if not impute_missing_as_worst:
                    raise MatrixError(
                        f"profile '{profile.id}' lacks attribute '{crit.id}' needed for "
                        "ranking; extend the KB or enable impute-missing-as-worst"
                    )
                cells.append(None)
            else:
                cells.append(scalarize(value, crit, strategy))
        observed = [c for c in cells if c is not None]
        if not observed:
            raise MatrixError(
                f"attribute '{crit.id}' is absent from every survivor; nothing to impute from"
            )
        if len(observed) < len(cells):
            worst = min(observed) if crit.direction is Direction.BENEFIT else max(observed)
            for i, cell in enumerate(cells):
                if cell is None:
                    cells[i] = worst
                    warnings.append(
                        f"profile '{survivors[i].id}': missing '{crit.id}' imputed "
                        f"as worst observed value {worst:g}"
                    )
        column_ids.append(crit.id)
        directions.append(crit.direction)
        likert.append(pref.weight)
        columns.append(cells)

    if assets is not None and assets.affinity_weight > 0.0:
        if ASSET_CRITERION in column_ids:
            raise MatrixError(
                f"column id collision: a preference already uses '{ASSET_CRITERION}'"
            )
        column_ids.append(ASSET_CRITERION)
        directions.append(Direction.BENEFIT)
        likert.append(assets.affinity_weight)
        columns.append([asset_affinity(assets, p) for p in survivors])

    raw_weights = np.asarray(likert, dtype=np.float64)
    matrix = DecisionMatrix(
        alternative_ids=tuple(p.id for p in survivors),
        criterion_ids=tuple(column_ids),
        values=np.asarray(columns, dtype=np.float64).T,
        directions=tuple(directions),
        weights=raw_weights / raw_weights.sum(),
    )
    return matrix, warnings


# ---------------------------------------------------------------------------
# TOPSIS
# ---------------------------------------------------------------------------

def _topsis_internals(matrix: DecisionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Return (closeness, weighted normalized matrix).

    Classical TOPSIS with two pinned conventions: an all-zero column
    normalizes to zeros rather than dividing by zero, and an alternative at
    zero distance from both poles scores 1.0 (it is indistinguishable from
    the ideal, which only happens when the poles coincide).
    """
    x = matrix.values
    if not np.isfinite(x).all():
        raise MatrixError("matrix values must be finite")
    norms = np.sqrt((x * x).sum(axis=0))
    r = np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)
    v = r * matrix.weights

    benefit = np.array([d is Direction.BENEFIT for d in matrix.directions])
    col_max, col_min = v.max(axis=0), v.min(axis=0)
    ideal = np.where(benefit, col_max, col_min)
    anti_ideal = np.where(benefit, col_min, col_max)

    s_plus = np.sqrt(((v - ideal) ** 2).sum(axis=1))
    s_minus = np.sqrt(((v - anti_ideal) ** 2).sum(axis=1))
    denom = s_plus + s_minus
    closeness = np.divide(s_minus, denom, out=np.ones_like(denom), where=denom > 0)
    return closeness, v


def topsis(matrix: DecisionMatrix) -> np.ndarray:
    """Closeness coefficient per alternative, in matrix row order, in [0,1]."""
    closeness, _ = _topsis_internals(matrix)
    return closeness


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankedEntry:
    alternative_id: str
    score: float
    # criterion id -> weighted normalized value, for explaining the score
    weighted_values: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RankingResult:
    eliminations: tuple[Elimination, ...]
    ranked: tuple[RankedEntry, ...]
    kb_version: int
    scalarization: Strategy
    weights: dict[str, float]
    warnings: tuple[str, ...] = ()


def _weight_vector(reqs: RequirementSet) -> dict[str, float]:
    """Normalized weights the matrix will use, keyed by column id."""
    likert = {p.criterion: p.weight for p in reqs.positive_preferences()}
    if reqs.assets is not None and reqs.assets.affinity_weight > 0.0:
        likert[ASSET_CRITERION] = reqs.assets.affinity_weight
    total = sum(likert.values())
    if total <= 0:
        return {}
    return {cid: w / total for cid, w in likert.items()}


def evaluate(kb: KnowledgeBase, reqs: RequirementSet) -> RankingResult:
    """Filter on strict requirements, then TOPSIS-rank the survivors.

    Zero survivors is a legitimate outcome, not an error: the result then
    has an empty ranking and an elimination record for every profile, so a
    caller can show exactly which requirement ruled each platform out.
    """
    findings = validate_against(reqs, kb)
    if any(f.severity == "error" for f in findings):
        raise ValidationFailure(findings)

    survivors, eliminations = filter_alternatives(kb, reqs.strict)
    if not survivors:
        return RankingResult(
            eliminations=tuple(eliminations),
            ranked=(),
            kb_version=kb.kb_version,
            scalarization=reqs.scalarization,
            weights=_weight_vector(reqs),
        )

    matrix, warnings = build_matrix(
        survivors,
        reqs.preferences,
        kb,
        strategy=reqs.scalarization,
        assets=reqs.assets,
        impute_missing_as_worst=reqs.impute_missing_as_worst,
    )
    closeness, v = _topsis_internals(matrix)

    order = sorted(
        range(len(matrix.alternative_ids)),
        key=lambda i: (-closeness[i], matrix.alternative_ids[i]),
    )
    ranked = tuple(
        RankedEntry(
            alternative_id=matrix.alternative_ids[i],
            score=float(closeness[i]),
            weighted_values={
                cid: float(v[i, j]) for j, cid in enumerate(matrix.criterion_ids)
            },
        )
        for i in order
    )
    return RankingResult(
        eliminations=tuple(eliminations),
        ranked=ranked,
        kb_version=kb.kb_version,
        scalarization=reqs.scalarization,
        weights={cid: float(w) for cid, w in zip(matrix.criterion_ids, matrix.weights)},
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Sensitivity (what-if) analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityPoint:
    weight: float
    result: RankingResult  # ranked truncated to the top 3


def sensitivity(
    kb: KnowledgeBase,
    reqs: RequirementSet,
    criterion_id: str,
    grid: list[float],
) -> list[SensitivityPoint]:
    """Re-rank with one preference weight swept across ``grid``.

    Each grid point replaces that preference's Likert weight (all weights
    re-normalize as usual) and re-runs the full evaluation. Degenerate points
    propagate their validation error, e.g. sweeping the only positive
    preference to 0.
    """
    if not any(p.criterion == criterion_id for p in reqs.preferences):
        raise MatrixError(f"criterion '{criterion_id}' is not among the preferences")
    if not grid:
        raise MatrixError("sensitivity grid must be non-empty")

    points: list[SensitivityPoint] = []
    for w in grid:
        swapped = tuple(
            Preference(criterion_id, w) if p.criterion == criterion_id else p
            for p in reqs.preferences
        )
        result = evaluate(kb, replace(reqs, preferences=swapped))
        points.append(SensitivityPoint(
            weight=float(w),
            result=replace(result, ranked=result.ranked[:3]),
        ))
    return points


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def violation_to_dict(violation: Violation) -> dict:
    req = violation.requirement
    value = req.threshold
    if isinstance(value, frozenset):
        value = sorted(value)
    return {
        "requirement": {"criterion": req.criterion, "operator": req.operator.value, "value": value},
        "observed": None if violation.observed is None
        else attribute_value_to_json(violation.observed),
        "explanation": violation.explanation,
    }


def elimination_to_dict(elim: Elimination) -> dict:
    return {
        "id": elim.alternative_id,
        "violations": [violation_to_dict(v) for v in elim.violated],
    }


def ranking_to_dict(result: RankingResult) -> dict:
    return {
        "ranked": [
            {
                "id": entry.alternative_id,
                "score": entry.score,
                "weighted_values": entry.weighted_values,
            }
            for entry in result.ranked
        ],
        "eliminations": [elimination_to_dict(e) for e in result.eliminations],
        "provenance": {
            "kb_version": result.kb_version,
            "scalarization": result.scalarization.value,
            "weights": result.weights,
        },
        "warnings": list(result.warnings),
    }


def sensitivity_to_dict(points: list[SensitivityPoint]) -> dict:
    return {
        "points": [
            {"weight": p.weight, "result": ranking_to_dict(p.result)}
            for p in points
        ]
    }
