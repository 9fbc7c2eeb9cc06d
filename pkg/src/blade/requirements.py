"""Decision inputs: strict requirements, Likert preferences, asset profiles.

Architects describe what they need in three parts: hard constraints that a
platform must satisfy, weighted preferences on the remaining criteria, and an
inventory of existing skills and infrastructure whose overlap with a platform
becomes one extra benefit criterion.

The on-disk format is a small TOML file with sections ``[[strict]]``,
``[preferences]``, ``[assets]`` and ``[options]``; the HTTP service accepts
the same structure as a JSON object. See ``docs/requirements-format.md``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import RequirementsError
from .kb import (
    BlockchainProfile,
    CriterionKind,
    KnowledgeBase,
)


class Strategy(str, Enum):
    """How interval attributes collapse to one number for ranking."""

    MIDPOINT = "midpoint"
    PESSIMISTIC = "pessimistic"
    OPTIMISTIC = "optimistic"


class Operator(str, Enum):
    EQUALS = "equals"
    AT_LEAST = "at-least"
    AT_MOST = "at-most"
    INCLUDES_ALL = "includes-all"


# bool | float | str | frozenset[str], normalized at construction.
Threshold = object


def _normalize_threshold(value) -> object:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if not all(isinstance(x, str) for x in items):
            raise RequirementsError(f"label lists must contain only strings: {value!r}")
        return frozenset(items)
    raise RequirementsError(f"unsupported strict-requirement value: {value!r}")


@dataclass(frozen=True)
class StrictRequirement:
    """A must-have constraint: ``criterion operator threshold``."""

    criterion: str
    operator: Operator
    threshold: object

    def __post_init__(self):
        object.__setattr__(self, "operator", Operator(self.operator))
        object.__setattr__(self, "threshold", _normalize_threshold(self.threshold))

    def describe(self) -> str:
        value = self.threshold
        if isinstance(value, frozenset):
            value = sorted(value)
        return f"{self.criterion} {self.operator.value} {value!r}"


@dataclass(frozen=True)
class Preference:
    """A Likert-weighted wish: 0 means indifferent, 1 extremely desirable."""

    criterion: str
    weight: float

    def __post_init__(self):
        if isinstance(self.weight, bool) or not isinstance(self.weight, (int, float)):
            raise RequirementsError(
                f"likert weight must be a number, got {self.weight!r} (criterion '{self.criterion}')"
            )
        object.__setattr__(self, "weight", float(self.weight))
        if not (0.0 <= self.weight <= 1.0):
            raise RequirementsError(
                f"likert weight out of range [0, 1]: {self.weight} (criterion '{self.criterion}')"
            )


def _lower_tags(tags) -> frozenset:
    out = set()
    for tag in tags:
        if not isinstance(tag, str):
            raise RequirementsError(f"tags must be strings: {tag!r}")
        out.add(tag.lower())
    return frozenset(out)


@dataclass(frozen=True)
class AssetProfile:
    """What the enterprise already has: team skills and infrastructure."""

    skills: frozenset = frozenset()
    infrastructure: frozenset = frozenset()
    affinity_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "skills", _lower_tags(self.skills))
        object.__setattr__(self, "infrastructure", _lower_tags(self.infrastructure))
        if isinstance(self.affinity_weight, bool) or \
                not isinstance(self.affinity_weight, (int, float)):
            raise RequirementsError(f"affinity weight must be a number: {self.affinity_weight!r}")
        object.__setattr__(self, "affinity_weight", float(self.affinity_weight))
        if not (0.0 <= self.affinity_weight <= 1.0):
            raise RequirementsError(
                f"affinity weight out of range [0, 1]: {self.affinity_weight}"
            )


@dataclass(frozen=True)
class RequirementSet:
    strict: tuple[StrictRequirement, ...] = ()
    preferences: tuple[Preference, ...] = ()
    assets: AssetProfile | None = None
    scalarization: Strategy = Strategy.MIDPOINT
    # When a survivor lacks a preferred attribute, substitute the worst value
    # observed in that column instead of failing. Off by default: silent
    # imputation hides knowledge-base gaps.
    impute_missing_as_worst: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strict", tuple(self.strict))
        object.__setattr__(self, "preferences", tuple(self.preferences))
        object.__setattr__(self, "scalarization", Strategy(self.scalarization))
        seen: set[str] = set()
        for pref in self.preferences:
            if pref.criterion in seen:
                raise RequirementsError(f"duplicate preference for criterion '{pref.criterion}'")
            seen.add(pref.criterion)

    def positive_preferences(self) -> tuple[Preference, ...]:
        return tuple(p for p in self.preferences if p.weight > 0.0)


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    message: str
    where: str | None = None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOP_LEVEL_KEYS = {"strict", "preferences", "assets", "options"}
_STRICT_KEYS = {"criterion", "operator", "value"}
_ASSET_KEYS = {"skills", "infrastructure", "affinity"}
_OPTION_KEYS = {"scalarization", "impute-missing-as-worst"}


def requirements_from_dict(raw: dict) -> RequirementSet:
    """Build a RequirementSet from the parsed document structure.

    The same shape is accepted whether it came from the TOML file format or
    from a JSON request body.
    """
    if not isinstance(raw, dict):
        raise RequirementsError("requirements document must be a table/object")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise RequirementsError(f"unknown requirements section(s): {sorted(unknown)}")

    strict: list[StrictRequirement] = []
    for i, entry in enumerate(raw.get("strict", [])):
        if not isinstance(entry, dict):
            raise RequirementsError(f"strict entry {i} must be a table/object")
        missing = _STRICT_KEYS - set(entry)
        if missing:
            raise RequirementsError(f"strict entry {i} missing key(s): {sorted(missing)}")
        extra = set(entry) - _STRICT_KEYS
        if extra:
            raise RequirementsError(f"strict entry {i} has unknown key(s): {sorted(extra)}")
        try:
            operator = Operator(entry["operator"])
        except ValueError:
            raise RequirementsError(
                f"strict entry {i}: unknown operator '{entry['operator']}' "
                f"(expected one of {[op.value for op in Operator]})"
            ) from None
        strict.append(StrictRequirement(str(entry["criterion"]), operator, entry["value"]))

    prefs_raw = raw.get("preferences", {})
    if not isinstance(prefs_raw, dict):
        raise RequirementsError("[preferences] must map criterion ids to weights")
    preferences = [Preference(str(cid), weight) for cid, weight in prefs_raw.items()]

    assets = None
    if "assets" in raw:
        assets_raw = raw["assets"]
        if not isinstance(assets_raw, dict):
            raise RequirementsError("[assets] must be a table/object")
        extra = set(assets_raw) - _ASSET_KEYS
        if extra:
            raise RequirementsError(f"[assets] has unknown key(s): {sorted(extra)}")
        assets = AssetProfile(
            skills=frozenset(assets_raw.get("skills", [])),
            infrastructure=frozenset(assets_raw.get("infrastructure", [])),
            affinity_weight=assets_raw.get("affinity", 0.0),
        )

    scalarization = Strategy.MIDPOINT
    impute = False
    if "options" in raw:
        options_raw = raw["options"]
        if not isinstance(options_raw, dict):
            raise RequirementsError("[options] must be a table/object")
        extra = set(options_raw) - _OPTION_KEYS
        if extra:
            raise RequirementsError(f"[options] has unknown key(s): {sorted(extra)}")
        if "scalarization" in options_raw:
            try:
                scalarization = Strategy(options_raw["scalarization"])
            except ValueError:
                raise RequirementsError(
                    f"unknown scalarization '{options_raw['scalarization']}' "
                    f"(expected one of {[s.value for s in Strategy]})"
                ) from None
        if "impute-missing-as-worst" in options_raw:
            impute = options_raw["impute-missing-as-worst"]
            if not isinstance(impute, bool):
                raise RequirementsError("impute-missing-as-worst must be a boolean")

    return RequirementSet(
        strict=tuple(strict),
        preferences=tuple(preferences),
        assets=assets,
        scalarization=scalarization,
        impute_missing_as_worst=impute,
    )


def parse_requirements(document: str) -> RequirementSet:
    """Parse the TOML requirements format."""
    try:
        raw = tomllib.loads(document)
    except tomllib.TOMLDecodeError as exc:
        raise RequirementsError(f"malformed requirements document: {exc}") from None
    return requirements_from_dict(raw)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def requirements_to_dict(reqs: RequirementSet) -> dict:
    out: dict = {}
    if reqs.strict:
        out["strict"] = [
            {
                "criterion": s.criterion,
                "operator": s.operator.value,
                "value": sorted(s.threshold) if isinstance(s.threshold, frozenset) else s.threshold,
            }
            for s in reqs.strict
        ]
    if reqs.preferences:
        out["preferences"] = {p.criterion: p.weight for p in reqs.preferences}
    if reqs.assets is not None:
        out["assets"] = {
            "skills": sorted(reqs.assets.skills),
            "infrastructure": sorted(reqs.assets.infrastructure),
            "affinity": reqs.assets.affinity_weight,
        }
    options: dict = {"scalarization": reqs.scalarization.value}
    if reqs.impute_missing_as_worst:
        options["impute-missing-as-worst"] = True
    out["options"] = options
    return out


def _toml_value(value) -> str:
    # JSON string escaping is a subset of TOML basic-string escaping, and the
    # remaining value shapes here (bool, float, list of str) map one to one.
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise RequirementsError(f"cannot serialize value {value!r}")


def dump_requirements(reqs: RequirementSet) -> str:
    """Serialize to the TOML file format; parse_requirements round-trips it."""
    raw = requirements_to_dict(reqs)
    lines: list[str] = []
    for entry in raw.get("strict", []):
        lines.append("[[strict]]")
        lines.append(f'criterion = {_toml_value(entry["criterion"])}')
        lines.append(f'operator = {_toml_value(entry["operator"])}')
        lines.append(f'value = {_toml_value(entry["value"])}')
        lines.append("")
    if "preferences" in raw:
        lines.append("[preferences]")
        for cid, weight in raw["preferences"].items():
            key = cid if _is_bare_key(cid) else json.dumps(cid)
            lines.append(f"{key} = {_toml_value(weight)}")
        lines.append("")
    if "assets" in raw:
        lines.append("[assets]")
        lines.append(f'skills = {_toml_value(raw["assets"]["skills"])}')
        lines.append(f'infrastructure = {_toml_value(raw["assets"]["infrastructure"])}')
        lines.append(f'affinity = {_toml_value(raw["assets"]["affinity"])}')
        lines.append("")
    lines.append("[options]")
    for key, value in raw["options"].items():
        lines.append(f"{key} = {_toml_value(value)}")
    lines.append("")
    return "\n".join(lines)


def _is_bare_key(key: str) -> bool:
    return bool(key) and all(c.isalnum() or c in "-_" for c in key)


# ---------------------------------------------------------------------------
# Validation against a knowledge base
# ---------------------------------------------------------------------------

# operator -> criterion kinds it can constrain
_OPERATOR_KINDS = {
    Operator.EQUALS: {CriterionKind.BOOLEAN, CriterionKind.ORDINAL, CriterionKind.CATEGORICAL},
    Operator.AT_LEAST: {CriterionKind.NUMERIC_INTERVAL, CriterionKind.ORDINAL},
    Operator.AT_MOST: {CriterionKind.NUMERIC_INTERVAL, CriterionKind.ORDINAL},
    Operator.INCLUDES_ALL: {CriterionKind.CATEGORICAL},
}


def _threshold_matches(req: StrictRequirement, kind: CriterionKind, levels) -> str | None:
    """Return an error message when the threshold literal cannot be applied."""
    t = req.threshold
    if kind is CriterionKind.BOOLEAN:
        if not isinstance(t, bool):
            return f"'{req.criterion}' is boolean; equals needs true/false, got {t!r}"
    elif kind is CriterionKind.NUMERIC_INTERVAL:
        if isinstance(t, bool) or not isinstance(t, float):
            return f"'{req.criterion}' is numeric; {req.operator.value} needs a number, got {t!r}"
    elif kind is CriterionKind.ORDINAL:
        if not isinstance(t, str):
            return f"'{req.criterion}' is ordinal; {req.operator.value} needs a level name, got {t!r}"
        if t not in (levels or ()):
            return f"'{t}' is not a level of '{req.criterion}' (levels: {list(levels or ())})"
    elif kind is CriterionKind.CATEGORICAL:
        if req.operator is Operator.EQUALS and not isinstance(t, str):
            return f"'{req.criterion}' is categorical; equals needs a single label, got {t!r}"
        if req.operator is Operator.INCLUDES_ALL and not isinstance(t, frozenset):
            return f"'{req.criterion}' is categorical; includes-all needs a label list, got {t!r}"
    return None


def validate_against(reqs: RequirementSet, kb: KnowledgeBase) -> list[Finding]:
    """Cross-check a RequirementSet against a KB.

    Returns an empty list exactly when every referenced criterion exists,
    every strict operator (with its threshold literal) fits its criterion's
    kind, and at least one preference carries positive weight. Pure; never
    raises for input defects.
    """
    findings: list[Finding] = []

    for req in reqs.strict:
        crit = kb.criteria_by_id.get(req.criterion)
        if crit is None:
            findings.append(Finding(
                "error", f"strict requirement references unknown criterion '{req.criterion}'",
                where=req.criterion,
            ))
            continue
        if crit.kind not in _OPERATOR_KINDS[req.operator]:
            findings.append(Finding(
                "error",
                f"operator {req.operator.value} cannot constrain {crit.kind.value} "
                f"criterion '{req.criterion}'",
                where=req.criterion,
            ))
            continue
        message = _threshold_matches(req, crit.kind, crit.ordinal_levels)
        if message is not None:
            findings.append(Finding("error", message, where=req.criterion))

    for pref in reqs.preferences:
        if pref.criterion not in kb.criteria_by_id:
            findings.append(Finding(
                "error", f"preference references unknown criterion '{pref.criterion}'",
                where=pref.criterion,
            ))

    if not reqs.positive_preferences():
        findings.append(Finding(
            "error",
            "no effective preferences: at least one preference must have weight > 0",
        ))

    return findings


# ---------------------------------------------------------------------------
# Asset affinity
# ---------------------------------------------------------------------------

def jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def asset_affinity(assets: AssetProfile, profile: BlockchainProfile) -> float:
    """Overlap between what the team has and what the platform uses, in [0,1]."""
    return jaccard(assets.skills | assets.infrastructure, profile.tech_tags)
