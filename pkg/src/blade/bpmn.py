"""BPMN 2.0 process import: structure, expected task visits, embedded inputs.

Only the control-flow subset that matters for load estimation is read: tasks
(task, userTask, serviceTask, scriptTask), exclusive and parallel gateways,
start/end events and sequence flows. Everything else is skipped and reported
in the model's warning list.

Processes can carry machine-readable hints in documentation text or in
extension elements under the ``urn:blade:bpmn`` namespace:

    blade:onchain                        marks a task as on-chain
    blade:prob 0.85                      branch probability, on a sequence
                                         flow leaving an exclusive gateway
                                         (also as attribute blade:prob="0.85")
    blade:require <criterion> <op> <lit> strict requirement (equals,
                                         at-least, at-most)
    blade:prefer <criterion> <weight>    Likert preference in [0, 1]

The grammar is documented in ``docs/bpmn-annotations.md``.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .errors import BpmnError, RequirementsError
from .requirements import (
    Operator,
    Preference,
    RequirementSet,
    StrictRequirement,
    requirements_to_dict,
)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
BLADE_NS = "urn:blade:bpmn"

ONCHAIN_MARKER = "blade:onchain"

_TASK_TAGS = {"task", "userTask", "serviceTask", "scriptTask"}
# process children that are metadata rather than skipped flow elements
_SILENT_TAGS = {"documentation", "extensionElements", "incoming", "outgoing"}

_PROB_LINE = re.compile(r"^blade:prob\s+(\S+)$")
_REQUIRE_LINE = re.compile(r"^blade:require\s+(\S+)\s+(\S+)\s+(.+?)\s*$")
_PREFER_LINE = re.compile(r"^blade:prefer\s+(\S+)\s+(\S+)\s*$")


class NodeKind(str, Enum):
    START = "start"
    END = "end"
    TASK = "task"
    EXCLUSIVE_GATEWAY = "exclusive-gateway"
    PARALLEL_GATEWAY = "parallel-gateway"


_KIND_BY_TAG = {
    "startEvent": NodeKind.START,
    "endEvent": NodeKind.END,
    "exclusiveGateway": NodeKind.EXCLUSIVE_GATEWAY,
    "parallelGateway": NodeKind.PARALLEL_GATEWAY,
    **{tag: NodeKind.TASK for tag in _TASK_TAGS},
}


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    name: str = ""
    annotations: tuple[str, ...] = ()


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    probability: float | None = None


@dataclass(frozen=True)
class ProcessModel:
    process_id: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        _validate_model(self)

    def node(self, node_id: str) -> Node:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise BpmnError(f"unknown node '{node_id}'")

    def outgoing(self, node_id: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.source == node_id)


def _validate_model(model: ProcessModel) -> None:
    ids = [n.id for n in model.nodes]
    if len(set(ids)) != len(ids):
        raise BpmnError("duplicate node ids")
    id_set = set(ids)
    starts = [n for n in model.nodes if n.kind is NodeKind.START]
    if len(starts) > 1:
        raise BpmnError(f"multiple start events in one process: {[n.id for n in starts]}")
    if not starts:
        raise BpmnError("process has no start event")
    if not any(n.kind is NodeKind.END for n in model.nodes):
        raise BpmnError("process has no end event")
    for edge in model.edges:
        if edge.source not in id_set or edge.target not in id_set:
            raise BpmnError(
                f"edge {edge.source} -> {edge.target} references a missing node"
            )
        if edge.probability is not None and not (0.0 <= edge.probability <= 1.0):
            raise BpmnError(
                f"edge {edge.source} -> {edge.target}: probability "
                f"{edge.probability} outside [0, 1]"
            )
    for node in model.nodes:
        if node.kind is not NodeKind.EXCLUSIVE_GATEWAY:
            continue
        out = model.outgoing(node.id)
        annotated = [e for e in out if e.probability is not None]
        if not annotated:
            continue
        if len(annotated) != len(out):
            raise BpmnError(
                f"exclusive gateway '{node.id}': either all or none of its "
                "outgoing flows may carry a probability"
            )
        total = sum(e.probability for e in out)
        if abs(total - 1.0) > 1e-9:
            raise BpmnError(
                f"exclusive gateway '{node.id}': outgoing probabilities sum to "
                f"{total}, expected 1"
            )


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _element_annotations(element: ET.Element) -> list[str]:
    notes: list[str] = []
    for child in element:
        if child.tag == f"{{{BPMN_NS}}}documentation" and child.text and child.text.strip():
            notes.append(child.text.strip())
        elif _local(child.tag) == "extensionElements":
            for ext in child.iter():
                if ext.tag.startswith(f"{{{BLADE_NS}}}") and ext.text and ext.text.strip():
                    notes.append(ext.text.strip())
    return notes


def _annotation_lines(annotations) -> list[str]:
    lines: list[str] = []
    for note in annotations:
        lines.extend(line.strip() for line in note.splitlines() if line.strip())
    return lines


def _edge_probability(element: ET.Element, edge_id: str) -> float | None:
    raw = element.get(f"{{{BLADE_NS}}}prob")
    if raw is None:
        for line in _annotation_lines(_element_annotations(element)):
            match = _PROB_LINE.match(line)
            if match:
                raw = match.group(1)
                break
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise BpmnError(f"sequence flow '{edge_id}': invalid blade:prob value {raw!r}") from None


def parse_bpmn(document: str) -> ProcessModel:
    """Parse BPMN XML into a ProcessModel (first process element wins)."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise BpmnError(f"malformed XML: {exc}") from None

    process_tag = f"{{{BPMN_NS}}}process"
    if root.tag == process_tag:
        processes = [root]
    else:
        processes = root.findall(f".//{process_tag}")
    if not processes:
        raise BpmnError("no process element")

    warnings: list[str] = []
    if len(processes) > 1:
        warnings.append(
            f"document contains {len(processes)} processes; only the first "
            f"('{processes[0].get('id', '?')}') was imported"
        )
    process = processes[0]
    process_id = process.get("id") or "process"

    nodes: list[Node] = []
    edges: list[Edge] = []
    for child in process:
        tag = _local(child.tag)
        if tag == "sequenceFlow":
            edge_id = child.get("id", "?")
            source, target = child.get("sourceRef"), child.get("targetRef")
            if not source or not target:
                raise BpmnError(f"sequence flow '{edge_id}' lacks sourceRef/targetRef")
            edges.append(Edge(source, target, _edge_probability(child, edge_id)))
        elif tag in _KIND_BY_TAG:
            node_id = child.get("id")
            if not node_id:
                raise BpmnError(f"{tag} element without id")
            nodes.append(Node(
                id=node_id,
                kind=_KIND_BY_TAG[tag],
                name=child.get("name", ""),
                annotations=tuple(_element_annotations(child)),
            ))
        elif tag not in _SILENT_TAGS:
            warnings.append(f"skipped unsupported element <{tag}> (id '{child.get('id', '?')}')")

    # probabilities only steer exclusive gateways; elsewhere they would lie
    kinds = {n.id: n.kind for n in nodes}
    for i, edge in enumerate(edges):
        if edge.probability is not None and \
                kinds.get(edge.source) is not NodeKind.EXCLUSIVE_GATEWAY:
            warnings.append(
                f"edge {edge.source} -> {edge.target}: blade:prob ignored "
                "(source is not an exclusive gateway)"
            )
            edges[i] = Edge(edge.source, edge.target, None)

    return ProcessModel(
        process_id=process_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Expected visits
# ---------------------------------------------------------------------------

def _out_probabilities(model: ProcessModel, node: Node) -> list[tuple[Edge, float]]:
    out = model.outgoing(node.id)
    if node.kind is NodeKind.EXCLUSIVE_GATEWAY and out:
        if out[0].probability is None:
            share = 1.0 / len(out)
            return [(e, share) for e in out]
        return [(e, e.probability) for e in out]
    # tasks fan out like parallel gateways: every flow fires
    return [(e, 1.0) for e in out]


def node_visits(model: ProcessModel) -> dict[str, float]:
    """Expected traversals per node for one process instance.

    Tokens propagate along topological order: a node's count is the sum over
    incoming edges of the source count times the edge probability. Parallel
    branches each count fully, exclusive branches split by probability (a
    join after a parallel fork therefore counts once per branch). Cycles are
    rejected: there is no loop semantics to honor.
    """
    indegree = {n.id: 0 for n in model.nodes}
    for edge in model.edges:
        indegree[edge.target] += 1

    visits = {n.id: 0.0 for n in model.nodes}
    start = next(n for n in model.nodes if n.kind is NodeKind.START)
    visits[start.id] = 1.0

    queue = deque(nid for nid, deg in indegree.items() if deg == 0)
    processed = 0
    while queue:
        nid = queue.popleft()
        processed += 1
        for edge, probability in _out_probabilities(model, model.node(nid)):
            visits[edge.target] += visits[nid] * probability
            indegree[edge.target] -= 1
            if indegree[edge.target] == 0:
                queue.append(edge.target)
    if processed != len(model.nodes):
        raise BpmnError("process graph is cyclic; loops are not supported")
    return visits


def expected_visits(model: ProcessModel) -> dict[str, float]:
    """Expected visits per task (task nodes only), per process instance."""
    visits = node_visits(model)
    return {n.id: visits[n.id] for n in model.nodes if n.kind is NodeKind.TASK}


# ---------------------------------------------------------------------------
# Embedded requirements
# ---------------------------------------------------------------------------

def _parse_literal(token: str):
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return float(token)
    except ValueError:
        return token


def extract_embedded_requirements(model: ProcessModel) -> tuple[RequirementSet, list[str]]:
    """Collect blade:require / blade:prefer lines from all node annotations.

    Malformed lines never vanish silently: every line that starts with
    ``blade:`` but does not parse lands in the returned warning list.
    Duplicate preferences keep the maximum weight, also with a warning.
    """
    strict: list[StrictRequirement] = []
    weights: dict[str, float] = {}
    warnings: list[str] = []

    for node in model.nodes:
        for line in _annotation_lines(node.annotations):
            if not line.startswith("blade:"):
                continue
            if line == ONCHAIN_MARKER or _PROB_LINE.match(line):
                continue
            if line.startswith("blade:require"):
                match = _REQUIRE_LINE.match(line)
                operator = None
                if match:
                    try:
                        operator = Operator(match.group(2))
                    except ValueError:
                        operator = None
                if match is None or operator is None or operator is Operator.INCLUDES_ALL:
                    warnings.append(f"node '{node.id}': malformed requirement line {line!r}")
                    continue
                strict.append(StrictRequirement(
                    match.group(1), operator, _parse_literal(match.group(3))
                ))
            elif line.startswith("blade:prefer"):
                match = _PREFER_LINE.match(line)
                weight = None
                if match:
                    try:
                        weight = Preference(match.group(1), _parse_literal(match.group(2))).weight
                    except RequirementsError:
                        weight = None
                if match is None or weight is None:
                    warnings.append(f"node '{node.id}': malformed preference line {line!r}")
                    continue
                cid = match.group(1)
                if cid in weights:
                    warnings.append(
                        f"node '{node.id}': duplicate preference for '{cid}', "
                        f"keeping max({weights[cid]:g}, {weight:g})"
                    )
                    weights[cid] = max(weights[cid], weight)
                else:
                    weights[cid] = weight
            else:
                warnings.append(f"node '{node.id}': unrecognized annotation {line!r}")

    fragment = RequirementSet(
        strict=tuple(strict),
        preferences=tuple(Preference(cid, w) for cid, w in weights.items()),
    )
    return fragment, warnings


# ---------------------------------------------------------------------------
# Workload profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessProfile:
    process_id: str
    instance_rate: float
    task_visits: dict[str, float]
    onchain_tasks: frozenset
    embedded_requirements: RequirementSet
    tx_rate: float
    warnings: tuple[str, ...] = ()


def build_profile(
    model: ProcessModel,
    instance_rate: float,
    onchain_marker: str = ONCHAIN_MARKER,
) -> ProcessProfile:
    """Derive the workload profile: who hits the chain, and how often.

    ``tx_rate`` is the process instance rate times the summed expected visits
    of tasks carrying the on-chain marker annotation.
    """
    if instance_rate < 0:
        raise BpmnError(f"instance rate must be >= 0, got {instance_rate}")
    visits = expected_visits(model)
    onchain = frozenset(
        node.id
        for node in model.nodes
        if node.kind is NodeKind.TASK
        and any(line == onchain_marker for line in _annotation_lines(node.annotations))
    )
    embedded, warnings = extract_embedded_requirements(model)
    return ProcessProfile(
        process_id=model.process_id,
        instance_rate=float(instance_rate),
        task_visits=visits,
        onchain_tasks=onchain,
        embedded_requirements=embedded,
        tx_rate=float(instance_rate) * sum(visits[t] for t in onchain),
        warnings=tuple(warnings),
    )


def profile_to_dict(profile: ProcessProfile) -> dict:
    return {
        "process_id": profile.process_id,
        "instance_rate": profile.instance_rate,
        "task_visits": profile.task_visits,
        "onchain_tasks": sorted(profile.onchain_tasks),
        "tx_rate": profile.tx_rate,
        "embedded_requirements": requirements_to_dict(profile.embedded_requirements),
        "warnings": list(profile.warnings),
    }
