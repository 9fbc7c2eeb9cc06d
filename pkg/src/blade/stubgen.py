"""Architecture stub generation: descriptor plus scaffold files.

The generator turns a process model and the winning platform into a neutral
architecture descriptor and three scaffold files: ``architecture.json`` (the
descriptor itself), ``deploy.yaml`` (one service per off-chain task plus the
chain nodes), and ``contract.json`` (one function per on-chain task). Output
is platform-neutral by design; per-platform emitters can consume the
descriptor later. Identical inputs produce byte-identical files, which the
golden tests rely on. Formats are documented in ``docs/stubs.md``.
"""

from __future__ import annotations

import json
import posixpath
from dataclasses import dataclass
from pathlib import Path

import yaml

from .bpmn import NodeKind, ProcessModel, ProcessProfile
from .errors import StubGenerationError
from .kb import BlockchainProfile
from .perfsim import ChainParams

# deterministic port layout: node i uses base + (i - 1)
RPC_PORT_BASE = 7545
P2P_PORT_BASE = 7676
SERVICE_PORT_BASE = 8080


@dataclass(frozen=True)
class ArchitectureStub:
    descriptor: dict
    files: dict  # relative path -> bytes

    def __post_init__(self):
        for path in self.files:
            if posixpath.isabs(path) or posixpath.normpath(path) != path or ".." in path.split("/"):
                raise StubGenerationError(f"stub file path must be relative and normalized: {path!r}")


def sanitize_identifier(raw: str, used: set) -> str:
    """Lowercase, map non-alphanumerics to '_', disambiguate with _2, _3, ..."""
    base = "".join(c if c.isalnum() else "_" for c in raw.lower()) or "unnamed"
    name = base
    counter = 2
    while name in used:
        name = f"{base}_{counter}"
        counter += 1
    used.add(name)
    return name


def generate_stubs(
    model: ProcessModel,
    profile: ProcessProfile,
    winner: BlockchainProfile,
    params: ChainParams,
) -> ArchitectureStub:
    """Scaffold the application around the selected platform.

    Tasks partition cleanly: every on-chain task becomes exactly one contract
    function, every other task exactly one service. Ordering follows the
    document order of the model, so regeneration is reproducible.
    """
    tasks = [n for n in model.nodes if n.kind is NodeKind.TASK]
    if not tasks:
        raise StubGenerationError("empty process model: no tasks to scaffold")

    onchain = [t for t in tasks if t.id in profile.onchain_tasks]
    offchain = [t for t in tasks if t.id not in profile.onchain_tasks]

    function_names: set = set()
    functions = [
        {
            "name": sanitize_identifier(task.name or task.id, function_names),
            "source_task": task.id,
            "expected_visits": profile.task_visits.get(task.id, 0.0),
        }
        for task in onchain
    ]
    service_names: set = set()
    services = [
        {
            "name": sanitize_identifier(task.name or task.id, service_names),
            "source_task": task.id,
            "operations": ["execute", "status"],
        }
        for task in offchain
    ]

    contract_names: set = set()
    contract = {
        "name": sanitize_identifier(model.process_id, contract_names),
        "functions": functions,
    }
    network = {
        "node_count": params.node_count,
        "block_time": params.block_time,
        "ports": {"rpc": RPC_PORT_BASE, "p2p": P2P_PORT_BASE},
    }
    descriptor = {
        "platform": winner.id,
        "process_id": model.process_id,
        "services": services,
        "contract": contract,
        "network": network,
    }

    deploy = {
        "version": 1,
        "platform": winner.id,
        "services": [
            {
                "name": svc["name"],
                "source_task": svc["source_task"],
                "protocol": "http",
                "port": SERVICE_PORT_BASE + i,
                "replicas": 1,
            }
            for i, svc in enumerate(services)
        ],
        "chain": {
            "block_time": params.block_time,
            "nodes": [
                {
                    "name": f"node-{i}",
                    "rpc_port": RPC_PORT_BASE + i - 1,
                    "p2p_port": P2P_PORT_BASE + i - 1,
                }
                for i in range(1, params.node_count + 1)
            ],
        },
    }

    def as_json(document: dict) -> bytes:
        return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")

    files = {
        "architecture.json": as_json(descriptor),
        "deploy.yaml": yaml.safe_dump(deploy, sort_keys=False, default_flow_style=False).encode("utf-8"),
        "contract.json": as_json(contract),
    }
    return ArchitectureStub(descriptor=descriptor, files=files)


def write_stub(stub: ArchitectureStub, out_dir) -> list[Path]:
    """Write the stub's files under ``out_dir``; returns the written paths."""
    base = Path(out_dir)
    written: list[Path] = []
    for rel_path, content in stub.files.items():
        target = base / rel_path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(content)
        written.append(target)
    return written
