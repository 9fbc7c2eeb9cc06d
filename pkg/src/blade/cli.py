"""Command-line driver.

Exit codes: 0 success, 1 validation error, 2 I/O or format error, 3 internal
error. Human diagnostics go to stderr; machine output (JSON, tables) goes to
stdout. ``--format json`` output is byte-identical to the HTTP service's
response body for the same inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bpmn import ProcessModel, ProcessProfile, build_profile, parse_bpmn
from .errors import (
    BpmnError,
    KBError,
    MatrixError,
    RequirementsError,
    SimulationError,
    StubGenerationError,
    UnknownProfileError,
    ValidationFailure,
)
from .jsonutil import canonical_json
from .kb import KnowledgeBase, dump_knowledge_base, load_knowledge_base
from .mcdm import RankingResult, evaluate, ranking_to_dict
from .perfsim import (
    LATENCY_CRITERION,
    THROUGHPUT_CRITERION,
    chain_params_from_dict,
    default_chain_params,
    occupancy_csv,
    refine_intervals,
    sim_result_to_dict,
    simulate,
    workload_from_dict,
)
from .requirements import RequirementSet, parse_requirements, validate_against
from .stubgen import generate_stubs, write_stub


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _load_kb(args) -> KnowledgeBase:
    if not args.kb:
        raise KBError("no knowledge base: pass -k/--kb or set BLADE_KB")
    return load_knowledge_base(Path(args.kb).read_text(encoding="utf-8"))


def _read_json(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def merge_requirements(
    file_reqs: RequirementSet, embedded: RequirementSet
) -> tuple[RequirementSet, list[str]]:
    """Overlay BPMN-embedded requirements under the file's.

    The file always wins: an embedded strict requirement on the same
    (criterion, operator) with a different value is dropped with a warning,
    as is an embedded preference whose weight differs from the file's.
    """
    warnings: list[str] = []

    strict = list(file_reqs.strict)
    by_key = {(s.criterion, s.operator): s for s in strict}
    for req in embedded.strict:
        existing = by_key.get((req.criterion, req.operator))
        if existing is None:
            strict.append(req)
            by_key[(req.criterion, req.operator)] = req
        elif existing.threshold != req.threshold:
            warnings.append(
                f"embedded requirement {req.describe()} conflicts with the "
                f"requirements file ({existing.describe()}); file wins"
            )

    preferences = list(file_reqs.preferences)
    file_weights = {p.criterion: p.weight for p in preferences}
    for pref in embedded.preferences:
        if pref.criterion not in file_weights:
            preferences.append(pref)
        elif file_weights[pref.criterion] != pref.weight:
            warnings.append(
                f"embedded preference {pref.criterion}={pref.weight:g} conflicts "
                f"with the requirements file ({file_weights[pref.criterion]:g}); file wins"
            )

    merged = RequirementSet(
        strict=tuple(strict),
        preferences=tuple(preferences),
        assets=file_reqs.assets,
        scalarization=file_reqs.scalarization,
        impute_missing_as_worst=file_reqs.impute_missing_as_worst,
    )
    return merged, warnings


def _requirements_with_bpmn(
    args,
) -> tuple[RequirementSet, ProcessModel | None, ProcessProfile | None]:
    """Parse the requirements file, merging BPMN-embedded inputs when given."""
    reqs = parse_requirements(Path(args.requirements).read_text(encoding="utf-8"))
    model = profile = None
    if args.bpmn:
        model = parse_bpmn(Path(args.bpmn).read_text(encoding="utf-8"))
        profile = build_profile(model, args.rate)
        for message in model.warnings + profile.warnings:
            _warn(message)
        reqs, merge_warnings = merge_requirements(reqs, profile.embedded_requirements)
        for message in merge_warnings:
            _warn(message)
    return reqs, model, profile


def _format_table(result: RankingResult) -> str:
    lines: list[str] = []
    if result.ranked:
        id_width = max(len("platform"), max(len(e.alternative_id) for e in result.ranked))
        lines.append(f"rank  {'platform'.ljust(id_width)}  score")
        for position, entry in enumerate(result.ranked, start=1):
            lines.append(f"{position:>4}  {entry.alternative_id.ljust(id_width)}  {entry.score:.4f}")
    else:
        lines.append("no platform satisfies the strict requirements")
    if result.eliminations:
        lines.append("")
        lines.append("eliminated:")
        for elim in result.eliminations:
            lines.append(f"  {elim.alternative_id}:")
            for violation in elim.violated:
                lines.append(f"    - {violation.explanation}")
    for message in result.warnings:
        lines.append(f"note: {message}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_evaluate(args) -> int:
    kb = _load_kb(args)
    reqs, _, _ = _requirements_with_bpmn(args)
    result = evaluate(kb, reqs)
    if args.format == "json":
        sys.stdout.write(canonical_json(ranking_to_dict(result)))
    else:
        sys.stdout.write(_format_table(result))
    return 0


def _cmd_simulate(args) -> int:
    params = chain_params_from_dict(_read_json(args.params))
    workload = workload_from_dict(_read_json(args.workload))
    result = simulate(params, workload, args.duration)
    sys.stdout.write(canonical_json(sim_result_to_dict(result)))
    if args.occupancy:
        Path(args.occupancy).write_text(occupancy_csv(result), encoding="utf-8")
    return 0


def _cmd_refine(args) -> int:
    kb = _load_kb(args)
    params = chain_params_from_dict(_read_json(args.params))
    workload = workload_from_dict(_read_json(args.workload))
    refined = refine_intervals(kb, args.profile, {args.profile: params}, workload)
    Path(args.out).write_text(dump_knowledge_base(refined), encoding="utf-8")
    attrs = refined.profile(args.profile).attributes
    thr, lat = attrs[THROUGHPUT_CRITERION], attrs[LATENCY_CRITERION]
    print(
        f"kb_version {kb.kb_version} -> {refined.kb_version}; "
        f"{args.profile}: throughput [{thr.lo:g}, {thr.hi:g}] tx/s, "
        f"latency [{lat.lo:g}, {lat.hi:g}] s -> {args.out}"
    )
    return 0


def _cmd_generate(args) -> int:
    if not args.bpmn:
        raise BpmnError("generate requires --bpmn <file> (tasks drive the stubs)")
    kb = _load_kb(args)
    reqs, model, profile = _requirements_with_bpmn(args)
    result = evaluate(kb, reqs)
    if not result.ranked:
        print(
            "error: no platform survives the strict requirements; nothing to generate",
            file=sys.stderr,
        )
        return 1
    winner = kb.profile(result.ranked[0].alternative_id)
    params = chain_params_from_dict(_read_json(args.params)) if args.params \
        else default_chain_params()
    stub = generate_stubs(model, profile, winner, params)
    for path in write_stub(stub, args.out):
        print(path)
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    if not args.kb:
        raise KBError("no knowledge base: pass -k/--kb or set BLADE_KB")
    ui_dir = args.ui
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    host, port = args.bind
    serve(args.kb, host=host, port=port, ui_dir=ui_dir)
    return 0


def _cmd_validate(args) -> int:
    kb = _load_kb(args)
    if args.requirements:
        reqs = parse_requirements(Path(args.requirements).read_text(encoding="utf-8"))
        findings = validate_against(reqs, kb)
        for finding in findings:
            print(f"{finding.severity}: {finding.message}", file=sys.stderr)
        if any(f.severity == "error" for f in findings):
            return 1
    print(
        f"OK: kb version {kb.kb_version}, {len(kb.criteria)} criteria, "
        f"{len(kb.profiles)} profiles"
    )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _bind_address(raw: str) -> tuple[str, int]:
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"bind address must be host:port, got {raw!r}")
    return host, int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blade",
        description="Rank blockchain platforms against requirements; "
        "simulate workloads; scaffold the winner.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_kb(p):
        p.add_argument(
            "-k", "--kb", default=os.environ.get("BLADE_KB"),
            help="knowledge base JSON file (default: $BLADE_KB)",
        )

    def add_bpmn(p):
        p.add_argument("--bpmn", help="BPMN file whose embedded requirements merge in")
        p.add_argument(
            "--rate", type=float, default=1.0,
            help="process instances per second for --bpmn (default 1.0)",
        )

    p = subparsers.add_parser("evaluate", help="rank platforms against requirements")
    add_kb(p)
    p.add_argument("-r", "--requirements", required=True, help="requirements TOML file")
    add_bpmn(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=_cmd_evaluate)

    p = subparsers.add_parser("simulate", help="run the block-pipeline simulator")
    p.add_argument("-p", "--params", required=True, help="chain parameters JSON file")
    p.add_argument("-w", "--workload", required=True, help="workload JSON file")
    p.add_argument("-d", "--duration", type=float, required=True, help="seconds to simulate")
    p.add_argument("--occupancy", help="also write per-block occupancy CSV here")
    p.set_defaults(func=_cmd_simulate)

    p = subparsers.add_parser("refine", help="narrow a profile's intervals by simulation")
    add_kb(p)
    p.add_argument("--profile", required=True, help="profile id to refine")
    p.add_argument("-p", "--params", required=True, help="chain parameters JSON file")
    p.add_argument("-w", "--workload", required=True, help="workload JSON file")
    p.add_argument("-o", "--out", required=True, help="path for the refined KB")
    p.set_defaults(func=_cmd_refine)

    p = subparsers.add_parser("generate", help="generate stubs for the top-ranked platform")
    add_kb(p)
    p.add_argument("-r", "--requirements", required=True, help="requirements TOML file")
    add_bpmn(p)
    p.add_argument("-p", "--params", help="chain parameters JSON (default: built-in)")
    p.add_argument("-o", "--out", required=True, help="output directory for stub files")
    p.set_defaults(func=_cmd_generate)

    p = subparsers.add_parser("serve", help="run the HTTP service")
    add_kb(p)
    p.add_argument(
        "--bind", type=_bind_address, default=("127.0.0.1", 8000),
        help="host:port to listen on (default 127.0.0.1:8000)",
    )
    p.add_argument("--ui", help="directory of built UI assets to mount at /ui")
    p.set_defaults(func=_cmd_serve)

    p = subparsers.add_parser("validate", help="check a KB, optionally requirements against it")
    add_kb(p)
    p.add_argument("-r", "--requirements", help="requirements TOML file to cross-check")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailure as exc:
        for finding in exc.findings:
            if finding.severity == "error":
                print(f"error: {finding.message}", file=sys.stderr)
        return 1
    except (MatrixError, UnknownProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        KBError,
        RequirementsError,
        BpmnError,
        SimulationError,
        StubGenerationError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
