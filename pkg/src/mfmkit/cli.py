"""Command line wiring the toolkit into the engineering workflow.

Subcommands:

  validate        structure, role/interface assignments, link integrity
  complete-check  stage completeness gate
  link-check      reference integrity only
  gen-plcopen     behavior graph to bound SFC skeleton
  simulate        token walk of a behavior over a trace, cross-checked
                  against the generated SFC
  export-table    parameter table export (dump or request form)
  import-table    merge a filled table back into a model file
  report          discipline dependency matrix and workload shares
  init-example    write the T-junction example set

Exit codes, stable across commands: 0 = clean, 1 = findings in readable
input, 2 = operational failure (unreadable or unparsable file, bad flag or
stage name). Output is deterministic for identical inputs; `--format
structured` switches the human-readable lines to JSON records, one per line.

Rule table, coverage matrix, and ownership map resolve in this order: an
explicit flag path, then the matching file inside $MFMKIT_RULES_DIR (when
the variable is set and the file exists), then the embedded default.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import behavior, caex_io, exchange, fixture, mapping, sfc
from . import consistency as cc
from . import model as mm
from .caex_io import StructureError
from .exchange import ExchangeError
from .xmlio import XmlError

RULES_DIR_ENV = "MFMKIT_RULES_DIR"

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_FAILURE = 2

FORMAT_TEXT = "text"
FORMAT_STRUCTURED = "structured"


class _CliFailure(Exception):
    """Operational failure: message for stderr, exit code 2."""


# ---------------------------------------------------------------------------
# Configuration loading
# ---------------------------------------------------------------------------

def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as error:
        raise _CliFailure(f"cannot read {path}: {error.strerror or error}") from None


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except (OSError, UnicodeDecodeError) as error:
        raise _CliFailure(f"cannot read {path}: {error}") from None


def _config_text(flag_path: str | None, filename: str) -> str | None:
    """Resolve one config file: flag, then $MFMKIT_RULES_DIR, then None."""
    if flag_path:
        return _read_text(flag_path)
    rules_dir = os.environ.get(RULES_DIR_ENV)
    if rules_dir:
        candidate = Path(rules_dir) / filename
        if candidate.is_file():
            return _read_text(str(candidate))
    return None


def _rule_table(args: argparse.Namespace) -> mapping.MappingRuleTable:
    text = _config_text(getattr(args, "rules", None), "rules.txt")
    try:
        return mapping.load_table(text) if text is not None else mapping.default_table()
    except mapping.RuleTableError as error:
        raise _CliFailure(f"bad rule table: {error}") from None


def _coverage_matrix(args: argparse.Namespace) -> cc.StageCoverageMatrix:
    text = _config_text(getattr(args, "matrix", None), "coverage_matrix.txt")
    try:
        return cc.load_matrix(text) if text is not None else cc.default_matrix()
    except cc.MatrixError as error:
        raise _CliFailure(f"bad coverage matrix: {error}") from None


def _ownership_map(args: argparse.Namespace) -> cc.OwnershipMap:
    text = _config_text(getattr(args, "ownership", None), "ownership.txt")
    try:
        return cc.load_ownership(text) if text is not None else cc.default_ownership()
    except cc.OwnershipError as error:
        raise _CliFailure(f"bad ownership map: {error}") from None


def _load_model(path: str) -> tuple[mm.ModuleModel, list[cc.Violation]]:
    data = _read_bytes(path)
    try:
        return caex_io.to_model(caex_io.parse(data))
    except (XmlError, StructureError) as error:
        raise _CliFailure(f"{path}: {error}") from None


def _load_graph(path: str) -> behavior.BehaviorGraph:
    text = _read_text(path)
    try:
        return behavior.parse_behavior(text)
    except (behavior.BehaviorParseError, behavior.BehaviorGraphError) as error:
        raise _CliFailure(f"{path}: {error}") from None


def _load_trace(path: str) -> list[behavior.TraceEvent]:
    text = _read_text(path)
    try:
        return behavior.parse_trace(text)
    except behavior.BehaviorParseError as error:
        raise _CliFailure(f"{path}: {error}") from None


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _record(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, ensure_ascii=False))


def _emit_violation(fmt: str, file: str, violation: cc.Violation) -> None:
    if fmt == FORMAT_STRUCTURED:
        _record({
            "record": "violation",
            "file": file,
            "rule": violation.rule_id,
            "severity": violation.severity,
            "path": violation.element_path,
            "message": violation.message,
            "stage": violation.stage,
            "parameter": violation.parameter,
        })
    else:
        print(f"{file}: {cc.format_violation(violation)}")


def _describe_assignment(violation: mapping.AssignmentViolation) -> str:
    permitted = ", ".join(violation.permitted) or "none"
    if violation.kind == mapping.KIND_MISSING_ROLE:
        return f"no role assigned; permitted: {permitted}"
    what = "role" if violation.kind == mapping.KIND_ILLEGAL_ROLE else "interface"
    return f"{what} '{violation.found_identifier}' not permitted; permitted: {permitted}"


def _emit_assignment(fmt: str, file: str, violation: mapping.AssignmentViolation) -> None:
    if fmt == FORMAT_STRUCTURED:
        _record({
            "record": "violation",
            "file": file,
            "rule": violation.kind,
            "severity": cc.SEVERITY_ERROR,
            "path": violation.element_path,
            "message": _describe_assignment(violation),
            "found": violation.found_identifier,
            "permitted": list(violation.permitted),
        })
    else:
        print(f"{file}: ERROR {violation.kind} {violation.element_path}: "
              f"{_describe_assignment(violation)}")


def _emit_note(fmt: str, file: str, rule: str, message: str) -> None:
    if fmt == FORMAT_STRUCTURED:
        _record({"record": "note", "file": file, "rule": rule, "message": message})
    else:
        print(f"{file}: INFO {rule}: {message}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_validate(args: argparse.Namespace) -> int:
    table = _rule_table(args)
    exit_code = EXIT_CLEAN
    for file in args.files:
        model, structural = _load_model(file)
        assignments = mapping.validate_assignments(model, table)
        links = cc.check_links(model)
        for violation in structural:
            _emit_violation(args.format, file, violation)
        for assignment in assignments:
            _emit_assignment(args.format, file, assignment)
        for violation in links:
            _emit_violation(args.format, file, violation)
        for cls in mapping.uncovered_classes(model, table):
            _emit_note(args.format, file, "uncovered-class",
                       f"class {cls} is not covered by the rule table")
        if assignments or cc.has_errors(structural) or cc.has_errors(links):
            exit_code = EXIT_FINDINGS
    return exit_code


def _cmd_complete_check(args: argparse.Namespace) -> int:
    if args.stage not in mm.STAGES:
        raise _CliFailure(
            f"unknown stage {args.stage!r}; expected one of {', '.join(mm.STAGES)}")
    matrix = _coverage_matrix(args)
    model, _structural = _load_model(args.file)
    try:
        violations = cc.check_completeness(model, args.stage, matrix)
    except cc.MatrixError as error:
        raise _CliFailure(f"bad coverage matrix: {error}") from None
    for violation in violations:
        _emit_violation(args.format, args.file, violation)
    return EXIT_FINDINGS if violations else EXIT_CLEAN


def _cmd_link_check(args: argparse.Namespace) -> int:
    exit_code = EXIT_CLEAN
    for file in args.files:
        model, _structural = _load_model(file)
        violations = cc.check_links(model)
        for violation in violations:
            _emit_violation(args.format, file, violation)
        if cc.has_errors(violations):
            exit_code = EXIT_FINDINGS
    return exit_code


def _bound_program(model: mm.ModuleModel,
                   graph: behavior.BehaviorGraph) -> sfc.SfcProgram | cc.Violation:
    try:
        return sfc.iml_to_sfc(behavior.to_iml(graph), model)
    except sfc.SfcError as error:
        return cc.Violation("unbound-subject", cc.SEVERITY_ERROR, model.id, str(error))


def _cmd_gen_plcopen(args: argparse.Namespace) -> int:
    model, _structural = _load_model(args.model)
    graph = _load_graph(args.behavior)
    program = _bound_program(model, graph)
    if isinstance(program, cc.Violation):
        _emit_violation(args.format, args.behavior, program)
        return EXIT_FINDINGS
    data = sfc.emit_plcopen(program)
    try:
        Path(args.out).write_bytes(data)
    except OSError as error:
        raise _CliFailure(
            f"cannot write {args.out}: {error.strerror or error}") from None
    if args.format == FORMAT_STRUCTURED:
        _record({
            "record": "plcopen",
            "out": args.out,
            "steps": len(program.steps),
            "transitions": len(program.transitions),
            "divergences": [[step, count] for step, count in sfc.divergences(program)],
        })
    else:
        print(f"{args.out}: {len(program.steps)} steps, "
              f"{len(program.transitions)} transitions")
    return EXIT_CLEAN


def _cmd_simulate(args: argparse.Namespace) -> int:
    model, _structural = _load_model(args.model)
    graph = _load_graph(args.behavior)
    trace = _load_trace(args.trace)
    program = _bound_program(model, graph)
    if isinstance(program, cc.Violation):
        _emit_violation(args.format, args.behavior, program)
        return EXIT_FINDINGS
    try:
        events = behavior.simulate(graph, trace)
        replayed = sfc.simulate_sfc(program, trace, model)
    except behavior.SimulationError as error:
        _emit_violation(args.format, args.trace, cc.Violation(
            cc.RULE_AMBIGUOUS_BRANCH, cc.SEVERITY_ERROR, graph.id or model.id,
            str(error)))
        return EXIT_FINDINGS
    if events != replayed:
        _emit_violation(args.format, args.behavior, cc.Violation(
            "pipeline-mismatch", cc.SEVERITY_ERROR, graph.id or model.id,
            "graph walk and generated program emit different event sequences"))
        return EXIT_FINDINGS
    for event in events:
        if args.format == FORMAT_STRUCTURED:
            _record({"record": "event", "kind": event.kind, "subject": event.subject})
        else:
            print(behavior.format_event(event))
    return EXIT_CLEAN


def _cmd_export_table(args: argparse.Namespace) -> int:
    model, _structural = _load_model(args.file)
    matrix = _coverage_matrix(args)
    try:
        data = exchange.export_table(
            model, stage=args.stage, cls=args.cls,
            missing_only=args.missing_only, matrix=matrix)
    except ExchangeError as error:
        raise _CliFailure(str(error)) from None
    if args.out:
        try:
            Path(args.out).write_bytes(data)
        except OSError as error:
            raise _CliFailure(
                f"cannot write {args.out}: {error.strerror or error}") from None
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    return EXIT_CLEAN


def _cmd_import_table(args: argparse.Namespace) -> int:
    model, _structural = _load_model(args.file)
    table = _read_bytes(args.table)
    ownership = _ownership_map(args)
    try:
        updated, violations = exchange.import_table(model, table, ownership=ownership)
    except ExchangeError as error:
        raise _CliFailure(f"{args.table}: {error}") from None
    for violation in violations:
        _emit_violation(args.format, args.table, violation)
    data = caex_io.serialize(caex_io.from_model(updated))
    try:
        Path(args.out).write_bytes(data)
    except OSError as error:
        raise _CliFailure(
            f"cannot write {args.out}: {error.strerror or error}") from None
    return EXIT_FINDINGS if violations else EXIT_CLEAN


def _cmd_report(args: argparse.Namespace) -> int:
    model, _structural = _load_model(args.file)
    ownership = _ownership_map(args)
    try:
        report = cc.dependency_report(model, ownership)
    except cc.OwnershipError as error:
        _emit_violation(args.format, args.file, cc.Violation(
            "unownable-endpoint", cc.SEVERITY_ERROR, model.id, str(error)))
        return EXIT_FINDINGS
    if args.format == FORMAT_STRUCTURED:
        for source, target, count in report.cells:
            _record({
                "record": "dependency", "source": source, "target": target,
                "refs": count, "share": round(count / report.total_refs, 6),
            })
        for discipline, count in report.workload:
            _record({
                "record": "workload", "discipline": discipline, "parameters": count,
                "share": (round(count / report.total_params, 6)
                          if report.total_params else 0.0),
            })
        _record({
            "record": "summary",
            "total_refs": report.total_refs,
            "total_params": report.total_params,
        })
        return EXIT_CLEAN
    print("dependencies (cross-references between disciplines):")
    if report.total_refs == 0:
        print("  no references")
    for source, target, count in report.cells:
        share = count / report.total_refs
        print(f"  {source} -> {target}: {count} ({share:.3f})")
    print(f"  total: {report.total_refs}")
    print("workload (populated parameters per discipline):")
    for discipline, count in report.workload:
        share = count / report.total_params if report.total_params else 0.0
        print(f"  {discipline}: {count} ({share:.3f})")
    print(f"  total: {report.total_params}")
    return EXIT_CLEAN


def _data_text(filename: str) -> str:
    return resources.files("mfmkit").joinpath(f"data/{filename}").read_text("utf-8")


def _cmd_init_example(args: argparse.Namespace) -> int:
    target = Path(args.dir)
    try:
        target.mkdir(parents=True, exist_ok=True)
        if any(target.iterdir()) and not args.force:
            raise _CliFailure(f"{args.dir} is not empty (use --force to overwrite)")
        files = {
            "model.aml": caex_io.serialize(caex_io.from_model(fixture.tjunction_model())),
            "behavior.bhv": fixture.behavior_text().encode("utf-8"),
            "traces/route-1.trace": fixture.trace_text("route-1").encode("utf-8"),
            "traces/route-2.trace": fixture.trace_text("route-2").encode("utf-8"),
            "rules.txt": mapping.save_table(mapping.default_table()).encode("utf-8"),
            "coverage_matrix.txt": _data_text("coverage_matrix.txt").encode("utf-8"),
            "ownership.txt": _data_text("ownership.txt").encode("utf-8"),
        }
        for name, data in files.items():
            path = target / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
            print(f"wrote {path}")
    except OSError as error:
        raise _CliFailure(
            f"cannot write into {args.dir}: {error.strerror or error}") from None
    return EXIT_CLEAN


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=(FORMAT_TEXT, FORMAT_STRUCTURED),
                        default=FORMAT_TEXT, help="output style (default: text)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfmkit",
        description="Validate, exchange, and generate control code for "
                    "material flow module models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structure, assignments, and link integrity")
    p.add_argument("files", nargs="+", metavar="model.aml")
    p.add_argument("--rules", help="rule table file (default: embedded)")
    _add_format(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("complete-check", help="stage completeness gate")
    p.add_argument("file", metavar="model.aml")
    p.add_argument("--stage", required=True, help="stage to gate on")
    p.add_argument("--matrix", help="coverage matrix file (default: embedded)")
    _add_format(p)
    p.set_defaults(func=_cmd_complete_check)

    p = sub.add_parser("link-check", help="cross-reference integrity only")
    p.add_argument("files", nargs="+", metavar="model.aml")
    _add_format(p)
    p.set_defaults(func=_cmd_link_check)

    p = sub.add_parser("gen-plcopen", help="generate the bound SFC skeleton")
    p.add_argument("model", metavar="model.aml")
    p.add_argument("behavior", metavar="behavior.bhv")
    p.add_argument("-o", "--out", required=True, metavar="skeleton.xml")
    _add_format(p)
    p.set_defaults(func=_cmd_gen_plcopen)

    p = sub.add_parser("simulate", help="replay a trace through graph and SFC")
    p.add_argument("model", metavar="model.aml")
    p.add_argument("behavior", metavar="behavior.bhv")
    p.add_argument("trace", metavar="events.trace")
    _add_format(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("export-table", help="export a parameter table")
    p.add_argument("file", metavar="model.aml")
    p.add_argument("--stage", default="", help="limit to one stage's cells")
    p.add_argument("--cls", default="", help="limit to one sub-tree")
    p.add_argument("--missing-only", action="store_true",
                   help="request form: only unfilled cells")
    p.add_argument("--matrix", help="coverage matrix file (default: embedded)")
    p.add_argument("-o", "--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_export_table, format=FORMAT_TEXT)

    p = sub.add_parser("import-table", help="merge a filled table into a model")
    p.add_argument("file", metavar="model.aml")
    p.add_argument("table", metavar="table.csv")
    p.add_argument("-o", "--out", required=True, metavar="merged.aml")
    p.add_argument("--ownership", help="ownership map file (default: embedded)")
    _add_format(p)
    p.set_defaults(func=_cmd_import_table)

    p = sub.add_parser("report", help="dependency matrix and workload shares")
    p.add_argument("file", metavar="model.aml")
    p.add_argument("--ownership", help="ownership map file (default: embedded)")
    _add_format(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("init-example", help="write the T-junction example set")
    p.add_argument("dir", metavar="directory")
    p.add_argument("--force", action="store_true", help="overwrite existing files")
    p.set_defaults(func=_cmd_init_example, format=FORMAT_TEXT)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as failure:
        print(f"mfmkit: {failure}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
