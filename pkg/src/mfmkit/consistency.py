"""Cross-discipline consistency checks over a module model.

Four concerns live here: aggregation of documents per discipline, reference
integrity (every stored reference must resolve), document-to-element
assignment, and stage-wise completeness against a coverage matrix. A
dependency report quantifies how many references cross discipline borders.

All checks are pure functions of a model snapshot and return Violations;
they never raise on bad model content, only on unusable inputs (unknown
stage, broken matrix file).
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from . import model as mm
from .paths import PathError, join_path, split_path

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"
SEVERITY_INFO = "info"

# Rule registry (docs/rules.md documents each id).
RULE_DANGLING_SOURCE = "dangling-source"
RULE_DANGLING_TARGET = "dangling-target"
RULE_DANGLING_ASSIGNMENT = "dangling-assignment"
RULE_IO_UNKNOWN_COMPONENT = "io-unknown-component"
RULE_IO_UNKNOWN_VARIABLE = "io-unknown-variable"
RULE_IO_DIRECTION = "io-direction"
RULE_ROUTE_UNKNOWN_PORT = "route-unknown-port"
RULE_DANGLING_BEHAVIOR_REF = "dangling-behavior-ref"
RULE_DANGLING_BODY_REF = "dangling-body-ref"
RULE_MISSING_PARAMETER = "missing-parameter"
RULE_MISSING_CONTAINER = "missing-container"
RULE_UNKNOWN_ELEMENT = "unknown-element"
RULE_UNKNOWN_PARAMETER = "unknown-parameter"
RULE_INVALID_VALUE = "invalid-value"
RULE_UNKNOWN_PATH = "unknown-path"
RULE_DOCUMENT_REASSIGNED = "document-reassigned"
RULE_UNCOVERED_CLASS = "uncovered-class"
RULE_AMBIGUOUS_BRANCH = "ambiguous-branch"


@dataclass(frozen=True, slots=True)
class Violation:
    """One consistency finding."""

    rule_id: str
    severity: str
    element_path: str
    message: str
    stage: str = ""
    #: parameter name for missing/invalid parameter findings, "" otherwise
    parameter: str = ""


def format_violation(v: Violation) -> str:
    return f"{v.severity.upper()} {v.rule_id} {v.element_path}: {v.message}"


def has_errors(violations) -> bool:
    return any(v.severity == SEVERITY_ERROR for v in violations)


# ---------------------------------------------------------------------------
# Reference integrity
# ---------------------------------------------------------------------------

def check_links(model: mm.ModuleModel) -> list[Violation]:
    """One violation per stored reference endpoint that fails to resolve.

    Covers cross-reference endpoints, document assignments, io_mapping
    component/variable references and direction legality, route ports, and
    behavior/body document references.
    """
    out: list[Violation] = []
    mid = model.id

    for i, ref in enumerate(model.cross_refs):
        anchor = join_path(mid, "cross_refs", str(i))
        if mm.resolve(model, ref.source) is None:
            out.append(Violation(
                RULE_DANGLING_SOURCE, SEVERITY_ERROR, anchor,
                f"source '{ref.source}' does not resolve"))
        if mm.resolve(model, ref.target) is None:
            out.append(Violation(
                RULE_DANGLING_TARGET, SEVERITY_ERROR, anchor,
                f"target '{ref.target}' does not resolve"))

    for doc in model.documents:
        if doc.assigned_element and mm.resolve(model, doc.assigned_element) is None:
            out.append(Violation(
                RULE_DANGLING_ASSIGNMENT, SEVERITY_ERROR,
                join_path(mid, "documents", doc.id),
                f"assigned element '{doc.assigned_element}' does not resolve"))

    variable_names = {v.name for v in model.control.variables}
    for i, entry in enumerate(model.control.io_mapping):
        anchor = join_path(mid, "control", "io_mapping", str(i))
        component = mm.resolve(model, entry.component_path)
        if not isinstance(component, mm.Component):
            out.append(Violation(
                RULE_IO_UNKNOWN_COMPONENT, SEVERITY_ERROR, anchor,
                f"component '{entry.component_path}' does not resolve to a component"))
        elif component.kind == "sensor" and entry.direction != "input":
            out.append(Violation(
                RULE_IO_DIRECTION, SEVERITY_ERROR, anchor,
                f"sensor '{component.name}' must map to direction input"))
        elif component.kind == "actuator" and entry.direction != "output":
            out.append(Violation(
                RULE_IO_DIRECTION, SEVERITY_ERROR, anchor,
                f"actuator '{component.name}' must map to direction output"))
        elif component.kind not in ("sensor", "actuator"):
            out.append(Violation(
                RULE_IO_DIRECTION, SEVERITY_ERROR, anchor,
                f"component kind '{component.kind}' cannot carry an i/o signal"))
        if entry.variable_name and entry.variable_name not in variable_names:
            out.append(Violation(
                RULE_IO_UNKNOWN_VARIABLE, SEVERITY_ERROR, anchor,
                f"variable '{entry.variable_name}' is not declared"))

    port_names = {p.name for p in model.interface.ports}
    for i, route in enumerate(model.function.routes):
        anchor = join_path(mid, "function", "routes", str(i))
        for endpoint in (route.from_port, route.to_port):
            if endpoint not in port_names:
                out.append(Violation(
                    RULE_ROUTE_UNKNOWN_PORT, SEVERITY_ERROR, anchor,
                    f"port '{endpoint}' is not declared"))

    doc_ids = {d.id for d in model.documents}
    for function in model.function.logistic_functions:
        if function.behavior_ref and function.behavior_ref not in doc_ids:
            out.append(Violation(
                RULE_DANGLING_BEHAVIOR_REF, SEVERITY_ERROR,
                join_path(mid, "function", "logistic_functions", function.name),
                f"behavior document '{function.behavior_ref}' is not registered"))
    for function in model.control.control_functions:
        if function.body_ref and function.body_ref not in doc_ids:
            out.append(Violation(
                RULE_DANGLING_BODY_REF, SEVERITY_ERROR,
                join_path(mid, "control", "control_functions", function.name),
                f"body document '{function.body_ref}' is not registered"))
    return out


# ---------------------------------------------------------------------------
# Stage completeness
# ---------------------------------------------------------------------------

_MATRIX_SELECTORS = (
    "general",
    "general/identification",
    "status",
    "function",
    "interface",
    "interface/ports/*",
    "control",
    "control/io_mapping",
    "control/platform",
    "components/*",
)

_CONTAINER_PARAMS = {
    ("function", "logistic_functions"),
    ("interface", "ports"),
    ("control", "control_functions"),
    ("control", "variables"),
    ("status", "runtime_variables"),
}


@dataclass(frozen=True, slots=True)
class StageCoverageMatrix:
    """Which (element, parameter) pairs each stage must have populated."""

    rows: tuple[tuple[str, str, str], ...]  # (stage, selector, parameter)


class MatrixError(ValueError):
    """Raised for an unreadable coverage matrix file."""


def load_matrix(text: str) -> StageCoverageMatrix:
    """Parse the line-oriented matrix format: `stage | selector | parameter`."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3 or not all(parts):
            raise MatrixError(f"line {lineno}: expected 'stage | selector | parameter'")
        stage, selector, parameter = parts
        if stage not in mm.STAGES:
            raise MatrixError(f"line {lineno}: unknown stage {stage!r}")
        if selector not in _MATRIX_SELECTORS:
            raise MatrixError(f"line {lineno}: unknown selector {selector!r}")
        rows.append((stage, selector, parameter))
    return StageCoverageMatrix(rows=tuple(rows))


def default_matrix() -> StageCoverageMatrix:
    text = resources.files("mfmkit").joinpath("data/coverage_matrix.txt").read_text("utf-8")
    return load_matrix(text)


def _sensor_actuator_components(model: mm.ModuleModel):
    return [c for c in model.components if c.kind in ("sensor", "actuator")]


def _eval_row(model: mm.ModuleModel, stage: str, selector: str, parameter: str) -> list[Violation]:
    mid = model.id
    found: list[Violation] = []

    def miss(path: str, message: str) -> None:
        found.append(Violation(
            RULE_MISSING_PARAMETER, SEVERITY_ERROR, path, message,
            stage=stage, parameter=parameter))

    if selector == "general/identification":
        value = mm.resolve(model, join_path(mid, "general", "identification", parameter))
        if not value:
            miss(join_path(mid, "general", "identification"), f"identification {parameter} is not set")
    elif selector == "general":
        value = mm.resolve(model, join_path(mid, "general", parameter))
        if not value:
            miss(join_path(mid, "general"), f"general {parameter} is not set")
    elif selector == "control/platform":
        value = mm.resolve(model, join_path(mid, "control", "platform", parameter))
        if not value:
            miss(join_path(mid, "control", "platform"), f"platform {parameter} is not set")
    elif selector == "components/*":
        for component in model.components:
            path = join_path(mid, "components", component.name)
            if not mm.resolve(model, join_path(path, parameter)):
                miss(path, f"component {component.name} has no {parameter}")
    elif selector == "interface/ports/*":
        for port in model.interface.ports:
            path = join_path(mid, "interface", "ports", port.name)
            if not mm.resolve(model, join_path(path, parameter)):
                miss(path, f"port {port.name} has no {parameter}")
    elif selector == "control/io_mapping" and parameter == "logical_address":
        for component in _sensor_actuator_components(model):
            component_path = join_path(mid, "components", component.name)
            entries = [
                (i, e) for i, e in enumerate(model.control.io_mapping)
                if e.component_path == component_path
            ]
            if not entries:
                miss(component_path, f"no io_mapping entry for {component.kind} {component.name}")
            else:
                for i, entry in entries:
                    if not entry.logical_address:
                        miss(join_path(mid, "control", "io_mapping", str(i)),
                             f"io_mapping entry for {component.name} has no logical_address")
    elif selector == "control" and parameter == "sensor_actuator_refs":
        for component in _sensor_actuator_components(model):
            component_path = join_path(mid, "components", component.name)
            prefix = component_path + "/"
            covered = any(
                endpoint == component_path or endpoint.startswith(prefix)
                for ref in model.cross_refs
                for endpoint in (ref.source, ref.target)
            )
            if not covered:
                miss(component_path,
                     f"{component.kind} {component.name} is not referenced by any cross reference")
    elif (selector, parameter) in _CONTAINER_PARAMS:
        container = getattr(getattr(model, selector.split("/")[0]), parameter)
        if not container:
            miss(join_path(mid, selector), f"no {parameter} declared")
    else:
        raise MatrixError(f"unsupported matrix row: {selector} | {parameter}")
    return found


def check_completeness(
    model: mm.ModuleModel, stage: str, matrix: StageCoverageMatrix | None = None
) -> list[Violation]:
    """Missing-parameter violations for `stage`, cumulative over prior stages.

    A violation is reported once per (element, parameter) pair, labeled with
    the earliest stage that requires it. Unknown stages raise ValueError.
    """
    if stage not in mm.STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if matrix is None:
        matrix = default_matrix()
    active = set(mm.STAGES[: mm.STAGES.index(stage) + 1])
    out: list[Violation] = []
    seen: set[tuple[str, str]] = set()
    for row_stage, selector, parameter in matrix.rows:
        if row_stage not in active:
            continue
        for violation in _eval_row(model, row_stage, selector, parameter):
            key = (violation.element_path, violation.parameter)
            if key not in seen:
                seen.add(key)
                out.append(violation)
    return out


# ---------------------------------------------------------------------------
# Ownership and aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class OwnershipMap:
    """Longest-prefix rules mapping element paths to owning disciplines."""

    rules: tuple[tuple[str, str], ...]  # (path prefix below the module id, discipline)


class OwnershipError(ValueError):
    """Raised for an unusable ownership map."""


_REQUIRED_OWNERSHIP = ("general", "status", "function", "interface", "control", "components")


def load_ownership(text: str) -> OwnershipMap:
    """Parse the line-oriented ownership format: `selector | discipline`."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 2 or not all(parts):
            raise OwnershipError(f"line {lineno}: expected 'selector | discipline'")
        selector, discipline = parts
        if discipline not in mm.DISCIPLINES:
            raise OwnershipError(f"line {lineno}: unknown discipline {discipline!r}")
        rules.append((selector, discipline))
    covered = {selector for selector, _ in rules}
    missing = [s for s in _REQUIRED_OWNERSHIP if s not in covered]
    if missing:
        raise OwnershipError(f"ownership map does not cover: {', '.join(missing)}")
    return OwnershipMap(rules=tuple(rules))


def default_ownership() -> OwnershipMap:
    text = resources.files("mfmkit").joinpath("data/ownership.txt").read_text("utf-8")
    return load_ownership(text)


def discipline_of(model: mm.ModuleModel, path: str, ownership: OwnershipMap) -> str:
    """Owning discipline of the element at `path` (documents own themselves)."""
    segments = split_path(path)
    id_segments = split_path(model.id)
    if segments[: len(id_segments)] != id_segments or len(segments) == len(id_segments):
        raise OwnershipError(f"path {path!r} is not inside module {model.id!r}")
    rest = "/".join(segments[len(id_segments):])
    if rest.split("/")[0] == "documents":
        doc = mm.resolve(model, path)
        if isinstance(doc, mm.DocumentReference):
            return doc.discipline
        raise OwnershipError(f"unknown document path {path!r}")
    best: tuple[int, str] | None = None
    for selector, discipline in ownership.rules:
        if rest == selector or rest.startswith(selector + "/"):
            if best is None or len(selector) > best[0]:
                best = (len(selector), discipline)
    if best is None:
        raise OwnershipError(f"no ownership rule covers {path!r}")
    return best[1]


@dataclass(frozen=True, slots=True)
class DocumentBundle:
    """Documents and owned element paths grouped per discipline."""

    buckets: tuple[tuple[str, tuple[mm.DocumentReference, ...], tuple[str, ...]], ...]


def aggregate(model: mm.ModuleModel, ownership: OwnershipMap | None = None) -> DocumentBundle:
    """Group documents (by their own discipline) and element paths (by owner).

    Buckets appear for all five disciplines in alphabetical order, so the
    partition is visible even when empty.
    """
    if ownership is None:
        ownership = default_ownership()
    buckets = []
    for discipline in sorted(mm.DISCIPLINES):
        docs = tuple(d for d in model.documents if d.discipline == discipline)
        owned = tuple(
            path for path, node in mm.iter_elements(model)
            if not isinstance(node, mm.ModuleModel)
            and discipline_of(model, path, ownership) == discipline
        )
        buckets.append((discipline, docs, owned))
    return DocumentBundle(buckets=tuple(buckets))


def assign_document(
    model: mm.ModuleModel, doc_id: str, element_path: str
) -> tuple[mm.ModuleModel, list[Violation]]:
    """Assign a registered document to an element (last write wins).

    Unknown document ids raise ModelError. A dangling target is recorded
    anyway and reported as a violation; replacing an existing assignment is
    reported as info.
    """
    doc = None
    for candidate in model.documents:
        if candidate.id == doc_id:
            doc = candidate
            break
    if doc is None:
        raise mm.ModelError(f"unknown document id {doc_id!r}")
    split_path(element_path)
    violations: list[Violation] = []
    anchor = join_path(model.id, "documents", doc.id)
    if doc.assigned_element and doc.assigned_element != element_path:
        violations.append(Violation(
            RULE_DOCUMENT_REASSIGNED, SEVERITY_INFO, anchor,
            f"assignment moved from '{doc.assigned_element}' to '{element_path}'"))
    if mm.resolve(model, element_path) is None:
        violations.append(Violation(
            RULE_DANGLING_ASSIGNMENT, SEVERITY_ERROR, anchor,
            f"assigned element '{element_path}' does not resolve"))
    from dataclasses import replace as _replace

    updated = mm.replace_document(model, _replace(doc, assigned_element=element_path))
    return updated, violations


# ---------------------------------------------------------------------------
# Dependency report
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class DependencyReport:
    """Cross-reference counts between disciplines plus workload shares.

    `cells` holds (source discipline, target discipline, count) for every
    non-empty cell, sorted; fractions are count/total_refs. `workload` holds
    (discipline, populated parameter count) for all disciplines.
    """

    cells: tuple[tuple[str, str, int], ...]
    total_refs: int
    workload: tuple[tuple[str, int], ...]
    total_params: int

    def fraction(self, source: str, target: str) -> float:
        if self.total_refs == 0:
            return 0.0
        for a, b, count in self.cells:
            if (a, b) == (source, target):
                return count / self.total_refs
        return 0.0

    def workload_fraction(self, discipline: str) -> float:
        if self.total_params == 0:
            return 0.0
        for d, count in self.workload:
            if d == discipline:
                return count / self.total_params
        return 0.0


def dependency_report(
    model: mm.ModuleModel, ownership: OwnershipMap | None = None
) -> DependencyReport:
    """Count cross-references between owning disciplines.

    Every cross-reference endpoint must be ownable; dangling endpoints raise
    OwnershipError (run check_links first on untrusted models).
    """
    if ownership is None:
        ownership = default_ownership()
    counts: dict[tuple[str, str], int] = {}
    for ref in model.cross_refs:
        source = discipline_of(model, ref.source, ownership)
        target = discipline_of(model, ref.target, ownership)
        counts[(source, target)] = counts.get((source, target), 0) + 1
    total_refs = len(model.cross_refs)

    work: dict[str, int] = {d: 0 for d in sorted(mm.DISCIPLINES)}
    total_params = 0
    for path, _name, value, _unit in mm.iter_parameters(model):
        if value == "":
            continue
        total_params += 1
        work[discipline_of(model, path, ownership)] += 1

    return DependencyReport(
        cells=tuple(sorted((a, b, n) for (a, b), n in counts.items())),
        total_refs=total_refs,
        workload=tuple(sorted(work.items())),
        total_params=total_params,
    )
