"""Tabular parameter exchange: request missing values, merge filled tables.

Engineers without model tooling receive a six-column CSV (element_path,
parameter_name, value, unit, document_name, document_path), fill in the value
and document cells, and send it back. export_table produces the request or a
dump of the current values; import_table merges a completed table into the
model, reporting every row it could not apply as a violation.

An empty value cell means "still requested" throughout: plain exports list
only filled parameters (so a dump never reads as a request), missing_only
exports list only empty ones, and import skips empty values rather than
blanking anything (deletion is out of scope for the table workflow).
"""
from __future__ import annotations

import csv
import io
from dataclasses import replace

from . import model as mm
from .consistency import (
    RULE_INVALID_VALUE,
    RULE_UNKNOWN_ELEMENT,
    RULE_UNKNOWN_PARAMETER,
    RULE_UNKNOWN_PATH,
    SEVERITY_ERROR,
    OwnershipError,
    OwnershipMap,
    StageCoverageMatrix,
    Violation,
    check_completeness,
    default_matrix,
    default_ownership,
    discipline_of,
)
from .paths import PathError, join_path

#: Fixed header row; import rejects any table that does not start with it.
HEADER = ("element_path", "parameter_name", "value", "unit",
          "document_name", "document_path")

#: Sub-trees accepted as a class filter on export.
CLASS_FILTERS = ("general", "status", "function", "interface", "control", "components")

#: Stage a table-created document is filed under, by owning discipline.
_STAGE_FOR_DISCIPLINE = {
    "mechanical": "mechanical_eng",
    "electrical": "electrical_eng",
    "software": "control_hmi_eng",
    "logistics": "logistics_planning",
    "process": "process_planning",
}


class ExchangeError(ValueError):
    """Structurally unusable table: bad encoding, header, or row shape."""


class _RowError(Exception):
    """Internal: one row could not be applied (rule id + message)."""

    def __init__(self, rule_id: str, message: str, parameter: str = ""):
        super().__init__(message)
        self.rule_id = rule_id
        self.parameter = parameter


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _docs_by_element(model: mm.ModuleModel) -> dict[str, mm.DocumentReference]:
    """First assigned document per element path, in document order."""
    out: dict[str, mm.DocumentReference] = {}
    for doc in model.documents:
        if doc.assigned_element:
            out.setdefault(doc.assigned_element, doc)
    return out


def _unit_of(model: mm.ModuleModel, element_path: str, parameter: str) -> str:
    for path, node in mm.iter_elements(model):
        if path != element_path:
            continue
        for name, _value, unit in mm._node_params(node):
            if name == parameter:
                return unit
        return ""
    return ""


def _stage_cells(model: mm.ModuleModel, stage: str,
                 matrix: StageCoverageMatrix) -> list[tuple[str, str]]:
    """Scalar cells the stage's matrix rows address (structural demands skipped)."""
    mid = model.id
    cells: list[tuple[str, str]] = []
    for row_stage, selector, parameter in matrix.rows:
        if row_stage != stage:
            continue
        if selector == "general/identification":
            cells.append((join_path(mid, "general", "identification"), parameter))
        elif selector == "general":
            cells.append((join_path(mid, "general"), parameter))
        elif selector == "control/platform":
            cells.append((join_path(mid, "control", "platform"), parameter))
        elif selector == "components/*":
            for component in model.components:
                cells.append((join_path(mid, "components", component.name), parameter))
        elif selector == "interface/ports/*":
            for port in model.interface.ports:
                cells.append((join_path(mid, "interface", "ports", port.name), parameter))
        elif selector == "control/io_mapping" and parameter == "logical_address":
            for i in range(len(model.control.io_mapping)):
                cells.append((join_path(mid, "control", "io_mapping", str(i)), parameter))
    seen: set[tuple[str, str]] = set()
    unique = []
    for cell in cells:
        if cell not in seen:
            seen.add(cell)
            unique.append(cell)
    return unique


def export_table(
    model: mm.ModuleModel,
    *,
    stage: str = "",
    cls: str = "",
    missing_only: bool = False,
    matrix: StageCoverageMatrix | None = None,
) -> bytes:
    """Render a parameter table (UTF-8, comma-separated, RFC-4180 quoting).

    Plain exports dump the filled parameters, optionally narrowed to one
    stage's matrix cells or one sub-tree (`cls`); missing_only exports the
    check_completeness request set for `stage` (default: the final stage)
    with empty value cells. Rows are sorted by element_path, parameter_name.
    """
    if stage and cls:
        raise ExchangeError("stage and class filters are mutually exclusive")
    if stage and stage not in mm.STAGES:
        raise ExchangeError(f"unknown stage {stage!r}")
    if cls:
        if missing_only:
            raise ExchangeError("missing_only exports select by stage, not by class")
        if cls not in CLASS_FILTERS:
            raise ExchangeError(
                f"unknown class filter {cls!r}; expected one of {', '.join(CLASS_FILTERS)}")
    if matrix is None:
        matrix = default_matrix()

    rows: list[tuple[str, str, str, str]] = []
    if missing_only:
        request_stage = stage or mm.STAGES[-1]
        for violation in check_completeness(model, request_stage, matrix):
            rows.append((violation.element_path, violation.parameter, "",
                         _unit_of(model, violation.element_path, violation.parameter)))
    elif stage:
        for element_path, parameter in _stage_cells(model, stage, matrix):
            value = mm.resolve(model, join_path(element_path, parameter))
            if value:
                rows.append((element_path, parameter, value,
                             _unit_of(model, element_path, parameter)))
    else:
        prefix = join_path(model.id, cls) if cls else ""
        for element_path, parameter, value, unit in mm.iter_parameters(model):
            if not value:
                continue
            if prefix and element_path != prefix and not element_path.startswith(prefix + "/"):
                continue
            rows.append((element_path, parameter, value, unit))

    docs = _docs_by_element(model)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for element_path, parameter, value, unit in sorted(rows, key=lambda r: (r[0], r[1])):
        doc = docs.get(element_path)
        writer.writerow((
            element_path, parameter, value, unit,
            doc.id if doc else "", doc.server_path if doc else ""))
    return buffer.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# Import
# ---------------------------------------------------------------------------

def _io_entry_exists(model: mm.ModuleModel, component_path: str) -> bool:
    return any(e.component_path == component_path for e in model.control.io_mapping)


def _write_value(model: mm.ModuleModel, node: object, element_path: str,
                 parameter: str, value: str) -> mm.ModuleModel:
    if (isinstance(node, mm.Component) and parameter == "logical_address"
            and node.kind in ("sensor", "actuator")
            and not _io_entry_exists(model, element_path)):
        # A request row anchored at an unmapped component: filling the address
        # creates the io_mapping entry (and its variable) rather than failing.
        direction = "input" if node.kind == "sensor" else "output"
        variable = ("i_" if node.kind == "sensor" else "q_") + node.name.lower()
        model = mm.add_io_entry(model, element_path, value, variable, "BOOL", direction)
        if all(v.name != variable for v in model.control.variables):
            model = mm.add_variable(model, variable, "BOOL", direction)
        return model
    known = {name for name, _value, _unit in mm._node_params(node)}
    if parameter not in known and not isinstance(node, mm.GeneralDescription):
        raise _RowError(RULE_UNKNOWN_PARAMETER,
                        f"element has no parameter {parameter!r}", parameter)
    try:
        return mm.set_parameter(model, element_path, parameter, value)
    except mm.ModelError as error:
        raise _RowError(RULE_INVALID_VALUE, str(error), parameter) from None


def _upsert_document(model: mm.ModuleModel, element_path: str, doc_name: str,
                     doc_path: str, ownership: OwnershipMap) -> mm.ModuleModel:
    existing = next((d for d in model.documents if d.id == doc_name), None)
    if existing is None:
        try:
            discipline = discipline_of(model, element_path, ownership)
        except OwnershipError as error:
            raise _RowError(RULE_INVALID_VALUE, str(error)) from None
        doc = mm.DocumentReference(
            id=doc_name, discipline=discipline,
            stage=_STAGE_FOR_DISCIPLINE[discipline],
            server_path=doc_path, assigned_element=element_path)
        try:
            return mm.add_document(model, doc)
        except mm.ModelError as error:
            raise _RowError(RULE_INVALID_VALUE, str(error)) from None
    refreshed = replace(
        existing,
        server_path=doc_path or existing.server_path,
        assigned_element=element_path)
    if refreshed == existing:
        return model
    return mm.replace_document(model, refreshed)


def _apply_row(model: mm.ModuleModel, element_path: str, parameter: str,
               value: str, doc_name: str, doc_path: str,
               ownership: OwnershipMap) -> mm.ModuleModel:
    try:
        node = mm.resolve(model, element_path)
    except PathError as error:
        raise _RowError(RULE_UNKNOWN_PATH, str(error)) from None
    if node is None:
        raise _RowError(RULE_UNKNOWN_ELEMENT, f"unknown element path {element_path!r}")
    if isinstance(node, str):
        raise _RowError(RULE_UNKNOWN_ELEMENT,
                        f"{element_path!r} addresses a parameter, not an element")
    if not parameter:
        raise _RowError(RULE_UNKNOWN_PARAMETER, "empty parameter name")
    if value:
        model = _write_value(model, node, element_path, parameter, value)
    if doc_name:
        model = _upsert_document(model, element_path, doc_name, doc_path, ownership)
    elif doc_path:
        raise _RowError(RULE_INVALID_VALUE, "document path given without a document name")
    return model


def import_table(
    model: mm.ModuleModel,
    data: bytes,
    *,
    ownership: OwnershipMap | None = None,
) -> tuple[mm.ModuleModel, list[Violation]]:
    """Merge a completed table; returns the updated model plus row violations.

    Structural problems (encoding, header, column count, unbalanced quotes)
    raise ExchangeError and apply nothing. A row that cannot be applied is
    skipped whole with exactly one violation; empty value cells are requests
    and are never written. Importing the same table twice is a no-op the
    second time.
    """
    if ownership is None:
        ownership = default_ownership()
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as error:
        raise ExchangeError(f"table is not UTF-8: {error}") from None
    text = text.replace("\r\n", "\n")
    try:
        records = list(csv.reader(io.StringIO(text)))
    except csv.Error as error:
        raise ExchangeError(f"malformed table: {error}") from None
    if not records or tuple(records[0]) != HEADER:
        raise ExchangeError(
            "wrong header; expected " + ",".join(HEADER))

    violations: list[Violation] = []
    for number, record in enumerate(records[1:], start=2):
        if len(record) != len(HEADER):
            raise ExchangeError(
                f"row {number}: expected {len(HEADER)} columns, found {len(record)}")
        element_path, parameter, value, _unit, doc_name, doc_path = record
        try:
            model = _apply_row(model, element_path, parameter, value,
                               doc_name, doc_path, ownership)
        except _RowError as error:
            violations.append(Violation(
                error.rule_id, SEVERITY_ERROR, element_path, str(error),
                parameter=error.parameter))
    return model, violations
