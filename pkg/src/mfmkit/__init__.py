"""Meta model, exchange format, and control-code toolkit for material flow modules.

The package splits along the workflow:

- model: the module meta model (general/status/function/interface/control)
  and its pure builder functions
- caex_io: the CAEX-subset XML exchange format (parse/serialize/to_model/
  from_model) plus external-document connectors
- mapping: permitted role and interface identifiers per meta-model class
- consistency: link integrity, stage completeness, discipline ownership,
  and the dependency report
- behavior: logistic behavior graphs, their flattened guard/action form,
  and token simulation
- sfc: binding behavior to module i/o, PLCopen-style emission, and program
  simulation
- exchange: the six-column parameter table round trip
- fixture: the T-junction example module
- cli: the `mfmkit` command
"""
from __future__ import annotations

from .behavior import (
    BehaviorGraph,
    BehaviorGraphError,
    BehaviorParseError,
    ImlDocument,
    SimulationError,
    TraceEvent,
    parse_behavior,
    parse_trace,
    simulate,
    to_iml,
)
from .caex_io import StructureError, from_model, parse, serialize, to_model
from .consistency import (
    DependencyReport,
    OwnershipError,
    Violation,
    check_completeness,
    check_links,
    dependency_report,
    format_violation,
)
from .exchange import ExchangeError, export_table, import_table
from .fixture import tjunction_model
from .mapping import (
    AssignmentViolation,
    MappingRuleTable,
    class_path_of,
    default_table,
    validate_assignments,
)
from .model import ModelError, ModuleModel
from .sfc import BindingError, SfcProgram, emit_plcopen, iml_to_sfc, parse_plcopen, simulate_sfc

__all__ = [
    "AssignmentViolation",
    "BehaviorGraph",
    "BehaviorGraphError",
    "BehaviorParseError",
    "BindingError",
    "DependencyReport",
    "ExchangeError",
    "ImlDocument",
    "MappingRuleTable",
    "ModelError",
    "ModuleModel",
    "OwnershipError",
    "SfcProgram",
    "SimulationError",
    "StructureError",
    "TraceEvent",
    "Violation",
    "check_completeness",
    "check_links",
    "class_path_of",
    "default_table",
    "dependency_report",
    "emit_plcopen",
    "export_table",
    "format_violation",
    "from_model",
    "import_table",
    "iml_to_sfc",
    "parse",
    "parse_behavior",
    "parse_plcopen",
    "parse_trace",
    "serialize",
    "simulate",
    "simulate_sfc",
    "tjunction_model",
    "to_iml",
    "to_model",
    "validate_assignments",
]

__version__ = "0.1.0"
