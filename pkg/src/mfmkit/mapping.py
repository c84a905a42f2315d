"""Permitted role and interface identifiers per meta-model class.

The rule table says which AutomationML role classes and interface classes an
element of a given meta-model class may carry. It ships with three published
entries and is extensible through the documented text format (docs/rules.md);
classes without an entry are not checked.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from . import model as mm
from .paths import split_path

KIND_ILLEGAL_ROLE = "illegal_role"
KIND_ILLEGAL_INTERFACE = "illegal_interface"
KIND_MISSING_ROLE = "missing_role"


@dataclass(frozen=True, slots=True)
class RuleEntry:
    class_path: str
    permitted_interfaces: tuple[str, ...]
    permitted_roles: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class MappingRuleTable:
    entries: tuple[RuleEntry, ...]

    def entry_for(self, class_path: str) -> RuleEntry | None:
        for entry in self.entries:
            if entry.class_path == class_path:
                return entry
        return None


@dataclass(frozen=True, slots=True)
class AssignmentViolation:
    """An identifier outside (or missing from) its class's permitted set."""

    element_path: str
    found_identifier: str
    permitted: tuple[str, ...]
    kind: str  # illegal_role | illegal_interface | missing_role


class RuleTableError(ValueError):
    """Raised for an unreadable rule-table file."""


def load_table(text: str) -> MappingRuleTable:
    """Parse the line format `class_path -> role|iface : identifier`.

    Repeated identical lines collapse; each class must end up with at least
    one role and one interface identifier.
    """
    roles: dict[str, list[str]] = {}
    interfaces: dict[str, list[str]] = {}
    order: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, identifier = line.partition(":")
        identifier = identifier.strip()
        class_path, arrow, kind = head.partition("->")
        class_path, kind = class_path.strip(), kind.strip()
        if not sep or not arrow or not class_path or not identifier:
            raise RuleTableError(f"line {lineno}: expected 'class_path -> role|iface : identifier'")
        if kind not in ("role", "iface"):
            raise RuleTableError(f"line {lineno}: unknown kind {kind!r}")
        if class_path not in order:
            order.append(class_path)
            roles[class_path] = []
            interfaces[class_path] = []
        bucket = roles[class_path] if kind == "role" else interfaces[class_path]
        if identifier not in bucket:
            bucket.append(identifier)
    entries = []
    for class_path in sorted(order):
        if not roles[class_path] or not interfaces[class_path]:
            raise RuleTableError(
                f"class {class_path!r} needs at least one role and one interface identifier")
        entries.append(RuleEntry(
            class_path=class_path,
            permitted_interfaces=tuple(sorted(interfaces[class_path])),
            permitted_roles=tuple(sorted(roles[class_path])),
        ))
    return MappingRuleTable(entries=tuple(entries))


def save_table(table: MappingRuleTable) -> str:
    """Render a table in the load_table format (load(save(t)) == t)."""
    lines = ["# Permitted role and interface identifiers per meta-model class path."]
    for entry in table.entries:
        for identifier in entry.permitted_interfaces:
            lines.append(f"{entry.class_path} -> iface : {identifier}")
        for identifier in entry.permitted_roles:
            lines.append(f"{entry.class_path} -> role : {identifier}")
    return "\n".join(lines) + "\n"


def default_table() -> MappingRuleTable:
    text = resources.files("mfmkit").joinpath("data/rules.txt").read_text("utf-8")
    return load_table(text)


def roles_for(table: MappingRuleTable, class_path: str) -> frozenset[str] | None:
    """Permitted roles, or None when the class is not covered by the table."""
    entry = table.entry_for(class_path)
    return None if entry is None else frozenset(entry.permitted_roles)


def interfaces_for(table: MappingRuleTable, class_path: str) -> frozenset[str] | None:
    """Permitted interfaces, or None when the class is not covered."""
    entry = table.entry_for(class_path)
    return None if entry is None else frozenset(entry.permitted_interfaces)


# ---------------------------------------------------------------------------
# Classifying model paths
# ---------------------------------------------------------------------------

_ENTRY_CLASSES = {
    ("status", "runtime_variables"): "Status.RuntimeVariable",
    ("function", "logistic_functions"): "Function.LogisticFunction",
    ("function", "routes"): "Function.Route",
    ("interface", "ports"): "Interface.Port",
    ("interface", "interaction_spaces"): "Interface.InteractionSpace",
    ("control", "control_functions"): "Control.ControlFunction",
    ("control", "variables"): "Control.Variable",
    ("control", "io_mapping"): "Control.IoMapEntry",
}

_CONTAINER_CLASSES = {
    "general": "General",
    "status": "Status",
    "function": "Function",
    "interface": "Interface",
    "control": "Control",
}


def class_path_of(model: mm.ModuleModel, element_path: str) -> str | None:
    """Meta-model class selector of the element at `element_path`."""
    segments = split_path(element_path)
    id_segments = split_path(model.id)
    if segments[: len(id_segments)] != id_segments:
        return None
    rest = segments[len(id_segments):]
    if not rest:
        return "Module"
    if len(rest) == 1:
        return _CONTAINER_CLASSES.get(rest[0])
    if rest == ("general", "identification"):
        return "General.Identification"
    if rest == ("control", "platform"):
        return "Control.Platform"
    if len(rest) == 2 and rest[0] == "components":
        return "Component"
    if len(rest) == 2 and rest[0] == "documents":
        return "Document"
    if len(rest) == 3:
        return _ENTRY_CLASSES.get((rest[0], rest[1]))
    return None


def _is_populated(node: object, ann: mm.Annotation) -> bool:
    if ann.roles or ann.external_refs:
        return True
    params = mm._node_params(node)
    if any(value for _name, value, _unit in params):
        return True
    # list entries are populated by existence; singleton containers are not
    singleton = (
        mm.ModuleModel, mm.GeneralDescription, mm.Identification,
        mm.StatusDescription, mm.FunctionDescription, mm.InterfaceDescription,
        mm.ControlDescription, mm.Platform,
    )
    return not isinstance(node, singleton)


def validate_assignments(model: mm.ModuleModel, table: MappingRuleTable | None = None) -> list[AssignmentViolation]:
    """Strict breaches of the rule table.

    One violation per role/interface identifier outside its class's permitted
    set, plus missing_role for populated elements of covered classes that
    carry no role at all. Elements of classes without a table entry are
    skipped (see uncovered_classes for reporting them).
    """
    if table is None:
        table = default_table()
    out: list[AssignmentViolation] = []
    for path, node in mm.iter_elements(model):
        class_path = class_path_of(model, path)
        entry = table.entry_for(class_path) if class_path else None
        if entry is None:
            continue
        ann = mm.annotation_at(model, path)
        for role in ann.roles:
            if role not in entry.permitted_roles:
                out.append(AssignmentViolation(path, role, entry.permitted_roles, KIND_ILLEGAL_ROLE))
        for ref in ann.external_refs:
            if ref.interface_class not in entry.permitted_interfaces:
                out.append(AssignmentViolation(
                    path, ref.interface_class, entry.permitted_interfaces, KIND_ILLEGAL_INTERFACE))
        if not ann.roles and _is_populated(node, ann):
            out.append(AssignmentViolation(path, "", entry.permitted_roles, KIND_MISSING_ROLE))
    return out


def uncovered_classes(model: mm.ModuleModel, table: MappingRuleTable | None = None) -> list[str]:
    """Class selectors that carry annotations but have no table entry (sorted)."""
    if table is None:
        table = default_table()
    found: set[str] = set()
    for path, _ann in model.annotations:
        class_path = class_path_of(model, path)
        if class_path and table.entry_for(class_path) is None:
            found.add(class_path)
    return sorted(found)
