"""Module meta model for automated material flow modules.

A module description is split into five sub-classes (general, status,
function, interface, control) plus components, documents, and
cross-references. Models are immutable value snapshots: every operation
returns a new model and never mutates its input, so snapshots can be shared
freely across threads.

All scalar values are stored as verbatim strings ("0.1", "(50,150,800)");
units are implied by the field (mm for geometry, seconds for latency). An
empty string means "not populated yet". Values must not contain carriage
returns (XML processing normalizes them away, so they could not round-trip).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .paths import PathError, join_path, split_path

COMPONENT_KINDS = ("sensor", "actuator", "conveyor", "switch")
FUNCTION_CATEGORIES = ("material_flow", "handling", "waiting")
PORT_DIRECTIONS = ("in", "out")
IO_DIRECTIONS = ("input", "output")

#: Engineering stages in workflow order.
STAGES = (
    "process_planning",
    "logistics_planning",
    "electrical_planning",
    "mechanical_eng",
    "electrical_eng",
    "control_hmi_eng",
)

#: Engineering disciplines.
DISCIPLINES = ("mechanical", "electrical", "software", "logistics", "process")

#: Role pre-assigned to every module root so serialized files can identify it.
BASE_ROLE = "AutomationMLBaseRoleClassLib"


class ModelError(ValueError):
    """Raised when a construction-time invariant would be broken."""


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Parameter:
    """A named engineering-time value with an optional unit."""

    name: str
    value: str = ""
    unit: str = ""


@dataclass(frozen=True, slots=True)
class Identification:
    name: str = ""
    identifier: str = ""
    module_type: str = ""


@dataclass(frozen=True, slots=True)
class GeneralDescription:
    """Static, engineering-time information about the module."""

    identification: Identification = field(default_factory=Identification)
    main_dimensions: str = ""  # "(length,width,height)" in mm
    static_attributes: tuple[Parameter, ...] = ()


@dataclass(frozen=True, slots=True)
class RuntimeVariable:
    """Declaration of a runtime value (no engineering-time valuation)."""

    name: str
    data_type: str = ""
    unit: str = ""
    description: str = ""


@dataclass(frozen=True, slots=True)
class StatusDescription:
    runtime_variables: tuple[RuntimeVariable, ...] = ()


@dataclass(frozen=True, slots=True)
class LogisticFunction:
    name: str
    category: str = "material_flow"
    behavior_ref: str = ""  # document id of a behavior description


@dataclass(frozen=True, slots=True)
class Route:
    from_port: str
    to_port: str
    priority: int = 0


@dataclass(frozen=True, slots=True)
class FunctionDescription:
    logistic_functions: tuple[LogisticFunction, ...] = ()
    routes: tuple[Route, ...] = ()


@dataclass(frozen=True, slots=True)
class Port:
    name: str
    direction: str = "in"
    position: str = ""  # "(x,y,z)" in mm


@dataclass(frozen=True, slots=True)
class InteractionSpace:
    name: str
    min_corner: str = ""
    max_corner: str = ""


@dataclass(frozen=True, slots=True)
class InterfaceDescription:
    ports: tuple[Port, ...] = ()
    interaction_spaces: tuple[InteractionSpace, ...] = ()


@dataclass(frozen=True, slots=True)
class ControlFunction:
    name: str
    language_tag: str = ""  # IEC 61131-3 language name, free string
    body_ref: str = ""  # document id of the code body


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    data_type: str = ""
    scope: str = ""


@dataclass(frozen=True, slots=True)
class IoMapEntry:
    """Mapping of one electrical signal to a control variable."""

    component_path: str
    logical_address: str = ""
    variable_name: str = ""
    data_type: str = ""
    direction: str = "input"


@dataclass(frozen=True, slots=True)
class Platform:
    controller_type: str = ""
    bus_coupler_type: str = ""


@dataclass(frozen=True, slots=True)
class ControlDescription:
    control_functions: tuple[ControlFunction, ...] = ()
    variables: tuple[Variable, ...] = ()
    io_mapping: tuple[IoMapEntry, ...] = ()
    platform: Platform = field(default_factory=Platform)


@dataclass(frozen=True, slots=True)
class Component:
    name: str
    kind: str = "sensor"
    component_type: str = ""
    position: str = ""
    main_dimensions: str = ""
    latency: str = ""  # seconds


@dataclass(frozen=True, slots=True)
class DocumentReference:
    id: str
    discipline: str = "logistics"
    stage: str = "logistics_planning"
    name: str = ""
    server_path: str = ""  # stored verbatim, never validated as a filesystem path
    assigned_element: str = ""


@dataclass(frozen=True, slots=True)
class CrossReference:
    source: str
    target: str
    kind: str = ""


@dataclass(frozen=True, slots=True)
class ExternalRef:
    """Reference to an external document via an interface class."""

    name: str
    interface_class: str
    ref_uri: str = ""


@dataclass(frozen=True, slots=True)
class Annotation:
    """Role and interface identifiers attached to one element."""

    roles: tuple[str, ...] = ()
    external_refs: tuple[ExternalRef, ...] = ()


@dataclass(frozen=True, slots=True)
class ModuleModel:
    """Root aggregate for one module."""

    id: str
    name: str = ""
    general: GeneralDescription = field(default_factory=GeneralDescription)
    status: StatusDescription = field(default_factory=StatusDescription)
    function: FunctionDescription = field(default_factory=FunctionDescription)
    interface: InterfaceDescription = field(default_factory=InterfaceDescription)
    control: ControlDescription = field(default_factory=ControlDescription)
    components: tuple[Component, ...] = ()
    documents: tuple[DocumentReference, ...] = ()
    cross_refs: tuple[CrossReference, ...] = ()
    #: (element path, Annotation) pairs, kept sorted by path.
    annotations: tuple[tuple[str, Annotation], ...] = ()


_ELEMENT_TYPES = (
    ModuleModel,
    GeneralDescription,
    Identification,
    StatusDescription,
    RuntimeVariable,
    FunctionDescription,
    LogisticFunction,
    Route,
    InterfaceDescription,
    Port,
    InteractionSpace,
    ControlDescription,
    ControlFunction,
    Variable,
    IoMapEntry,
    Platform,
    Component,
    DocumentReference,
)


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def _require_clean(value: str, what: str) -> None:
    if "\r" in value:
        raise ModelError(f"{what} must not contain carriage returns")


def _require_name(name: str, what: str) -> None:
    from .paths import is_name

    if not name or not is_name(name):
        raise ModelError(f"invalid {what} name {name!r}")


def _require_enum(value: str, allowed: tuple[str, ...], what: str) -> None:
    if value not in allowed:
        raise ModelError(f"invalid {what} {value!r}; expected one of {', '.join(allowed)}")


def parse_triple(text: str) -> tuple[float, float, float]:
    """Parse a "(x,y,z)" string into three floats."""
    stripped = text.strip()
    if not (stripped.startswith("(") and stripped.endswith(")")):
        raise ModelError(f"not a triple: {text!r}")
    parts = stripped[1:-1].split(",")
    if len(parts) != 3:
        raise ModelError(f"not a triple: {text!r}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError:
        raise ModelError(f"not a triple: {text!r}") from None
    return (x, y, z)


def _require_triple(value: str, what: str, positive: bool = False) -> None:
    if value == "":
        return
    triple = parse_triple(value)
    if positive and not all(v > 0 for v in triple):
        raise ModelError(f"{what} must be strictly positive, got {value!r}")


def _require_seconds(value: str, what: str) -> None:
    if value == "":
        return
    try:
        seconds = float(value)
    except ValueError:
        raise ModelError(f"{what} is not a number: {value!r}") from None
    if seconds < 0:
        raise ModelError(f"{what} must be non-negative, got {value!r}")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def new_module(id: str, name: str, existing_ids: tuple[str, ...] = ()) -> ModuleModel:
    """Create an empty module with the five sub-class containers.

    `existing_ids` lists module ids already taken in the surrounding project;
    reusing one is a construction error. The module root is pre-annotated with
    the base role class so serialized files can identify it.
    """
    if not id:
        raise ModelError("module id must be non-empty")
    split_path(id)  # validates segment grammar
    if id in existing_ids:
        raise ModelError(f"duplicate module id {id!r}")
    _require_clean(name, "module name")
    return ModuleModel(id=id, name=name, annotations=((id, Annotation(roles=(BASE_ROLE,))),))


def set_identification(
    model: ModuleModel,
    name: str | None = None,
    identifier: str | None = None,
    module_type: str | None = None,
) -> ModuleModel:
    ident = model.general.identification
    ident = Identification(
        name=ident.name if name is None else name,
        identifier=ident.identifier if identifier is None else identifier,
        module_type=ident.module_type if module_type is None else module_type,
    )
    for value in (ident.name, ident.identifier, ident.module_type):
        _require_clean(value, "identification")
    return replace(model, general=replace(model.general, identification=ident))


def set_main_dimensions(model: ModuleModel, dims: str) -> ModuleModel:
    _require_triple(dims, "main_dimensions", positive=True)
    return replace(model, general=replace(model.general, main_dimensions=dims))


def add_static_attribute(model: ModuleModel, name: str, value: str, unit: str = "") -> ModuleModel:
    _require_name(name, "attribute")
    _require_clean(value, "attribute value")
    if name == "main_dimensions":
        raise ModelError("'main_dimensions' is a built-in parameter, not an attribute")
    if any(p.name == name for p in model.general.static_attributes):
        raise ModelError(f"duplicate static attribute {name!r}")
    attrs = model.general.static_attributes + (Parameter(name, value, unit),)
    return replace(model, general=replace(model.general, static_attributes=attrs))


def add_runtime_variable(
    model: ModuleModel, name: str, data_type: str = "", unit: str = "", description: str = ""
) -> ModuleModel:
    _require_name(name, "runtime variable")
    if any(v.name == name for v in model.status.runtime_variables):
        raise ModelError(f"duplicate runtime variable {name!r}")
    _require_clean(description, "runtime variable description")
    variables = model.status.runtime_variables + (RuntimeVariable(name, data_type, unit, description),)
    return replace(model, status=StatusDescription(runtime_variables=variables))


def add_logistic_function(
    model: ModuleModel, name: str, category: str, behavior_ref: str = ""
) -> ModuleModel:
    _require_name(name, "logistic function")
    _require_enum(category, FUNCTION_CATEGORIES, "function category")
    if any(f.name == name for f in model.function.logistic_functions):
        raise ModelError(f"duplicate logistic function {name!r}")
    functions = model.function.logistic_functions + (LogisticFunction(name, category, behavior_ref),)
    return replace(model, function=replace(model.function, logistic_functions=functions))


def add_route(model: ModuleModel, from_port: str, to_port: str, priority: int = 0) -> ModuleModel:
    routes = model.function.routes + (Route(from_port, to_port, int(priority)),)
    return replace(model, function=replace(model.function, routes=routes))


def add_port(model: ModuleModel, name: str, direction: str, position: str = "") -> ModuleModel:
    _require_name(name, "port")
    _require_enum(direction, PORT_DIRECTIONS, "port direction")
    _require_triple(position, "port position")
    if any(p.name == name for p in model.interface.ports):
        raise ModelError(f"duplicate port {name!r}")
    ports = model.interface.ports + (Port(name, direction, position),)
    return replace(model, interface=replace(model.interface, ports=ports))


def add_interaction_space(
    model: ModuleModel, name: str, min_corner: str, max_corner: str
) -> ModuleModel:
    _require_name(name, "interaction space")
    _require_triple(min_corner, "interaction space corner")
    _require_triple(max_corner, "interaction space corner")
    if min_corner and max_corner:
        low, high = parse_triple(min_corner), parse_triple(max_corner)
        if any(a > b for a, b in zip(low, high)):
            raise ModelError(f"interaction space {name!r} has min > max")
    if any(s.name == name for s in model.interface.interaction_spaces):
        raise ModelError(f"duplicate interaction space {name!r}")
    spaces = model.interface.interaction_spaces + (InteractionSpace(name, min_corner, max_corner),)
    return replace(model, interface=replace(model.interface, interaction_spaces=spaces))


def add_control_function(
    model: ModuleModel, name: str, language_tag: str = "", body_ref: str = ""
) -> ModuleModel:
    _require_name(name, "control function")
    if any(f.name == name for f in model.control.control_functions):
        raise ModelError(f"duplicate control function {name!r}")
    functions = model.control.control_functions + (ControlFunction(name, language_tag, body_ref),)
    return replace(model, control=replace(model.control, control_functions=functions))


def add_variable(model: ModuleModel, name: str, data_type: str = "", scope: str = "") -> ModuleModel:
    _require_name(name, "variable")
    if any(v.name == name for v in model.control.variables):
        raise ModelError(f"duplicate variable {name!r}")
    variables = model.control.variables + (Variable(name, data_type, scope),)
    return replace(model, control=replace(model.control, variables=variables))


def add_io_entry(
    model: ModuleModel,
    component_path: str,
    logical_address: str = "",
    variable_name: str = "",
    data_type: str = "",
    direction: str = "input",
) -> ModuleModel:
    _require_enum(direction, IO_DIRECTIONS, "io direction")
    split_path(component_path)
    entry = IoMapEntry(component_path, logical_address, variable_name, data_type, direction)
    return replace(model, control=replace(model.control, io_mapping=model.control.io_mapping + (entry,)))


def set_platform(model: ModuleModel, controller_type: str, bus_coupler_type: str) -> ModuleModel:
    _require_clean(controller_type, "controller type")
    _require_clean(bus_coupler_type, "bus coupler type")
    platform = Platform(controller_type, bus_coupler_type)
    return replace(model, control=replace(model.control, platform=platform))


def add_component(model: ModuleModel, component: Component) -> ModuleModel:
    _require_name(component.name, "component")
    _require_enum(component.kind, COMPONENT_KINDS, "component kind")
    _require_triple(component.position, "component position")
    _require_triple(component.main_dimensions, "component main_dimensions")
    _require_seconds(component.latency, "component latency")
    _require_clean(component.component_type, "component type")
    if any(c.name == component.name for c in model.components):
        raise ModelError(f"duplicate component {component.name!r}")
    return replace(model, components=model.components + (component,))


def add_document(model: ModuleModel, doc: DocumentReference) -> ModuleModel:
    _require_name(doc.id, "document id")
    _require_enum(doc.discipline, DISCIPLINES, "document discipline")
    _require_enum(doc.stage, STAGES, "document stage")
    for value in (doc.name, doc.server_path):
        _require_clean(value, "document field")
    if doc.assigned_element:
        split_path(doc.assigned_element)
    if any(d.id == doc.id for d in model.documents):
        raise ModelError(f"duplicate document id {doc.id!r}")
    return replace(model, documents=model.documents + (doc,))


def replace_document(model: ModuleModel, doc: DocumentReference) -> ModuleModel:
    """Swap an existing document reference (matched by id) for `doc`."""
    if not any(d.id == doc.id for d in model.documents):
        raise ModelError(f"unknown document id {doc.id!r}")
    documents = tuple(doc if d.id == doc.id else d for d in model.documents)
    return replace(model, documents=documents)


def add_cross_ref(model: ModuleModel, source: str, target: str, kind: str) -> ModuleModel:
    """Record a reference between two element paths.

    Dangling endpoints are permitted here; the consistency checks flag them.
    Inserting the same (source, target, kind) triple twice is a no-op.
    """
    split_path(source)
    split_path(target)
    if source == target:
        raise ModelError(f"cross reference source equals target: {source!r}")
    _require_clean(kind, "cross reference kind")
    ref = CrossReference(source, target, kind)
    if ref in model.cross_refs:
        return model
    return replace(model, cross_refs=model.cross_refs + (ref,))


# ---------------------------------------------------------------------------
# Annotations
# ---------------------------------------------------------------------------

def annotation_at(model: ModuleModel, path: str) -> Annotation:
    for key, ann in model.annotations:
        if key == path:
            return ann
    return Annotation()


def _set_annotation(model: ModuleModel, path: str, ann: Annotation) -> ModuleModel:
    items = {k: a for k, a in model.annotations}
    if ann.roles or ann.external_refs:
        items[path] = ann
    else:
        items.pop(path, None)
    return replace(model, annotations=tuple(sorted(items.items())))


def _require_element(model: ModuleModel, path: str) -> None:
    node = resolve(model, path)
    if node is None:
        raise ModelError(f"path does not resolve: {path!r}")
    if not isinstance(node, _ELEMENT_TYPES):
        raise ModelError(f"path does not address an element: {path!r}")


def with_roles(model: ModuleModel, path: str, *roles: str) -> ModuleModel:
    """Attach role identifiers to the element at `path` (idempotent)."""
    _require_element(model, path)
    ann = annotation_at(model, path)
    merged = list(ann.roles)
    for role in roles:
        _require_name(role, "role identifier")
        if role not in merged:
            merged.append(role)
    return _set_annotation(model, path, replace(ann, roles=tuple(merged)))


def with_external_ref(model: ModuleModel, path: str, ref: ExternalRef) -> ModuleModel:
    """Attach an external document reference to the element at `path`."""
    _require_element(model, path)
    _require_name(ref.name, "external reference")
    _require_name(ref.interface_class, "interface class")
    _require_clean(ref.ref_uri, "refURI")
    ann = annotation_at(model, path)
    if any(r.name == ref.name for r in ann.external_refs):
        raise ModelError(f"duplicate external reference {ref.name!r} at {path!r}")
    return _set_annotation(model, path, replace(ann, external_refs=ann.external_refs + (ref,)))


# ---------------------------------------------------------------------------
# Parameter surfaces
# ---------------------------------------------------------------------------

def _node_params(node: object) -> tuple[tuple[str, str, str], ...]:
    """(name, value, unit) rows for one element, in canonical order."""
    if isinstance(node, Identification):
        return (
            ("name", node.name, ""),
            ("identifier", node.identifier, ""),
            ("module_type", node.module_type, ""),
        )
    if isinstance(node, GeneralDescription):
        rows = [("main_dimensions", node.main_dimensions, "mm")]
        rows.extend((p.name, p.value, p.unit) for p in node.static_attributes)
        return tuple(rows)
    if isinstance(node, RuntimeVariable):
        return (
            ("data_type", node.data_type, ""),
            ("unit", node.unit, ""),
            ("description", node.description, ""),
        )
    if isinstance(node, LogisticFunction):
        return (("category", node.category, ""), ("behavior_ref", node.behavior_ref, ""))
    if isinstance(node, Route):
        return (
            ("from_port", node.from_port, ""),
            ("to_port", node.to_port, ""),
            ("priority", str(node.priority), ""),
        )
    if isinstance(node, Port):
        return (("direction", node.direction, ""), ("position", node.position, "mm"))
    if isinstance(node, InteractionSpace):
        return (("min_corner", node.min_corner, "mm"), ("max_corner", node.max_corner, "mm"))
    if isinstance(node, ControlFunction):
        return (("language_tag", node.language_tag, ""), ("body_ref", node.body_ref, ""))
    if isinstance(node, Variable):
        return (("data_type", node.data_type, ""), ("scope", node.scope, ""))
    if isinstance(node, IoMapEntry):
        return (
            ("component_path", node.component_path, ""),
            ("logical_address", node.logical_address, ""),
            ("variable_name", node.variable_name, ""),
            ("data_type", node.data_type, ""),
            ("direction", node.direction, ""),
        )
    if isinstance(node, Platform):
        return (
            ("controller_type", node.controller_type, ""),
            ("bus_coupler_type", node.bus_coupler_type, ""),
        )
    if isinstance(node, Component):
        return (
            ("kind", node.kind, ""),
            ("component_type", node.component_type, ""),
            ("position", node.position, "mm"),
            ("main_dimensions", node.main_dimensions, "mm"),
            ("latency", node.latency, "s"),
        )
    return ()


def iter_elements(model: ModuleModel):
    """Yield (path, node) for the root, containers, and every entry."""
    mid = model.id
    yield mid, model
    general = model.general
    yield join_path(mid, "general"), general
    yield join_path(mid, "general", "identification"), general.identification
    yield join_path(mid, "status"), model.status
    for variable in model.status.runtime_variables:
        yield join_path(mid, "status", "runtime_variables", variable.name), variable
    yield join_path(mid, "function"), model.function
    for function in model.function.logistic_functions:
        yield join_path(mid, "function", "logistic_functions", function.name), function
    for i, route in enumerate(model.function.routes):
        yield join_path(mid, "function", "routes", str(i)), route
    yield join_path(mid, "interface"), model.interface
    for port in model.interface.ports:
        yield join_path(mid, "interface", "ports", port.name), port
    for space in model.interface.interaction_spaces:
        yield join_path(mid, "interface", "interaction_spaces", space.name), space
    yield join_path(mid, "control"), model.control
    for function in model.control.control_functions:
        yield join_path(mid, "control", "control_functions", function.name), function
    for variable in model.control.variables:
        yield join_path(mid, "control", "variables", variable.name), variable
    for i, entry in enumerate(model.control.io_mapping):
        yield join_path(mid, "control", "io_mapping", str(i)), entry
    yield join_path(mid, "control", "platform"), model.control.platform
    for component in model.components:
        yield join_path(mid, "components", component.name), component
    for doc in model.documents:
        yield join_path(mid, "documents", doc.id), doc


def iter_parameters(model: ModuleModel):
    """Yield (element_path, name, value, unit) for every scalar parameter."""
    for path, node in iter_elements(model):
        if isinstance(node, (ModuleModel, DocumentReference)):
            continue
        for name, value, unit in _node_params(node):
            yield path, name, value, unit


def elements_of_class(model: ModuleModel, cls: str) -> list[str]:
    """Element paths belonging to one of the five sub-class trees.

    Returns the entry-level elements in document order; the container itself
    and intermediate list containers are not included.
    """
    _require_enum(cls, ("general", "status", "function", "interface", "control"), "sub-class")
    mid = model.id
    paths: list[str] = []
    if cls == "general":
        paths.append(join_path(mid, "general", "identification"))
    elif cls == "status":
        for variable in model.status.runtime_variables:
            paths.append(join_path(mid, "status", "runtime_variables", variable.name))
    elif cls == "function":
        for function in model.function.logistic_functions:
            paths.append(join_path(mid, "function", "logistic_functions", function.name))
        for i in range(len(model.function.routes)):
            paths.append(join_path(mid, "function", "routes", str(i)))
    elif cls == "interface":
        for port in model.interface.ports:
            paths.append(join_path(mid, "interface", "ports", port.name))
        for space in model.interface.interaction_spaces:
            paths.append(join_path(mid, "interface", "interaction_spaces", space.name))
    else:
        for function in model.control.control_functions:
            paths.append(join_path(mid, "control", "control_functions", function.name))
        for variable in model.control.variables:
            paths.append(join_path(mid, "control", "variables", variable.name))
        for i in range(len(model.control.io_mapping)):
            paths.append(join_path(mid, "control", "io_mapping", str(i)))
        paths.append(join_path(mid, "control", "platform"))
    return paths


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

def _param_value(node: object, name: str) -> str | None:
    for param_name, value, _unit in _node_params(node):
        if param_name == name:
            return value
    return None


def _lookup(items, name: str):
    for item in items:
        if item.name == name:
            return item
    return None


def _indexed(items, segment: str):
    if not segment.isdigit():
        return None
    index = int(segment)
    return items[index] if index < len(items) else None


def resolve(model: ModuleModel, path: str):
    """Return the element or parameter value at `path`, or None if absent.

    Not-found is a value; only a syntactically malformed path raises
    PathError. A parameter path is an element path plus the parameter name.
    """
    segments = split_path(path)
    id_segments = split_path(model.id)
    if segments[: len(id_segments)] != id_segments:
        return None
    rest = segments[len(id_segments):]
    if not rest:
        return model
    head, rest = rest[0], rest[1:]

    if head == "general":
        if not rest:
            return model.general
        if rest[0] == "identification":
            if len(rest) == 1:
                return model.general.identification
            if len(rest) == 2:
                return _param_value(model.general.identification, rest[1])
            return None
        if len(rest) == 1:
            return _param_value(model.general, rest[0])
        return None

    if head == "status":
        if not rest:
            return model.status
        if rest[0] == "runtime_variables" and len(rest) >= 2:
            variable = _lookup(model.status.runtime_variables, rest[1])
            if variable is None or len(rest) == 2:
                return variable
            if len(rest) == 3:
                return _param_value(variable, rest[2])
        return None

    if head == "function":
        if not rest:
            return model.function
        if rest[0] == "logistic_functions" and len(rest) >= 2:
            function = _lookup(model.function.logistic_functions, rest[1])
            if function is None or len(rest) == 2:
                return function
            if len(rest) == 3:
                return _param_value(function, rest[2])
            return None
        if rest[0] == "routes" and len(rest) >= 2:
            route = _indexed(model.function.routes, rest[1])
            if route is None or len(rest) == 2:
                return route
            if len(rest) == 3:
                return _param_value(route, rest[2])
        return None

    if head == "interface":
        if not rest:
            return model.interface
        if rest[0] == "ports" and len(rest) >= 2:
            port = _lookup(model.interface.ports, rest[1])
            if port is None or len(rest) == 2:
                return port
            if len(rest) == 3:
                return _param_value(port, rest[2])
            return None
        if rest[0] == "interaction_spaces" and len(rest) >= 2:
            space = _lookup(model.interface.interaction_spaces, rest[1])
            if space is None or len(rest) == 2:
                return space
            if len(rest) == 3:
                return _param_value(space, rest[2])
        return None

    if head == "control":
        if not rest:
            return model.control
        if rest[0] == "control_functions" and len(rest) >= 2:
            function = _lookup(model.control.control_functions, rest[1])
            if function is None or len(rest) == 2:
                return function
            if len(rest) == 3:
                return _param_value(function, rest[2])
            return None
        if rest[0] == "variables" and len(rest) >= 2:
            variable = _lookup(model.control.variables, rest[1])
            if variable is None or len(rest) == 2:
                return variable
            if len(rest) == 3:
                return _param_value(variable, rest[2])
            return None
        if rest[0] == "io_mapping" and len(rest) >= 2:
            entry = _indexed(model.control.io_mapping, rest[1])
            if entry is None or len(rest) == 2:
                return entry
            if len(rest) == 3:
                return _param_value(entry, rest[2])
            return None
        if rest[0] == "platform":
            if len(rest) == 1:
                return model.control.platform
            if len(rest) == 2:
                return _param_value(model.control.platform, rest[1])
        return None

    if head == "components":
        if not rest:
            return model.components
        component = _lookup(model.components, rest[0])
        if component is None or len(rest) == 1:
            return component
        if len(rest) == 2:
            return _param_value(component, rest[1])
        return None

    if head == "documents":
        if not rest:
            return model.documents
        if len(rest) == 1:
            for doc in model.documents:
                if doc.id == rest[0]:
                    return doc
        return None

    if head == "cross_refs":
        if not rest:
            return model.cross_refs
        if len(rest) == 1:
            return _indexed(model.cross_refs, rest[0])
        return None

    return None


# ---------------------------------------------------------------------------
# Generic parameter writes (used by the table exchange)
# ---------------------------------------------------------------------------

def set_parameter(model: ModuleModel, element_path: str, name: str, value: str) -> ModuleModel:
    """Write one scalar parameter addressed by element path + name.

    Unknown element paths raise ModelError; on the general element an unknown
    parameter name creates a new static attribute (the table workflow may
    request attributes that do not exist yet).
    """
    _require_clean(value, "parameter value")
    node = resolve(model, element_path)
    if node is None:
        raise ModelError(f"unknown element path {element_path!r}")
    segments = split_path(element_path)
    rest = segments[len(split_path(model.id)):]

    if isinstance(node, Identification):
        if name not in ("name", "identifier", "module_type"):
            raise ModelError(f"unknown identification parameter {name!r}")
        return set_identification(model, **{name: value})

    if isinstance(node, GeneralDescription):
        if name == "main_dimensions":
            return set_main_dimensions(model, value)
        attrs = node.static_attributes
        for i, param in enumerate(attrs):
            if param.name == name:
                updated = attrs[:i] + (replace(param, value=value),) + attrs[i + 1:]
                return replace(model, general=replace(node, static_attributes=updated))
        return add_static_attribute(model, name, value)

    if isinstance(node, RuntimeVariable):
        if name not in ("data_type", "unit", "description"):
            raise ModelError(f"unknown runtime variable parameter {name!r}")
        variables = tuple(
            replace(v, **{name: value}) if v.name == node.name else v
            for v in model.status.runtime_variables
        )
        return replace(model, status=StatusDescription(runtime_variables=variables))

    if isinstance(node, LogisticFunction):
        if name == "category":
            _require_enum(value, FUNCTION_CATEGORIES, "function category")
        elif name != "behavior_ref":
            raise ModelError(f"unknown logistic function parameter {name!r}")
        functions = tuple(
            replace(f, **{name: value}) if f.name == node.name else f
            for f in model.function.logistic_functions
        )
        return replace(model, function=replace(model.function, logistic_functions=functions))

    if isinstance(node, Route):
        index = int(rest[2])
        if name == "priority":
            try:
                field_value: object = int(value)
            except ValueError:
                raise ModelError(f"route priority is not an integer: {value!r}") from None
        elif name in ("from_port", "to_port"):
            field_value = value
        else:
            raise ModelError(f"unknown route parameter {name!r}")
        routes = list(model.function.routes)
        routes[index] = replace(routes[index], **{name: field_value})
        return replace(model, function=replace(model.function, routes=tuple(routes)))

    if isinstance(node, Port):
        if name == "direction":
            _require_enum(value, PORT_DIRECTIONS, "port direction")
        elif name == "position":
            _require_triple(value, "port position")
        else:
            raise ModelError(f"unknown port parameter {name!r}")
        ports = tuple(
            replace(p, **{name: value}) if p.name == node.name else p
            for p in model.interface.ports
        )
        return replace(model, interface=replace(model.interface, ports=ports))

    if isinstance(node, InteractionSpace):
        if name not in ("min_corner", "max_corner"):
            raise ModelError(f"unknown interaction space parameter {name!r}")
        _require_triple(value, "interaction space corner")
        spaces = tuple(
            replace(s, **{name: value}) if s.name == node.name else s
            for s in model.interface.interaction_spaces
        )
        return replace(model, interface=replace(model.interface, interaction_spaces=spaces))

    if isinstance(node, ControlFunction):
        if name not in ("language_tag", "body_ref"):
            raise ModelError(f"unknown control function parameter {name!r}")
        functions = tuple(
            replace(f, **{name: value}) if f.name == node.name else f
            for f in model.control.control_functions
        )
        return replace(model, control=replace(model.control, control_functions=functions))

    if isinstance(node, Variable):
        if name not in ("data_type", "scope"):
            raise ModelError(f"unknown variable parameter {name!r}")
        variables = tuple(
            replace(v, **{name: value}) if v.name == node.name else v
            for v in model.control.variables
        )
        return replace(model, control=replace(model.control, variables=variables))

    if isinstance(node, IoMapEntry):
        if name == "direction":
            _require_enum(value, IO_DIRECTIONS, "io direction")
        elif name == "component_path":
            split_path(value)
        elif name not in ("logical_address", "variable_name", "data_type"):
            raise ModelError(f"unknown io mapping parameter {name!r}")
        index = int(rest[2])
        entries = list(model.control.io_mapping)
        entries[index] = replace(entries[index], **{name: value})
        return replace(model, control=replace(model.control, io_mapping=tuple(entries)))

    if isinstance(node, Platform):
        if name not in ("controller_type", "bus_coupler_type"):
            raise ModelError(f"unknown platform parameter {name!r}")
        platform = replace(node, **{name: value})
        return replace(model, control=replace(model.control, platform=platform))

    if isinstance(node, Component):
        if name == "kind":
            _require_enum(value, COMPONENT_KINDS, "component kind")
        elif name in ("position", "main_dimensions"):
            _require_triple(value, f"component {name}")
        elif name == "latency":
            _require_seconds(value, "component latency")
        elif name != "component_type":
            raise ModelError(f"unknown component parameter {name!r}")
        components = tuple(
            replace(c, **{name: value}) if c.name == node.name else c
            for c in model.components
        )
        return replace(model, components=components)

    raise ModelError(f"element {element_path!r} has no writable parameters")


# ---------------------------------------------------------------------------
# Removal (tamper and what-if analysis)
# ---------------------------------------------------------------------------

def remove_element(model: ModuleModel, path: str) -> ModuleModel:
    """Remove one removable element (list entries only, not containers).

    References pointing at the removed element are kept and become dangling;
    annotations at or below the removed path are dropped. Removing an entry
    of an index-addressed list (io_mapping, routes, cross_refs) shifts the
    indexes of later entries; paths held elsewhere are the caller's concern.
    """
    node = resolve(model, path)
    if node is None:
        raise ModelError(f"unknown element path {path!r}")
    segments = split_path(path)
    rest = segments[len(split_path(model.id)):]
    updated: ModuleModel | None = None

    if len(rest) == 2 and rest[0] == "components":
        updated = replace(model, components=tuple(c for c in model.components if c.name != rest[1]))
    elif len(rest) == 2 and rest[0] == "documents":
        updated = replace(model, documents=tuple(d for d in model.documents if d.id != rest[1]))
    elif len(rest) == 2 and rest[0] == "cross_refs":
        refs = list(model.cross_refs)
        del refs[int(rest[1])]
        updated = replace(model, cross_refs=tuple(refs))
    elif len(rest) == 3 and rest[:1] == ("status",) and rest[1] == "runtime_variables":
        variables = tuple(v for v in model.status.runtime_variables if v.name != rest[2])
        updated = replace(model, status=StatusDescription(runtime_variables=variables))
    elif len(rest) == 3 and rest[0] == "function" and rest[1] == "logistic_functions":
        functions = tuple(f for f in model.function.logistic_functions if f.name != rest[2])
        updated = replace(model, function=replace(model.function, logistic_functions=functions))
    elif len(rest) == 3 and rest[0] == "function" and rest[1] == "routes":
        routes = list(model.function.routes)
        del routes[int(rest[2])]
        updated = replace(model, function=replace(model.function, routes=tuple(routes)))
    elif len(rest) == 3 and rest[0] == "interface" and rest[1] == "ports":
        ports = tuple(p for p in model.interface.ports if p.name != rest[2])
        updated = replace(model, interface=replace(model.interface, ports=ports))
    elif len(rest) == 3 and rest[0] == "interface" and rest[1] == "interaction_spaces":
        spaces = tuple(s for s in model.interface.interaction_spaces if s.name != rest[2])
        updated = replace(model, interface=replace(model.interface, interaction_spaces=spaces))
    elif len(rest) == 3 and rest[0] == "control" and rest[1] == "control_functions":
        functions = tuple(f for f in model.control.control_functions if f.name != rest[2])
        updated = replace(model, control=replace(model.control, control_functions=functions))
    elif len(rest) == 3 and rest[0] == "control" and rest[1] == "variables":
        variables = tuple(v for v in model.control.variables if v.name != rest[2])
        updated = replace(model, control=replace(model.control, variables=variables))
    elif len(rest) == 3 and rest[0] == "control" and rest[1] == "io_mapping":
        entries = list(model.control.io_mapping)
        del entries[int(rest[2])]
        updated = replace(model, control=replace(model.control, io_mapping=tuple(entries)))

    if updated is None:
        raise ModelError(f"not a removable element: {path!r}")
    prefix = path + "/"
    annotations = tuple(
        (key, ann) for key, ann in updated.annotations
        if key != path and not key.startswith(prefix)
    )
    return replace(updated, annotations=annotations)
