"""CAEX-subset exchange files and their mapping to module models.

The file format is a small slice of CAEX: InstanceHierarchy, InternalElement,
Attribute (nested, value in a Value child), RoleRequirements,
ExternalInterface, and InternalLink. Library definitions are referenced by
identifier only, never expanded inline. Child element names must be unique
within a parent so element paths stay unambiguous.

Serialization is canonical (see docs/format.md): fixed attribute order,
2-space indent, UTF-8, LF, optional attributes omitted when empty. Equal
documents produce equal bytes, and attribute values are never re-formatted.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from . import model as mm
from .consistency import (
    RULE_INVALID_VALUE,
    RULE_MISSING_CONTAINER,
    RULE_UNKNOWN_ELEMENT,
    RULE_UNKNOWN_PARAMETER,
    SEVERITY_WARNING,
    Violation,
)
from .paths import PathError, join_path, split_path
from .xmlio import XmlError, XmlNode, parse_tree, serialize_tree

#: Supported external-data connector kinds and the interface class each one
#: stores. The stored identifiers match the mapping rule table verbatim.
CONNECTOR_KINDS = {
    "COLLADAInterface": "COLLADAInterface",
    "PLCopenXMLInterface": "ExternalDataConnector.PLOpenXMLInterface",
    "AttachmentInterface": "AttachmentInterface",
}

_CONNECTOR_BASENAMES = {
    "COLLADAInterface": "collada",
    "PLCopenXMLInterface": "plcopen",
    "AttachmentInterface": "attachment",
}

_STRING_TYPE = "xs:string"


class StructureError(ValueError):
    """Document structure prevents mapping to a module model."""


# ---------------------------------------------------------------------------
# Document tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class CaexAttribute:
    name: str
    value: str = ""
    data_type: str = ""
    unit: str = ""
    children: tuple["CaexAttribute", ...] = ()


@dataclass(frozen=True, slots=True)
class CaexInterface:
    name: str
    interface_class: str = ""
    attributes: tuple[CaexAttribute, ...] = ()


@dataclass(frozen=True, slots=True)
class CaexElement:
    name: str
    id: str = ""
    attributes: tuple[CaexAttribute, ...] = ()
    role_requirements: tuple[str, ...] = ()
    external_interfaces: tuple[CaexInterface, ...] = ()
    children: tuple["CaexElement", ...] = ()


@dataclass(frozen=True, slots=True)
class CaexHierarchy:
    name: str
    elements: tuple[CaexElement, ...] = ()


@dataclass(frozen=True, slots=True)
class CaexLink:
    name: str
    side_a: str
    side_b: str


@dataclass(frozen=True, slots=True)
class CaexDocument:
    role_class_lib_refs: tuple[str, ...] = ()
    interface_class_lib_refs: tuple[str, ...] = ()
    instance_hierarchies: tuple[CaexHierarchy, ...] = ()
    internal_links: tuple[CaexLink, ...] = ()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _check_attrs(node: XmlNode, allowed: tuple[str, ...], required: tuple[str, ...] = ()) -> None:
    for key, _value in node.attrs:
        if key not in allowed:
            raise XmlError(f"unsupported attribute {key!r} on <{node.tag}>", node.line, node.column)
    for key in required:
        if not node.has(key):
            raise XmlError(f"missing attribute {key!r} on <{node.tag}>", node.line, node.column)


def _parse_attribute(node: XmlNode) -> CaexAttribute:
    _check_attrs(node, ("Name", "DataType", "Unit"), required=("Name",))
    value = ""
    seen_value = False
    children: list[CaexAttribute] = []
    for child in node.children:
        if child.tag == "Value":
            if seen_value:
                raise XmlError("multiple <Value> children", child.line, child.column)
            _check_attrs(child, ())
            value = child.text
            seen_value = True
        elif child.tag == "Attribute":
            children.append(_parse_attribute(child))
        else:
            raise XmlError(f"unsupported element <{child.tag}> in Attribute", child.line, child.column)
    return CaexAttribute(
        name=node.get("Name"), value=value,
        data_type=node.get("DataType"), unit=node.get("Unit"),
        children=tuple(children),
    )


def _parse_interface(node: XmlNode) -> CaexInterface:
    _check_attrs(node, ("Name", "RefBaseClassPath"), required=("Name",))
    attributes = []
    for child in node.children:
        if child.tag != "Attribute":
            raise XmlError(
                f"unsupported element <{child.tag}> in ExternalInterface", child.line, child.column)
        attributes.append(_parse_attribute(child))
    return CaexInterface(
        name=node.get("Name"),
        interface_class=node.get("RefBaseClassPath"),
        attributes=tuple(attributes),
    )


def _parse_element(node: XmlNode) -> CaexElement:
    _check_attrs(node, ("Name", "ID"), required=("Name",))
    attributes: list[CaexAttribute] = []
    roles: list[str] = []
    interfaces: list[CaexInterface] = []
    children: list[CaexElement] = []
    child_names: set[str] = set()
    for child in node.children:
        if child.tag == "Attribute":
            attributes.append(_parse_attribute(child))
        elif child.tag == "ExternalInterface":
            interfaces.append(_parse_interface(child))
        elif child.tag == "RoleRequirements":
            _check_attrs(child, ("RefBaseRoleClassPath",), required=("RefBaseRoleClassPath",))
            roles.append(child.get("RefBaseRoleClassPath"))
        elif child.tag == "InternalElement":
            element = _parse_element(child)
            if element.name in child_names:
                raise XmlError(
                    f"duplicate InternalElement name {element.name!r}", child.line, child.column)
            child_names.add(element.name)
            children.append(element)
        else:
            raise XmlError(
                f"unsupported element <{child.tag}> in InternalElement", child.line, child.column)
    return CaexElement(
        name=node.get("Name"), id=node.get("ID"),
        attributes=tuple(attributes), role_requirements=tuple(roles),
        external_interfaces=tuple(interfaces), children=tuple(children),
    )


def parse(data: bytes) -> CaexDocument:
    """Parse file bytes into a CaexDocument.

    Malformed XML and unsupported constructs raise XmlError with the source
    line/column.
    """
    root = parse_tree(data, text_tags=frozenset({"Value"}))
    if root.tag != "CAEXFile":
        raise XmlError(f"unsupported root element <{root.tag}>", root.line, root.column)
    _check_attrs(root, ())
    role_refs: list[str] = []
    iface_refs: list[str] = []
    hierarchies: list[CaexHierarchy] = []
    links: list[CaexLink] = []
    for child in root.children:
        if child.tag == "RoleClassLibRef":
            _check_attrs(child, ("Name",), required=("Name",))
            role_refs.append(child.get("Name"))
        elif child.tag == "InterfaceClassLibRef":
            _check_attrs(child, ("Name",), required=("Name",))
            iface_refs.append(child.get("Name"))
        elif child.tag == "InstanceHierarchy":
            _check_attrs(child, ("Name",), required=("Name",))
            elements = []
            names: set[str] = set()
            for sub in child.children:
                if sub.tag != "InternalElement":
                    raise XmlError(
                        f"unsupported element <{sub.tag}> in InstanceHierarchy", sub.line, sub.column)
                element = _parse_element(sub)
                if element.name in names:
                    raise XmlError(
                        f"duplicate InternalElement name {element.name!r}", sub.line, sub.column)
                names.add(element.name)
                elements.append(element)
            hierarchies.append(CaexHierarchy(name=child.get("Name"), elements=tuple(elements)))
        elif child.tag == "InternalLink":
            _check_attrs(
                child, ("Name", "RefPartnerSideA", "RefPartnerSideB"),
                required=("Name", "RefPartnerSideA", "RefPartnerSideB"))
            links.append(CaexLink(
                name=child.get("Name"),
                side_a=child.get("RefPartnerSideA"),
                side_b=child.get("RefPartnerSideB")))
        else:
            raise XmlError(f"unsupported element <{child.tag}> in CAEXFile", child.line, child.column)
    return CaexDocument(
        role_class_lib_refs=tuple(role_refs),
        interface_class_lib_refs=tuple(iface_refs),
        instance_hierarchies=tuple(hierarchies),
        internal_links=tuple(links),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _attribute_node(attribute: CaexAttribute) -> XmlNode:
    attrs: list[tuple[str, str]] = [("Name", attribute.name)]
    if attribute.data_type:
        attrs.append(("DataType", attribute.data_type))
    if attribute.unit:
        attrs.append(("Unit", attribute.unit))
    children: list[XmlNode] = []
    if attribute.value:
        children.append(XmlNode("Value", text=attribute.value))
    children.extend(_attribute_node(c) for c in attribute.children)
    return XmlNode("Attribute", tuple(attrs), tuple(children))


def _interface_node(interface: CaexInterface) -> XmlNode:
    attrs: list[tuple[str, str]] = [("Name", interface.name)]
    if interface.interface_class:
        attrs.append(("RefBaseClassPath", interface.interface_class))
    return XmlNode(
        "ExternalInterface", tuple(attrs),
        tuple(_attribute_node(a) for a in interface.attributes))


def _element_node(element: CaexElement) -> XmlNode:
    attrs: list[tuple[str, str]] = [("Name", element.name)]
    if element.id:
        attrs.append(("ID", element.id))
    children: list[XmlNode] = [_attribute_node(a) for a in element.attributes]
    children.extend(_interface_node(i) for i in element.external_interfaces)
    children.extend(
        XmlNode("RoleRequirements", (("RefBaseRoleClassPath", role),))
        for role in element.role_requirements)
    children.extend(_element_node(c) for c in element.children)
    return XmlNode("InternalElement", tuple(attrs), tuple(children))


def serialize(doc: CaexDocument) -> bytes:
    """Render a document in canonical form (deterministic, byte-stable)."""
    children: list[XmlNode] = []
    children.extend(XmlNode("RoleClassLibRef", (("Name", r),)) for r in doc.role_class_lib_refs)
    children.extend(
        XmlNode("InterfaceClassLibRef", (("Name", r),)) for r in doc.interface_class_lib_refs)
    for hierarchy in doc.instance_hierarchies:
        children.append(XmlNode(
            "InstanceHierarchy", (("Name", hierarchy.name),),
            tuple(_element_node(e) for e in hierarchy.elements)))
    children.extend(
        XmlNode("InternalLink", (
            ("Name", link.name),
            ("RefPartnerSideA", link.side_a),
            ("RefPartnerSideB", link.side_b),
        ))
        for link in doc.internal_links)
    return serialize_tree(XmlNode("CAEXFile", (), tuple(children)))


# ---------------------------------------------------------------------------
# Document -> model
# ---------------------------------------------------------------------------

def _find_module_roots(element: CaexElement, prefix: tuple[str, ...], roots: list) -> None:
    path = prefix + (element.name,)
    if element.role_requirements:
        roots.append((path, element))
        return
    for child in element.children:
        _find_module_roots(child, path, roots)


class _ModelBuilder:
    """Mutable assembly state for one to_model run."""

    def __init__(self, model: mm.ModuleModel):
        self.model = model
        self.violations: list[Violation] = []

    def warn(self, rule: str, path: str, message: str) -> None:
        self.violations.append(Violation(rule, SEVERITY_WARNING, path, message))

    def attr_map(self, element: CaexElement, path: str, known: tuple[str, ...]) -> dict[str, str]:
        """Extract known scalar attributes; flag unknown names and nesting."""
        values: dict[str, str] = {}
        for attribute in element.attributes:
            if attribute.children:
                self.warn(RULE_UNKNOWN_PARAMETER, path,
                          f"nested attribute '{attribute.name}' ignored")
                continue
            if attribute.name in known:
                values[attribute.name] = attribute.value
            else:
                self.warn(RULE_UNKNOWN_PARAMETER, path,
                          f"unknown attribute '{attribute.name}' ignored")
        return values

    def apply(self, path: str, action, *args, **kwargs) -> None:
        """Run a model operation; downgrade ModelError to a violation."""
        try:
            self.model = action(self.model, *args, **kwargs)
        except mm.ModelError as exc:
            self.warn(RULE_INVALID_VALUE, path, str(exc))

    def annotate(self, element: CaexElement, path: str) -> None:
        if element.role_requirements:
            self.apply(path, mm.with_roles, path, *element.role_requirements)
        for interface in element.external_interfaces:
            uri = ""
            for attribute in interface.attributes:
                if attribute.name == "refURI" and not attribute.children:
                    uri = attribute.value
                else:
                    self.warn(RULE_UNKNOWN_PARAMETER, path,
                              f"unsupported interface attribute '{attribute.name}' ignored")
            self.apply(path, mm.with_external_ref, path,
                       mm.ExternalRef(interface.name, interface.interface_class, uri))

    def reject_annotations(self, element: CaexElement, path: str) -> None:
        if element.role_requirements or element.external_interfaces:
            self.warn(RULE_UNKNOWN_ELEMENT, path,
                      f"annotations on list container '{element.name}' are not supported")


def _entry_elements(builder: _ModelBuilder, container: CaexElement, path: str):
    builder.reject_annotations(container, path)
    if container.attributes:
        builder.warn(RULE_UNKNOWN_PARAMETER, path,
                     f"attributes on list container '{container.name}' ignored")
    return container.children


def _map_general(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "general")
    builder.annotate(element, path)
    seen_identification = False
    for child in element.children:
        if child.name == "identification":
            seen_identification = True
            ident_path = join_path(mid, "general", "identification")
            values = builder.attr_map(child, ident_path, ("name", "identifier", "module_type"))
            builder.apply(ident_path, mm.set_identification, **values)
            builder.annotate(child, ident_path)
            for sub in child.children:
                builder.warn(RULE_UNKNOWN_ELEMENT, ident_path,
                             f"unknown element '{sub.name}' ignored")
        else:
            builder.warn(RULE_UNKNOWN_ELEMENT, path, f"unknown element '{child.name}' ignored")
    if not seen_identification:
        builder.warn(RULE_MISSING_CONTAINER, join_path(mid, "general", "identification"),
                     "general has no identification element")
    for attribute in element.attributes:
        if attribute.children:
            builder.warn(RULE_UNKNOWN_PARAMETER, path,
                         f"nested attribute '{attribute.name}' ignored")
        elif attribute.name == "main_dimensions":
            builder.apply(path, mm.set_main_dimensions, attribute.value)
        else:
            builder.apply(path, mm.add_static_attribute,
                          attribute.name, attribute.value, attribute.unit)


def _map_status(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "status")
    builder.annotate(element, path)
    for attribute in element.attributes:
        builder.warn(RULE_UNKNOWN_PARAMETER, path, f"unknown attribute '{attribute.name}' ignored")
    for child in element.children:
        if child.name != "runtime_variables":
            builder.warn(RULE_UNKNOWN_ELEMENT, path, f"unknown element '{child.name}' ignored")
            continue
        for entry in _entry_elements(builder, child, join_path(path, "runtime_variables")):
            entry_path = join_path(path, "runtime_variables", entry.name)
            values = builder.attr_map(entry, entry_path, ("data_type", "unit", "description"))
            builder.apply(entry_path, mm.add_runtime_variable, entry.name,
                          values.get("data_type", ""), values.get("unit", ""),
                          values.get("description", ""))
            builder.annotate(entry, entry_path)
            for sub in entry.children:
                builder.warn(RULE_UNKNOWN_ELEMENT, entry_path,
                             f"unknown element '{sub.name}' ignored")


def _map_function(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "function")
    builder.annotate(element, path)
    for attribute in element.attributes:
        builder.warn(RULE_UNKNOWN_PARAMETER, path, f"unknown attribute '{attribute.name}' ignored")
    for child in element.children:
        if child.name == "logistic_functions":
            for entry in _entry_elements(builder, child, join_path(path, "logistic_functions")):
                entry_path = join_path(path, "logistic_functions", entry.name)
                values = builder.attr_map(entry, entry_path, ("category", "behavior_ref"))
                builder.apply(entry_path, mm.add_logistic_function, entry.name,
                              values.get("category", "material_flow"),
                              values.get("behavior_ref", ""))
                builder.annotate(entry, entry_path)
        elif child.name == "routes":
            for i, entry in enumerate(_entry_elements(builder, child, join_path(path, "routes"))):
                entry_path = join_path(path, "routes", str(i))
                values = builder.attr_map(entry, entry_path, ("from_port", "to_port", "priority"))
                priority_text = values.get("priority", "0") or "0"
                try:
                    priority = int(priority_text)
                except ValueError:
                    builder.warn(RULE_INVALID_VALUE, entry_path,
                                 f"route priority is not an integer: {priority_text!r}")
                    priority = 0
                builder.apply(entry_path, mm.add_route, values.get("from_port", ""),
                              values.get("to_port", ""), priority)
                builder.annotate(entry, entry_path)
        else:
            builder.warn(RULE_UNKNOWN_ELEMENT, path, f"unknown element '{child.name}' ignored")


def _map_interface(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "interface")
    builder.annotate(element, path)
    for attribute in element.attributes:
        builder.warn(RULE_UNKNOWN_PARAMETER, path, f"unknown attribute '{attribute.name}' ignored")
    for child in element.children:
        if child.name == "ports":
            for entry in _entry_elements(builder, child, join_path(path, "ports")):
                entry_path = join_path(path, "ports", entry.name)
                values = builder.attr_map(entry, entry_path, ("direction", "position"))
                builder.apply(entry_path, mm.add_port, entry.name,
                              values.get("direction", "in"), values.get("position", ""))
                builder.annotate(entry, entry_path)
        elif child.name == "interaction_spaces":
            for entry in _entry_elements(builder, child, join_path(path, "interaction_spaces")):
                entry_path = join_path(path, "interaction_spaces", entry.name)
                values = builder.attr_map(entry, entry_path, ("min_corner", "max_corner"))
                builder.apply(entry_path, mm.add_interaction_space, entry.name,
                              values.get("min_corner", ""), values.get("max_corner", ""))
                builder.annotate(entry, entry_path)
        else:
            builder.warn(RULE_UNKNOWN_ELEMENT, path, f"unknown element '{child.name}' ignored")


def _map_control(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "control")
    builder.annotate(element, path)
    for attribute in element.attributes:
        builder.warn(RULE_UNKNOWN_PARAMETER, path, f"unknown attribute '{attribute.name}' ignored")
    seen_platform = False
    for child in element.children:
        if child.name == "control_functions":
            for entry in _entry_elements(builder, child, join_path(path, "control_functions")):
                entry_path = join_path(path, "control_functions", entry.name)
                values = builder.attr_map(entry, entry_path, ("language_tag", "body_ref"))
                builder.apply(entry_path, mm.add_control_function, entry.name,
                              values.get("language_tag", ""), values.get("body_ref", ""))
                builder.annotate(entry, entry_path)
        elif child.name == "variables":
            for entry in _entry_elements(builder, child, join_path(path, "variables")):
                entry_path = join_path(path, "variables", entry.name)
                values = builder.attr_map(entry, entry_path, ("data_type", "scope"))
                builder.apply(entry_path, mm.add_variable, entry.name,
                              values.get("data_type", ""), values.get("scope", ""))
                builder.annotate(entry, entry_path)
        elif child.name == "io_mapping":
            for i, entry in enumerate(_entry_elements(builder, child, join_path(path, "io_mapping"))):
                entry_path = join_path(path, "io_mapping", str(i))
                values = builder.attr_map(entry, entry_path, (
                    "component_path", "logical_address", "variable_name",
                    "data_type", "direction"))
                direction = values.get("direction", "input") or "input"
                if direction not in mm.IO_DIRECTIONS:
                    builder.warn(RULE_INVALID_VALUE, entry_path,
                                 f"invalid io direction {direction!r}")
                    direction = "input"
                component_path = values.get("component_path", "")
                if not component_path:
                    builder.warn(RULE_INVALID_VALUE, entry_path,
                                 "io_mapping entry has no component_path")
                    continue
                builder.apply(entry_path, mm.add_io_entry, component_path,
                              values.get("logical_address", ""),
                              values.get("variable_name", ""),
                              values.get("data_type", ""), direction)
                builder.annotate(entry, entry_path)
        elif child.name == "platform":
            seen_platform = True
            platform_path = join_path(path, "platform")
            values = builder.attr_map(child, platform_path,
                                      ("controller_type", "bus_coupler_type"))
            builder.apply(platform_path, mm.set_platform,
                          values.get("controller_type", ""),
                          values.get("bus_coupler_type", ""))
            builder.annotate(child, platform_path)
            for sub in child.children:
                builder.warn(RULE_UNKNOWN_ELEMENT, platform_path,
                             f"unknown element '{sub.name}' ignored")
        else:
            builder.warn(RULE_UNKNOWN_ELEMENT, path, f"unknown element '{child.name}' ignored")
    if not seen_platform:
        builder.warn(RULE_MISSING_CONTAINER, join_path(path, "platform"),
                     "control has no platform element")


def _map_components(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "components")
    builder.reject_annotations(element, path)
    for entry in element.children:
        entry_path = join_path(path, entry.name)
        values = builder.attr_map(entry, entry_path, (
            "kind", "component_type", "position", "main_dimensions", "latency"))
        kind = values.get("kind", "sensor") or "sensor"
        if kind not in mm.COMPONENT_KINDS:
            builder.warn(RULE_INVALID_VALUE, entry_path, f"invalid component kind {kind!r}")
            kind = "sensor"
        fields = {}
        for name in ("position", "main_dimensions"):
            value = values.get(name, "")
            try:
                mm._require_triple(value, name)
            except mm.ModelError as exc:
                builder.warn(RULE_INVALID_VALUE, entry_path, str(exc))
                value = ""
            fields[name] = value
        latency = values.get("latency", "")
        try:
            mm._require_seconds(latency, "component latency")
        except mm.ModelError as exc:
            builder.warn(RULE_INVALID_VALUE, entry_path, str(exc))
            latency = ""
        builder.apply(entry_path, mm.add_component, mm.Component(
            name=entry.name, kind=kind, component_type=values.get("component_type", ""),
            position=fields["position"], main_dimensions=fields["main_dimensions"],
            latency=latency))
        builder.annotate(entry, entry_path)
        for sub in entry.children:
            builder.warn(RULE_UNKNOWN_ELEMENT, entry_path,
                         f"unknown element '{sub.name}' ignored")


def _map_documents(builder: _ModelBuilder, element: CaexElement, mid: str) -> None:
    path = join_path(mid, "documents")
    builder.reject_annotations(element, path)
    for entry in element.children:
        entry_path = join_path(path, entry.name)
        values = builder.attr_map(entry, entry_path, (
            "discipline", "stage", "name", "server_path", "assigned_element"))
        discipline = values.get("discipline", "logistics") or "logistics"
        if discipline not in mm.DISCIPLINES:
            builder.warn(RULE_INVALID_VALUE, entry_path, f"invalid discipline {discipline!r}")
            discipline = "logistics"
        stage = values.get("stage", "logistics_planning") or "logistics_planning"
        if stage not in mm.STAGES:
            builder.warn(RULE_INVALID_VALUE, entry_path, f"invalid stage {stage!r}")
            stage = "logistics_planning"
        assigned = values.get("assigned_element", "")
        if assigned:
            try:
                split_path(assigned)
            except PathError as exc:
                builder.warn(RULE_INVALID_VALUE, entry_path, str(exc))
                assigned = ""
        builder.apply(entry_path, mm.add_document, mm.DocumentReference(
            id=entry.name, discipline=discipline, stage=stage,
            name=values.get("name", ""), server_path=values.get("server_path", ""),
            assigned_element=assigned))
        builder.annotate(entry, entry_path)


def to_model(doc: CaexDocument) -> tuple[mm.ModuleModel, list[Violation]]:
    """Map a parsed document to a module model.

    The document must contain exactly one module root: an InternalElement
    with role requirements and no role-carrying ancestor. Non-fatal
    irregularities (missing containers, unknown attributes, invalid values)
    are returned as warnings; structural problems raise StructureError.
    """
    roots: list[tuple[tuple[str, ...], CaexElement]] = []
    for hierarchy in doc.instance_hierarchies:
        for element in hierarchy.elements:
            _find_module_roots(element, (), roots)
    if len(roots) != 1:
        raise StructureError(f"expected exactly one module root, found {len(roots)}")
    id_segments, root = roots[0]
    mid = "/".join(id_segments)
    try:
        model = mm.new_module(mid, "")
    except mm.ModelError as exc:
        raise StructureError(f"module id unusable: {exc}") from None

    builder = _ModelBuilder(model)
    for attribute in root.attributes:
        if attribute.name == "name" and not attribute.children:
            try:
                mm._require_clean(attribute.value, "module name")
            except mm.ModelError as exc:
                builder.warn(RULE_INVALID_VALUE, mid, str(exc))
                continue
            builder.model = replace(builder.model, name=attribute.value)
        else:
            builder.warn(RULE_UNKNOWN_PARAMETER, mid,
                         f"unknown attribute '{attribute.name}' ignored")
    builder.annotate(root, mid)

    mappers = {
        "general": _map_general,
        "status": _map_status,
        "function": _map_function,
        "interface": _map_interface,
        "control": _map_control,
        "components": _map_components,
        "documents": _map_documents,
    }
    seen: set[str] = set()
    for child in root.children:
        mapper = mappers.get(child.name)
        if mapper is None:
            builder.warn(RULE_UNKNOWN_ELEMENT, join_path(mid, child.name),
                         f"unknown element '{child.name}' ignored")
            continue
        seen.add(child.name)
        mapper(builder, child, mid)
    for required in ("general", "status", "function", "interface", "control"):
        if required not in seen:
            builder.warn(RULE_MISSING_CONTAINER, join_path(mid, required),
                         f"module has no {required} element")

    for link in doc.internal_links:
        try:
            builder.model = mm.add_cross_ref(builder.model, link.side_a, link.side_b, link.name)
        except (mm.ModelError, PathError) as exc:
            builder.warn(RULE_INVALID_VALUE, join_path(mid, "cross_refs"), str(exc))
    return builder.model, builder.violations


# ---------------------------------------------------------------------------
# Model -> document
# ---------------------------------------------------------------------------

def _value_attr(name: str, value: str, unit: str = "") -> CaexAttribute:
    return CaexAttribute(name=name, value=value, data_type=_STRING_TYPE, unit=unit)


class _DocBuilder:
    def __init__(self, model: mm.ModuleModel):
        self.model = model
        self.annotations = dict(model.annotations)

    def decorate(self, path: str) -> tuple[tuple[str, ...], tuple[CaexInterface, ...]]:
        ann = self.annotations.get(path, mm.Annotation())
        interfaces = tuple(
            CaexInterface(
                name=ref.name, interface_class=ref.interface_class,
                attributes=(_value_attr("refURI", ref.ref_uri),) if ref.ref_uri else ())
            for ref in ann.external_refs)
        return ann.roles, interfaces

    def element(self, name: str, path: str,
                params: tuple[tuple[str, str, str], ...] = (),
                children: tuple[CaexElement, ...] = (),
                keep: frozenset[str] = frozenset()) -> CaexElement:
        # Schema-defined parameters are omitted when empty (the reader restores
        # them); open-schema names in `keep` must survive empty, or they vanish.
        roles, interfaces = self.decorate(path)
        attributes = tuple(
            _value_attr(param, value, unit)
            for param, value, unit in params if value or param in keep)
        return CaexElement(
            name=name, attributes=attributes, role_requirements=roles,
            external_interfaces=interfaces, children=children)

    def entry_list(self, name: str, entries: tuple[CaexElement, ...]) -> CaexElement:
        return CaexElement(name=name, children=entries)


def from_model(model: mm.ModuleModel) -> CaexDocument:
    """Render a model as a document; to_model(from_model(m)) reproduces m."""
    builder = _DocBuilder(model)
    mid = model.id

    general_children = [builder.element(
        "identification", join_path(mid, "general", "identification"),
        mm._node_params(model.general.identification))]
    general = builder.element(
        "general", join_path(mid, "general"),
        mm._node_params(model.general), tuple(general_children),
        keep=frozenset(p.name for p in model.general.static_attributes))

    status_children = []
    if model.status.runtime_variables:
        status_children.append(builder.entry_list("runtime_variables", tuple(
            builder.element(
                v.name, join_path(mid, "status", "runtime_variables", v.name),
                mm._node_params(v))
            for v in model.status.runtime_variables)))
    status = builder.element("status", join_path(mid, "status"), (), tuple(status_children))

    function_children = []
    if model.function.logistic_functions:
        function_children.append(builder.entry_list("logistic_functions", tuple(
            builder.element(
                f.name, join_path(mid, "function", "logistic_functions", f.name),
                mm._node_params(f))
            for f in model.function.logistic_functions)))
    if model.function.routes:
        function_children.append(builder.entry_list("routes", tuple(
            builder.element(
                str(i), join_path(mid, "function", "routes", str(i)),
                mm._node_params(r))
            for i, r in enumerate(model.function.routes))))
    function = builder.element("function", join_path(mid, "function"), (), tuple(function_children))

    interface_children = []
    if model.interface.ports:
        interface_children.append(builder.entry_list("ports", tuple(
            builder.element(
                p.name, join_path(mid, "interface", "ports", p.name),
                mm._node_params(p))
            for p in model.interface.ports)))
    if model.interface.interaction_spaces:
        interface_children.append(builder.entry_list("interaction_spaces", tuple(
            builder.element(
                s.name, join_path(mid, "interface", "interaction_spaces", s.name),
                mm._node_params(s))
            for s in model.interface.interaction_spaces)))
    interface = builder.element(
        "interface", join_path(mid, "interface"), (), tuple(interface_children))

    control_children = []
    if model.control.control_functions:
        control_children.append(builder.entry_list("control_functions", tuple(
            builder.element(
                f.name, join_path(mid, "control", "control_functions", f.name),
                mm._node_params(f))
            for f in model.control.control_functions)))
    if model.control.variables:
        control_children.append(builder.entry_list("variables", tuple(
            builder.element(
                v.name, join_path(mid, "control", "variables", v.name),
                mm._node_params(v))
            for v in model.control.variables)))
    if model.control.io_mapping:
        control_children.append(builder.entry_list("io_mapping", tuple(
            builder.element(
                str(i), join_path(mid, "control", "io_mapping", str(i)),
                mm._node_params(e))
            for i, e in enumerate(model.control.io_mapping))))
    control_children.append(builder.element(
        "platform", join_path(mid, "control", "platform"),
        mm._node_params(model.control.platform)))
    control = builder.element("control", join_path(mid, "control"), (), tuple(control_children))

    root_children = [general, status, function, interface, control]
    if model.components:
        root_children.append(builder.entry_list("components", tuple(
            builder.element(
                c.name, join_path(mid, "components", c.name), mm._node_params(c))
            for c in model.components)))
    if model.documents:
        root_children.append(builder.entry_list("documents", tuple(
            builder.element(
                d.id, join_path(mid, "documents", d.id), (
                    ("discipline", d.discipline, ""),
                    ("stage", d.stage, ""),
                    ("name", d.name, ""),
                    ("server_path", d.server_path, ""),
                    ("assigned_element", d.assigned_element, ""),
                ))
            for d in model.documents)))

    id_segments = model.id.split("/")
    roles, interfaces = builder.decorate(mid)
    root = CaexElement(
        name=id_segments[-1],
        attributes=(_value_attr("name", model.name),) if model.name else (),
        role_requirements=roles, external_interfaces=interfaces,
        children=tuple(root_children))
    for segment in reversed(id_segments[:-1]):
        root = CaexElement(name=segment, children=(root,))

    role_libs = sorted({role for _path, ann in model.annotations for role in ann.roles})
    iface_libs = sorted({
        ref.interface_class for _path, ann in model.annotations for ref in ann.external_refs})
    return CaexDocument(
        role_class_lib_refs=tuple(role_libs),
        interface_class_lib_refs=tuple(iface_libs),
        instance_hierarchies=(CaexHierarchy(name="modules", elements=(root,)),),
        internal_links=tuple(
            CaexLink(name=ref.kind, side_a=ref.source, side_b=ref.target)
            for ref in model.cross_refs),
    )


# ---------------------------------------------------------------------------
# External-data connectors
# ---------------------------------------------------------------------------

def attach_external_document(
    model: mm.ModuleModel, element_path: str, connector_kind: str, uri: str
) -> mm.ModuleModel:
    """Attach an external document connector to an element.

    The connector kind picks the stored interface class; the uri lands in a
    refURI attribute verbatim. Unknown kinds are an error.
    """
    if connector_kind not in CONNECTOR_KINDS:
        raise mm.ModelError(
            f"unknown connector kind {connector_kind!r}; "
            f"expected one of {', '.join(sorted(CONNECTOR_KINDS))}")
    base = _CONNECTOR_BASENAMES[connector_kind]
    taken = {ref.name for ref in mm.annotation_at(model, element_path).external_refs}
    name = base
    counter = 2
    while name in taken:
        name = f"{base}-{counter}"
        counter += 1
    ref = mm.ExternalRef(name=name, interface_class=CONNECTOR_KINDS[connector_kind], ref_uri=uri)
    return mm.with_external_ref(model, element_path, ref)
