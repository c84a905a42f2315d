"""Sequential function charts: binding IML to module i/o, emit, simulate.

An IML document names components and ports; a control skeleton must speak in
declared i/o variables instead. Binding goes through the module's io_mapping:
sensors resolve to their input variable, actuators to their output variable,
and order requests to `order_<port>` variables (declared on demand).

The emitted XML is a small, self-defined PLCopen-style schema
(project > pou > interface/body > sfc), canonical exactly like the module
exchange files; parse_plcopen recovers an equal SfcProgram.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import model as mm
from .behavior import (
    Action,
    Condition,
    ImlDocument,
    SimulationError,
    TraceEvent,
    _MAX_MOVES,
)
from .paths import join_path
from .xmlio import XmlError, XmlNode, parse_tree, serialize_tree


class SfcError(ValueError):
    """Structurally unusable IML document or program."""


class BindingError(SfcError):
    """A behavior subject has no io_mapping binding in the module model."""


@dataclass(frozen=True, slots=True)
class SfcVariable:
    name: str
    data_type: str = ""
    kind: str = ""


@dataclass(frozen=True, slots=True)
class SfcStep:
    name: str
    initial: bool = False
    actions: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class SfcTransition:
    source: str
    target: str
    condition: str


@dataclass(frozen=True, slots=True)
class SfcProgram:
    name: str
    steps: tuple[SfcStep, ...]
    transitions: tuple[SfcTransition, ...]
    variables: tuple[SfcVariable, ...]


# ---------------------------------------------------------------------------
# Binding
# ---------------------------------------------------------------------------

class _Binding:
    """Lookup tables from component/port names to i/o variable names."""

    def __init__(self, model: mm.ModuleModel):
        self.model = model
        by_path = {
            join_path(model.id, "components", c.name): c for c in model.components}
        self.sensor_vars: dict[str, str] = {}
        self.actuator_vars: dict[str, str] = {}
        for entry in model.control.io_mapping:
            if not entry.variable_name:
                continue
            component = by_path.get(entry.component_path)
            if component is None:
                continue
            if component.kind == "sensor" and entry.direction == "input":
                self.sensor_vars.setdefault(component.name, entry.variable_name)
            elif component.kind == "actuator" and entry.direction == "output":
                self.actuator_vars.setdefault(component.name, entry.variable_name)
        self.declared = {v.name: v for v in model.control.variables}
        self.extra: dict[str, SfcVariable] = {}

    def sensor(self, name: str) -> str:
        try:
            return self.sensor_vars[name]
        except KeyError:
            raise BindingError(
                f"no io_mapping entry binds sensor '{name}' to an input variable") from None

    def actuator(self, name: str) -> str:
        try:
            return self.actuator_vars[name]
        except KeyError:
            raise BindingError(
                f"no io_mapping entry binds actuator '{name}' to an output variable") from None

    def order(self, port: str) -> str:
        name = f"order_{port}"
        if name not in self.declared and name not in self.extra:
            self.extra[name] = SfcVariable(name=name, data_type="BOOL", kind="input")
        return name

    def term(self, condition: Condition) -> str:
        if condition.kind == "sensor_true":
            return self._declare(self.sensor(condition.subject), "input")
        if condition.kind == "sensor_false":
            return "NOT " + self._declare(self.sensor(condition.subject), "input")
        return self.order(condition.subject)

    def assignment(self, action: Action) -> str:
        variable = self._declare(self.actuator(action.subject), "output")
        value = "TRUE" if action.kind == "activate" else "FALSE"
        return f"{variable} := {value}"

    def _declare(self, variable: str, kind: str) -> str:
        # A variable named only in io_mapping still needs a declaration.
        if variable not in self.declared and variable not in self.extra:
            self.extra[variable] = SfcVariable(name=variable, data_type="BOOL", kind=kind)
        return variable

    def variables(self) -> tuple[SfcVariable, ...]:
        mirrored = tuple(
            SfcVariable(name=v.name, data_type=v.data_type, kind=v.scope)
            for v in self.model.control.variables)
        return mirrored + tuple(self.extra[k] for k in sorted(self.extra))


def _condition_expr(guards: tuple[Condition, ...], binding: _Binding) -> str:
    if not guards:
        return "TRUE"
    return " AND ".join(sorted(binding.term(g) for g in guards))


def iml_to_sfc(iml: ImlDocument, model: mm.ModuleModel) -> SfcProgram:
    """Bind an IML document against a module model.

    One step per entry (the entry step marked initial), one transition per
    recorded edge carrying the target step's bound guard. Subjects that no
    io_mapping entry covers raise BindingError naming the missing binding.
    """
    if not iml.entries:
        raise SfcError("no entry step")
    binding = _Binding(model)
    conditions = {e.step_id: _condition_expr(e.guards, binding) for e in iml.entries}
    steps = tuple(
        SfcStep(
            name=entry.step_id,
            initial=not entry.predecessors,
            actions=tuple(binding.assignment(a) for a in entry.actions))
        for entry in iml.entries)
    transitions = [
        SfcTransition(source=pred, target=entry.step_id, condition=conditions[entry.step_id])
        for entry in iml.entries
        for pred in entry.predecessors
    ]
    transitions.extend(
        SfcTransition(source=source, target=target, condition=conditions[target])
        for source, target in iml.loop_edges)
    return SfcProgram(
        name=iml.source_graph_id,
        steps=steps,
        transitions=tuple(transitions),
        variables=binding.variables())


def divergences(program: SfcProgram) -> tuple[tuple[str, int], ...]:
    """(step name, branch count) for steps with two or more outgoing transitions."""
    counts: dict[str, int] = {}
    for transition in program.transitions:
        counts[transition.source] = counts.get(transition.source, 0) + 1
    return tuple(sorted((s, n) for s, n in counts.items() if n >= 2))


# ---------------------------------------------------------------------------
# PLCopen-style XML
# ---------------------------------------------------------------------------

def emit_plcopen(program: SfcProgram) -> bytes:
    """Render the program in canonical form (deterministic, byte-stable)."""
    variables = tuple(
        XmlNode("variable", (
            ("name", v.name), ("dataType", v.data_type), ("kind", v.kind)))
        for v in program.variables)
    steps = tuple(
        XmlNode(
            "step",
            (("name", s.name),) + ((("initial", "true"),) if s.initial else ()),
            tuple(XmlNode("action", text=a) for a in s.actions))
        for s in program.steps)
    transitions = tuple(
        XmlNode("transition", (
            ("source", t.source), ("target", t.target), ("condition", t.condition)))
        for t in program.transitions)
    pou = XmlNode("pou", (("name", program.name), ("pouType", "program")), (
        XmlNode("interface", (), variables),
        XmlNode("body", (), (XmlNode("sfc", (), steps + transitions),)),
    ))
    return serialize_tree(XmlNode("project", (("name", program.name),), (pou,)))


def _require_attrs(node: XmlNode, allowed: tuple[str, ...], required: tuple[str, ...]) -> None:
    for key, _value in node.attrs:
        if key not in allowed:
            raise XmlError(f"unsupported attribute {key!r} on <{node.tag}>", node.line, node.column)
    for key in required:
        if not node.has(key):
            raise XmlError(f"missing attribute {key!r} on <{node.tag}>", node.line, node.column)


def _single_child(node: XmlNode, tag: str) -> XmlNode:
    matches = [c for c in node.children if c.tag == tag]
    if len(matches) != 1:
        raise XmlError(f"expected one <{tag}> in <{node.tag}>", node.line, node.column)
    return matches[0]


def parse_plcopen(data: bytes) -> SfcProgram:
    """Parse bytes from emit_plcopen back into an equal SfcProgram."""
    root = parse_tree(data, text_tags=frozenset({"action"}))
    if root.tag != "project":
        raise XmlError(f"unsupported root element <{root.tag}>", root.line, root.column)
    _require_attrs(root, ("name",), ("name",))
    pou = _single_child(root, "pou")
    _require_attrs(pou, ("name", "pouType"), ("name", "pouType"))
    if pou.get("pouType") != "program":
        raise XmlError(f"unsupported pouType {pou.get('pouType')!r}", pou.line, pou.column)

    interface = _single_child(pou, "interface")
    variables = []
    for child in interface.children:
        if child.tag != "variable":
            raise XmlError(f"unsupported element <{child.tag}> in interface",
                           child.line, child.column)
        _require_attrs(child, ("name", "dataType", "kind"), ("name", "dataType", "kind"))
        variables.append(SfcVariable(
            name=child.get("name"), data_type=child.get("dataType"), kind=child.get("kind")))

    sfc = _single_child(_single_child(pou, "body"), "sfc")
    steps: list[SfcStep] = []
    transitions: list[SfcTransition] = []
    for child in sfc.children:
        if child.tag == "step":
            _require_attrs(child, ("name", "initial"), ("name",))
            if child.has("initial") and child.get("initial") != "true":
                raise XmlError(f"bad initial flag {child.get('initial')!r}",
                               child.line, child.column)
            actions = []
            for sub in child.children:
                if sub.tag != "action":
                    raise XmlError(f"unsupported element <{sub.tag}> in step",
                                   sub.line, sub.column)
                actions.append(sub.text)
            steps.append(SfcStep(
                name=child.get("name"), initial=child.has("initial"),
                actions=tuple(actions)))
        elif child.tag == "transition":
            _require_attrs(child, ("source", "target", "condition"),
                           ("source", "target", "condition"))
            transitions.append(SfcTransition(
                source=child.get("source"), target=child.get("target"),
                condition=child.get("condition")))
        else:
            raise XmlError(f"unsupported element <{child.tag}> in sfc", child.line, child.column)
    return SfcProgram(
        name=root.get("name"), steps=tuple(steps),
        transitions=tuple(transitions), variables=tuple(variables))


# ---------------------------------------------------------------------------
# Program simulation
# ---------------------------------------------------------------------------

def _eval_condition(condition: str, state: dict[str, bool]) -> bool:
    if condition == "TRUE":
        return True
    for term in condition.split(" AND "):
        if term.startswith("NOT "):
            if state.get(term[4:], False):
                return False
        elif not state.get(term, False):
            return False
    return True


def simulate_sfc(
    program: SfcProgram, trace: list[TraceEvent], model: mm.ModuleModel
) -> list[Action]:
    """Run the bound program over a trace, reporting actuator events.

    Events are translated into variable writes through the model's io_mapping
    (the same binding iml_to_sfc used); executed step actions are translated
    back into activate/deactivate events. Semantics mirror behavior.simulate:
    level-triggered state, cascading advance, ambiguity as an error.
    """
    binding = _Binding(model)
    variable_to_actuator = {var: name for name, var in binding.actuator_vars.items()}
    state: dict[str, bool] = {v.name: False for v in program.variables}

    initial = [s for s in program.steps if s.initial]
    if len(initial) != 1:
        raise SfcError(f"expected exactly one initial step, found {len(initial)}")
    by_name = {s.name: s for s in program.steps}
    outgoing: dict[str, list[SfcTransition]] = {s.name: [] for s in program.steps}
    for transition in program.transitions:
        if transition.source not in by_name or transition.target not in by_name:
            raise SfcError(
                f"transition {transition.source} -> {transition.target} "
                f"references unknown steps")
        outgoing[transition.source].append(transition)

    current = initial[0].name
    emitted: list[Action] = []
    moves = 0

    def execute(step: SfcStep) -> None:
        for text in step.actions:
            variable, _sep, value = text.partition(" := ")
            if _sep == "" or value not in ("TRUE", "FALSE"):
                raise SfcError(f"unreadable step action {text!r}")
            state[variable] = value == "TRUE"
            actuator = variable_to_actuator.get(variable)
            if actuator is None:
                raise BindingError(
                    f"no io_mapping entry maps variable '{variable}' back to an actuator")
            emitted.append(Action(
                "activate" if value == "TRUE" else "deactivate", actuator))

    def advance() -> None:
        nonlocal current, moves
        while True:
            enabled = [t for t in outgoing[current] if _eval_condition(t.condition, state)]
            if not enabled:
                return
            if len(enabled) > 1:
                targets = " and ".join(sorted(t.target for t in enabled))
                raise SimulationError(
                    f"ambiguous branch at step {current}: {targets} are both enabled")
            moves += 1
            if moves > _MAX_MOVES:
                raise SimulationError("token walk does not terminate")
            current = enabled[0].target
            execute(by_name[current])

    advance()
    for event in trace:
        if event.kind == "sensor":
            state[binding.sensor(event.subject)] = event.value
        elif event.kind == "order":
            state[binding.order(event.subject)] = event.value
        else:
            raise SimulationError(f"unknown event kind {event.kind!r}")
        advance()
    return emitted
