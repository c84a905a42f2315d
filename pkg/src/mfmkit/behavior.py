"""Logistic behavior graphs: parsing, IML conversion, and token simulation.

A behavior graph is a guarded step graph describing one material-flow pass
through a module. The line grammar (see docs/behavior.md):

    graph <name>
    step <id> "<description>" [when <cond>, ...] [do <action>, ...]
    edge <a> -> <b>
    loop <a> -> <b>

Conditions: `<sensor> on`, `<sensor> off`, `order <port>`. Actions:
`activate <actuator>`, `deactivate <actuator>`. `edge` lines must form an
acyclic graph with exactly one entry step; a `loop` line may return a
terminal step to the entry and is kept out of the one-pass structure.

Guards live on the step they lead into: a token advances along an edge when
every guard of the target step holds in the current level state.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

CONDITION_KINDS = ("sensor_true", "sensor_false", "order_request")
ACTION_KINDS = ("activate", "deactivate")

#: Upper bound on token moves per simulation; beyond it the walk is treated
#: as nonterminating (possible with loop edges and latched order requests).
_MAX_MOVES = 10_000


class BehaviorParseError(ValueError):
    """Unreadable behavior text or trace text; message carries the line."""


class BehaviorGraphError(ValueError):
    """Structurally invalid graph (entry, cycles, unknown ids)."""


class SimulationError(ValueError):
    """Token walk failure: ambiguous branch or nonterminating cascade."""


@dataclass(frozen=True, slots=True)
class Condition:
    kind: str
    subject: str


@dataclass(frozen=True, slots=True)
class Action:
    kind: str
    subject: str


@dataclass(frozen=True, slots=True)
class BehaviorStep:
    id: str
    description: str = ""
    guards: tuple[Condition, ...] = ()
    actions: tuple[Action, ...] = ()


@dataclass(frozen=True, slots=True)
class BehaviorGraph:
    id: str = ""
    steps: tuple[BehaviorStep, ...] = ()
    edges: tuple[tuple[str, str], ...] = ()
    loop_edges: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True, slots=True)
class TraceEvent:
    kind: str  # "sensor" | "order"
    subject: str
    value: bool = True


@dataclass(frozen=True, slots=True)
class ImlEntry:
    step_id: str
    description: str
    guard_expr: str
    guards: tuple[Condition, ...]
    actions: tuple[Action, ...]
    predecessors: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class ImlDocument:
    entries: tuple[ImlEntry, ...]
    source_graph_id: str = ""
    loop_edges: tuple[tuple[str, str], ...] = ()


def format_condition(condition: Condition) -> str:
    if condition.kind == "sensor_true":
        return f"{condition.subject}=on"
    if condition.kind == "sensor_false":
        return f"{condition.subject}=off"
    return f"order({condition.subject})"


def format_action(action: Action) -> str:
    return f"{action.kind} {action.subject}"


def guard_expr(guards: tuple[Condition, ...]) -> str:
    """Normalized conjunction: sorted terms joined by AND, TRUE when empty."""
    if not guards:
        return "TRUE"
    return " AND ".join(sorted(format_condition(g) for g in guards))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _parse_condition(text: str, lineno: int) -> Condition:
    parts = text.split()
    if len(parts) == 2 and parts[0] == "order":
        return Condition("order_request", parts[1])
    if len(parts) == 2 and parts[1] in ("on", "off"):
        kind = "sensor_true" if parts[1] == "on" else "sensor_false"
        return Condition(kind, parts[0])
    raise BehaviorParseError(
        f"line {lineno}: bad condition {text!r}; expected '<sensor> on|off' or 'order <port>'")


def _parse_action(text: str, lineno: int) -> Action:
    parts = text.split()
    if len(parts) == 2 and parts[0] in ACTION_KINDS:
        return Action(parts[0], parts[1])
    raise BehaviorParseError(
        f"line {lineno}: bad action {text!r}; expected 'activate <name>' or 'deactivate <name>'")


def _parse_step(rest: str, lineno: int) -> BehaviorStep:
    parts = rest.split(None, 1)
    if len(parts) != 2 or not parts[1].startswith('"'):
        raise BehaviorParseError(f'line {lineno}: expected: step <id> "<description>" ...')
    step_id, remainder = parts
    closing = remainder.find('"', 1)
    if closing < 0:
        raise BehaviorParseError(f"line {lineno}: unterminated description string")
    description = remainder[1:closing]
    tail = remainder[closing + 1:].strip()

    guards: tuple[Condition, ...] = ()
    actions: tuple[Action, ...] = ()
    if tail:
        do_clause = ""
        if tail.startswith("do "):
            do_clause = tail[3:]
            tail = ""
        elif " do " in tail:
            tail, do_clause = tail.split(" do ", 1)
        if tail:
            if not tail.startswith("when "):
                raise BehaviorParseError(
                    f"line {lineno}: expected 'when' or 'do' after description, got {tail!r}")
            guards = tuple(
                _parse_condition(c.strip(), lineno) for c in tail[5:].split(","))
        if do_clause:
            actions = tuple(_parse_action(a.strip(), lineno) for a in do_clause.split(","))
    return BehaviorStep(id=step_id, description=description, guards=guards, actions=actions)


def _parse_edge(rest: str, lineno: int) -> tuple[str, str]:
    parts = rest.split()
    if len(parts) != 3 or parts[1] != "->":
        raise BehaviorParseError(f"line {lineno}: expected: edge <a> -> <b>")
    return parts[0], parts[2]


def parse_behavior(text: str) -> BehaviorGraph:
    """Parse behavior text and validate the graph invariants."""
    graph_id = ""
    steps: list[BehaviorStep] = []
    step_lines: dict[str, int] = {}
    edges: list[tuple[str, str]] = []
    loops: list[tuple[str, str]] = []
    edge_lines: list[tuple[tuple[str, str], int, bool]] = []
    seen_graph_line = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "graph":
            if seen_graph_line:
                raise BehaviorParseError(f"line {lineno}: duplicate graph line")
            if not rest or len(rest.split()) != 1:
                raise BehaviorParseError(f"line {lineno}: expected: graph <name>")
            graph_id = rest
            seen_graph_line = True
        elif keyword == "step":
            step = _parse_step(rest, lineno)
            if step.id in step_lines:
                raise BehaviorParseError(
                    f"line {lineno}: duplicate step id {step.id!r} "
                    f"(first declared on line {step_lines[step.id]})")
            step_lines[step.id] = lineno
            steps.append(step)
        elif keyword == "edge":
            pair = _parse_edge(rest, lineno)
            edges.append(pair)
            edge_lines.append((pair, lineno, False))
        elif keyword == "loop":
            pair = _parse_edge(rest, lineno)
            loops.append(pair)
            edge_lines.append((pair, lineno, True))
        else:
            raise BehaviorParseError(f"line {lineno}: unknown keyword {keyword!r}")

    known = set(step_lines)
    for (source, target), lineno, _is_loop in edge_lines:
        if source not in known:
            raise BehaviorParseError(f"line {lineno}: unknown edge source {source!r}")
        if target not in known:
            raise BehaviorParseError(f"line {lineno}: unknown edge target {target!r}")
    seen_pairs: set[tuple[str, str]] = set()
    for (pair, lineno, _is_loop) in edge_lines:
        if pair in seen_pairs:
            raise BehaviorParseError(
                f"line {lineno}: duplicate edge {pair[0]} -> {pair[1]}")
        seen_pairs.add(pair)

    graph = BehaviorGraph(
        id=graph_id, steps=tuple(steps), edges=tuple(edges), loop_edges=tuple(loops))
    validate_graph(graph)
    return graph


def validate_graph(graph: BehaviorGraph) -> None:
    """Check the structural invariants; raise BehaviorGraphError otherwise."""
    ids = [s.id for s in graph.steps]
    known = set(ids)
    if len(known) != len(ids):
        raise BehaviorGraphError("duplicate step ids")
    for source, target in graph.edges + graph.loop_edges:
        if source not in known or target not in known:
            raise BehaviorGraphError(f"edge {source} -> {target} references unknown steps")

    indegree = {step_id: 0 for step_id in ids}
    for _source, target in graph.edges:
        indegree[target] += 1
    entries = [step_id for step_id in ids if indegree[step_id] == 0]
    if not graph.steps:
        raise BehaviorGraphError("graph has no steps")
    if len(entries) != 1:
        raise BehaviorGraphError(
            f"expected exactly one entry step, found {len(entries)}"
            + (f" ({', '.join(entries)})" if entries else ""))

    # Kahn pass doubles as the cycle check.
    order = _topological_ids(graph)
    if len(order) != len(ids):
        raise BehaviorGraphError("edges form a cycle")

    outgoing: dict[str, int] = {step_id: 0 for step_id in ids}
    for source, _target in graph.edges:
        outgoing[source] += 1
    entry = entries[0]
    for source, target in graph.loop_edges:
        if target != entry:
            raise BehaviorGraphError(
                f"loop {source} -> {target} must return to the entry step {entry!r}")
        if outgoing[source]:
            raise BehaviorGraphError(
                f"loop source {source!r} must be a terminal step")


def entry_step(graph: BehaviorGraph) -> BehaviorStep:
    targets = {target for _source, target in graph.edges}
    for step in graph.steps:
        if step.id not in targets:
            return step
    raise BehaviorGraphError("graph has no entry step")


def _topological_ids(graph: BehaviorGraph) -> list[str]:
    indegree = {step.id: 0 for step in graph.steps}
    successors: dict[str, list[str]] = {step.id: [] for step in graph.steps}
    for source, target in graph.edges:
        indegree[target] += 1
        successors[source].append(target)
    heap = [step_id for step_id, degree in indegree.items() if degree == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        current = heapq.heappop(heap)
        order.append(current)
        for nxt in successors[current]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, nxt)
    return order


# ---------------------------------------------------------------------------
# IML conversion
# ---------------------------------------------------------------------------

def to_iml(graph: BehaviorGraph) -> ImlDocument:
    """Flatten the graph into topological order (ties by step id).

    Entries keep the structured guards and actions next to the normalized
    guard expression, and record their predecessors, so the conversion is
    lossless.
    """
    validate_graph(graph)
    by_id = {step.id: step for step in graph.steps}
    predecessors: dict[str, list[str]] = {step.id: [] for step in graph.steps}
    for source, target in graph.edges:
        predecessors[target].append(source)
    entries = tuple(
        ImlEntry(
            step_id=step_id,
            description=by_id[step_id].description,
            guard_expr=guard_expr(by_id[step_id].guards),
            guards=by_id[step_id].guards,
            actions=by_id[step_id].actions,
            predecessors=tuple(sorted(predecessors[step_id])),
        )
        for step_id in _topological_ids(graph)
    )
    return ImlDocument(
        entries=entries, source_graph_id=graph.id, loop_edges=graph.loop_edges)


# ---------------------------------------------------------------------------
# Token simulation
# ---------------------------------------------------------------------------

class _LevelState:
    """Level-triggered signal state: sensor levels plus latched orders."""

    __slots__ = ("sensors", "orders")

    def __init__(self) -> None:
        self.sensors: dict[str, bool] = {}
        self.orders: set[str] = set()

    def apply(self, event: TraceEvent) -> None:
        if event.kind == "sensor":
            self.sensors[event.subject] = event.value
        elif event.kind == "order":
            if event.value:
                self.orders.add(event.subject)
            else:
                self.orders.discard(event.subject)
        else:
            raise SimulationError(f"unknown event kind {event.kind!r}")

    def satisfies(self, condition: Condition) -> bool:
        if condition.kind == "sensor_true":
            return self.sensors.get(condition.subject, False)
        if condition.kind == "sensor_false":
            return not self.sensors.get(condition.subject, False)
        return condition.subject in self.orders


def simulate(graph: BehaviorGraph, trace: list[TraceEvent]) -> list[Action]:
    """Walk one token through the graph, emitting actions of entered steps.

    The token starts in the entry step. After each event (and once before the
    first), it advances along an outgoing edge whenever all guards of that
    edge's target hold, repeatedly, until no target is satisfied. Two or more
    satisfied targets at once raise SimulationError; so does a walk that
    exceeds the move budget (possible only with loop edges).
    """
    validate_graph(graph)
    by_id = {step.id: step for step in graph.steps}
    successors: dict[str, list[str]] = {step.id: [] for step in graph.steps}
    for source, target in graph.edges + graph.loop_edges:
        successors[source].append(target)

    state = _LevelState()
    current = entry_step(graph).id
    emitted: list[Action] = []
    moves = 0

    def advance() -> None:
        nonlocal current, moves
        while True:
            satisfied = [
                target for target in successors[current]
                if all(state.satisfies(g) for g in by_id[target].guards)
            ]
            if not satisfied:
                return
            if len(satisfied) > 1:
                raise SimulationError(
                    f"ambiguous branch at step {current}: "
                    f"{' and '.join(sorted(satisfied))} are both enabled")
            moves += 1
            if moves > _MAX_MOVES:
                raise SimulationError("token walk does not terminate")
            current = satisfied[0]
            emitted.extend(by_id[current].actions)

    advance()
    for event in trace:
        state.apply(event)
        advance()
    return emitted


# ---------------------------------------------------------------------------
# Trace files
# ---------------------------------------------------------------------------

def parse_trace(text: str) -> list[TraceEvent]:
    """Parse a trace file: `sensor <name> on|off` / `order <port>` lines."""
    events: list[TraceEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "sensor" and len(parts) == 3 and parts[2] in ("on", "off"):
            events.append(TraceEvent("sensor", parts[1], parts[2] == "on"))
        elif parts[0] == "order" and len(parts) == 2:
            events.append(TraceEvent("order", parts[1]))
        else:
            raise BehaviorParseError(
                f"line {lineno}: bad trace event {line!r}; "
                f"expected 'sensor <name> on|off' or 'order <port>'")
    return events


def format_event(action: Action) -> str:
    return format_action(action)
