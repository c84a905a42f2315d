"""Behavior graph parsing, IML conversion, and token simulation."""
from __future__ import annotations

from importlib import resources

import pytest
from hypothesis import given, strategies as st

from mfmkit import behavior as bh
from mfmkit.behavior import (
    Action,
    BehaviorGraph,
    BehaviorGraphError,
    BehaviorParseError,
    BehaviorStep,
    Condition,
    SimulationError,
    TraceEvent,
)


def _fixture_text() -> str:
    return resources.files("mfmkit").joinpath("data/tjunction.bhv").read_text("utf-8")


def _fixture_graph() -> BehaviorGraph:
    return bh.parse_behavior(_fixture_text())


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_fixture_structure():
    graph = _fixture_graph()
    assert graph.id == "tjunction-route"
    assert [s.id for s in graph.steps] == ["1.0", "1.1", "1.2", "1.3", "2.1", "2.2", "2.3"]
    assert graph.edges == (
        ("1.0", "1.1"), ("1.1", "1.2"), ("1.2", "1.3"),
        ("1.0", "2.1"), ("2.1", "2.2"), ("2.2", "2.3"))
    assert graph.loop_edges == ()


def test_parse_fixture_guards_and_actions():
    steps = {s.id: s for s in _fixture_graph().steps}
    assert steps["1.0"].guards == () and steps["1.0"].actions == ()
    assert steps["1.1"].guards == (
        Condition("sensor_true", "LB_in"), Condition("order_request", "output_1"))
    assert steps["1.2"].actions == (Action("activate", "Conv1"),)
    assert steps["2.3"].guards == (Condition("sensor_true", "LB_out2"),)
    assert steps["2.3"].actions == (
        Action("deactivate", "Conv1"), Action("deactivate", "Conv2"),
        Action("deactivate", "Switch"))


def test_parse_single_step():
    graph = bh.parse_behavior('step only "the lone step"\n')
    assert len(graph.steps) == 1
    assert graph.edges == ()
    assert bh.entry_step(graph).id == "only"


def test_parse_edge_to_missing_step_fails_with_line():
    text = 'step a "first"\nedge a -> b\n'
    with pytest.raises(BehaviorParseError, match="line 2.*'b'"):
        bh.parse_behavior(text)


def test_parse_duplicate_step_id_fails_with_both_lines():
    text = 'step a "one"\nstep a "again"\n'
    with pytest.raises(BehaviorParseError, match="line 2.*line 1"):
        bh.parse_behavior(text)


def test_parse_two_entries_fail():
    text = 'step a "x"\nstep b "y"\nstep c "z"\nedge a -> c\nedge b -> c\n'
    with pytest.raises(BehaviorGraphError, match="entry"):
        bh.parse_behavior(text)


def test_parse_cycle_fails():
    text = 'step a "x"\nstep b "y"\nedge a -> b\nedge b -> a\n'
    with pytest.raises(BehaviorGraphError):
        bh.parse_behavior(text)


def test_parse_duplicate_edge_fails():
    text = 'step a "x"\nstep b "y"\nedge a -> b\nedge a -> b\n'
    with pytest.raises(BehaviorParseError, match="line 4"):
        bh.parse_behavior(text)


def test_parse_comments_and_blank_lines():
    text = '# heading\n\nstep a "uses # inside" # trailing note\n'
    graph = bh.parse_behavior(text)
    assert graph.steps[0].description == "uses # inside"


def test_parse_bad_condition_and_action():
    with pytest.raises(BehaviorParseError, match="condition"):
        bh.parse_behavior('step a "x" when LB_in maybe\n')
    with pytest.raises(BehaviorParseError, match="action"):
        bh.parse_behavior('step a "x" do explode Conv1\n')
    with pytest.raises(BehaviorParseError, match="keyword"):
        bh.parse_behavior("node a\n")


def test_loop_edge_back_to_entry_is_accepted():
    text = 'step a "entry"\nstep b "end" when S on\nedge a -> b\nloop b -> a\n'
    graph = bh.parse_behavior(text)
    assert graph.edges == (("a", "b"),)
    assert graph.loop_edges == (("b", "a"),)
    assert bh.entry_step(graph).id == "a"


def test_loop_edge_must_target_entry_from_terminal():
    base = 'step a "x"\nstep b "y" when S on\nstep c "z" when T on\nedge a -> b\nedge b -> c\n'
    with pytest.raises(BehaviorGraphError, match="entry"):
        bh.parse_behavior(base + "loop c -> b\n")
    with pytest.raises(BehaviorGraphError, match="terminal"):
        bh.parse_behavior(base + "loop b -> a\n")


# ---------------------------------------------------------------------------
# IML
# ---------------------------------------------------------------------------

def test_to_iml_fixture_order_and_entry():
    iml = bh.to_iml(_fixture_graph())
    assert [e.step_id for e in iml.entries] == ["1.0", "1.1", "1.2", "1.3", "2.1", "2.2", "2.3"]
    assert iml.entries[0].actions == ()
    assert iml.entries[0].predecessors == ()
    assert iml.source_graph_id == "tjunction-route"


def test_to_iml_branches_follow_their_fork():
    order = [e.step_id for e in bh.to_iml(_fixture_graph()).entries]
    assert order.index("1.0") < order.index("1.1")
    assert order.index("1.0") < order.index("2.1")


def test_to_iml_guard_expressions_are_normalized():
    entries = {e.step_id: e for e in bh.to_iml(_fixture_graph()).entries}
    assert entries["1.0"].guard_expr == "TRUE"
    assert entries["1.1"].guard_expr == "LB_in=on AND order(output_1)"
    assert entries["2.3"].guard_expr == "LB_out2=on"


def test_to_iml_is_lossless():
    graph = _fixture_graph()
    iml = bh.to_iml(graph)
    by_id = {s.id: s for s in graph.steps}
    for entry in iml.entries:
        step = by_id[entry.step_id]
        assert entry.guards == step.guards
        assert entry.actions == step.actions
        assert entry.description == step.description
    edges = {(p, e.step_id) for e in iml.entries for p in e.predecessors}
    assert edges == set(graph.edges)


def test_to_iml_rejects_empty_graph():
    with pytest.raises(BehaviorGraphError, match="no steps"):
        bh.to_iml(BehaviorGraph())


def test_guard_expr_off_terms():
    expr = bh.guard_expr((Condition("sensor_false", "LB_in"), Condition("sensor_true", "S")))
    assert expr == "LB_in=off AND S=on"


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _route_1() -> list[TraceEvent]:
    return [TraceEvent("sensor", "LB_in", True), TraceEvent("order", "output_1"),
            TraceEvent("sensor", "LB_out1", True)]


def _route_2() -> list[TraceEvent]:
    return [TraceEvent("sensor", "LB_in", True), TraceEvent("order", "output_2"),
            TraceEvent("sensor", "LB_out2", True)]


def test_simulate_route_1():
    actions = bh.simulate(_fixture_graph(), _route_1())
    assert [bh.format_action(a) for a in actions] == ["activate Conv1", "deactivate Conv1"]


def test_simulate_route_2():
    actions = bh.simulate(_fixture_graph(), _route_2())
    assert [bh.format_action(a) for a in actions] == [
        "activate Conv1", "activate Conv2", "activate Switch",
        "deactivate Conv1", "deactivate Conv2", "deactivate Switch"]


def test_simulate_empty_trace_rests_at_entry():
    assert bh.simulate(_fixture_graph(), []) == []


def test_simulate_order_before_arrival():
    trace = [TraceEvent("order", "output_1"), TraceEvent("sensor", "LB_in", True),
             TraceEvent("sensor", "LB_out1", True)]
    actions = bh.simulate(_fixture_graph(), trace)
    assert [bh.format_action(a) for a in actions] == ["activate Conv1", "deactivate Conv1"]


def test_simulate_ambiguous_branch_is_an_error():
    trace = [TraceEvent("order", "output_1"), TraceEvent("order", "output_2"),
             TraceEvent("sensor", "LB_in", True)]
    with pytest.raises(SimulationError, match="ambiguous"):
        bh.simulate(_fixture_graph(), trace)


def test_simulate_is_deterministic():
    graph = _fixture_graph()
    first = "\n".join(bh.format_action(a) for a in bh.simulate(graph, _route_2()))
    second = "\n".join(bh.format_action(a) for a in bh.simulate(graph, _route_2()))
    assert first == second


def test_simulate_sensor_off_guard():
    text = ('step a "entry"\n'
            'step b "gate clear" when S off do activate A\n'
            "edge a -> b\n")
    graph = bh.parse_behavior(text)
    # S starts unknown -> treated as off, the initial cascade already fires.
    assert bh.simulate(graph, []) == [Action("activate", "A")]
    held = bh.simulate(graph, [TraceEvent("sensor", "S", True)])
    assert held == [Action("activate", "A")]


def test_simulate_level_semantics_not_edge():
    text = ('step a "entry"\n'
            'step b "first" when S on\n'
            'step c "second" when S on do activate A\n'
            "edge a -> b\nedge b -> c\n")
    graph = bh.parse_behavior(text)
    # one event, two advances: the level stays on, so the cascade walks both.
    assert bh.simulate(graph, [TraceEvent("sensor", "S", True)]) == [Action("activate", "A")]


def test_simulate_nonterminating_loop_is_an_error():
    text = 'step a "entry"\nstep b "bounce"\nedge a -> b\nloop b -> a\n'
    graph = bh.parse_behavior(text)
    with pytest.raises(SimulationError, match="terminate"):
        bh.simulate(graph, [])


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

def test_parse_trace_files():
    t1 = resources.files("mfmkit").joinpath("data/traces/route-1.trace").read_text("utf-8")
    assert bh.parse_trace(t1) == _route_1()
    assert bh.parse_trace("sensor S off\norder p\n") == [
        TraceEvent("sensor", "S", False), TraceEvent("order", "p", True)]


def test_parse_trace_bad_line():
    with pytest.raises(BehaviorParseError, match="line 2"):
        bh.parse_trace("sensor S on\npress the button\n")


# ---------------------------------------------------------------------------
# Properties over random one-entry DAGs
# ---------------------------------------------------------------------------

@st.composite
def _graphs(draw):
    n = draw(st.integers(min_value=1, max_value=7))
    parents = [draw(st.integers(min_value=0, max_value=i - 1)) for i in range(1, n)]
    extra = draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] < p[1]),
        max_size=5, unique=True))
    steps = []
    for i in range(n):
        guards = tuple(
            Condition("sensor_true", f"S{j}")
            for j in range(draw(st.integers(min_value=0, max_value=2))))
        actions = tuple(
            Action("activate", f"A{j}")
            for j in range(draw(st.integers(min_value=0, max_value=2))))
        steps.append(BehaviorStep(id=f"s{i}", description=f"step {i}",
                                  guards=guards, actions=actions))
    edges = {(f"s{p}", f"s{i + 1}") for i, p in enumerate(parents)}
    edges.update((f"s{a}", f"s{b}") for a, b in extra)
    return BehaviorGraph(id="random", steps=tuple(steps), edges=tuple(sorted(edges)))


@given(_graphs())
def test_iml_is_topologically_sound(graph):
    iml = bh.to_iml(graph)
    index = {e.step_id: i for i, e in enumerate(iml.entries)}
    for entry in iml.entries:
        for pred in entry.predecessors:
            assert index[pred] < index[entry.step_id]


@given(_graphs())
def test_iml_conserves_actions(graph):
    iml = bh.to_iml(graph)
    graph_actions = sorted((a.kind, a.subject) for s in graph.steps for a in s.actions)
    iml_actions = sorted((a.kind, a.subject) for e in iml.entries for a in e.actions)
    assert graph_actions == iml_actions
