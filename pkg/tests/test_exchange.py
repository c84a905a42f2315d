"""The six-column parameter table: export, request, merge, and its closures."""
from __future__ import annotations

import csv
import io

import pytest

from mfmkit import consistency as cc
from mfmkit import exchange, fixture
from mfmkit import model as mm
from mfmkit.exchange import HEADER, ExchangeError

REQUEST_AFTER_ELECTRICAL_STRIP = """\
element_path,parameter_name,value,unit,document_name,document_path
tjunction-01/control/io_mapping/0,logical_address,,,,
tjunction-01/control/io_mapping/1,logical_address,,,,
tjunction-01/control/io_mapping/2,logical_address,,,,
tjunction-01/control/io_mapping/3,logical_address,,,,
tjunction-01/control/io_mapping/4,logical_address,,,,
tjunction-01/control/io_mapping/5,logical_address,,,,
tjunction-01/control/io_mapping/6,logical_address,,,,
tjunction-01/control/io_mapping/7,logical_address,,,,
tjunction-01/control/platform,bus_coupler_type,,,,
tjunction-01/control/platform,controller_type,,,,
"""


def _table(*rows: tuple[str, ...]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def _strip_electrical(m: mm.ModuleModel) -> mm.ModuleModel:
    for index in range(len(m.control.io_mapping)):
        m = mm.set_parameter(
            m, f"{m.id}/control/io_mapping/{index}", "logical_address", "")
    m = mm.set_parameter(m, f"{m.id}/control/platform", "controller_type", "")
    return mm.set_parameter(m, f"{m.id}/control/platform", "bus_coupler_type", "")


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def test_header_row_is_fixed():
    data = exchange.export_table(fixture.tjunction_model())
    first = data.decode("utf-8").splitlines()[0]
    assert first == ",".join(HEADER)


def test_rows_are_sorted_by_path_then_parameter():
    data = exchange.export_table(fixture.tjunction_model())
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    keys = [(r[0], r[1]) for r in records]
    assert keys == sorted(keys)
    assert len(keys) == len(set(keys))


def test_empty_model_exports_header_only():
    data = exchange.export_table(mm.new_module("e", "Empty"))
    assert data == b"element_path,parameter_name,value,unit,document_name,document_path\n"


def test_conv1_type_row():
    data = exchange.export_table(fixture.tjunction_model())
    lines = data.decode("utf-8").splitlines()
    assert "tjunction-01/components/Conv1,component_type,P100,,," in lines


def test_plain_export_skips_empty_values():
    data = exchange.export_table(_strip_electrical(fixture.tjunction_model()))
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    assert all(r[2] for r in records)


def test_values_with_commas_quotes_and_newlines_are_quoted():
    m = mm.new_module("m", "Mini")
    m = mm.add_static_attribute(m, "note", 'a,b "c"\nd')
    data = exchange.export_table(m)
    assert b'"a,b ""c""\nd"' in data
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    row = [r for r in records if r[1] == "note"]
    assert row[0][2] == 'a,b "c"\nd'


def test_export_is_deterministic():
    m = fixture.tjunction_model()
    assert exchange.export_table(m) == exchange.export_table(m)


def test_document_columns_name_the_assigned_document():
    data = exchange.export_table(fixture.tjunction_model())
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    by_cell = {(r[0], r[1]): r for r in records}
    row = by_cell[("tjunction-01/general", "main_dimensions")]
    assert row[4] == "layout-3d"
    assert row[5] == "srv://docs/layout/tjunction.dae"
    unassigned = by_cell[("tjunction-01/components/Conv1", "latency")]
    assert (unassigned[4], unassigned[5]) == ("", "")


def test_stage_view_lists_that_stages_cells():
    data = exchange.export_table(fixture.tjunction_model(), stage="electrical_eng")
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    parameters = sorted({r[1] for r in records})
    assert parameters == ["bus_coupler_type", "component_type",
                          "controller_type", "logical_address"]
    assert len(records) == 20


def test_class_filter_keeps_one_subtree():
    data = exchange.export_table(fixture.tjunction_model(), cls="components")
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    assert records
    assert all(r[0].startswith("tjunction-01/components/") for r in records)


def test_selector_validation():
    m = fixture.tjunction_model()
    with pytest.raises(ExchangeError, match="mutually exclusive"):
        exchange.export_table(m, stage="electrical_eng", cls="control")
    with pytest.raises(ExchangeError, match="unknown stage"):
        exchange.export_table(m, stage="wiring")
    with pytest.raises(ExchangeError, match="unknown class filter"):
        exchange.export_table(m, cls="widgets")
    with pytest.raises(ExchangeError, match="select by stage"):
        exchange.export_table(m, cls="control", missing_only=True)


def test_missing_only_request_after_electrical_strip():
    m = _strip_electrical(fixture.tjunction_model())
    data = exchange.export_table(m, stage="electrical_eng", missing_only=True)
    assert data.decode("utf-8") == REQUEST_AFTER_ELECTRICAL_STRIP


def test_missing_only_defaults_to_the_final_stage():
    m = _strip_electrical(fixture.tjunction_model())
    assert exchange.export_table(m, missing_only=True) == exchange.export_table(
        m, stage="control_hmi_eng", missing_only=True)


def test_request_rows_carry_units_and_documents():
    m = fixture.tjunction_model()
    m = mm.set_parameter(m, f"{m.id}/general", "main_dimensions", "")
    data = exchange.export_table(m, stage="mechanical_eng", missing_only=True)
    records = list(csv.reader(io.StringIO(data.decode("utf-8"))))[1:]
    assert records == [["tjunction-01/general", "main_dimensions", "", "mm",
                        "layout-3d", "srv://docs/layout/tjunction.dae"]]


# ---------------------------------------------------------------------------
# Import
# ---------------------------------------------------------------------------

def test_full_round_trip_is_identity():
    m = fixture.tjunction_model()
    updated, violations = exchange.import_table(m, exchange.export_table(m))
    assert violations == []
    assert updated == m


def test_import_is_idempotent():
    m = _strip_electrical(fixture.tjunction_model())
    table = _table(
        (f"{m.id}/control/platform", "controller_type", "S7-1500", "", "", ""))
    once, _ = exchange.import_table(m, table)
    twice, violations = exchange.import_table(once, table)
    assert twice == once
    assert violations == []


def test_filled_request_restores_completeness():
    original = fixture.tjunction_model()
    stripped = _strip_electrical(original)
    request = exchange.export_table(stripped, stage="electrical_eng", missing_only=True)
    addresses = {f"{original.id}/control/io_mapping/{i}": entry.logical_address
                 for i, entry in enumerate(original.control.io_mapping)}
    filled = []
    for record in csv.reader(io.StringIO(request.decode("utf-8"))):
        if record[1] == "logical_address":
            record[2] = addresses[record[0]]
        elif record[1] == "controller_type":
            record[2] = "S7-1500"
        elif record[1] == "bus_coupler_type":
            record[2] = "ET200SP"
        filled.append(record)
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator="\n").writerows(filled)
    merged, violations = exchange.import_table(stripped, buffer.getvalue().encode("utf-8"))
    assert violations == []
    assert cc.check_completeness(merged, "control_hmi_eng") == []
    assert merged == original


def test_empty_value_is_a_request_not_a_write():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1", "component_type", "", "", "", ""))
    updated, violations = exchange.import_table(m, table)
    assert violations == []
    assert updated == m


def test_unknown_path_skips_only_that_row():
    m = fixture.tjunction_model()
    table = _table(
        (f"{m.id}/components/Ghost", "component_type", "X1", "", "", ""),
        (f"{m.id}/components/Conv1", "component_type", "P200", "", "", ""),
    )
    updated, violations = exchange.import_table(m, table)
    assert [(v.rule_id, v.element_path) for v in violations] == [
        ("unknown-element", f"{m.id}/components/Ghost")]
    assert mm.resolve(updated, f"{m.id}/components/Conv1/component_type") == "P200"


def test_malformed_path_skips_only_that_row():
    m = fixture.tjunction_model()
    table = _table(
        ("not a path!", "name", "x", "", "", ""),
        (f"{m.id}/components/Conv1", "component_type", "P200", "", "", ""),
    )
    updated, violations = exchange.import_table(m, table)
    assert [(v.rule_id, v.element_path) for v in violations] == [
        ("unknown-path", "not a path!")]
    assert mm.resolve(updated, f"{m.id}/components/Conv1/component_type") == "P200"


def test_unknown_parameter_is_one_violation():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1", "torque", "5", "", "", ""))
    updated, violations = exchange.import_table(m, table)
    assert [(v.rule_id, v.parameter) for v in violations] == [
        ("unknown-parameter", "torque")]
    assert updated == m


def test_invalid_value_is_one_violation():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1", "latency", "fast", "", "", ""))
    updated, violations = exchange.import_table(m, table)
    assert [(v.rule_id, v.parameter) for v in violations] == [("invalid-value", "latency")]
    assert updated == m


def test_parameter_path_is_not_an_element():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1/latency", "latency", "0.2", "", "", ""))
    _updated, violations = exchange.import_table(m, table)
    assert [v.rule_id for v in violations] == ["unknown-element"]


def test_general_grows_requested_attributes():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/general", "color", "RAL5010", "", "", ""))
    updated, violations = exchange.import_table(m, table)
    assert violations == []
    assert mm.resolve(updated, f"{m.id}/general/color") == "RAL5010"


def test_wrong_header_rejected():
    m = fixture.tjunction_model()
    with pytest.raises(ExchangeError, match="wrong header"):
        exchange.import_table(m, b"path,name,value\n")
    with pytest.raises(ExchangeError, match="wrong header"):
        exchange.import_table(m, b"")


def test_short_row_rejected():
    m = fixture.tjunction_model()
    data = _table() + b"a,b,c\n"
    with pytest.raises(ExchangeError, match="row 2: expected 6 columns, found 3"):
        exchange.import_table(m, data)


def test_non_utf8_rejected():
    with pytest.raises(ExchangeError, match="not UTF-8"):
        exchange.import_table(fixture.tjunction_model(), b"\xff\xfe\x00a")


def test_crlf_and_bom_are_tolerated():
    m = _strip_electrical(fixture.tjunction_model())
    table = _table(
        (f"{m.id}/control/platform", "controller_type", "S7-1500", "", "", ""))
    crlf = b"\xef\xbb\xbf" + table.replace(b"\n", b"\r\n")
    updated, violations = exchange.import_table(m, crlf)
    assert violations == []
    assert mm.resolve(updated, f"{m.id}/control/platform/controller_type") == "S7-1500"


def test_document_created_with_inferred_discipline():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1", "component_type", "P100", "",
                    "datasheet-p100", "srv://docs/parts/p100.pdf"))
    updated, violations = exchange.import_table(m, table)
    assert violations == []
    created = [d for d in updated.documents if d.id == "datasheet-p100"]
    assert created == [mm.DocumentReference(
        id="datasheet-p100", discipline="mechanical", stage="mechanical_eng",
        server_path="srv://docs/parts/p100.pdf",
        assigned_element=f"{m.id}/components/Conv1")]


def test_document_refreshed_by_name():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/general", "main_dimensions", "", "",
                    "layout-3d", "srv://docs/layout/tjunction-v2.dae"))
    updated, violations = exchange.import_table(m, table)
    assert violations == []
    doc = [d for d in updated.documents if d.id == "layout-3d"][0]
    assert doc.server_path == "srv://docs/layout/tjunction-v2.dae"
    assert doc.assigned_element == f"{m.id}/general"
    assert doc.discipline == "mechanical"


def test_document_path_without_name_skips_the_whole_row():
    m = fixture.tjunction_model()
    table = _table((f"{m.id}/components/Conv1", "component_type", "P300", "",
                    "", "srv://docs/parts/p300.pdf"))
    updated, violations = exchange.import_table(m, table)
    assert [v.rule_id for v in violations] == ["invalid-value"]
    assert updated == m


def test_filling_an_unmapped_component_creates_its_io_entry():
    m = mm.new_module("m", "Mini")
    m = mm.add_component(m, mm.Component(name="EndStop", kind="sensor",
                                         component_type="LG5"))
    request = exchange.export_table(m, stage="electrical_eng", missing_only=True)
    lines = request.decode("utf-8").splitlines()
    assert "m/components/EndStop,logical_address,,,," in lines
    table = _table(("m/components/EndStop", "logical_address", "%I0.9", "", "", ""))
    updated, violations = exchange.import_table(m, table)
    assert violations == []
    assert updated.control.io_mapping == (mm.IoMapEntry(
        component_path="m/components/EndStop", logical_address="%I0.9",
        variable_name="i_endstop", data_type="BOOL", direction="input"),)
    assert mm.resolve(updated, "m/control/variables/i_endstop") is not None
    again, _ = exchange.import_table(updated, table)
    assert again == updated
