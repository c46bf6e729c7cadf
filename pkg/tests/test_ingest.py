from __future__ import annotations

import logging
from datetime import timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import T0
from greenconstraints.ingest import (
    CarbonSample,
    EnergySample,
    IngestError,
    TrafficSample,
    format_timestamp,
    load_carbon_samples,
    load_energy_samples,
    load_traffic_samples,
    parse_timestamp,
    write_carbon_samples,
    write_energy_samples,
    write_traffic_samples,
)
from greenconstraints.scenarios import fixture_dir


def test_timestamps():
    assert parse_timestamp("2025-06-01T00:00:00Z") == T0
    assert parse_timestamp("2025-06-01T00:00:00") == T0
    assert parse_timestamp("2025-06-01T02:00:00+02:00") == T0
    assert format_timestamp(T0) == "2025-06-01T00:00:00Z"


def test_fixture_files_load():
    d = fixture_dir("s1")
    energy = load_energy_samples(d / "energy.csv")
    assert len(energy[("frontend", "large")]) == 24
    traffic = load_traffic_samples(d / "traffic.csv")
    assert ("frontend", "large", "productcatalog") in traffic
    carbon = load_carbon_samples(d / "carbon.csv")
    assert set(carbon) == {"france", "spain", "germany", "greatbritain", "italy"}
    ts = [s.t for s in carbon["italy"]]
    assert ts == sorted(ts)


def test_rows_are_sorted_per_key(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text(
        "service,flavour,timestamp,energy_kwh\n"
        "a,x,2025-06-01T02:00:00Z,3\n"
        "a,x,2025-06-01T00:00:00Z,1\n"
        "\n"
        "a,x,2025-06-01T01:00:00Z,2\n"
    )
    assert [s.energy for s in load_energy_samples(p)[("a", "x")]] == [1.0, 2.0, 3.0]


@pytest.mark.parametrize(
    "body, line",
    [
        ("service,flavor,timestamp,energy_kwh\n", 1),
        ("service,flavour,timestamp,energy_kwh\na,x,2025-06-01T00:00:00Z,-1\n", 2),
        ("service,flavour,timestamp,energy_kwh\na,x,yesterday,1\n", 2),
        ("service,flavour,timestamp,energy_kwh\na,x,2025-06-01T00:00:00Z\n", 2),
        ("service,flavour,timestamp,energy_kwh\na,x,2025-06-01T00:00:00Z,1\n,x,2025-06-01T01:00:00Z,1\n", 3),
        ("service,flavour,timestamp,energy_kwh\na,x,2025-06-01T00:00:00Z,nan\n", 2),
    ],
)
def test_malformed_energy_rows_name_the_line(tmp_path, body, line):
    p = tmp_path / "e.csv"
    p.write_text(body)
    with pytest.raises(IngestError) as info:
        load_energy_samples(p)
    assert info.value.line == line
    assert str(p) in str(info.value)


def test_duplicate_timestamp_rejected(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("node,timestamp,ci_gco2_per_kwh\nn,2025-06-01T00:00:00Z,1\nn,2025-06-01T00:00:00Z,2\n")
    with pytest.raises(IngestError, match="duplicate"):
        load_carbon_samples(p)


def test_traffic_self_loop_rejected(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text(
        "source,source_flavour,destination,timestamp,request_volume_per_hour,request_size_gb\n"
        "a,x,a,2025-06-01T00:00:00Z,10,0.1\n"
    )
    with pytest.raises(IngestError):
        load_traffic_samples(p)


def test_missing_and_empty_files(tmp_path):
    with pytest.raises(IngestError, match="cannot open"):
        load_energy_samples(tmp_path / "absent.csv")
    p = tmp_path / "empty.csv"
    p.write_text("")
    assert load_energy_samples(p) == {}


def test_unknown_ids_are_logged(tmp_path, caplog):
    p = tmp_path / "c.csv"
    write_carbon_samples(p, [CarbonSample("mars", T0, 1.0)])
    with caplog.at_level(logging.WARNING):
        assert "mars" in load_carbon_samples(p, known={"earth"})
    assert "unknown node mars" in caplog.text


finite = st.floats(min_value=0, max_value=1e9, allow_nan=False, allow_infinity=False)


@given(st.lists(finite, min_size=1, max_size=30))
def test_write_read_round_trip(tmp_path_factory, values):
    d = tmp_path_factory.mktemp("rt")
    times = [T0 + timedelta(hours=i) for i in range(len(values))]
    energy = [EnergySample("s", "f", t, v) for t, v in zip(times, values)]
    traffic = [TrafficSample("s", "f", "z", t, v, v / 7) for t, v in zip(times, values)]
    carbon = [CarbonSample("n", t, v) for t, v in zip(times, values)]
    write_energy_samples(d / "e.csv", energy)
    write_traffic_samples(d / "t.csv", traffic)
    write_carbon_samples(d / "c.csv", carbon)
    assert load_energy_samples(d / "e.csv") == {("s", "f"): energy}
    assert load_traffic_samples(d / "t.csv") == {("s", "f", "z"): traffic}
    assert load_carbon_samples(d / "c.csv") == {"n": carbon}
