from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from riskbench.corpus import (
    Assessment,
    Qualitative,
    SizeBand,
    band_for,
    default_scale_config,
    load_corpus,
    load_scale_config,
    normalize_assessment,
    parse_register,
    serialize_register,
)
from riskbench.errors import CorpusError, NormalizeError, ParseError

CSV_HEADER = "risk_id,name,description,category,probability,cost_impact,schedule_impact,status,snapshot\n"


def test_parse_csv_two_rows_in_order():
    data = (CSV_HEADER + "u1,Utility relocation,,,,,,,\nd1,Design changes,,,,,,,\n").encode()
    snapshot = parse_register(data, "csv")
    assert [item.name for item in snapshot.items] == ["Utility relocation", "Design changes"]
    assert [item.risk_id for item in snapshot.items] == ["u1", "d1"]


def test_parse_csv_empty_name_names_row():
    data = (CSV_HEADER + "u1,Utility relocation,,,,,,,\nd1,   ,,,,,,,\n").encode()
    with pytest.raises(ParseError, match="row 3"):
        parse_register(data, "csv")


def test_parse_csv_duplicate_risk_id():
    data = (CSV_HEADER + "u1,A,,,,,,,\nu1,B,,,,,,,\n").encode()
    with pytest.raises(ParseError, match="duplicate risk_id"):
        parse_register(data, "csv")


def test_parse_csv_missing_required_column():
    with pytest.raises(ParseError, match="risk_id"):
        parse_register(b"name\nfoo\n", "csv")


def test_parse_csv_band_and_raw_values():
    data = (CSV_HEADER + "r1,A,,,3,0.25,2.0,,\n").encode()
    item = parse_register(data, "csv").items[0]
    assert item.assessment.probability_band == 3
    assert item.assessment.raw_cost == 0.25
    assert item.assessment.raw_schedule == 2.0


def test_parse_csv_band_out_of_range():
    data = (CSV_HEADER + "r1,A,,,7,,,,\n").encode()
    with pytest.raises(ParseError, match="outside 1..5"):
        parse_register(data, "csv")


def test_parse_csv_mixed_snapshot_column():
    data = (CSV_HEADER + "r1,A,,,,,,,0\nr2,B,,,,,,,1\n").encode()
    with pytest.raises(ParseError, match="mixed"):
        parse_register(data, "csv")


def test_parse_json_35_items():
    items = [{"risk_id": f"r{i}", "name": f"risk {i}"} for i in range(35)]
    snapshot = parse_register(json.dumps({"items": items}).encode(), "json")
    assert len(snapshot.items) == 35


def test_parse_json_int_is_band_float_is_raw():
    payload = {"items": [{"risk_id": "r1", "name": "A", "probability": 1, "cost_impact": 1.0}]}
    item = parse_register(json.dumps(payload).encode(), "json").items[0]
    assert item.assessment.probability_band == 1
    assert item.assessment.raw_cost == 1.0


def test_parse_unknown_format():
    with pytest.raises(ParseError, match="unknown register format"):
        parse_register(b"", "xml")


def test_round_trip_stability():
    data = (
        CSV_HEADER
        + "u1,Utility relocation,desc here,utilities,3,2,1,Reg,0\n"
        + "d1,Design changes,,design,0.4,,,Hap,0\n"
    ).encode()
    first = parse_register(data, "csv")
    second = parse_register(serialize_register(first), "json")
    assert first == second
    assert serialize_register(first) == serialize_register(second)


def test_band_for_boundaries():
    cfg = default_scale_config()
    assert band_for(0.0, cfg.probability_band_edges) == 1
    assert band_for(1.0, cfg.probability_band_edges) == 5
    # value exactly at an edge stays in the lower band (upper-inclusive)
    assert band_for(0.5, cfg.probability_band_edges) == 3
    assert band_for(0.005, cfg.cost_band_edges) == 2


def test_normalize_probability_extremes():
    cfg = default_scale_config()
    low = normalize_assessment(Assessment(raw_probability=0.0), None, cfg)
    high = normalize_assessment(Assessment(raw_probability=1.0), None, cfg)
    assert low.probability_band == 1
    assert high.probability_band == 5


def test_normalize_cost_at_edge():
    cfg = default_scale_config()
    out = normalize_assessment(Assessment(raw_cost=5.0), 1000.0, cfg)
    assert out.cost_band == 2


def test_normalize_requires_project_value_for_cost():
    cfg = default_scale_config()
    with pytest.raises(NormalizeError, match="project value"):
        normalize_assessment(Assessment(raw_cost=1.0), None, cfg)


def test_normalize_nothing_to_normalize():
    cfg = default_scale_config()
    with pytest.raises(NormalizeError):
        normalize_assessment(Assessment(probability_band=3), None, cfg)


def test_normalize_fills_qualitative_from_matrix():
    cfg = default_scale_config()
    out = normalize_assessment(
        Assessment(raw_probability=0.95, cost_band=4, schedule_band=1), None, cfg
    )
    assert out.probability_band == 5
    assert out.qualitative_cost is Qualitative.HIGH  # 5*4 = 20 >= 15
    assert out.qualitative_schedule is Qualitative.LOW  # 5*1 = 5 < 6


@given(
    a=st.floats(min_value=0, max_value=1),
    b=st.floats(min_value=0, max_value=1),
)
def test_normalize_probability_monotone(a, b):
    cfg = default_scale_config()
    if a > b:
        a, b = b, a
    band_a = normalize_assessment(Assessment(raw_probability=a), None, cfg).probability_band
    band_b = normalize_assessment(Assessment(raw_probability=b), None, cfg).probability_band
    assert band_a <= band_b
    assert 1 <= band_a <= 5 and 1 <= band_b <= 5


@given(
    months=st.floats(min_value=0, max_value=100),
    cost=st.floats(min_value=0, max_value=1000),
)
def test_normalize_bands_always_in_range(months, cost):
    cfg = default_scale_config()
    out = normalize_assessment(
        Assessment(raw_schedule=months, raw_cost=cost), 1000.0, cfg
    )
    assert out.schedule_band in (1, 2, 3, 4, 5)
    assert out.cost_band in (1, 2, 3, 4, 5)


def test_assessment_band_validation():
    with pytest.raises(CorpusError):
        Assessment(probability_band=0)
    with pytest.raises(CorpusError):
        Assessment(raw_probability=1.5)


def test_size_band_consistency():
    assert SizeBand.for_value(166) is SizeBand.UNDER_500M
    assert SizeBand.for_value(814) is SizeBand.M500_TO_1B
    assert SizeBand.for_value(4922) is SizeBand.OVER_1B


def test_load_corpus_empty_manifest(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text('{"projects": []}')
    corpus = load_corpus(manifest)
    assert len(corpus) == 0


def test_load_corpus_missing_register_names_path(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "projects": [{
            "id": "p1", "jurisdiction": "CA", "delivery_method": "DB",
            "project_type": "Highway", "size_band": "under_500M",
            "registers": [{"ordinal": 0, "path": "nope.csv"}],
        }]
    }))
    with pytest.raises(CorpusError, match="nope.csv"):
        load_corpus(manifest)


def test_load_corpus_size_band_inconsistency(tmp_path):
    register = tmp_path / "r.csv"
    register.write_text(CSV_HEADER + "r1,A,,,,,,,\n")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "projects": [{
            "id": "p1", "jurisdiction": "CA", "delivery_method": "DB",
            "project_type": "Highway", "size_band": "under_500M",
            "contract_value_musd": 2000,
            "registers": [{"ordinal": 0, "path": "r.csv"}],
        }]
    }))
    with pytest.raises(CorpusError, match="size_band"):
        load_corpus(manifest)


def test_load_corpus_table19_fixture(expost_manifest):
    corpus = load_corpus(expost_manifest)
    assert len(corpus) == 11
    assert [p.project_id for p in corpus.projects] == [str(i) for i in range(1, 12)]
    project_1 = corpus.project("1")
    assert len(project_1.snapshots) == 5
    assert len(project_1.register.items) == 32  # ex-ante register


def test_load_corpus_normalizes_raw_values(tmp_path):
    register = tmp_path / "r.csv"
    register.write_text(CSV_HEADER + "r1,A,,,0.95,12.0,4.0,,\n")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "projects": [{
            "id": "p1", "jurisdiction": "CA", "delivery_method": "DB",
            "project_type": "Highway", "size_band": "over_1B",
            "contract_value_musd": 1200,
            "registers": [{"ordinal": 0, "path": "r.csv"}],
        }]
    }))
    item = load_corpus(manifest).project("p1").register.items[0]
    assert item.assessment.probability_band == 5
    assert item.assessment.cost_band == 3  # 12/1200 is exactly the 1% edge
    assert item.assessment.schedule_band == 3  # 4 months -> (3, 6]
    assert item.assessment.qualitative_cost is Qualitative.HIGH


def test_load_scale_config_round_trip(tmp_path):
    cfg = default_scale_config()
    path = tmp_path / "scales.json"
    path.write_text(json.dumps({
        "probability_band_edges": list(cfg.probability_band_edges),
        "cost_band_edges": list(cfg.cost_band_edges),
        "schedule_band_edges": list(cfg.schedule_band_edges),
        "risk_matrix": {f"{p},{i}": q.value for (p, i), q in cfg.risk_matrix.items()},
    }))
    assert load_scale_config(path) == cfg
