from __future__ import annotations

import json

import pytest

from riskbench.cli import main
from riskbench.resources import data_path

WORD_VECTORS = str(data_path("embeddings", "reference_word_vectors.txt"))
SENTENCE_VECTORS = str(data_path("embeddings", "reference_sentence_vectors.jsonl"))


@pytest.fixture(scope="module")
def manifest():
    return str(data_path("fixtures", "expost", "manifest.json"))


def run(argv):
    return main(argv)


def read_report(path):
    return json.loads(path.read_text())


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        run(["--version"])
    assert excinfo.value.code == 0
    assert "riskbench" in capsys.readouterr().out


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        run(["frobnicate"])
    assert excinfo.value.code == 2


def test_missing_required_flag_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        run(["ingest"])
    assert excinfo.value.code == 2


def test_ingest_happy_path(manifest, tmp_path):
    out = tmp_path / "ingest.json"
    assert run(["ingest", "--manifest", manifest, "--out", str(out)]) == 0
    payload = read_report(out)
    assert payload["result"]["project_count"] == 11
    assert payload["version"] == "0.1.0"
    assert "manifest" in payload["inputs"]


def test_ingest_missing_register_exits_1(tmp_path, capsys):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps({
        "projects": [{
            "id": "p1", "jurisdiction": "CA", "delivery_method": "DB",
            "project_type": "Highway", "size_band": "under_500M",
            "registers": [{"ordinal": 0, "path": "missing.csv"}],
        }]
    }))
    code = run(["ingest", "--manifest", str(manifest_path), "--out", str(tmp_path / "o.json")])
    assert code == 1
    assert "missing.csv" in capsys.readouterr().err


def test_similarity_docs_with_heatmap(manifest, tmp_path):
    out = tmp_path / "docs.json"
    heatmap = tmp_path / "docs.csv"
    code = run([
        "similarity", "docs", "--manifest", manifest,
        "--heatmap", str(heatmap), "--out", str(out),
    ])
    assert code == 0
    payload = read_report(out)
    assert payload["result"]["aggregates"]["count"] == 55  # C(11, 2)
    lines = heatmap.read_text().splitlines()
    assert len(lines) == 12
    assert lines[0].startswith(",1,2,")


def test_similarity_risks_matrix(manifest, tmp_path):
    out = tmp_path / "risks.json"
    code = run([
        "similarity", "risks", "--manifest", manifest,
        "--embeddings", WORD_VECTORS, "--out", str(out),
    ])
    assert code == 0
    payload = read_report(out)
    matrix = payload["result"]["directional_mean_matrix"]
    assert len(matrix) == 11
    assert matrix[0][0] == 1.0
    assert payload["result"]["overall"]["count"] == 110
    group_means = payload["result"]["group_means"]
    # the single P3 project has no within-group pair
    assert set(group_means) == {"DB", "DBB"}
    assert group_means["DBB"]["count"] == 42  # 7 DBB projects, ordered pairs


def test_similarity_pooling(manifest, tmp_path):
    out = tmp_path / "pooling.json"
    code = run([
        "similarity", "pooling", "--manifest", manifest,
        "--embeddings", WORD_VECTORS, "--out", str(out),
    ])
    assert code == 0
    payload = read_report(out)
    rows = payload["result"]["projects"]
    assert len(rows) == 11
    # synthetic registers share a name bank, so pooled matches are strong
    assert payload["result"]["mean_fraction_at_least_0.5"] > 0.9


def test_similarity_evaluation(manifest, tmp_path):
    out = tmp_path / "evaluation.json"
    code = run([
        "similarity", "evaluation", "--manifest", manifest,
        "--embeddings", WORD_VECTORS, "--group-by", "delivery_method",
        "--out", str(out),
    ])
    assert code == 0
    payload = read_report(out)
    table = payload["result"]["aggregates"]["by_threshold"]
    assert set(table) == {"0.5", "0.7", "0.8"}
    for row in table.values():
        assert 0 <= row["probability"] <= 100
    by_group = payload["result"]["by_group"]
    assert "DBB" in by_group and "0.5" in by_group["DBB"]


def test_similarity_requires_backend(manifest, tmp_path, capsys):
    code = run([
        "similarity", "risks", "--manifest", manifest,
        "--out", str(tmp_path / "r.json"),
    ])
    assert code == 1
    assert "embedding backend" in capsys.readouterr().err


def test_template_build_and_eval(manifest, tmp_path):
    template_path = tmp_path / "template.json"
    code = run([
        "template", "build", "--manifest", manifest,
        "--embeddings", WORD_VECTORS,
        "--filter", "delivery=DBB", "--sort", "prevalence", "--top", "30",
        "--out", str(template_path),
    ])
    assert code == 0
    payload = read_report(template_path)
    entries = payload["result"]["entries"]
    assert 0 < len(entries) <= 30
    assert [e["rank"] for e in entries] == list(range(1, len(entries) + 1))
    prevalences = [e["prevalence"] for e in entries]
    assert prevalences == sorted(prevalences, reverse=True)
    assert all(e["category"] for e in entries)

    register = str(data_path("fixtures", "expost", "registers", "p01_s0.csv"))
    eval_path = tmp_path / "eval.json"
    code = run([
        "template", "eval", "--template", str(template_path),
        "--register", register, "--embeddings", WORD_VECTORS,
        "--out", str(eval_path),
    ])
    assert code == 0
    counts = read_report(eval_path)["result"]
    assert counts["tp"] + counts["fn"] == 32
    assert counts["fp"] <= len(entries)
    assert 0.0 <= counts["recall"] <= 1.0


def test_template_build_empty_filter_exits_1(manifest, tmp_path, capsys):
    with pytest.warns(UserWarning, match="bias"):
        code = run([
            "template", "build", "--manifest", manifest,
            "--embeddings", WORD_VECTORS, "--filter", "location=ZZ",
            "--out", str(tmp_path / "t.json"),
        ])
    assert code == 1
    assert "zero projects" in capsys.readouterr().err


def test_lifecycle_ratios_from_manifest(manifest, tmp_path):
    out = tmp_path / "ratios.json"
    assert run(["lifecycle", "ratios", "--manifest", manifest, "--out", str(out)]) == 0
    payload = read_report(out)
    pooled = payload["result"]["pooled"]
    assert pooled["total_realization"] == pytest.approx(0.646, abs=0.01)
    assert len(payload["result"]["projects"]) == 11


def test_lifecycle_ratios_from_csv(manifest, tmp_path):
    csv_path = str(data_path("fixtures", "expost", "lifecycle_table19.csv"))
    out_csv = tmp_path / "ratios_csv.json"
    out_manifest = tmp_path / "ratios_manifest.json"
    assert run(["lifecycle", "ratios", "--lifecycle-csv", csv_path, "--out", str(out_csv)]) == 0
    assert run(["lifecycle", "ratios", "--manifest", manifest, "--out", str(out_manifest)]) == 0
    assert read_report(out_csv)["result"] == read_report(out_manifest)["result"]


def test_lifecycle_ratios_needs_an_input(tmp_path, capsys):
    code = run(["lifecycle", "ratios", "--out", str(tmp_path / "r.json")])
    assert code == 1
    assert "--manifest or --lifecycle-csv" in capsys.readouterr().err


def test_lifecycle_styles(manifest, tmp_path):
    out = tmp_path / "styles.json"
    assert run(["lifecycle", "styles", "--manifest", manifest, "--out", str(out)]) == 0
    payload = read_report(out)
    rows = {row["project_id"]: row["style"] for row in payload["result"]["projects"]}
    assert rows["4"] == "careful doer"
    assert rows["1"] == "careful planner"
    groups = payload["result"]["groups"]
    assert set(rows) == {pid for members in groups.values() for pid in members}


def test_lifecycle_compare(tmp_path):
    groups_path = tmp_path / "groups.json"
    groups_path.write_text(json.dumps({
        "groups": {"doer": ["4", "5", "6", "8", "11"], "planner": ["1", "2", "7", "9"]},
        "metrics": {
            "4": {"cost_growth": -0.10, "time_growth": 0.02},
            "5": {"cost_growth": -0.05, "time_growth": 0.05},
            "6": {"cost_growth": 0.02, "time_growth": -0.03},
            "8": {"cost_growth": -0.08, "time_growth": 0.01},
            "11": {"cost_growth": -0.02, "time_growth": 0.04},
            "1": {"cost_growth": 0.25, "time_growth": 0.30},
            "2": {"cost_growth": 0.18, "time_growth": 0.22},
            "7": {"cost_growth": 0.40, "time_growth": 0.15},
            "9": {"cost_growth": 0.22, "time_growth": 0.35},
        },
    }))
    out = tmp_path / "compare.json"
    code = run(["lifecycle", "compare", "--groups", str(groups_path), "--out", str(out)])
    assert code == 0
    payload = read_report(out)["result"]
    assert payload["groups"] == ["doer", "planner"]
    assert payload["t_squared"] > payload["critical_value"]
    assert payload["significant"] is True


def test_rbs_coverage_and_cooccur(manifest, tmp_path):
    coverage_path = tmp_path / "coverage.json"
    code = run([
        "rbs", "coverage", "--manifest", manifest,
        "--embeddings", WORD_VECTORS, "--out", str(coverage_path),
    ])
    assert code == 0
    payload = read_report(coverage_path)
    assert payload["result"]["rbs"] == {"categories": 11, "items": 70}
    assert len(payload["result"]["projects"]) == 11
    assert 0.0 <= payload["result"]["overall"]["coverage_fraction"] <= 1.0

    pairs_path = tmp_path / "pairs.csv"
    code = run(["rbs", "cooccur", "--coverage", str(coverage_path), "--out", str(pairs_path)])
    assert code == 0
    lines = pairs_path.read_text().splitlines()
    assert lines[0] == "item_a,item_b,count"
    counts = [int(line.rsplit(",", 1)[1]) for line in lines[1:]]
    assert counts == sorted(counts, reverse=True)
    assert counts and counts[0] <= 11


def test_rbs_coverage_with_sentence_backend(manifest, tmp_path):
    out = tmp_path / "coverage_sentence.json"
    code = run([
        "rbs", "coverage", "--manifest", manifest,
        "--sentence-embeddings", SENTENCE_VECTORS,
        "--embeddings", WORD_VECTORS,
        "--out", str(out),
    ])
    assert code == 0
    payload = read_report(out)
    rows = payload["result"]["projects"][0]["rows"]
    assert any(row["used_fallback"] for row in rows)


def test_jobs_flag_does_not_change_output(manifest, tmp_path):
    first = tmp_path / "one.json"
    second = tmp_path / "four.json"
    base = ["similarity", "risks", "--manifest", manifest, "--embeddings", WORD_VECTORS]
    assert run(base + ["--jobs", "1", "--out", str(first)]) == 0
    assert run(base + ["--jobs", "4", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
