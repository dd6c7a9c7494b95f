"""riskbench command line: ingest, similarity, template, lifecycle, rbs.

Exit codes: 0 success, 1 validation error, 2 usage error. Reports embed
the analytic configuration and input digests; output destinations are not
echoed so reruns over identical inputs stay byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .corpus import (
    Corpus,
    ScaleConfig,
    default_scale_config,
    load_corpus,
    load_scale_config,
    parse_register,
)
from .errors import EmptyReportError, RiskbenchError
from .lifecycle import (
    StyleThresholds,
    classify_style,
    corpus_ratios,
    hotelling_t2,
    read_lifecycle_csv,
    tabulated_ratios,
)
from .parallel import parallel_map
from .rbs import (
    DEFAULT_COVERAGE_THRESHOLD,
    category_distribution,
    coverage,
    default_rbs,
    load_rbs,
)
from .report import ReportBundle, emit_report, file_digest, write_heatmap_csv
from .resources import data_path
from .similarity import (
    EVALUATION_THRESHOLDS,
    directional_mean_matrix,
    document_similarity,
    evaluation_level_report,
    match_registers,
    pooling_similarity,
)
from .template import (
    DEFAULT_LABEL_THRESHOLD,
    DEFAULT_MATCH_THRESHOLD,
    RiskTemplate,
    build_template,
    classify_risk,
    default_categories,
    evaluate_template,
    filter_projects,
    group_risks,
    load_categories,
    parse_filter,
)
from .vectorize import (
    default_stopwords,
    load_sentence_vectors,
    load_stopwords,
    load_word_vectors,
)


def _manifest_digests(manifest_path: str) -> dict[str, str]:
    digests = {"manifest": file_digest(manifest_path)}
    base = Path(manifest_path).parent
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    for project in manifest.get("projects", []):
        for register in project.get("registers", []):
            digests[register["path"]] = file_digest(base / register["path"])
    return digests


def _load_stopwords(args) -> frozenset[str]:
    if getattr(args, "stopwords", None):
        return load_stopwords(args.stopwords)
    return default_stopwords()


def _load_backends(args, stop_words):
    """Primary backend plus optional word-average fallback."""
    word = (
        load_word_vectors(args.embeddings, stop_words)
        if getattr(args, "embeddings", None)
        else None
    )
    sentence = (
        load_sentence_vectors(args.sentence_embeddings, stop_words)
        if getattr(args, "sentence_embeddings", None)
        else None
    )
    if sentence is not None:
        return sentence, word
    if word is None:
        raise RiskbenchError(
            "an embedding backend is required: pass --embeddings or --sentence-embeddings"
        )
    return word, None


def _backend_digests(args) -> dict[str, str]:
    digests = {}
    if getattr(args, "embeddings", None):
        digests["embeddings"] = file_digest(args.embeddings)
    if getattr(args, "sentence_embeddings", None):
        digests["sentence_embeddings"] = file_digest(args.sentence_embeddings)
    if getattr(args, "stopwords", None):
        digests["stopwords"] = file_digest(args.stopwords)
    else:
        digests["stopwords"] = file_digest(data_path("stopwords_en.txt"))
    return digests


def _load_corpus(args) -> Corpus:
    scales: ScaleConfig = (
        load_scale_config(args.scales) if getattr(args, "scales", None) else default_scale_config()
    )
    return load_corpus(args.manifest, scales)


def _scale_digests(args) -> dict[str, str]:
    if getattr(args, "scales", None):
        return {"scales": file_digest(args.scales)}
    return {}


def _report_dict(report) -> dict:
    payload = {
        "level": report.level.value,
        "pairs": [{"a": p.a, "b": p.b, "score": p.score} for p in report.pairs],
        "aggregates": report.aggregates,
        "metadata": report.metadata,
    }
    if report.test is not None:
        payload["test"] = {
            "statistic": report.test.statistic,
            "degrees_of_freedom": report.test.degrees_of_freedom,
            "p_value": report.test.p_value,
            "variant": report.test.variant,
        }
    else:
        payload["test"] = None
    return payload


def _emit(args, command: str, config: dict, digests: dict, result) -> int:
    bundle = ReportBundle(
        command=command,
        config=config,
        version=__version__,
        input_digests=digests,
        result=result,
    )
    emit_report(bundle, args.out)
    return 0


# ---------------------------------------------------------------- ingest


def _cmd_ingest(args) -> int:
    corpus = _load_corpus(args)
    projects = []
    total = 0
    for project in corpus.projects:
        sizes = [len(s.items) for s in project.snapshots]
        total += sum(sizes)
        projects.append(
            {
                "id": project.project_id,
                "delivery_method": project.delivery_method,
                "project_type": project.project_type,
                "size_band": project.size_band.value,
                "snapshots": len(project.snapshots),
                "risks_per_snapshot": sizes,
            }
        )
    result = {"project_count": len(corpus.projects), "total_rows": total, "projects": projects}
    digests = _manifest_digests(args.manifest)
    digests.update(_scale_digests(args))
    return _emit(args, "riskbench ingest", {}, digests, result)


# ------------------------------------------------------------ similarity


def _similarity_config(args, mode: str) -> dict:
    return {
        "mode": mode,
        "group_by": getattr(args, "group_by", None),
        "threshold": getattr(args, "threshold", None),
        "use_description": getattr(args, "use_description", False),
    }


def _cmd_similarity_docs(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    report = document_similarity(corpus, stop_words=stop_words, group_by=args.group_by)
    if args.heatmap:
        ids = [p.project_id for p in corpus.projects]
        scores = {(p.a, p.b): p.score for p in report.pairs}
        matrix = [
            [
                1.0 if a == b else scores.get((a, b), scores.get((b, a)))
                for b in ids
            ]
            for a in ids
        ]
        write_heatmap_csv(args.heatmap, ids, ids, matrix)
    digests = _manifest_digests(args.manifest)
    digests["stopwords"] = (
        file_digest(args.stopwords) if args.stopwords else file_digest(data_path("stopwords_en.txt"))
    )
    return _emit(
        args, "riskbench similarity docs", _similarity_config(args, "docs"), digests,
        _report_dict(report),
    )


def _cmd_similarity_risks(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    backend, _ = _load_backends(args, stop_words)
    if len(corpus.projects) < 2:
        raise EmptyReportError("risk-level similarity needs at least 2 projects")
    ids, matrix = directional_mean_matrix(
        corpus, backend, args.use_description, jobs=args.jobs
    )
    values = [
        matrix[i][j]
        for i in range(len(ids))
        for j in range(len(ids))
        if i != j and matrix[i][j] is not None
    ]
    if not values:
        raise EmptyReportError("all registers are empty")
    if args.heatmap:
        write_heatmap_csv(args.heatmap, ids, ids, matrix)
    result = {
        "level": "risk_item",
        "projects": ids,
        "directional_mean_matrix": matrix,
        "overall": {
            "count": len(values),
            "mean": sum(values) / len(values),
            "min": min(values),
            "max": max(values),
        },
    }
    if args.group_by:
        lookup = {p.project_id: getattr(p, args.group_by) for p in corpus.projects}
        groups: dict[str, list[float]] = {}
        for i, a in enumerate(ids):
            for j, b in enumerate(ids):
                if i == j or matrix[i][j] is None:
                    continue
                ga = getattr(lookup[a], "value", lookup[a])
                gb = getattr(lookup[b], "value", lookup[b])
                if ga == gb:
                    groups.setdefault(str(ga), []).append(matrix[i][j])
        result["group_means"] = {
            name: {
                "count": len(scores),
                "mean": sum(scores) / len(scores),
                "min": min(scores),
                "max": max(scores),
            }
            for name, scores in sorted(groups.items())
        }
    digests = _manifest_digests(args.manifest)
    digests.update(_backend_digests(args))
    return _emit(
        args, "riskbench similarity risks", _similarity_config(args, "risks"), digests, result
    )


def _cmd_similarity_pooling(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    backend, _ = _load_backends(args, stop_words)
    if len(corpus.projects) < 2:
        raise EmptyReportError("pooling needs at least 2 projects")

    def one(project):
        report = pooling_similarity(project, corpus, backend, args.use_description)
        return {
            "project_id": project.project_id,
            "mean": report.aggregates["mean"],
            "fraction_at_least_0.5": report.aggregates["fraction_at_least_0.5"],
            "histogram": report.aggregates["histogram"],
        }

    rows = parallel_map(one, list(corpus.projects), args.jobs)
    result = {
        "level": "pooling",
        "projects": rows,
        "mean_fraction_at_least_0.5": sum(r["fraction_at_least_0.5"] for r in rows) / len(rows),
    }
    digests = _manifest_digests(args.manifest)
    digests.update(_backend_digests(args))
    return _emit(
        args, "riskbench similarity pooling", _similarity_config(args, "pooling"), digests, result
    )


def _cmd_similarity_evaluation(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    backend, _ = _load_backends(args, stop_words)
    base = args.threshold if args.threshold is not None else 0.5
    thresholds = sorted({base} | {t for t in EVALUATION_THRESHOLDS if t >= base})
    matches = match_registers(corpus, backend, min_score=base, use_description=args.use_description)
    report = evaluation_level_report(matches, corpus, thresholds)
    result = _report_dict(report)
    if args.group_by:
        membership = {
            p.project_id: str(getattr(getattr(p, args.group_by), "value", getattr(p, args.group_by)))
            for p in corpus.projects
        }
        by_group: dict[str, dict] = {}
        for name in sorted(set(membership.values())):
            subset = [
                m for m in matches
                if membership[m.source_project_id] == name
                and membership[m.target_project_id] == name
            ]
            try:
                by_group[name] = evaluation_level_report(subset, corpus, thresholds).aggregates[
                    "by_threshold"
                ]
            except EmptyReportError as exc:
                by_group[name] = {"skipped": str(exc)}
        result["by_group"] = by_group
    digests = _manifest_digests(args.manifest)
    digests.update(_backend_digests(args))
    return _emit(
        args,
        "riskbench similarity evaluation",
        _similarity_config(args, "evaluation"),
        digests,
        result,
    )


# -------------------------------------------------------------- template


def _cmd_template_build(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    backend, _ = _load_backends(args, stop_words)
    criteria = parse_filter(args.filter)
    selected = filter_projects(corpus, criteria)
    if not selected:
        raise EmptyReportError("the filter selected zero projects")
    categories = load_categories(args.categories) if args.categories else default_categories()
    groups = group_risks(selected, backend, args.match_threshold, args.use_description)
    groups = [
        replace(
            group,
            category=classify_risk(group.representative_text, categories, backend).label,
        )
        for group in groups
    ]
    template = build_template(groups, args.sort, args.top, criteria, len(selected))
    result = template.to_dict()
    result["group_count"] = len(groups)
    digests = _manifest_digests(args.manifest)
    digests.update(_backend_digests(args))
    if args.categories:
        digests["categories"] = file_digest(args.categories)
    config = {
        "filter": criteria.describe(),
        "sort": args.sort,
        "top": args.top,
        "match_threshold": args.match_threshold,
        "use_description": args.use_description,
    }
    return _emit(args, "riskbench template build", config, digests, result)


def _load_template_file(path: str) -> RiskTemplate:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "result" in raw and isinstance(raw["result"], dict) and "entries" in raw["result"]:
        raw = raw["result"]
    return RiskTemplate.from_dict(raw)


def _cmd_template_eval(args) -> int:
    stop_words = _load_stopwords(args)
    backend, _ = _load_backends(args, stop_words)
    template = _load_template_file(args.template)
    register_path = Path(args.register)
    if not register_path.exists():
        raise RiskbenchError(f"register file not found: {register_path}")
    fmt = "json" if register_path.suffix.lower() == ".json" else "csv"
    register = parse_register(register_path.read_bytes(), fmt, source=str(register_path))
    counts = evaluate_template(template, register, backend, args.label_threshold)
    digests = {
        "template": file_digest(args.template),
        "register": file_digest(args.register),
    }
    digests.update(_backend_digests(args))
    config = {"label_threshold": args.label_threshold}
    return _emit(args, "riskbench template eval", config, digests, counts.to_dict())


# -------------------------------------------------------------- lifecycle


def _lifecycle_tables(args):
    if getattr(args, "lifecycle_csv", None):
        path = Path(args.lifecycle_csv)
        if not path.exists():
            raise RiskbenchError(f"lifecycle csv not found: {path}")
        observations = read_lifecycle_csv(path.read_bytes(), source=str(path))
        per_project, pooled = tabulated_ratios(observations)
        digests = {"lifecycle_csv": file_digest(path)}
        config = {"source": "lifecycle_csv"}
    elif getattr(args, "manifest", None):
        corpus = _load_corpus(args)
        per_project, pooled = corpus_ratios(corpus)
        digests = _manifest_digests(args.manifest)
        config = {"source": "manifest"}
    else:
        raise RiskbenchError("pass --manifest or --lifecycle-csv")
    return per_project, pooled, digests, config


def _cmd_lifecycle_ratios(args) -> int:
    per_project, pooled, digests, config = _lifecycle_tables(args)
    result = {
        "projects": [
            {"project_id": project_id, **ratios.to_dict()}
            for project_id, ratios in per_project.items()
        ],
        "pooled": pooled.to_dict(),
    }
    return _emit(args, "riskbench lifecycle ratios", config, digests, result)


def _cmd_lifecycle_styles(args) -> int:
    per_project, pooled, digests, config = _lifecycle_tables(args)
    thresholds = StyleThresholds()
    if args.thresholds:
        raw = json.loads(Path(args.thresholds).read_text(encoding="utf-8"))
        thresholds = StyleThresholds(
            doer_new_item=raw.get("doer_new_item", 0.5),
            careful=raw.get("careful", 0.5),
        )
        digests["thresholds"] = file_digest(args.thresholds)
    rows = []
    groups: dict[str, list[str]] = {}
    for project_id, ratios in per_project.items():
        label = classify_style(ratios, thresholds)
        if label is None:
            style = "unclassifiable"
            groups.setdefault("unclassifiable", []).append(project_id)
        else:
            style = f"{label.axis2} {label.axis1}"
            groups.setdefault(label.axis1, []).append(project_id)
        rows.append({"project_id": project_id, "style": style, **ratios.to_dict()})
    config["thresholds"] = {
        "doer_new_item": thresholds.doer_new_item,
        "careful": thresholds.careful,
    }
    result = {"projects": rows, "groups": groups, "pooled": pooled.to_dict()}
    return _emit(args, "riskbench lifecycle styles", config, digests, result)


def _cmd_lifecycle_compare(args) -> int:
    raw = json.loads(Path(args.groups).read_text(encoding="utf-8"))
    groups = raw.get("groups")
    metrics = raw.get("metrics")
    if not isinstance(groups, dict) or len(groups) != 2 or not isinstance(metrics, dict):
        raise RiskbenchError(
            "groups file must hold exactly two 'groups' lists and a 'metrics' table"
        )
    names = sorted(groups)
    dims = [m.strip() for m in args.metric.split(",") if m.strip()]
    if not dims:
        raise RiskbenchError("pass at least one metric name")

    def points(name: str):
        rows = []
        for project_id in groups[name]:
            if project_id not in metrics:
                raise RiskbenchError(f"no metrics for project {project_id!r}")
            try:
                rows.append([float(metrics[project_id][dim]) for dim in dims])
            except KeyError as exc:
                raise RiskbenchError(f"project {project_id!r} is missing metric {exc}") from exc
        return rows

    outcome = hotelling_t2(points(names[0]), points(names[1]), alpha=args.alpha)
    result = {
        "groups": names,
        "metrics": dims,
        "t_squared": outcome.t_squared,
        "group_sizes": list(outcome.group_sizes),
        "critical_value": outcome.critical_value,
        "alpha": outcome.alpha,
        "significant": outcome.significant,
    }
    config = {"metric": args.metric, "alpha": args.alpha}
    return _emit(
        args, "riskbench lifecycle compare", config, {"groups": file_digest(args.groups)}, result
    )


# -------------------------------------------------------------------- rbs


def _cmd_rbs_coverage(args) -> int:
    corpus = _load_corpus(args)
    stop_words = _load_stopwords(args)
    backend, fallback = _load_backends(args, stop_words)
    rbs = load_rbs(args.rbs) if args.rbs else default_rbs()

    def one(project):
        return coverage(
            rbs,
            project.register,
            backend,
            threshold=args.threshold,
            project_id=project.project_id,
            fallback_backend=fallback,
        )

    reports = parallel_map(one, list(corpus.projects), args.jobs)
    total_rows = sum(len(r.rows) for r in reports)
    covered = sum(sum(1 for row in r.rows if row.covered) for r in reports)
    try:
        distribution = [
            {"category": name, "fraction": fraction}
            for name, fraction in category_distribution(reports)
        ]
    except EmptyReportError:
        distribution = []
    result = {
        "threshold": args.threshold,
        "rbs": {"categories": len(rbs.categories), "items": rbs.item_count},
        "projects": [r.to_dict() for r in reports],
        "overall": {
            "risks": total_rows,
            "covered": covered,
            "coverage_fraction": covered / total_rows if total_rows else None,
            "category_distribution": distribution,
        },
    }
    digests = _manifest_digests(args.manifest)
    digests.update(_backend_digests(args))
    digests["rbs"] = file_digest(args.rbs) if args.rbs else file_digest(data_path("rbs_table21.json"))
    config = {"threshold": args.threshold}
    return _emit(args, "riskbench rbs coverage", config, digests, result)


def _cmd_rbs_cooccur(args) -> int:
    raw = json.loads(Path(args.coverage).read_text(encoding="utf-8"))
    payload = raw.get("result", raw)
    projects = payload.get("projects")
    if not isinstance(projects, list):
        raise RiskbenchError(f"{args.coverage} is not a coverage report")
    rbs = load_rbs(args.rbs) if args.rbs else default_rbs()
    texts = tuple(item.text for _, item in rbs.flat_items())
    index = {text: i for i, text in enumerate(texts)}
    counts: dict[tuple[int, int], int] = {}
    for project in projects:
        present = sorted(
            {
                index[row["best_item"]]
                for row in project.get("rows", [])
                if row.get("covered") and row.get("best_item") in index
            }
        )
        for a in range(len(present)):
            for b in range(a + 1, len(present)):
                key = (present[a], present[b])
                counts[key] = counts.get(key, 0) + 1
    rows = [
        (texts[i], texts[j], counts.get((i, j), 0))
        for i in range(len(texts))
        for j in range(i + 1, len(texts))
    ]
    rows.sort(key=lambda row: (-row[2], row[0], row[1]))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["item_a", "item_b", "count"])
    writer.writerows(rows)
    out.write_text(buffer.getvalue(), encoding="utf-8")
    return 0


# ------------------------------------------------------------------ main


def _add_common(parser, manifest=True, backend=False, out=True):
    if manifest:
        parser.add_argument("--manifest", required=True, help="corpus manifest JSON")
        parser.add_argument("--scales", help="scale config JSON (band edges, risk matrix)")
    if backend:
        parser.add_argument("--embeddings", help="word-vector file (word_average backend)")
        parser.add_argument(
            "--sentence-embeddings",
            dest="sentence_embeddings",
            help="JSON-Lines precomputed sentence vectors",
        )
    parser.add_argument("--stopwords", help="stop-word list, one per line")
    parser.add_argument("--jobs", type=int, default=1, help="worker parallelism bound")
    if out:
        parser.add_argument("--out", required=True, help="report output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskbench", description=__doc__)
    parser.add_argument("--version", action="version", version=f"riskbench {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", help="load and validate a corpus")
    _add_common(ingest)
    ingest.set_defaults(func=_cmd_ingest)

    similarity = commands.add_parser("similarity", help="three-level similarity analysis")
    modes = similarity.add_subparsers(dest="mode", required=True)

    docs = modes.add_parser("docs", help="document-level TF-IDF cosine")
    _add_common(docs)
    docs.add_argument("--group-by", dest="group_by", default="delivery_method")
    docs.add_argument("--heatmap", help="write a project-by-project score CSV")
    docs.set_defaults(func=_cmd_similarity_docs, threshold=None, use_description=False)

    risks = modes.add_parser("risks", help="risk-level embedding matching")
    _add_common(risks, backend=True)
    risks.add_argument("--group-by", dest="group_by", default="delivery_method")
    risks.add_argument("--use-description", dest="use_description", action="store_true")
    risks.add_argument("--heatmap", help="write the directional mean matrix CSV")
    risks.set_defaults(func=_cmd_similarity_risks, threshold=None)

    pooling = modes.add_parser("pooling", help="match risks against pooled projects")
    _add_common(pooling, backend=True)
    pooling.add_argument("--use-description", dest="use_description", action="store_true")
    pooling.set_defaults(func=_cmd_similarity_pooling, threshold=None, group_by=None)

    evaluation = modes.add_parser("evaluation", help="assessment similarity of matches")
    _add_common(evaluation, backend=True)
    evaluation.add_argument("--group-by", dest="group_by", default=None)
    evaluation.add_argument(
        "--threshold", type=float, default=0.5, help="minimum cosine for a match to count"
    )
    evaluation.add_argument("--use-description", dest="use_description", action="store_true")
    evaluation.set_defaults(func=_cmd_similarity_evaluation)

    template = commands.add_parser("template", help="build and score risk templates")
    template_modes = template.add_subparsers(dest="mode", required=True)

    build = template_modes.add_parser("build", help="generate a ranked risk template")
    _add_common(build, backend=True)
    build.add_argument("--filter", default="", help="e.g. type=Highway,size=over_1B")
    build.add_argument("--sort", default="prevalence", choices=("prevalence", "cost", "schedule"))
    build.add_argument("--top", type=int, default=30)
    build.add_argument("--categories", help="category set JSON (default: bundled)")
    build.add_argument(
        "--match-threshold",
        dest="match_threshold",
        type=float,
        default=DEFAULT_MATCH_THRESHOLD,
    )
    build.add_argument("--use-description", dest="use_description", action="store_true")
    build.set_defaults(func=_cmd_template_build)

    evaluate = template_modes.add_parser("eval", help="score a template against a register")
    _add_common(evaluate, manifest=False, backend=True)
    evaluate.add_argument("--template", required=True)
    evaluate.add_argument("--register", required=True)
    evaluate.add_argument(
        "--label-threshold",
        dest="label_threshold",
        type=float,
        default=DEFAULT_LABEL_THRESHOLD,
    )
    evaluate.set_defaults(func=_cmd_template_eval)

    lifecycle = commands.add_parser("lifecycle", help="risk lifecycle ratios and styles")
    lifecycle_modes = lifecycle.add_subparsers(dest="mode", required=True)

    ratios = lifecycle_modes.add_parser("ratios", help="per-project and pooled ratios")
    ratios.add_argument("--manifest")
    ratios.add_argument("--scales")
    ratios.add_argument("--lifecycle-csv", dest="lifecycle_csv")
    ratios.add_argument("--jobs", type=int, default=1)
    ratios.add_argument("--out", required=True)
    ratios.set_defaults(func=_cmd_lifecycle_ratios)

    styles = lifecycle_modes.add_parser("styles", help="classify management styles")
    styles.add_argument("--manifest")
    styles.add_argument("--scales")
    styles.add_argument("--lifecycle-csv", dest="lifecycle_csv")
    styles.add_argument("--thresholds", help="style threshold JSON")
    styles.add_argument("--jobs", type=int, default=1)
    styles.add_argument("--out", required=True)
    styles.set_defaults(func=_cmd_lifecycle_styles)

    compare = lifecycle_modes.add_parser("compare", help="Hotelling T^2 between two groups")
    compare.add_argument("--groups", required=True, help="groups + metrics JSON")
    compare.add_argument(
        "--metric", default="cost_growth,time_growth", help="comma-separated metric names"
    )
    compare.add_argument("--alpha", type=float, default=0.05)
    compare.add_argument("--out", required=True)
    compare.set_defaults(func=_cmd_lifecycle_compare)

    rbs = commands.add_parser("rbs", help="risk breakdown structure coverage")
    rbs_modes = rbs.add_subparsers(dest="mode", required=True)

    cover = rbs_modes.add_parser("coverage", help="semantic coverage of registers")
    _add_common(cover, backend=True)
    cover.add_argument("--rbs", help="RBS JSON (default: bundled)")
    cover.add_argument("--threshold", type=float, default=DEFAULT_COVERAGE_THRESHOLD)
    cover.set_defaults(func=_cmd_rbs_coverage)

    cooccur = rbs_modes.add_parser("cooccur", help="item co-occurrence pairs CSV")
    cooccur.add_argument("--coverage", required=True, help="coverage report JSON")
    cooccur.add_argument("--rbs", help="RBS JSON (default: bundled)")
    cooccur.add_argument("--out", required=True)
    cooccur.set_defaults(func=_cmd_rbs_cooccur)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RiskbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
