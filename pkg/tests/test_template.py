from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from riskbench.corpus import Assessment, RegisterSnapshot, load_corpus
from riskbench.errors import TemplateError
from riskbench.template import (
    EvalCounts,
    FilterCriteria,
    GroupMember,
    build_template,
    classify_risk,
    default_categories,
    evaluate_template,
    filter_projects,
    group_risks,
    parse_filter,
    sensitivity_run,
    summarize_group,
)

from .conftest import make_register, toy_backend
from .test_similarity import corpus_of, project_of


# --------------------------------------------------------------- filtering


def test_filter_empty_criteria_selects_all(expost_manifest):
    corpus = load_corpus(expost_manifest)
    assert filter_projects(corpus, FilterCriteria()) == list(corpus.projects)


def test_filter_dbb_on_table19_fixture(expost_manifest):
    corpus = load_corpus(expost_manifest)
    selected = filter_projects(corpus, FilterCriteria(delivery_method="DBB"))
    assert [p.project_id for p in selected] == ["2", "3", "4", "5", "6", "8", "9"]


def test_filter_conjunction(expost_manifest):
    corpus = load_corpus(expost_manifest)
    with pytest.warns(UserWarning, match="bias"):
        selected = filter_projects(
            corpus, FilterCriteria(delivery_method="DB", project_type="Highway")
        )
    assert [p.project_id for p in selected] == ["1", "10"]


def test_filter_empty_result_warns(expost_manifest):
    corpus = load_corpus(expost_manifest)
    with pytest.warns(UserWarning, match="bias"):
        selected = filter_projects(corpus, FilterCriteria(jurisdiction="ZZ"))
    assert selected == []


def test_parse_filter_string():
    criteria = parse_filter("type=Highway,size=over_1B,delivery=all")
    assert criteria.project_type == "Highway"
    assert criteria.size_band == "over_1B"
    assert criteria.delivery_method is None
    with pytest.raises(TemplateError):
        parse_filter("grade=A")


# --------------------------------------------------------------- grouping


def test_group_risks_orthogonal_singletons():
    backend = toy_backend({
        "alpha": [1.0, 0.0, 0.0],
        "beta": [0.0, 1.0, 0.0],
        "gamma": [0.0, 0.0, 1.0],
    })
    corpus = corpus_of(project_of(make_register("alpha", "beta", "gamma"), "p0"))
    groups = group_risks(list(corpus.projects), backend, threshold=0.7)
    assert len(groups) == 3
    assert all(group.size == 1 for group in groups)


def test_group_risks_verbatim_copies_single_group():
    backend = toy_backend({"alpha": [1.0, 0.0]})
    projects = [project_of(make_register("alpha"), f"p{i}") for i in range(4)]
    groups = group_risks(projects, backend, threshold=0.7)
    assert len(groups) == 1
    assert groups[0].size == 4
    assert groups[0].prevalence == 1.0


def test_group_risks_prevalence_fraction():
    backend = toy_backend({"alpha": [1.0, 0.0], "beta": [0.0, 1.0]})
    projects = [
        project_of(make_register("alpha"), "p0"),
        project_of(make_register("alpha", "beta"), "p1"),
        project_of(make_register("beta"), "p2"),
    ]
    groups = group_risks(projects, backend, threshold=0.7)
    by_text = {g.representative_text: g for g in groups}
    assert by_text["alpha"].prevalence == pytest.approx(2 / 3)
    assert by_text["beta"].prevalence == pytest.approx(2 / 3)


def test_group_risks_partition_property(reference_backend, expost_manifest):
    corpus = load_corpus(expost_manifest)
    projects = list(corpus.projects)[:4]
    total = sum(len(p.register.items) for p in projects)
    groups = group_risks(projects, reference_backend, threshold=0.7)
    assert sum(g.size for g in groups) == total
    seen = set()
    for group in groups:
        for ref in group.member_refs:
            assert ref not in seen
            seen.add(ref)
    assert len(seen) == total


def test_group_risks_members_meet_threshold(reference_backend, expost_manifest):
    from riskbench.vectorize import cosine, embed_text

    corpus = load_corpus(expost_manifest)
    projects = list(corpus.projects)[:3]
    threshold = 0.7
    groups = group_risks(projects, reference_backend, threshold=threshold)
    texts = {
        (p.project_id, item.risk_id): item.name
        for p in projects
        for item in p.register.items
    }
    for group in groups:
        seed_project, seed_risk = group.member_refs[0]
        seed_vector = embed_text(reference_backend, texts[(seed_project, seed_risk)]).vector
        for ref in group.member_refs[1:]:
            member_vector = embed_text(reference_backend, texts[ref]).vector
            assert cosine(seed_vector, member_vector) >= threshold - 1e-12


# --------------------------------------------------------------- summarize


def _member(pid, rid, text, p=None, c=None, s=None):
    return GroupMember(
        project_id=pid,
        risk_id=rid,
        text=text,
        assessment=Assessment(probability_band=p, cost_band=c, schedule_band=s),
    )


def test_summarize_group_most_frequent_text_wins():
    members = (
        [_member("p1", f"a{i}", "utility relocation at overcrossings") for i in range(4)]
        + [_member("p2", f"b{i}", "utility relocation may not happen on time") for i in range(3)]
        + [_member("p3", f"c{i}",
                   "construction impacts due to lack of right of way and timely utility relocation")
           for i in range(7)]
    )
    group = summarize_group(members, selected_project_count=31)
    assert group.representative_text == (
        "construction impacts due to lack of right of way and timely utility relocation"
    )
    assert group.size == 14
    assert group.prevalence == pytest.approx(3 / 31)


def test_summarize_group_tie_breaks_lexicographically():
    members = [_member("p1", "a", "beta text"), _member("p2", "b", "alpha text")]
    group = summarize_group(members, selected_project_count=2)
    assert group.representative_text == "alpha text"


def test_summarize_singleton():
    group = summarize_group([_member("p1", "a", "only text", p=4, c=2, s=1)], 5)
    assert group.representative_text == "only text"
    assert group.avg_probability_band == 4
    assert group.prevalence == pytest.approx(1 / 5)


def test_summarize_skips_unset_bands():
    members = [
        _member("p1", "a", "text", p=4, c=2),
        _member("p2", "b", "text", p=2),
        _member("p3", "c", "text"),
    ]
    group = summarize_group(members, 3)
    assert group.avg_probability_band == pytest.approx(3.0)
    assert group.avg_cost_band == pytest.approx(2.0)
    assert group.avg_schedule_band is None


# --------------------------------------------------------------- classify


def test_classify_right_of_way(reference_backend):
    result = classify_risk(
        "Additional right of way required", default_categories(), reference_backend
    )
    assert result.label == "right of way"
    assert result.score > 0.5


def test_classify_geotechnical_over_design(reference_backend):
    from riskbench.vectorize import cosine, embed_text

    categories = default_categories()
    text = "Potential changes to geotechnical design for foundations"
    result = classify_risk(text, categories, reference_backend)
    assert result.label == "structure and geotechnical"
    source = embed_text(reference_backend, text).vector
    ranked = sorted(
        (
            (
                cosine(
                    source,
                    embed_text(reference_backend, f"{c.name} {c.description}").vector,
                ),
                c.name,
            )
            for c in categories.categories
        ),
        reverse=True,
    )
    assert ranked[1][1] == "design"


def test_classify_verbatim_label_scores_one(reference_backend):
    categories = default_categories()
    result = classify_risk("utilities", categories, reference_backend, label_only=True)
    assert result.label == "utilities"
    assert result.score == 1.0


def test_classify_all_oov_flagged(reference_backend):
    categories = default_categories()
    result = classify_risk("zzqx vvrm", categories, reference_backend)
    assert result.all_oov
    assert result.score == 0.0
    assert result.label == categories.categories[0].name


# --------------------------------------------------------------- template build


def _group(text, prevalence, cost=None, schedule=None, size=1):
    return summarize_group(
        [
            _member("p1", f"{text}-{i}", text, p=3, c=cost, s=schedule)
            for i in range(size)
        ],
        selected_project_count=max(1, int(round(size / max(prevalence, 1e-9))) if prevalence else 1),
    )


def test_build_template_sorts_by_prevalence():
    backend = toy_backend({"alpha": [1.0, 0.0], "beta": [0.0, 1.0]})
    projects = (
        [project_of(make_register("alpha"), f"a{i}") for i in range(9)]
        + [project_of(make_register("beta"), "b0")]
    )
    groups = group_risks(projects, backend, threshold=0.7)
    template = build_template(groups, "prevalence", top_n=30)
    assert [e.text for e in template.entries] == ["alpha", "beta"]
    assert template.entries[0].prevalence == pytest.approx(0.9)
    assert template.entries[0].rank == 1


def test_build_template_no_truncation_when_top_n_large():
    backend = toy_backend({"alpha": [1.0, 0.0], "beta": [0.0, 1.0]})
    groups = group_risks([project_of(make_register("alpha", "beta"), "p0")], backend)
    template = build_template(groups, "prevalence", top_n=50)
    assert len(template.entries) == 2


def test_build_template_truncates():
    backend = toy_backend({
        "alpha": [1, 0, 0], "beta": [0, 1, 0], "gamma": [0, 0, 1],
    })
    groups = group_risks([project_of(make_register("alpha", "beta", "gamma"), "p0")], backend)
    template = build_template(groups, "prevalence", top_n=2)
    assert len(template.entries) == 2


def test_build_template_sort_keys_disagree():
    members_a = [_member("p1", "a", "high cost risk", p=3, c=5, s=1)]
    members_b = [_member("p1", "b", "high schedule risk", p=3, c=1, s=5),
                 _member("p2", "b2", "high schedule risk", p=3, c=1, s=5)]
    group_a = summarize_group(members_a, 2)
    group_b = summarize_group(members_b, 2)
    by_cost = build_template([group_a, group_b], "cost", top_n=10)
    by_prevalence = build_template([group_a, group_b], "prevalence", top_n=10)
    by_schedule = build_template([group_a, group_b], "schedule", top_n=10)
    assert [e.text for e in by_cost.entries] == ["high cost risk", "high schedule risk"]
    assert [e.text for e in by_prevalence.entries] == ["high schedule risk", "high cost risk"]
    assert [e.text for e in by_schedule.entries] == ["high schedule risk", "high cost risk"]


def test_build_template_unassessed_groups_sort_last_under_cost():
    assessed = summarize_group([_member("p1", "a", "assessed", p=1, c=1, s=1)], 1)
    unassessed = summarize_group([_member("p1", "b", "bare")], 1)
    template = build_template([unassessed, assessed], "cost", top_n=10)
    assert [e.text for e in template.entries] == ["assessed", "bare"]


def test_build_template_rejects_bad_inputs():
    group = summarize_group([_member("p1", "a", "text")], 1)
    with pytest.raises(TemplateError):
        build_template([], "prevalence", 10)
    with pytest.raises(TemplateError):
        build_template([group], "prevalence", 0)
    with pytest.raises(TemplateError):
        build_template([group], "magnitude", 10)


def test_template_round_trips_through_dict():
    from riskbench.template import RiskTemplate

    group = summarize_group([_member("p1", "a", "text", p=2, c=3, s=4)], 2)
    template = build_template([group], "prevalence", 10, FilterCriteria(size_band="over_1B"), 2)
    assert RiskTemplate.from_dict(template.to_dict()) == template


# --------------------------------------------------------------- evaluation


def test_eval_counts_table_rows():
    row_a = EvalCounts.from_counts(16, 19, 19)
    assert row_a.recall == pytest.approx(0.457, abs=5e-4)
    assert row_a.precision == pytest.approx(0.457, abs=5e-4)
    assert row_a.f1 == pytest.approx(0.457, abs=5e-4)
    row_d = EvalCounts.from_counts(12, 1, 18)
    assert row_d.recall == pytest.approx(0.923, abs=5e-4)
    assert row_d.precision == pytest.approx(0.400, abs=5e-4)
    assert row_d.f1 == pytest.approx(0.558, abs=5e-4)


def test_eval_counts_perfect_template():
    perfect = EvalCounts.from_counts(10, 0, 0)
    assert perfect.recall == 1.0
    assert perfect.precision == 1.0
    assert perfect.f1 == 1.0


@given(
    tp=st.integers(min_value=0, max_value=500),
    fn=st.integers(min_value=0, max_value=500),
    fp=st.integers(min_value=0, max_value=500),
)
def test_eval_counts_f1_identity(tp, fn, fp):
    counts = EvalCounts.from_counts(tp, fn, fp)
    if counts.precision is not None and counts.recall is not None:
        p, r = counts.precision, counts.recall
        if p + r > 0:
            assert counts.f1 == pytest.approx(2 * p * r / (p + r), abs=1e-12)


def _template_backend():
    return toy_backend({
        "alpha": [1.0, 0.0, 0.0],
        "beta": [0.0, 1.0, 0.0],
        "gamma": [0.0, 0.0, 1.0],
        "alphaish": [0.9, 0.1, 0.0],
    })


def test_evaluate_template_counts():
    backend = _template_backend()
    groups = group_risks([project_of(make_register("alpha", "beta", "gamma"), "p0")], backend)
    template = build_template(groups, "prevalence", 10)
    register = make_register("alphaish", "beta beta", "zzz")
    counts = evaluate_template(template, register, backend, label_threshold=0.6)
    # alphaish -> alpha (cos ~0.99); "beta beta" -> beta (1.0); zzz all-OOV -> FN
    assert counts.tp == 2
    assert counts.fn == 1
    assert counts.fp == 1  # gamma never chosen
    assert counts.tp + counts.fn == len(register.items)
    assert counts.fp <= len(template.entries)


def test_evaluate_template_fp_counts_unchosen_even_when_fn_matches_them():
    backend = toy_backend({
        "alpha": [1.0, 0.0],
        "nearalpha": [0.95, 0.4],
    })
    groups = group_risks([project_of(make_register("alpha", "nearalpha"), "p0")], backend, 0.99)
    template = build_template(groups, "prevalence", 10)
    register = make_register("nearalpha")
    counts = evaluate_template(template, register, backend, label_threshold=1.01)
    # the lone risk best-matches an entry but below threshold: FN, both entries FP
    assert (counts.tp, counts.fn, counts.fp) == (0, 1, 2)


def test_evaluate_template_empty_inputs():
    backend = _template_backend()
    groups = group_risks([project_of(make_register("alpha"), "p0")], backend)
    template = build_template(groups, "prevalence", 10)
    with pytest.raises(TemplateError):
        evaluate_template(template, RegisterSnapshot(0, None, ()), backend)


# --------------------------------------------------------------- sensitivity


def _sensitivity_fixture():
    backend = toy_backend({
        "alpha": [1.0, 0.0, 0.0],
        "beta": [0.0, 1.0, 0.0],
        "gamma": [0.0, 0.0, 1.0],
    })
    corpus = corpus_of(
        project_of(make_register("alpha"), "c0", jurisdiction="CA"),
        project_of(make_register("alpha"), "c1", jurisdiction="CA"),
        project_of(make_register("beta"), "c2", jurisdiction="TX"),
        project_of(make_register("beta"), "c3", jurisdiction="TX"),
        project_of(make_register("beta"), "c4", jurisdiction="TX"),
    )
    test_project = project_of(make_register("alpha", "alpha alpha"), "t0", jurisdiction="CA")
    return backend, corpus, test_project


def test_sensitivity_all_is_zero_delta():
    backend, corpus, test_project = _sensitivity_fixture()
    report = sensitivity_run(corpus, [test_project], "all", backend, top_n=30)
    row = report["projects"][0]
    assert row["delta"] == {"recall": 0.0, "precision": 0.0, "f1": 0.0}
    assert report["mean_delta"]["recall"] == 0.0


def test_sensitivity_location_improves_recall():
    backend, corpus, test_project = _sensitivity_fixture()
    # truncate the baseline template to 1 entry: pooled corpus ranks beta first
    report = sensitivity_run(
        corpus, [test_project], "jurisdiction", backend, top_n=1, label_threshold=0.6
    )
    row = report["projects"][0]
    assert not row["skipped"]
    assert row["filtered"]["recall"] > row["baseline"]["recall"]
    assert report["mean_delta"]["recall"] > 0


def test_sensitivity_empty_filter_is_skipped():
    backend, corpus, _ = _sensitivity_fixture()
    outsider = project_of(make_register("alpha"), "t1", jurisdiction="ZZ")
    report = sensitivity_run(corpus, [outsider], "jurisdiction", backend)
    assert report["projects"][0]["skipped"] is True
    assert report["skipped_count"] == 1


def test_sensitivity_rejects_overlapping_projects():
    backend, corpus, _ = _sensitivity_fixture()
    with pytest.raises(TemplateError, match="disjoint"):
        sensitivity_run(corpus, [corpus.projects[0]], "all", backend)
