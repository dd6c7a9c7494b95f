"""Risk-template pipeline: filter, group, summarize, classify, rank, score.

Grouping is greedy and seed-anchored: walking risks in corpus order, the
first unassigned risk opens a group and every later unassigned risk whose
cosine similarity to that seed meets the threshold joins it. Assigned risks
are skipped by later seeds, so the result is a partition.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Assessment, Corpus, ProjectRecord, RegisterSnapshot
from .errors import RbsError, TemplateError
from .resources import data_path
from .vectorize import (
    EmbeddingBackend,
    best_against,
    cosine,
    cosine_table,
    embed_text,
    normalize_sentence,
    unit_rows,
)

DEFAULT_MATCH_THRESHOLD = 0.7
DEFAULT_LABEL_THRESHOLD = 0.6
SMALL_SUBSET_WARNING = 5

SORT_KEYS = ("prevalence", "cost", "schedule")


@dataclass(frozen=True)
class FilterCriteria:
    """Conjunctive project filter; unset fields select everything."""

    project_type: str | None = None
    size_band: str | None = None
    delivery_method: str | None = None
    jurisdiction: str | None = None

    def matches(self, project: ProjectRecord) -> bool:
        if self.project_type is not None and project.project_type != self.project_type:
            return False
        if self.size_band is not None and project.size_band.value != self.size_band:
            return False
        if self.delivery_method is not None and project.delivery_method != self.delivery_method:
            return False
        if self.jurisdiction is not None and project.jurisdiction != self.jurisdiction:
            return False
        return True

    def describe(self) -> dict[str, str]:
        return {
            name: getattr(self, name) if getattr(self, name) is not None else "all"
            for name in ("project_type", "size_band", "delivery_method", "jurisdiction")
        }


def parse_filter(expression: str) -> FilterCriteria:
    """Parse "type=highway,size=over_1B" style filter strings."""
    aliases = {
        "type": "project_type",
        "project_type": "project_type",
        "size": "size_band",
        "size_band": "size_band",
        "delivery": "delivery_method",
        "delivery_method": "delivery_method",
        "location": "jurisdiction",
        "jurisdiction": "jurisdiction",
    }
    values: dict[str, str] = {}
    if expression.strip():
        for chunk in expression.split(","):
            if "=" not in chunk:
                raise TemplateError(f"bad filter clause {chunk!r}, expected key=value")
            key, _, value = chunk.partition("=")
            name = aliases.get(key.strip().lower())
            if name is None:
                raise TemplateError(f"unknown filter key {key.strip()!r}")
            if value.strip().lower() != "all":
                values[name] = value.strip()
    return FilterCriteria(**values)


def filter_projects(corpus: Corpus, criteria: FilterCriteria) -> list[ProjectRecord]:
    """Conjunction of the set criteria, order preserved; warns when small."""
    selected = [p for p in corpus.projects if criteria.matches(p)]
    if len(selected) < SMALL_SUBSET_WARNING:
        warnings.warn(
            f"filter selects only {len(selected)} project(s); "
            "small retrieval sets can bias the template"
        )
    return selected


@dataclass(frozen=True)
class GroupMember:
    project_id: str
    risk_id: str
    text: str
    assessment: Assessment


@dataclass(frozen=True)
class RiskGroup:
    seed_risk_id: str
    member_refs: tuple[tuple[str, str], ...]
    representative_text: str
    prevalence: float
    avg_probability_band: float | None
    avg_cost_band: float | None
    avg_schedule_band: float | None
    category: str | None = None
    size: int = 0


def _band_average(members: Sequence[GroupMember], attr: str) -> float | None:
    values = [getattr(m.assessment, attr) for m in members]
    present = [v for v in values if v is not None]
    if not present:
        return None
    return sum(present) / len(present)


def summarize_group(
    members: Sequence[GroupMember],
    selected_project_count: int,
    category: str | None = None,
) -> RiskGroup:
    """Fill representative text, prevalence, and band averages for a group."""
    if not members:
        raise TemplateError("cannot summarize an empty group")
    frequency: dict[str, int] = {}
    for member in members:
        frequency[member.text] = frequency.get(member.text, 0) + 1
    representative = min(frequency, key=lambda text: (-frequency[text], text))
    contributing = len({m.project_id for m in members})
    return RiskGroup(
        seed_risk_id=members[0].risk_id,
        member_refs=tuple((m.project_id, m.risk_id) for m in members),
        representative_text=representative,
        prevalence=contributing / selected_project_count,
        avg_probability_band=_band_average(members, "probability_band"),
        avg_cost_band=_band_average(members, "cost_band"),
        avg_schedule_band=_band_average(members, "schedule_band"),
        category=category,
        size=len(members),
    )


def group_risks(
    projects: Sequence[ProjectRecord],
    backend: EmbeddingBackend,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
    use_description: bool = False,
) -> list[RiskGroup]:
    """Greedy seed clustering of every register risk in corpus order."""
    if not projects:
        raise TemplateError("grouping needs at least one project")
    members: list[GroupMember] = []
    texts: list[str] = []
    for project in projects:
        for item in project.register.items:
            text = item.matching_text(use_description)
            members.append(
                GroupMember(
                    project_id=project.project_id,
                    risk_id=item.risk_id,
                    text=normalize_sentence(text),
                    assessment=item.assessment,
                )
            )
            texts.append(text)
    units = unit_rows(backend, texts)

    assigned = [False] * len(members)
    groups: list[RiskGroup] = []
    for seed in range(len(members)):
        if assigned[seed]:
            continue
        assigned[seed] = True
        bucket = [members[seed]]
        if seed + 1 < len(members):
            scores = cosine_table(units[seed : seed + 1], units[seed + 1 :])[0]
            for offset, score in enumerate(scores):
                later = seed + 1 + offset
                if not assigned[later] and score >= threshold:
                    assigned[later] = True
                    bucket.append(members[later])
        groups.append(summarize_group(bucket, len(projects)))
    return groups


@dataclass(frozen=True)
class Category:
    name: str
    description: str = ""


@dataclass(frozen=True)
class CategorySet:
    categories: tuple[Category, ...]

    def __post_init__(self) -> None:
        if not self.categories:
            raise RbsError("category set must not be empty")
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise RbsError("category names must be unique")


def load_categories(path: str | Path) -> CategorySet:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        categories = tuple(
            Category(name=entry["name"], description=entry.get("description", ""))
            for entry in raw["categories"]
        )
    except (KeyError, TypeError) as exc:
        raise RbsError(f"invalid category file {path}: {exc}") from exc
    return CategorySet(categories)


def default_categories() -> CategorySet:
    return load_categories(data_path("wsdot_categories.json"))


@dataclass(frozen=True)
class ClassifiedRisk:
    label: str
    score: float
    all_oov: bool = False


def classify_risk(
    text: str,
    categories: CategorySet,
    backend: EmbeddingBackend,
    label_only: bool = False,
) -> ClassifiedRisk:
    """Assign the category whose embedded label text is most similar."""
    source = embed_text(backend, text)
    best_index, best_score = 0, -math.inf
    for index, category in enumerate(categories.categories):
        target_text = (
            category.name if label_only else f"{category.name} {category.description}".strip()
        )
        target = embed_text(backend, target_text)
        score = cosine(source.vector, target.vector)
        if score > best_score:
            best_index, best_score = index, score
    return ClassifiedRisk(
        label=categories.categories[best_index].name,
        score=best_score,
        all_oov=source.all_oov,
    )


@dataclass(frozen=True)
class TemplateEntry:
    rank: int
    text: str
    category: str | None
    prevalence: float
    avg_probability: float | None
    avg_cost: float | None
    avg_schedule: float | None
    group_size: int
    source_projects: int


@dataclass(frozen=True)
class RiskTemplate:
    entries: tuple[TemplateEntry, ...]
    sort_key: str
    source_filter: FilterCriteria
    source_project_count: int

    def to_dict(self) -> dict:
        return {
            "sort_key": self.sort_key,
            "source_filter": self.source_filter.describe(),
            "source_project_count": self.source_project_count,
            "entries": [
                {
                    "rank": e.rank,
                    "text": e.text,
                    "category": e.category,
                    "prevalence": e.prevalence,
                    "avg_probability": e.avg_probability,
                    "avg_cost": e.avg_cost,
                    "avg_schedule": e.avg_schedule,
                    "group_size": e.group_size,
                    "source_projects": e.source_projects,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RiskTemplate":
        try:
            entries = tuple(
                TemplateEntry(
                    rank=e["rank"],
                    text=e["text"],
                    category=e.get("category"),
                    prevalence=e["prevalence"],
                    avg_probability=e.get("avg_probability"),
                    avg_cost=e.get("avg_cost"),
                    avg_schedule=e.get("avg_schedule"),
                    group_size=e.get("group_size", 1),
                    source_projects=e.get("source_projects", 1),
                )
                for e in raw["entries"]
            )
            described = raw.get("source_filter", {})
            criteria = FilterCriteria(
                **{
                    name: (None if described.get(name, "all") == "all" else described[name])
                    for name in (
                        "project_type",
                        "size_band",
                        "delivery_method",
                        "jurisdiction",
                    )
                }
            )
            return cls(
                entries=entries,
                sort_key=raw.get("sort_key", "prevalence"),
                source_filter=criteria,
                source_project_count=raw.get("source_project_count", 0),
            )
        except (KeyError, TypeError) as exc:
            raise TemplateError(f"invalid template payload: {exc}") from exc


def _sort_value(group: RiskGroup, sort_key: str) -> float:
    if sort_key == "prevalence":
        return group.prevalence
    value = group.avg_cost_band if sort_key == "cost" else group.avg_schedule_band
    return value if value is not None else -math.inf


def build_template(
    groups: Sequence[RiskGroup],
    sort_key: str = "prevalence",
    top_n: int = 30,
    source_filter: FilterCriteria | None = None,
    source_project_count: int = 0,
) -> RiskTemplate:
    """Rank groups by the sort key and keep the top N."""
    if not groups:
        raise TemplateError("cannot build a template from zero groups")
    if top_n <= 0:
        raise TemplateError(f"top_n must be positive, got {top_n}")
    if sort_key not in SORT_KEYS:
        raise TemplateError(f"sort_key must be one of {SORT_KEYS}, got {sort_key!r}")
    ranked = sorted(
        groups,
        key=lambda g: (-_sort_value(g, sort_key), -g.prevalence, g.representative_text),
    )[:top_n]
    entries = tuple(
        TemplateEntry(
            rank=rank,
            text=group.representative_text,
            category=group.category,
            prevalence=group.prevalence,
            avg_probability=group.avg_probability_band,
            avg_cost=group.avg_cost_band,
            avg_schedule=group.avg_schedule_band,
            group_size=group.size,
            source_projects=len({pid for pid, _ in group.member_refs}),
        )
        for rank, group in enumerate(ranked, start=1)
    )
    return RiskTemplate(
        entries=entries,
        sort_key=sort_key,
        source_filter=source_filter or FilterCriteria(),
        source_project_count=source_project_count,
    )


@dataclass(frozen=True)
class EvalCounts:
    """Template-vs-register outcome counts and the derived metrics."""

    tp: int
    fn: int
    fp: int
    recall: float | None
    precision: float | None
    f1: float | None

    @classmethod
    def from_counts(cls, tp: int, fn: int, fp: int) -> "EvalCounts":
        if min(tp, fn, fp) < 0:
            raise TemplateError("outcome counts must be non-negative")
        recall = tp / (tp + fn) if tp + fn > 0 else None
        precision = tp / (tp + fp) if tp + fp > 0 else None
        f1 = tp / (tp + 0.5 * (fn + fp)) if tp + fn + fp > 0 else None
        return cls(tp=tp, fn=fn, fp=fp, recall=recall, precision=precision, f1=f1)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fn": self.fn,
            "fp": self.fp,
            "recall": self.recall,
            "precision": self.precision,
            "f1": self.f1,
        }


def evaluate_template(
    template: RiskTemplate,
    test_register: RegisterSnapshot,
    backend: EmbeddingBackend,
    label_threshold: float = DEFAULT_LABEL_THRESHOLD,
    use_description: bool = False,
) -> EvalCounts:
    """Score a template against a held-out register.

    Each test risk best-matches into the template; a score at or above the
    threshold is a true positive, below is a false negative. Template
    entries never chosen as the best match of any true-positive risk count
    as false positives.
    """
    if not template.entries:
        raise TemplateError("cannot evaluate an empty template")
    if not test_register.items:
        raise TemplateError("cannot evaluate against an empty register")
    entry_units = unit_rows(backend, [entry.text for entry in template.entries])
    risk_units = unit_rows(
        backend, [item.matching_text(use_description) for item in test_register.items]
    )
    indices, scores = best_against(risk_units, entry_units)
    chosen_by_tp: set[int] = set()
    tp = fn = 0
    for index, score in zip(indices, scores):
        if score >= label_threshold:
            tp += 1
            chosen_by_tp.add(int(index))
        else:
            fn += 1
    fp = len(template.entries) - len(chosen_by_tp)
    return EvalCounts.from_counts(tp, fn, fp)


CHARACTERISTICS = ("all", "project_type", "delivery_method", "size_band", "jurisdiction")


def _criteria_for(project: ProjectRecord, characteristic: str) -> FilterCriteria:
    if characteristic == "all":
        return FilterCriteria()
    if characteristic == "size_band":
        return FilterCriteria(size_band=project.size_band.value)
    return FilterCriteria(**{characteristic: getattr(project, characteristic)})


def sensitivity_run(
    corpus: Corpus,
    test_projects: Sequence[ProjectRecord],
    characteristic: str,
    backend: EmbeddingBackend,
    *,
    sort_key: str = "prevalence",
    top_n: int = 30,
    match_threshold: float = DEFAULT_MATCH_THRESHOLD,
    label_threshold: float = DEFAULT_LABEL_THRESHOLD,
) -> dict:
    """Metric deltas of characteristic-filtered templates vs the baseline."""
    if characteristic not in CHARACTERISTICS:
        raise TemplateError(f"unknown characteristic {characteristic!r}")
    corpus_ids = {p.project_id for p in corpus.projects}
    overlap = [p.project_id for p in test_projects if p.project_id in corpus_ids]
    if overlap:
        raise TemplateError(f"test projects must be disjoint from the corpus: {overlap}")

    baseline_groups = group_risks(list(corpus.projects), backend, match_threshold)
    baseline_template = build_template(
        baseline_groups, sort_key, top_n, FilterCriteria(), len(corpus.projects)
    )

    rows = []
    for project in test_projects:
        base = evaluate_template(
            baseline_template, project.register, backend, label_threshold
        )
        row: dict = {
            "project_id": project.project_id,
            "baseline": base.to_dict(),
            "characteristic_value": (
                "all"
                if characteristic == "all"
                else _criteria_for(project, characteristic).describe()[characteristic]
            ),
        }
        criteria = _criteria_for(project, characteristic)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            subset = filter_projects(corpus, criteria)
        if not subset:
            row["skipped"] = True
            rows.append(row)
            continue
        groups = group_risks(subset, backend, match_threshold)
        template = build_template(groups, sort_key, top_n, criteria, len(subset))
        scored = evaluate_template(template, project.register, backend, label_threshold)
        row["skipped"] = False
        row["filtered"] = scored.to_dict()
        row["delta"] = {
            metric: (
                getattr(scored, metric) - getattr(base, metric)
                if getattr(scored, metric) is not None and getattr(base, metric) is not None
                else None
            )
            for metric in ("recall", "precision", "f1")
        }
        rows.append(row)

    evaluated = [r for r in rows if not r["skipped"]]
    mean_delta = {
        metric: (
            sum(r["delta"][metric] for r in evaluated if r["delta"][metric] is not None)
            / len([r for r in evaluated if r["delta"][metric] is not None])
            if any(r["delta"][metric] is not None for r in evaluated)
            else None
        )
        for metric in ("recall", "precision", "f1")
    }
    return {
        "characteristic": characteristic,
        "projects": rows,
        "mean_delta": mean_delta,
        "skipped_count": sum(1 for r in rows if r["skipped"]),
    }
