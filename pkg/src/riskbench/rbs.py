"""Risk breakdown structure: loading, semantic coverage, co-occurrence.

The bundled two-level RBS holds 11 categories and 70 generic risk items.
Coverage matches each register risk to its most similar RBS item; a risk
counts as covered when the best cosine score meets the threshold
(default 0.6).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import RegisterSnapshot
from .errors import EmptyReportError, MissingEmbeddingError, RbsError
from .resources import data_path
from .similarity import score_histogram
from .vectorize import (
    EmbeddingBackend,
    cosine_table,
    embed_text,
    normalize_sentence,
    unit_rows,
)

DEFAULT_COVERAGE_THRESHOLD = 0.6


@dataclass(frozen=True)
class RbsItem:
    text: str
    report_frequency: int


@dataclass(frozen=True)
class RbsCategory:
    name: str
    items: tuple[RbsItem, ...]


@dataclass(frozen=True)
class Rbs:
    categories: tuple[RbsCategory, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise RbsError("category names must be unique")
        seen: set[str] = set()
        for category in self.categories:
            if not category.items:
                raise RbsError(f"category {category.name!r} has no items")
            for item in category.items:
                if item.report_frequency < 1:
                    raise RbsError(f"item {item.text!r} has frequency < 1")
                if item.text in seen:
                    raise RbsError(f"duplicate item text {item.text!r}")
                seen.add(item.text)

    def flat_items(self) -> list[tuple[str, RbsItem]]:
        """(category_name, item) pairs in file order."""
        return [(c.name, item) for c in self.categories for item in c.items]

    @property
    def item_count(self) -> int:
        return sum(len(c.items) for c in self.categories)


def load_rbs(path: str | Path) -> Rbs:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        categories = tuple(
            RbsCategory(
                name=entry["name"],
                items=tuple(
                    RbsItem(text=item["text"], report_frequency=item["frequency"])
                    for item in entry["items"]
                ),
            )
            for entry in raw["categories"]
        )
    except (KeyError, TypeError) as exc:
        raise RbsError(f"invalid RBS file {path}: {exc}") from exc
    return Rbs(categories)


def default_rbs() -> Rbs:
    return load_rbs(data_path("rbs_table21.json"))


@dataclass(frozen=True)
class CoverageRow:
    risk_id: str
    best_item: str
    best_category: str
    score: float
    covered: bool
    used_fallback: bool = False


@dataclass(frozen=True)
class CoverageReport:
    project_id: str
    threshold: float
    rows: tuple[CoverageRow, ...]
    coverage_fraction: float
    histogram: dict[str, int]
    category_fractions: list[tuple[str, float]]
    impact_means: dict
    # agreement between the register's own category labels and the matched
    # level-1 category, over covered rows that carry a label
    category_agreement: float | None = None

    def covered_items(self) -> set[str]:
        return {row.best_item for row in self.rows if row.covered}

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id,
            "threshold": self.threshold,
            "coverage_fraction": self.coverage_fraction,
            "histogram": self.histogram,
            "category_fractions": [
                {"category": name, "fraction": fraction}
                for name, fraction in self.category_fractions
            ],
            "impact_means": self.impact_means,
            "category_agreement": self.category_agreement,
            "rows": [
                {
                    "risk_id": row.risk_id,
                    "best_item": row.best_item,
                    "best_category": row.best_category,
                    "score": row.score,
                    "covered": row.covered,
                    "used_fallback": row.used_fallback,
                }
                for row in self.rows
            ],
        }


def _try_embed(backend: EmbeddingBackend, text: str, allow_miss: bool) -> np.ndarray | None:
    try:
        return embed_text(backend, text).vector
    except MissingEmbeddingError:
        if not allow_miss:
            raise
        return None


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else vector


def coverage(
    rbs: Rbs,
    register: RegisterSnapshot,
    backend: EmbeddingBackend,
    threshold: float = DEFAULT_COVERAGE_THRESHOLD,
    project_id: str = "",
    fallback_backend: EmbeddingBackend | None = None,
) -> CoverageReport:
    """Best-match every register risk to an RBS item and flag coverage.

    A pair is scored in the primary space when both texts embed there; when
    a precomputed sentence backend misses either text, the word-average
    fallback (if given) scores the pair and the row is flagged.
    """
    if not register.items:
        raise EmptyReportError("coverage needs a non-empty register")
    flat = rbs.flat_items()
    has_fallback = fallback_backend is not None
    primary_vectors = [_try_embed(backend, item.text, has_fallback) for _, item in flat]
    primary_ok = np.array([vector is not None for vector in primary_vectors])
    primary_units = np.stack([
        _unit(vector) if vector is not None else np.zeros(backend.dimension)
        for vector in primary_vectors
    ])
    fallback_units = (
        unit_rows(fallback_backend, [item.text for _, item in flat]) if has_fallback else None
    )

    rows: list[CoverageRow] = []
    for risk in register.items:
        primary = _try_embed(backend, risk.name, has_fallback)
        fell_back = primary is None
        fallback_scores = (
            cosine_table(_unit(embed_text(fallback_backend, risk.name).vector)[None, :],
                         fallback_units)[0]
            if has_fallback
            else None
        )
        if primary is not None:
            scores = cosine_table(_unit(primary)[None, :], primary_units)[0]
            if has_fallback and not primary_ok.all():
                scores = np.where(primary_ok, scores, fallback_scores)
        else:
            scores = fallback_scores
        best_index = int(scores.argmax())
        best_score = float(scores[best_index])
        category_name, item = flat[best_index]
        rows.append(
            CoverageRow(
                risk_id=risk.risk_id,
                best_item=item.text,
                best_category=category_name,
                score=best_score,
                covered=best_score >= threshold,
                used_fallback=fell_back,
            )
        )

    covered_rows = [row for row in rows if row.covered]
    fraction = len(covered_rows) / len(rows)
    per_category: dict[str, int] = {}
    for row in covered_rows:
        per_category[row.best_category] = per_category.get(row.best_category, 0) + 1
    category_fractions = sorted(
        ((name, count / len(covered_rows)) for name, count in per_category.items()),
        key=lambda pair: (-pair[1], pair[0]),
    ) if covered_rows else []

    labels = {item.risk_id: item.category_label for item in register.items}
    labeled = [
        (normalize_sentence(labels[row.risk_id]), normalize_sentence(row.best_category))
        for row in covered_rows
        if labels.get(row.risk_id)
    ]
    agreement = (
        sum(1 for own, matched in labeled if own == matched) / len(labeled)
        if labeled
        else None
    )

    def impact_means(selected_rows: list[CoverageRow]) -> dict:
        ids = {row.risk_id for row in selected_rows}
        cost = [
            item.assessment.cost_band
            for item in register.items
            if item.risk_id in ids and item.assessment.cost_band is not None
        ]
        schedule = [
            item.assessment.schedule_band
            for item in register.items
            if item.risk_id in ids and item.assessment.schedule_band is not None
        ]
        return {
            "cost_band": sum(cost) / len(cost) if cost else None,
            "schedule_band": sum(schedule) / len(schedule) if schedule else None,
        }

    return CoverageReport(
        project_id=project_id,
        threshold=threshold,
        rows=tuple(rows),
        coverage_fraction=fraction,
        histogram=score_histogram(row.score for row in rows),
        category_fractions=category_fractions,
        impact_means={
            "covered": impact_means(covered_rows),
            "not_covered": impact_means([row for row in rows if not row.covered]),
        },
        category_agreement=agreement,
    )


def category_distribution(reports: Sequence[CoverageReport]) -> list[tuple[str, float]]:
    """Fraction of covered risks per level-1 category, descending."""
    counts: dict[str, int] = {}
    total = 0
    for report in reports:
        for row in report.rows:
            if row.covered:
                counts[row.best_category] = counts.get(row.best_category, 0) + 1
                total += 1
    if total == 0:
        raise EmptyReportError("no covered risks across the supplied reports")
    return sorted(
        ((name, count / total) for name, count in counts.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )


@dataclass(frozen=True)
class CooccurrenceMatrix:
    """Project-level co-occurrence counts over RBS items (i < j stored)."""

    item_texts: tuple[str, ...]
    counts: dict[tuple[int, int], int]
    occurrences: dict[int, int]
    project_count: int

    def count(self, item_a: str, item_b: str) -> int:
        ia = self.item_texts.index(item_a)
        ib = self.item_texts.index(item_b)
        if ia == ib:
            return self.occurrences.get(ia, 0)
        key = (min(ia, ib), max(ia, ib))
        return self.counts.get(key, 0)

    def pairs_descending(self) -> list[tuple[str, str, int]]:
        rows = [
            (self.item_texts[i], self.item_texts[j], count)
            for (i, j), count in self.counts.items()
        ]
        rows.sort(key=lambda row: (-row[2], row[0], row[1]))
        return rows


def cooccurrence(reports: Sequence[CoverageReport], rbs: Rbs) -> CooccurrenceMatrix:
    """Count, for each RBS item pair, the projects where both are covered."""
    if not reports:
        raise EmptyReportError("co-occurrence needs at least one coverage report")
    texts = tuple(item.text for _, item in rbs.flat_items())
    index = {text: i for i, text in enumerate(texts)}
    counts: dict[tuple[int, int], int] = {}
    occurrences: dict[int, int] = {}
    for report in reports:
        present = sorted(index[text] for text in report.covered_items())
        for i in present:
            occurrences[i] = occurrences.get(i, 0) + 1
        for a in range(len(present)):
            for b in range(a + 1, len(present)):
                key = (present[a], present[b])
                counts[key] = counts.get(key, 0) + 1
    return CooccurrenceMatrix(
        item_texts=texts,
        counts=counts,
        occurrences=occurrences,
        project_count=len(reports),
    )
