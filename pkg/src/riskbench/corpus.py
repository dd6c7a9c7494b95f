"""Canonical data model for projects, registers, and risk assessments.

Registers arrive as CSV or JSON files listed in a manifest; parsing
preserves file order and normalization fills Likert bands and the
qualitative High/Medium/Low levels from raw measurements.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import CorpusError, NormalizeError, ParseError

REGISTER_CSV_COLUMNS = (
    "risk_id",
    "name",
    "description",
    "category",
    "probability",
    "cost_impact",
    "schedule_impact",
    "status",
    "snapshot",
)


class Qualitative(str, Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"
    UNSET = "Unset"


class SizeBand(str, Enum):
    UNDER_500M = "under_500M"
    M500_TO_1B = "500M_to_1B"
    OVER_1B = "over_1B"

    @classmethod
    def for_value(cls, contract_value_musd: float) -> "SizeBand":
        if contract_value_musd < 500:
            return cls.UNDER_500M
        if contract_value_musd <= 1000:
            return cls.M500_TO_1B
        return cls.OVER_1B


@dataclass(frozen=True)
class Assessment:
    """One risk's evaluation: 1-5 Likert bands plus optional raw values."""

    probability_band: int | None = None
    cost_band: int | None = None
    schedule_band: int | None = None
    qualitative_cost: Qualitative = Qualitative.UNSET
    qualitative_schedule: Qualitative = Qualitative.UNSET
    raw_probability: float | None = None
    raw_cost: float | None = None
    raw_schedule: float | None = None

    def __post_init__(self) -> None:
        for label in ("probability_band", "cost_band", "schedule_band"):
            band = getattr(self, label)
            if band is not None and band not in (1, 2, 3, 4, 5):
                raise CorpusError(f"{label} must be in 1..5, got {band!r}")
        if self.raw_probability is not None and not 0.0 <= self.raw_probability <= 1.0:
            raise CorpusError(
                f"raw_probability must be a fraction in [0, 1], got {self.raw_probability!r}"
            )

    def is_empty(self) -> bool:
        return all(
            getattr(self, name) is None
            for name in (
                "probability_band",
                "cost_band",
                "schedule_band",
                "raw_probability",
                "raw_cost",
                "raw_schedule",
            )
        )


@dataclass(frozen=True)
class RiskItem:
    risk_id: str
    name: str
    description: str | None = None
    category_label: str | None = None
    assessment: Assessment = field(default_factory=Assessment)
    status_note: str | None = None

    def __post_init__(self) -> None:
        if not self.name.strip():
            raise CorpusError(f"risk {self.risk_id!r} has an empty name")

    def matching_text(self, use_description: bool = False) -> str:
        if use_description and self.description:
            return f"{self.name} {self.description}"
        return self.name


@dataclass(frozen=True)
class RegisterSnapshot:
    ordinal: int
    label: str | None
    items: tuple[RiskItem, ...]

    def __post_init__(self) -> None:
        if self.ordinal < 0:
            raise CorpusError(f"snapshot ordinal must be >= 0, got {self.ordinal}")
        seen: set[str] = set()
        for item in self.items:
            if item.risk_id in seen:
                raise CorpusError(
                    f"duplicate risk_id {item.risk_id!r} in snapshot {self.ordinal}"
                )
            seen.add(item.risk_id)


@dataclass(frozen=True)
class ProjectRecord:
    project_id: str
    jurisdiction: str
    delivery_method: str
    project_type: str
    size_band: SizeBand
    contract_value_musd: float | None
    award_year: int | None
    snapshots: tuple[RegisterSnapshot, ...]

    def __post_init__(self) -> None:
        if not self.snapshots:
            raise CorpusError(f"project {self.project_id!r} has no snapshots")
        ordinals = [s.ordinal for s in self.snapshots]
        if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
            raise CorpusError(
                f"project {self.project_id!r} snapshot ordinals must strictly increase: {ordinals}"
            )
        if self.contract_value_musd is not None:
            expected = SizeBand.for_value(self.contract_value_musd)
            if expected is not self.size_band:
                raise CorpusError(
                    f"project {self.project_id!r} size_band {self.size_band.value} "
                    f"inconsistent with contract value {self.contract_value_musd} M$ "
                    f"(expected {expected.value})"
                )

    @property
    def register(self) -> RegisterSnapshot:
        """The earliest (ex-ante) snapshot, used by the text analytics."""
        return self.snapshots[0]


@dataclass(frozen=True)
class Corpus:
    projects: tuple[ProjectRecord, ...]
    manifest_path: str

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for project in self.projects:
            if project.project_id in seen:
                raise CorpusError(f"duplicate project_id {project.project_id!r}")
            seen.add(project.project_id)

    def project(self, project_id: str) -> ProjectRecord:
        for candidate in self.projects:
            if candidate.project_id == project_id:
                return candidate
        raise CorpusError(f"project {project_id!r} not in corpus")

    def __len__(self) -> int:
        return len(self.projects)


@dataclass(frozen=True)
class ScaleConfig:
    """Band edges and risk matrix used to normalize raw assessments.

    Edges are upper-inclusive: a value in (edge[i-1], edge[i]] maps to band
    i+1 (0-indexed intervals), with the first interval closed at its lower
    end. Cost edges are fractions of contract value; schedule edges are
    months.
    """

    probability_band_edges: tuple[float, float, float, float]
    cost_band_edges: tuple[float, float, float, float]
    schedule_band_edges: tuple[float, float, float, float]
    risk_matrix: dict[tuple[int, int], Qualitative]

    def __post_init__(self) -> None:
        for label in ("probability_band_edges", "cost_band_edges", "schedule_band_edges"):
            edges = getattr(self, label)
            if len(edges) != 4 or any(b <= a for a, b in zip(edges, edges[1:])):
                raise CorpusError(f"{label} must be 4 strictly ascending values: {edges}")
        for p in range(1, 6):
            for i in range(1, 6):
                if (p, i) not in self.risk_matrix:
                    raise CorpusError(f"risk_matrix missing entry for bands ({p}, {i})")


def default_scale_config() -> ScaleConfig:
    matrix = {}
    for p in range(1, 6):
        for i in range(1, 6):
            product = p * i
            if product >= 15:
                level = Qualitative.HIGH
            elif product >= 6:
                level = Qualitative.MEDIUM
            else:
                level = Qualitative.LOW
            matrix[(p, i)] = level
    return ScaleConfig(
        probability_band_edges=(0.10, 0.30, 0.50, 0.70),
        cost_band_edges=(0.001, 0.005, 0.01, 0.05),
        schedule_band_edges=(1.0, 3.0, 6.0, 12.0),
        risk_matrix=matrix,
    )


def load_scale_config(path: str | Path) -> ScaleConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        matrix = {
            (int(key.split(",")[0]), int(key.split(",")[1])): Qualitative(value)
            for key, value in raw["risk_matrix"].items()
        }
        return ScaleConfig(
            probability_band_edges=tuple(raw["probability_band_edges"]),
            cost_band_edges=tuple(raw["cost_band_edges"]),
            schedule_band_edges=tuple(raw["schedule_band_edges"]),
            risk_matrix=matrix,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"invalid scale config {path}: {exc}") from exc


def band_for(value: float, edges: Iterable[float]) -> int:
    """Map a raw value onto 1..5 using upper-inclusive band edges."""
    for index, edge in enumerate(edges):
        if value <= edge:
            return index + 1
    return 5


def normalize_assessment(
    raw: Assessment,
    project_value: float | None,
    cfg: ScaleConfig,
) -> Assessment:
    """Fill Likert bands from raw values and qualitative levels from bands."""
    if (
        raw.raw_probability is None
        and raw.raw_cost is None
        and raw.raw_schedule is None
    ):
        raise NormalizeError("no raw probability, cost, or schedule value to normalize")

    probability_band = raw.probability_band
    cost_band = raw.cost_band
    schedule_band = raw.schedule_band
    if raw.raw_probability is not None:
        probability_band = band_for(raw.raw_probability, cfg.probability_band_edges)
    if raw.raw_cost is not None:
        if project_value is None or project_value <= 0:
            raise NormalizeError(
                "a positive project value is required to normalize a raw cost impact"
            )
        cost_band = band_for(raw.raw_cost / project_value, cfg.cost_band_edges)
    if raw.raw_schedule is not None:
        schedule_band = band_for(raw.raw_schedule, cfg.schedule_band_edges)

    normalized = replace(
        raw,
        probability_band=probability_band,
        cost_band=cost_band,
        schedule_band=schedule_band,
    )
    return fill_qualitative(normalized, cfg)


def fill_qualitative(assessment: Assessment, cfg: ScaleConfig) -> Assessment:
    """Derive unset High/Medium/Low levels from available band pairs."""
    qualitative_cost = assessment.qualitative_cost
    qualitative_schedule = assessment.qualitative_schedule
    if (
        qualitative_cost is Qualitative.UNSET
        and assessment.probability_band is not None
        and assessment.cost_band is not None
    ):
        qualitative_cost = cfg.risk_matrix[(assessment.probability_band, assessment.cost_band)]
    if (
        qualitative_schedule is Qualitative.UNSET
        and assessment.probability_band is not None
        and assessment.schedule_band is not None
    ):
        qualitative_schedule = cfg.risk_matrix[
            (assessment.probability_band, assessment.schedule_band)
        ]
    return replace(
        assessment,
        qualitative_cost=qualitative_cost,
        qualitative_schedule=qualitative_schedule,
    )


def _value_or_none(text: str | None) -> str | None:
    if text is None:
        return None
    stripped = text.strip()
    return stripped or None


def _parse_measure(raw: str | None, column: str, where: str) -> tuple[int | None, float | None]:
    """Split a CSV measure cell into (band, raw_value).

    Integer literals 1..5 are Likert bands; any other numeric value is a raw
    measurement (write raw values with a decimal point to disambiguate).
    """
    text = _value_or_none(raw)
    if text is None:
        return None, None
    try:
        as_int = int(text)
    except ValueError:
        as_int = None
    if as_int is not None:
        if as_int not in (1, 2, 3, 4, 5):
            raise ParseError(f"{where}: {column} band {as_int} outside 1..5")
        return as_int, None
    try:
        return None, float(text)
    except ValueError as exc:
        raise ParseError(f"{where}: {column} value {text!r} is not numeric") from exc


def _item_from_fields(
    risk_id: str | None,
    name: str | None,
    description: str | None,
    category: str | None,
    probability: tuple[int | None, float | None],
    cost: tuple[int | None, float | None],
    schedule: tuple[int | None, float | None],
    status: str | None,
    where: str,
) -> RiskItem:
    if not risk_id or not risk_id.strip():
        raise ParseError(f"{where}: missing risk_id")
    if not name or not name.strip():
        raise ParseError(f"{where}: risk {risk_id!r} has an empty name")
    assessment = Assessment(
        probability_band=probability[0],
        cost_band=cost[0],
        schedule_band=schedule[0],
        raw_probability=probability[1],
        raw_cost=cost[1],
        raw_schedule=schedule[1],
    )
    return RiskItem(
        risk_id=risk_id.strip(),
        name=name.strip(),
        description=_value_or_none(description),
        category_label=_value_or_none(category),
        assessment=assessment,
        status_note=_value_or_none(status),
    )


def _parse_register_csv(data: bytes, source: str) -> RegisterSnapshot:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not valid UTF-8 ({exc})") from exc
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for required in ("risk_id", "name"):
        if required not in header:
            raise ParseError(f"{source}: header is missing required column {required!r}")

    items: list[RiskItem] = []
    seen: set[str] = set()
    snapshot_values: set[str] = set()
    for row in reader:
        where = f"{source}, row {reader.line_num}"
        try:
            item = _item_from_fields(
                row.get("risk_id"),
                row.get("name"),
                row.get("description"),
                row.get("category"),
                _parse_measure(row.get("probability"), "probability", where),
                _parse_measure(row.get("cost_impact"), "cost_impact", where),
                _parse_measure(row.get("schedule_impact"), "schedule_impact", where),
                row.get("status"),
                where,
            )
        except CorpusError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        if item.risk_id in seen:
            raise ParseError(f"{where}: duplicate risk_id {item.risk_id!r}")
        seen.add(item.risk_id)
        items.append(item)
        marker = _value_or_none(row.get("snapshot"))
        if marker is not None:
            snapshot_values.add(marker)

    ordinal = 0
    if snapshot_values:
        if len(snapshot_values) > 1:
            raise ParseError(
                f"{source}: snapshot column holds mixed values {sorted(snapshot_values)}"
            )
        try:
            ordinal = int(next(iter(snapshot_values)))
        except ValueError as exc:
            raise ParseError(f"{source}: snapshot column is not an integer") from exc
    return RegisterSnapshot(ordinal=ordinal, label=None, items=tuple(items))


def _parse_register_json(data: bytes, source: str) -> RegisterSnapshot:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{source}: invalid JSON ({exc})") from exc
    if isinstance(payload, list):
        payload = {"items": payload}
    if not isinstance(payload, dict) or not isinstance(payload.get("items"), list):
        raise ParseError(f"{source}: expected an object with an 'items' array")

    def measure(record: dict, key: str) -> tuple[int | None, float | None]:
        value = record.get(key)
        if value is None:
            return None, None
        if isinstance(value, bool):
            raise ParseError(f"{source}: {key} must be numeric")
        if isinstance(value, int):
            if value not in (1, 2, 3, 4, 5):
                raise ParseError(f"{source}: {key} band {value} outside 1..5")
            return value, None
        if isinstance(value, float):
            return None, value
        raise ParseError(f"{source}: {key} must be numeric, got {value!r}")

    items: list[RiskItem] = []
    seen: set[str] = set()
    for index, record in enumerate(payload["items"]):
        where = f"{source}, item {index}"
        if not isinstance(record, dict):
            raise ParseError(f"{where}: expected an object")
        try:
            item = _item_from_fields(
                record.get("risk_id"),
                record.get("name"),
                record.get("description"),
                record.get("category"),
                measure(record, "probability"),
                measure(record, "cost_impact"),
                measure(record, "schedule_impact"),
                record.get("status"),
                where,
            )
        except CorpusError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        if item.risk_id in seen:
            raise ParseError(f"{where}: duplicate risk_id {item.risk_id!r}")
        seen.add(item.risk_id)
        items.append(item)
    ordinal = payload.get("ordinal", 0)
    if not isinstance(ordinal, int) or ordinal < 0:
        raise ParseError(f"{source}: ordinal must be a non-negative integer")
    label = payload.get("label")
    return RegisterSnapshot(ordinal=ordinal, label=label, items=tuple(items))


def parse_register(data: bytes, fmt: str, source: str = "<register>") -> RegisterSnapshot:
    """Parse CSV or JSON register bytes into a snapshot, preserving order."""
    if fmt == "csv":
        return _parse_register_csv(data, source)
    if fmt == "json":
        return _parse_register_json(data, source)
    raise ParseError(f"unknown register format {fmt!r} (expected csv or json)")


def serialize_register(snapshot: RegisterSnapshot) -> bytes:
    """JSON round-trip form of a snapshot; parse(serialize(s)) == s."""

    def measure(band: int | None, raw: float | None) -> int | float | None:
        return band if band is not None else raw

    items = []
    for item in snapshot.items:
        a = item.assessment
        items.append(
            {
                "risk_id": item.risk_id,
                "name": item.name,
                "description": item.description,
                "category": item.category_label,
                "probability": measure(a.probability_band, a.raw_probability),
                "cost_impact": measure(a.cost_band, a.raw_cost),
                "schedule_impact": measure(a.schedule_band, a.raw_schedule),
                "status": item.status_note,
            }
        )
    payload = {"ordinal": snapshot.ordinal, "label": snapshot.label, "items": items}
    return json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")


def _finalize_item(
    item: RiskItem, project_value: float | None, cfg: ScaleConfig, where: str
) -> RiskItem:
    a = item.assessment
    has_raw = (
        a.raw_probability is not None or a.raw_cost is not None or a.raw_schedule is not None
    )
    try:
        assessment = (
            normalize_assessment(a, project_value, cfg) if has_raw else fill_qualitative(a, cfg)
        )
    except NormalizeError as exc:
        raise CorpusError(f"{where}: {exc}") from exc
    return replace(item, assessment=assessment)


def load_corpus(manifest_path: str | Path, scales: ScaleConfig | None = None) -> Corpus:
    """Load every project and register listed in a manifest, in file order."""
    cfg = scales or default_scale_config()
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise CorpusError(f"manifest not found: {manifest_path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{manifest_path}: invalid JSON ({exc})") from exc
    if not isinstance(manifest, dict) or not isinstance(manifest.get("projects"), list):
        raise ParseError(f"{manifest_path}: expected an object with a 'projects' array")

    base = manifest_path.parent
    projects: list[ProjectRecord] = []
    for entry in manifest["projects"]:
        project_id = entry.get("id")
        if not project_id:
            raise CorpusError(f"{manifest_path}: project entry without an 'id'")
        value = entry.get("contract_value_musd")
        snapshots: list[RegisterSnapshot] = []
        for register in entry.get("registers", []):
            path = base / register["path"]
            try:
                data = path.read_bytes()
            except FileNotFoundError as exc:
                raise CorpusError(
                    f"project {project_id!r}: register file not found: {path}"
                ) from exc
            fmt = "json" if path.suffix.lower() == ".json" else "csv"
            snapshot = parse_register(data, fmt, source=str(path))
            snapshot = RegisterSnapshot(
                ordinal=register.get("ordinal", snapshot.ordinal),
                label=register.get("label", snapshot.label),
                items=tuple(
                    _finalize_item(item, value, cfg, f"{path}:{item.risk_id}")
                    for item in snapshot.items
                ),
            )
            snapshots.append(snapshot)
        try:
            size_band = SizeBand(entry.get("size_band"))
        except ValueError as exc:
            raise CorpusError(
                f"project {project_id!r}: unknown size_band {entry.get('size_band')!r}"
            ) from exc
        projects.append(
            ProjectRecord(
                project_id=project_id,
                jurisdiction=entry.get("jurisdiction", ""),
                delivery_method=entry.get("delivery_method", ""),
                project_type=entry.get("project_type", ""),
                size_band=size_band,
                contract_value_musd=value,
                award_year=entry.get("award_year"),
                snapshots=tuple(sorted(snapshots, key=lambda s: s.ordinal)),
            )
        )
    return Corpus(projects=tuple(projects), manifest_path=str(manifest_path))
