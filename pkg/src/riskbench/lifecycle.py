"""Finite-state risk lifecycle tracking, performance ratios, and styles.

States are Registered, Happening, and Closed. A risk enters through
`generate`, may `occur` once (Reg to Hap), persists with `continue`, and
ends with `close` from either live state. Closure tabulation follows four
rules: a risk seen Happening counts as realized, a risk seen only
Registered counts as dismissed, no risk may start Closed, and every risk is
closed at the final register.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .corpus import Corpus, ProjectRecord
from .errors import LifecycleError, ParseError, StatTestError, TransitionError


class RiskState(str, Enum):
    REG = "Reg"
    HAP = "Hap"
    CLO = "Clo"


class RiskTransition(str, Enum):
    GENERATE = "generate"
    OCCUR = "occur"
    CONTINUE = "continue"
    CLOSE = "close"


class Origin(str, Enum):
    INITIAL = "initial"
    CONSTRUCTION = "construction"


class Outcome(str, Enum):
    REALIZED = "realized"
    DISMISSED = "dismissed"


# Transition table; None stands for the pre-identification state.
_STEP_TABLE: dict[tuple[RiskState | None, RiskTransition], RiskState] = {
    (None, RiskTransition.GENERATE): RiskState.REG,
    (RiskState.REG, RiskTransition.OCCUR): RiskState.HAP,
    (RiskState.REG, RiskTransition.CONTINUE): RiskState.REG,
    (RiskState.HAP, RiskTransition.CONTINUE): RiskState.HAP,
    (RiskState.CLO, RiskTransition.CONTINUE): RiskState.CLO,
    (RiskState.REG, RiskTransition.CLOSE): RiskState.CLO,
    (RiskState.HAP, RiskTransition.CLOSE): RiskState.CLO,
}


def step(state: RiskState | None, transition: RiskTransition) -> RiskState:
    """Apply one transition; illegal pairs raise naming the pair."""
    result = _STEP_TABLE.get((state, transition))
    if result is None:
        shown = state.value if state is not None else "unidentified"
        raise TransitionError(f"illegal transition ({shown}, {transition.value})")
    return result


def accepts(transitions: Sequence[RiskTransition]) -> bool:
    """Whether a transition word is a complete, legal risk lifecycle.

    The accepted language is generate continue* (occur continue*)? close:
    the word must open with generate, every step must be legal, and close
    must be the final symbol (a closed risk emits nothing further).
    """
    if not transitions:
        return False
    state: RiskState | None = None
    for transition in transitions:
        if state is RiskState.CLO:
            return False
        try:
            state = step(state, transition)
        except TransitionError:
            return False
    return state is RiskState.CLO


@dataclass(frozen=True)
class InferenceRules:
    """How an observation maps to a state when no explicit state is given."""

    happening_probability_min: float = 0.9
    require_impact: bool = True


@dataclass(frozen=True)
class RiskObservation:
    snapshot_ordinal: int
    explicit_state: RiskState | None = None
    probability_fraction: float | None = None
    impact_recorded: bool = False


def infer_state(obs: RiskObservation, rules: InferenceRules = InferenceRules()) -> RiskState:
    """Explicit state wins; else high probability plus impact means Happening."""
    if obs.explicit_state is not None:
        return obs.explicit_state
    if (
        obs.probability_fraction is not None
        and obs.probability_fraction >= rules.happening_probability_min
        and (obs.impact_recorded or not rules.require_impact)
    ):
        return RiskState.HAP
    return RiskState.REG


@dataclass(frozen=True)
class RiskLifecycle:
    risk_id: str
    origin: Origin
    first_ordinal: int
    state_sequence: tuple[RiskState, ...]
    transitions: tuple[RiskTransition, ...]
    outcome: Outcome


def build_lifecycle(
    risk_id: str,
    observations: Sequence[RiskObservation],
    project_snapshot_count: int,
    rules: InferenceRules = InferenceRules(),
) -> RiskLifecycle:
    """Tabulate one risk's per-snapshot states and reconstruct its word.

    Unobserved snapshots carry the previous state forward; the final
    snapshot always closes the risk. The reconstructed transition word is
    checked against the automaton language.
    """
    if not observations:
        raise LifecycleError(f"risk {risk_id!r}: no observations")
    ordinals = [obs.snapshot_ordinal for obs in observations]
    if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
        raise LifecycleError(f"risk {risk_id!r}: observation ordinals must strictly ascend")
    final_ordinal = project_snapshot_count - 1
    if ordinals[0] < 0 or ordinals[-1] > final_ordinal:
        raise LifecycleError(
            f"risk {risk_id!r}: ordinals {ordinals} outside snapshots 0..{final_ordinal}"
        )

    observed = {obs.snapshot_ordinal: infer_state(obs, rules) for obs in observations}
    if observed[ordinals[0]] is RiskState.CLO:
        raise LifecycleError(
            f"risk {risk_id!r}: a risk cannot be Closed at its first observation"
        )

    states: list[RiskState] = []
    previous: RiskState | None = None
    for ordinal in range(ordinals[0], final_ordinal + 1):
        current = observed.get(ordinal, previous)
        if previous is RiskState.HAP and current is RiskState.REG:
            raise LifecycleError(
                f"risk {risk_id!r}: illegal regression Hap -> Reg at snapshot {ordinal}"
            )
        if previous is RiskState.CLO and current is not RiskState.CLO:
            raise LifecycleError(
                f"risk {risk_id!r}: reopened after Closed at snapshot {ordinal}"
            )
        states.append(current)
        previous = current

    realized = any(state is RiskState.HAP for state in states)

    transitions: list[RiskTransition] = [RiskTransition.GENERATE]
    if states[0] is RiskState.HAP:
        transitions.append(RiskTransition.OCCUR)
    closed = False
    for before, after in zip(states, states[1:]):
        if closed:
            break
        if after is RiskState.CLO:
            if before is not RiskState.CLO:
                transitions.append(RiskTransition.CLOSE)
                closed = True
        elif before is RiskState.REG and after is RiskState.HAP:
            transitions.append(RiskTransition.OCCUR)
        else:
            transitions.append(RiskTransition.CONTINUE)
    if not closed:
        transitions.append(RiskTransition.CLOSE)

    word = tuple(transitions)
    if not accepts(word):
        raise LifecycleError(f"risk {risk_id!r}: reconstructed word is not accepted: {word}")

    # Assumption 4: the final register closes everything.
    states[-1] = RiskState.CLO
    return RiskLifecycle(
        risk_id=risk_id,
        origin=Origin.INITIAL if ordinals[0] == 0 else Origin.CONSTRUCTION,
        first_ordinal=ordinals[0],
        state_sequence=tuple(states),
        transitions=word,
        outcome=Outcome.REALIZED if realized else Outcome.DISMISSED,
    )


@dataclass(frozen=True)
class RatioSet:
    """Identification/realization counts and the seven performance ratios."""

    initial_identified: int
    initial_realized: int
    construction_identified: int
    construction_realized: int
    total_realization: float | None
    total_dismissed: float | None
    initial_realization: float | None
    initial_dismissed: float | None
    initial_efficiency: float | None
    new_item: float | None
    further_realized: float | None

    @classmethod
    def from_counts(
        cls,
        initial_identified: int,
        initial_realized: int,
        construction_identified: int,
        construction_realized: int,
    ) -> "RatioSet":
        if initial_realized > initial_identified:
            raise LifecycleError("more initial risks realized than identified")
        if construction_realized > construction_identified:
            raise LifecycleError("more construction risks realized than identified")
        total_identified = initial_identified + construction_identified
        total_realized = initial_realized + construction_realized

        def ratio(numerator: int, denominator: int) -> float | None:
            return numerator / denominator if denominator > 0 else None

        return cls(
            initial_identified=initial_identified,
            initial_realized=initial_realized,
            construction_identified=construction_identified,
            construction_realized=construction_realized,
            total_realization=ratio(total_realized, total_identified),
            total_dismissed=ratio(total_identified - total_realized, total_identified),
            initial_realization=ratio(initial_realized, initial_identified),
            initial_dismissed=ratio(initial_identified - initial_realized, initial_identified),
            initial_efficiency=ratio(initial_realized, total_realized),
            new_item=ratio(construction_identified, total_identified),
            further_realized=ratio(construction_realized, construction_identified),
        )

    def to_dict(self) -> dict:
        return {
            "counts": {
                "initial_identified": self.initial_identified,
                "initial_realized": self.initial_realized,
                "construction_identified": self.construction_identified,
                "construction_realized": self.construction_realized,
            },
            "total_realization": self.total_realization,
            "total_dismissed": self.total_dismissed,
            "initial_realization": self.initial_realization,
            "initial_dismissed": self.initial_dismissed,
            "initial_efficiency": self.initial_efficiency,
            "new_item": self.new_item,
            "further_realized": self.further_realized,
        }


def compute_ratios(lifecycles: Sequence[RiskLifecycle]) -> RatioSet:
    """Performance ratios for one project's completed lifecycles."""
    if not lifecycles:
        raise LifecycleError("cannot compute ratios over zero lifecycles")
    initial_identified = initial_realized = construction_identified = construction_realized = 0
    for lifecycle in lifecycles:
        realized = lifecycle.outcome is Outcome.REALIZED
        if lifecycle.origin is Origin.INITIAL:
            initial_identified += 1
            initial_realized += int(realized)
        else:
            construction_identified += 1
            construction_realized += int(realized)
    return RatioSet.from_counts(
        initial_identified, initial_realized, construction_identified, construction_realized
    )


def aggregate_ratios(per_project: Mapping[str, RatioSet]) -> RatioSet:
    """Pool counts across projects (sum numerators over sum denominators)."""
    if not per_project:
        raise LifecycleError("cannot aggregate zero projects")
    return RatioSet.from_counts(
        sum(r.initial_identified for r in per_project.values()),
        sum(r.initial_realized for r in per_project.values()),
        sum(r.construction_identified for r in per_project.values()),
        sum(r.construction_realized for r in per_project.values()),
    )


def _parse_explicit_state(note: str | None) -> RiskState | None:
    if note is None:
        return None
    key = note.strip().lower()
    aliases = {
        "reg": RiskState.REG,
        "registered": RiskState.REG,
        "hap": RiskState.HAP,
        "happening": RiskState.HAP,
        "clo": RiskState.CLO,
        "closed": RiskState.CLO,
    }
    return aliases.get(key)


def observations_from_project(project: ProjectRecord) -> dict[str, list[RiskObservation]]:
    """Per-risk observation sequences from a project's register snapshots."""
    observations: dict[str, list[RiskObservation]] = {}
    for snapshot in project.snapshots:
        for item in snapshot.items:
            a = item.assessment
            observations.setdefault(item.risk_id, []).append(
                RiskObservation(
                    snapshot_ordinal=snapshot.ordinal,
                    explicit_state=_parse_explicit_state(item.status_note),
                    probability_fraction=a.raw_probability,
                    impact_recorded=(
                        a.raw_cost is not None
                        or a.raw_schedule is not None
                        or a.cost_band is not None
                        or a.schedule_band is not None
                    ),
                )
            )
    return observations


def project_lifecycles(
    project: ProjectRecord, rules: InferenceRules = InferenceRules()
) -> list[RiskLifecycle]:
    if project.snapshots[0].ordinal != 0:
        raise LifecycleError(
            f"project {project.project_id!r}: lifecycle analysis needs snapshot 0"
        )
    count = project.snapshots[-1].ordinal + 1
    return [
        build_lifecycle(risk_id, observations, count, rules)
        for risk_id, observations in observations_from_project(project).items()
    ]


def corpus_ratios(
    corpus: Corpus, rules: InferenceRules = InferenceRules()
) -> tuple[dict[str, RatioSet], RatioSet]:
    """Per-project ratio table plus the pooled aggregate."""
    per_project: dict[str, RatioSet] = {}
    for project in corpus.projects:
        per_project[project.project_id] = compute_ratios(project_lifecycles(project, rules))
    return per_project, aggregate_ratios(per_project)


def read_lifecycle_csv(data: bytes, source: str = "<lifecycle>") -> dict[str, dict[str, list[RiskObservation]]]:
    """Pre-tabulated input: project_id,risk_id,snapshot,state rows."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not valid UTF-8 ({exc})") from exc
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for required in ("project_id", "risk_id", "snapshot", "state"):
        if required not in header:
            raise ParseError(f"{source}: header is missing required column {required!r}")
    projects: dict[str, dict[str, list[RiskObservation]]] = {}
    for row in reader:
        where = f"{source}, row {reader.line_num}"
        state = _parse_explicit_state(row.get("state"))
        if state is None:
            raise ParseError(f"{where}: unknown state {row.get('state')!r}")
        try:
            ordinal = int(row["snapshot"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: snapshot must be an integer") from exc
        project = projects.setdefault(row["project_id"], {})
        project.setdefault(row["risk_id"], []).append(
            RiskObservation(snapshot_ordinal=ordinal, explicit_state=state)
        )
    return projects


def tabulated_ratios(
    projects: dict[str, dict[str, list[RiskObservation]]],
) -> tuple[dict[str, RatioSet], RatioSet]:
    """Ratios from pre-tabulated observations, projects in input order."""
    per_project: dict[str, RatioSet] = {}
    for project_id, risks in projects.items():
        count = 1 + max(
            obs.snapshot_ordinal for observations in risks.values() for obs in observations
        )
        lifecycles = [
            build_lifecycle(risk_id, observations, count)
            for risk_id, observations in risks.items()
        ]
        per_project[project_id] = compute_ratios(lifecycles)
    return per_project, aggregate_ratios(per_project)


@dataclass(frozen=True)
class StyleThresholds:
    doer_new_item: float = 0.5
    careful: float = 0.5


@dataclass(frozen=True)
class StyleLabel:
    axis1: str  # planner | doer
    axis2: str  # careful | excessive


def classify_style(
    ratios: RatioSet, thresholds: StyleThresholds = StyleThresholds()
) -> StyleLabel | None:
    """Doer when enough risks arrive during execution; careful when they hit.

    Returns None when the needed ratio is undefined (unclassifiable).
    """
    if ratios.new_item is None:
        return None
    if ratios.new_item >= thresholds.doer_new_item:
        if ratios.further_realized is None:
            return None
        careful = ratios.further_realized >= thresholds.careful
        return StyleLabel(axis1="doer", axis2="careful" if careful else "excessive")
    if ratios.initial_realization is None:
        return None
    careful = ratios.initial_realization >= thresholds.careful
    return StyleLabel(axis1="planner", axis2="careful" if careful else "excessive")


@dataclass(frozen=True)
class HotellingResult:
    t_squared: float
    group_sizes: tuple[int, int]
    critical_value: float
    alpha: float
    significant: bool


def hotelling_t2(
    group_a: Sequence[Sequence[float]],
    group_b: Sequence[Sequence[float]],
    alpha: float = 0.05,
) -> HotellingResult:
    """Two-sample Hotelling T^2 with z-scored columns and pooled covariance."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise StatTestError("groups must be 2-D arrays with matching dimensions")
    na, nb = a.shape[0], b.shape[0]
    p = a.shape[1]
    if na < 2 or nb < 2:
        raise StatTestError("each group needs at least 2 points")
    nu = na + nb - 2
    if nu - p + 1 < 1:
        raise StatTestError(f"too few points ({na}+{nb}) for dimension {p}")

    # Z-score by the pooled per-dimension standard deviation.
    pooled_var = ((na - 1) * a.var(axis=0, ddof=1) + (nb - 1) * b.var(axis=0, ddof=1)) / nu
    if np.any(pooled_var <= 0.0):
        raise StatTestError("a dimension has zero pooled variance; covariance is singular")
    scale = np.sqrt(pooled_var)
    za, zb = a / scale, b / scale

    pooled_cov = ((na - 1) * np.cov(za, rowvar=False, ddof=1)
                  + (nb - 1) * np.cov(zb, rowvar=False, ddof=1)) / nu
    pooled_cov = np.atleast_2d(pooled_cov)
    diff = za.mean(axis=0) - zb.mean(axis=0)
    try:
        solved = np.linalg.solve(pooled_cov, diff)
    except np.linalg.LinAlgError as exc:
        raise StatTestError("pooled covariance matrix is singular") from exc
    if not np.all(np.isfinite(solved)) or np.linalg.cond(pooled_cov) > 1e12:
        raise StatTestError("pooled covariance matrix is singular")

    t_squared = float(na * nb / (na + nb) * diff @ solved)
    critical = float(p * nu / (nu - p + 1) * stats.f.ppf(1.0 - alpha, p, nu - p + 1))
    return HotellingResult(
        t_squared=t_squared,
        group_sizes=(na, nb),
        critical_value=critical,
        alpha=alpha,
        significant=t_squared > critical,
    )
