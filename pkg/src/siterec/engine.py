"""Requirement profiles and the recommendation engine.

A profile pairs hard constraints (must-haves, which eliminate sites)
with weighted soft preferences. Preferences map resolved factor values
through piecewise-linear membership functions to [0, 1] degrees; the
site score is the weight-normalised sum of those degrees. Candidates
are the sites at the profile's target level inside its regional focus.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyFocusError,
    InconsistentProfileError,
    NonPositiveWeightError,
    SchemaViolationError,
    UnsortedBreakpointsError,
)
from .hierarchy import Snapshot

MUST_HAVE = "must_have"
PREFERENCE = "preference"
COMPARATORS = ("ge", "gt", "le", "lt", "within")

_OP_SYMBOL = {"ge": ">=", "gt": ">", "le": "<=", "lt": "<"}


@dataclass(frozen=True)
class MembershipFunction:
    """Piecewise-linear mapping from factor values to degrees in [0, 1].

    Outside the breakpoint range the end degrees are held constant.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise SchemaViolationError("membership function needs at least one breakpoint")
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise UnsortedBreakpointsError(
                f"breakpoints must be strictly increasing in x, got {xs}"
            )
        if any(not 0.0 <= y <= 1.0 for _, y in self.points):
            raise SchemaViolationError("membership degrees must lie in [0, 1]")

    def degree(self, x: float) -> float:
        pts = self.points
        if x <= pts[0][0]:
            return pts[0][1]
        if x >= pts[-1][0]:
            return pts[-1][1]
        xs = [p[0] for p in pts]
        hi = bisect.bisect_right(xs, x)
        (x0, y0), (x1, y1) = pts[hi - 1], pts[hi]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def membership(mf: MembershipFunction, x: float) -> float:
    """Degree of `x` under `mf` (clamped piecewise-linear interpolation)."""
    return mf.degree(x)


@dataclass(frozen=True)
class Predicate:
    """A threshold test on one factor: ge/gt/le/lt or within [a, b]."""

    factor_id: str
    op: str
    threshold: float | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.op not in COMPARATORS:
            raise SchemaViolationError(f"unknown comparator '{self.op}'")
        if self.op == "within":
            if self.bounds is None or self.threshold is not None:
                raise SchemaViolationError("'within' takes a range, not a threshold")
            if self.bounds[0] > self.bounds[1]:
                raise SchemaViolationError(f"empty range {list(self.bounds)}")
        elif self.threshold is None or self.bounds is not None:
            raise SchemaViolationError(f"comparator '{self.op}' takes a single threshold")

    def test(self, value: float) -> bool:
        if self.op == "ge":
            return value >= self.threshold  # type: ignore[operator]
        if self.op == "gt":
            return value > self.threshold  # type: ignore[operator]
        if self.op == "le":
            return value <= self.threshold  # type: ignore[operator]
        if self.op == "lt":
            return value < self.threshold  # type: ignore[operator]
        lo, hi = self.bounds  # type: ignore[misc]
        return lo <= value <= hi

    def interval(self) -> tuple[float, float, bool, bool]:
        """Satisfying set as (lo, hi, lo_open, hi_open)."""
        if self.op == "ge":
            return (self.threshold, math.inf, False, False)  # type: ignore[return-value]
        if self.op == "gt":
            return (self.threshold, math.inf, True, False)  # type: ignore[return-value]
        if self.op == "le":
            return (-math.inf, self.threshold, False, False)  # type: ignore[return-value]
        if self.op == "lt":
            return (-math.inf, self.threshold, False, True)  # type: ignore[return-value]
        lo, hi = self.bounds  # type: ignore[misc]
        return (lo, hi, False, False)

    def describe(self) -> str:
        if self.op == "within":
            lo, hi = self.bounds  # type: ignore[misc]
            return f"{self.factor_id} within [{lo:g}, {hi:g}]"
        return f"{self.factor_id} {_OP_SYMBOL[self.op]} {self.threshold:g}"


@dataclass(frozen=True)
class RatingComponent:
    factor_id: str
    membership: MembershipFunction
    weight: float

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise NonPositiveWeightError(
                f"rating weight for '{self.factor_id}' must be positive"
            )


@dataclass(frozen=True)
class SuitabilityRating:
    """Weighted combination of factor memberships for one preference."""

    components: tuple[RatingComponent, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise SchemaViolationError("a rating needs at least one factor component")


@dataclass(frozen=True)
class Criterion:
    """One requirement: an eliminating must-have or a weighted preference."""

    name: str
    kind: str
    predicate: Predicate | None = None
    rating: SuitabilityRating | None = None
    weight: float | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaViolationError("criterion name must be non-empty")
        if self.kind == MUST_HAVE:
            if self.predicate is None or self.rating is not None or self.weight is not None:
                raise SchemaViolationError(
                    f"must-have '{self.name}' takes a predicate and nothing else"
                )
        elif self.kind == PREFERENCE:
            if self.rating is None or self.weight is None or self.predicate is not None:
                raise SchemaViolationError(
                    f"preference '{self.name}' takes a rating and a weight"
                )
            if self.weight <= 0:
                raise NonPositiveWeightError(
                    f"preference '{self.name}' weight must be positive"
                )
        else:
            raise SchemaViolationError(f"unknown criterion kind '{self.kind}'")


@dataclass(frozen=True)
class RequirementProfile:
    """A company's full requirement specification."""

    criteria: tuple[Criterion, ...]
    focus: tuple[str, ...]
    target_level: str
    year: int

    def __post_init__(self) -> None:
        if not self.criteria and not self.focus:
            raise SchemaViolationError("profile needs at least one criterion or a focus")
        names = [c.name for c in self.criteria]
        if len(set(names)) != len(names):
            raise SchemaViolationError("criterion names must be unique")

    @property
    def must_haves(self) -> tuple[Criterion, ...]:
        return tuple(c for c in self.criteria if c.kind == MUST_HAVE)

    @property
    def preferences(self) -> tuple[Criterion, ...]:
        return tuple(c for c in self.criteria if c.kind == PREFERENCE)


@dataclass(frozen=True)
class Conflict:
    first: str
    second: str
    explanation: str


@dataclass(frozen=True)
class ConsistencyResult:
    conflicts: tuple[Conflict, ...]

    @property
    def consistent(self) -> bool:
        return not self.conflicts


@dataclass(frozen=True)
class EliminationResult:
    passed: bool
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class BreakdownEntry:
    rating: float
    contribution: float
    missing: bool
    missing_factors: tuple[str, ...]


@dataclass(frozen=True)
class Recommendation:
    """Evaluation of one site against a profile."""

    site_code: str
    total: float
    breakdown: dict[str, BreakdownEntry] = field(default_factory=dict)
    eliminated: bool = False
    reasons: tuple[str, ...] = ()


# -- parsing -----------------------------------------------------------


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaViolationError(message)


def _parse_membership(raw: object, context: str) -> MembershipFunction:
    _require(isinstance(raw, list) and len(raw) >= 1, f"{context}: membership must be a list of [x, y] pairs")
    points = []
    for pair in raw:  # type: ignore[union-attr]
        _require(
            isinstance(pair, (list, tuple))
            and len(pair) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair),
            f"{context}: each breakpoint must be a numeric [x, y] pair",
        )
        points.append((float(pair[0]), float(pair[1])))
    return MembershipFunction(tuple(points))


def _parse_predicate(raw: object, context: str) -> Predicate:
    _require(isinstance(raw, dict), f"{context}: predicate must be an object")
    raw = dict(raw)  # type: ignore[arg-type]
    factor = raw.get("factor")
    op = raw.get("op")
    _require(isinstance(factor, str) and bool(factor), f"{context}: predicate needs a factor id")
    _require(op in COMPARATORS, f"{context}: predicate op must be one of {list(COMPARATORS)}")
    if op == "within":
        rng = raw.get("range")
        _require(
            isinstance(rng, (list, tuple))
            and len(rng) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng),
            f"{context}: 'within' needs a numeric [low, high] range",
        )
        return Predicate(factor, op, bounds=(float(rng[0]), float(rng[1])))
    threshold = raw.get("threshold")
    _require(
        isinstance(threshold, (int, float)) and not isinstance(threshold, bool),
        f"{context}: comparator '{op}' needs a numeric threshold",
    )
    return Predicate(factor, op, threshold=float(threshold))


def parse_profile(document: Mapping) -> RequirementProfile:
    """Validate a profile document (see the JSON schema in the package docs).

    Raises SchemaViolationError, NonPositiveWeightError, or
    UnsortedBreakpointsError; never mutates or reorders the input.
    """
    _require(isinstance(document, Mapping), "profile document must be an object")
    year = document.get("year")
    _require(isinstance(year, int) and not isinstance(year, bool), "profile needs an integer year")
    target_level = document.get("target_level")
    _require(isinstance(target_level, str) and bool(target_level), "profile needs a target_level")
    focus = document.get("focus", [])
    _require(
        isinstance(focus, list) and all(isinstance(f, str) and f for f in focus),
        "focus must be an array of region keys",
    )

    criteria: list[Criterion] = []
    raw_criteria = document.get("criteria", [])
    _require(isinstance(raw_criteria, list), "criteria must be an array")
    for index, raw in enumerate(raw_criteria):
        context = f"criteria[{index}]"
        _require(isinstance(raw, dict), f"{context}: must be an object")
        name = raw.get("name")
        _require(isinstance(name, str) and bool(name), f"{context}: needs a name")
        kind = raw.get("kind")
        if kind == MUST_HAVE:
            _require("weight" not in raw and "rating" not in raw,
                     f"{context}: a must-have carries no weight or rating")
            criteria.append(
                Criterion(name=name, kind=MUST_HAVE,
                          predicate=_parse_predicate(raw.get("predicate"), context))
            )
        elif kind == PREFERENCE:
            _require("predicate" not in raw, f"{context}: a preference carries no predicate")
            weight = raw.get("weight")
            _require(
                isinstance(weight, (int, float)) and not isinstance(weight, bool),
                f"{context}: needs a numeric weight",
            )
            if weight <= 0:
                raise NonPositiveWeightError(f"{context}: weight must be positive")
            rating_raw = raw.get("rating")
            _require(
                isinstance(rating_raw, dict) and isinstance(rating_raw.get("factors"), list),
                f"{context}: needs rating.factors",
            )
            components = []
            for j, comp in enumerate(rating_raw["factors"]):  # type: ignore[index]
                comp_context = f"{context}.rating.factors[{j}]"
                _require(isinstance(comp, dict), f"{comp_context}: must be an object")
                factor = comp.get("factor")
                _require(isinstance(factor, str) and bool(factor), f"{comp_context}: needs a factor id")
                comp_weight = comp.get("weight", 1.0)
                _require(
                    isinstance(comp_weight, (int, float)) and not isinstance(comp_weight, bool),
                    f"{comp_context}: weight must be numeric",
                )
                if comp_weight <= 0:
                    raise NonPositiveWeightError(f"{comp_context}: weight must be positive")
                components.append(
                    RatingComponent(
                        factor_id=factor,
                        membership=_parse_membership(comp.get("membership"), comp_context),
                        weight=float(comp_weight),
                    )
                )
            criteria.append(
                Criterion(name=name, kind=PREFERENCE,
                          rating=SuitabilityRating(tuple(components)),
                          weight=float(weight))
            )
        else:
            raise SchemaViolationError(
                f"{context}: kind must be '{MUST_HAVE}' or '{PREFERENCE}'"
            )

    return RequirementProfile(
        criteria=tuple(criteria),
        focus=tuple(focus),
        target_level=target_level,
        year=year,
    )


def profile_to_document(profile: RequirementProfile) -> dict:
    """Inverse of parse_profile; parse(profile_to_document(p)) == p."""
    criteria = []
    for criterion in profile.criteria:
        if criterion.kind == MUST_HAVE:
            pred = criterion.predicate
            assert pred is not None
            raw_pred: dict = {"factor": pred.factor_id, "op": pred.op}
            if pred.op == "within":
                raw_pred["range"] = list(pred.bounds)  # type: ignore[arg-type]
            else:
                raw_pred["threshold"] = pred.threshold
            criteria.append({"name": criterion.name, "kind": MUST_HAVE, "predicate": raw_pred})
        else:
            rating = criterion.rating
            assert rating is not None
            criteria.append(
                {
                    "name": criterion.name,
                    "kind": PREFERENCE,
                    "weight": criterion.weight,
                    "rating": {
                        "factors": [
                            {
                                "factor": c.factor_id,
                                "weight": c.weight,
                                "membership": [list(p) for p in c.membership.points],
                            }
                            for c in rating.components
                        ]
                    },
                }
            )
    return {
        "year": profile.year,
        "target_level": profile.target_level,
        "focus": list(profile.focus),
        "criteria": criteria,
    }


# -- consistency -------------------------------------------------------


def _intersect(
    a: tuple[float, float, bool, bool], b: tuple[float, float, bool, bool]
) -> bool:
    """True when the two intervals share at least one point."""
    lo, lo_open = max((a[0], a[2]), (b[0], b[2]), key=lambda t: (t[0], t[1]))
    hi, hi_open = min((a[1], a[3]), (b[1], b[3]), key=lambda t: (t[0], -t[1]))
    if lo > hi:
        return False
    if lo == hi and (lo_open or hi_open):
        return False
    return True


def check_consistency(profile: RequirementProfile) -> ConsistencyResult:
    """Detect pairwise-unsatisfiable must-haves on a shared factor."""
    conflicts: list[Conflict] = []
    musts = profile.must_haves
    for i, first in enumerate(musts):
        for second in musts[i + 1 :]:
            pa, pb = first.predicate, second.predicate
            assert pa is not None and pb is not None
            if pa.factor_id != pb.factor_id:
                continue
            if not _intersect(pa.interval(), pb.interval()):
                conflicts.append(
                    Conflict(
                        first=first.name,
                        second=second.name,
                        explanation=(
                            f"no value of '{pa.factor_id}' satisfies both "
                            f"'{pa.describe()}' and '{pb.describe()}'"
                        ),
                    )
                )
    return ConsistencyResult(tuple(conflicts))


# -- evaluation --------------------------------------------------------


def eliminate(
    snapshot: Snapshot,
    site_code: str,
    must_haves: Sequence[Criterion],
    year: int,
) -> EliminationResult:
    """Apply the hard constraints to one site.

    A predicate whose factor is unresolvable fails conservatively: a
    hard requirement that cannot be verified is not a pass.
    """
    snapshot.hierarchy.site(site_code)
    reasons: list[str] = []
    for criterion in must_haves:
        predicate = criterion.predicate
        assert predicate is not None
        value = snapshot.resolve(site_code, predicate.factor_id, year)
        if value is None:
            reasons.append(
                f"{criterion.name}: '{predicate.factor_id}' has no value at "
                f"'{site_code}' for {year}"
            )
        elif not predicate.test(value):
            reasons.append(
                f"{criterion.name}: value {value:g} violates {predicate.describe()}"
            )
    return EliminationResult(passed=not reasons, reasons=tuple(reasons))


def rate(
    snapshot: Snapshot,
    site_code: str,
    rating: SuitabilityRating,
    year: int,
) -> tuple[float, tuple[str, ...]]:
    """Weighted mean of factor memberships; missing factors contribute 0."""
    snapshot.hierarchy.site(site_code)
    total_weight = math.fsum(c.weight for c in rating.components)
    value = 0.0
    missing: list[str] = []
    for component in rating.components:
        resolved = snapshot.resolve(site_code, component.factor_id, year)
        if resolved is None:
            missing.append(component.factor_id)
            continue
        value += (component.weight / total_weight) * component.membership.degree(resolved)
    return value, tuple(missing)


def score(snapshot: Snapshot, site_code: str, profile: RequirementProfile) -> Recommendation:
    """Full evaluation of one site: elimination plus weighted preference score."""
    elimination = eliminate(snapshot, site_code, profile.must_haves, profile.year)
    preferences = profile.preferences
    total_weight = math.fsum(c.weight for c in preferences)  # type: ignore[union-attr]
    breakdown: dict[str, BreakdownEntry] = {}
    total = 0.0
    for criterion in preferences:
        assert criterion.rating is not None and criterion.weight is not None
        rating_value, missing = rate(snapshot, site_code, criterion.rating, profile.year)
        normalised = criterion.weight / total_weight if total_weight else 0.0
        contribution = normalised * rating_value
        total += contribution
        breakdown[criterion.name] = BreakdownEntry(
            rating=rating_value,
            contribution=contribution,
            missing=bool(missing),
            missing_factors=missing,
        )
    return Recommendation(
        site_code=site_code,
        total=total,
        breakdown=breakdown,
        eliminated=not elimination.passed,
        reasons=elimination.reasons,
    )


def candidate_sites(snapshot: Snapshot, profile: RequirementProfile) -> list[str]:
    """Sites at the target level inside the focus subtrees, sorted by code."""
    if not profile.focus:
        raise EmptyFocusError("profile has an empty regional focus")
    hierarchy = snapshot.hierarchy
    for code in profile.focus:
        hierarchy.site(code)
    found: set[str] = set()
    for code in profile.focus:
        found.update(hierarchy.sites_at_level(profile.target_level, under=code))
    return sorted(found)


def survivors(snapshot: Snapshot, profile: RequirementProfile) -> frozenset[str]:
    """Candidate sites that pass every must-have."""
    musts = profile.must_haves
    return frozenset(
        code
        for code in candidate_sites(snapshot, profile)
        if eliminate(snapshot, code, musts, profile.year).passed
    )


def recommend(
    snapshot: Snapshot,
    profile: RequirementProfile,
    top_k: int | None = None,
) -> list[Recommendation]:
    """Rank the non-eliminated candidates.

    Deterministic: scores descending, ties broken by site code ascending.
    Raises InconsistentProfileError when must-haves conflict and
    EmptyFocusError when no focus is given.
    """
    result = check_consistency(profile)
    if not result.consistent:
        raise InconsistentProfileError(result.conflicts)
    ranked = [
        rec
        for code in candidate_sites(snapshot, profile)
        if not (rec := score(snapshot, code, profile)).eliminated
    ]
    ranked.sort(key=lambda r: (-r.total, r.site_code))
    if top_k is not None:
        if top_k < 0:
            raise SchemaViolationError("top_k must be non-negative")
        ranked = ranked[:top_k]
    return ranked


# -- serialisation -----------------------------------------------------


def recommendation_to_dict(recommendation: Recommendation) -> dict:
    return {
        "site": recommendation.site_code,
        "total": recommendation.total,
        "eliminated": recommendation.eliminated,
        "reasons": list(recommendation.reasons),
        "breakdown": {
            name: {
                "rating": entry.rating,
                "contribution": entry.contribution,
                "missing": entry.missing,
                "missing_factors": list(entry.missing_factors),
            }
            for name, entry in recommendation.breakdown.items()
        },
    }


def ranking_to_json(
    recommendations: Iterable[Recommendation],
    version: str,
    year: int,
) -> str:
    """Canonical JSON for a ranked list; byte-identical for equal inputs."""
    payload = {
        "version": version,
        "year": year,
        "results": [recommendation_to_dict(r) for r in recommendations],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
