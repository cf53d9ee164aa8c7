"""Territorial hierarchy and the factor store built on top of it.

Sites form a forest ordered by a configurable list of administrative
levels (coarsest first). Observations attach to (site, factor, year)
triples; values that are not stored natively are derived from the tree:
additive factors sum upward from children, intensive factors copy
downward from the nearest ancestor with a native value.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    CycleDetectedError,
    DuplicateCodeError,
    DuplicateObservationError,
    EmptyFileError,
    LevelSkipError,
    MissingFactorError,
    UnknownFactorError,
    UnknownLevelNameError,
    UnknownParentError,
    UnknownSiteError,
    UnresolvableAtRootError,
    ZeroNationalAverageError,
)

# Conventional factor ids used by derived quantities; datasets may override.
INHABITANTS = "inhabitants"
PURCHASING_POWER = "purchasing_power"
UNEMPLOYMENT_RATE = "unemployment_rate"

DEFAULT_LEVEL_NAMES = ("nation", "state", "county", "district", "municipality")


class Aggregation(str, Enum):
    """How a factor propagates through the hierarchy."""

    ADDITIVE = "additive"
    INTENSIVE = "intensive"
    NONE = "none"


@dataclass(frozen=True)
class LevelScheme:
    """Ordered administrative level names, coarsest first."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) < 2:
            raise ValueError("a level scheme needs at least two levels")
        if len(set(self.names)) != len(self.names):
            raise ValueError("level names must be unique")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownLevelNameError(
                f"unknown level '{name}'; expected one of {list(self.names)}"
            ) from None

    @property
    def top(self) -> str:
        return self.names[0]

    @property
    def bottom(self) -> str:
        return self.names[-1]


DEFAULT_LEVELS = LevelScheme(DEFAULT_LEVEL_NAMES)


@dataclass(frozen=True)
class Site:
    """One node of the territorial forest."""

    code: str
    name: str
    level: str
    parent_code: str | None = None


@dataclass(frozen=True)
class LocationFactor:
    """Metadata for one observable site property."""

    id: str
    name: str
    unit: str
    native_level: str
    aggregation: Aggregation


@dataclass(frozen=True)
class FactorValue:
    """A single native observation."""

    site_code: str
    factor_id: str
    year: int
    value: float


class Hierarchy:
    """Validated forest of sites with children indexed by parent.

    Construction enforces: unique codes, known levels, parents that
    exist and sit exactly one level above their children, and acyclicity.
    Parentless sites are roots regardless of level, so a forest of
    states (no nation record) is legal.
    """

    def __init__(self, levels: LevelScheme, sites: Iterable[Site]):
        self.levels = levels
        self._sites: dict[str, Site] = {}
        for site in sites:
            levels.index(site.level)
            if site.code in self._sites:
                raise DuplicateCodeError(f"duplicate site code '{site.code}'")
            self._sites[site.code] = site

        children: dict[str, list[str]] = {}
        roots: list[str] = []
        for site in self._sites.values():
            if not site.parent_code:
                roots.append(site.code)
                continue
            parent = self._sites.get(site.parent_code)
            if parent is None:
                raise UnknownParentError(
                    f"site '{site.code}' references unknown parent '{site.parent_code}'"
                )
            if levels.index(site.level) != levels.index(parent.level) + 1:
                raise LevelSkipError(
                    f"site '{site.code}' ({site.level}) must have a parent one level "
                    f"above, got '{parent.code}' ({parent.level})"
                )
            children.setdefault(site.parent_code, []).append(site.code)

        self._children = {code: tuple(sorted(kids)) for code, kids in children.items()}
        self._roots = tuple(sorted(roots))
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        # The one-step level rule already precludes cycles; this is a cheap
        # guard against future relaxations of that rule.
        depth: dict[str, int] = {}
        for code in self._sites:
            chain = []
            cursor: str | None = code
            while cursor is not None and cursor not in depth:
                if cursor in chain:
                    raise CycleDetectedError(f"parent cycle through '{cursor}'")
                chain.append(cursor)
                cursor = self._sites[cursor].parent_code
            base = 0 if cursor is None else depth[cursor] + 1
            for offset, member in enumerate(reversed(chain)):
                depth[member] = base + offset

    # -- lookups -------------------------------------------------------

    def __contains__(self, code: str) -> bool:
        return code in self._sites

    def __len__(self) -> int:
        return len(self._sites)

    def site(self, code: str) -> Site:
        try:
            return self._sites[code]
        except KeyError:
            raise UnknownSiteError(f"unknown site '{code}'") from None

    def sites(self) -> Iterator[Site]:
        return iter(self._sites.values())

    def codes(self) -> list[str]:
        return sorted(self._sites)

    @property
    def roots(self) -> tuple[str, ...]:
        return self._roots

    def children(self, code: str) -> tuple[str, ...]:
        self.site(code)
        return self._children.get(code, ())

    def ancestors(self, code: str) -> Iterator[str]:
        """Yield parent, grandparent, ... up to the root."""
        cursor = self.site(code).parent_code
        while cursor is not None:
            yield cursor
            cursor = self._sites[cursor].parent_code

    def subtree(self, code: str) -> Iterator[str]:
        """Yield `code` and all descendants, depth first, children sorted."""
        self.site(code)
        stack = [code]
        while stack:
            current = stack.pop()
            yield current
            stack.extend(reversed(self._children.get(current, ())))

    def level_counts(self) -> dict[str, int]:
        counts = Counter(site.level for site in self._sites.values())
        return {name: counts.get(name, 0) for name in self.levels.names}

    def sites_at_level(self, level: str, under: str | None = None) -> list[str]:
        self.levels.index(level)
        if under is None:
            pool: Iterable[str] = self._sites
        else:
            pool = self.subtree(under)
        return sorted(c for c in pool if self._sites[c].level == level)


def build_hierarchy(
    site_records: Iterable[tuple[str, str, str, str | None]],
    levels: LevelScheme = DEFAULT_LEVELS,
) -> Hierarchy:
    """Build a validated hierarchy from (code, name, level, parent) records."""
    records = list(site_records)
    if not records:
        raise EmptyFileError("no site records")
    return Hierarchy(levels, (Site(*rec) for rec in records))


class Snapshot:
    """Immutable bundle of hierarchy, factor catalog, and observations.

    Safe for unrestricted concurrent reads once constructed; resolution
    results are memoised per snapshot. The version tag is a content hash,
    so re-ingesting identical data yields an identical tag.
    """

    def __init__(
        self,
        hierarchy: Hierarchy,
        factors: Iterable[LocationFactor],
        values: Iterable[FactorValue],
    ):
        self._hierarchy = hierarchy
        self._factors: dict[str, LocationFactor] = {}
        for factor in factors:
            if factor.id in self._factors:
                raise DuplicateCodeError(f"duplicate factor id '{factor.id}'")
            hierarchy.levels.index(factor.native_level)
            self._factors[factor.id] = factor

        self._native: dict[tuple[str, str, int], float] = {}
        years: set[int] = set()
        for value in values:
            if value.site_code not in hierarchy:
                raise UnknownSiteError(
                    f"observation references unknown site '{value.site_code}'"
                )
            if value.factor_id not in self._factors:
                raise UnknownFactorError(
                    f"observation references unknown factor '{value.factor_id}'"
                )
            key = (value.site_code, value.factor_id, value.year)
            if key in self._native:
                raise DuplicateObservationError(
                    f"duplicate observation for {key[0]}/{key[1]}/{key[2]}"
                )
            self._native[key] = float(value.value)
            years.add(value.year)

        self._years = frozenset(years)
        self._cache: dict[tuple[str, str, int], float | None] = {}
        self._version = self._fingerprint()

    @property
    def hierarchy(self) -> Hierarchy:
        return self._hierarchy

    @property
    def version(self) -> str:
        return self._version

    @property
    def years(self) -> frozenset[int]:
        return self._years

    def factors(self) -> list[LocationFactor]:
        return sorted(self._factors.values(), key=lambda f: f.id)

    def factor(self, factor_id: str) -> LocationFactor:
        try:
            return self._factors[factor_id]
        except KeyError:
            raise UnknownFactorError(f"unknown factor '{factor_id}'") from None

    def native(self, site_code: str, factor_id: str, year: int) -> float | None:
        return self._native.get((site_code, factor_id, year))

    def value_count(self) -> int:
        return len(self._native)

    def _fingerprint(self) -> str:
        payload = {
            "levels": list(self._hierarchy.levels.names),
            "sites": sorted(
                (s.code, s.name, s.level, s.parent_code or "")
                for s in self._hierarchy.sites()
            ),
            "factors": sorted(
                (f.id, f.name, f.unit, f.native_level, f.aggregation.value)
                for f in self._factors.values()
            ),
            "values": sorted(
                (site, fid, year, repr(val))
                for (site, fid, year), val in self._native.items()
            ),
        }
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        )
        return digest.hexdigest()[:16]

    # -- resolution ----------------------------------------------------

    def resolve(self, site_code: str, factor_id: str, year: int) -> float | None:
        """Resolve a value at a site, deriving it from the tree if needed.

        Native values always win. Additive factors sum over children and
        only when *every* child resolves (a partial sum would silently
        understate). Intensive factors copy the nearest ancestor's native
        value. Returns None when no rule applies.
        """
        if site_code not in self._hierarchy:
            raise UnknownSiteError(f"unknown site '{site_code}'")
        factor = self.factor(factor_id)
        return self._resolve(site_code, factor, year)

    def _resolve(self, code: str, factor: LocationFactor, year: int) -> float | None:
        key = (code, factor.id, year)
        if key in self._cache:
            return self._cache[key]
        value = self._native.get(key)
        if value is None:
            if factor.aggregation is Aggregation.ADDITIVE:
                kids = self._hierarchy.children(code)
                if kids:
                    parts = [self._resolve(k, factor, year) for k in kids]
                    if all(p is not None for p in parts):
                        value = math.fsum(parts)  # type: ignore[arg-type]
            elif factor.aggregation is Aggregation.INTENSIVE:
                for ancestor in self._hierarchy.ancestors(code):
                    native = self._native.get((ancestor, factor.id, year))
                    if native is not None:
                        value = native
                        break
        self._cache[key] = value
        return value


def resolve_factor(
    snapshot: Snapshot, site_code: str, factor_id: str, year: int
) -> float | None:
    """Functional alias for :meth:`Snapshot.resolve`."""
    return snapshot.resolve(site_code, factor_id, year)


def national_aggregate(
    snapshot: Snapshot,
    factor_id: str,
    year: int,
    weight_factor_id: str | None = None,
) -> float:
    """Aggregate a factor over all roots of the forest.

    Additive (and unaggregated) factors sum across roots; intensive
    factors are averaged with weights taken from `weight_factor_id`
    (inhabitants unless told otherwise).
    """
    factor = snapshot.factor(factor_id)
    resolved: list[float] = []
    for root in snapshot.hierarchy.roots:
        value = snapshot.resolve(root, factor_id, year)
        if value is None:
            raise UnresolvableAtRootError(
                f"factor '{factor_id}' is unresolvable at root '{root}' for {year}"
            )
        resolved.append(value)
    if factor.aggregation is not Aggregation.INTENSIVE:
        return math.fsum(resolved)

    weight_id = weight_factor_id or INHABITANTS
    weights: list[float] = []
    for root in snapshot.hierarchy.roots:
        weight = snapshot.resolve(root, weight_id, year)
        if weight is None:
            raise UnresolvableAtRootError(
                f"weight factor '{weight_id}' is unresolvable at root '{root}' for {year}"
            )
        weights.append(weight)
    total_weight = math.fsum(weights)
    if total_weight == 0:
        raise UnresolvableAtRootError(f"weight factor '{weight_id}' sums to zero")
    return math.fsum(w * v for w, v in zip(weights, resolved)) / total_weight


def purchasing_power_index(
    snapshot: Snapshot,
    site_code: str,
    year: int,
    power_factor_id: str = PURCHASING_POWER,
    inhabitants_factor_id: str = INHABITANTS,
) -> float:
    """Per-inhabitant purchasing power relative to the national average.

    The national average scores 100. For an additive (total-valued) power
    factor the per-inhabitant value is power / inhabitants at the site and
    the national average is the ratio of the national sums; an intensive
    power factor is treated as already per-inhabitant and averaged
    nationally with inhabitants as weights.
    """
    try:
        power = snapshot.factor(power_factor_id)
        snapshot.factor(inhabitants_factor_id)
    except UnknownFactorError as exc:
        raise MissingFactorError(str(exc)) from None

    site_power = snapshot.resolve(site_code, power_factor_id, year)
    if site_power is None:
        raise MissingFactorError(
            f"'{power_factor_id}' is unresolvable at '{site_code}' for {year}"
        )

    try:
        if power.aggregation is Aggregation.INTENSIVE:
            site_per_capita = site_power
            national_per_capita = national_aggregate(
                snapshot, power_factor_id, year, inhabitants_factor_id
            )
        else:
            inhabitants = snapshot.resolve(site_code, inhabitants_factor_id, year)
            if inhabitants is None:
                raise MissingFactorError(
                    f"'{inhabitants_factor_id}' is unresolvable at '{site_code}' for {year}"
                )
            if inhabitants == 0:
                raise MissingFactorError(
                    f"'{site_code}' has zero inhabitants; per-inhabitant value undefined"
                )
            national_inhabitants = national_aggregate(
                snapshot, inhabitants_factor_id, year
            )
            if national_inhabitants == 0:
                raise ZeroNationalAverageError("national inhabitants total is zero")
            site_per_capita = site_power / inhabitants
            national_per_capita = (
                national_aggregate(snapshot, power_factor_id, year)
                / national_inhabitants
            )
    except UnresolvableAtRootError as exc:
        raise MissingFactorError(str(exc)) from None

    if national_per_capita == 0:
        raise ZeroNationalAverageError("national per-inhabitant average is zero")
    return 100.0 * site_per_capita / national_per_capita
