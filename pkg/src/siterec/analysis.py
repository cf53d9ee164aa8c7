"""Evaluation analytics: overlap tables, correlations, rank-sum tests,
population buckets, and per-chain profiles.

All functions are pure over immutable inputs. Degenerate correlation
cells carry NaN sentinels instead of aborting a whole matrix; display
rounding (one decimal, as in printed reports) never leaks into stored
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.stats import norm, rankdata

from .errors import (
    EmptySampleError,
    EmptyStoreSetError,
    LengthMismatchError,
    MissingFactorError,
    SetNotInUniverseError,
    ZeroVarianceError,
)
from .hierarchy import (
    INHABITANTS,
    PURCHASING_POWER,
    UNEMPLOYMENT_RATE,
    Snapshot,
    purchasing_power_index,
)

ANY_CHAIN = "any-chain"
NO_CHAIN = "no-chain"
ALL_SITES = "all"

EXACT_RANKSUM_LIMIT = 12


@dataclass(frozen=True)
class PresenceSet:
    """Sites at which an establishment of one chain exists."""

    label: str
    sites: frozenset[str]
    counts: Mapping[str, int] | None = None

    def __post_init__(self) -> None:
        if self.counts is not None and not set(self.counts) <= self.sites:
            raise SetNotInUniverseError(
                f"presence counts for '{self.label}' name sites outside the set"
            )

    @classmethod
    def from_counts(cls, label: str, counts: Mapping[str, int]) -> "PresenceSet":
        positive = {site: int(n) for site, n in counts.items() if n > 0}
        return cls(label=label, sites=frozenset(positive), counts=positive)

    def count(self, site: str) -> float:
        if self.counts is not None:
            return float(self.counts.get(site, 0))
        return 1.0 if site in self.sites else 0.0


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 cross-classification of store presence vs criteria fulfilment."""

    store_fulfilled: int
    store_unfulfilled: int
    nostore_fulfilled: int
    nostore_unfulfilled: int
    universe_size: int

    def __post_init__(self) -> None:
        cells = (
            self.store_fulfilled,
            self.store_unfulfilled,
            self.nostore_fulfilled,
            self.nostore_unfulfilled,
        )
        if any(c < 0 for c in cells):
            raise ValueError("contingency cells must be non-negative")
        if sum(cells) != self.universe_size:
            raise ValueError("contingency cells must partition the universe")

    @property
    def store_total(self) -> int:
        return self.store_fulfilled + self.store_unfulfilled

    @property
    def fulfilled_total(self) -> int:
        return self.store_fulfilled + self.nostore_fulfilled

    def cells(self) -> tuple[int, int, int, int]:
        return (
            self.store_fulfilled,
            self.store_unfulfilled,
            self.nostore_fulfilled,
            self.nostore_unfulfilled,
        )


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise Pearson coefficients; NaN marks degenerate cells."""

    labels: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]

    def at(self, row_label: str, column_label: str) -> float:
        i = self.labels.index(row_label)
        j = self.labels.index(column_label)
        return self.values[i][j]


@dataclass(frozen=True)
class RankSumResult:
    """Two-sample rank-sum outcome.

    `statistic` is the rank sum of the first sample over the pooled
    midranks. Exact mode enumerates all group assignments; asymptotic
    mode uses the normal approximation with tie-corrected variance and
    a 0.5 continuity correction.
    """

    statistic: float
    z_value: float | None
    p_value: float
    mode: str
    n1: int
    n2: int


@dataclass(frozen=True)
class Bucket:
    lower: float
    upper: float
    count: int
    mean: float | None


@dataclass(frozen=True)
class BucketBreakdown:
    buckets: tuple[Bucket, ...]
    unassigned: int

    @property
    def assigned(self) -> int:
        return sum(b.count for b in self.buckets)


@dataclass(frozen=True)
class GroupProfile:
    label: str
    site_count: int
    mean_power_index: float | None
    mean_unemployment: float | None


DEFAULT_BUCKET_BOUNDS = (0.0, 2500.0, 5000.0, 10000.0, math.inf)

# A per-site value source: a factor id, a presence set (store counts),
# or any callable mapping a site code to an optional value.
ValueSource = Union[str, PresenceSet, Callable[[str], "float | None"]]


def site_value(
    snapshot: Snapshot, source: ValueSource, site: str, year: int
) -> float | None:
    if isinstance(source, str):
        return snapshot.resolve(site, source, year)
    if isinstance(source, PresenceSet):
        return source.count(site)
    return source(site)


def power_index_source(
    snapshot: Snapshot,
    year: int,
    power_factor_id: str = PURCHASING_POWER,
    inhabitants_factor_id: str = INHABITANTS,
) -> Callable[[str], float | None]:
    """Per-site purchasing-power index, None where inputs are missing."""

    def _value(site: str) -> float | None:
        try:
            return purchasing_power_index(
                snapshot, site, year, power_factor_id, inhabitants_factor_id
            )
        except MissingFactorError:
            return None

    return _value


def group_values(
    snapshot: Snapshot,
    sites: Iterable[str],
    source: ValueSource,
    year: int,
) -> list[float]:
    """Resolvable values of `source` over `sites`, site order sorted."""
    values = []
    for site in sorted(sites):
        value = site_value(snapshot, source, site, year)
        if value is not None:
            values.append(value)
    return values


# -- correlation -------------------------------------------------------


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise LengthMismatchError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise LengthMismatchError("need at least two observations")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise ZeroVarianceError("a constant vector has no defined correlation")
    return float(np.dot(dx, dy) / math.sqrt(vx * vy))


def correlation_matrix(
    snapshot: Snapshot,
    attributes: Sequence[tuple[str, ValueSource]],
    sites: Iterable[str],
    year: int,
) -> CorrelationMatrix:
    """Pairwise Pearson over the sites where both attributes resolve.

    Degenerate pairs (constant vectors, fewer than two common sites)
    yield NaN cells; the diagonal is exactly 1 for non-degenerate
    attributes.
    """
    if len(attributes) < 2:
        raise LengthMismatchError("need at least two attributes")
    site_list = sorted(set(sites))
    if len(site_list) < 2:
        raise LengthMismatchError("need at least two sites")

    labels = tuple(label for label, _ in attributes)
    columns: list[dict[str, float]] = []
    for _, source in attributes:
        column = {}
        for site in site_list:
            value = site_value(snapshot, source, site, year)
            if value is not None:
                column[site] = value
        columns.append(column)

    def _degenerate(column: dict[str, float]) -> bool:
        if len(column) < 2:
            return True
        values = list(column.values())
        return all(v == values[0] for v in values)

    n = len(attributes)
    matrix = [[math.nan] * n for _ in range(n)]
    for i in range(n):
        if not _degenerate(columns[i]):
            matrix[i][i] = 1.0
        for j in range(i + 1, n):
            common = [s for s in site_list if s in columns[i] and s in columns[j]]
            try:
                r = pearson(
                    [columns[i][s] for s in common],
                    [columns[j][s] for s in common],
                )
            except (LengthMismatchError, ZeroVarianceError):
                r = math.nan
            matrix[i][j] = matrix[j][i] = r
    return CorrelationMatrix(labels=labels, values=tuple(tuple(row) for row in matrix))


# -- overlap tables ----------------------------------------------------


def contingency(
    universe: Iterable[str],
    store_present: PresenceSet,
    criteria_fulfilled: Iterable[str],
) -> ContingencyTable:
    """Exact 2x2 cell counts by set intersection."""
    universe_set = frozenset(universe)
    stores = store_present.sites
    fulfilled = frozenset(criteria_fulfilled)
    if not stores <= universe_set:
        stray = sorted(stores - universe_set)[:5]
        raise SetNotInUniverseError(
            f"store sites outside the universe (e.g. {stray})"
        )
    if not fulfilled <= universe_set:
        stray = sorted(fulfilled - universe_set)[:5]
        raise SetNotInUniverseError(
            f"fulfilled sites outside the universe (e.g. {stray})"
        )
    both = len(stores & fulfilled)
    store_only = len(stores) - both
    fulfilled_only = len(fulfilled) - both
    neither = len(universe_set) - both - store_only - fulfilled_only
    return ContingencyTable(
        store_fulfilled=both,
        store_unfulfilled=store_only,
        nostore_fulfilled=fulfilled_only,
        nostore_unfulfilled=neither,
        universe_size=len(universe_set),
    )


def overlap_percentage(table: ContingencyTable) -> float:
    """Share of stores on fulfilling sites, in percent (full precision)."""
    if table.store_total == 0:
        raise EmptyStoreSetError("no stores in the table")
    return 100.0 * table.store_fulfilled / table.store_total


def display_percent(value: float) -> float:
    """One-decimal rounding used in printed tables."""
    return round(value, 1)


def new_site_candidates(
    recommended: Iterable[str], any_store_present: Iterable[str]
) -> frozenset[str]:
    """Recommended sites not yet occupied by any listed chain."""
    return frozenset(recommended) - frozenset(any_store_present)


# -- rank-sum test -----------------------------------------------------


def wilcoxon_rank_sum(
    a: Sequence[float],
    b: Sequence[float],
    exact_limit: int = EXACT_RANKSUM_LIMIT,
) -> RankSumResult:
    """Two-sided rank-sum test with midranks for ties.

    Combined sizes up to `exact_limit` are handled by full enumeration
    of group assignments; larger samples use the normal approximation
    with tie-corrected variance and a 0.5 continuity correction.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptySampleError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    total = n1 + n2
    pooled = np.concatenate([np.asarray(a, dtype=float), np.asarray(b, dtype=float)])
    ranks = rankdata(pooled, method="average")
    statistic = float(np.sum(ranks[:n1]))
    expected = n1 * (total + 1) / 2.0

    if total <= exact_limit:
        observed = abs(statistic - expected)
        hits = 0
        count = 0
        for combo in combinations(range(total), n1):
            count += 1
            if abs(float(ranks[list(combo)].sum()) - expected) >= observed - 1e-9:
                hits += 1
        return RankSumResult(
            statistic=statistic,
            z_value=None,
            p_value=hits / count,
            mode="exact",
            n1=n1,
            n2=n2,
        )

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (total * (total - 1))
    variance = (n1 * n2 / 12.0) * ((total + 1) - tie_term)
    if variance <= 0:
        return RankSumResult(statistic, 0.0, 1.0, "asymptotic", n1, n2)
    diff = statistic - expected
    correction = 0.5 * math.copysign(1.0, diff) if diff != 0 else 0.0
    z = (diff - correction) / math.sqrt(variance)
    p = min(1.0, 2.0 * float(norm.sf(abs(z))))
    return RankSumResult(statistic, z, p, "asymptotic", n1, n2)


# -- grouped statistics ------------------------------------------------


def bucket_stats(
    snapshot: Snapshot,
    sites: Iterable[str],
    bounds: Sequence[float],
    value: ValueSource,
    year: int,
    bucket_factor_id: str = INHABITANTS,
) -> BucketBreakdown:
    """Assign sites to half-open [lo, hi) buckets and average `value`.

    Bucketing follows `bucket_factor_id` (inhabitants unless told
    otherwise); sites whose bucketing value is missing or out of range
    count as unassigned. Means skip unresolvable values.
    """
    if len(bounds) < 2:
        raise ValueError("need at least two bucket bounds")
    if any(b <= a for a, b in zip(bounds, bounds[1:])):
        raise ValueError(f"bucket bounds must be strictly increasing, got {list(bounds)}")

    edges = list(bounds)
    members: list[list[float]] = [[] for _ in range(len(edges) - 1)]
    counts = [0] * (len(edges) - 1)
    unassigned = 0
    for site in sorted(set(sites)):
        size = snapshot.resolve(site, bucket_factor_id, year)
        index = None
        if size is not None:
            for i in range(len(edges) - 1):
                if edges[i] <= size < edges[i + 1]:
                    index = i
                    break
        if index is None:
            unassigned += 1
            continue
        counts[index] += 1
        metric = site_value(snapshot, value, site, year)
        if metric is not None:
            members[index].append(metric)

    buckets = tuple(
        Bucket(
            lower=edges[i],
            upper=edges[i + 1],
            count=counts[i],
            mean=(math.fsum(members[i]) / len(members[i]) if members[i] else None),
        )
        for i in range(len(edges) - 1)
    )
    return BucketBreakdown(buckets=buckets, unassigned=unassigned)


def chain_profile(
    snapshot: Snapshot,
    chains: Sequence[PresenceSet],
    year: int,
    universe: Iterable[str],
    power_factor_id: str = PURCHASING_POWER,
    inhabitants_factor_id: str = INHABITANTS,
    unemployment_factor_id: str = UNEMPLOYMENT_RATE,
) -> list[GroupProfile]:
    """Mean purchasing-power index and unemployment rate per group.

    Groups are each chain (restricted to the universe), the union of all
    chains, the complement, and the whole universe. Groups without any
    resolvable value report absent means.
    """
    universe_set = frozenset(universe)
    ppi = power_index_source(snapshot, year, power_factor_id, inhabitants_factor_id)

    union: frozenset[str] = frozenset()
    groups: list[tuple[str, frozenset[str]]] = []
    for chain in chains:
        members = chain.sites & universe_set
        union |= members
        groups.append((chain.label, members))
    groups.append((ANY_CHAIN, union))
    groups.append((NO_CHAIN, universe_set - union))
    groups.append((ALL_SITES, universe_set))

    profiles = []
    for label, members in groups:
        index_values = group_values(snapshot, members, ppi, year)
        unemployment_values = group_values(
            snapshot, members, unemployment_factor_id, year
        )
        profiles.append(
            GroupProfile(
                label=label,
                site_count=len(members),
                mean_power_index=(
                    math.fsum(index_values) / len(index_values) if index_values else None
                ),
                mean_unemployment=(
                    math.fsum(unemployment_values) / len(unemployment_values)
                    if unemployment_values
                    else None
                ),
            )
        )
    return profiles
