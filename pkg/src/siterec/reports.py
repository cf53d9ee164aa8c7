"""Report assembly shared by the CLI and the HTTP service.

Everything here delegates to the engine and analysis modules; no
report-local math beyond formatting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import (
    BucketBreakdown,
    ContingencyTable,
    CorrelationMatrix,
    GroupProfile,
    PresenceSet,
    RankSumResult,
    contingency,
    display_percent,
    new_site_candidates,
    overlap_percentage,
)
from .engine import RequirementProfile, candidate_sites, eliminate, survivors
from .hierarchy import Snapshot


@dataclass(frozen=True)
class ChainEvaluation:
    """One chain evaluated against one profile's criteria."""

    label: str
    table: ContingencyTable
    overlap_exact: float | None
    new_sites: int


def evaluate_chain(
    snapshot: Snapshot,
    profile: RequirementProfile,
    chain: PresenceSet,
    occupied: frozenset[str],
) -> ChainEvaluation:
    """Cross-classify one chain's stores against the profile's must-haves.

    The universe is the profile's candidate set; presence outside it is
    ignored. `occupied` (usually the union of all chains under study)
    defines which fulfilled sites count as free for new stores.
    """
    universe = frozenset(candidate_sites(snapshot, profile))
    fulfilled = survivors(snapshot, profile)
    present = PresenceSet(
        label=chain.label,
        sites=chain.sites & universe,
        counts=(
            {s: chain.counts[s] for s in chain.sites & universe}
            if chain.counts is not None
            else None
        ),
    )
    table = contingency(universe, present, fulfilled)
    overlap = overlap_percentage(table) if table.store_total else None
    free = new_site_candidates(fulfilled, occupied)
    return ChainEvaluation(
        label=chain.label,
        table=table,
        overlap_exact=overlap,
        new_sites=len(free),
    )


def elimination_details(
    snapshot: Snapshot, profile: RequirementProfile
) -> list[dict]:
    """Per-candidate fulfilment flags with elimination reasons."""
    details = []
    musts = profile.must_haves
    for code in candidate_sites(snapshot, profile):
        outcome = eliminate(snapshot, code, musts, profile.year)
        details.append(
            {
                "site": code,
                "fulfilled": outcome.passed,
                "reasons": list(outcome.reasons),
            }
        )
    return details


def chain_evaluation_to_dict(evaluation: ChainEvaluation) -> dict:
    table = evaluation.table
    return {
        "chain": evaluation.label,
        "universe": table.universe_size,
        "cells": {
            "store_fulfilled": table.store_fulfilled,
            "store_unfulfilled": table.store_unfulfilled,
            "nostore_fulfilled": table.nostore_fulfilled,
            "nostore_unfulfilled": table.nostore_unfulfilled,
        },
        "stores": table.store_total,
        "fulfilled": table.fulfilled_total,
        "overlap_percent": (
            display_percent(evaluation.overlap_exact)
            if evaluation.overlap_exact is not None
            else None
        ),
        "overlap_percent_exact": evaluation.overlap_exact,
        "new_sites": evaluation.new_sites,
    }


def overall_overlap(evaluations: list[ChainEvaluation]) -> dict:
    matched = sum(e.table.store_fulfilled for e in evaluations)
    stores = sum(e.table.store_total for e in evaluations)
    exact = 100.0 * matched / stores if stores else None
    return {
        "stores": stores,
        "matched": matched,
        "overlap_percent": display_percent(exact) if exact is not None else None,
        "overlap_percent_exact": exact,
    }


def contingency_text(evaluation: ChainEvaluation) -> str:
    table = evaluation.table
    lines = [
        f"[{evaluation.label}]  criterion fulfilled:",
        "                 yes        no     total",
        f"  store yes  {table.store_fulfilled:8d}  {table.store_unfulfilled:8d}  {table.store_total:8d}",
        f"  store no   {table.nostore_fulfilled:8d}  {table.nostore_unfulfilled:8d}  "
        f"{table.nostore_fulfilled + table.nostore_unfulfilled:8d}",
        f"  total      {table.fulfilled_total:8d}  "
        f"{table.store_unfulfilled + table.nostore_unfulfilled:8d}  {table.universe_size:8d}",
    ]
    if evaluation.overlap_exact is not None:
        lines.append(
            f"  overlap: {display_percent(evaluation.overlap_exact):.1f} % "
            f"({table.store_fulfilled} of {table.store_total} stores on fulfilling sites)"
        )
    lines.append(f"  fulfilled sites without any listed chain: {evaluation.new_sites}")
    return "\n".join(lines)


def matrix_to_dict(matrix: CorrelationMatrix) -> dict:
    return {
        "labels": list(matrix.labels),
        "matrix": [
            [None if math.isnan(cell) else cell for cell in row]
            for row in matrix.values
        ],
    }


def matrix_to_csv_rows(matrix: CorrelationMatrix) -> list[list[str]]:
    rows = [["attribute", *matrix.labels]]
    for label, row in zip(matrix.labels, matrix.values):
        rows.append(
            [label, *["" if math.isnan(cell) else f"{cell:.6f}" for cell in row]]
        )
    return rows


def ranksum_to_dict(result: RankSumResult) -> dict:
    return {
        "statistic": result.statistic,
        "z_value": result.z_value,
        "p_value": result.p_value,
        "mode": result.mode,
        "n1": result.n1,
        "n2": result.n2,
    }


def buckets_to_dict(breakdown: BucketBreakdown) -> dict:
    return {
        "buckets": [
            {
                "lower": b.lower,
                "upper": None if math.isinf(b.upper) else b.upper,
                "count": b.count,
                "mean": b.mean,
            }
            for b in breakdown.buckets
        ],
        "unassigned": breakdown.unassigned,
    }


def group_profiles_to_dicts(profiles: list[GroupProfile]) -> list[dict]:
    return [
        {
            "group": p.label,
            "sites": p.site_count,
            "mean_power_index": p.mean_power_index,
            "mean_unemployment": p.mean_unemployment,
        }
        for p in profiles
    ]
