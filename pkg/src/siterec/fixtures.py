"""Bundled datasets: a supermarket case study with known classification
counts, and a seeded synthetic country for end-to-end runs.

Both are fully deterministic (the synthetic one given its seed) and can
be materialised as CSV/JSON files or loaded straight into a snapshot.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import PresenceSet
from .hierarchy import (
    Aggregation,
    FactorValue,
    LevelScheme,
    LocationFactor,
    Snapshot,
    build_hierarchy,
)
from .ingest import serialize_hierarchy

LEVELS = ("nation", "state", "district", "municipality")
YEAR = 2016

# Inhabitant bands for the supermarket case study. Store placements are
# chosen so the classification counts of the published evaluation hold:
# 840 municipalities at >= 5000 inhabitants, 383 above 10000, and the
# per-chain intersections listed in CHAIN_PLACEMENTS.
BAND_SIZES = (383, 457, 364, 500)
BAND_INHABITANTS = (12000, 7000, 3500, 1800)

# (index ranges into the municipality list) -> store positions per chain.
CHAIN_PLACEMENTS = {
    "Lidl": [(0, 428), (840, 865)],
    "Edeka": [(200, 564), (900, 1017)],
    "E-Center": [(0, 80), (400, 410)],
    "NP": [(500, 724), (1210, 1242)],
}

CHAIN_THRESHOLDS = {
    "Lidl": ("ge", 5000),
    "Edeka": ("ge", 5000),
    "E-Center": ("gt", 10000),
    "NP": ("gt", 2500),
}

STATES = (
    ("DE.NI", "Lower Saxony"),
    ("DE.ST", "Saxony-Anhalt"),
    ("DE.BB", "Brandenburg"),
)


@dataclass
class Dataset:
    """In-memory dataset: hierarchy records, factors, chains, profiles."""

    levels: tuple[str, ...]
    sites: list[tuple[str, str, str, str | None]]
    factor_meta: list[dict]
    values: dict[str, list[tuple[str, int, float]]]
    chains: dict[str, dict[str, int]] = field(default_factory=dict)
    profiles: dict[str, dict] = field(default_factory=dict)
    year: int = YEAR


def _profile_document(
    name: str,
    factor_id: str,
    op: str,
    threshold: float,
    focus: list[str],
    preference_cap: float,
) -> dict:
    return {
        "year": YEAR,
        "target_level": "municipality",
        "focus": focus,
        "criteria": [
            {
                "name": f"{name}-min-inhabitants",
                "kind": "must_have",
                "predicate": {"factor": "inhabitants", "op": op, "threshold": threshold},
            },
            {
                "name": "many-inhabitants",
                "kind": "preference",
                "weight": 1.0,
                "rating": {
                    "factors": [
                        {
                            "factor": "inhabitants",
                            "weight": 1.0,
                            "membership": [[0, 0.0], [preference_cap, 1.0]],
                        }
                    ]
                },
            },
        ],
    }


def supermarket_case(districts_per_state: int = 6) -> Dataset:
    """Case-study grid: 1704 municipalities across three states.

    Inhabitants are assigned in four bands and store placements per
    chain are fixed index ranges, so the 2x2 classification of each
    chain against its inhabitants threshold is known by construction.
    """
    total = sum(BAND_SIZES)
    sites: list[tuple[str, str, str, str | None]] = [("DE", "Germany", "nation", None)]
    districts: list[str] = []
    for code, name in STATES:
        sites.append((code, name, "state", "DE"))
        for d in range(districts_per_state):
            district = f"{code}.D{d + 1}"
            sites.append((district, f"{name} District {d + 1}", "district", code))
            districts.append(district)

    municipalities: list[str] = []
    inhabitants: list[tuple[str, int, float]] = []
    power: list[tuple[str, int, float]] = []
    band_edges = []
    offset = 0
    for size in BAND_SIZES:
        band_edges.append((offset, offset + size))
        offset += size
    for i in range(total):
        district = districts[i % len(districts)]
        code = f"{district}.M{i:04d}"
        sites.append((code, f"Municipality {i:04d}", "municipality", district))
        municipalities.append(code)
        band = next(k for k, (lo, hi) in enumerate(band_edges) if lo <= i < hi)
        people = BAND_INHABITANTS[band]
        inhabitants.append((code, YEAR, float(people)))
        per_capita = 20000 + (i % 7) * 500
        power.append((code, YEAR, float(people * per_capita)))

    unemployment = [
        (district, YEAR, 4.0 + (k % 8) * 0.9) for k, district in enumerate(districts)
    ]

    chains = {
        label: {
            municipalities[i]: 1
            for start, stop in ranges
            for i in range(start, stop)
        }
        for label, ranges in CHAIN_PLACEMENTS.items()
    }

    focus = [code for code, _ in STATES]
    profiles = {
        label.lower().replace("-", ""): _profile_document(
            label.lower(), "inhabitants", op, float(threshold), focus, 20000
        )
        for label, (op, threshold) in CHAIN_THRESHOLDS.items()
    }

    factor_meta = [
        {
            "id": "inhabitants",
            "name": "Inhabitants",
            "unit": "persons",
            "native_level": "municipality",
            "aggregation": "additive",
        },
        {
            "id": "purchasing_power",
            "name": "Purchasing power",
            "unit": "EUR",
            "native_level": "municipality",
            "aggregation": "additive",
        },
        {
            "id": "unemployment_rate",
            "name": "Unemployment rate",
            "unit": "percent",
            "native_level": "district",
            "aggregation": "intensive",
        },
    ]

    return Dataset(
        levels=LEVELS,
        sites=sites,
        factor_meta=factor_meta,
        values={
            "inhabitants": inhabitants,
            "purchasing_power": power,
            "unemployment_rate": unemployment,
        },
        chains=chains,
        profiles=profiles,
    )


def synthetic_country(
    seed: int,
    municipalities: int = 200,
    districts: int = 12,
    states: int = 3,
    threshold: int = 5000,
    hit_rate: float = 0.9,
    miss_rate: float = 0.1,
) -> Dataset:
    """Seeded random country with stores placed by a known rule.

    Chain "MarketB" opens on a site with probability `hit_rate` when its
    inhabitants reach `threshold` and `miss_rate` otherwise; chain
    "MarketA" carries counts proportional to inhabitants.
    """
    rng = random.Random(seed)
    sites: list[tuple[str, str, str, str | None]] = [("SY", "Synthetica", "nation", None)]
    state_codes = []
    for s in range(states):
        code = f"SY.S{s + 1}"
        sites.append((code, f"State {s + 1}", "state", "SY"))
        state_codes.append(code)
    district_codes = []
    for d in range(districts):
        state = state_codes[d % states]
        code = f"{state}.D{d + 1:02d}"
        sites.append((code, f"District {d + 1:02d}", "district", state))
        district_codes.append(code)

    inhabitants: list[tuple[str, int, float]] = []
    power: list[tuple[str, int, float]] = []
    noise: list[tuple[str, int, float]] = []
    market_a: dict[str, int] = {}
    market_b: dict[str, int] = {}
    for i in range(municipalities):
        district = district_codes[i % districts]
        code = f"{district}.M{i:03d}"
        sites.append((code, f"Town {i:03d}", "municipality", district))
        people = max(150, min(80000, int(rng.lognormvariate(8.3, 0.8))))
        inhabitants.append((code, YEAR, float(people)))
        per_capita = max(8000.0, rng.gauss(22000.0, 2500.0))
        power.append((code, YEAR, round(people * per_capita, 2)))
        noise.append((code, YEAR, round(rng.uniform(0.0, 1000.0), 3)))
        count_a = round(people / 1500)
        if count_a > 0:
            market_a[code] = count_a
        draw = rng.random()
        if (people >= threshold and draw < hit_rate) or (
            people < threshold and draw < miss_rate
        ):
            market_b[code] = 1

    unemployment = [
        (code, YEAR, round(rng.uniform(3.0, 12.0), 1)) for code in district_codes
    ]
    income = [
        (code, YEAR, float(round(rng.uniform(19000, 26000)))) for code in state_codes
    ]

    profiles = {
        "market_b": {
            "year": YEAR,
            "target_level": "municipality",
            "focus": state_codes,
            "criteria": [
                {
                    "name": "min-inhabitants",
                    "kind": "must_have",
                    "predicate": {
                        "factor": "inhabitants",
                        "op": "ge",
                        "threshold": threshold,
                    },
                },
                {
                    "name": "high-income",
                    "kind": "preference",
                    "weight": 2.0,
                    "rating": {
                        "factors": [
                            {
                                "factor": "income_per_inhabitant",
                                "weight": 1.0,
                                "membership": [[19000, 0.0], [26000, 1.0]],
                            }
                        ]
                    },
                },
                {
                    "name": "low-unemployment",
                    "kind": "preference",
                    "weight": 1.0,
                    "rating": {
                        "factors": [
                            {
                                "factor": "unemployment_rate",
                                "weight": 1.0,
                                "membership": [[3, 1.0], [12, 0.0]],
                            }
                        ]
                    },
                },
            ],
        }
    }

    factor_meta = [
        {
            "id": "inhabitants",
            "name": "Inhabitants",
            "unit": "persons",
            "native_level": "municipality",
            "aggregation": "additive",
        },
        {
            "id": "purchasing_power",
            "name": "Purchasing power",
            "unit": "EUR",
            "native_level": "municipality",
            "aggregation": "additive",
        },
        {
            "id": "unemployment_rate",
            "name": "Unemployment rate",
            "unit": "percent",
            "native_level": "district",
            "aggregation": "intensive",
        },
        {
            "id": "income_per_inhabitant",
            "name": "Available income per inhabitant",
            "unit": "EUR",
            "native_level": "state",
            "aggregation": "intensive",
        },
        {
            "id": "site_noise",
            "name": "Independent noise",
            "unit": "",
            "native_level": "municipality",
            "aggregation": "none",
        },
    ]

    return Dataset(
        levels=LEVELS,
        sites=sites,
        factor_meta=factor_meta,
        values={
            "inhabitants": inhabitants,
            "purchasing_power": power,
            "unemployment_rate": unemployment,
            "income_per_inhabitant": income,
            "site_noise": noise,
        },
        chains={"MarketA": market_a, "MarketB": market_b},
        profiles=profiles,
    )


# -- materialisation ---------------------------------------------------


def to_snapshot(dataset: Dataset) -> tuple[Snapshot, dict[str, PresenceSet]]:
    """Build the snapshot and presence sets directly, bypassing files."""
    hierarchy = build_hierarchy(dataset.sites, LevelScheme(dataset.levels))
    factors = [
        LocationFactor(
            id=meta["id"],
            name=meta["name"],
            unit=meta["unit"],
            native_level=meta["native_level"],
            aggregation=Aggregation(meta["aggregation"]),
        )
        for meta in dataset.factor_meta
    ]
    values = [
        FactorValue(site, fid, year, value)
        for fid, rows in dataset.values.items()
        for site, year, value in rows
    ]
    snapshot = Snapshot(hierarchy, factors, values)
    chains = {
        label: PresenceSet.from_counts(label, counts)
        for label, counts in dataset.chains.items()
    }
    return snapshot, chains


def write_dataset(dataset: Dataset, out_dir: Path | str) -> Path:
    """Write hierarchy, factor, chain, and profile files plus the manifest.

    Returns the manifest path.
    """
    out = Path(out_dir)
    (out / "factors").mkdir(parents=True, exist_ok=True)
    (out / "chains").mkdir(exist_ok=True)
    (out / "profiles").mkdir(exist_ok=True)

    (out / "hierarchy.csv").write_bytes(serialize_hierarchy(dataset.sites))

    for fid, rows in dataset.values.items():
        lines = ["site_code,year,value"]
        lines += [f"{site},{year},{value:g}" for site, year, value in rows]
        (out / "factors" / f"{fid}.csv").write_text("\n".join(lines) + "\n", "utf-8")

    for label, counts in dataset.chains.items():
        slug = label.lower().replace(" ", "_").replace("-", "")
        lines = ["site_code,count"]
        lines += [f"{site},{count}" for site, count in sorted(counts.items())]
        (out / "chains" / f"{slug}.csv").write_text("\n".join(lines) + "\n", "utf-8")

    for name, document in dataset.profiles.items():
        (out / "profiles" / f"{name}.json").write_text(
            json.dumps(document, indent=2, sort_keys=True) + "\n", "utf-8"
        )

    manifest = {
        "hierarchy": "hierarchy.csv",
        "levels": list(dataset.levels),
        "years": [dataset.year, dataset.year],
        "factors": [
            {**meta, "file": f"factors/{meta['id']}.csv"} for meta in dataset.factor_meta
        ],
        "chains": [
            {
                "label": label,
                "file": f"chains/{label.lower().replace(' ', '_').replace('-', '')}.csv",
            }
            for label in dataset.chains
        ],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    return manifest_path
