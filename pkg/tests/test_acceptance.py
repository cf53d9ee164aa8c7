"""Acceptance suite: one test per release criterion, at stated tolerances.

The terminal summary hook in conftest prints one PASS/FAIL line per
criterion after the run.
"""

from __future__ import annotations

import json
import random
import time

from click.testing import CliRunner

import oracles
from conftest import (
    assert_forest_invariants,
    random_forest_snapshot,
    random_profile_document,
    scale_weights,
)
from siterec.analysis import (
    PresenceSet,
    chain_profile,
    correlation_matrix,
    group_values,
    pearson,
    power_index_source,
    wilcoxon_rank_sum,
)
from siterec.cli import main as cli_main
from siterec.engine import (
    candidate_sites,
    parse_profile,
    ranking_to_json,
    recommend,
    survivors,
)
from siterec.hierarchy import (
    Aggregation,
    FactorValue,
    LevelScheme,
    LocationFactor,
    Snapshot,
    build_hierarchy,
)


def test_case_study_counts_reproduced(market_dir):
    """Encoded per-site classifications reproduce the published 2x2 cells."""
    runner = CliRunner()
    args = [
        "evaluate", "--manifest", str(market_dir / "manifest.json"), "--format", "json",
        "--urp", str(market_dir / "profiles" / "lidl.json"), "--chain", "Lidl",
        "--urp", str(market_dir / "profiles" / "np.json"), "--chain", "NP",
        "--urp", str(market_dir / "profiles" / "ecenter.json"), "--chain", "E-Center",
    ]
    started = time.perf_counter()
    result = runner.invoke(cli_main, args)
    elapsed = time.perf_counter() - started
    assert result.exit_code == 0
    payload = json.loads(result.output)
    by_chain = {entry["chain"]: entry for entry in payload["results"]}

    lidl = by_chain["Lidl"]
    assert lidl["universe"] == 1704 and lidl["stores"] == 453
    assert lidl["fulfilled"] == 840
    assert lidl["cells"] == {
        "store_fulfilled": 428,
        "store_unfulfilled": 25,
        "nostore_fulfilled": 412,
        "nostore_unfulfilled": 839,
    }
    assert abs(lidl["overlap_percent_exact"] - 94.5) <= 0.05

    np_chain = by_chain["NP"]
    assert np_chain["cells"]["store_fulfilled"] == 224 and np_chain["stores"] == 256
    assert abs(np_chain["overlap_percent_exact"] - 87.5) <= 0.05

    ecenter = by_chain["E-Center"]
    assert ecenter["cells"]["store_fulfilled"] == 80 and ecenter["stores"] == 90
    # published table prints 88.8; exact arithmetic gives 80/90 = 88.9
    assert abs(ecenter["overlap_percent_exact"] - 88.9) <= 0.05

    assert elapsed < 1.0, f"evaluate took {elapsed:.2f}s"


def test_synthetic_end_to_end(country_dir, country_dataset):
    """Seeded country: overlap within 3pp of the placement rule's expectation."""
    runner = CliRunner()
    manifest = str(country_dir / "manifest.json")
    profile_path = str(country_dir / "profiles" / "market_b.json")

    started = time.perf_counter()
    recommendation = runner.invoke(
        cli_main,
        ["recommend", "--manifest", manifest, "--urp", profile_path, "--format", "json"],
    )
    evaluation = runner.invoke(
        cli_main,
        ["evaluate", "--manifest", manifest, "--format", "json",
         "--urp", profile_path, "--chain", "MarketB"],
    )
    elapsed = time.perf_counter() - started
    assert recommendation.exit_code == 0 and evaluation.exit_code == 0

    payload = json.loads(evaluation.output)["results"][0]

    # oracle: classify every municipality directly from the raw rule inputs
    inhabitants = {site: value for site, _, value in country_dataset.values["inhabitants"]}
    stores = set(country_dataset.chains["MarketB"])
    threshold = 5000.0
    fulfilled = {site for site, value in inhabitants.items() if value >= threshold}
    cells = oracles.classify_contingency(sorted(inhabitants), stores, fulfilled)
    assert (
        payload["cells"]["store_fulfilled"],
        payload["cells"]["store_unfulfilled"],
        payload["cells"]["nostore_fulfilled"],
        payload["cells"]["nostore_unfulfilled"],
    ) == cells

    above = len(fulfilled)
    below = len(inhabitants) - above
    expected_overlap = 100.0 * (0.9 * above) / (0.9 * above + 0.1 * below)
    assert abs(payload["overlap_percent_exact"] - expected_overlap) <= 3.0

    ranked = json.loads(recommendation.output)["results"]
    assert {r["site"] for r in ranked} == fulfilled

    assert elapsed < 5.0, f"end-to-end took {elapsed:.2f}s"


def test_hierarchy_invariants_over_random_forests():
    """1000 random forests: additive sums, intensive inheritance, purity."""
    rng = random.Random(20_160_902)
    started = time.perf_counter()
    for _ in range(1000):
        snapshot, records = random_forest_snapshot(rng)
        assert_forest_invariants(snapshot, records)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"forest suite took {elapsed:.2f}s"


def test_engine_invariants_over_random_profiles(country_snapshot):
    """500 random profiles: subset chain, scale invariance, determinism."""
    snapshot, _ = country_snapshot
    rng = random.Random(20_160_903)
    for _ in range(500):
        document = random_profile_document(rng)
        profile = parse_profile(document)
        candidates = set(candidate_sites(snapshot, profile))
        passing = survivors(snapshot, profile)
        ranked = recommend(snapshot, profile)
        assert {r.site_code for r in ranked} <= passing <= candidates

        scaled = recommend(snapshot, parse_profile(scale_weights(document, rng.uniform(0.1, 10.0))))
        assert [r.site_code for r in scaled] == [r.site_code for r in ranked]
        for lhs, rhs in zip(ranked, scaled):
            assert abs(lhs.total - rhs.total) <= 1e-12

        first = ranking_to_json(ranked, snapshot.version, profile.year)
        second = ranking_to_json(recommend(snapshot, profile), snapshot.version, profile.year)
        assert first == second


def test_statistics_oracles():
    """Pearson vs raw-moment oracle; rank-sum exact vs enumeration."""
    started = time.perf_counter()

    rng = random.Random(20_160_904)
    for _ in range(1000):
        n = rng.randint(2, 100)
        xs = [rng.random() for _ in range(n)]
        ys = [rng.random() for _ in range(n)]
        assert abs(pearson(xs, ys) - oracles.pearson_raw_moments(xs, ys)) <= 1e-12

    # symmetric with unit diagonal on a random value matrix
    levels = LevelScheme(("state", "municipality"))
    records = [("S", "S", "state", None)]
    records += [(f"S.M{i}", f"m{i}", "municipality", "S") for i in range(40)]
    hierarchy = build_hierarchy(records, levels)
    factor_ids = [f"f{k}" for k in range(4)]
    factors = [
        LocationFactor(fid, fid, "", "municipality", Aggregation.ADDITIVE)
        for fid in factor_ids
    ]
    values = [
        FactorValue(f"S.M{i}", fid, 2016, rng.random())
        for i in range(40)
        for fid in factor_ids
    ]
    snapshot = Snapshot(hierarchy, factors, values)
    matrix = correlation_matrix(
        snapshot,
        [(fid, fid) for fid in factor_ids],
        [f"S.M{i}" for i in range(40)],
        2016,
    )
    for i in range(4):
        assert matrix.values[i][i] == 1.0
        for j in range(4):
            assert matrix.values[i][j] == matrix.values[j][i]

    for n1 in range(1, 10):
        for n2 in range(1, 11 - n1):
            for _ in range(4):
                a = [float(rng.randint(0, 5)) for _ in range(n1)]
                b = [float(rng.randint(0, 5)) for _ in range(n2)]
                result = wilcoxon_rank_sum(a, b)
                assert result.mode == "exact"
                assert abs(result.p_value - oracles.ranksum_exact_p(a, b)) <= 1e-12

    for _ in range(50):
        a = [rng.gauss(0.0, 1.0) for _ in range(6)]
        b = [rng.gauss(0.7, 1.0) for _ in range(6)]
        exact = wilcoxon_rank_sum(a, b).p_value
        approx = wilcoxon_rank_sum(a, b, exact_limit=0).p_value
        assert abs(exact - approx) <= 0.02

    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"statistics oracles took {elapsed:.2f}s"


def test_correlation_structure_on_synthetic_country(country_snapshot):
    """Store counts proportional to inhabitants correlate; noise does not."""
    snapshot, chains = country_snapshot
    sites = snapshot.hierarchy.sites_at_level("municipality")
    matrix = correlation_matrix(
        snapshot,
        [
            ("stores", chains["MarketA"]),
            ("inhabitants", "inhabitants"),
            ("noise", "site_noise"),
        ],
        sites,
        2016,
    )
    assert matrix.at("stores", "inhabitants") > 0.95
    assert abs(matrix.at("stores", "noise")) < 0.3


def test_rank_sum_detects_constructed_shift():
    """Groups built with a two-sigma index shift test significant."""
    rng = random.Random(20_160_905)
    sigma = 5.0
    records = [("S", "S", "state", None)]
    values: list[FactorValue] = []
    chain_sites = set()
    for i in range(60):
        code = f"S.M{i:02d}"
        records.append((code, code, "municipality", "S"))
        shifted = i < 30
        if shifted:
            chain_sites.add(code)
        per_capita = rng.gauss(100.0 + (2 * sigma if shifted else 0.0), sigma)
        values.append(FactorValue(code, "inhabitants", 2016, 1000.0))
        values.append(FactorValue(code, "purchasing_power", 2016, 1000.0 * per_capita))
    hierarchy = build_hierarchy(records, LevelScheme(("state", "municipality")))
    factors = [
        LocationFactor("inhabitants", "inh", "persons", "municipality", Aggregation.ADDITIVE),
        LocationFactor("purchasing_power", "pp", "EUR", "municipality", Aggregation.ADDITIVE),
    ]
    snapshot = Snapshot(hierarchy, factors, values)
    universe = hierarchy.sites_at_level("municipality")

    chain = PresenceSet("shifted", frozenset(chain_sites))
    profiles = {p.label: p for p in chain_profile(snapshot, [chain], 2016, universe,
                                                  unemployment_factor_id="inhabitants")}
    assert profiles["shifted"].mean_power_index > profiles["no-chain"].mean_power_index

    metric = power_index_source(snapshot, 2016)
    inside = group_values(snapshot, chain_sites, metric, 2016)
    outside = group_values(snapshot, set(universe) - chain_sites, metric, 2016)
    result = wilcoxon_rank_sum(inside, outside)
    assert result.p_value < 0.05
