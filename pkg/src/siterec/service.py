"""HTTP facade: snapshot browsing, recommendation, and analytics.

The service holds exactly one immutable snapshot at a time. Reloading
builds the replacement first and swaps a single reference, so in-flight
requests finish on the snapshot they started with and a failed reload
leaves the current one untouched. Responses always carry the snapshot
version tag.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, HTTPException, Query, Request

from .analysis import (
    PresenceSet,
    correlation_matrix,
    group_values,
    power_index_source,
    wilcoxon_rank_sum,
)
from .engine import (
    parse_profile,
    recommend,
    recommendation_to_dict,
)
from .errors import (
    EmptyFocusError,
    EmptySampleError,
    InconsistentProfileError,
    LengthMismatchError,
    ProfileError,
    SetNotInUniverseError,
    SiteRecError,
    UnknownFactorError,
    UnknownLevelNameError,
    UnknownSiteError,
)
from .hierarchy import Snapshot
from .ingest import ValidationReport, load_snapshot
from .reports import (
    chain_evaluation_to_dict,
    elimination_details,
    evaluate_chain,
    matrix_to_dict,
    overall_overlap,
    ranksum_to_dict,
)


@dataclass(frozen=True)
class ServiceState:
    """One complete served dataset; replaced atomically on reload."""

    snapshot: Snapshot
    report: ValidationReport
    chains: dict[str, PresenceSet]
    source: str

    @property
    def version(self) -> str:
        return self.snapshot.version


class SnapshotService:
    """Holder for the current state; reads are lock-free."""

    def __init__(self) -> None:
        self._state: ServiceState | None = None

    def load(self, manifest_path: Path | str) -> ServiceState:
        """Load a manifest and swap it in; failures keep the old state."""
        snapshot, report, chains = load_snapshot(manifest_path)
        state = ServiceState(
            snapshot=snapshot,
            report=report,
            chains=chains,
            source=str(manifest_path),
        )
        self._state = state
        return state

    @property
    def state(self) -> ServiceState | None:
        return self._state


def _require_state(service: SnapshotService) -> ServiceState:
    state = service.state
    if state is None:
        raise HTTPException(status_code=503, detail="no snapshot loaded")
    return state


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise HTTPException(status_code=400, detail="request body is not valid JSON")
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="request body must be a JSON object")
    return body


def _http_error(exc: SiteRecError) -> HTTPException:
    if isinstance(exc, InconsistentProfileError):
        return HTTPException(
            status_code=422,
            detail={
                "message": str(exc),
                "conflicts": [
                    {
                        "first": c.first,
                        "second": c.second,
                        "explanation": c.explanation,
                    }
                    for c in exc.conflicts
                ],
            },
        )
    if isinstance(exc, (UnknownSiteError, UnknownFactorError)):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(
        exc,
        (
            ProfileError,
            EmptyFocusError,
            UnknownLevelNameError,
            SetNotInUniverseError,
            LengthMismatchError,
            EmptySampleError,
        ),
    ):
        return HTTPException(status_code=400, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def _resolve_chain(state: ServiceState, raw: object) -> PresenceSet:
    if isinstance(raw, str):
        chain = state.chains.get(raw)
        if chain is None:
            raise HTTPException(status_code=404, detail=f"unknown chain '{raw}'")
        return chain
    if isinstance(raw, Mapping) and isinstance(raw.get("label"), str):
        sites = raw.get("sites")
        if not isinstance(sites, list) or not all(isinstance(s, str) for s in sites):
            raise HTTPException(
                status_code=400, detail="inline chain needs a 'sites' array"
            )
        counts = raw.get("counts")
        if counts is not None and not (
            isinstance(counts, Mapping)
            and all(isinstance(v, int) for v in counts.values())
        ):
            raise HTTPException(status_code=400, detail="chain counts must be integers")
        return PresenceSet(
            label=raw["label"],
            sites=frozenset(sites),
            counts=dict(counts) if counts is not None else None,
        )
    raise HTTPException(
        status_code=400, detail="each chain must be a label or {label, sites}"
    )


def _select_sites(state: ServiceState, raw: object) -> list[str]:
    hierarchy = state.snapshot.hierarchy
    if raw is None:
        return hierarchy.sites_at_level(hierarchy.levels.bottom)
    if isinstance(raw, list) and all(isinstance(s, str) for s in raw):
        for code in raw:
            hierarchy.site(code)
        return sorted(set(raw))
    if isinstance(raw, Mapping):
        level = raw.get("level", hierarchy.levels.bottom)
        under = raw.get("under")
        return hierarchy.sites_at_level(level, under=under)
    raise HTTPException(
        status_code=400, detail="sites must be a code array or {level, under}"
    )


def _metric_source(state: ServiceState, raw: object, year: int):
    if isinstance(raw, Mapping) and isinstance(raw.get("factor"), str):
        state.snapshot.factor(raw["factor"])
        return raw["factor"]
    if isinstance(raw, Mapping) and raw.get("index") == "purchasing_power":
        return power_index_source(state.snapshot, year)
    raise HTTPException(
        status_code=400,
        detail="metric must be {factor: id} or {index: 'purchasing_power'}",
    )


def create_app(service: SnapshotService) -> FastAPI:
    app = FastAPI(title="siterec", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        state = service.state
        return {
            "status": "ok",
            "loaded": state is not None,
            "version": state.version if state else None,
        }

    @app.get("/sites")
    def sites(
        level: str | None = Query(default=None),
        under: str | None = Query(default=None),
    ) -> dict:
        state = _require_state(service)
        hierarchy = state.snapshot.hierarchy
        try:
            if level is not None:
                codes = hierarchy.sites_at_level(level, under=under)
            elif under is not None:
                codes = sorted(hierarchy.subtree(under))
            else:
                codes = hierarchy.codes()
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {
            "version": state.version,
            "sites": [
                {
                    "code": site.code,
                    "name": site.name,
                    "level": site.level,
                    "parent_code": site.parent_code,
                }
                for site in (hierarchy.site(c) for c in codes)
            ],
        }

    @app.get("/sites/{code}")
    def site_detail(code: str) -> dict:
        state = _require_state(service)
        hierarchy = state.snapshot.hierarchy
        try:
            site = hierarchy.site(code)
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {
            "version": state.version,
            "code": site.code,
            "name": site.name,
            "level": site.level,
            "parent_code": site.parent_code,
            "children": list(hierarchy.children(code)),
        }

    @app.get("/factors")
    def factors() -> dict:
        state = _require_state(service)
        return {
            "version": state.version,
            "factors": [
                {
                    "id": f.id,
                    "name": f.name,
                    "unit": f.unit,
                    "native_level": f.native_level,
                    "aggregation": f.aggregation.value,
                }
                for f in state.snapshot.factors()
            ],
        }

    @app.get("/factors/{factor_id}/values")
    def factor_values(
        factor_id: str,
        year: int = Query(...),
        level: str | None = Query(default=None),
        under: str | None = Query(default=None),
    ) -> dict:
        state = _require_state(service)
        snapshot = state.snapshot
        try:
            factor = snapshot.factor(factor_id)
            target = level or factor.native_level
            codes = snapshot.hierarchy.sites_at_level(target, under=under)
            values = [
                {"site": code, "value": snapshot.resolve(code, factor_id, year)}
                for code in codes
            ]
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {
            "version": state.version,
            "factor": factor_id,
            "year": year,
            "level": target,
            "values": values,
        }

    @app.post("/recommend")
    async def handle_recommend(
        request: Request, top_k: int | None = Query(default=None)
    ) -> dict:
        state = _require_state(service)
        body = await _json_body(request)
        try:
            profile = parse_profile(body)
            ranked = recommend(state.snapshot, profile, top_k)
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {
            "version": state.version,
            "year": profile.year,
            "results": [recommendation_to_dict(r) for r in ranked],
        }

    @app.post("/evaluate")
    async def handle_evaluate(request: Request) -> dict:
        state = _require_state(service)
        body = await _json_body(request)
        raw_profile = body.get("profile")
        if not isinstance(raw_profile, Mapping):
            raise HTTPException(status_code=400, detail="body needs a 'profile' object")
        chains = [_resolve_chain(state, raw) for raw in body.get("chains", [])]
        occupied = frozenset().union(*(c.sites for c in chains)) if chains else frozenset()
        try:
            profile = parse_profile(raw_profile)
            evaluations = [
                evaluate_chain(state.snapshot, profile, chain, occupied)
                for chain in chains
            ]
            payload = {
                "version": state.version,
                "year": profile.year,
                "results": [chain_evaluation_to_dict(e) for e in evaluations],
                "overall": overall_overlap(evaluations),
            }
            if body.get("include_sites"):
                payload["details"] = elimination_details(state.snapshot, profile)
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return payload

    @app.post("/correlate")
    async def handle_correlate(request: Request) -> dict:
        state = _require_state(service)
        body = await _json_body(request)
        year = body.get("year")
        if not isinstance(year, int):
            raise HTTPException(status_code=400, detail="body needs an integer 'year'")
        raw_attributes = body.get("attributes")
        if not isinstance(raw_attributes, list) or len(raw_attributes) < 2:
            raise HTTPException(
                status_code=400, detail="body needs at least two 'attributes'"
            )
        attributes = []
        for raw in raw_attributes:
            if not isinstance(raw, Mapping) or not isinstance(raw.get("label"), str):
                raise HTTPException(
                    status_code=400, detail="each attribute needs a label"
                )
            label = raw["label"]
            if isinstance(raw.get("factor"), str):
                attributes.append((label, raw["factor"]))
            elif raw.get("chain") is not None or raw.get("sites") is not None:
                chain_raw = raw.get("chain")
                if chain_raw is None:
                    chain_raw = {"label": label, "sites": raw.get("sites")}
                attributes.append((label, _resolve_chain(state, chain_raw)))
            else:
                raise HTTPException(
                    status_code=400,
                    detail=f"attribute '{label}' needs a factor, chain, or sites",
                )
        try:
            for label, source in attributes:
                if isinstance(source, str):
                    state.snapshot.factor(source)
            sites = _select_sites(state, body.get("sites"))
            matrix = correlation_matrix(state.snapshot, attributes, sites, year)
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {"version": state.version, "year": year, **matrix_to_dict(matrix)}

    @app.post("/ranksum")
    async def handle_ranksum(request: Request) -> dict:
        state = _require_state(service)
        body = await _json_body(request)
        year = body.get("year")
        if not isinstance(year, int):
            raise HTTPException(status_code=400, detail="body needs an integer 'year'")

        def _group(key: str) -> list[str]:
            raw = body.get(key)
            if isinstance(raw, Mapping) and raw.get("chain") is not None:
                return sorted(_resolve_chain(state, raw["chain"]).sites)
            if isinstance(raw, Mapping) and raw.get("sites") is not None:
                return _select_sites(state, raw["sites"])
            raise HTTPException(
                status_code=400, detail=f"group '{key}' needs sites or a chain"
            )

        metric = _metric_source(state, body.get("metric"), year)
        try:
            values_a = group_values(state.snapshot, _group("a"), metric, year)
            values_b = group_values(state.snapshot, _group("b"), metric, year)
            result = wilcoxon_rank_sum(values_a, values_b)
        except SiteRecError as exc:
            raise _http_error(exc) from None
        return {"version": state.version, "year": year, **ranksum_to_dict(result)}

    return app


def build_app(manifest_path: Path | str) -> FastAPI:
    """Load a manifest and return a ready application (used by `serve`)."""
    service = SnapshotService()
    service.load(manifest_path)
    return create_app(service)
