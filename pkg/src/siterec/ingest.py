"""Parsing and validation of delimited datasets into an immutable snapshot.

File formats (UTF-8, comma delimited, double-quote quoting):

* hierarchy file:  ``code,name,level,parent_code`` (empty parent = root)
* factor file:     ``site_code,year,value`` (``.`` decimal separator,
  thousands separators rejected, blank values skipped with a warning)
* presence file:   ``site_code`` or ``site_code,count``
* manifest:        JSON with ``hierarchy``, ``levels`` (ordered array) and
  ``factors`` (array of ``{id, name, unit, file, native_level,
  aggregation}``); optional ``years`` bounds and ``chains`` presence files.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .analysis import PresenceSet
from .errors import (
    DuplicateObservationError,
    EmptyFileError,
    IngestError,
    MalformedRowError,
    ManifestError,
    NonNumericValueError,
    SiteRecError,
    SnapshotRefusedError,
)
from .hierarchy import (
    Aggregation,
    FactorValue,
    Hierarchy,
    LevelScheme,
    LocationFactor,
    Snapshot,
    build_hierarchy,
)

HIERARCHY_HEADER = ["code", "name", "level", "parent_code"]
FACTOR_HEADER = ["site_code", "year", "value"]

# Plain decimal or scientific notation only; no grouping characters.
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class FactorDescriptor:
    """One factor file entry of the manifest."""

    id: str
    name: str
    unit: str
    file: Path
    native_level: str
    aggregation: Aggregation


@dataclass(frozen=True)
class ChainDescriptor:
    """One presence file entry of the manifest."""

    label: str
    file: Path


@dataclass(frozen=True)
class DatasetManifest:
    hierarchy: Path
    levels: tuple[str, ...]
    factors: tuple[FactorDescriptor, ...]
    years: tuple[int, int] | None = None
    chains: tuple[ChainDescriptor, ...] = ()

    def level_scheme(self) -> LevelScheme:
        return LevelScheme(self.levels)


@dataclass
class ValidationReport:
    """Outcome of one ingestion run.

    ``value_count + rows_skipped + rows_orphaned == rows_total`` always
    holds; a nonempty ``fatal`` list means the snapshot was refused.
    """

    site_count: int = 0
    factor_count: int = 0
    value_count: int = 0
    rows_total: int = 0
    rows_skipped: int = 0
    rows_orphaned: int = 0
    warnings: list[str] = field(default_factory=list)
    fatal: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.fatal

    def summary_lines(self) -> list[str]:
        lines = [
            f"sites: {self.site_count}",
            f"factors: {self.factor_count}",
            f"values: {self.value_count} accepted of {self.rows_total} rows "
            f"({self.rows_skipped} skipped, {self.rows_orphaned} orphaned)",
            f"warnings: {len(self.warnings)}",
            f"fatal errors: {len(self.fatal)}",
        ]
        return lines


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRowError(f"file is not valid UTF-8: {exc}") from None


def _rows(text: str) -> list[tuple[int, list[str]]]:
    """CSV rows paired with their 1-based line numbers; blank lines dropped."""
    reader = csv.reader(io.StringIO(text))
    out = []
    for row in reader:
        if not row or all(cell.strip() == "" for cell in row):
            continue
        out.append((reader.line_num, row))
    return out


def parse_hierarchy_file(
    data: bytes, levels: LevelScheme
) -> list[tuple[str, str, str, str | None]]:
    """Parse a hierarchy CSV into (code, name, level, parent) records."""
    rows = _rows(_decode(data))
    if not rows:
        raise EmptyFileError("hierarchy file is empty")
    line, header = rows[0]
    if [h.strip() for h in header] != HIERARCHY_HEADER:
        raise MalformedRowError(
            f"line {line}: expected header {','.join(HIERARCHY_HEADER)}"
        )
    records: list[tuple[str, str, str, str | None]] = []
    for line, row in rows[1:]:
        if len(row) != 4:
            raise MalformedRowError(f"line {line}: expected 4 columns, found {len(row)}")
        code, name, level, parent = (cell.strip() for cell in row)
        levels.index(level)
        records.append((code, name, level, parent or None))
    if not records:
        raise EmptyFileError("hierarchy file has no data rows")
    return records


def serialize_hierarchy(records: Iterable[tuple[str, str, str, str | None]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HIERARCHY_HEADER)
    for code, name, level, parent in records:
        writer.writerow([code, name, level, parent or ""])
    return buffer.getvalue().encode("utf-8")


def parse_factor_file(
    data: bytes, descriptor: FactorDescriptor
) -> tuple[list[FactorValue], list[str]]:
    """Parse a factor CSV; returns (values, warnings for skipped blanks)."""
    rows = _rows(_decode(data))
    if not rows:
        raise EmptyFileError(f"factor file for '{descriptor.id}' is empty")
    line, header = rows[0]
    if [h.strip() for h in header] != FACTOR_HEADER:
        raise MalformedRowError(
            f"line {line}: expected header {','.join(FACTOR_HEADER)}"
        )
    values: list[FactorValue] = []
    warnings: list[str] = []
    seen: set[tuple[str, int]] = set()
    for line, row in rows[1:]:
        if len(row) != 3:
            raise MalformedRowError(f"line {line}: expected 3 columns, found {len(row)}")
        site, year_cell, value_cell = (cell.strip() for cell in row)
        if not _INTEGER.match(year_cell):
            raise NonNumericValueError(f"line {line}: year '{year_cell}' is not an integer")
        year = int(year_cell)
        if (site, year) in seen:
            raise DuplicateObservationError(
                f"line {line}: duplicate observation for ({site}, {year})"
            )
        seen.add((site, year))
        if value_cell == "":
            warnings.append(
                f"{descriptor.id}: line {line}: blank value for ({site}, {year}) skipped"
            )
            continue
        if not _NUMBER.match(value_cell):
            raise NonNumericValueError(
                f"line {line}: value '{value_cell}' is not a plain number"
            )
        values.append(FactorValue(site, descriptor.id, year, float(value_cell)))
    return values, warnings


def parse_presence_file(data: bytes) -> dict[str, int]:
    """Parse a presence CSV into site -> establishment count."""
    rows = _rows(_decode(data))
    if not rows:
        raise EmptyFileError("presence file is empty")
    line, header = rows[0]
    header = [h.strip() for h in header]
    if header not in (["site_code"], ["site_code", "count"]):
        raise MalformedRowError(f"line {line}: expected header site_code[,count]")
    has_count = len(header) == 2
    counts: dict[str, int] = {}
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise MalformedRowError(
                f"line {line}: expected {len(header)} columns, found {len(row)}"
            )
        site = row[0].strip()
        if site in counts:
            raise DuplicateObservationError(f"line {line}: duplicate site '{site}'")
        if has_count:
            cell = row[1].strip()
            if not _INTEGER.match(cell):
                raise NonNumericValueError(f"line {line}: count '{cell}' is not an integer")
            counts[site] = int(cell)
        else:
            counts[site] = 1
    return counts


def load_manifest(path: Path | str) -> DatasetManifest:
    """Load and validate a manifest; relative paths resolve against it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")

    base = path.parent

    def _resolve(name: object) -> Path:
        if not isinstance(name, str) or not name:
            raise ManifestError(f"invalid file reference {name!r}")
        target = (base / name).resolve()
        if not target.is_file():
            raise ManifestError(f"referenced file does not exist: {target}")
        return target

    levels = doc.get("levels")
    if not isinstance(levels, list) or not all(isinstance(x, str) for x in levels):
        raise ManifestError("manifest field 'levels' must be an array of strings")
    try:
        scheme = LevelScheme(tuple(levels))
    except ValueError as exc:
        raise ManifestError(str(exc)) from None

    hierarchy = _resolve(doc.get("hierarchy"))

    factors: list[FactorDescriptor] = []
    seen_ids: set[str] = set()
    for entry in doc.get("factors", []):
        if not isinstance(entry, dict):
            raise ManifestError("each factor entry must be an object")
        try:
            fid = entry["id"]
            aggregation = Aggregation(entry["aggregation"])
            native_level = entry["native_level"]
        except KeyError as exc:
            raise ManifestError(f"factor entry missing field {exc}") from None
        except ValueError:
            raise ManifestError(
                f"factor '{entry.get('id')}': aggregation must be one of "
                f"{[a.value for a in Aggregation]}"
            ) from None
        if fid in seen_ids:
            raise ManifestError(f"duplicate factor id '{fid}' in manifest")
        seen_ids.add(fid)
        scheme.index(native_level)
        factors.append(
            FactorDescriptor(
                id=fid,
                name=entry.get("name", fid),
                unit=entry.get("unit", ""),
                file=_resolve(entry.get("file")),
                native_level=native_level,
                aggregation=aggregation,
            )
        )

    years = None
    if doc.get("years") is not None:
        raw = doc["years"]
        if (
            not isinstance(raw, list)
            or len(raw) != 2
            or not all(isinstance(y, int) for y in raw)
            or raw[0] > raw[1]
        ):
            raise ManifestError("manifest field 'years' must be [min, max] integers")
        years = (raw[0], raw[1])

    chains: list[ChainDescriptor] = []
    seen_labels: set[str] = set()
    for entry in doc.get("chains", []):
        if not isinstance(entry, dict) or "label" not in entry:
            raise ManifestError("each chain entry must be an object with a label")
        label = entry["label"]
        if label in seen_labels:
            raise ManifestError(f"duplicate chain label '{label}' in manifest")
        seen_labels.add(label)
        chains.append(ChainDescriptor(label=label, file=_resolve(entry.get("file"))))

    return DatasetManifest(
        hierarchy=hierarchy,
        levels=tuple(levels),
        factors=tuple(factors),
        years=years,
        chains=tuple(chains),
    )


def _additive_mismatch_warnings(snapshot: Snapshot) -> list[str]:
    """Flag native additive parents that differ >0.5 % from their child sum.

    Real statistical extracts carry rounding, so a mismatch warns rather
    than fails; native values keep priority during resolution.
    """
    warnings = []
    hierarchy = snapshot.hierarchy
    for factor in snapshot.factors():
        if factor.aggregation is not Aggregation.ADDITIVE:
            continue
        for year in sorted(snapshot.years):
            for code in hierarchy.codes():
                native = snapshot.native(code, factor.id, year)
                kids = hierarchy.children(code) if code in hierarchy else ()
                if native is None or not kids:
                    continue
                parts = [snapshot.resolve(k, factor.id, year) for k in kids]
                if any(p is None for p in parts):
                    continue
                child_sum = sum(p for p in parts if p is not None)
                scale = max(abs(native), abs(child_sum), 1e-12)
                if abs(native - child_sum) / scale > 0.005:
                    warnings.append(
                        f"{factor.id}: native value {native:g} at '{code}' ({year}) "
                        f"differs from child sum {child_sum:g} by more than 0.5 %"
                    )
    return warnings


def build_snapshot(manifest: DatasetManifest) -> tuple[Snapshot | None, ValidationReport]:
    """Assemble a snapshot; returns (None, report) when refused.

    Orphan values (unknown site, or year outside the manifest bounds)
    warn and are dropped; structural defects in any file are fatal.
    """
    report = ValidationReport()
    scheme = manifest.level_scheme()

    try:
        records = parse_hierarchy_file(manifest.hierarchy.read_bytes(), scheme)
        hierarchy = build_hierarchy(records, scheme)
    except (SiteRecError, OSError) as exc:
        report.fatal.append(f"hierarchy: {exc}")
        return None, report

    factors = [
        LocationFactor(d.id, d.name, d.unit, d.native_level, d.aggregation)
        for d in manifest.factors
    ]

    accepted: list[FactorValue] = []
    for descriptor in manifest.factors:
        try:
            values, warnings = parse_factor_file(descriptor.file.read_bytes(), descriptor)
        except (IngestError, OSError) as exc:
            report.fatal.append(f"{descriptor.id}: {exc}")
            continue
        report.rows_total += len(values) + len(warnings)
        report.rows_skipped += len(warnings)
        report.warnings.extend(warnings)
        for value in values:
            if value.site_code not in hierarchy:
                report.rows_orphaned += 1
                report.warnings.append(
                    f"{descriptor.id}: value for unknown site '{value.site_code}' dropped"
                )
                continue
            if manifest.years and not (
                manifest.years[0] <= value.year <= manifest.years[1]
            ):
                report.rows_orphaned += 1
                report.warnings.append(
                    f"{descriptor.id}: value for '{value.site_code}' has year "
                    f"{value.year} outside bounds {manifest.years}; dropped"
                )
                continue
            accepted.append(value)

    if report.fatal:
        return None, report

    snapshot = Snapshot(hierarchy, factors, accepted)
    report.site_count = len(hierarchy)
    report.factor_count = len(factors)
    report.value_count = len(accepted)
    report.warnings.extend(_additive_mismatch_warnings(snapshot))
    return snapshot, report


def load_presence_sets(
    manifest: DatasetManifest, hierarchy: Hierarchy
) -> tuple[dict[str, PresenceSet], list[str]]:
    """Load the manifest's presence files; unknown sites warn and drop."""
    sets: dict[str, PresenceSet] = {}
    warnings: list[str] = []
    for chain in manifest.chains:
        counts = parse_presence_file(chain.file.read_bytes())
        known = {}
        for site, count in counts.items():
            if site not in hierarchy:
                warnings.append(
                    f"chain '{chain.label}': unknown site '{site}' dropped"
                )
                continue
            known[site] = count
        sets[chain.label] = PresenceSet.from_counts(chain.label, known)
    return sets, warnings


def load_snapshot(
    manifest_path: Path | str,
) -> tuple[Snapshot, ValidationReport, dict[str, PresenceSet]]:
    """Convenience loader: manifest -> snapshot + report + presence sets.

    Raises :class:`SnapshotRefusedError` when construction is refused.
    """
    manifest = load_manifest(manifest_path)
    snapshot, report = build_snapshot(manifest)
    if snapshot is None:
        raise SnapshotRefusedError(report)
    chains, warnings = load_presence_sets(manifest, snapshot.hierarchy)
    report.warnings.extend(warnings)
    return snapshot, report, chains
