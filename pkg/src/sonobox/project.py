"""Project configuration: species lists, site metadata, BTO codes and the
color-grouped class list.

All three config CSVs live in the project root and are read as UTF-8 with
an optional BOM. They are loaded once per server start and treated as
immutable snapshots; the class list's custom group is per-session state.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path

from .audio_io import RecordingFile
from .errors import (
    AlreadyPresentError,
    ConfigError,
    NotFoundError,
    NotRemovableError,
    ValidationError,
)

SPECIES_LIST_FILE = "species_list.csv"
LOCATION_LIST_FILE = "location_list.csv"
BTO_CODES_FILE = "bto_codes.csv"
MISC_CLASSES_FILE = "misc_classes.csv"

DEFAULT_MISC_CLASSES = (
    "Human",
    "Insect",
    "Weather",
    "Wind Turbine",
    "Other Noise",
    "Unknown Bird",
)

LOCATION_COLUMNS = (
    "recorder_name",
    "lat",
    "long",
    "location_name",
    "location_county",
    "habitat_type",
    "dist_to_coastline",
)


def _rows(data: bytes) -> list[list[str]]:
    return list(csv.reader(io.StringIO(data.decode("utf-8-sig"))))


@dataclass
class SpeciesLists:
    """Site name -> alphabetically sorted species, in file column order."""

    by_site: dict[str, list[str]] = field(default_factory=dict)

    def sites(self) -> list[str]:
        return list(self.by_site)

    def for_site(self, site: str) -> list[str]:
        if site not in self.by_site:
            raise ConfigError(f"unknown site {site!r}")
        return list(self.by_site[site])


def load_species_lists(data: bytes) -> SpeciesLists:
    """Parse species_list.csv: row 1 holds site names, each column the
    species expected there. Columns may be ragged; blanks are skipped;
    species come back sorted case-insensitively with duplicates removed."""
    rows = _rows(data)
    if not rows:
        raise ConfigError("species list is empty")
    sites = [name.strip() for name in rows[0]]
    indexed = [(i, name) for i, name in enumerate(sites) if name]
    if not indexed:
        raise ConfigError("species list has no site names in its first row")
    seen = set()
    for _, name in indexed:
        low = name.lower()
        if low in seen:
            raise ConfigError(f"duplicate site name {name!r} in species list")
        seen.add(low)
    by_site: dict[str, list[str]] = {}
    for i, name in indexed:
        column = []
        seen_species = set()
        for row in rows[1:]:
            cell = row[i].strip() if i < len(row) else ""
            if not cell or cell.lower() in seen_species:
                continue
            seen_species.add(cell.lower())
            column.append(cell)
        by_site[name] = sorted(column, key=str.lower)
    return SpeciesLists(by_site=by_site)


@dataclass
class SiteMetadata:
    recorder_name: str
    lat: float | None = None
    long: float | None = None
    location_name: str = ""
    location_county: str = ""
    habitat_type: str = ""
    dist_to_coastline: float | None = None
    extras: list[tuple[str, str]] = field(default_factory=list)


def _parse_coord(raw: str, lo: float, hi: float, column: str) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{column} value {raw!r} is not a number") from exc
    if not lo <= value <= hi:
        raise ConfigError(f"{column} value {value} outside [{lo}, {hi}]")
    return value


def load_locations(data: bytes) -> list[SiteMetadata]:
    """Parse location_list.csv; unknown columns are preserved in extras in
    file order ("printed verbatim" in the metadata panel)."""
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    if reader.fieldnames is None or "recorder_name" not in [
        f.strip() for f in reader.fieldnames
    ]:
        raise ConfigError("location list needs a recorder_name column")
    fieldnames = [f.strip() for f in reader.fieldnames]
    extra_cols = [c for c in fieldnames if c not in LOCATION_COLUMNS]
    out = []
    for row in reader:
        row = {(k.strip() if k else k): (v or "") for k, v in row.items()}
        rec = row.get("recorder_name", "").strip()
        if not rec:
            continue
        dist_raw = row.get("dist_to_coastline", "").strip()
        try:
            dist = float(dist_raw) if dist_raw else None
        except ValueError as exc:
            raise ConfigError(f"dist_to_coastline value {dist_raw!r} is not a number") from exc
        out.append(
            SiteMetadata(
                recorder_name=rec,
                lat=_parse_coord(row.get("lat", ""), -90, 90, "lat"),
                long=_parse_coord(row.get("long", ""), -180, 180, "long"),
                location_name=row.get("location_name", "").strip(),
                location_county=row.get("location_county", "").strip(),
                habitat_type=row.get("habitat_type", "").strip(),
                dist_to_coastline=dist,
                extras=[(c, row.get(c, "")) for c in extra_cols],
            )
        )
    return out


@dataclass
class BtoCodeTable:
    """Species name -> 2-letter display code, matched case-insensitively."""

    by_species: dict[str, str] = field(default_factory=dict)

    def code_for(self, species: str) -> str | None:
        return self.by_species.get(species.strip().lower())


def load_bto_codes(data: bytes) -> BtoCodeTable:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    fields = [f.strip() for f in reader.fieldnames or []]
    if "bto_code" not in fields or "species_name" not in fields:
        raise ConfigError("BTO table needs bto_code and species_name columns")
    table: dict[str, str] = {}
    for row in reader:
        row = {(k.strip() if k else k): (v or "").strip() for k, v in row.items()}
        code, species = row.get("bto_code", ""), row.get("species_name", "")
        if not code and not species:
            continue
        if len(code) != 2:
            raise ConfigError(f"BTO code {code!r} for {species!r} is not 2 characters")
        key = species.lower()
        if key in table:
            raise ConfigError(f"duplicate species {species!r} in BTO table")
        table[key] = code
    return BtoCodeTable(by_species=table)


def resolve_metadata(
    rec: RecordingFile, sites: list[SiteMetadata]
) -> tuple[SiteMetadata | None, datetime | None]:
    """Match a parsed file name to a deployed recorder (exact, case-sensitive).

    Returns (None, ...) when unmatched so the UI can show an empty panel.
    """
    match = None
    if rec.recorder_name:
        for site in sites:
            if site.recorder_name == rec.recorder_name:
                match = site
                break
    return match, (rec.recorded_at if rec.metadata_available else None)


@dataclass(frozen=True)
class ClassList:
    """Assignable classes: core species (green), fixed miscellaneous noise
    categories (orange) and user-added custom classes (blue)."""

    core: tuple[str, ...]
    misc: tuple[str, ...] = DEFAULT_MISC_CLASSES
    custom: tuple[str, ...] = ()

    def all_names(self) -> list[str]:
        return list(self.core) + list(self.misc) + list(self.custom)

    def group_of(self, name: str) -> str:
        """green/orange/blue group, or grey for a class in no group."""
        low = name.strip().lower()
        if low in (c.lower() for c in self.core):
            return "core"
        if low in (c.lower() for c in self.misc):
            return "misc"
        if low in (c.lower() for c in self.custom):
            return "custom"
        return "grey"


def class_list(
    site: str,
    species: SpeciesLists,
    custom: list[str] | tuple[str, ...] = (),
    misc: tuple[str, ...] = DEFAULT_MISC_CLASSES,
) -> ClassList:
    """Class list for a site: its sorted species plus the fixed misc group,
    then custom additions in the order they were added."""
    core = species.for_site(site)
    lower_core = {c.lower() for c in core}
    clash = [m for m in misc if m.lower() in lower_core]
    if clash:
        raise ConfigError(
            f"species list for {site!r} collides with miscellaneous classes: {clash}"
        )
    result = ClassList(core=tuple(core), misc=tuple(misc))
    for name in custom:
        result = add_class(result, name)
    return result


def add_class(classes: ClassList, name: str) -> ClassList:
    """Append a custom class unless an equal name (case-insensitive,
    trimmed) already exists in any group."""
    name = name.strip()
    if not name:
        raise ValidationError("class name must be non-empty", field="name")
    low = name.lower()
    if any(low == existing.lower() for existing in classes.all_names()):
        raise AlreadyPresentError(f"class {name!r} is already present in the list")
    return replace(classes, custom=classes.custom + (name,))


def remove_class(classes: ClassList, name: str) -> ClassList:
    """Remove a custom class; core and misc classes are not removable."""
    low = name.strip().lower()
    for existing in classes.custom:
        if existing.lower() == low:
            return replace(
                classes, custom=tuple(c for c in classes.custom if c.lower() != low)
            )
    if any(low == c.lower() for c in tuple(classes.core) + tuple(classes.misc)):
        raise NotRemovableError(f"class {name!r} is not a custom class")
    raise NotFoundError(f"class {name!r} is not in the list")


def display_name(class_name: str, table: BtoCodeTable, use_codes: bool) -> str:
    """The 2-letter BTO code when enabled and matched, else the name itself."""
    if not use_codes:
        return class_name
    code = table.code_for(class_name)
    return code if code is not None else class_name


@dataclass
class ProjectConfig:
    """Immutable snapshot of the three config CSVs (plus optional misc
    override). Missing optional files degrade to empty tables."""

    root: Path
    species: SpeciesLists = field(default_factory=SpeciesLists)
    locations: list[SiteMetadata] = field(default_factory=list)
    bto: BtoCodeTable = field(default_factory=BtoCodeTable)
    misc: tuple[str, ...] = DEFAULT_MISC_CLASSES

    @classmethod
    def load(cls, root: Path | str) -> "ProjectConfig":
        root = Path(root)
        config = cls(root=root)
        species_path = root / SPECIES_LIST_FILE
        if species_path.exists():
            config.species = load_species_lists(species_path.read_bytes())
        locations_path = root / LOCATION_LIST_FILE
        if locations_path.exists():
            config.locations = load_locations(locations_path.read_bytes())
        bto_path = root / BTO_CODES_FILE
        if bto_path.exists():
            config.bto = load_bto_codes(bto_path.read_bytes())
        misc_path = root / MISC_CLASSES_FILE
        if misc_path.exists():
            names = [
                line.strip()
                for line in misc_path.read_text(encoding="utf-8-sig").splitlines()
                if line.strip()
            ]
            if names:
                config.misc = tuple(names)
        return config
