"""Catalog directory: the data store, provenance, config and tables on disk.

A catalog lives in one directory::

    data.nq      canonical N-Quads data store
    prov.nq      canonical N-Quads provenance store
    catalog.cfg  key=value configuration
    tables/      ingested CSV tables
    mappings/    mapping DSL files
    bundles/     deposit bundle output

Every entity's descriptive quads live in its own metadata record graph
(entity IRI + "/record"); every state change goes through the provenance
tracker, so the stores stay reconstructable from the snapshot chains.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass, fields
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import vocab, workflow
from .mapping import MappingDocument, Table, execute_mapping, load_table, percent_encode
from .provenance import ProvenanceTracker, utc_second
from .rdf import InvalidIri, Iri, Literal, Quad, make_iri
from .store import Delta, Store
from .workflow import (
    AssetVersion,
    ConstraintProfile,
    MissingColumn,
    NoSuchObject,
    PhaseRecord,
    UploadRecord,
    Violation,
    parse_process_table,
)

DEFAULT_REQUIRED_FIELDS = (
    vocab.RDF_TYPE.value,
    vocab.DCT_TITLE.value,
    vocab.DCT_IDENTIFIER.value,
    vocab.DCT_RIGHTS_HOLDER.value,
    vocab.DCT_ACCESS_RIGHTS.value,
)

DEFAULT_AUTHORITY_DOMAINS = ("viaf.org", "getty.edu", "wikidata.org")
DEFAULT_OPEN_SCHEMES = ("http", "https")


class CatalogExists(FileExistsError):
    pass


class NotACatalog(FileNotFoundError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    base_iri: str = "https://example.org/catalog/"
    agent: str = "https://example.org/catalog/agent/operator"
    authority_domains: tuple = DEFAULT_AUTHORITY_DOMAINS
    open_schemes: tuple = DEFAULT_OPEN_SCHEMES
    quality_threshold: float = 0.8
    required_fields: tuple = DEFAULT_REQUIRED_FIELDS
    endpoint_port: int = 8099
    scanned_polygons_min: int = 500_000
    scanned_polygons_max: int = 1_000_000
    texture_max_px: int = 16_384
    sls_processed_max_bytes: int = 800 * 10**6

    def __post_init__(self):
        try:
            make_iri(self.base_iri)
        except InvalidIri as exc:
            raise ConfigError(f"base_iri: {exc}") from None
        if not self.base_iri.endswith("/"):
            raise ConfigError("base_iri must end with '/'")
        try:
            make_iri(self.agent)
        except InvalidIri as exc:
            raise ConfigError(f"agent: {exc}") from None

    def agent_iri(self) -> Iri:
        return Iri(self.agent)

    def constraint_profile(self) -> ConstraintProfile:
        return ConstraintProfile(
            scanned_polygons_min=self.scanned_polygons_min,
            scanned_polygons_max=self.scanned_polygons_max,
            texture_max_px=self.texture_max_px,
            sls_processed_max_bytes=self.sls_processed_max_bytes,
        )

    def to_text(self) -> str:
        lines = []
        for spec in fields(self):
            value = getattr(self, spec.name)
            if isinstance(value, tuple):
                value = ",".join(value)
            lines.append(f"{spec.name}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Config":
        values = {}
        for line_no, raw in enumerate(text.split("\n"), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {line_no} is not key=value: {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
        kwargs = {}
        for spec in fields(cls):
            if spec.name not in values:
                continue
            raw = values.pop(spec.name)
            if spec.type in ("int", int):
                try:
                    kwargs[spec.name] = int(raw)
                except ValueError:
                    raise ConfigError(f"{spec.name} must be an integer, got {raw!r}") from None
            elif spec.type in ("float", float):
                try:
                    kwargs[spec.name] = float(raw)
                except ValueError:
                    raise ConfigError(f"{spec.name} must be a number, got {raw!r}") from None
            elif spec.type in ("tuple", tuple):
                kwargs[spec.name] = tuple(part.strip() for part in raw.split(",") if part.strip())
            else:
                kwargs[spec.name] = raw
        if values:
            unknown = ", ".join(sorted(values))
            raise ConfigError(f"unknown config key(s): {unknown}")
        return cls(**kwargs)


@dataclass
class IngestStats:
    created: int = 0
    modified: int = 0
    unchanged: int = 0

    def note(self, outcome: str):
        setattr(self, outcome, getattr(self, outcome) + 1)


# Bibliographic CSV columns mapped onto vocabulary terms.  Cells holding
# several values separate them with semicolons.
_BIB_COLUMNS = {
    "title": (vocab.DCT_TITLE, "literal"),
    "type": (vocab.DCT_TYPE, "literal"),
    "description": (vocab.DCT_DESCRIPTION, "literal"),
    "creator": (vocab.DCT_CREATOR, "literal"),
    "licence": (vocab.DCT_LICENSE, "iri"),
    "record_licence": (vocab.RECORD_LICENCE, "iri"),
    "rights_holder": (vocab.DCT_RIGHTS_HOLDER, "literal"),
    "holding_institution": (vocab.HOLDING_INSTITUTION, "literal"),
    "produced_by": (vocab.PRODUCED_BY, "agent_list"),
    "access_rights": (vocab.DCT_ACCESS_RIGHTS, "literal"),
    "access_url": (vocab.ACCESS_URL, "iri"),
    "storage": (vocab.STORAGE_LOCATION, "literal"),
    "backup": (vocab.BACKUP_LOCATION, "literal"),
    "registered_in": (vocab.REGISTERED_IN, "iri"),
    "schema": (vocab.DCT_CONFORMS_TO, "iri"),
    "formats": (vocab.DCT_FORMAT, "literal_list"),
    "same_as": (vocab.SAME_AS, "iri_list"),
    "start": (vocab.INTERVAL_START, "date"),
    "end": (vocab.INTERVAL_END, "date"),
}

_BIB_REQUIRED = ("id", "title")


class BibliographicError(ValueError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


def record_graph(entity: Iri) -> Iri:
    return Iri(entity.value + "/record")


class Catalog:
    """One catalog directory plus its in-memory stores.

    A single process owns the writer role; commands that only read must
    never call :meth:`save`.
    """

    def __init__(self, root: Path, config: Config, store: Store, tracker: ProvenanceTracker):
        self.root = Path(root)
        self.config = config
        self.store = store
        self.tracker = tracker
        self._clock_floor = None

    # -- directory plumbing ------------------------------------------------

    @classmethod
    def create(cls, root) -> "Catalog":
        root = Path(root)
        if root.exists() and any(root.iterdir()):
            raise CatalogExists(f"{root} already exists and is not empty")
        root.mkdir(parents=True, exist_ok=True)
        for sub in ("tables", "mappings", "bundles"):
            (root / sub).mkdir()
        (root / "data.nq").write_text("", encoding="utf-8")
        (root / "prov.nq").write_text("", encoding="utf-8")
        config = Config()
        (root / "catalog.cfg").write_text(config.to_text(), encoding="utf-8")
        store = Store()
        return cls(root, config, store, ProvenanceTracker(store))

    @classmethod
    def open(cls, root) -> "Catalog":
        root = Path(root)
        if not (root / "catalog.cfg").is_file():
            raise NotACatalog(f"{root} does not look like a catalog (no catalog.cfg)")
        config = Config.from_text((root / "catalog.cfg").read_text(encoding="utf-8"))
        store = Store.load(root / "data.nq")
        prov_store = Store.load(root / "prov.nq")
        tracker = ProvenanceTracker.from_quads(store, prov_store.quads())
        return cls(root, config, store, tracker)

    def save(self):
        self.store.save(self.root / "data.nq")
        prov = Store(self.tracker.export_all_graphs())
        prov.save(self.root / "prov.nq")

    def table_path(self, name: str) -> Path:
        return self.root / "tables" / f"{name}.csv"

    def load_table(self, name: str) -> Table:
        return load_table(self.table_path(name), name)

    # -- deterministic snapshot clock ---------------------------------------

    def next_time(self) -> datetime:
        """Strictly increasing second-resolution timestamps for snapshots."""
        if self._clock_floor is None:
            latest = None
            for entity in self.tracker.entities():
                last = self.tracker.chain(entity)[-1].generated_at
                if latest is None or last > latest:
                    latest = last
            self._clock_floor = latest
        now = utc_second(datetime.now(timezone.utc))
        if self._clock_floor is not None and now <= self._clock_floor:
            now = self._clock_floor + timedelta(seconds=1)
        self._clock_floor = now
        return now

    # -- entity state updates ----------------------------------------------

    def _apply_entity_state(self, entity: Iri, desired: set[Quad], owned_predicates, source: Iri | None) -> str:
        """Reconcile the entity's quads with the desired set.

        Only quads whose predicate the caller owns are eligible for
        deletion; statements added by other routes (mappings, manual
        edits) survive a re-ingest.
        """
        agent = self.config.agent_iri()
        if not self.tracker.has_chain(entity):
            self.tracker.record_creation(entity, desired, agent, source=source, time=self.next_time())
            return "created"
        current = self.tracker.current_quads(entity)
        owned = {q for q in current if q.predicate in owned_predicates}
        deletes = owned - desired
        inserts = desired - current
        if not deletes and not inserts:
            return "unchanged"
        self.tracker.record_modification(entity, Delta(deletes=deletes, inserts=inserts), agent, source=source, time=self.next_time())
        return "modified"

    def ensure_entity(self, entity: Iri, skeleton: set[Quad], source: Iri | None):
        if not self.tracker.has_chain(entity):
            self.tracker.record_creation(entity, skeleton, self.config.agent_iri(), source=source, time=self.next_time())

    # -- bibliographic ingest ------------------------------------------------

    def _bibliographic_state(self, row: dict, row_no: int) -> tuple[Iri, set[Quad]]:
        ident = row.get("id", "").strip()
        if not ident:
            raise BibliographicError(row_no, "empty id cell")
        kind = row.get("kind", "cho").strip() or "cho"
        if kind not in ("cho", "dcho"):
            raise BibliographicError(row_no, f"kind must be cho or dcho, got {kind!r}")
        base = self.config.base_iri
        entity = Iri(base + f"{kind}/" + percent_encode(ident))
        graph = record_graph(entity)
        rdf_class = vocab.PHYSICAL_OBJECT if kind == "cho" else vocab.DIGITAL_OBJECT
        quads = {
            Quad(entity, vocab.RDF_TYPE, rdf_class, graph),
            Quad(entity, vocab.DCT_IDENTIFIER, Literal(entity.value), graph),
        }
        counterpart = row.get("counterpart", "").strip()
        if counterpart:
            if kind != "dcho":
                raise BibliographicError(row_no, "only dcho rows may name a counterpart")
            quads.add(Quad(entity, vocab.COUNTERPART_OF, Iri(base + "cho/" + percent_encode(counterpart)), graph))
        for column, (predicate, shape) in _BIB_COLUMNS.items():
            cell = row.get(column, "").strip()
            if not cell:
                continue
            try:
                if shape == "literal":
                    quads.add(Quad(entity, predicate, Literal(cell), graph))
                elif shape == "iri":
                    quads.add(Quad(entity, predicate, make_iri(cell), graph))
                elif shape == "date":
                    quads.add(Quad(entity, predicate, Literal(cell, datatype=vocab.XSD_DATE), graph))
                elif shape == "literal_list":
                    for part in cell.split(";"):
                        if part.strip():
                            quads.add(Quad(entity, predicate, Literal(part.strip()), graph))
                elif shape == "iri_list":
                    for part in cell.split(";"):
                        if part.strip():
                            quads.add(Quad(entity, predicate, make_iri(part.strip()), graph))
                elif shape == "agent_list":
                    for part in cell.split(";"):
                        if part.strip():
                            quads.add(Quad(entity, predicate, workflow.agent_iri(self.config.base_iri, part), graph))
            except InvalidIri as exc:
                raise BibliographicError(row_no, f"column {column!r}: {exc}") from None
        return entity, quads

    def ingest_bibliographic(self, table: Table, source: Iri) -> IngestStats:
        for column in _BIB_REQUIRED:
            if column not in table.header:
                raise MissingColumn(column)
        owned = {predicate for predicate, _ in _BIB_COLUMNS.values()}
        owned |= {vocab.RDF_TYPE, vocab.DCT_IDENTIFIER, vocab.COUNTERPART_OF}
        stats = IngestStats()
        for row_no, row in enumerate(table.row_maps(), start=1):
            entity, desired = self._bibliographic_state(row, row_no)
            stats.note(self._apply_entity_state(entity, desired, owned, source))
        return stats

    # -- process ingest --------------------------------------------------------

    def _activity_iri(self, record: PhaseRecord, occurrence: int) -> Iri:
        suffix = record.cho.value.rsplit("/", 1)[-1]
        return Iri(self.config.base_iri + f"activity/{suffix}/{record.kind.value}/{occurrence}")

    _OWNED_ACTIVITY = frozenset({
        vocab.RDF_TYPE, vocab.PHASE, vocab.CONCERNS, vocab.UNIT, vocab.AGENT, vocab.TECHNIQUE,
        vocab.TOOL, vocab.START_DATE, vocab.END_DATE, vocab.INPUT, vocab.OUTPUT,
        vocab.SCENE_ID, vocab.UPLOAD_TARGET,
    })
    _OWNED_ASSET = frozenset({
        vocab.RDF_TYPE, vocab.DERIVATIVE_OF, vocab.VERSION_KIND, vocab.FILE_FORMAT,
        vocab.SIZE_BYTES, vocab.POLYGON_COUNT, vocab.TEXTURE_WIDTH, vocab.TEXTURE_HEIGHT,
        vocab.CHECKSUM,
    })

    def register_phase(self, record: PhaseRecord, asset=None, upload=None, source: Iri | None = None, occurrence: int | None = None) -> str:
        """Register one workflow phase (plus its output asset and upload, if any).

        Enforces the rank ordering against the phases already in the
        catalog.  Without an explicit occurrence index a new activity is
        minted; ingest passes indexes so re-running a table updates the
        same activities instead of multiplying them.
        """
        workflow.check_phase_order(self.phases_for(record.cho), record)
        if occurrence is None:
            existing = sum(1 for p in self.phases_for(record.cho) if p.kind == record.kind)
            occurrence = existing + 1
        activity = self._activity_iri(record, occurrence)

        dcho = Iri(self.config.base_iri + "dcho/" + record.cho.value.rsplit("/", 1)[-1])
        if asset is not None or upload is not None:
            skeleton = {
                Quad(dcho, vocab.RDF_TYPE, vocab.DIGITAL_OBJECT, record_graph(dcho)),
                Quad(dcho, vocab.DCT_IDENTIFIER, Literal(dcho.value), record_graph(dcho)),
                Quad(dcho, vocab.COUNTERPART_OF, record.cho, record_graph(dcho)),
            }
            self.ensure_entity(dcho, skeleton, source)

        desired = workflow.phase_quads(record, activity, record_graph(activity), upload)
        outcome = self._apply_entity_state(activity, desired, self._OWNED_ACTIVITY, source)

        if asset is not None:
            asset_state = workflow.asset_quads(asset, record_graph(asset.id))
            asset_outcome = self._apply_entity_state(asset.id, asset_state, self._OWNED_ASSET, source)
            if outcome == "unchanged" and asset_outcome != "unchanged":
                outcome = asset_outcome
        return outcome

    def ingest_process(self, table: Table, source: Iri) -> IngestStats:
        rows = parse_process_table(table, self.config.base_iri)
        stats = IngestStats()
        occurrences: dict[tuple, int] = {}
        for item in rows:
            key = (item.record.cho, item.record.kind)
            occurrences[key] = occurrences.get(key, 0) + 1
            outcome = self.register_phase(
                item.record, asset=item.asset, upload=item.upload, source=source, occurrence=occurrences[key]
            )
            stats.note(outcome)
        return stats

    def ingest_table_file(self, path, kind: str) -> tuple[str, IngestStats]:
        """Copy the CSV under tables/ and ingest it; returns (table name, stats)."""
        path = Path(path)
        table = load_table(path)
        stored = self.table_path(table.name)
        stored.parent.mkdir(exist_ok=True)
        if path.resolve() != stored.resolve():
            shutil.copyfile(path, stored)
        source = Iri("file:///" + percent_encode(path.name))
        if kind == "bibliographic":
            return table.name, self.ingest_bibliographic(table, source)
        if kind == "process":
            return table.name, self.ingest_process(table, source)
        raise ValueError(f"unknown table kind {kind!r}")

    # -- mapping execution ------------------------------------------------------

    def apply_mapping(self, document: MappingDocument, tables, source: Iri) -> tuple[int, int]:
        """Insert mapping output with per-entity provenance.

        Returns (new quad count, entities that gained a snapshot).  Already
        present quads are collapsed by set semantics, so re-running a
        mapping is a no-op.
        """
        dataset = execute_mapping(document, tables)
        by_subject: dict[Iri, set[Quad]] = {}
        for quad in dataset:
            by_subject.setdefault(quad.subject, set()).add(quad)
        new_quads = 0
        entities = 0
        agent = self.config.agent_iri()
        for subject in sorted(by_subject, key=lambda s: s.value):
            novel = {q for q in by_subject[subject] if q not in self.store}
            if not novel:
                continue
            if self.tracker.has_chain(subject):
                self.tracker.record_modification(subject, Delta(inserts=novel), agent, source=source, time=self.next_time())
            else:
                self.tracker.record_creation(subject, novel, agent, source=source, time=self.next_time())
            new_quads += len(novel)
            entities += 1
        return new_quads, entities

    # -- typed views -------------------------------------------------------------

    @property
    def assets(self) -> list[AssetVersion]:
        return workflow.assets_from_store(self.store)

    def assets_for(self, dcho: Iri) -> list[AssetVersion]:
        return [a for a in self.assets if a.dcho == dcho]

    @property
    def phases(self) -> list[PhaseRecord]:
        return workflow.phases_from_store(self.store)

    def phases_for(self, cho: Iri) -> list[PhaseRecord]:
        return [p for p in self.phases if p.cho == cho]

    @property
    def uploads(self) -> list[UploadRecord]:
        return workflow.uploads_from_store(self.store, self.config.base_iri)

    def objects(self) -> list[tuple[Iri, str]]:
        """Every catalogued physical or digital object, sorted by IRI."""
        found = []
        for quad in self.store.quads():
            if quad.predicate == vocab.RDF_TYPE and quad.object in (vocab.PHYSICAL_OBJECT, vocab.DIGITAL_OBJECT):
                label = "cho" if quad.object == vocab.PHYSICAL_OBJECT else "dcho"
                found.append((quad.subject, label))
        return sorted(set(found), key=lambda pair: pair[0].value)

    def technique_for(self, cho: Iri) -> str | None:
        techniques = sorted({p.technique for p in self.phases_for(cho) if p.technique})
        return techniques[0] if techniques else None

    def technique_for_dcho(self, dcho: Iri) -> str | None:
        suffix = dcho.value.rsplit("/", 1)[-1]
        return self.technique_for(Iri(self.config.base_iri + "cho/" + suffix))

    def validate_assets(self) -> list[Violation]:
        profile = self.config.constraint_profile()
        violations = []
        for asset in self.assets:
            violations.extend(workflow.validate_asset(asset, profile, self.technique_for_dcho(asset.dcho)))
        return violations

    def storage_report(self):
        return workflow.storage_report(self.assets)

    def workflow_status(self, cho: Iri) -> dict:
        records = self.phases_for(cho)
        known = {entity for entity, _ in self.objects()}
        if not records and cho not in known:
            raise NoSuchObject(f"{cho} is not in the catalog")
        return workflow.status_vector(records)

    def export_bundle(self, dcho: Iri, out_dir):
        return workflow.export_bundle(self, dcho, out_dir)
