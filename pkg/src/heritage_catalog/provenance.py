"""Snapshot chains over catalog entities with time-travel restoration.

Every state change of an entity (the set of quads having it as subject)
is captured as a snapshot carrying generation/invalidation timestamps,
attribution, a primary source and a reversible delta.  Restoring a past
state replays inverted deltas backwards from the current state, so the
chain alone is enough to reconstruct any point of the entity's history.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone

from . import vocab
from .rdf import Iri, Literal, ParseError, Quad
from .store import Delta, PreconditionViolation, Store, parse_update, serialize_update

CREATION = "creation"
MODIFICATION = "modification"
MERGE = "merge"
DELETION = "deletion"
CHANGE_KINDS = (CREATION, MODIFICATION, MERGE, DELETION)


class NoSuchEntity(LookupError):
    def __init__(self, entity):
        self.entity = entity
        super().__init__(f"no snapshot chain for {entity}")


class AlreadyExists(ValueError):
    pass


class EntityDeleted(ValueError):
    pass


class ForeignSubject(ValueError):
    pass


class NonMonotonicTime(ValueError):
    pass


class SelfMerge(ValueError):
    pass


class CorruptProvenance(ValueError):
    pass


def utc_second(moment: datetime) -> datetime:
    """Normalize to UTC with seconds precision; naive datetimes are rejected."""
    if moment.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return moment.astimezone(timezone.utc).replace(microsecond=0)


def iso_timestamp(moment: datetime) -> str:
    return utc_second(moment).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp ('Z' or numeric offset) to UTC seconds."""
    candidate = text.strip()
    if candidate.endswith("Z"):
        candidate = candidate[:-1] + "+00:00"
    try:
        moment = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r}: {exc}") from None
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return utc_second(moment)


def snapshot_iri(entity: Iri, index: int) -> Iri:
    return Iri(f"{entity.value}/prov/se/{index}")


def prov_graph_iri(entity: Iri) -> Iri:
    return Iri(entity.value + "/prov")


@dataclass(frozen=True)
class Snapshot:
    iri: Iri
    entity: Iri
    index: int
    generated_at: datetime
    invalidated_at: datetime | None
    attributed_to: tuple[Iri, ...]
    primary_source: Iri | None
    derived_from: Iri | None
    update_query: Delta
    kind: str
    description: str


def _describe(kind: str, entity: Iri, primary_source: Iri | None) -> str:
    if kind == CREATION:
        return f"creation of {entity.value}"
    if kind == MODIFICATION:
        return f"modification of {entity.value}"
    if kind == MERGE:
        absorbed = primary_source.value if primary_source else "another entity"
        return f"merge of {absorbed} into {entity.value}"
    return f"deletion of {entity.value}"


def _check_subjects(entity: Iri, quads):
    for q in quads:
        if q.subject != entity:
            raise ForeignSubject(f"quad subject {q.subject} is not {entity}")


def _normalize_agents(agents) -> tuple[Iri, ...]:
    if isinstance(agents, Iri):
        agents = (agents,)
    agents = tuple(agents)
    if not agents:
        raise ValueError("at least one agent is required")
    return agents


class ProvenanceTracker:
    """Chains of snapshots per entity, kept in step with a data store.

    Record operations are the only mutators and must be serialized by the
    caller (single writer); reads never mutate.
    """

    def __init__(self, store: Store):
        self.store = store
        self._chains: dict[Iri, list[Snapshot]] = {}

    def entities(self) -> list[Iri]:
        return sorted(self._chains, key=lambda e: e.value)

    def has_chain(self, entity: Iri) -> bool:
        return entity in self._chains

    def chain(self, entity: Iri) -> tuple[Snapshot, ...]:
        if entity not in self._chains:
            raise NoSuchEntity(entity)
        return tuple(self._chains[entity])

    def is_live(self, entity: Iri) -> bool:
        chain = self._chains.get(entity)
        return bool(chain) and chain[-1].kind != DELETION

    def current_quads(self, entity: Iri) -> set[Quad]:
        return self.store.subject_quads(entity)

    def _require_live(self, entity: Iri) -> list[Snapshot]:
        if entity not in self._chains:
            raise NoSuchEntity(entity)
        chain = self._chains[entity]
        if chain[-1].kind == DELETION:
            raise EntityDeleted(f"{entity} was deleted at {iso_timestamp(chain[-1].generated_at)}")
        return chain

    def _check_time(self, chain: list[Snapshot], time: datetime):
        if time <= chain[-1].generated_at:
            raise NonMonotonicTime(
                f"{iso_timestamp(time)} is not after {iso_timestamp(chain[-1].generated_at)}"
            )

    def _append(self, entity, chain, delta, agents, source, time, kind) -> Snapshot:
        prev = chain[-1]
        chain[-1] = replace(prev, invalidated_at=time)
        snap = Snapshot(
            iri=snapshot_iri(entity, prev.index + 1),
            entity=entity,
            index=prev.index + 1,
            generated_at=time,
            invalidated_at=time if kind == DELETION else None,
            attributed_to=agents,
            primary_source=source,
            derived_from=prev.iri,
            update_query=delta,
            kind=kind,
            description=_describe(kind, entity, source),
        )
        chain.append(snap)
        return snap

    def record_creation(self, entity: Iri, initial, agents, source: Iri | None = None, time: datetime | None = None) -> Snapshot:
        """Start a chain: the creation snapshot carries the initial inserts."""
        if entity in self._chains:
            raise AlreadyExists(f"{entity} already has a snapshot chain")
        initial = frozenset(initial)
        _check_subjects(entity, initial)
        agents = _normalize_agents(agents)
        time = utc_second(time or datetime.now(timezone.utc))
        delta = Delta(inserts=initial)
        self.store.apply_delta(delta, strict=True)
        snap = Snapshot(
            iri=snapshot_iri(entity, 1),
            entity=entity,
            index=1,
            generated_at=time,
            invalidated_at=None,
            attributed_to=agents,
            primary_source=source,
            derived_from=None,
            update_query=delta,
            kind=CREATION,
            description=_describe(CREATION, entity, source),
        )
        self._chains[entity] = [snap]
        return snap

    def record_modification(self, entity: Iri, delta: Delta, agents, source: Iri | None = None, time: datetime | None = None) -> Snapshot:
        chain = self._require_live(entity)
        time = utc_second(time or datetime.now(timezone.utc))
        self._check_time(chain, time)
        _check_subjects(entity, delta.deletes | delta.inserts)
        current = self.current_quads(entity)
        missing = delta.deletes - current
        present = delta.inserts & current
        if missing or present:
            raise PreconditionViolation(missing, present)
        self.store.apply_delta(delta, strict=True)
        return self._append(entity, chain, delta, _normalize_agents(agents), source, time, MODIFICATION)

    def record_merge(self, survivor: Iri, absorbed: Iri, agents, source: Iri | None = None, time: datetime | None = None) -> tuple[Snapshot, Snapshot]:
        """Fold the absorbed entity into the survivor.

        The absorbed entity's quads are rewritten with the survivor as
        subject and inserted (novel ones only); the absorbed entity ends
        with a deletion snapshot.  The survivor's merge snapshot points at
        the absorbed entity through its primary source.
        """
        survivor_chain = self._require_live(survivor)
        absorbed_chain = self._require_live(absorbed)
        if survivor == absorbed:
            raise SelfMerge(f"cannot merge {survivor} into itself")
        agents = _normalize_agents(agents)
        time = utc_second(time or datetime.now(timezone.utc))
        self._check_time(survivor_chain, time)
        self._check_time(absorbed_chain, time)

        absorbed_quads = frozenset(self.current_quads(absorbed))
        rewritten = {Quad(survivor, q.predicate, q.object, q.graph) for q in absorbed_quads}
        novel = frozenset(rewritten - self.current_quads(survivor))

        merge_delta = Delta(inserts=novel)
        self.store.apply_delta(merge_delta, strict=True)
        merge_snap = self._append(survivor, survivor_chain, merge_delta, agents, absorbed, time, MERGE)

        deletion_delta = Delta(deletes=absorbed_quads)
        self.store.apply_delta(deletion_delta, strict=True)
        deletion_snap = self._append(absorbed, absorbed_chain, deletion_delta, agents, source, time, DELETION)
        return merge_snap, deletion_snap

    def record_deletion(self, entity: Iri, agents, source: Iri | None = None, time: datetime | None = None) -> Snapshot:
        chain = self._require_live(entity)
        time = utc_second(time or datetime.now(timezone.utc))
        self._check_time(chain, time)
        delta = Delta(deletes=frozenset(self.current_quads(entity)))
        self.store.apply_delta(delta, strict=True)
        return self._append(entity, chain, delta, _normalize_agents(agents), source, time, DELETION)

    def snapshot_at(self, entity: Iri, time: datetime) -> Snapshot | None:
        """Latest snapshot generated at or before the given time, if any."""
        chain = self._chains.get(entity)
        if not chain:
            return None
        time = utc_second(time)
        hit = None
        for snap in chain:
            if snap.generated_at <= time:
                hit = snap
            else:
                break
        return hit

    def restore_state(self, entity: Iri, time: datetime) -> set[Quad]:
        """Entity state as of the given time, by inverse-delta replay.

        Starts from the current quads and unwinds every snapshot after the
        one in force at that time; before creation the state is empty.
        Read-only: neither the store nor the chain changes.
        """
        if entity not in self._chains:
            raise NoSuchEntity(entity)
        chain = self._chains[entity]
        snap = self.snapshot_at(entity, time)
        k = snap.index if snap else 0
        state = set(self.current_quads(entity))
        for later in reversed(chain[k:]):
            inv = later.update_query.invert()
            state = (state - inv.deletes) | inv.inserts
        return state

    def export_prov_graph(self, entity: Iri) -> set[Quad]:
        """One named graph describing the entity's chain.

        Per snapshot: type assertion, specialization link, timestamps as
        typed literals, attributions, primary source, derivation link and
        the update query serialized as a plain literal.
        """
        if entity not in self._chains:
            raise NoSuchEntity(entity)
        graph = prov_graph_iri(entity)
        quads: set[Quad] = set()
        for snap in self._chains[entity]:
            quads.add(Quad(snap.iri, vocab.RDF_TYPE, vocab.PROV_ENTITY, graph))
            quads.add(Quad(snap.iri, vocab.SPECIALIZATION_OF, entity, graph))
            quads.add(Quad(snap.iri, vocab.GENERATED_AT, Literal(iso_timestamp(snap.generated_at), datatype=vocab.XSD_DATETIME), graph))
            if snap.invalidated_at is not None:
                quads.add(Quad(snap.iri, vocab.INVALIDATED_AT, Literal(iso_timestamp(snap.invalidated_at), datatype=vocab.XSD_DATETIME), graph))
            for agent in snap.attributed_to:
                quads.add(Quad(snap.iri, vocab.ATTRIBUTED_TO, agent, graph))
            if snap.primary_source is not None:
                quads.add(Quad(snap.iri, vocab.PRIMARY_SOURCE, snap.primary_source, graph))
            if snap.derived_from is not None:
                quads.add(Quad(snap.iri, vocab.DERIVED_FROM, snap.derived_from, graph))
            quads.add(Quad(snap.iri, vocab.HAS_UPDATE_QUERY, Literal(serialize_update(snap.update_query)), graph))
        return quads

    def export_all_graphs(self) -> set[Quad]:
        """Persistence payload: every entity's graph plus change-kind markers.

        The extra marker quad keeps merge snapshots distinguishable from
        plain modifications after a reload.
        """
        quads: set[Quad] = set()
        for entity in self.entities():
            quads |= self.export_prov_graph(entity)
            graph = prov_graph_iri(entity)
            for snap in self._chains[entity]:
                quads.add(Quad(snap.iri, vocab.CHANGE_KIND, Literal(snap.kind), graph))
        return quads

    @classmethod
    def from_quads(cls, store: Store, prov_quads) -> "ProvenanceTracker":
        """Rebuild chains from a persisted provenance graph set."""
        tracker = cls(store)
        by_graph: dict[Iri, set[Quad]] = {}
        for q in prov_quads:
            if q.graph is not None and q.graph.value.endswith("/prov"):
                by_graph.setdefault(q.graph, set()).add(q)
        for graph in sorted(by_graph, key=lambda g: g.value):
            entity = Iri(graph.value[: -len("/prov")])
            tracker._chains[entity] = _parse_chain(entity, by_graph[graph])
        return tracker


def _literal_value(quads, subject, predicate):
    values = [q.object.lexical for q in quads if q.subject == subject and q.predicate == predicate and isinstance(q.object, Literal)]
    return values[0] if values else None


def _iri_values(quads, subject, predicate):
    return sorted(
        (q.object for q in quads if q.subject == subject and q.predicate == predicate and isinstance(q.object, Iri)),
        key=lambda i: i.value,
    )


def _parse_chain(entity: Iri, quads: set[Quad]) -> list:
    marker = f"{entity.value}/prov/se/"
    subjects = {q.subject for q in quads if q.predicate == vocab.RDF_TYPE and q.object == vocab.PROV_ENTITY}
    snapshots = []
    for subject in subjects:
        if not isinstance(subject, Iri) or not subject.value.startswith(marker):
            raise CorruptProvenance(f"unexpected snapshot identifier {subject}")
        try:
            index = int(subject.value[len(marker):])
        except ValueError:
            raise CorruptProvenance(f"non-numeric snapshot index in {subject}") from None
        generated = _literal_value(quads, subject, vocab.GENERATED_AT)
        if generated is None:
            raise CorruptProvenance(f"{subject} has no generation timestamp")
        invalidated = _literal_value(quads, subject, vocab.INVALIDATED_AT)
        update_text = _literal_value(quads, subject, vocab.HAS_UPDATE_QUERY)
        if update_text is None:
            raise CorruptProvenance(f"{subject} has no update query")
        agents = tuple(_iri_values(quads, subject, vocab.ATTRIBUTED_TO))
        if not agents:
            raise CorruptProvenance(f"{subject} has no attribution")
        sources = _iri_values(quads, subject, vocab.PRIMARY_SOURCE)
        derived = _iri_values(quads, subject, vocab.DERIVED_FROM)
        generated_at = parse_timestamp(generated)
        invalidated_at = parse_timestamp(invalidated) if invalidated else None
        kind = _literal_value(quads, subject, vocab.CHANGE_KIND)
        if kind not in CHANGE_KINDS:
            if index == 1:
                kind = CREATION
            elif invalidated_at is not None and invalidated_at == generated_at:
                kind = DELETION
            else:
                kind = MODIFICATION
        source = sources[0] if sources else None
        snapshots.append(
            Snapshot(
                iri=subject,
                entity=entity,
                index=index,
                generated_at=generated_at,
                invalidated_at=invalidated_at,
                attributed_to=agents,
                primary_source=source,
                derived_from=derived[0] if derived else None,
                update_query=parse_update(update_text),
                kind=kind,
                description=_describe(kind, entity, source),
            )
        )
    snapshots.sort(key=lambda s: s.index)
    if [s.index for s in snapshots] != list(range(1, len(snapshots) + 1)):
        raise CorruptProvenance(f"snapshot indexes for {entity} are not contiguous")
    for earlier, later in zip(snapshots, snapshots[1:]):
        if later.generated_at <= earlier.generated_at:
            raise CorruptProvenance(f"timestamps for {entity} are not strictly increasing")
        if later.derived_from != earlier.iri:
            raise CorruptProvenance(f"{later.iri} is not derived from {earlier.iri}")
        if later.kind == CREATION:
            raise CorruptProvenance(f"{later.iri} claims to be a creation snapshot")
    for snap in snapshots[:-1]:
        if snap.kind == DELETION:
            raise CorruptProvenance(f"{entity} has a deletion snapshot before the end of the chain")
    return snapshots
