"""Span-pair classification instances from standoff-annotated documents.

Argument role labeling (ARL) pairs every event trigger with its gold
argument mentions as positives and with the remaining same-sentence entities
as negatives. Relation extraction (RE) keeps gold relation mentions as
positives and samples negatives from the same-sentence entity pairs that are
not related. Splitting shuffles documents (never sentences) into
train/dev/test.

Negative sampling for RE is fully specified so it can be replayed: per
sentence, candidates are the unordered entity-id pairs (id-sorted, gold and
self pairs excluded, identical spans excluded) sorted lexicographically, and
``random.Random(derive_seed(seed, "re", doc_id, sentence_index)).sample``
draws the quota. The quota is round(ratio * sentence_positives); sentences
without positives fall back to round(ratio * p_bar), where p_bar is the
document's gold-relation count divided by its number of pairable sentences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigurationError, InputDataError
from .seeding import derive_rng

NEGATIVE = "NEGATIVE"


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise InputDataError(f"bad span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Entity:
    id: str
    span: Span
    type: str


@dataclass(frozen=True)
class Trigger:
    id: str
    span: Span
    event_type: str


@dataclass(frozen=True)
class Argument:
    trigger_id: str
    entity_id: str
    role: str


@dataclass(frozen=True)
class Relation:
    id: str
    arg1: str
    arg2: str
    type: str


@dataclass
class AnnotatedDoc:
    doc_id: str
    text: str
    sentences: list[Span]
    entities: list[Entity] = field(default_factory=list)
    triggers: list[Trigger] = field(default_factory=list)
    arguments: list[Argument] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)

    def validate(self) -> None:
        entity_ids = {e.id for e in self.entities}
        trigger_ids = {t.id for t in self.triggers}
        if len(entity_ids) != len(self.entities):
            raise InputDataError(f"{self.doc_id}: duplicate entity ids")
        if len(trigger_ids) != len(self.triggers):
            raise InputDataError(f"{self.doc_id}: duplicate trigger ids")
        for ent in self.entities:
            self.sentence_index(ent.span)
        for trig in self.triggers:
            self.sentence_index(trig.span)
        for arg in self.arguments:
            if arg.trigger_id not in trigger_ids:
                raise InputDataError(f"{self.doc_id}: unknown trigger {arg.trigger_id}")
            if arg.entity_id not in entity_ids:
                raise InputDataError(f"{self.doc_id}: unknown entity {arg.entity_id}")
            t = self._trigger(arg.trigger_id)
            e = self._entity(arg.entity_id)
            if self.sentence_index(t.span) != self.sentence_index(e.span):
                raise InputDataError(
                    f"{self.doc_id}: argument {arg.trigger_id}/{arg.entity_id} crosses sentences"
                )
        for rel in self.relations:
            if rel.arg1 not in entity_ids or rel.arg2 not in entity_ids:
                raise InputDataError(f"{self.doc_id}: relation {rel.id} has unknown entities")
            a = self._entity(rel.arg1)
            b = self._entity(rel.arg2)
            if self.sentence_index(a.span) != self.sentence_index(b.span):
                raise InputDataError(f"{self.doc_id}: relation {rel.id} crosses sentences")

    def _entity(self, eid: str) -> Entity:
        for ent in self.entities:
            if ent.id == eid:
                return ent
        raise InputDataError(f"{self.doc_id}: unknown entity {eid}")

    def _trigger(self, tid: str) -> Trigger:
        for trig in self.triggers:
            if trig.id == tid:
                return trig
        raise InputDataError(f"{self.doc_id}: unknown trigger {tid}")

    def sentence_index(self, span: Span) -> int:
        for i, sent in enumerate(self.sentences):
            if sent.start <= span.start and span.end <= sent.end:
                return i
        raise InputDataError(
            f"{self.doc_id}: span [{span.start}, {span.end}) is not inside any sentence"
        )

    def sentence_text(self, index: int) -> str:
        sent = self.sentences[index]
        return self.text[sent.start : sent.end]


@dataclass
class IEInstance:
    """One span-pair classification record; spans are sentence-relative."""

    task: str  # "ARL" | "RE"
    doc_id: str
    sentence: str
    span_a: Span
    span_b: Span
    label: str

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "doc_id": self.doc_id,
            "sentence": self.sentence,
            "span_a": [self.span_a.start, self.span_a.end],
            "span_b": [self.span_b.start, self.span_b.end],
            "label": self.label,
        }

    def key(self) -> tuple:
        return (
            self.task, self.doc_id,
            self.span_a.start, self.span_a.end,
            self.span_b.start, self.span_b.end,
            self.label,
        )


def _relative(span: Span, sentence: Span) -> Span:
    return Span(span.start - sentence.start, span.end - sentence.start)


def build_arl(doc: AnnotatedDoc) -> list[IEInstance]:
    """Trigger-entity instances: gold roles positive, co-sentence rest negative."""
    doc.validate()
    entity_by_id = {e.id: e for e in doc.entities}
    sent_entities: dict[int, list[Entity]] = {}
    for ent in sorted(doc.entities, key=lambda e: (e.span.start, e.span.end, e.id)):
        sent_entities.setdefault(doc.sentence_index(ent.span), []).append(ent)

    instances: list[IEInstance] = []
    for trig in sorted(doc.triggers, key=lambda t: (t.span.start, t.span.end, t.id)):
        s_idx = doc.sentence_index(trig.span)
        sentence = doc.sentences[s_idx]
        text = doc.sentence_text(s_idx)
        gold = [a for a in doc.arguments if a.trigger_id == trig.id]
        gold_entities = {a.entity_id for a in gold}
        for arg in gold:
            ent = entity_by_id[arg.entity_id]
            if ent.span == trig.span:
                continue
            instances.append(
                IEInstance(
                    "ARL", doc.doc_id, text,
                    _relative(trig.span, sentence), _relative(ent.span, sentence),
                    arg.role,
                )
            )
        for ent in sent_entities.get(s_idx, []):
            if ent.id in gold_entities or ent.span == trig.span:
                continue
            instances.append(
                IEInstance(
                    "ARL", doc.doc_id, text,
                    _relative(trig.span, sentence), _relative(ent.span, sentence),
                    NEGATIVE,
                )
            )
    return instances


def re_candidates(doc: AnnotatedDoc, sentence_index: int) -> list[tuple[str, str]]:
    """Unordered same-sentence entity-id pairs that are not gold relations."""
    ents = sorted(
        (e for e in doc.entities if doc.sentence_index(e.span) == sentence_index),
        key=lambda e: e.id,
    )
    gold = {frozenset((r.arg1, r.arg2)) for r in doc.relations}
    by_id = {e.id: e for e in ents}
    pairs = []
    for i in range(len(ents)):
        for j in range(i + 1, len(ents)):
            a, b = ents[i].id, ents[j].id
            if frozenset((a, b)) in gold:
                continue
            if by_id[a].span == by_id[b].span:
                continue
            pairs.append((a, b))
    pairs.sort()
    return pairs


def build_re(doc: AnnotatedDoc, negative_ratio: float, seed: int) -> list[IEInstance]:
    """Relation instances: gold positives plus sampled unrelated pairs."""
    if negative_ratio < 0:
        raise ConfigurationError(f"negative_ratio must be >= 0, got {negative_ratio}")
    doc.validate()
    entity_by_id = {e.id: e for e in doc.entities}

    positives_per_sentence: dict[int, int] = {}
    instances: list[IEInstance] = []
    for rel in doc.relations:
        a = entity_by_id[rel.arg1]
        b = entity_by_id[rel.arg2]
        if a.span == b.span:
            continue
        s_idx = doc.sentence_index(a.span)
        positives_per_sentence[s_idx] = positives_per_sentence.get(s_idx, 0) + 1
        sentence = doc.sentences[s_idx]
        instances.append(
            IEInstance(
                "RE", doc.doc_id, doc.sentence_text(s_idx),
                _relative(a.span, sentence), _relative(b.span, sentence),
                rel.type,
            )
        )

    sent_entity_count: dict[int, int] = {}
    for ent in doc.entities:
        s_idx = doc.sentence_index(ent.span)
        sent_entity_count[s_idx] = sent_entity_count.get(s_idx, 0) + 1
    pairable = [s for s, n in sent_entity_count.items() if n >= 2]
    p_bar = (len(doc.relations) / len(pairable)) if pairable else 0.0

    for s_idx in sorted(pairable):
        candidates = re_candidates(doc, s_idx)
        if not candidates:
            continue
        pos = positives_per_sentence.get(s_idx, 0)
        quota = round(negative_ratio * pos) if pos > 0 else round(negative_ratio * p_bar)
        quota = min(quota, len(candidates))
        if quota <= 0:
            continue
        rng = derive_rng(seed, "re", doc.doc_id, s_idx)
        sample = rng.sample(candidates, quota)
        sentence = doc.sentences[s_idx]
        text = doc.sentence_text(s_idx)
        for a_id, b_id in sample:
            a = entity_by_id[a_id]
            b = entity_by_id[b_id]
            instances.append(
                IEInstance(
                    "RE", doc.doc_id, text,
                    _relative(a.span, sentence), _relative(b.span, sentence),
                    NEGATIVE,
                )
            )
    return instances


def split(
    doc_ids: Iterable[str],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[list[str], list[str], list[str]]:
    """Shuffle document ids and cut at floor(f1*n) / floor((f1+f2)*n)."""
    ids = list(doc_ids)
    if len(set(ids)) != len(ids):
        raise InputDataError("duplicate document ids")
    if len(ids) < 3:
        raise ConfigurationError(f"need at least 3 documents to split, got {len(ids)}")
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise ConfigurationError(f"fractions {fractions} do not sum to 1")
    rng = derive_rng(seed, "split")
    shuffled = list(ids)
    rng.shuffle(shuffled)
    n = len(shuffled)
    cut1 = math.floor(fractions[0] * n)
    cut2 = math.floor((fractions[0] + fractions[1]) * n)
    return shuffled[:cut1], shuffled[cut1:cut2], shuffled[cut2:]


def _span_from_json(pair: list) -> Span:
    return Span(int(pair[0]), int(pair[1]))


def doc_from_json(rec: dict) -> AnnotatedDoc:
    try:
        doc = AnnotatedDoc(
            doc_id=str(rec["doc_id"]),
            text=rec["text"],
            sentences=[_span_from_json(s) for s in rec["sentences"]],
            entities=[
                Entity(str(e["id"]), Span(int(e["start"]), int(e["end"])), str(e["type"]))
                for e in rec.get("entities", [])
            ],
            triggers=[
                Trigger(str(t["id"]), Span(int(t["start"]), int(t["end"])), str(t["event_type"]))
                for t in rec.get("triggers", [])
            ],
            arguments=[
                Argument(str(a["trigger_id"]), str(a["entity_id"]), str(a["role"]))
                for a in rec.get("arguments", [])
            ],
            relations=[
                Relation(str(r["id"]), str(r["arg1"]), str(r["arg2"]), str(r["type"]))
                for r in rec.get("relations", [])
            ],
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise InputDataError(f"bad annotated document record: {exc}") from exc
    doc.validate()
    return doc


def doc_to_json(doc: AnnotatedDoc) -> dict:
    return {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "sentences": [[s.start, s.end] for s in doc.sentences],
        "entities": [
            {"id": e.id, "start": e.span.start, "end": e.span.end, "type": e.type}
            for e in doc.entities
        ],
        "triggers": [
            {"id": t.id, "start": t.span.start, "end": t.span.end, "event_type": t.event_type}
            for t in doc.triggers
        ],
        "arguments": [
            {"trigger_id": a.trigger_id, "entity_id": a.entity_id, "role": a.role}
            for a in doc.arguments
        ],
        "relations": [
            {"id": r.id, "arg1": r.arg1, "arg2": r.arg2, "type": r.type}
            for r in doc.relations
        ],
    }


def read_docs(path: str | Path) -> Iterator[AnnotatedDoc]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield doc_from_json(json.loads(line))


def write_instances(instances: Iterable[IEInstance], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n
