import json
import random

import pytest

from biprep.errors import ConfigurationError, InputDataError
from biprep.ieinstances import (
    NEGATIVE,
    AnnotatedDoc,
    Argument,
    Entity,
    IEInstance,
    Relation,
    Span,
    Trigger,
    build_arl,
    build_re,
    doc_from_json,
    doc_to_json,
    re_candidates,
    split,
)
from biprep.seeding import derive_rng

W = 40  # fixed sentence width in synthetic documents


def make_doc(doc_id="D", n_sents=2, entities=(), triggers=(), arguments=(), relations=()):
    """Entities/triggers given as (id, sentence, rel_start, rel_end, tag)."""
    text = "".join(f"sent {i:02d} " + "x" * (W - 9) + " " for i in range(n_sents))
    sentences = [Span(i * (W + 1), i * (W + 1) + W) for i in range(n_sents)]

    def abs_span(sent, start, end):
        return Span(sentences[sent].start + start, sentences[sent].start + end)

    return AnnotatedDoc(
        doc_id=doc_id,
        text=text,
        sentences=sentences,
        entities=[Entity(i, abs_span(s, a, b), t) for i, s, a, b, t in entities],
        triggers=[Trigger(i, abs_span(s, a, b), t) for i, s, a, b, t in triggers],
        arguments=[Argument(t, e, r) for t, e, r in arguments],
        relations=[Relation(i, a, b, t) for i, a, b, t in relations],
    )


# ---------------------------------------------------------------- oracles


def arl_oracle(doc):
    keys = []
    for trig in doc.triggers:
        s = doc.sentence_index(trig.span)
        sent = doc.sentences[s]
        text = doc.sentence_text(s)
        gold = [(a.entity_id, a.role) for a in doc.arguments if a.trigger_id == trig.id]
        gold_ids = {eid for eid, _ in gold}
        by_id = {e.id: e for e in doc.entities}
        for eid, role in gold:
            ent = by_id[eid]
            if ent.span == trig.span:
                continue
            keys.append(
                ("ARL", doc.doc_id,
                 trig.span.start - sent.start, trig.span.end - sent.start,
                 ent.span.start - sent.start, ent.span.end - sent.start, role)
            )
        for ent in doc.entities:
            if doc.sentence_index(ent.span) != s or ent.id in gold_ids or ent.span == trig.span:
                continue
            keys.append(
                ("ARL", doc.doc_id,
                 trig.span.start - sent.start, trig.span.end - sent.start,
                 ent.span.start - sent.start, ent.span.end - sent.start, NEGATIVE)
            )
    return sorted(keys)


def re_oracle(doc, negative_ratio, seed):
    """Independent replay of the documented RE construction contract."""
    by_id = {e.id: e for e in doc.entities}
    keys = []
    pos_per_sent = {}
    for rel in doc.relations:
        a, b = by_id[rel.arg1], by_id[rel.arg2]
        if a.span == b.span:
            continue
        s = doc.sentence_index(a.span)
        pos_per_sent[s] = pos_per_sent.get(s, 0) + 1
        sent = doc.sentences[s]
        keys.append(("RE", doc.doc_id, a.span.start - sent.start, a.span.end - sent.start,
                     b.span.start - sent.start, b.span.end - sent.start, rel.type))

    gold_pairs = {frozenset((r.arg1, r.arg2)) for r in doc.relations}
    sent_ents = {}
    for ent in doc.entities:
        sent_ents.setdefault(doc.sentence_index(ent.span), []).append(ent)
    pairable = sorted(s for s, ents in sent_ents.items() if len(ents) >= 2)
    p_bar = (len(doc.relations) / len(pairable)) if pairable else 0.0

    for s in pairable:
        ents = sorted(sent_ents[s], key=lambda e: e.id)
        candidates = []
        for i in range(len(ents)):
            for j in range(i + 1, len(ents)):
                if frozenset((ents[i].id, ents[j].id)) in gold_pairs:
                    continue
                if ents[i].span == ents[j].span:
                    continue
                candidates.append((ents[i].id, ents[j].id))
        candidates.sort()
        if not candidates:
            continue
        pos = pos_per_sent.get(s, 0)
        quota = round(negative_ratio * pos) if pos > 0 else round(negative_ratio * p_bar)
        quota = min(quota, len(candidates))
        if quota <= 0:
            continue
        rng = derive_rng(seed, "re", doc.doc_id, s)
        sent = doc.sentences[s]
        for a_id, b_id in rng.sample(candidates, quota):
            a, b = by_id[a_id], by_id[b_id]
            keys.append(("RE", doc.doc_id, a.span.start - sent.start, a.span.end - sent.start,
                         b.span.start - sent.start, b.span.end - sent.start, NEGATIVE))
    return sorted(keys)


def random_doc(rng, doc_id):
    n_sents = rng.randint(1, 4)
    entities, triggers, arguments, relations = [], [], [], []
    for s in range(n_sents):
        offsets = rng.sample(range(0, W - 4, 4), k=rng.randint(0, 5))
        for k, off in enumerate(sorted(offsets)):
            entities.append((f"E{s}_{k}", s, off, off + 3, rng.choice(["PER", "ORG", "LOC"])))
        n_triggers = rng.randint(0, 2)
        trig_offsets = rng.sample(range(1, W - 4, 4), k=n_triggers)
        for k, off in enumerate(trig_offsets):
            triggers.append((f"T{s}_{k}", s, off, off + 2, rng.choice(["Attack", "Move"])))
    ents_by_sent = {}
    for eid, s, *_ in entities:
        ents_by_sent.setdefault(s, []).append(eid)
    for tid, s, *_ in triggers:
        for eid in ents_by_sent.get(s, []):
            if rng.random() < 0.4:
                arguments.append((tid, eid, rng.choice(["Victim", "Place", "Agent"])))
    rel_idx = 0
    for s, eids in ents_by_sent.items():
        if len(eids) >= 2 and rng.random() < 0.7:
            a, b = rng.sample(eids, 2)
            relations.append((f"R{rel_idx}", a, b, rng.choice(["PHYS", "ORG-AFF"])))
            rel_idx += 1
    return make_doc(doc_id, n_sents, entities, triggers, arguments, relations)


# ---------------------------------------------------------------- ARL


class TestBuildArl:
    def test_spec_fixture(self):
        doc = make_doc(
            entities=[("A1", 0, 0, 3, "PER"), ("A2", 0, 4, 7, "LOC"), ("E3", 0, 8, 11, "ORG")],
            triggers=[("T", 0, 12, 14, "Attack")],
            arguments=[("T", "A1", "Victim"), ("T", "A2", "Place")],
        )
        instances = build_arl(doc)
        labels = sorted(i.label for i in instances)
        assert labels == [NEGATIVE, "Place", "Victim"]
        negative = [i for i in instances if i.label == NEGATIVE][0]
        assert negative.span_b == Span(8, 11)

    def test_trigger_without_entities(self):
        doc = make_doc(triggers=[("T", 0, 0, 2, "Attack")])
        assert build_arl(doc) == []

    def test_argument_of_other_trigger_is_negative(self):
        doc = make_doc(
            entities=[("A1", 0, 0, 3, "PER")],
            triggers=[("T1", 0, 8, 10, "Attack"), ("T2", 0, 12, 14, "Move")],
            arguments=[("T1", "A1", "Victim")],
        )
        instances = build_arl(doc)
        t2 = [i for i in instances if i.span_a == Span(12, 14)]
        assert len(t2) == 1
        assert t2[0].label == NEGATIVE

    def test_entities_in_other_sentences_ignored(self):
        doc = make_doc(
            n_sents=2,
            entities=[("A1", 1, 0, 3, "PER")],
            triggers=[("T", 0, 0, 2, "Attack")],
        )
        assert build_arl(doc) == []

    def test_matches_oracle_on_random_docs(self):
        rng = random.Random(40)
        for d in range(25):
            doc = random_doc(rng, f"doc{d}")
            got = sorted(i.key() for i in build_arl(doc))
            assert got == arl_oracle(doc)


# ---------------------------------------------------------------- RE


class TestBuildRe:
    def _doc_abc(self):
        return make_doc(
            entities=[("A", 0, 0, 3, "PER"), ("B", 0, 4, 7, "PER"), ("C", 0, 8, 11, "ORG")],
            relations=[("R1", "A", "B", "PHYS")],
        )

    def test_candidates_exclude_gold(self):
        doc = self._doc_abc()
        assert re_candidates(doc, 0) == [("A", "C"), ("B", "C")]

    def test_single_entity_no_pairs(self):
        doc = make_doc(entities=[("A", 0, 0, 3, "PER")])
        assert re_candidates(doc, 0) == []
        assert build_re(doc, 1.0, seed=1) == []

    def test_ratio_zero_positives_only(self):
        doc = self._doc_abc()
        instances = build_re(doc, 0.0, seed=1)
        assert len(instances) == 1
        assert instances[0].label == "PHYS"

    def test_gold_direction_preserved(self):
        doc = make_doc(
            entities=[("A", 0, 4, 7, "PER"), ("B", 0, 0, 3, "PER")],
            relations=[("R1", "A", "B", "PHYS")],
        )
        inst = build_re(doc, 0.0, seed=1)[0]
        assert inst.span_a == Span(4, 7)  # arg1 first even though B precedes A
        assert inst.span_b == Span(0, 3)

    def test_negatives_respect_ratio(self):
        doc = self._doc_abc()
        instances = build_re(doc, 2.0, seed=3)
        negatives = [i for i in instances if i.label == NEGATIVE]
        assert len(negatives) == 2  # min(available=2, round(2.0 * 1))

    def test_deterministic(self):
        doc = self._doc_abc()
        a = [i.to_json() for i in build_re(doc, 1.0, seed=5)]
        b = [i.to_json() for i in build_re(doc, 1.0, seed=5)]
        assert a == b

    def test_matches_oracle_on_random_docs(self):
        rng = random.Random(41)
        for d in range(25):
            doc = random_doc(rng, f"doc{d}")
            got = sorted(i.key() for i in build_re(doc, 1.5, seed=99))
            assert got == re_oracle(doc, 1.5, seed=99)

    def test_negative_ratio_validation(self):
        with pytest.raises(ConfigurationError):
            build_re(self._doc_abc(), -1.0, seed=1)


# ---------------------------------------------------------------- split


class TestSplit:
    def test_ten_docs_eight_one_one(self):
        train, dev, test = split([f"d{i}" for i in range(10)], seed=3)
        assert (len(train), len(dev), len(test)) == (8, 1, 1)

    def test_same_seed_same_partition(self):
        ids = [f"d{i}" for i in range(17)]
        assert split(ids, seed=4) == split(ids, seed=4)

    def test_partition_property(self):
        ids = [f"d{i}" for i in range(23)]
        train, dev, test = split(ids, seed=5)
        combined = train + dev + test
        assert sorted(combined) == sorted(ids)
        assert len(set(combined)) == len(ids)

    def test_cut_points_floor(self):
        ids = [f"d{i}" for i in range(7)]
        train, dev, test = split(ids, seed=6)
        assert (len(train), len(dev), len(test)) == (5, 1, 1)  # floor(5.6), floor(6.3)

    def test_bad_fractions(self):
        with pytest.raises(ConfigurationError):
            split(["a", "b", "c"], fractions=(0.5, 0.2, 0.2), seed=1)

    def test_too_few_docs(self):
        with pytest.raises(ConfigurationError):
            split(["a", "b"], seed=1)


# ---------------------------------------------------------------- IO / validation


class TestDocJson:
    def test_round_trip(self):
        rng = random.Random(42)
        doc = random_doc(rng, "docX")
        rec = doc_to_json(doc)
        back = doc_from_json(json.loads(json.dumps(rec)))
        assert doc_to_json(back) == rec

    def test_unknown_entity_rejected(self):
        doc = make_doc(
            entities=[("A", 0, 0, 3, "PER")],
            triggers=[("T", 0, 4, 6, "Attack")],
            arguments=[("T", "NOPE", "Victim")],
        )
        with pytest.raises(InputDataError):
            doc.validate()

    def test_cross_sentence_relation_rejected(self):
        doc = make_doc(
            n_sents=2,
            entities=[("A", 0, 0, 3, "PER"), ("B", 1, 0, 3, "PER")],
            relations=[("R", "A", "B", "PHYS")],
        )
        with pytest.raises(InputDataError):
            doc.validate()

    def test_span_outside_sentences_rejected(self):
        doc = make_doc(entities=[("A", 0, W - 2, W + 2, "PER")])
        with pytest.raises(InputDataError):
            doc.validate()


def test_instance_spans_never_cross_sentences():
    rng = random.Random(43)
    for d in range(10):
        doc = random_doc(rng, f"doc{d}")
        for inst in build_arl(doc) + build_re(doc, 1.0, seed=1):
            sent_len = len(inst.sentence)
            for span in (inst.span_a, inst.span_b):
                assert 0 <= span.start < span.end <= sent_len
