"""Masked-LM example generation: sentence-pair packing, masking, binary IO.

Packing pairs each sentence with its true continuation half the time and a
random sentence from another document otherwise (next-sentence prediction).
Masking selects whole words or individual pieces up to the per-sequence
prediction cap (20 at length 128, 80 at length 512), applying the standard
80/10/10 mask/random/keep mix. All randomness is derived per (seed, doc_id,
pair index), so shard layout and worker count never change the output.

File format ``MLMX``: header {magic "MLMX", version u16, max_len u16, cap
u16}; then per record a u32 byte length followed by input_ids, input_mask,
segment_ids (max_len u32 each), u32 n_masked, n_masked u32 positions,
n_masked u32 label ids, and a u8 is_next flag. Integers are little-endian.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import BinaryIO, Iterable

from .corpus import Sentence
from .errors import ConfigurationError, InputDataError
from .seeding import derive_rng
from .vocab import SubwordVocab, segment

MAGIC = b"MLMX"
VERSION = 1

_CAPS = {128: 20, 512: 80}


def predictions_cap(max_len: int) -> int:
    """Masked-prediction cap per sequence length (20 @ 128, 80 @ 512)."""
    if max_len in _CAPS:
        return _CAPS[max_len]
    return max(1, round(0.15 * max_len))


@dataclass(frozen=True)
class MaskingPolicy:
    scheme: str  # "whole_word" | "subword"
    mask_rate: float = 0.15
    mask_prob: float = 0.8
    random_prob: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in ("whole_word", "subword"):
            raise ConfigurationError(f"unknown masking scheme {self.scheme!r}")
        if not 0.0 < self.mask_rate < 1.0:
            raise ConfigurationError(f"mask_rate {self.mask_rate} not in (0, 1)")
        if self.mask_prob < 0 or self.random_prob < 0 or self.mask_prob + self.random_prob > 1.0:
            raise ConfigurationError("action mix must be non-negative and sum to at most 1")


@dataclass
class PackedPair:
    """Two piece sequences with per-piece word indices and the NSP label."""

    pieces_a: list[str]
    word_ids_a: list[int]
    pieces_b: list[str]
    word_ids_b: list[int]
    is_next: bool
    doc_id: str
    pair_index: int


@dataclass
class MaskedExample:
    input_ids: list[int]
    input_mask: list[int]
    segment_ids: list[int]
    masked_positions: list[int]
    masked_label_ids: list[int]
    is_next: bool


def _sentence_words(sent: Sentence, vocab: SubwordVocab) -> list[list[str]]:
    return [segment(token, vocab).pieces for token in sent.tokens]


def _flatten(words: list[list[str]]) -> tuple[list[str], list[int]]:
    pieces: list[str] = []
    word_ids: list[int] = []
    for w, word in enumerate(words):
        pieces.extend(word)
        word_ids.extend([w] * len(word))
    return pieces, word_ids


def pack(
    sentences: Iterable[Sentence],
    vocab: SubwordVocab,
    max_len: int,
    seed: int,
    nsp: bool = True,
) -> list[PackedPair]:
    """Build sentence pairs for masking.

    Consecutive sentences of one document form candidate pairs; with NSP on,
    half of them (seeded per pair) swap the continuation for a random
    sentence of a different document. Combined pieces are truncated to
    max_len - 3 by trimming the end of the longer segment. Single-sentence
    documents yield no pairs but still serve as random-segment donors.
    """
    if max_len < 8:
        raise ConfigurationError(f"max_len {max_len} is too small")
    docs: list[tuple[str, list[list[list[str]]]]] = []
    for doc_id, group in groupby(sentences, key=lambda s: s.doc_id):
        docs.append((doc_id, [_sentence_words(s, vocab) for s in group]))

    # Donor pool: sentences of every doc, contiguous per doc, so "a random
    # sentence from another document" is one bounded draw.
    doc_start: list[int] = []
    pool: list[list[list[str]]] = []
    for _doc_id, sents in docs:
        doc_start.append(len(pool))
        pool.extend(sents)
    total = len(pool)

    budget = max_len - 3
    pairs: list[PackedPair] = []
    for d, (doc_id, sents) in enumerate(docs):
        others = total - len(sents)
        for i in range(len(sents) - 1):
            rng = derive_rng(seed, "pack", doc_id, i)
            is_next = True
            b_words = sents[i + 1]
            if nsp and others > 0:
                is_next = rng.random() < 0.5
                if not is_next:
                    r = rng.randrange(others)
                    donor = r if r < doc_start[d] else r + len(sents)
                    b_words = pool[donor]

            pieces_a, word_ids_a = _flatten(sents[i])
            pieces_b, word_ids_b = _flatten(b_words)
            while len(pieces_a) + len(pieces_b) > budget:
                if len(pieces_a) > len(pieces_b):
                    pieces_a.pop()
                    word_ids_a.pop()
                else:
                    pieces_b.pop()
                    word_ids_b.pop()
            if not pieces_a or not pieces_b:
                continue
            pairs.append(
                PackedPair(pieces_a, word_ids_a, pieces_b, word_ids_b, is_next, doc_id, i)
            )
    return pairs


def mask(
    pair: PackedPair,
    vocab: SubwordVocab,
    policy: MaskingPolicy,
    max_len: int,
) -> MaskedExample:
    """Mask one packed pair into a training example.

    Candidate units are words (``whole_word``) or single pieces
    (``subword``); units are consumed in seeded shuffle order until
    min(cap, round(mask_rate * sequence_length)) pieces are masked, skipping
    any word that would overshoot. All pieces of a selected word are masked
    together. Labels store the pre-masking ids.
    """
    n_a, n_b = len(pair.pieces_a), len(pair.pieces_b)
    if n_a + n_b > max_len - 3:
        raise ConfigurationError(
            f"pair of {n_a}+{n_b} pieces does not fit max_len {max_len}"
        )
    pieces = ["[CLS]"] + pair.pieces_a + ["[SEP]"] + pair.pieces_b + ["[SEP]"]
    segment_ids = [0] * (n_a + 2) + [1] * (n_b + 1)
    n_real = len(pieces)

    units: list[list[int]] = []
    if policy.scheme == "whole_word":
        for offset, word_ids in ((1, pair.word_ids_a), (n_a + 2, pair.word_ids_b)):
            current_word = None
            for k, w in enumerate(word_ids):
                if w != current_word:
                    units.append([offset + k])
                    current_word = w
                else:
                    units[-1].append(offset + k)
    else:
        units = [[1 + k] for k in range(n_a)]
        units += [[n_a + 2 + k] for k in range(n_b)]

    cap = predictions_cap(max_len)
    target = min(cap, round(policy.mask_rate * n_real))

    rng = derive_rng(policy.seed, "mask", pair.doc_id, pair.pair_index)
    order = list(range(len(units)))
    rng.shuffle(order)

    input_ids = [vocab.id_of(p) for p in pieces]
    original_ids = list(input_ids)
    mask_id = vocab.id_of("[MASK]")
    real_ids = vocab.real_piece_ids()

    chosen: list[int] = []
    total = 0
    for u in order:
        if total >= target:
            break
        unit = units[u]
        if total + len(unit) > target:
            continue
        for pos in unit:
            r = rng.random()
            if r < policy.mask_prob:
                input_ids[pos] = mask_id
            elif r < policy.mask_prob + policy.random_prob:
                input_ids[pos] = rng.choice(real_ids)
            # else: keep the original piece
            chosen.append(pos)
        total += len(unit)

    chosen.sort()
    masked_positions = chosen
    masked_label_ids = [original_ids[pos] for pos in chosen]

    pad = max_len - n_real
    return MaskedExample(
        input_ids=input_ids + [vocab.id_of("[PAD]")] * pad,
        input_mask=[1] * n_real + [0] * pad,
        segment_ids=segment_ids + [0] * pad,
        masked_positions=masked_positions,
        masked_label_ids=masked_label_ids,
        is_next=pair.is_next,
    )


def mask_all(
    pairs: Iterable[PackedPair],
    vocab: SubwordVocab,
    policy: MaskingPolicy,
    max_len: int,
    threads: int = 1,
) -> list[MaskedExample]:
    pairs = list(pairs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(
                pool.map(lambda p: mask(p, vocab, policy, max_len), pairs, chunksize=64)
            )
    return [mask(p, vocab, policy, max_len) for p in pairs]


def _write_record(fh: BinaryIO, ex: MaskedExample, max_len: int) -> None:
    if len(ex.input_ids) != max_len:
        raise InputDataError(
            f"example has {len(ex.input_ids)} ids, expected {max_len}"
        )
    n = len(ex.masked_positions)
    body = struct.pack(f"<{max_len}I", *ex.input_ids)
    body += struct.pack(f"<{max_len}I", *ex.input_mask)
    body += struct.pack(f"<{max_len}I", *ex.segment_ids)
    body += struct.pack("<I", n)
    body += struct.pack(f"<{n}I", *ex.masked_positions)
    body += struct.pack(f"<{n}I", *ex.masked_label_ids)
    body += struct.pack("<B", 1 if ex.is_next else 0)
    fh.write(struct.pack("<I", len(body)))
    fh.write(body)


def write_examples(
    examples: Iterable[MaskedExample], path: str | Path, max_len: int
) -> int:
    """Write examples to an MLMX file; returns the record count."""
    count = 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHHH", MAGIC, VERSION, max_len, predictions_cap(max_len)))
        for index, ex in enumerate(examples):
            try:
                _write_record(fh, ex, max_len)
            except struct.error as exc:
                raise InputDataError(f"record {index}: {exc}") from exc
            count += 1
    return count


def read_examples(path: str | Path) -> tuple[dict, list[MaskedExample]]:
    """Read an MLMX file back into (header, examples)."""
    with open(path, "rb") as fh:
        head = fh.read(10)
        if len(head) < 10:
            raise InputDataError(f"{path}: truncated header")
        magic, version, max_len, cap = struct.unpack("<4sHHH", head)
        if magic != MAGIC:
            raise InputDataError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise InputDataError(f"{path}: unsupported version {version}")
        examples = []
        while True:
            prefix = fh.read(4)
            if not prefix:
                break
            if len(prefix) < 4:
                raise InputDataError(f"{path}: truncated record prefix")
            (length,) = struct.unpack("<I", prefix)
            body = fh.read(length)
            if len(body) < length:
                raise InputDataError(f"{path}: truncated record body")
            off = 0
            ids = list(struct.unpack_from(f"<{max_len}I", body, off)); off += 4 * max_len
            masks = list(struct.unpack_from(f"<{max_len}I", body, off)); off += 4 * max_len
            segs = list(struct.unpack_from(f"<{max_len}I", body, off)); off += 4 * max_len
            (n,) = struct.unpack_from("<I", body, off); off += 4
            positions = list(struct.unpack_from(f"<{n}I", body, off)); off += 4 * n
            labels = list(struct.unpack_from(f"<{n}I", body, off)); off += 4 * n
            (is_next,) = struct.unpack_from("<B", body, off)
            examples.append(
                MaskedExample(ids, masks, segs, positions, labels, bool(is_next))
            )
    return {"version": version, "max_len": max_len, "cap": cap}, examples
