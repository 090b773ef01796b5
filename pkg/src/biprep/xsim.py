"""Per-layer cosine similarity between aligned and randomly paired sentences.

Sentence representations are the mean of the non-special token vectors at a
given encoder layer (layers are numbered 1..n_layers; the embedding layer is
not stored). The profile compares aligned (bitext) pairs against a seeded
re-pairing of the same sentences in which no pair coincides with an aligned
one.

Dump binary format ``EMBD``: header {magic "EMBD", version u16, n_layers
u16, dim u32, n_sentences u32}; per sentence: u32 id byte-length + UTF-8 id,
lang u8 (0=en, 1=ar, 255=other), n_tokens u32, a special-token bitmap of
ceil(n_tokens/8) bytes (bit i of byte i//8, LSB first), then n_layers *
n_tokens * dim little-endian float32 values, layer-major.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, InputDataError
from .seeding import derive_rng

MAGIC = b"EMBD"
VERSION = 1

_LANG_CODES = {"en": 0, "ar": 1, "other": 255}
_LANG_NAMES = {v: k for k, v in _LANG_CODES.items()}


@dataclass
class SentenceEmbedding:
    sentence_id: str
    lang: str
    vectors: np.ndarray  # (n_layers, n_tokens, dim) float32
    special_mask: np.ndarray  # (n_tokens,) bool


@dataclass
class EmbeddingDump:
    n_layers: int
    dim: int
    sentences: list[SentenceEmbedding] = field(default_factory=list)
    model_name: str = ""

    def by_id(self) -> dict[str, SentenceEmbedding]:
        return {s.sentence_id: s for s in self.sentences}


def sentence_repr(sent: SentenceEmbedding, layer: int) -> np.ndarray:
    """Mean of the non-special token vectors at 1-based ``layer``."""
    n_layers = sent.vectors.shape[0]
    if not 1 <= layer <= n_layers:
        raise ConfigurationError(f"layer {layer} out of range 1..{n_layers}")
    keep = ~sent.special_mask
    if not keep.any():
        raise InputDataError(
            f"sentence {sent.sentence_id!r} has no non-special tokens"
        )
    return sent.vectors[layer - 1][keep].mean(axis=0, dtype=np.float64)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise InputDataError("cosine of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


@dataclass
class SimilarityProfile:
    layers: list[int]
    bitext_mean: list[float]
    random_mean: list[float]
    pair_count: int

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["layer", "condition", "mean_cosine", "count"])
            for i, layer in enumerate(self.layers):
                writer.writerow([layer, "bitext", f"{self.bitext_mean[i]:.6f}", self.pair_count])
            for i, layer in enumerate(self.layers):
                writer.writerow([layer, "random", f"{self.random_mean[i]:.6f}", self.pair_count])


def _shifted_permutation(n: int, rng) -> list[int]:
    """A seeded permutation of range(n) with no fixed points."""
    if n < 2:
        raise ConfigurationError("random re-pairing needs at least 2 aligned pairs")
    perm = list(range(n))
    rng.shuffle(perm)
    for i in range(n):
        if perm[i] == i:
            j = (i + 1) % n
            perm[i], perm[j] = perm[j], perm[i]
    return perm


def profile(
    dump_a: EmbeddingDump,
    dump_b: EmbeddingDump,
    alignment: list[tuple[str, str]],
    seed: int,
    random_mode: str = "cross",
) -> SimilarityProfile:
    """Per-layer mean cosine for aligned pairs vs. seeded random re-pairing.

    ``random_mode='cross'`` pairs each first-dump sentence with a different
    aligned sentence of the second dump; ``'within'`` re-pairs inside the
    first dump. Both conditions use the same pair count, and the random
    pairing never reproduces an aligned pair.
    """
    if random_mode not in ("cross", "within"):
        raise ConfigurationError(f"unknown random_mode {random_mode!r}")
    if dump_a.n_layers != dump_b.n_layers or dump_a.dim != dump_b.dim:
        raise InputDataError(
            "dumps disagree on shape: "
            f"{dump_a.n_layers}x{dump_a.dim} vs {dump_b.n_layers}x{dump_b.dim}"
        )
    if not alignment:
        raise InputDataError("empty alignment")

    ids_a = dump_a.by_id()
    ids_b = dump_b.by_id()
    missing = [i for i, _ in alignment if i not in ids_a]
    missing += [j for _, j in alignment if j not in ids_b]
    if missing:
        raise InputDataError(f"alignment references missing sentence ids: {missing[:10]}")
    side_a = [i for i, _ in alignment]
    side_b = [j for _, j in alignment]
    if len(set(side_a)) != len(side_a) or len(set(side_b)) != len(side_b):
        raise InputDataError("alignment ids must be unique on each side")
    # Canonical order makes the whole profile (including the seeded random
    # re-pairing) independent of the alignment file's line order.
    alignment = sorted(alignment)

    n = len(alignment)
    n_layers = dump_a.n_layers
    # (n_layers, n, dim) stacks of sentence representations.
    reprs_a = np.stack(
        [[sentence_repr(ids_a[i], layer) for layer in range(1, n_layers + 1)] for i, _ in alignment],
        axis=1,
    )
    reprs_b = np.stack(
        [[sentence_repr(ids_b[j], layer) for layer in range(1, n_layers + 1)] for _, j in alignment],
        axis=1,
    )

    def mean_cosines(x: np.ndarray, y: np.ndarray) -> list[float]:
        dots = np.einsum("lnd,lnd->ln", x, y)
        norms = np.linalg.norm(x, axis=2) * np.linalg.norm(y, axis=2)
        if np.any(norms == 0.0):
            raise InputDataError("cosine of a zero vector is undefined")
        return (dots / norms).mean(axis=1).tolist()

    perm = _shifted_permutation(n, derive_rng(seed, "xsim"))
    bitext = mean_cosines(reprs_a, reprs_b)
    if random_mode == "cross":
        random_side = reprs_b[:, perm, :]
    else:
        random_side = reprs_a[:, perm, :]
    rand = mean_cosines(reprs_a, random_side)

    return SimilarityProfile(
        layers=list(range(1, n_layers + 1)),
        bitext_mean=bitext,
        random_mean=rand,
        pair_count=n,
    )


def _pack_bitmap(mask: Iterable[bool]) -> bytes:
    mask = list(mask)
    out = bytearray((len(mask) + 7) // 8)
    for i, bit in enumerate(mask):
        if bit:
            out[i // 8] |= 1 << (i % 8)
    return bytes(out)


def _unpack_bitmap(data: bytes, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for i in range(n):
        mask[i] = bool(data[i // 8] >> (i % 8) & 1)
    return mask


def write_dump(dump: EmbeddingDump, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(
            struct.pack("<4sHHII", MAGIC, VERSION, dump.n_layers, dump.dim, len(dump.sentences))
        )
        for sent in dump.sentences:
            vectors = np.ascontiguousarray(sent.vectors, dtype="<f4")
            n_tokens = vectors.shape[1]
            if vectors.shape != (dump.n_layers, n_tokens, dump.dim):
                raise InputDataError(
                    f"sentence {sent.sentence_id!r} has vectors of shape {vectors.shape}"
                )
            if len(sent.special_mask) != n_tokens:
                raise InputDataError(
                    f"sentence {sent.sentence_id!r} special mask length mismatch"
                )
            encoded = sent.sentence_id.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", _LANG_CODES.get(sent.lang, 255)))
            fh.write(struct.pack("<I", n_tokens))
            fh.write(_pack_bitmap(sent.special_mask))
            fh.write(vectors.tobytes())


def read_dump(path: str | Path) -> EmbeddingDump:
    issues: list[str] = []
    dump = _read_dump_checked(path, issues)
    if issues:
        raise InputDataError(f"{path}: " + "; ".join(issues))
    return dump


def check_dump(path: str | Path) -> list[str]:
    """Validate an EMBD file; returns a list of problems (empty = valid)."""
    issues: list[str] = []
    try:
        _read_dump_checked(path, issues)
    except (OSError, struct.error) as exc:
        issues.append(str(exc))
    return issues


def _read_dump_checked(path: str | Path, issues: list[str]) -> EmbeddingDump:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16:
            issues.append("truncated header")
            return EmbeddingDump(0, 0)
        magic, version, n_layers, dim, n_sentences = struct.unpack("<4sHHII", head)
        if magic != MAGIC:
            issues.append(f"bad magic {magic!r}")
            return EmbeddingDump(0, 0)
        if version != VERSION:
            issues.append(f"unsupported version {version}")
            return EmbeddingDump(0, 0)
        if n_layers == 0 or dim == 0:
            issues.append(f"degenerate shape: n_layers={n_layers}, dim={dim}")

        dump = EmbeddingDump(n_layers, dim, model_name=path.stem)
        seen_ids: set[str] = set()
        for k in range(n_sentences):
            prefix = fh.read(4)
            if len(prefix) < 4:
                issues.append(f"sentence {k}: truncated id length")
                return dump
            (id_len,) = struct.unpack("<I", prefix)
            raw_id = fh.read(id_len)
            if len(raw_id) < id_len:
                issues.append(f"sentence {k}: truncated id")
                return dump
            try:
                sentence_id = raw_id.decode("utf-8")
            except UnicodeDecodeError:
                issues.append(f"sentence {k}: id is not valid UTF-8")
                return dump
            if sentence_id in seen_ids:
                issues.append(f"duplicate sentence id {sentence_id!r}")
            seen_ids.add(sentence_id)
            meta = fh.read(5)
            if len(meta) < 5:
                issues.append(f"sentence {sentence_id!r}: truncated metadata")
                return dump
            lang_code, n_tokens = struct.unpack("<BI", meta)
            if lang_code not in _LANG_NAMES:
                issues.append(f"sentence {sentence_id!r}: unknown lang code {lang_code}")
            if n_tokens == 0:
                issues.append(f"sentence {sentence_id!r}: zero tokens")
                return dump
            bitmap_len = (n_tokens + 7) // 8
            bitmap = fh.read(bitmap_len)
            if len(bitmap) < bitmap_len:
                issues.append(f"sentence {sentence_id!r}: truncated special bitmap")
                return dump
            extra_bits = [
                i for i in range(n_tokens, bitmap_len * 8) if bitmap[i // 8] >> (i % 8) & 1
            ]
            if extra_bits:
                issues.append(
                    f"sentence {sentence_id!r}: special bitmap sets bits past n_tokens"
                )
            payload_len = n_layers * n_tokens * dim * 4
            payload = fh.read(payload_len)
            if len(payload) < payload_len:
                issues.append(f"sentence {sentence_id!r}: truncated vectors")
                return dump
            vectors = np.frombuffer(payload, dtype="<f4").reshape(n_layers, n_tokens, dim)
            dump.sentences.append(
                SentenceEmbedding(
                    sentence_id,
                    _LANG_NAMES.get(lang_code, "other"),
                    vectors,
                    _unpack_bitmap(bitmap, n_tokens),
                )
            )
        trailing = fh.read(1)
        if trailing:
            issues.append("trailing bytes after the last sentence")
    return dump


def read_alignment(path: str | Path) -> list[tuple[str, str]]:
    """Read a two-column TSV of (first-dump id, second-dump id)."""
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputDataError(f"{path}:{lineno}: expected 2 tab-separated ids")
            pairs.append((parts[0], parts[1]))
    return pairs
