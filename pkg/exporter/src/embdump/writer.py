"""Writer for the EMBD binary dump format.

Header: {magic "EMBD", version u16, n_layers u16, dim u32, n_sentences u32}.
Per sentence: u32 id byte-length + UTF-8 id, lang u8 (0=en, 1=ar, 255=other),
n_tokens u32, a special-token bitmap of ceil(n_tokens/8) bytes (bit i of
byte i//8, LSB first), then n_layers * n_tokens * dim little-endian float32
values, layer-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

MAGIC = b"EMBD"
VERSION = 1

LANG_CODES = {"en": 0, "ar": 1, "other": 255}


@dataclass
class DumpSentence:
    sentence_id: str
    lang: str
    vectors: np.ndarray  # (n_layers, n_tokens, dim) float32
    special_mask: Sequence[bool]


def _bitmap(mask: Sequence[bool]) -> bytes:
    out = bytearray((len(mask) + 7) // 8)
    for i, bit in enumerate(mask):
        if bit:
            out[i // 8] |= 1 << (i % 8)
    return bytes(out)


class DumpWriter:
    """Streaming writer; sentence count is fixed up front."""

    def __init__(self, fh: BinaryIO, n_layers: int, dim: int, n_sentences: int):
        self._fh = fh
        self.n_layers = n_layers
        self.dim = dim
        self.expected = n_sentences
        self.written = 0
        fh.write(struct.pack("<4sHHII", MAGIC, VERSION, n_layers, dim, n_sentences))

    def add(self, sent: DumpSentence) -> None:
        vectors = np.ascontiguousarray(sent.vectors, dtype="<f4")
        n_tokens = vectors.shape[1]
        if vectors.shape != (self.n_layers, n_tokens, self.dim):
            raise ValueError(
                f"{sent.sentence_id!r}: vectors shaped {vectors.shape}, "
                f"expected ({self.n_layers}, n_tokens, {self.dim})"
            )
        if len(sent.special_mask) != n_tokens:
            raise ValueError(f"{sent.sentence_id!r}: special mask length mismatch")
        if self.written >= self.expected:
            raise ValueError("more sentences than declared in the header")
        encoded = sent.sentence_id.encode("utf-8")
        self._fh.write(struct.pack("<I", len(encoded)))
        self._fh.write(encoded)
        self._fh.write(struct.pack("<B", LANG_CODES.get(sent.lang, 255)))
        self._fh.write(struct.pack("<I", n_tokens))
        self._fh.write(_bitmap(sent.special_mask))
        self._fh.write(vectors.tobytes())
        self.written += 1

    def close_check(self) -> None:
        if self.written != self.expected:
            raise ValueError(
                f"wrote {self.written} sentences but header declares {self.expected}"
            )


def write_dump(path: str | Path, n_layers: int, dim: int, sentences: list[DumpSentence]) -> None:
    with open(path, "wb") as fh:
        writer = DumpWriter(fh, n_layers, dim, len(sentences))
        for sent in sentences:
            writer.add(sent)
        writer.close_check()
