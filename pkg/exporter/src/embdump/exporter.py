"""Run a pretrained encoder over sentences and dump per-layer hidden states.

One forward pass per sentence in deterministic evaluation mode (no dropout,
no gradients, batch size 1), so consecutive exports of the same input are
bitwise identical. Layer k of the dump is encoder layer k's output (the
embedding layer is not exported); the special-token bitmap marks exactly the
tokenizer's added special tokens.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .writer import DumpSentence, DumpWriter

log = logging.getLogger(__name__)


@dataclass
class ExportRequest:
    model: str  # model identifier or local checkpoint path
    input_path: str | Path  # TSV: id <TAB> lang <TAB> text
    output_path: str | Path
    layers: list[int] | None = None  # 1-based encoder layers; None = all


@dataclass
class ExportResult:
    n_sentences: int
    n_layers: int
    dim: int
    truncated: list[str] = field(default_factory=list)


def read_sentence_file(path: str | Path) -> list[tuple[str, str, str]]:
    rows: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>lang<TAB>text")
            sid, lang, text = parts
            if sid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate sentence id {sid!r}")
            seen.add(sid)
            rows.append((sid, lang, text))
    if not rows:
        raise ValueError(f"{path}: no sentences")
    return rows


def _max_input_length(model, tokenizer) -> int | None:
    limit = getattr(model.config, "max_position_embeddings", None)
    if limit is None:
        tk = getattr(tokenizer, "model_max_length", None)
        # Some tokenizers report a huge sentinel when no limit is set.
        limit = tk if tk and tk < 1_000_000 else None
    return limit


def export(req: ExportRequest) -> ExportResult:
    sentences = read_sentence_file(req.input_path)
    tokenizer = AutoTokenizer.from_pretrained(req.model)
    model = AutoModel.from_pretrained(req.model)
    model.eval()

    n_encoder_layers = model.config.num_hidden_layers
    layers = req.layers or list(range(1, n_encoder_layers + 1))
    for layer in layers:
        if not 1 <= layer <= n_encoder_layers:
            raise ValueError(f"layer {layer} out of range 1..{n_encoder_layers}")
    dim = model.config.hidden_size
    limit = _max_input_length(model, tokenizer)

    result = ExportResult(n_sentences=len(sentences), n_layers=len(layers), dim=dim)
    with open(req.output_path, "wb") as fh:
        writer = DumpWriter(fh, len(layers), dim, len(sentences))
        with torch.no_grad():
            for sid, lang, text in sentences:
                enc = tokenizer(
                    text,
                    return_tensors="pt",
                    return_special_tokens_mask=True,
                    truncation=limit is not None,
                    max_length=limit,
                )
                if limit is not None:
                    full = tokenizer(text, return_special_tokens_mask=False)
                    if len(full["input_ids"]) > limit:
                        log.warning(
                            "sentence %r truncated to %d tokens", sid, limit
                        )
                        result.truncated.append(sid)
                inputs = {
                    k: v
                    for k, v in enc.items()
                    if k in ("input_ids", "attention_mask", "token_type_ids")
                }
                output = model(**inputs, output_hidden_states=True)
                # hidden_states[0] is the embedding layer; encoder layer k
                # lives at index k.
                stacked = np.stack(
                    [output.hidden_states[k][0].numpy() for k in layers]
                ).astype("<f4")
                special = [bool(b) for b in enc["special_tokens_mask"][0].tolist()]
                writer.add(DumpSentence(sid, lang, stacked, special))
        writer.close_check()
    return result
