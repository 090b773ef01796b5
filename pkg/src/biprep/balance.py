"""Corpus balancing: deterministic up-sampling and token/sentence accounting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Sentence
from .errors import ConfigurationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass
class BalancePlan:
    """Repeat counts keyed by (lang, source); anything absent repeats once."""

    multipliers: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, mult in self.multipliers.items():
            if not isinstance(mult, int) or mult < 1:
                raise ConfigurationError(f"multiplier for {key} must be a positive integer, got {mult!r}")

    def multiplier(self, lang: str, source: str) -> int:
        return self.multipliers.get((lang, source), 1)

    @classmethod
    def from_toml(cls, path: str | Path) -> "BalancePlan":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        raw = data.get("multipliers", {})
        multipliers: dict[tuple[str, str], int] = {}
        for key, mult in raw.items():
            parts = key.split(".")
            if len(parts) != 2:
                raise ConfigurationError(f"plan key {key!r} must look like 'lang.source'")
            multipliers[(parts[0], parts[1])] = mult
        return cls(multipliers)


def default_plan() -> BalancePlan:
    """Rebalancing used throughout: Arabic Wikipedia x5, Arabic Gigaword x3."""
    return BalancePlan({("ar", "wiki"): 5, ("ar", "gigaword"): 3})


def upsample(sentences: Iterable[Sentence], plan: BalancePlan) -> Iterator[Sentence]:
    """Repeat each sentence per the plan, interleaving whole passes.

    Pass k emits every sentence whose multiplier exceeds k, in input order, so
    repeats of one sentence never sit next to each other. Repeats beyond the
    first carry a ``#r<k>`` suffix on doc_id; pass 0 is byte-identical to the
    input, making an all-ones plan the identity.
    """
    buffered = list(sentences)
    if not buffered:
        return
    max_mult = max(plan.multiplier(s.lang, s.source) for s in buffered)
    for k in range(max_mult):
        for sent in buffered:
            if plan.multiplier(sent.lang, sent.source) > k:
                if k == 0:
                    yield sent
                else:
                    yield replace(sent, doc_id=f"{sent.doc_id}#r{k}")


@dataclass
class CorpusStats:
    """Exact whitespace-token and sentence counts per language and source."""

    token_counts: dict[str, int] = field(default_factory=dict)
    sentence_counts: dict[str, int] = field(default_factory=dict)
    per_source: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)

    def add(self, sent: Sentence) -> None:
        n = len(sent.tokens)
        self.token_counts[sent.lang] = self.token_counts.get(sent.lang, 0) + n
        self.sentence_counts[sent.lang] = self.sentence_counts.get(sent.lang, 0) + 1
        bucket = self.per_source.setdefault((sent.lang, sent.source), {"tokens": 0, "sentences": 0})
        bucket["tokens"] += n
        bucket["sentences"] += 1

    def merge(self, other: "CorpusStats") -> "CorpusStats":
        out = CorpusStats(
            dict(self.token_counts), dict(self.sentence_counts),
            {k: dict(v) for k, v in self.per_source.items()},
        )
        for lang, n in other.token_counts.items():
            out.token_counts[lang] = out.token_counts.get(lang, 0) + n
        for lang, n in other.sentence_counts.items():
            out.sentence_counts[lang] = out.sentence_counts.get(lang, 0) + n
        for key, bucket in other.per_source.items():
            mine = out.per_source.setdefault(key, {"tokens": 0, "sentences": 0})
            mine["tokens"] += bucket["tokens"]
            mine["sentences"] += bucket["sentences"]
        return out

    @property
    def total_tokens(self) -> int:
        return sum(self.token_counts.values())

    def to_json(self) -> dict:
        return {
            "token_counts": dict(sorted(self.token_counts.items())),
            "sentence_counts": dict(sorted(self.sentence_counts.items())),
            "total_tokens": self.total_tokens,
            "per_source": {
                f"{lang}.{source}": dict(bucket)
                for (lang, source), bucket in sorted(self.per_source.items())
            },
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")


def count(sentences: Iterable[Sentence]) -> CorpusStats:
    """Count tokens and sentences; an associative reduction, order-invariant."""
    stats = CorpusStats()
    for sent in sentences:
        stats.add(sent)
    return stats
