"""Bilingual dictionaries: loading, merging, statistics, and canonical TSV.

Three source formats are supported, each pinned to a priority tier:
Wikipedia parallel titles (tier 0, highest), PanLex (tier 1), MUSE (tier 2).
Within an entry, translations are looked up tier-ascending, then
lexicographically, so priority is deterministic.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigurationError, InputDataError

log = logging.getLogger(__name__)

TIERS = {"wiki": 0, "panlex": 1, "muse": 2}
TIER_NAMES = {v: k for k, v in TIERS.items()}
DIRECTIONS = ("en2ar", "ar2en")

_PARENTHETICAL = re.compile(r"\s*\([^()]*\)\s*$")


def _norm_phrase(phrase: str) -> str:
    return " ".join(unicodedata.normalize("NFC", phrase).split())


@dataclass
class BilingualLexicon:
    """Translation table: source phrase -> [(target phrase, tier)], one direction."""

    direction: str
    entries: dict[str, list[tuple[str, int]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ConfigurationError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")

    def add(self, src: str, tgt: str, tier: int) -> bool:
        src = _norm_phrase(src)
        tgt = _norm_phrase(tgt)
        if not src or not tgt:
            return False
        targets = self.entries.setdefault(src, [])
        if (tgt, tier) in targets:
            return False
        targets.append((tgt, tier))
        return True

    def sort(self) -> None:
        for targets in self.entries.values():
            targets.sort(key=lambda item: (item[1], item[0]))

    def lookup(self, phrase: str) -> list[tuple[str, int]]:
        return self.entries.get(_norm_phrase(phrase), [])

    def __len__(self) -> int:
        return len(self.entries)


def load(path: str | Path, fmt: str, direction: str) -> BilingualLexicon:
    """Load one dictionary file in its native format.

    MUSE lines are whitespace-separated word pairs; PanLex exports are
    src<TAB>tgt; Wikipedia title files are en_title<TAB>ar_title with
    trailing parenthetical disambiguators stripped. Unparseable lines are
    skipped with a warning; a file with zero usable entries is an error.
    """
    if fmt not in TIERS:
        raise ConfigurationError(f"unknown lexicon format {fmt!r}; expected one of {tuple(TIERS)}")
    tier = TIERS[fmt]
    lex = BilingualLexicon(direction)
    n_bad = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            pair = _parse_line(line, fmt, direction)
            if pair is None:
                n_bad += 1
                log.warning("%s:%d: unparseable %s line, skipped", path, lineno, fmt)
                continue
            lex.add(pair[0], pair[1], tier)
    if not lex.entries:
        raise InputDataError(f"{path}: no valid {fmt} entries found")
    if n_bad:
        log.warning("%s: skipped %d unparseable lines", path, n_bad)
    lex.sort()
    return lex


def _parse_line(line: str, fmt: str, direction: str) -> tuple[str, str] | None:
    if fmt == "muse":
        parts = line.split()
        if len(parts) != 2:
            return None
        return parts[0], parts[1]
    parts = line.split("\t")
    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
        return None
    if fmt == "wiki":
        en_title = _PARENTHETICAL.sub("", parts[0])
        ar_title = _PARENTHETICAL.sub("", parts[1])
        if not en_title.strip() or not ar_title.strip():
            return None
        return (en_title, ar_title) if direction == "en2ar" else (ar_title, en_title)
    return parts[0], parts[1]


def merge(lexicons: Iterable[BilingualLexicon]) -> BilingualLexicon:
    """Union lexicons of one direction, keeping every (target, tier) once."""
    lexicons = list(lexicons)
    if not lexicons:
        raise ConfigurationError("merge needs at least one lexicon")
    direction = lexicons[0].direction
    for lex in lexicons[1:]:
        if lex.direction != direction:
            raise ConfigurationError(
                f"direction mismatch: {lex.direction} vs {direction}"
            )
    merged = BilingualLexicon(direction)
    for lex in lexicons:
        for src, targets in lex.entries.items():
            for tgt, tier in targets:
                merged.add(src, tgt, tier)
    merged.sort()
    return merged


@dataclass
class LexiconStats:
    """Per-tier entry counts and mean translations per entry."""

    entry_count: dict[str, int]
    mean_translations: dict[str, float]

    def to_json(self) -> dict:
        return {
            "entry_count": self.entry_count,
            "mean_translations": {k: round(v, 4) for k, v in self.mean_translations.items()},
        }


def stats(lex: BilingualLexicon) -> LexiconStats:
    entry_count = {name: 0 for name in TIERS}
    translation_count = {name: 0 for name in TIERS}
    for targets in lex.entries.values():
        seen_tiers = set()
        for _tgt, tier in targets:
            name = TIER_NAMES[tier]
            translation_count[name] += 1
            seen_tiers.add(name)
        for name in seen_tiers:
            entry_count[name] += 1
    mean = {
        name: (translation_count[name] / entry_count[name]) if entry_count[name] else 0.0
        for name in TIERS
    }
    return LexiconStats(entry_count, mean)


def save(lex: BilingualLexicon, path: str | Path) -> None:
    """Write the canonical TSV form: src<TAB>tgt<TAB>tier, fully sorted."""
    lex.sort()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for src in sorted(lex.entries):
            for tgt, tier in lex.entries[src]:
                fh.write(f"{src}\t{tgt}\t{tier}\n")


def load_canonical(path: str | Path, direction: str) -> BilingualLexicon:
    """Read a canonical TSV produced by :func:`save`."""
    lex = BilingualLexicon(direction)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InputDataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                tier = int(parts[2])
            except ValueError as exc:
                raise InputDataError(f"{path}:{lineno}: bad tier {parts[2]!r}") from exc
            if tier not in TIER_NAMES:
                raise InputDataError(f"{path}:{lineno}: unknown tier {tier}")
            lex.add(parts[0], parts[1], tier)
    if not lex.entries:
        raise InputDataError(f"{path}: no entries")
    lex.sort()
    return lex
