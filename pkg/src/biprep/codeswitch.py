"""Synthetic code-switching by tiered dictionary substitution.

Sentences are selected independently (seeded Bernoulli at the sentence
threshold); within a selected sentence, spans are matched against the
bilingual lexicon longest-first and replaced in dictionary-priority order
(wiki titles, then PanLex, then MUSE) until the word-replacement budget
floor(token_threshold * word_count) is exhausted. A multi-word span that
would exceed the remaining budget is skipped and matching continues. Every
random draw comes from a per-sentence RNG derived from (seed, doc_id,
index), so output is byte-identical across runs and worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .corpus import Sentence
from .errors import ConfigurationError
from .lexicon import TIER_NAMES, TIERS, BilingualLexicon
from .seeding import derive_rng

DICT_CODES = {
    "all": frozenset({"wiki", "panlex", "muse"}),
    "pm": frozenset({"panlex", "muse"}),
    "m": frozenset({"muse"}),
    "mw": frozenset({"muse", "wiki"}),
    "w": frozenset({"wiki"}),
}
_CODE_BY_SET = {v: k for k, v in DICT_CODES.items()}

MODES = ("s1", "s2")  # train-from-scratch vs continued-training experiment tag


@dataclass(frozen=True)
class CodeSwitchConfig:
    sentence_threshold: float
    token_threshold: float
    dictionaries: frozenset[str]
    seed: int
    mode: str = "s2"

    def __post_init__(self) -> None:
        if not 0.0 <= self.sentence_threshold <= 1.0:
            raise ConfigurationError(f"sentence threshold {self.sentence_threshold} not in [0, 1]")
        if not 0.0 <= self.token_threshold <= 1.0:
            raise ConfigurationError(f"token threshold {self.token_threshold} not in [0, 1]")
        if not self.dictionaries:
            raise ConfigurationError("at least one dictionary must be enabled")
        unknown = set(self.dictionaries) - set(TIERS)
        if unknown:
            raise ConfigurationError(f"unknown dictionaries: {sorted(unknown)}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def name(self) -> str:
        code = _CODE_BY_SET.get(frozenset(self.dictionaries))
        if code is None:
            code = "+".join(sorted(self.dictionaries))
        return f"{self.mode}-{self.sentence_threshold}-{self.token_threshold}-{code}"

    def enabled_tiers(self) -> list[int]:
        return sorted(TIERS[name] for name in self.dictionaries)


# Experiment grid rows: (sentence threshold, token threshold, dictionary code),
# repeated for both modes.
_MATRIX_ROWS = (
    ("0.5", "0.3", "all"),
    ("1.0", "0.5", "all"),
    ("0.5", "0.3", "pm"),
    ("0.5", "0.3", "m"),
    ("0.5", "0.1", "mw"),
    ("0.5", "0.3", "mw"),
    ("1.0", "0.3", "mw"),
    ("1.0", "0.001", "mw"),
    ("0.5", "0.3", "w"),
)


def config_matrix(seed: int = 0) -> list[CodeSwitchConfig]:
    """The 18 named experiment configurations (9 per mode)."""
    configs = []
    for mode in MODES:
        for sent, tok, code in _MATRIX_ROWS:
            configs.append(
                CodeSwitchConfig(
                    sentence_threshold=float(sent),
                    token_threshold=float(tok),
                    dictionaries=DICT_CODES[code],
                    seed=seed,
                    mode=mode,
                )
            )
    return configs


def write_matrix(outdir: str | Path, seed: int = 0) -> list[Path]:
    """Write one TOML config file per matrix entry; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for cfg in config_matrix(seed):
        dicts = sorted(cfg.dictionaries, key=lambda name: TIERS[name])
        dict_list = ", ".join(f'"{d}"' for d in dicts)
        body = (
            "[codeswitch]\n"
            f'mode = "{cfg.mode}"\n'
            f"sentence_threshold = {cfg.sentence_threshold}\n"
            f"token_threshold = {cfg.token_threshold}\n"
            f"dictionaries = [{dict_list}]\n"
        )
        path = outdir / f"{cfg.name}.toml"
        path.write_text(body, encoding="utf-8")
        paths.append(path)
    return paths


@dataclass
class Replacement:
    """One landed substitution, for reporting and auditing."""

    doc_id: str
    sentence_index: int
    start: int
    length: int
    source_words: tuple[str, ...]
    target: str
    tier: int


@dataclass
class SwitchReport:
    sentences_total: int = 0
    sentences_switched: int = 0
    tokens_replaced: int = 0
    replacements_per_tier: dict[str, int] = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.replacements_per_tier is None:
            self.replacements_per_tier = {name: 0 for name in TIERS}

    @property
    def realized_sentence_fraction(self) -> float:
        if self.sentences_total == 0:
            return 0.0
        return self.sentences_switched / self.sentences_total

    def to_json(self) -> dict:
        return {
            "sentences_total": self.sentences_total,
            "sentences_switched": self.sentences_switched,
            "realized_sentence_fraction": self.realized_sentence_fraction,
            "tokens_replaced": self.tokens_replaced,
            "replacements_per_tier": dict(self.replacements_per_tier),
        }


class _LexIndex:
    """Phrase index over one lexicon, filtered to the enabled tiers."""

    def __init__(self, lex: BilingualLexicon, enabled: frozenset[str], fold_case: bool):
        enabled_tiers = {TIERS[name] for name in enabled}
        self.entries: dict[tuple[str, ...], list[tuple[str, int]]] = {}
        self.max_len = 0
        for src, targets in lex.entries.items():
            kept = [(tgt, tier) for tgt, tier in targets if tier in enabled_tiers]
            if not kept:
                continue
            words = src.lower().split() if fold_case else src.split()
            key = tuple(words)
            bucket = self.entries.setdefault(key, [])
            for item in kept:
                if item not in bucket:
                    bucket.append(item)
            self.max_len = max(self.max_len, len(key))
        for bucket in self.entries.values():
            bucket.sort(key=lambda item: (item[1], item[0]))


def _switch_sentence(
    sent: Sentence,
    indexes: dict[str, _LexIndex | None],
    cfg: CodeSwitchConfig,
    fold_case: bool,
) -> tuple[Sentence, list[Replacement]]:
    rng = derive_rng(cfg.seed, sent.doc_id, sent.index)
    selected = rng.random() < cfg.sentence_threshold
    if not selected:
        return sent, []
    index = indexes.get(sent.lang)
    if index is None or not index.entries:
        return sent, []

    tokens = sent.tokens
    n = len(tokens)
    budget = math.floor(cfg.token_threshold * n)
    if budget < 1:
        return sent, []

    folded = [t.lower() for t in tokens] if fold_case else list(tokens)
    claimed = [False] * n
    replaced = 0
    replacements: list[Replacement] = []

    for tier in cfg.enabled_tiers():
        if replaced >= budget:
            break
        for length in range(min(index.max_len, n), 0, -1):
            if replaced >= budget:
                break
            for i in range(0, n - length + 1):
                if replaced >= budget:
                    break
                if any(claimed[i : i + length]):
                    continue
                entry = index.entries.get(tuple(folded[i : i + length]))
                if not entry:
                    continue
                best_tier = entry[0][1]
                if best_tier != tier:
                    continue
                if replaced + length > budget:
                    continue
                choices = [tgt for tgt, t in entry if t == best_tier]
                target = rng.choice(choices)
                for k in range(i, i + length):
                    claimed[k] = True
                replaced += length
                replacements.append(
                    Replacement(
                        sent.doc_id, sent.index, i, length,
                        tuple(tokens[i : i + length]), target, best_tier,
                    )
                )

    if not replacements:
        return sent, []

    new_tokens: list[str] = []
    by_start = {r.start: r for r in replacements}
    i = 0
    while i < n:
        repl = by_start.get(i)
        if repl is not None:
            new_tokens.extend(repl.target.split())
            i += repl.length
        else:
            new_tokens.append(tokens[i])
            i += 1
    switched = replace(sent, tokens=new_tokens, raw=" ".join(new_tokens))
    return switched, replacements


def augment(
    sentences: Iterable[Sentence],
    lex_en2ar: BilingualLexicon | None,
    lex_ar2en: BilingualLexicon | None,
    cfg: CodeSwitchConfig,
    fold_case: bool = True,
    detail_sink: list[Replacement] | None = None,
    threads: int = 1,
) -> tuple[list[Sentence], SwitchReport]:
    """Code-switch a sentence stream; returns (sentences, report).

    A sentence counts as switched only when at least one replacement landed,
    so the realized fraction sits below the sentence threshold when lexicon
    coverage is partial; at full coverage it concentrates around the
    threshold with binomial noise (selection is an independent draw per
    sentence). English sentences draw from ``lex_en2ar``, Arabic ones from
    ``lex_ar2en``; a missing lexicon leaves that language untouched.
    """
    if lex_en2ar is not None and lex_en2ar.direction != "en2ar":
        raise ConfigurationError(f"expected an en2ar lexicon, got {lex_en2ar.direction}")
    if lex_ar2en is not None and lex_ar2en.direction != "ar2en":
        raise ConfigurationError(f"expected an ar2en lexicon, got {lex_ar2en.direction}")

    enabled = frozenset(cfg.dictionaries)
    indexes: dict[str, _LexIndex | None] = {
        "en": _LexIndex(lex_en2ar, enabled, fold_case) if lex_en2ar else None,
        "ar": _LexIndex(lex_ar2en, enabled, fold_case) if lex_ar2en else None,
    }

    items = list(sentences)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda s: _switch_sentence(s, indexes, cfg, fold_case), items, chunksize=256)
            )
    else:
        results = [_switch_sentence(s, indexes, cfg, fold_case) for s in items]

    report = SwitchReport()
    out: list[Sentence] = []
    for switched, replacements in results:
        out.append(switched)
        report.sentences_total += 1
        if replacements:
            report.sentences_switched += 1
            for repl in replacements:
                report.tokens_replaced += repl.length
                report.replacements_per_tier[TIER_NAMES[repl.tier]] += 1
            if detail_sink is not None:
                detail_sink.extend(replacements)
    return out, report
