"""Subword vocabularies: training, merging, segmentation, and file IO.

Two schemes are supported. ``wordpiece`` vocabularies are built by iterative
pair merging scored with freq(ab) / (freq(a) * freq(b)) and segment text
greedily (longest match first, '##'-prefixed continuations). ``unigram``
vocabularies hold a log-probability per piece, are trained by hard-EM with
Viterbi segmentation plus pruning, and segment by Viterbi. Both segment
whitespace-split words internally; there is no whitespace meta-symbol.

Vocabulary files are one piece per line (line number = id, LF endings) with a
``<path>.json`` sidecar holding scheme, casing, special ids and, for unigram
vocabularies, the piece log-probabilities.
"""

from __future__ import annotations

import json
import logging
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Sentence, classify_script
from .errors import ConfigurationError, InputDataError

log = logging.getLogger(__name__)

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
UNK = "[UNK]"
UNUSED_RE = re.compile(r"^unused-\d+$")
MAX_WORD_CHARS = 100

# Combining marks stripped in uncased mode: Latin diacritics and Arabic
# tashkeel (short vowels, shadda, sukun, tanwin, superscript alef).
_STRIP_MARKS = tuple(range(0x0300, 0x0370)) + tuple(range(0x064B, 0x0653)) + (0x0670,)
_STRIP_SET = frozenset(_STRIP_MARKS)


def normalize_word(word: str, cased: bool) -> str:
    word = unicodedata.normalize("NFC", word)
    if cased:
        return word
    word = word.lower()
    decomposed = unicodedata.normalize("NFD", word)
    kept = [ch for ch in decomposed if ord(ch) not in _STRIP_SET]
    return unicodedata.normalize("NFC", "".join(kept))


@dataclass
class SubwordVocab:
    """An ordered piece list; index in ``pieces`` is the id."""

    pieces: list[str]
    cased: bool
    scheme: str  # "wordpiece" | "unigram"
    piece_logprob: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.scheme not in ("wordpiece", "unigram"):
            raise ConfigurationError(f"unknown vocab scheme {self.scheme!r}")
        if len(set(self.pieces)) != len(self.pieces):
            dupes = [p for p, n in Counter(self.pieces).items() if n > 1]
            raise ConfigurationError(f"duplicate pieces in vocab: {dupes[:5]}")
        for special in SPECIALS:
            if special not in self.pieces:
                raise ConfigurationError(f"vocab is missing special piece {special}")
        self._ids = {piece: i for i, piece in enumerate(self.pieces)}
        # Pieces eligible for matching during segmentation: everything except
        # specials and 'unused-k' padding.
        self._matchable = frozenset(
            p for p in self.pieces if p not in SPECIALS and not UNUSED_RE.match(p)
        )
        self._max_piece_chars = max((len(p) for p in self._matchable), default=1)
        self._real_ids = [self._ids[p] for p in self.pieces if p in self._matchable]

    def __len__(self) -> int:
        return len(self.pieces)

    def id_of(self, piece: str) -> int:
        return self._ids[piece]

    @property
    def specials(self) -> dict[str, int]:
        return {s: self._ids[s] for s in SPECIALS}

    @property
    def unk_id(self) -> int:
        return self._ids[UNK]

    def matchable(self) -> frozenset[str]:
        return self._matchable

    def real_pieces(self) -> list[str]:
        """Non-special, non-unused pieces in id order."""
        return [p for p in self.pieces if p in self._matchable]

    def real_piece_ids(self) -> list[int]:
        """Ids of non-special, non-unused pieces, in id order."""
        return self._real_ids


@dataclass
class Segmentation:
    word: str
    pieces: list[str]
    is_unk: bool


def _word_counts(corpus: Iterable[Sentence], cased: bool) -> Counter[str]:
    counts: Counter[str] = Counter()
    for sent in corpus:
        for token in sent.tokens:
            norm = normalize_word(token, cased)
            if norm:
                counts[norm] += 1
    return counts


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word[0:1]) + tuple("##" + ch for ch in word[1:])


def train_wordpiece(
    corpus: Iterable[Sentence],
    size: int,
    cased: bool,
    min_pair_freq: int = 2,
) -> SubwordVocab:
    """Train a wordpiece vocabulary of (up to) ``size`` pieces.

    Starts from the character alphabet and repeatedly merges the adjacent
    symbol pair with the highest freq(ab) / (freq(a) * freq(b)) score, ties
    broken by the lexicographically smallest merged string, until ``size`` is
    reached or no pair occurs at least ``min_pair_freq`` times. The result is
    deterministic for a given corpus.
    """
    words = _word_counts(corpus, cased)
    if not words:
        raise InputDataError("cannot train a vocabulary on an empty corpus")

    sequences: dict[tuple[str, ...], int] = {}
    for word, n in sorted(words.items()):
        sequences[_word_symbols(word)] = n

    alphabet = sorted({sym for seq in sequences for sym in seq})
    floor = len(SPECIALS) + len(alphabet)
    if size < floor:
        raise ConfigurationError(
            f"size {size} is below specials + alphabet = {floor}"
        )

    merges: list[str] = []
    budget = size - floor
    while budget > 0:
        pair_counts: Counter[tuple[str, str]] = Counter()
        sym_counts: Counter[str] = Counter()
        for seq, n in sequences.items():
            for sym in seq:
                sym_counts[sym] += n
            for a, b in zip(seq, seq[1:]):
                pair_counts[(a, b)] += n

        best_pair: tuple[str, str] | None = None
        best_key: tuple[float, str] | None = None
        for pair, freq in pair_counts.items():
            if freq < min_pair_freq:
                continue
            score = freq / (sym_counts[pair[0]] * sym_counts[pair[1]])
            merged = pair[0] + pair[1][2:]
            key = (-score, merged)
            if best_key is None or key < best_key:
                best_key = key
                best_pair = pair
        if best_pair is None:
            log.warning(
                "merge candidates exhausted at %d pieces (target %d)",
                floor + len(merges), size,
            )
            break

        a, b = best_pair
        merged = a + b[2:]
        merges.append(merged)
        budget -= 1

        new_sequences: dict[tuple[str, ...], int] = {}
        for seq, n in sequences.items():
            out: list[str] = []
            i = 0
            while i < len(seq):
                if i + 1 < len(seq) and seq[i] == a and seq[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(seq[i])
                    i += 1
            new_sequences[tuple(out)] = new_sequences.get(tuple(out), 0) + n
        sequences = new_sequences

    pieces = list(SPECIALS) + alphabet + merges
    return SubwordVocab(pieces, cased=cased, scheme="wordpiece")


def _viterbi(word: str, logprob: dict[str, float], max_piece_chars: int) -> tuple[list[str], float] | None:
    n = len(word)
    neg = float("-inf")
    best = [neg] * (n + 1)
    best[0] = 0.0
    back = [0] * (n + 1)
    for i in range(1, n + 1):
        for j in range(max(0, i - max_piece_chars), i):
            if best[j] == neg:
                continue
            lp = logprob.get(word[j:i])
            if lp is None:
                continue
            score = best[j] + lp
            if score > best[i]:
                best[i] = score
                back[i] = j
    if best[n] == neg:
        return None
    pieces: list[str] = []
    i = n
    while i > 0:
        j = back[i]
        pieces.append(word[j:i])
        i = j
    pieces.reverse()
    return pieces, best[n]


def _mle_logprobs(counts: dict[str, float], pieces: Iterable[str], eps: float = 1e-6) -> dict[str, float]:
    smoothed = {p: counts.get(p, 0.0) + eps for p in pieces}
    total = sum(smoothed.values())
    return {p: math.log(c / total) for p, c in smoothed.items()}


def train_unigram(
    corpus: Iterable[Sentence],
    size: int,
    cased: bool = True,
    em_rounds: int = 4,
    prune_fraction: float = 0.2,
    max_piece_chars: int = 16,
    min_substring_freq: int = 2,
    seed_cap_factor: int = 4,
) -> SubwordVocab:
    """Train a unigram-LM vocabulary of (up to) ``size`` pieces.

    Candidate pieces are the frequent substrings of the corpus words. Each EM
    round re-estimates piece probabilities from Viterbi segmentations of the
    word types, then prunes the pieces whose removal costs the least total
    log-likelihood (a ``prune_fraction`` slice per round, never single
    characters) until exactly ``size`` pieces remain.
    """
    words = _word_counts(corpus, cased)
    if not words:
        raise InputDataError("cannot train a vocabulary on an empty corpus")

    chars = sorted({ch for word in words for ch in word})
    floor = len(SPECIALS) + len(chars)
    if size < floor:
        raise ConfigurationError(f"size {size} is below specials + alphabet = {floor}")
    target_real = size - len(SPECIALS)

    char_counts: Counter[str] = Counter()
    substr_counts: Counter[str] = Counter()
    for word, n in words.items():
        L = len(word)
        for i in range(L):
            char_counts[word[i]] += n
            for j in range(i + 2, min(L, i + max_piece_chars) + 1):
                substr_counts[word[i:j]] += n
    candidates = [
        (sub, freq) for sub, freq in substr_counts.items() if freq >= min_substring_freq
    ]
    candidates.sort(key=lambda item: (-item[1], item[0]))
    cap = max(target_real * seed_cap_factor, len(chars))
    multi = [sub for sub, _freq in candidates[:cap]]

    counts: dict[str, float] = {ch: float(char_counts[ch]) for ch in chars}
    counts.update({sub: float(substr_counts[sub]) for sub in multi})
    current = sorted(counts)

    def e_step(logprob: dict[str, float]) -> dict[str, float]:
        width = max(len(p) for p in logprob)
        vit: dict[str, float] = {}
        for word, n in sorted(words.items()):
            result = _viterbi(word, logprob, width)
            if result is None:
                continue
            for piece in result[0]:
                vit[piece] = vit.get(piece, 0.0) + n
        return vit

    def prune(
        n_remove: int, vit: dict[str, float], logprob: dict[str, float]
    ) -> list[str]:
        width = max(len(p) for p in logprob)
        losses: list[tuple[float, str]] = []
        for piece in current:
            if len(piece) == 1:
                continue
            used = vit.get(piece, 0.0)
            if used == 0.0:
                losses.append((0.0, piece))
                continue
            reduced = dict(logprob)
            del reduced[piece]
            alt = _viterbi(piece, reduced, width)
            alt_score = alt[1] if alt else float("-inf")
            losses.append((used * (logprob[piece] - alt_score), piece))
        losses.sort(key=lambda item: (item[0], item[1]))
        return [piece for _loss, piece in losses[:n_remove]]

    logprob = _mle_logprobs(counts, current)
    vit: dict[str, float] = {}
    for _round in range(em_rounds):
        vit = e_step(logprob)
        logprob = _mle_logprobs(vit, current)
        excess = len(current) - target_real
        if excess > 0:
            prunable = len(current) - len(chars)
            n_remove = min(excess, max(1, math.ceil(prune_fraction * prunable)))
            doomed = set(prune(n_remove, vit, logprob))
            current = [p for p in current if p not in doomed]
            logprob = _mle_logprobs(vit, current)

    excess = len(current) - target_real
    if excess > 0:
        vit = e_step(logprob)
        logprob = _mle_logprobs(vit, current)
        doomed = set(prune(excess, vit, logprob))
        current = [p for p in current if p not in doomed]
    elif len(current) < target_real:
        log.warning(
            "corpus supports only %d pieces (target %d)",
            len(SPECIALS) + len(current), size,
        )

    vit = e_step(logprob)
    logprob = _mle_logprobs(vit, current)

    pieces = list(SPECIALS) + sorted(current)
    return SubwordVocab(pieces, cased=cased, scheme="unigram", piece_logprob=logprob)


def merge_vocabs(a: SubwordVocab, b: SubwordVocab, target: int) -> SubwordVocab:
    """Union two same-scheme vocabularies, padding to exactly ``target``.

    Shared pieces appear once (keeping the higher log-probability under the
    unigram scheme); the remainder up to ``target`` is filled with
    'unused-1', 'unused-2', ... placeholders that segmentation never emits.
    """
    if a.scheme != b.scheme:
        raise ConfigurationError(f"scheme mismatch: {a.scheme} vs {b.scheme}")
    if a.cased != b.cased:
        raise ConfigurationError("cannot merge cased with uncased vocabulary")

    pieces = list(SPECIALS)
    seen = set(pieces)
    for vocab in (a, b):
        for piece in vocab.pieces:
            if piece not in seen:
                seen.add(piece)
                pieces.append(piece)
    if target < len(pieces):
        raise ConfigurationError(
            f"target {target} is below the union size {len(pieces)}"
        )

    logprob: dict[str, float] = {}
    if a.scheme == "unigram":
        for vocab in (a, b):
            for piece, lp in vocab.piece_logprob.items():
                logprob[piece] = max(lp, logprob[piece]) if piece in logprob else lp

    for k in range(1, target - len(pieces) + 1):
        pieces.append(f"unused-{k}")
    return SubwordVocab(pieces, cased=a.cased, scheme=a.scheme, piece_logprob=logprob)


def segment(word: str, vocab: SubwordVocab) -> Segmentation:
    """Segment one whitespace word into vocabulary pieces.

    Wordpiece: greedy longest-match from the left, continuations carry '##';
    any unmatchable position makes the whole word [UNK]. Unigram: Viterbi
    segmentation maximizing the summed piece log-probability. Words longer
    than MAX_WORD_CHARS are [UNK] outright.
    """
    norm = normalize_word(word, vocab.cased)
    if not norm or len(norm) > MAX_WORD_CHARS:
        return Segmentation(word, [UNK], True)

    if vocab.scheme == "unigram":
        logprob = vocab.piece_logprob
        result = _viterbi(norm, logprob, vocab._max_piece_chars)
        if result is None:
            return Segmentation(word, [UNK], True)
        return Segmentation(word, result[0], False)

    matchable = vocab.matchable()
    pieces: list[str] = []
    start = 0
    n = len(norm)
    while start < n:
        end = min(n, start + vocab._max_piece_chars)
        found = None
        while end > start:
            candidate = norm[start:end]
            if start > 0:
                candidate = "##" + candidate
            if candidate in matchable:
                found = candidate
                break
            end -= 1
        if found is None:
            return Segmentation(word, [UNK], True)
        pieces.append(found)
        start = end
    return Segmentation(word, pieces, False)


def vocab_composition(vocab: SubwordVocab) -> dict[str, int]:
    """Count non-special, non-unused pieces per script."""
    out = {"en": 0, "ar": 0, "other": 0}
    for piece in vocab.real_pieces():
        out[classify_script(piece)] += 1
    return out


def save_vocab(vocab: SubwordVocab, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for piece in vocab.pieces:
            fh.write(piece + "\n")
    meta: dict = {
        "scheme": vocab.scheme,
        "cased": vocab.cased,
        "specials": vocab.specials,
        "size": len(vocab),
    }
    if vocab.scheme == "unigram":
        meta["piece_logprob"] = {
            p: vocab.piece_logprob[p] for p in sorted(vocab.piece_logprob)
        }
    with open(f"{path}.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_vocab(path: str | Path) -> SubwordVocab:
    path = Path(path)
    pieces = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            pieces.append(line.rstrip("\n"))
    while pieces and pieces[-1] == "":
        pieces.pop()
    sidecar = Path(f"{path}.json")
    if not sidecar.exists():
        raise InputDataError(f"missing vocab sidecar {sidecar}")
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    try:
        vocab = SubwordVocab(
            pieces,
            cased=bool(meta["cased"]),
            scheme=meta["scheme"],
            piece_logprob={k: float(v) for k, v in meta.get("piece_logprob", {}).items()},
        )
    except KeyError as exc:
        raise InputDataError(f"{sidecar}: missing field {exc}") from exc
    if meta.get("size") != len(vocab):
        raise InputDataError(
            f"{path}: sidecar size {meta.get('size')} != {len(vocab)} pieces"
        )
    return vocab
