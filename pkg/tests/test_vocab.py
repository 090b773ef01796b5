import math
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from biprep.errors import ConfigurationError
from biprep.vocab import (
    SPECIALS,
    SubwordVocab,
    load_vocab,
    merge_vocabs,
    normalize_word,
    save_vocab,
    segment,
    train_unigram,
    train_wordpiece,
    vocab_composition,
)
from tests.conftest import make_sentence


# ---------------------------------------------------------------- oracles


def best_merge_oracle(words: dict[str, int], min_freq: int = 2) -> str:
    """Recompute the best-scoring first merge directly from the definition."""
    pair_counts: Counter = Counter()
    sym_counts: Counter = Counter()
    for word, n in words.items():
        seq = [word[0]] + ["##" + ch for ch in word[1:]]
        for sym in seq:
            sym_counts[sym] += n
        for a, b in zip(seq, seq[1:]):
            pair_counts[(a, b)] += n
    best = None
    for (a, b), freq in pair_counts.items():
        if freq < min_freq:
            continue
        score = freq / (sym_counts[a] * sym_counts[b])
        merged = a + b[2:]
        key = (-score, merged)
        if best is None or key < best[0]:
            best = (key, merged)
    assert best is not None
    return best[1]


def greedy_oracle(word: str, matchable: frozenset) -> list[str] | None:
    """Longest-prefix-at-every-position segmentation by exhaustive prefix scan."""
    pieces = []
    start = 0
    while start < len(word):
        found = None
        for end in range(len(word), start, -1):
            candidate = word[start:end]
            if start > 0:
                candidate = "##" + candidate
            if candidate in matchable:
                found = (candidate, end)
                break
        if found is None:
            return None
        pieces.append(found[0])
        start = found[1]
    return pieces


def all_segmentations(word: str):
    n = len(word)
    for bits in range(2 ** (n - 1)):
        pieces = []
        start = 0
        for i in range(1, n):
            if bits >> (i - 1) & 1:
                pieces.append(word[start:i])
                start = i
        pieces.append(word[start:])
        yield pieces


def viterbi_score_oracle(word: str, logprob: dict[str, float]) -> float | None:
    best = None
    for pieces in all_segmentations(word):
        if all(p in logprob for p in pieces):
            score = sum(logprob[p] for p in pieces)
            if best is None or score > best:
                best = score
    return best


def _corpus(*lines, lang="en"):
    return [make_sentence(line, doc_id=f"d{i}", index=0, lang=lang) for i, line in enumerate(lines)]


def _vocab(reals, scheme="wordpiece", cased=True, logprob=None):
    return SubwordVocab(
        list(SPECIALS) + list(reals), cased=cased, scheme=scheme,
        piece_logprob=logprob or {},
    )


# ---------------------------------------------------------------- wordpiece


class TestTrainWordpiece:
    def test_toy_corpus_contains_best_merge(self):
        corpus = _corpus("abab abab", "ab")
        words = {"abab": 2, "ab": 1}
        expected = best_merge_oracle(words)
        assert expected == "##ab"  # frozen from the oracle
        vocab = train_wordpiece(corpus, size=10, cased=True)
        assert len(vocab) == 10
        assert expected in vocab.pieces

    def test_zero_merge_budget_is_chars_plus_specials(self):
        corpus = _corpus("abc abc")
        # alphabet: a, ##b, ##c -> floor is 5 + 3
        vocab = train_wordpiece(corpus, size=8, cased=True)
        assert sorted(vocab.pieces) == sorted(list(SPECIALS) + ["a", "##b", "##c"])

    def test_size_below_floor_rejected(self):
        with pytest.raises(ConfigurationError):
            train_wordpiece(_corpus("abc"), size=6, cased=True)

    def test_exact_size_contract(self):
        lines = [" ".join(f"w{i}ord{i % 7}x" for i in range(30))] * 4
        vocab = train_wordpiece(_corpus(*lines), size=60, cased=True)
        assert len(vocab) == 60

    def test_uncased_folds_case_and_accents(self):
        vocab = train_wordpiece(_corpus("Café CAFÉ café"), size=12, cased=False)
        assert all(p == p.lower() for p in vocab.real_pieces())
        seg = segment("CAFÉ", vocab)
        assert not seg.is_unk
        assert "".join(p.removeprefix("##") for p in seg.pieces) == "cafe"

    def test_byte_identical_across_runs(self, tmp_path):
        corpus_lines = ("hello world", "hello there world", "worldly words")
        p1, p2 = tmp_path / "v1.txt", tmp_path / "v2.txt"
        save_vocab(train_wordpiece(_corpus(*corpus_lines), 25, cased=True), p1)
        save_vocab(train_wordpiece(_corpus(*corpus_lines), 25, cased=True), p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "v1.txt.json").read_bytes() == (tmp_path / "v2.txt.json").read_bytes()


# ---------------------------------------------------------------- unigram


class TestTrainUnigram:
    def test_repeated_word_becomes_a_piece(self):
        corpus = _corpus(*(["hello hello hello"] * 3))
        vocab = train_unigram(corpus, size=30)
        assert "hello" in vocab.pieces
        multi = {p: lp for p, lp in vocab.piece_logprob.items() if len(p) > 1}
        assert max(multi, key=multi.get) == "hello"

    def test_char_vocab_at_floor_size(self):
        corpus = _corpus("abc cba bac")
        vocab = train_unigram(corpus, size=8)  # 5 specials + {a, b, c}
        assert sorted(vocab.real_pieces()) == ["a", "b", "c"]

    def test_exact_size_contract(self):
        lines = ["foo bar foobar barfoo foo bar"] * 3
        vocab = train_unigram(_corpus(*lines), size=16)
        assert len(vocab) == 16

    def test_single_chars_survive_pruning(self):
        vocab = train_unigram(_corpus("aaaa aaaa aa"), size=7)
        assert "a" in vocab.pieces

    def test_deterministic(self, tmp_path):
        lines = ("split splitting splitter", "split splat")
        p1, p2 = tmp_path / "u1.txt", tmp_path / "u2.txt"
        save_vocab(train_unigram(_corpus(*lines), 20), p1)
        save_vocab(train_unigram(_corpus(*lines), 20), p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "u1.txt.json").read_bytes() == (tmp_path / "u2.txt.json").read_bytes()


# ---------------------------------------------------------------- merging


class TestMergeVocabs:
    def test_disjoint_reals_no_padding(self):
        a = _vocab([f"a{i}" for i in range(5)])
        b = _vocab([f"b{i}" for i in range(5)])
        merged = merge_vocabs(a, b, target=15)
        assert len(merged) == 15
        assert not any(p.startswith("unused-") for p in merged.pieces)

    def test_identical_vocabs_pad_fully(self):
        a = _vocab([f"p{i}" for i in range(5)])
        merged = merge_vocabs(a, a, target=15)
        assert len(merged) == 15
        unused = [p for p in merged.pieces if p.startswith("unused-")]
        assert unused == [f"unused-{k}" for k in range(1, 6)]

    def test_shared_pieces_counted_once(self):
        a = _vocab(["x", "y", "shared"])
        b = _vocab(["z", "shared"])
        merged = merge_vocabs(a, b, target=10)
        assert merged.pieces.count("shared") == 1
        assert len(merged) == 10
        assert sum(1 for p in merged.pieces if p.startswith("unused-")) == 1

    def test_target_below_union_rejected(self):
        a = _vocab(["x", "y"])
        b = _vocab(["z"])
        with pytest.raises(ConfigurationError):
            merge_vocabs(a, b, target=7)

    def test_scheme_mismatch_rejected(self):
        a = _vocab(["x"], scheme="wordpiece")
        b = _vocab(["x"], scheme="unigram", logprob={"x": -1.0})
        with pytest.raises(ConfigurationError):
            merge_vocabs(a, b, target=10)

    def test_unused_never_segmentable(self):
        a = _vocab(["unhappiness"])
        merged = merge_vocabs(a, _vocab(["un"]), target=12)
        seg = segment("unused-1", merged)
        assert seg.is_unk or "unused-1" not in seg.pieces


# ---------------------------------------------------------------- segment


class TestSegment:
    def test_greedy_example(self):
        vocab = _vocab(["un", "##happiness", "##happy", "h", "##n", "u"])
        seg = segment("unhappiness", vocab)
        assert seg.pieces == greedy_oracle("unhappiness", vocab.matchable())
        assert seg.pieces == ["un", "##happiness"]
        assert not seg.is_unk

    def test_single_char(self):
        vocab = _vocab(["x"])
        assert segment("x", vocab).pieces == ["x"]

    def test_missing_char_is_unk(self):
        vocab = _vocab(["ab", "a", "##b"])
        seg = segment("abq", vocab)
        assert seg.is_unk
        assert seg.pieces == ["[UNK]"]

    def test_longer_than_limit_is_unk(self):
        vocab = _vocab(["a"])
        assert segment("a" * 101, vocab).is_unk

    def test_unigram_viterbi_prefers_high_probability(self):
        logprob = {"ab": -1.0, "a": -2.0, "b": -2.0}
        vocab = _vocab(["ab", "a", "b"], scheme="unigram", logprob=logprob)
        assert segment("ab", vocab).pieces == ["ab"]

    @settings(max_examples=200)
    @given(st.text(alphabet="abc", min_size=1, max_size=8), st.integers(0, 2**31))
    def test_greedy_matches_prefix_oracle(self, word, seed):
        import random

        rng = random.Random(seed)
        alphabet = ["a", "b", "c"]
        reals = set(alphabet) | {"##" + c for c in alphabet}
        for _ in range(rng.randrange(0, 8)):
            n = rng.randrange(2, 5)
            piece = "".join(rng.choice(alphabet) for _ in range(n))
            reals.add(piece if rng.random() < 0.5 else "##" + piece)
        vocab = _vocab(sorted(reals))
        seg = segment(word, vocab)
        oracle = greedy_oracle(word, vocab.matchable())
        if seg.is_unk:
            assert oracle is None
        else:
            assert seg.pieces == oracle

    @settings(max_examples=200)
    @given(st.text(alphabet="abc", min_size=1, max_size=8), st.integers(0, 2**31))
    def test_viterbi_score_matches_enumeration(self, word, seed):
        import random

        rng = random.Random(seed)
        pieces = {"a", "b", "c"}
        for _ in range(6):
            n = rng.randrange(2, 5)
            pieces.add("".join(rng.choice("abc") for _ in range(n)))
        logprob = {p: -rng.uniform(0.5, 6.0) for p in sorted(pieces)}
        vocab = _vocab(sorted(pieces), scheme="unigram", logprob=logprob)
        seg = segment(word, vocab)
        expected = viterbi_score_oracle(word, logprob)
        assert expected is not None
        got = sum(logprob[p] for p in seg.pieces)
        assert math.isclose(got, expected, rel_tol=0, abs_tol=1e-9)

    @given(st.text(alphabet="abcdef", min_size=1, max_size=12))
    def test_round_trip(self, word):
        reals = [c for c in "abcdef"] + ["##" + c for c in "abcdef"] + ["abc", "##def"]
        vocab = _vocab(reals)
        seg = segment(word, vocab)
        if not seg.is_unk:
            rebuilt = "".join(p.removeprefix("##") for p in seg.pieces)
            assert rebuilt == normalize_word(word, vocab.cased)


# ---------------------------------------------------------------- composition


class TestComposition:
    def test_mixed_vocab(self):
        vocab = _vocab(["hello", "كتاب", "123"])
        assert vocab_composition(vocab) == {"en": 1, "ar": 1, "other": 1}

    def test_unused_and_specials_excluded(self):
        vocab = _vocab(["hello", "unused-1", "unused-2"])
        assert vocab_composition(vocab) == {"en": 1, "ar": 0, "other": 0}

    def test_all_padding_counts_zero(self):
        vocab = _vocab([f"unused-{k}" for k in range(1, 4)])
        assert vocab_composition(vocab) == {"en": 0, "ar": 0, "other": 0}


def test_save_load_round_trip(tmp_path):
    vocab = train_unigram(_corpus("roundtrip roundtrip trip round"), size=20)
    path = tmp_path / "v.txt"
    save_vocab(vocab, path)
    loaded = load_vocab(path)
    assert loaded.pieces == vocab.pieces
    assert loaded.scheme == vocab.scheme
    assert loaded.cased == vocab.cased
    assert loaded.piece_logprob == pytest.approx(vocab.piece_logprob)
    assert segment("roundtrip", loaded).pieces == segment("roundtrip", vocab).pieces
