import math

import pytest
from hypothesis import given, settings, strategies as st

from biprep.codeswitch import (
    CodeSwitchConfig,
    Replacement,
    augment,
    config_matrix,
    write_matrix,
)
from biprep.errors import ConfigurationError
from biprep.lexicon import BilingualLexicon
from tests.conftest import make_sentence

ALL = frozenset({"wiki", "panlex", "muse"})


def _lex(direction="en2ar", entries=()):
    lex = BilingualLexicon(direction)
    for src, tgt, tier in entries:
        lex.add(src, tgt, tier)
    lex.sort()
    return lex


def _cfg(sent=1.0, tok=0.3, dicts=ALL, seed=7, mode="s2"):
    return CodeSwitchConfig(sent, tok, frozenset(dicts), seed, mode)


@pytest.fixture
def city_lexicon():
    return _lex(entries=[("New York", "نيويورك", 0), ("big", "كبير", 2)])


class TestConfig:
    def test_name_rendering(self):
        cfg = _cfg(sent=0.5, tok=0.3)
        assert cfg.name == "s2-0.5-0.3-all"

    def test_threshold_bounds(self):
        with pytest.raises(ConfigurationError):
            _cfg(sent=1.5)
        with pytest.raises(ConfigurationError):
            _cfg(tok=-0.1)

    def test_empty_dictionaries_rejected(self):
        with pytest.raises(ConfigurationError):
            _cfg(dicts=frozenset())


class TestConfigMatrix:
    def test_eighteen_configs(self):
        assert len(config_matrix()) == 18

    def test_names_match_experiment_labels(self):
        names = [cfg.name for cfg in config_matrix()]
        expected = [
            "s1-0.5-0.3-all", "s1-1.0-0.5-all", "s1-0.5-0.3-pm", "s1-0.5-0.3-m",
            "s1-0.5-0.1-mw", "s1-0.5-0.3-mw", "s1-1.0-0.3-mw", "s1-1.0-0.001-mw",
            "s1-0.5-0.3-w",
            "s2-0.5-0.3-all", "s2-1.0-0.5-all", "s2-0.5-0.3-pm", "s2-0.5-0.3-m",
            "s2-0.5-0.1-mw", "s2-0.5-0.3-mw", "s2-1.0-0.3-mw", "s2-1.0-0.001-mw",
            "s2-0.5-0.3-w",
        ]
        assert names == expected

    def test_flagship_config_dictionaries(self):
        by_name = {cfg.name: cfg for cfg in config_matrix()}
        assert by_name["s2-0.5-0.3-all"].dictionaries == ALL
        assert by_name["s1-1.0-0.001-mw"].dictionaries == frozenset({"muse", "wiki"})

    def test_write_matrix_files(self, tmp_path):
        paths = write_matrix(tmp_path / "configs")
        assert len(paths) == 18
        assert (tmp_path / "configs" / "s2-0.5-0.3-all.toml").exists()
        body = (tmp_path / "configs" / "s1-1.0-0.001-mw.toml").read_text()
        assert "token_threshold = 0.001" in body


class TestAugment:
    def test_sentence_threshold_zero_is_identity(self, city_lexicon):
        sents = [make_sentence("New York is big", doc_id=f"d{i}") for i in range(5)]
        out, report = augment(sents, city_lexicon, None, _cfg(sent=0.0))
        assert out == sents
        assert report.sentences_switched == 0
        assert report.tokens_replaced == 0
        assert report.realized_sentence_fraction == 0.0

    def test_multiword_priority_with_budget_two(self, city_lexicon):
        # floor(0.5 * 4) = 2: the wiki span consumes the whole budget.
        sents = [make_sentence("New York is big")]
        out, report = augment(sents, city_lexicon, None, _cfg(tok=0.5))
        assert out[0].tokens == ["نيويورك", "is", "big"]
        assert report.replacements_per_tier == {"wiki": 1, "panlex": 0, "muse": 0}

    def test_multiword_span_skipped_when_over_budget(self, city_lexicon):
        # floor(0.3 * 4) = 1: the 2-word wiki span cannot fit, muse can.
        sents = [make_sentence("New York is big")]
        out, _ = augment(sents, city_lexicon, None, _cfg(tok=0.3))
        assert out[0].tokens == ["New", "York", "is", "كبير"]

    def test_budget_cap_ten_words(self):
        lex = _lex(entries=[(f"w{i}", f"t{i}", 2) for i in range(10)])
        sents = [make_sentence(" ".join(f"w{i}" for i in range(10)))]
        details: list[Replacement] = []
        out, report = augment(sents, lex, None, _cfg(tok=0.3), detail_sink=details)
        assert report.tokens_replaced == 3  # floor(0.3 * 10)
        assert sum(r.length for r in details) == 3

    def test_tier_priority_on_shared_span(self):
        lex = _lex(entries=[("cat", "قط", 0), ("cat", "هر", 2)])
        sents = [make_sentence("cat cat cat cat")]
        details: list[Replacement] = []
        augment(sents, lex, None, _cfg(tok=0.5), detail_sink=details)
        assert details and all(r.tier == 0 for r in details)
        assert all(r.target == "قط" for r in details)

    def test_selected_without_match_not_counted(self):
        lex = _lex(entries=[("zzz", "x", 2)])
        sents = [make_sentence("nothing matches here at all")]
        out, report = augment(sents, lex, None, _cfg(sent=1.0))
        assert out == sents
        assert report.sentences_switched == 0

    def test_conservation_outside_spans(self, city_lexicon):
        sents = [make_sentence("truly New York is big today")]
        out, _ = augment(sents, city_lexicon, None, _cfg(tok=0.5))
        tokens = out[0].tokens
        assert tokens[0] == "truly"
        assert tokens[-1] == "today"
        assert tokens[-3:-1] == ["is", "big"] or "is" in tokens

    def test_arabic_direction(self):
        ar2en = _lex("ar2en", entries=[("كتاب", "book", 2)])
        sents = [make_sentence("هذا كتاب جديد تماما", lang="ar")]
        out, report = augment(sents, None, ar2en, _cfg(tok=0.3))
        assert "book" in out[0].tokens
        assert report.sentences_switched == 1

    def test_case_insensitive_matching(self):
        lex = _lex(entries=[("Cairo", "القاهرة", 0)])
        sents = [make_sentence("visiting cairo was great fun")]
        out, _ = augment(sents, lex, None, _cfg(tok=0.2))
        assert "القاهرة" in out[0].tokens

    def test_fold_case_off_requires_exact_match(self):
        lex = _lex(entries=[("Cairo", "القاهرة", 0)])
        sents = [make_sentence("visiting cairo was great fun")]
        out, _ = augment(sents, lex, None, _cfg(tok=0.2), fold_case=False)
        assert out[0].tokens == sents[0].tokens

    def test_disabled_dictionaries_ignored(self, city_lexicon):
        sents = [make_sentence("New York is big")]
        out, _ = augment(sents, city_lexicon, None, _cfg(tok=0.5, dicts={"muse"}))
        assert out[0].tokens == ["New", "York", "is", "كبير"]

    def test_direction_checked(self, city_lexicon):
        with pytest.raises(ConfigurationError):
            augment([], None, city_lexicon, _cfg())  # en2ar passed as ar2en

    def test_deterministic_across_threads(self, city_lexicon):
        sents = [
            make_sentence("New York is big", doc_id=f"d{i}", index=i) for i in range(64)
        ]
        out1, rep1 = augment(sents, city_lexicon, None, _cfg(sent=0.5), threads=1)
        out4, rep4 = augment(sents, city_lexicon, None, _cfg(sent=0.5), threads=4)
        assert out1 == out4
        assert rep1.to_json() == rep4.to_json()

    def test_shard_order_invariance(self, city_lexicon):
        sents = [
            make_sentence("New York is big", doc_id=f"d{i}", index=i) for i in range(32)
        ]
        out_fwd, _ = augment(sents, city_lexicon, None, _cfg(sent=0.5))
        out_rev, _ = augment(list(reversed(sents)), city_lexicon, None, _cfg(sent=0.5))
        assert {s.doc_id: s.raw for s in out_fwd} == {s.doc_id: s.raw for s in out_rev}

    def test_different_seeds_differ(self, city_lexicon):
        sents = [make_sentence("New York is big", doc_id=f"d{i}", index=i) for i in range(100)]
        out_a, _ = augment(sents, city_lexicon, None, _cfg(sent=0.5, seed=1))
        out_b, _ = augment(sents, city_lexicon, None, _cfg(sent=0.5, seed=2))
        assert [s.raw for s in out_a] != [s.raw for s in out_b]

    @settings(max_examples=60)
    @given(
        st.lists(st.integers(1, 12), min_size=1, max_size=8),
        st.floats(0.0, 1.0),
        st.integers(0, 2**31),
    )
    def test_budget_safety_property(self, lengths, tok, seed):
        lex = _lex(entries=[(f"w{i}", f"t{i}", (i % 3)) for i in range(12)])
        sents = [
            make_sentence(" ".join(f"w{(i + j) % 12}" for j in range(n)), doc_id=f"d{i}", index=i)
            for i, n in enumerate(lengths)
        ]
        details: list[Replacement] = []
        out, report = augment(sents, lex, None, _cfg(sent=1.0, tok=tok, seed=seed), detail_sink=details)
        per_sentence: dict[tuple, int] = {}
        for r in details:
            key = (r.doc_id, r.sentence_index)
            per_sentence[key] = per_sentence.get(key, 0) + r.length
        for sent in sents:
            budget = math.floor(tok * len(sent.tokens))
            assert per_sentence.get((sent.doc_id, sent.index), 0) <= budget
        assert report.realized_sentence_fraction <= 1.0
