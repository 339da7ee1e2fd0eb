from __future__ import annotations

import io
import json
import random

import pytest

from corefkit.features import (DocFeatures, SpanFeatures, WordOrderError,
                               export_features, extract_doc_features,
                               extract_span_features, iter_feature_records,
                               load_word_order_table, width_bucket)
from corefkit.taxonomy import MentionType, UdCategory
from conftest import DATA, make_corpus, tok

WORD_ORDER = {"xx": "SVO", "en": "SVO"}


def test_width_buckets():
    expected = {1: "1", 2: "2", 3: "3", 4: "4", 5: "5-7", 7: "5-7",
                8: "8-15", 15: "8-15", 16: "16-31", 31: "16-31",
                32: "32+", 100: "32+"}
    for n, bucket in expected.items():
        assert width_bucket(n) == bucket


def test_pronoun_subject_features():
    corpus = make_corpus([
        tok(1, "she", "PRON", 2, "nsubj", misc="Entity=(e1-x-1-)"),
        tok(2, "left", "VERB", 0, "root"),
    ])
    document = corpus.documents[0]
    (mention,) = document.entities[0].mentions
    features = extract_span_features(mention, document)
    assert features == SpanFeatures("1", "PRON", "nsubj",
                                    MentionType.OVERT_PRONOUN, UdCategory.S)


def test_six_token_nmod_mention_features():
    corpus = make_corpus([
        tok(1, "roof", "NOUN", 0, "root"),
        tok(2, "of", "ADP", 7, "case", misc="Entity=(e1-x-6-"),
        tok(3, "the", "DET", 7, "det"),
        tok(4, "very", "ADV", 5, "advmod"),
        tok(5, "old", "ADJ", 7, "amod"),
        tok(6, "stone", "NOUN", 7, "compound"),
        tok(7, "castle", "NOUN", 1, "nmod:poss", misc="Entity=e1)"),
    ])
    document = corpus.documents[0]
    (mention,) = document.entities[0].mentions
    features = extract_span_features(mention, document)
    assert features == SpanFeatures("5-7", "NOUN", "nmod",
                                    MentionType.NOMINAL_NOUN, UdCategory.N)


def test_zero_pronoun_features():
    corpus = make_corpus([
        tok(1, "Llegó", "VERB", 0, "root"),
        tok("1.1", "_", "PRON", "_", "_", deps="1:nsubj",
            misc="Entity=(e1-x-1-)"),
    ])
    document = corpus.documents[0]
    (mention,) = document.entities[0].mentions
    features = extract_span_features(mention, document)
    assert features == SpanFeatures("1", "PRON", "nsubj",
                                    MentionType.ZERO_PRONOUN, UdCategory.S)


def test_doc_features_lookup():
    corpus = make_corpus([tok(1, "x", "VERB", 0, "root")], language="en")
    document = corpus.documents[0]
    document.language = "en"
    assert extract_doc_features(document, WORD_ORDER) \
        == DocFeatures("en", "SVO")


def test_doc_features_missing_language_is_an_error():
    corpus = make_corpus([tok(1, "x", "VERB", 0, "root")])
    document = corpus.documents[0]
    document.language = "zz"
    with pytest.raises(WordOrderError, match="zz"):
        extract_doc_features(document, {})


def test_word_order_table_loading(tmp_path):
    table = load_word_order_table(DATA / "word_order.tsv")
    assert table["en"] == "SVO"
    assert table["hu"] == "NoDominant"

    duplicated = tmp_path / "dup.tsv"
    duplicated.write_text("en\tSVO\nen\tSOV\n", encoding="utf-8")
    with pytest.raises(ValueError, match="duplicate"):
        load_word_order_table(duplicated)

    invalid = tmp_path / "bad.tsv"
    invalid.write_text("en\tVERBY\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown word order"):
        load_word_order_table(invalid)


def test_gold_mode_one_record_per_mention():
    corpus = make_corpus([
        tok(1, "Rex", "PROPN", 2, "nsubj", misc="Entity=(e1-x-1-)"),
        tok(2, "ran", "VERB", 0, "root"),
    ], [
        tok(1, "He", "PRON", 2, "nsubj", misc="Entity=(e1-x-1-)"),
        tok(2, "hid", "VERB", 0, "root"),
    ])
    records = list(iter_feature_records(corpus, WORD_ORDER, "gold"))
    assert len(records) == 2
    assert [r["entity_id"] for r in records] == ["e1", "e1"]
    assert records[0]["span"] == "1"
    assert records[0]["word_order"] == "SVO"


def test_all_spans_on_four_token_sentence():
    corpus = make_corpus([
        tok(1, "a", "NOUN", 2, "nsubj"),
        tok(2, "b", "VERB", 0, "root"),
        tok(3, "c", "DET", 4, "det"),
        tok(4, "d", "NOUN", 2, "obj"),
    ])
    records = list(iter_feature_records(corpus, WORD_ORDER, "all_spans",
                                        max_width=3))
    assert len(records) == 9  # 4 + 3 + 2
    assert "entity_id" not in records[0]


def test_all_spans_counts_match_closed_form():
    rng = random.Random(13)
    for _ in range(25):
        n = rng.randint(1, 12)
        k = rng.randint(1, 6)
        block = [tok(i, f"w{i}", "NOUN", 0 if i == 1 else 1,
                     "root" if i == 1 else "obj")
                 for i in range(1, n + 1)]
        corpus = make_corpus(block)
        records = list(iter_feature_records(corpus, WORD_ORDER, "all_spans",
                                            max_width=k))
        expected = sum(n - w + 1 for w in range(1, min(k, n) + 1))
        assert len(records) == expected


def test_all_spans_skip_empty_nodes():
    corpus = make_corpus([
        tok(1, "Vino", "VERB", 0, "root"),
        tok("1.1", "_", "PRON", "_", "_", deps="1:nsubj"),
        tok(2, "ayer", "ADV", 1, "advmod"),
    ])
    records = list(iter_feature_records(corpus, WORD_ORDER, "all_spans",
                                        max_width=2))
    spans = [r["span"] for r in records]
    assert spans == ["1", "2", "1,2"]


def test_export_is_deterministic(basic_corpus):
    table = load_word_order_table(DATA / "word_order.tsv")

    def run():
        records = io.StringIO()
        vocab = io.StringIO()
        count = export_features(basic_corpus, table, records, vocab,
                                target="gold")
        return count, records.getvalue(), vocab.getvalue()

    first = run()
    second = run()
    assert first == second
    assert first[0] == 10  # fixture mention count


def test_vocabulary_is_exactly_the_used_values(basic_corpus):
    table = load_word_order_table(DATA / "word_order.tsv")
    records = io.StringIO()
    vocab = io.StringIO()
    export_features(basic_corpus, table, records, vocab, target="gold")
    parsed = [json.loads(line) for line in records.getvalue().splitlines()]
    used: dict[str, set[str]] = {}
    for record in parsed:
        for name in ("width_bucket", "head_upos", "head_deprel",
                     "mention_type", "ud_category", "language", "word_order"):
            used.setdefault(name, set()).add(record[name])
    listed: dict[str, set[str]] = {}
    for line in vocab.getvalue().splitlines():
        if line.startswith("#") or line == "feature\tvalue":
            continue
        name, value = line.split("\t")
        listed.setdefault(name, set()).add(value)
    assert listed == used


def test_word_order_error_names_language(basic_corpus):
    with pytest.raises(WordOrderError, match="es"):
        list(iter_feature_records(basic_corpus, {"en": "SVO"}, "gold"))
