"""Span- and document-level feature records for model training.

Emits one JSON-lines record per span (gold mentions, or all contiguous
candidate spans up to a width cap) with the head-derived categorical
features and the document's language/word-order, plus a TSV vocabulary
sidecar listing every categorical value that occurs. Heads are syntactic;
the sidecar header records that choice.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, TextIO

from .model import Corpus, Document, Mention, Token, mention_head, span_key
from .taxonomy import (MentionType, UdCategory, base_relation,
                       classify_mention_type, ud_category)

WIDTH_BUCKETS = ("1", "2", "3", "4", "5-7", "8-15", "16-31", "32+")
WORD_ORDERS = ("SOV", "SVO", "VSO", "VOS", "OVS", "OSV", "NoDominant")

EXPORT_TARGETS = ("gold", "all_spans")

_FEATURE_NAMES = ("width_bucket", "head_upos", "head_deprel", "mention_type",
                  "ud_category", "language", "word_order")


def width_bucket(n_tokens: int) -> str:
    if n_tokens <= 4:
        return str(n_tokens)
    if n_tokens <= 7:
        return "5-7"
    if n_tokens <= 15:
        return "8-15"
    if n_tokens <= 31:
        return "16-31"
    return "32+"


@dataclass(frozen=True)
class SpanFeatures:
    width_bucket: str
    head_upos: str
    head_deprel: str
    mention_type: MentionType
    ud_category: UdCategory


@dataclass(frozen=True)
class DocFeatures:
    language: str
    word_order: str


class WordOrderError(KeyError):
    """A document's language has no word-order entry."""


def load_word_order_table(path: str | Path) -> dict[str, str]:
    """Read the two-column (language, order) TSV; '#' lines are comments."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"{path}:{line_no}: expected 2 columns, "
                                 f"got {len(fields)}")
            language, order = fields
            if language in table:
                raise ValueError(f"{path}:{line_no}: duplicate language "
                                 f"{language!r}")
            if order not in WORD_ORDERS:
                raise ValueError(f"{path}:{line_no}: unknown word order "
                                 f"{order!r}")
            table[language] = order
    return table


def _features_of_head(head: Token, n_tokens: int) -> SpanFeatures:
    deprel = head.effective_deprel()
    return SpanFeatures(
        width_bucket=width_bucket(n_tokens),
        head_upos=head.upos,
        head_deprel=base_relation(deprel) if deprel else "_",
        mention_type=classify_mention_type(head),
        ud_category=ud_category(deprel))


def extract_span_features(mention: Mention, document: Document,
                          head_rule: str = "syntactic") -> SpanFeatures:
    """Features of a gold mention, computed from its syntactic head (or the
    annotated head when head_rule='annotated')."""
    head = mention_head(mention, document,
                        prefer_annotated=head_rule == "annotated")
    return _features_of_head(head, len(mention.span))


def extract_doc_features(document: Document,
                         word_order_table: dict[str, str]) -> DocFeatures:
    order = word_order_table.get(document.language)
    if order is None:
        raise WordOrderError(
            f"no word order configured for language {document.language!r} "
            f"(document {document.doc_id!r})")
    return DocFeatures(language=document.language, word_order=order)


def _candidate_head(tokens: list[Token], document: Document) -> Token:
    mention = Mention(entity_id="", span=tuple(tokens))
    return mention_head(mention, document, prefer_annotated=False)


def iter_feature_records(corpus: Corpus, word_order_table: dict[str, str],
                         target: str = "gold", max_width: int = 10,
                         head_rule: str = "syntactic") -> Iterator[dict]:
    """Yield one record per span in deterministic document order."""
    if target not in EXPORT_TARGETS:
        raise ValueError(f"unknown export target {target!r}")
    for document in corpus.documents:
        doc_features = extract_doc_features(document, word_order_table)
        if target == "gold":
            for mention in document.mentions():
                features = extract_span_features(mention, document, head_rule)
                yield _record(document, mention.sent_index,
                              span_key(mention.span), features, doc_features,
                              mention.entity_id)
        else:
            for sent_index, sentence in enumerate(document.sentences):
                surface = sentence.surface_tokens()
                n = len(surface)
                for width in range(1, min(max_width, n) + 1):
                    for start in range(n - width + 1):
                        tokens = surface[start:start + width]
                        head = _candidate_head(tokens, document)
                        features = _features_of_head(head, width)
                        yield _record(document, sent_index,
                                      span_key(tuple(tokens)), features,
                                      doc_features, None)


def _record(document: Document, sent_index: int, span: str,
            features: SpanFeatures, doc_features: DocFeatures,
            entity_id: str | None) -> dict:
    record = {
        "doc_id": document.doc_id,
        "sent_index": sent_index,
        "span": span,
        "width_bucket": features.width_bucket,
        "head_upos": features.head_upos,
        "head_deprel": features.head_deprel,
        "mention_type": features.mention_type.value,
        "ud_category": features.ud_category.name,
        "language": doc_features.language,
        "word_order": doc_features.word_order,
    }
    if entity_id is not None:
        record["entity_id"] = entity_id
    return record


def export_features(corpus: Corpus, word_order_table: dict[str, str],
                    records_out: TextIO, vocab_out: TextIO,
                    target: str = "gold", max_width: int = 10,
                    head_rule: str = "syntactic") -> int:
    """Write the JSONL record stream and the vocabulary sidecar.

    Returns the number of records written. Output is a pure function of the
    inputs: two runs produce identical bytes.
    """
    vocabulary: dict[str, set[str]] = {name: set() for name in _FEATURE_NAMES}
    count = 0
    for record in iter_feature_records(corpus, word_order_table, target,
                                       max_width, head_rule):
        for name in _FEATURE_NAMES:
            vocabulary[name].add(record[name])
        records_out.write(json.dumps(record, ensure_ascii=False,
                                     separators=(",", ":")) + "\n")
        count += 1
    vocab_out.write("# categorical feature vocabulary; values observed in "
                    "the exported records\n")
    vocab_out.write(f"# target={target}"
                    + (f" max_width={max_width}" if target == "all_spans"
                       else "")
                    + f" head={head_rule}\n")
    if head_rule == "syntactic":
        vocab_out.write("# heads are syntactic (parent outside the span); "
                        "a trained scorer may substitute attention-derived "
                        "heads\n")
    vocab_out.write("feature\tvalue\n")
    for name in _FEATURE_NAMES:
        for value in sorted(vocabulary[name]):
            vocab_out.write(f"{name}\t{value}\n")
    return count
