"""Toolkit for multilingual coreference corpora in the CorefUD flavor of
CoNLL-U: parsing, linguistic statistics, evaluation metrics, error analysis
of system output, and feature export."""

from .conllu import ParseError, parse_conllu, parse_file, resolve_entities, serialize
from .model import (Corpus, Document, Entity, Mention, Sentence, Token,
                    mention_head, mention_key, span_key)
from .taxonomy import MentionType, UdCategory, classify_mention_type, ud_category

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Document", "Entity", "Mention", "MentionType", "ParseError",
    "Sentence", "Token", "UdCategory", "__version__", "classify_mention_type",
    "mention_head", "mention_key", "parse_conllu", "parse_file",
    "resolve_entities", "serialize", "span_key", "ud_category",
]
