"""CoNLL-U parsing and serialization with CorefUD entity decoding.

The Entity MISC attribute uses bracket notation: ``(e1-etype-1-`` opens a
mention, ``e1)`` closes it, ``(e1-...)`` does both on one token. Brackets of
different entities may nest or overlap; discontinuous mentions carry a part
suffix ``e1[2/3]``. Field layout inside an opening bracket follows the
``# global.Entity`` declaration of the document.
"""
from __future__ import annotations

import io
import logging
import re
from pathlib import Path
from typing import Iterable, TextIO

from .model import (Corpus, Document, Entity, Mention, Sentence, Token,
                    mention_head)

log = logging.getLogger(__name__)

DEFAULT_ENTITY_FIELDS = ("eid", "etype", "head", "other")

# One opening, self-closing, or closing bracket inside an Entity value.
_BRACKET = re.compile(r"\(([^()]+)\)|\(([^()]+)|([^()]+)\)")
_PART_SUFFIX = re.compile(r"^(.*)\[([0-9]+)/([0-9]+)\]$")
_RANGE = re.compile(r"^([1-9][0-9]*)-([1-9][0-9]*)$")
_EMPTY = re.compile(r"^([0-9]+)\.([1-9][0-9]*)$")


class ParseError(ValueError):
    """Malformed input data; carries file and line information."""

    def __init__(self, message: str, filename: str = "", line: int = 0):
        self.filename = filename
        self.line = line
        where = f"{filename or '<input>'}:{line}: " if line else ""
        super().__init__(f"{where}{message}")


def parse_conllu(source: str | TextIO | Path, dataset: str = "",
                 language: str = "", filename: str = "") -> Corpus:
    """Parse CoNLL-U text into a Corpus.

    Accepts a string, an open text stream, or a path. Comment lines, MISC
    attributes, and multiword-token range lines are preserved verbatim for
    round-tripping; entity annotations are decoded per document.
    """
    if isinstance(source, Path):
        filename = filename or str(source)
        with open(source, encoding="utf-8") as handle:
            return _parse_stream(handle, dataset, language, filename)
    if isinstance(source, str):
        return _parse_stream(io.StringIO(source), dataset, language, filename)
    return _parse_stream(source, dataset, language, filename)


def parse_file(path: str | Path, dataset: str = "", language: str = "") -> Corpus:
    return parse_conllu(Path(path), dataset=dataset, language=language)


def _parse_stream(stream: Iterable[str], dataset: str, language: str,
                  filename: str) -> Corpus:
    corpus = Corpus(dataset=dataset, language=language)
    doc_sentences: list[Sentence] = []
    doc_id: str | None = None
    sentence: Sentence | None = None
    prev_surface = 0
    prev_empty_minor = 0
    seen_sent_ids: set[str] = set()
    seen_doc_ids: set[str] = set()

    def flush_document() -> None:
        nonlocal doc_sentences, doc_id, seen_sent_ids
        if doc_sentences:
            number = len(corpus.documents) + 1
            resolved_id = doc_id or f"{dataset or 'doc'}#{number}"
            if resolved_id in seen_doc_ids:
                log.warning("%s: duplicated doc id %r",
                            filename or "<input>", resolved_id)
            seen_doc_ids.add(resolved_id)
            document = Document(
                doc_id=resolved_id,
                sentences=doc_sentences, language=language, dataset=dataset)
            _index_tokens(document)
            document.entities = resolve_entities(document, filename=filename)
            corpus.documents.append(document)
        doc_sentences = []
        doc_id = None
        seen_sent_ids = set()

    def flush_sentence(line_no: int) -> None:
        nonlocal sentence, prev_surface, prev_empty_minor
        if sentence is None:
            return
        if not sentence.tokens:
            raise ParseError("sentence without token lines", filename, line_no)
        _check_heads(sentence, prev_surface, filename, line_no)
        if sentence.sent_id is not None:
            if sentence.sent_id in seen_sent_ids:
                log.warning("%s: duplicated sent_id %r within document %r",
                            filename or "<input>", sentence.sent_id, doc_id)
            seen_sent_ids.add(sentence.sent_id)
        doc_sentences.append(sentence)
        sentence = None
        prev_surface = 0
        prev_empty_minor = 0

    line_no = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")  # CRLF input is non-canonical but parseable
        if line == "":
            flush_sentence(line_no)
            continue
        if line.startswith("#"):
            if sentence is not None and sentence.tokens:
                raise ParseError("comment line inside token block",
                                 filename, line_no)
            is_newdoc = line == "# newdoc" or line.startswith("# newdoc ")
            if is_newdoc and (doc_sentences or doc_id is not None):
                flush_document()
            if sentence is None:
                sentence = Sentence()
            sentence.comments.append(line)
            if is_newdoc:
                _, _, value = line.partition("=")
                doc_id = value.strip() if value else ""
            elif line.startswith("# sent_id"):
                sentence.sent_id = line.partition("=")[2].strip()
            elif line.startswith("# text ") or line.startswith("# text="):
                sentence.text = line.partition("=")[2].strip()
            continue

        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(
                f"expected 10 tab-separated columns, got {len(cols)}",
                filename, line_no)
        if sentence is None:
            sentence = Sentence()
        index = cols[0]
        if index.isdigit() and index.isascii() and index[0] != "0":
            if int(index) != prev_surface + 1:
                raise ParseError(
                    f"non-monotonic token index {index} after {prev_surface}",
                    filename, line_no)
            prev_surface += 1
            prev_empty_minor = 0
            sentence.tokens.append(_make_token(cols, False, filename, line_no))
        elif match := _RANGE.match(index):
            start, end = int(match.group(1)), int(match.group(2))
            if start != prev_surface + 1 or end < start:
                raise ParseError(f"non-monotonic token range {index}",
                                 filename, line_no)
            sentence.mwt_ranges.append((len(sentence.tokens), tuple(cols)))
        elif match := _EMPTY.match(index):
            major, minor = int(match.group(1)), int(match.group(2))
            if major != prev_surface or minor != prev_empty_minor + 1:
                raise ParseError(f"non-monotonic empty-node index {index}",
                                 filename, line_no)
            prev_empty_minor = minor
            sentence.tokens.append(_make_token(cols, True, filename, line_no))
        else:
            raise ParseError(f"malformed token index {index!r}",
                             filename, line_no)

    if sentence is not None:
        if sentence.tokens:
            flush_sentence(line_no)
        elif sentence.comments:
            raise ParseError("trailing comments without a sentence",
                             filename, line_no)
    flush_document()
    return corpus


def _make_token(cols: list[str], is_empty: bool, filename: str,
                line_no: int) -> Token:
    head_raw = cols[6]
    if head_raw == "_":
        head = None
    else:
        try:
            head = int(head_raw)
        except ValueError:
            raise ParseError(f"malformed HEAD value {head_raw!r}",
                             filename, line_no) from None
    return Token(index=cols[0], form=cols[1], lemma=cols[2], upos=cols[3],
                 xpos=cols[4], feats_raw=cols[5], head=head, deprel=cols[7],
                 deps_raw=cols[8], misc_raw=cols[9], is_empty=is_empty)


def _check_heads(sentence: Sentence, n: int, filename: str,
                 line_no: int) -> None:
    for token in sentence.tokens:
        if token.head is not None and not 0 <= token.head <= n:
            raise ParseError(
                f"token {token.index} head {token.head} refers to a "
                f"nonexistent token (sentence has {n})", filename, line_no)


def _index_tokens(document: Document) -> None:
    for sent_index, sentence in enumerate(document.sentences):
        for order, token in enumerate(sentence.tokens):
            token.sent_index = sent_index
            token.order = order


def entity_field_layout(document: Document) -> tuple[str, ...]:
    """Field names declared by ``# global.Entity``, defaulting to the
    CorefUD layout."""
    for sentence in document.sentences:
        for comment in sentence.comments:
            if comment.startswith("# global.Entity"):
                value = comment.partition("=")[2].strip()
                if value:
                    return tuple(value.split("-"))
    return DEFAULT_ENTITY_FIELDS


def resolve_entities(document: Document, filename: str = "") -> list[Entity]:
    """Decode Entity bracket annotations into entities with merged
    discontinuous mentions. Raises ParseError on unbalanced annotation."""
    layout = entity_field_layout(document)
    if not layout or layout[0] != "eid":
        raise ParseError(
            f"unsupported global.Entity layout {'-'.join(layout)!r} in "
            f"document {document.doc_id!r} (first field must be eid)",
            filename)
    n_extra = len(layout) - 1

    flat: list[Token] = [t for s in document.sentences for t in s.tokens]
    open_stacks: dict[str, list[tuple[int, dict[str, str]]]] = {}
    raw_parts: list[tuple[str, int | None, int | None, int, int, dict[str, str]]] = []

    for flat_pos, token in enumerate(flat):
        if "Entity=" not in token.misc_raw:
            continue
        value = token.misc_value("Entity")
        if not value:
            continue
        consumed = 0
        for match in _BRACKET.finditer(value):
            if match.start() != consumed:
                raise ParseError(
                    f"malformed Entity annotation {value!r} on token "
                    f"{token.index} (sentence {token.sent_index + 1})",
                    filename)
            consumed = match.end()
            both, opened, closed = match.groups()
            if both is not None or opened is not None:
                content = both if both is not None else opened
                fields = content.split("-", n_extra)
                bracket_id = fields[0]
                attributes = {name: fields[i + 1]
                              for i, name in enumerate(layout[1:])
                              if i + 1 < len(fields)}
                open_stacks.setdefault(bracket_id, []).append(
                    (flat_pos, attributes))
            if both is not None or closed is not None:
                bracket_id = closed if closed is not None else both.split("-", 1)[0]
                stack = open_stacks.get(bracket_id)
                if not stack:
                    raise ParseError(
                        f"Entity close {bracket_id!r} without matching open "
                        f"(sentence {token.sent_index + 1})", filename)
                start_pos, attributes = stack.pop()
                raw_parts.append(_part(bracket_id, start_pos, flat_pos,
                                       attributes, filename))
        if consumed != len(value):
            raise ParseError(
                f"malformed Entity annotation {value!r} on token "
                f"{token.index} (sentence {token.sent_index + 1})", filename)

    for bracket_id, stack in open_stacks.items():
        if stack:
            start_pos, _ = stack[-1]
            raise ParseError(
                f"unbalanced Entity bracket {bracket_id!r} opened in "
                f"sentence {flat[start_pos].sent_index + 1} never closed "
                f"before end of document {document.doc_id!r}", filename)

    return _assemble_entities(document, flat, raw_parts, filename)


def _part(bracket_id: str, start: int, end: int, attributes: dict[str, str],
          filename: str):
    match = _PART_SUFFIX.match(bracket_id)
    if match:
        base, part_i, part_n = match.group(1), int(match.group(2)), int(match.group(3))
        if not 1 <= part_i <= part_n:
            raise ParseError(f"invalid part index in {bracket_id!r}", filename)
        return (base, part_i, part_n, start, end, attributes)
    return (bracket_id, None, None, start, end, attributes)


def _assemble_entities(document: Document, flat: list[Token], raw_parts,
                       filename: str) -> list[Entity]:
    # Parts complete in close order; discontinuous parts must arrive 1..n.
    mentions: dict[str, list[Mention]] = {}
    pending: dict[str, tuple[int, int, list[Token], dict[str, str]]] = {}

    for eid, part_i, part_n, start, end, attributes in raw_parts:
        span_tokens = flat[start:end + 1]
        if part_i is None:
            mentions.setdefault(eid, []).append(
                Mention(entity_id=eid, span=tuple(span_tokens),
                        attributes=attributes))
            continue
        if part_i == 1:
            if eid in pending:
                raise ParseError(
                    f"unmatched part indices for entity {eid!r}: new mention "
                    f"starts while part {pending[eid][0]}/{pending[eid][1]} "
                    f"is expected", filename)
            pending[eid] = (2, part_n, list(span_tokens), attributes)
        else:
            state = pending.get(eid)
            if state is None or state[0] != part_i or state[1] != part_n:
                raise ParseError(
                    f"unmatched part indices for entity {eid!r}: got part "
                    f"{part_i}/{part_n}", filename)
            state[2].extend(span_tokens)
            pending[eid] = (part_i + 1, part_n, state[2], state[3])
        if part_i == part_n:
            _, total, tokens, attrs = pending.pop(eid)
            tokens.sort(key=lambda t: t.pos)
            mentions.setdefault(eid, []).append(
                Mention(entity_id=eid, span=tuple(tokens),
                        n_parts=total, attributes=attrs))

    for eid, state in pending.items():
        raise ParseError(
            f"unmatched part indices for entity {eid!r}: parts after "
            f"{state[0] - 1}/{state[1]} missing at end of document", filename)

    entities = []
    for eid, entity_mentions in mentions.items():
        entity = Entity(entity_id=eid)
        entity.mentions = sorted(entity_mentions, key=lambda m: (m.start, m.end))
        for mention in entity.mentions:
            mention.head = mention_head(mention, document)
        entities.append(entity)
    entities.sort(key=lambda e: (e.mentions[0].start, e.mentions[0].end,
                                 e.entity_id))
    return entities


def serialize(corpus: Corpus) -> str:
    """Render a corpus back to CoNLL-U text. Byte-identical to the input for
    files in canonical form (LF endings, no trailing whitespace, attributes
    in original order)."""
    chunks: list[str] = []
    for document in corpus.documents:
        for sentence in document.sentences:
            chunks.extend(sentence.lines())
            chunks.append("")
    if not chunks:
        return ""
    return "\n".join(chunks) + "\n"


def write_conllu(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(serialize(corpus), encoding="utf-8", newline="\n")
