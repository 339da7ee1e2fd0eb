"""Document model for CoNLL-U treebanks with CorefUD entity annotations.

Tokens keep their raw column values so that serialization can reproduce the
input byte for byte; parsed views (feats, MISC items) are derived on demand.
"""
from __future__ import annotations

from dataclasses import dataclass, field


def parse_kv_items(raw: str) -> list[tuple[str, str | None]]:
    """Split a FEATS/MISC column into ordered (name, value) pairs.

    An item without '=' is kept with value None so it can be re-rendered
    verbatim. '_' means the column is empty.
    """
    if raw == "_" or raw == "":
        return []
    items: list[tuple[str, str | None]] = []
    for part in raw.split("|"):
        name, sep, value = part.partition("=")
        items.append((name, value if sep else None))
    return items


def render_kv_items(items: list[tuple[str, str | None]]) -> str:
    if not items:
        return "_"
    return "|".join(k if v is None else f"{k}={v}" for k, v in items)


@dataclass(eq=False, slots=True)
class Token:
    """One CoNLL-U node: a surface token or an empty node (index i.j)."""

    index: str
    form: str
    lemma: str
    upos: str
    xpos: str
    feats_raw: str
    head: int | None
    deprel: str
    deps_raw: str
    misc_raw: str
    is_empty: bool
    sent_index: int = -1
    order: int = -1
    _feats: dict[str, str | None] | None = field(default=None, repr=False)

    @property
    def pos(self) -> tuple[int, int]:
        """Document-wide position: (sentence index, position in sentence)."""
        return (self.sent_index, self.order)

    @property
    def feats(self) -> dict[str, str | None]:
        if self._feats is None:
            self._feats = dict(parse_kv_items(self.feats_raw))
        return self._feats

    def misc_items(self) -> list[tuple[str, str | None]]:
        return parse_kv_items(self.misc_raw)

    def misc_value(self, name: str) -> str | None:
        for key, value in self.misc_items():
            if key == name:
                return value
        return None

    def deps_pairs(self) -> list[tuple[str, str]]:
        """Enhanced-dependency (head id, relation) pairs from DEPS."""
        if self.deps_raw in ("_", ""):
            return []
        pairs = []
        for part in self.deps_raw.split("|"):
            head_id, _, rel = part.partition(":")
            pairs.append((head_id, rel))
        return pairs

    def parent_id(self) -> str | None:
        """Id of the governing node: basic head for surface tokens, first
        enhanced head for empty nodes. None for the root or when unknown."""
        if self.is_empty:
            pairs = self.deps_pairs()
            if pairs and pairs[0][0] != "0":
                return pairs[0][0]
            return None
        if self.head is None or self.head == 0:
            return None
        return str(self.head)

    def effective_deprel(self) -> str | None:
        """Relation label used by the analyses: DEPREL for surface tokens,
        the first enhanced relation for empty nodes."""
        if self.is_empty:
            pairs = self.deps_pairs()
            return pairs[0][1] if pairs else None
        return self.deprel if self.deprel not in ("_", "") else None

    def line(self) -> str:
        head = "_" if self.head is None else str(self.head)
        return "\t".join((self.index, self.form, self.lemma, self.upos,
                          self.xpos, self.feats_raw, head, self.deprel,
                          self.deps_raw, self.misc_raw))


@dataclass(eq=False, slots=True)
class Sentence:
    """Comment lines plus nodes in file order; multiword-token range lines
    are kept aside with the token offset they precede."""

    comments: list[str] = field(default_factory=list)
    tokens: list[Token] = field(default_factory=list)
    mwt_ranges: list[tuple[int, tuple[str, ...]]] = field(default_factory=list)
    sent_id: str | None = None
    text: str | None = None
    _by_index: dict[str, Token] | None = field(default=None, repr=False)

    def token(self, index: str) -> Token | None:
        if self._by_index is None:
            self._by_index = {t.index: t for t in self.tokens}
        return self._by_index.get(index)

    def surface_tokens(self) -> list[Token]:
        return [t for t in self.tokens if not t.is_empty]

    def n_surface(self) -> int:
        return sum(1 for t in self.tokens if not t.is_empty)

    def lines(self) -> list[str]:
        out = list(self.comments)
        ranges = dict()
        for offset, cols in self.mwt_ranges:
            ranges.setdefault(offset, []).append("\t".join(cols))
        for i, token in enumerate(self.tokens):
            out.extend(ranges.get(i, ()))
            out.append(token.line())
        out.extend(ranges.get(len(self.tokens), ()))
        return out


@dataclass(eq=False, slots=True)
class Mention:
    """A coreference span, possibly discontinuous, possibly an empty node."""

    entity_id: str
    span: tuple[Token, ...]
    n_parts: int = 1
    attributes: dict[str, str] = field(default_factory=dict)
    head: Token | None = None

    @property
    def start(self) -> tuple[int, int]:
        return self.span[0].pos

    @property
    def end(self) -> tuple[int, int]:
        return self.span[-1].pos

    @property
    def sent_index(self) -> int:
        return self.span[0].sent_index

    def __len__(self) -> int:
        return len(self.span)


@dataclass(eq=False, slots=True)
class Entity:
    """All mentions of one coreference cluster, in document order."""

    entity_id: str
    mentions: list[Mention] = field(default_factory=list)

    def is_singleton(self) -> bool:
        return len(self.mentions) == 1


@dataclass(eq=False, slots=True)
class Document:
    doc_id: str
    sentences: list[Sentence] = field(default_factory=list)
    entities: list[Entity] = field(default_factory=list)
    genre: str | None = None
    language: str = ""
    dataset: str = ""

    def mentions(self) -> list[Mention]:
        out = [m for e in self.entities for m in e.mentions]
        out.sort(key=lambda m: (m.start, m.end))
        return out


@dataclass(eq=False, slots=True)
class Corpus:
    documents: list[Document] = field(default_factory=list)
    dataset: str = ""
    language: str = ""


def _tree_depth(token: Token, sentence: Sentence) -> int:
    """Number of head-chain hops to the root; cycles count as very deep."""
    depth = 0
    seen = {id(token)}
    current = token
    while True:
        parent_id = current.parent_id()
        if parent_id is None:
            return depth
        parent = sentence.token(parent_id)
        if parent is None or id(parent) in seen:
            return depth + len(sentence.tokens)
        seen.add(id(parent))
        current = parent
        depth += 1


def mention_head(mention: Mention, document: Document,
                 prefer_annotated: bool = True) -> Token:
    """Resolve the head token of a mention.

    An explicit head attribute from the entity annotation (1-based position
    within the span) wins when present and ``prefer_annotated`` is set.
    Otherwise: the span token whose syntactic parent lies outside the span;
    ties resolved by tree depth (closest to root), then leftmost; degenerate
    spans fall back to the leftmost token.
    """
    span = mention.span
    if len(span) == 1:
        return span[0]
    if prefer_annotated:
        annotated = mention.attributes.get("head")
        if annotated is not None and annotated.isdigit():
            i = int(annotated)
            if 1 <= i <= len(span):
                return span[i - 1]
    in_span = {id(t) for t in span}
    candidates = []
    for token in span:
        sentence = document.sentences[token.sent_index]
        parent_id = token.parent_id()
        parent = sentence.token(parent_id) if parent_id is not None else None
        if parent is None or id(parent) not in in_span:
            candidates.append((_tree_depth(token, sentence), token.pos, token))
    if not candidates:
        return span[0]
    return min(candidates, key=lambda c: (c[0], c[1]))[2]


def span_parts(span: tuple[Token, ...]) -> list[list[Token]]:
    """Split a span into maximal contiguous runs.

    Adjacency means consecutive positions in the sentence node list, or
    consecutive surface indices (so candidate spans that skip an interleaved
    empty node still form one run).
    """
    parts: list[list[Token]] = []
    for token in span:
        if parts:
            prev = parts[-1][-1]
            if token.sent_index == prev.sent_index and (
                    token.order == prev.order + 1
                    or (not token.is_empty and not prev.is_empty
                        and int(token.index) == int(prev.index) + 1)):
                parts[-1].append(token)
                continue
        parts.append([token])
    return parts


def span_key(span: tuple[Token, ...]) -> str:
    """Deterministic text key for a span: indices comma-joined within a
    contiguous run, runs joined by '+'."""
    return "+".join(",".join(t.index for t in part) for part in span_parts(span))


def mention_key(mention: Mention, doc_id: str) -> tuple[str, int, str]:
    """Key used to address a mention from outside (vector files, exports)."""
    return (doc_id, mention.sent_index, span_key(mention.span))
