"""Error analysis of system output against gold coreference.

Starting from gold entities whose links the system completely missed
(recall zero), drill down: how many have exactly two mentions, how many of
those mentions were never detected, what the undetected mentions look like,
and what relates the two mentions when both were detected but left unlinked.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .metrics import align_mentions
from .model import Document, Entity, Mention, mention_head
from .taxonomy import MentionType, classify_mention_type, ud_category

UNRESOLVED_DEFINITIONS = ("links", "membership")
DISTANCE_BUCKETS = ("0", "1", "2", "3+")


def _head(mention: Mention, document: Document):
    if mention.head is None:
        mention.head = mention_head(mention, document)
    return mention.head


def _detected_gold_ids(gold: Document, pred: Document, mode: str,
                       alignment: dict[Mention, Mention] | None = None,
                       ) -> tuple[dict[int, Mention], dict[Mention, Mention]]:
    if alignment is None:
        alignment = align_mentions(gold, pred, mode)
    return {id(g): p for p, g in alignment.items()}, alignment


def unresolved_entities(gold: Document, pred: Document, mode: str = "exact",
                        definition: str = "links",
                        alignment: dict[Mention, Mention] | None = None,
                        ) -> list[Entity]:
    """Non-singleton gold entities for which the system recovered nothing.

    links (default): no system cluster contains matches of two or more of
    the entity's mentions. membership: no system cluster contains a match
    of any of them.
    """
    if definition not in UNRESOLVED_DEFINITIONS:
        raise ValueError(f"unknown definition {definition!r}")
    matched_by_gold, alignment = _detected_gold_ids(gold, pred, mode, alignment)
    cluster_of: dict[int, int] = {}
    for index, entity in enumerate(pred.entities):
        for mention in entity.mentions:
            cluster_of[id(mention)] = index
    unresolved = []
    for entity in gold.entities:
        if entity.is_singleton():
            continue
        hits: Counter[int] = Counter()
        for mention in entity.mentions:
            pred_mention = matched_by_gold.get(id(mention))
            if pred_mention is not None:
                hits[cluster_of[id(pred_mention)]] += 1
        if definition == "links":
            resolved = any(count >= 2 for count in hits.values())
        else:
            resolved = bool(hits)
        if not resolved:
            unresolved.append(entity)
    return unresolved


def two_mention_breakdown(unresolved: list[Entity],
                          ) -> tuple[Fraction | None, list[Entity]]:
    """Share and sublist of unresolved entities with exactly two mentions."""
    two = [e for e in unresolved if len(e.mentions) == 2]
    share = Fraction(len(two), len(unresolved)) if unresolved else None
    return share, two


def undetected_mentions(two_mention_entities: list[Entity], gold: Document,
                        pred: Document, mode: str = "exact",
                        alignment: dict[Mention, Mention] | None = None,
                        ) -> tuple[Fraction | None, list[Mention]]:
    """Mentions of the given entities that no system mention matched."""
    matched_by_gold, _ = _detected_gold_ids(gold, pred, mode, alignment)
    mentions = [m for e in two_mention_entities for m in e.mentions]
    undetected = [m for m in mentions if id(m) not in matched_by_gold]
    share = Fraction(len(undetected), len(mentions)) if mentions else None
    return share, undetected


@dataclass
class UndetectedProfile:
    """What the undetected mentions look like."""

    type_counts: Counter = field(default_factory=Counter)
    n_mentions: int = 0
    n_short: int = 0  # one or two tokens
    n_multi_token: int = 0
    n_premodified: int = 0
    total_length: int = 0

    @property
    def short_share(self) -> Fraction | None:
        return Fraction(self.n_short, self.n_mentions) if self.n_mentions else None

    @property
    def premodified_share(self) -> Fraction | None:
        if self.n_multi_token == 0:
            return None
        return Fraction(self.n_premodified, self.n_multi_token)

    @property
    def premodified_share_of_all(self) -> Fraction | None:
        if self.n_mentions == 0:
            return None
        return Fraction(self.n_premodified, self.n_mentions)

    @property
    def mean_length(self) -> Fraction | None:
        if self.n_mentions == 0:
            return None
        return Fraction(self.total_length, self.n_mentions)

    def __add__(self, other: "UndetectedProfile") -> "UndetectedProfile":
        return UndetectedProfile(
            self.type_counts + other.type_counts,
            self.n_mentions + other.n_mentions,
            self.n_short + other.n_short,
            self.n_multi_token + other.n_multi_token,
            self.n_premodified + other.n_premodified,
            self.total_length + other.total_length)


def undetected_profile(undetected: list[Mention],
                       document: Document) -> UndetectedProfile:
    """Type distribution, short-mention share, pre-modification share, and
    mean token length of undetected mentions."""
    profile = UndetectedProfile()
    for mention in undetected:
        head = _head(mention, document)
        profile.type_counts[classify_mention_type(head)] += 1
        profile.n_mentions += 1
        length = len(mention.span)
        profile.total_length += length
        if length <= 2:
            profile.n_short += 1
        if length > 1:
            profile.n_multi_token += 1
            if mention.span[-1] is head:
                profile.n_premodified += 1
    return profile


@dataclass
class MissingLinkProfile:
    """Relationship between the two mentions of unresolved entities whose
    mentions were both detected but never linked."""

    distance_buckets: Counter = field(default_factory=Counter)
    type_pairs: Counter = field(default_factory=Counter)
    antecedent_categories: dict[MentionType, Counter] = field(
        default_factory=dict)
    n_entities: int = 0

    def __add__(self, other: "MissingLinkProfile") -> "MissingLinkProfile":
        categories = {}
        for key in set(self.antecedent_categories) | set(other.antecedent_categories):
            categories[key] = (self.antecedent_categories.get(key, Counter())
                               + other.antecedent_categories.get(key, Counter()))
        return MissingLinkProfile(
            self.distance_buckets + other.distance_buckets,
            self.type_pairs + other.type_pairs,
            categories,
            self.n_entities + other.n_entities)


def _bucket(distance: int) -> str:
    return str(distance) if distance < 3 else "3+"


def missing_link_profile(entities: list[Entity],
                         document: Document) -> MissingLinkProfile:
    """Sentence distance, mention-type pairs, and the antecedent's relation
    category for two-mention entities with both mentions detected."""
    profile = MissingLinkProfile()
    for entity in entities:
        first, second = entity.mentions
        profile.n_entities += 1
        profile.distance_buckets[
            _bucket(second.sent_index - first.sent_index)] += 1
        first_type = classify_mention_type(_head(first, document))
        second_type = classify_mention_type(_head(second, document))
        profile.type_pairs[(first_type, second_type)] += 1
        if second_type in (MentionType.NOMINAL_NOUN,
                           MentionType.OVERT_PRONOUN):
            category = ud_category(_head(first, document).effective_deprel())
            profile.antecedent_categories.setdefault(
                second_type, Counter())[category] += 1
    return profile


@dataclass
class ErrorReport:
    """Aggregated error analysis for one dataset (one gold/system pair)."""

    dataset: str
    match_mode: str
    definition: str
    n_entities: int = 0  # non-singleton gold entities
    n_unresolved: int = 0
    n_two_mention: int = 0
    n_both_detected: int = 0
    undetected: UndetectedProfile = field(default_factory=UndetectedProfile)
    missing_links: MissingLinkProfile = field(
        default_factory=MissingLinkProfile)

    @property
    def unresolved_pct(self) -> Fraction | None:
        if self.n_entities == 0:
            return None
        return Fraction(self.n_unresolved, self.n_entities) * 100

    @property
    def two_mention_pct(self) -> Fraction | None:
        if self.n_unresolved == 0:
            return None
        return Fraction(self.n_two_mention, self.n_unresolved) * 100

    @property
    def undetected_pct(self) -> Fraction | None:
        if self.n_two_mention == 0:
            return None
        return Fraction(self.undetected.n_mentions,
                        2 * self.n_two_mention) * 100

    @property
    def short_pct(self) -> Fraction | None:
        share = self.undetected.short_share
        return None if share is None else share * 100

    @property
    def premodified_pct(self) -> Fraction | None:
        share = self.undetected.premodified_share
        return None if share is None else share * 100

    @property
    def mean_undetected_length(self) -> Fraction | None:
        return self.undetected.mean_length


def analyze_document(gold: Document, pred: Document, mode: str = "exact",
                     definition: str = "links") -> ErrorReport:
    """Run the full error-analysis pipeline on one document pair."""
    alignment = align_mentions(gold, pred, mode)
    matched_by_gold = {id(g): p for p, g in alignment.items()}
    unresolved = unresolved_entities(gold, pred, mode, definition, alignment)
    _, two_mention = two_mention_breakdown(unresolved)
    _, undetected = undetected_mentions(two_mention, gold, pred, mode,
                                        alignment)
    both_detected = [e for e in two_mention
                     if all(id(m) in matched_by_gold for m in e.mentions)]
    report = ErrorReport(
        dataset=gold.dataset, match_mode=mode, definition=definition,
        n_entities=sum(1 for e in gold.entities if not e.is_singleton()),
        n_unresolved=len(unresolved),
        n_two_mention=len(two_mention),
        n_both_detected=len(both_detected),
        undetected=undetected_profile(undetected, gold),
        missing_links=missing_link_profile(both_detected, gold))
    return report


def merge_error_reports(reports: Iterable[ErrorReport],
                        dataset: str = "") -> ErrorReport:
    reports = list(reports)
    if not reports:
        raise ValueError("no error reports to merge")
    merged = ErrorReport(dataset or reports[0].dataset,
                         reports[0].match_mode, reports[0].definition)
    for report in reports:
        merged.n_entities += report.n_entities
        merged.n_unresolved += report.n_unresolved
        merged.n_two_mention += report.n_two_mention
        merged.n_both_detected += report.n_both_detected
        merged.undetected = merged.undetected + report.undetected
        merged.missing_links = merged.missing_links + report.missing_links
    return merged


def analyze_errors(pairs: Iterable[tuple[Document, Document]],
                   mode: str = "exact", definition: str = "links",
                   dataset: str = "") -> ErrorReport:
    """Aggregate the error analysis over aligned document pairs."""
    return merge_error_reports(
        [analyze_document(g, p, mode, definition) for g, p in pairs],
        dataset=dataset)


def unresolved_entity_details(gold: Document, pred: Document,
                              mode: str = "exact",
                              definition: str = "links") -> list[dict]:
    """Per-entity diagnostic records for the JSON detail dump."""
    from .model import span_key

    alignment = align_mentions(gold, pred, mode)
    matched_by_gold = {id(g) for g in alignment.values()}
    details = []
    for entity in unresolved_entities(gold, pred, mode, definition, alignment):
        mentions = []
        n_undetected = 0
        for mention in entity.mentions:
            detected = id(mention) in matched_by_gold
            n_undetected += 0 if detected else 1
            mentions.append({
                "sent_index": mention.sent_index,
                "span": span_key(mention.span),
                "text": " ".join(t.form for t in mention.span),
                "type": classify_mention_type(_head(mention, gold)).value,
                "detected": detected,
            })
        if n_undetected:
            diagnosis = "undetected_mentions"
        else:
            diagnosis = "missing_link"
        details.append({
            "doc_id": gold.doc_id,
            "entity_id": entity.entity_id,
            "n_mentions": len(entity.mentions),
            "diagnosis": diagnosis,
            "mentions": mentions,
        })
    return details
