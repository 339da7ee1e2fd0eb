from __future__ import annotations

from pathlib import Path

import pytest

from corefkit import parse_conllu, parse_file

DATA = Path(__file__).parent / "data"


def tok(index, form, upos="NOUN", head=0, deprel="root", feats="_",
        misc="_", deps="_", lemma=None, xpos="_"):
    """One CoNLL-U token line."""
    return "\t".join((str(index), form, lemma if lemma is not None else form,
                      upos, xpos, feats, str(head), deprel, deps, misc))


def make_corpus(*sentence_blocks, dataset="toy", language="xx",
                doc_id="toy-doc1"):
    """Build a one-document corpus out of token-line blocks."""
    lines = [f"# newdoc id = {doc_id}",
             "# global.Entity = eid-etype-head-other"]
    for i, block in enumerate(sentence_blocks, start=1):
        lines.append(f"# sent_id = {doc_id}-s{i}")
        lines.extend(block)
        lines.append("")
    return parse_conllu("\n".join(lines) + "\n", dataset=dataset,
                        language=language)


def corpus_signature(corpus):
    """Structural digest used by round-trip equality tests."""
    return tuple(
        (doc.doc_id,
         tuple((tuple(s.comments),
                tuple(t.line() for t in s.tokens),
                tuple(s.mwt_ranges)) for s in doc.sentences),
         tuple((e.entity_id,
                tuple((tuple(t.index for t in m.span), m.sent_index,
                       m.n_parts, tuple(sorted(m.attributes.items())))
                      for m in e.mentions))
               for e in doc.entities))
        for doc in corpus.documents)


@pytest.fixture(scope="session")
def basic_corpus():
    return parse_file(DATA / "basic.conllu", dataset="fixture", language="es")


@pytest.fixture(scope="session")
def pair_docs():
    gold = parse_file(DATA / "score" / "gold" / "en_pairset-corefud-dev.conllu",
                      dataset="en_pairset", language="en")
    pred = parse_file(DATA / "score" / "pred" / "en_pairset.conllu",
                      dataset="en_pairset", language="en")
    return gold.documents[0], pred.documents[0]
