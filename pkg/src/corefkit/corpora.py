"""Locating and loading dataset files from a CorefUD-style directory tree.

Release layouts keep one directory per dataset with files named like
``ca_ancora-corefud-train.conllu``; system-output dumps are often flat
directories of ``<dataset>.conllu`` files. Both are handled: files are
grouped by the dataset name embedded in the filename.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .conllu import parse_file
from .model import Corpus

_CANONICAL = re.compile(
    r"^(?P<dataset>[A-Za-z0-9_.]+?)-corefud-(?P<split>train|dev|test)$")


def dataset_of(path: Path) -> tuple[str, str | None]:
    """Dataset name and split encoded in a file name, if recognizable."""
    match = _CANONICAL.match(path.stem)
    if match:
        return match.group("dataset"), match.group("split")
    return path.stem, None


@dataclass
class DatasetFiles:
    name: str
    files: list[Path] = field(default_factory=list)

    @property
    def language(self) -> str:
        return self.name.split("_", 1)[0]

    def load(self) -> Corpus:
        corpus = Corpus(dataset=self.name, language=self.language)
        for path in sorted(self.files):
            part = parse_file(path, dataset=self.name,
                              language=self.language)
            corpus.documents.extend(part.documents)
        return corpus


def discover_datasets(root: str | Path,
                      split: str | None = None) -> list[DatasetFiles]:
    """Find .conllu files under root and group them by dataset name.

    With split set, only canonical ``*-corefud-<split>.conllu`` files are
    kept; otherwise every .conllu file counts.
    """
    root = Path(root)
    if root.is_file():
        name, _ = dataset_of(root)
        return [DatasetFiles(name, [root])]
    grouped: dict[str, DatasetFiles] = {}
    for path in sorted(root.rglob("*.conllu")):
        name, file_split = dataset_of(path)
        if split is not None and file_split != split:
            continue
        grouped.setdefault(name, DatasetFiles(name)).files.append(path)
    return [grouped[name] for name in sorted(grouped)]


def pair_datasets(gold_root: str | Path, pred_root: str | Path,
                  split: str | None = None,
                  ) -> list[tuple[str, DatasetFiles, DatasetFiles]]:
    """Match gold and system dataset groups by dataset name."""
    gold = {d.name: d for d in discover_datasets(gold_root, split)}
    pred = {d.name: d for d in discover_datasets(pred_root)}
    common = sorted(set(gold) & set(pred))
    return [(name, gold[name], pred[name]) for name in common]
