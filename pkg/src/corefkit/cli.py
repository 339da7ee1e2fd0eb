"""Command-line interface: one executable, one subcommand per pipeline.

Exit codes: 0 success, 1 usage error, 2 data error. All reports are
deterministic: percentages with 2 decimals, scores with 6, fixed ordering.
Logs go to stderr only; the COREFUD_DATA environment variable supplies the
default corpus root.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from pathlib import Path

from . import analysis, errors, features, metrics, taxonomy
from .analysis import HEAD_RULES
from .conllu import ParseError, parse_file
from .corpora import DatasetFiles, discover_datasets, pair_datasets
from .reports import DatasetReport, merge_reports
from .taxonomy import MentionType

log = logging.getLogger("corefkit")

ANALYZE_STATS = ("head-position", "mention-types", "anaphor-antecedent",
                 "first-mention", "entity-size", "competing", "genre",
                 "semantic-distance")


class CliError(Exception):
    """Data-level failure; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _pct(value: Fraction | None) -> str:
    return "n/a" if value is None else f"{float(value):.2f}"


def _score(value: float) -> str:
    return f"{value:.6f}"


def _existing(path: str) -> Path:
    resolved = Path(path)
    if not resolved.exists():
        raise CliError(f"input path {resolved} does not exist")
    return resolved


def _input_root(args) -> Path:
    root = args.input or os.environ.get("COREFUD_DATA")
    if not root:
        raise CliError("no input given and COREFUD_DATA is not set")
    return _existing(root)


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(text, encoding="utf-8")
    else:
        header = f"## {name}\n" if getattr(args, "_multi", False) else ""
        sys.stdout.write(header + text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _map_files(worker, jobs_args: list, jobs: int) -> list:
    if jobs <= 1 or len(jobs_args) <= 1:
        return [worker(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, jobs_args))


# ---------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    root = _input_root(args)
    datasets = discover_datasets(root, args.split)
    if not datasets:
        raise CliError(f"no .conllu files under {root}")
    for dataset in datasets:
        for path in sorted(dataset.files):
            corpus = parse_file(path, dataset=dataset.name,
                                language=dataset.language)
            n_docs = len(corpus.documents)
            n_sents = sum(len(d.sentences) for d in corpus.documents)
            n_mentions = sum(len(e.mentions) for d in corpus.documents
                             for e in d.entities)
            print(f"ok\t{path}\tdocuments={n_docs}\tsentences={n_sents}"
                  f"\tmentions={n_mentions}")
    return 0


# ------------------------------------------------------------------- stats

def _stats_worker(task: tuple[str, str, str]) -> DatasetReport:
    path, name, language = task
    corpus = parse_file(Path(path), dataset=name, language=language)
    return analysis.corpus_statistics(corpus)


def cmd_stats(args) -> int:
    root = _input_root(args)
    datasets = discover_datasets(root, args.split)
    if not datasets:
        raise CliError(f"no .conllu files under {root}")
    tasks = [(str(path), d.name, d.language)
             for d in datasets for path in sorted(d.files)]
    results = _map_files(_stats_worker, tasks, args.jobs)
    by_dataset: dict[str, list[DatasetReport]] = {}
    for report in results:
        by_dataset.setdefault(report.dataset, []).append(report)
    reports = [merge_reports(parts, dataset=name)
               for name, parts in sorted(by_dataset.items())]

    keys = ("documents", "sentences_per_document", "tokens_per_sentence",
            "entities", "mentions", "mentions_per_entity")
    if args.format == "json":
        payload = [r.as_json() for r in reports]
        _emit(args, "stats.json", json.dumps(payload, indent=2,
                                             ensure_ascii=False) + "\n")
    else:
        lines = ["dataset\t" + "\t".join(keys)]
        for report in reports:
            lines.append(report.dataset + "\t" + "\t".join(
                report.row(k).rendered() for k in keys))
        _emit(args, "stats.tsv", "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------- analyze

def _analyze_worker(task: tuple[str, str, str], stats: tuple[str, ...],
                    head_rule: str, genre_pattern: str,
                    vectors_path: str | None) -> dict:
    path, name, language = task
    corpus = parse_file(Path(path), dataset=name, language=language)
    out: dict = {"_dataset": name}
    for stat in stats:
        if stat == "head-position":
            out[stat] = analysis.head_position_stats(corpus, head_rule)
        elif stat == "mention-types":
            out[stat] = analysis.mention_type_distribution(corpus, head_rule)
        elif stat == "first-mention":
            out[stat] = analysis.first_mention_stats(corpus, head_rule)
        elif stat == "entity-size":
            out[stat] = analysis.entity_size_stats(corpus)
        elif stat == "anaphor-antecedent":
            out[stat] = analysis.antecedent_category_counts(corpus, head_rule)
        elif stat == "competing":
            out[stat] = {
                kind.value: analysis.competing_antecedents(corpus, kind,
                                                           head_rule)
                for kind in (MentionType.OVERT_PRONOUN,
                             MentionType.ZERO_PRONOUN)}
        elif stat == "genre":
            out[stat] = analysis.genre_counts(corpus, genre_pattern)
        elif stat == "semantic-distance":
            vectors = analysis.load_mention_vectors(vectors_path)
            out[stat] = analysis.distance_moments(corpus, vectors)
    return out


def _merge_partials(parts: list[dict], stats: tuple[str, ...]) -> dict:
    merged: dict = {}
    for stat in stats:
        values = [p[stat] for p in parts]
        head = values[0]
        if isinstance(head, DatasetReport):
            merged[stat] = merge_reports(values, dataset=parts[0]["_dataset"])
        elif stat == "anaphor-antecedent":
            out = {k: sum((v[k] for v in values), start=type(head[k])())
                   for k in head}
            merged[stat] = out
        elif stat == "competing":
            merged[stat] = {k: sum((v[k] for v in values[1:]), start=head[k])
                            for k in head}
        elif stat == "genre":
            pronouns, tokens = head
            for other_p, other_t in values[1:]:
                pronouns = pronouns + other_p
                tokens = tokens + other_t
            merged[stat] = (pronouns, tokens)
        elif stat == "semantic-distance":
            merged[stat] = tuple(sum(column) for column in zip(*values))
    return merged


def _render_analysis(name: str, stat: str, result, fmt: str) -> str:
    if isinstance(result, DatasetReport):
        if fmt == "json":
            return json.dumps(result.as_json(), indent=2,
                              ensure_ascii=False) + "\n"
        return result.to_tsv()
    if stat == "anaphor-antecedent":
        rows = []
        for mtype in MentionType:
            ranking = sorted(result[mtype].items(),
                             key=lambda kv: (-kv[1], kv[0].name))
            for rank, (category, count) in enumerate(ranking, start=1):
                rows.append((mtype.value, rank, category.name, count))
        if fmt == "json":
            payload = [{"anaphor_type": t, "rank": r, "category": c,
                        "count": n} for t, r, c, n in rows]
            return json.dumps(payload, indent=2) + "\n"
        lines = ["anaphor_type\trank\tcategory\tcount"]
        lines += [f"{t}\t{r}\t{c}\t{n}" for t, r, c, n in rows]
        return "\n".join(lines) + "\n"
    if stat == "competing":
        rows = [(kind, s.n_pronouns, s.n_valid, s.valid_fraction,
                 s.mean_competitors) for kind, s in result.items()]
        if fmt == "json":
            payload = [{"kind": k, "pronouns": p, "valid": v,
                        "valid_pct": None if f is None else float(f * 100),
                        "mean_competitors": None if m is None else float(m)}
                       for k, p, v, f, m in rows]
            return json.dumps(payload, indent=2) + "\n"
        lines = ["kind\tpronouns\tvalid\tvalid_pct\tmean_competitors"]
        for k, p, v, f, m in rows:
            lines.append(f"{k}\t{p}\t{v}\t"
                         f"{_pct(None if f is None else f * 100)}\t"
                         f"{_pct(m)}")
        return "\n".join(lines) + "\n"
    if stat == "genre":
        rates = analysis.genre_rates(*result)
        if fmt == "json":
            payload = [{"genre": g, "pronouns_per_8000":
                        None if r is None else float(r)} for g, r in rates]
            return json.dumps(payload, indent=2) + "\n"
        lines = ["genre\tpronouns_per_8000"]
        lines += [f"{g}\t{_pct(r)}" for g, r in rates]
        return "\n".join(lines) + "\n"
    if stat == "semantic-distance":
        count, total, total_sq = result
        mean, variance = analysis.moments_to_mean_variance(count, total,
                                                           total_sq)
        if fmt == "json":
            return json.dumps({"pairs": count, "mean": mean,
                               "variance": variance}, indent=2) + "\n"
        return ("pairs\tmean\tvariance\n"
                f"{count}\t{_score(mean)}\t{_score(variance)}\n")
    raise CliError(f"cannot render statistic {stat!r}")


def _figure_rows(name: str, stat: str, result) -> list[tuple[str, str, str, str]]:
    rows = []
    if isinstance(result, DatasetReport):
        for row in result.rows:
            rows.append((stat, name, row.key, row.rendered()))
    elif stat == "anaphor-antecedent":
        for mtype in MentionType:
            ranking = sorted(result[mtype].items(),
                             key=lambda kv: (-kv[1], kv[0].name))
            for rank, (category, count) in enumerate(ranking, start=1):
                rows.append((stat, name, f"{mtype.value}:{category.name}",
                             str(count)))
    elif stat == "competing":
        for kind, s in result.items():
            rows.append((stat, name, f"{kind}:valid_pct",
                         _pct(None if s.valid_fraction is None
                              else s.valid_fraction * 100)))
            rows.append((stat, name, f"{kind}:mean_competitors",
                         _pct(s.mean_competitors)))
    elif stat == "genre":
        for genre, rate in analysis.genre_rates(*result):
            rows.append((stat, name, genre, _pct(rate)))
    elif stat == "semantic-distance":
        mean, variance = analysis.moments_to_mean_variance(*result)
        rows.append((stat, name, "mean", _score(mean)))
        rows.append((stat, name, "variance", _score(variance)))
    return rows


def cmd_analyze(args) -> int:
    root = _input_root(args)
    stats = tuple(args.stat) if args.stat else tuple(
        s for s in ANALYZE_STATS if s != "semantic-distance")
    if "semantic-distance" in stats and not args.vectors:
        raise CliError("--vectors is required for semantic-distance")
    datasets = discover_datasets(root, args.split)
    if not datasets:
        raise CliError(f"no .conllu files under {root}")
    groups: dict[str, list[DatasetFiles]] = {}
    for dataset in datasets:
        key = dataset.language if args.by_language else dataset.name
        groups.setdefault(key, []).append(dataset)

    args._multi = True
    figure_rows: list[tuple[str, str, str, str]] = []
    for group_name in sorted(groups):
        tasks = [(str(path), d.name, d.language)
                 for d in groups[group_name] for path in sorted(d.files)]
        worker = partial(_analyze_worker, stats=stats,
                         head_rule=args.head_rule,
                         genre_pattern=args.genre_pattern,
                         vectors_path=args.vectors)
        parts = _map_files(worker, tasks, args.jobs)
        merged = _merge_partials(parts, stats)
        for stat in stats:
            suffix = "json" if args.format == "json" else "tsv"
            _emit(args, f"{group_name}.{stat}.{suffix}",
                  _render_analysis(group_name, stat, merged[stat],
                                   args.format))
            if args.figure_data:
                figure_rows.extend(_figure_rows(group_name, stat,
                                                merged[stat]))
    if args.figure_data:
        lines = ["statistic\tdataset\tkey\tvalue"]
        lines += ["\t".join(row) for row in figure_rows]
        _emit(args, "figure_data.tsv", "\n".join(lines) + "\n")
    return 0


# ------------------------------------------------------------------- score

def _document_pairs(name: str, gold_files: DatasetFiles,
                    pred_files: DatasetFiles):
    gold = gold_files.load()
    pred = pred_files.load()
    pred_docs = {d.doc_id: d for d in pred.documents}
    if len(pred_docs) != len(pred.documents):
        raise CliError(f"{name}: duplicate doc ids in system output")
    pairs = []
    for document in gold.documents:
        match = pred_docs.pop(document.doc_id, None)
        if match is None:
            raise CliError(f"{name}: system output misses document "
                           f"{document.doc_id!r}")
        pairs.append((document, match))
    if pred_docs:
        extra = next(iter(pred_docs))
        raise CliError(f"{name}: system output has unknown document "
                       f"{extra!r}")
    return pairs


def cmd_score(args) -> int:
    paired = pair_datasets(_existing(args.gold), _existing(args.pred),
                           args.split)
    if not paired:
        raise CliError("no dataset names shared between --gold and --pred")
    rows = []
    for name, gold_files, pred_files in paired:
        pairs = _document_pairs(name, gold_files, pred_files)
        try:
            report = metrics.score_pairs(pairs, args.match, args.singletons)
        except metrics.AlignmentError as exc:
            raise CliError(str(exc)) from exc
        rows.append((name, report))
    macro = metrics.macro_average([r.conll_f1 for _, r in rows])

    if args.format == "json":
        payload = {"datasets": [
            {"dataset": name,
             "muc": vars(r.muc), "b_cubed": vars(r.b_cubed),
             "ceafe": vars(r.ceafe), "conll_f1": r.conll_f1}
            for name, r in rows],
            "macro_conll_f1": macro,
            "match": args.match, "singletons": args.singletons}
        _emit(args, "scores.json",
              json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
        return 0
    lines = ["dataset\tmuc_p\tmuc_r\tmuc_f1\tb3_p\tb3_r\tb3_f1"
             "\tceafe_p\tceafe_r\tceafe_f1\tconll_f1"]
    for name, r in rows:
        cells = [name]
        for scores in (r.muc, r.b_cubed, r.ceafe):
            cells += [_score(scores.precision), _score(scores.recall),
                      _score(scores.f1)]
        cells.append(_score(r.conll_f1))
        lines.append("\t".join(cells))
    lines.append("macro\t" + "\t".join([""] * 9) + "\t" + _score(macro))
    _emit(args, "scores.tsv", "\n".join(lines) + "\n")
    return 0


# ------------------------------------------------------------------ errors

_ERROR_COLUMNS = ("unresolved_pct", "two_mention_pct", "undetected_pct",
                  "short_pct", "premodified_pct", "mean_undetected_length")


def cmd_errors(args) -> int:
    paired = pair_datasets(_existing(args.gold), _existing(args.pred),
                           args.split)
    if not paired:
        raise CliError("no dataset names shared between --gold and --pred")
    want_detail = args.detail or bool(args.out)
    reports = []
    details = []
    for name, gold_files, pred_files in paired:
        pairs = _document_pairs(name, gold_files, pred_files)
        try:
            report = errors.analyze_errors(pairs, args.mode, args.definition,
                                           dataset=name)
            if want_detail:
                for gold_doc, pred_doc in pairs:
                    details.extend(errors.unresolved_entity_details(
                        gold_doc, pred_doc, args.mode, args.definition))
        except metrics.AlignmentError as exc:
            raise CliError(str(exc)) from exc
        reports.append(report)

    def cell(report, column):
        value = getattr(report, column)
        if column == "mean_undetected_length":
            return "n/a" if value is None else f"{float(value):.2f}"
        return _pct(value)

    if args.format == "json":
        payload = [dict(dataset=r.dataset,
                        **{c: (None if getattr(r, c) is None
                               else float(getattr(r, c)))
                           for c in _ERROR_COLUMNS},
                        undetected_types={t.value: n for t, n in sorted(
                            r.undetected.type_counts.items(),
                            key=lambda kv: kv[0].value)},
                        distance_buckets={b: r.missing_links.distance_buckets
                                          .get(b, 0)
                                          for b in errors.DISTANCE_BUCKETS})
                   for r in reports]
        _emit(args, "errors.json",
              json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        lines = ["dataset\t" + "\t".join(_ERROR_COLUMNS)]
        for report in reports:
            lines.append(report.dataset + "\t" + "\t".join(
                cell(report, c) for c in _ERROR_COLUMNS))
        averages = []
        for column in _ERROR_COLUMNS:
            values = [getattr(r, column) for r in reports
                      if getattr(r, column) is not None]
            averages.append(f"{sum(float(v) for v in values) / len(values):.2f}"
                            if values else "n/a")
        lines.append("average\t" + "\t".join(averages))
        _emit(args, "errors.tsv", "\n".join(lines) + "\n")
    if want_detail:
        _emit(args, "errors_detail.json",
              json.dumps(details, indent=2, ensure_ascii=False) + "\n")
    return 0


# -------------------------------------------------------- export-features

def cmd_export_features(args) -> int:
    root = _input_root(args)
    try:
        table = features.load_word_order_table(args.word_order)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    datasets = discover_datasets(root, args.split)
    if not datasets:
        raise CliError(f"no .conllu files under {root}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = "all_spans" if args.target == "spans" else "gold"
    for dataset in datasets:
        corpus = dataset.load()
        records_path = out_dir / f"{dataset.name}.features.jsonl"
        vocab_path = out_dir / f"{dataset.name}.vocab.tsv"
        try:
            with open(records_path, "w", encoding="utf-8") as records_out, \
                    open(vocab_path, "w", encoding="utf-8") as vocab_out:
                count = features.export_features(
                    corpus, table, records_out, vocab_out, target=target,
                    max_width=args.max_width, head_rule=args.head_rule)
        except features.WordOrderError as exc:
            records_path.unlink(missing_ok=True)
            vocab_path.unlink(missing_ok=True)
            raise CliError(str(exc)) from exc
        log.info("%s: %d records", dataset.name, count)
    return 0


# ---------------------------------------------------------------- taxonomy

def cmd_taxonomy(args) -> int:
    lines = ["category\tname\trelations"]
    for letter, display, relations in taxonomy.category_table():
        lines.append(f"{letter}\t{display}\t{relations}")
    _emit(args, "taxonomy.tsv", "\n".join(lines) + "\n")
    return 0


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corefkit",
                     description="Corpus analysis, scoring, error analysis "
                                 "and feature export for CorefUD data.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", nargs="?",
                           help="corpus file or directory "
                                "(default: $COREFUD_DATA)")
            p.add_argument("--split", choices=("train", "dev", "test"),
                           help="restrict to canonical release files "
                                "of one split")
        p.add_argument("--out", help="output directory (default: stdout)")
        p.add_argument("--format", choices=("tsv", "json"), default="tsv")

    p = sub.add_parser("validate", help="parse inputs and check invariants")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus size statistics per dataset")
    common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("analyze", help="gold-annotation statistics")
    common(p)
    p.add_argument("--stat", action="append", choices=ANALYZE_STATS,
                   help="statistic to compute (repeatable; default: all "
                        "except semantic-distance)")
    p.add_argument("--head-rule", choices=HEAD_RULES, default="annotated")
    p.add_argument("--by-language", action="store_true",
                   help="pool datasets of the same language")
    p.add_argument("--genre-pattern", default=analysis.DEFAULT_GENRE_PATTERN,
                   help="regex with one group extracting the genre "
                        "from doc ids")
    p.add_argument("--vectors", help="mention-vector TSV "
                                     "(for semantic-distance)")
    p.add_argument("--figure-data", action="store_true",
                   help="also emit plot-ready long-format TSV")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("score", help="MUC/B3/CEAFe/CoNLL F1 of system "
                                     "output against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--match", choices=metrics.MATCH_MODES, default="exact")
    p.add_argument("--singletons", choices=metrics.SINGLETON_POLICIES,
                   default="exclude")
    p.add_argument("--out")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("errors", help="error analysis of unresolved gold "
                                      "entities")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--mode", choices=metrics.MATCH_MODES, default="exact")
    p.add_argument("--definition", choices=errors.UNRESOLVED_DEFINITIONS,
                   default="links")
    p.add_argument("--detail", action="store_true",
                   help="also dump per-entity JSON diagnostics")
    p.add_argument("--out")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_errors)

    p = sub.add_parser("export-features",
                       help="emit span/document feature records")
    common(p)
    p.add_argument("--word-order", required=True,
                   help="two-column TSV: language, dominant word order")
    p.add_argument("--target", choices=("gold", "spans"), default="gold")
    p.add_argument("--max-width", type=int, default=10,
                   help="maximum candidate span width (spans target)")
    p.add_argument("--head-rule", choices=("syntactic", "annotated"),
                   default="syntactic")
    p.set_defaults(func=cmd_export_features)

    p = sub.add_parser("taxonomy",
                       help="dump the relation-to-category mapping")
    common(p, with_input=False)
    p.set_defaults(func=cmd_taxonomy)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "export-features" and not args.out:
        parser.error("export-features requires --out")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"corefkit: error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, analysis.MissingVectorError, features.WordOrderError,
            OSError) as exc:
        print(f"corefkit: error: {exc}", file=sys.stderr)
        return 2
