"""lexalign command line: one subcommand per pipeline stage.

Stages write inspectable artifacts (.cvec spaces, .omap maps, results
TSVs, report files), so partial pipelines can be cached and re-run.
All randomness comes from explicit --seed flags. Every run logs the
sha256 hash of the configuration it executed to stderr.

Exit codes: 0 success, 1 validation error, 2 IO error; errors are
printed to stderr as "error: <category>: <detail>".
"""

import argparse
import hashlib
import os
import sys

from . import __version__
from .alignment import apply_map, load_map, procrustes_fit, save_map
from .concept_dataset import (
    attach_annotations,
    build_table,
    category_stats,
    identical_form_ratio,
    read_annotations,
    read_dictionary,
    read_export,
    read_table,
    split_table,
    write_dictionary,
    write_table,
)
from .embedding_store import SCHEMES, load_space, normalize_space, save_space
from .errors import ValidationError
from .evaluation import parse_config, render_report, run_experiment, with_overrides
from .retrieval import DEFAULT_BLOCK_SIZE, DEFAULT_CSLS_K, retrieve, write_results


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through the error taxonomy."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _default_threads() -> int:
    env = os.environ.get("LEXALIGN_THREADS")
    if env is not None:
        if not env.isdigit() or int(env) < 1:
            raise ValidationError(f"LEXALIGN_THREADS must be a positive integer, got {env!r}")
        return int(env)
    return os.cpu_count() or 1


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _invocation_hash(subcommand: str, params: dict) -> str:
    lines = [f"subcommand = {subcommand}"]
    lines += [f"{key} = {params[key]}" for key in sorted(params)]
    return hashlib.sha256(("\n".join(lines) + "\n").encode("utf-8")).hexdigest()


def _build_parser() -> _Parser:
    parser = _Parser(prog="lexalign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lexalign {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser(
        "build-dataset",
        parents=[],
        help="intersect per-language WordNet exports into a concept table",
        description="Build a parallel concept table from normalized per-language "
        "exports (synset_id\\tdepth\\tcategory\\tlemma1|lemma2|...).",
    )
    p.add_argument(
        "--export",
        action="append",
        required=True,
        metavar="LANG=PATH",
        help="language export, repeatable (e.g. --export en=en.tsv --export fr=fr.tsv)",
    )
    p.add_argument(
        "--max-depth",
        type=int,
        default=5,
        help="drop synsets at depth <= this value; the root is depth 0 (default 5)",
    )
    p.add_argument("--annotations", help="optional sense-count/frequency TSV to merge")
    p.add_argument("--out", required=True, help="output table TSV")

    p = sub.add_parser("split", help="sample a train/test seed dictionary from a table")
    p.add_argument("--table", required=True)
    p.add_argument("--train-per-category", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dictionary TSV (synset_id\\trole)")

    p = sub.add_parser("align", help="fit an orthogonal map on seed-dictionary pairs")
    p.add_argument("--src", required=True, help="source .cvec")
    p.add_argument("--tgt", required=True, help="target .cvec")
    p.add_argument("--dict", required=True, dest="dictionary", help="seed dictionary TSV")
    p.add_argument("--roles", default="train", help="comma-separated roles to fit on (default train)")
    p.add_argument("--scheme", default="unit", choices=SCHEMES, help="preprocessing scheme")
    p.add_argument("--out", required=True, help="output .omap")

    p = sub.add_parser("map", help="apply an .omap to a space and write the mapped .cvec")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--src", required=True)
    p.add_argument(
        "--scheme",
        default=None,
        choices=SCHEMES,
        help="preprocessing before mapping (default: the scheme recorded in the map)",
    )
    p.add_argument("--out", required=True)

    p = sub.add_parser("retrieve", help="rank target candidates for every query concept")
    p.add_argument("--queries", required=True, help="query .cvec (typically mapped source)")
    p.add_argument("--targets", required=True, help="target .cvec")
    p.add_argument("--map", dest="map_path", help="optional .omap applied to queries first")
    p.add_argument("--method", default="csls", choices=("nn", "csls"))
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--csls-k", type=int, default=DEFAULT_CSLS_K)
    p.add_argument("--scheme", default="unit", choices=SCHEMES)
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="output results TSV")

    p = sub.add_parser("evaluate", help="run before/after/ceiling modes from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--format", default="json", choices=("json", "csv", "markdown"))
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("stats", help="dataset analyses over a concept table")
    p.add_argument("--table", required=True)
    p.add_argument("--forms-lang", help="report identical-form ratio for this language")
    p.add_argument("--forms-reference", default="en", help="reference language (default en)")
    p.add_argument("--format", default="text", choices=("text", "json"))
    return parser


def _cmd_build_dataset(args) -> int:
    exports = {}
    languages = []
    for item in args.export:
        if "=" not in item:
            raise ValidationError(f"--export expects LANG=PATH, got {item!r}")
        lang, path = item.split("=", 1)
        if lang in exports:
            raise ValidationError(f"language '{lang}' given twice")
        exports[lang] = read_export(path)
        languages.append(lang)
    table = build_table(exports, languages, max_filtered_depth=args.max_depth)
    if args.annotations:
        table = attach_annotations(table, read_annotations(args.annotations))
    write_table(table, args.out)
    _log(f"wrote {args.out} ({len(table)} concepts, {len(languages)} languages)")
    return 0


def _cmd_split(args) -> int:
    table = read_table(args.table)
    dictionary = split_table(table, args.train_per_category, args.seed)
    write_dictionary(dictionary, args.out)
    n_train = len(dictionary.ids_with_roles({"train"}))
    _log(f"wrote {args.out} ({n_train} train, {len(dictionary.entries) - n_train} test)")
    return 0


def _cmd_align(args) -> int:
    roles = {r.strip() for r in args.roles.split(",") if r.strip()}
    source = normalize_space(load_space(args.src), args.scheme)
    target = normalize_space(load_space(args.tgt), args.scheme)
    dictionary = read_dictionary(args.dictionary)
    fitted = procrustes_fit(source, target, dictionary, roles=roles, preprocessing=args.scheme)
    save_map(fitted, args.out)
    _log(f"wrote {args.out} (d={fitted.dim}, {fitted.seed_size} pairs)")
    return 0


def _cmd_map(args) -> int:
    mapping = load_map(args.map_path)
    scheme = args.scheme if args.scheme is not None else mapping.preprocessing
    space = normalize_space(load_space(args.src), scheme)
    save_space(apply_map(mapping, space), args.out)
    _log(f"wrote {args.out}")
    return 0


def _cmd_retrieve(args) -> int:
    threads = args.threads if args.threads is not None else _default_threads()
    queries = normalize_space(load_space(args.queries), args.scheme)
    targets = normalize_space(load_space(args.targets), args.scheme)
    if args.map_path:
        mapping = load_map(args.map_path)
        if mapping.preprocessing != args.scheme:
            _log(
                f"warning: map was fitted on '{mapping.preprocessing}' preprocessing, "
                f"retrieving with '{args.scheme}'"
            )
        queries = apply_map(mapping, queries)
    results = retrieve(
        queries,
        targets,
        args.k,
        method=args.method,
        csls_k=args.csls_k,
        block_size=args.block_size,
        threads=threads,
    )
    write_results(results, args.out)
    _log(f"wrote {args.out} ({len(results)} queries)")
    return 0


def _cmd_evaluate(args) -> int:
    config = parse_config(args.config)
    if args.threads is not None:
        config = with_overrides(config, threads=args.threads)
    elif os.environ.get("LEXALIGN_THREADS"):
        config = with_overrides(config, threads=_default_threads())
    report = run_experiment(config)
    text = render_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        _log(f"wrote {args.out} ({len(report.entries)} entries)")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_stats(args) -> int:
    table = read_table(args.table)
    stats = category_stats(table)
    payload = {
        "n_concepts": len(table),
        "languages": list(table.languages),
        "categories": {
            cat: {
                "n_records": s.n_records,
                "mean_senses": s.mean_senses,
                "median_senses": s.median_senses,
                "excluded_senses": s.excluded_senses,
                "mean_frequency": s.mean_frequency,
                "median_frequency": s.median_frequency,
                "excluded_frequency": s.excluded_frequency,
            }
            for cat, s in stats.items()
        },
    }
    if args.forms_lang:
        ratio = identical_form_ratio(table, args.forms_lang, args.forms_reference)
        payload["identical_form_ratio"] = {
            "language": args.forms_lang,
            "reference": args.forms_reference,
            "ratio": ratio,
        }
    if args.format == "json":
        import json

        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    else:
        print(f"concepts: {payload['n_concepts']}  languages: {', '.join(table.languages)}")
        for cat, s in stats.items():
            if s.empty:
                print(f"{cat}: empty")
                continue
            print(
                f"{cat}: n={s.n_records}"
                f"  senses mean/median={_fmt_stat(s.mean_senses)}/{_fmt_stat(s.median_senses)}"
                f" (excl {s.excluded_senses})"
                f"  frequency mean/median={_fmt_stat(s.mean_frequency)}/{_fmt_stat(s.median_frequency)}"
                f" (excl {s.excluded_frequency})"
            )
        if args.forms_lang:
            info = payload["identical_form_ratio"]
            print(
                f"identical forms {info['language']} vs {info['reference']}: {info['ratio']:.4f}"
            )
    return 0


def _fmt_stat(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


_DISPATCH = {
    "build-dataset": _cmd_build_dataset,
    "split": _cmd_split,
    "align": _cmd_align,
    "map": _cmd_map,
    "retrieve": _cmd_retrieve,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            raise ValidationError("a subcommand is required")
        if args.subcommand == "evaluate":
            chash = config_hash_for_evaluate(args)
        else:
            params = {k: v for k, v in vars(args).items() if k != "subcommand"}
            chash = _invocation_hash(args.subcommand, params)
        _log(f"config_hash: {chash}")
        return _DISPATCH[args.subcommand](args)
    except ValidationError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


def config_hash_for_evaluate(args) -> str:
    from .evaluation import config_hash

    return config_hash(parse_config(args.config))


if __name__ == "__main__":
    sys.exit(main())
