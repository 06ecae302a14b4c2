"""Precision@k scoring and the three-mode experiment runner.

Modes:
  before   retrieve straight from the preprocessed source space (no map)
  after    fit on train-role pairs only, map, then retrieve
  ceiling  fit on train and test pairs together (leaky upper bound)

Precision is evaluated over test-role queries (a flag widens the ceiling
mode to all queries); the gold target for a query is the entry with the
same concept id in the target space unless an explicit gold TSV is
given. Retrieval candidates are always the full target vocabulary, and
by default CSLS neighborhoods are computed over the full mapped source
vocabulary as well (query_pool = "test" restricts them).

Reports carry one entry per (mode, category, k). The canonical JSON
rendering is byte-stable for a fixed config: entries are emitted in
deterministic order, keys sorted, floats in shortest round-trip form,
and every entry embeds the sha256 hash of the canonicalized config.
"""

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, fields, replace

from . import retrieval as retrieval_mod
from .alignment import apply_map, procrustes_fit
from .concept_dataset import downsample_category, read_dictionary, read_table
from .embedding_store import load_space, normalize_space
from .errors import ValidationError

MODES = ("before", "after", "ceiling")
REPORT_CATEGORIES = ("all", "abstract", "physical", "physical_downsampled")
STRATEGIES = ("vanilla", "prompt")
DEFAULT_KS = (1, 5, 10, 30)


@dataclass(frozen=True)
class EvalEntry:
    source_language: str
    target_language: str
    strategy: str
    mode: str
    category: str
    k: int
    precision: float
    hits: int
    n_queries: int
    config_hash: str


@dataclass(frozen=True)
class EvalReport:
    entries: tuple[EvalEntry, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    source: str
    target: str
    dictionary: str
    table: str | None = None
    gold: str | None = None
    modes: tuple[str, ...] = MODES
    ks: tuple[int, ...] = DEFAULT_KS
    method: str = "csls"
    csls_k: int = 10
    preprocessing: str = "unit"
    seed: int = 0
    strategy: str = "vanilla"
    categories: tuple[str, ...] | None = None
    query_pool: str = "full"
    ceiling_queries: str = "test"
    # execution knobs; excluded from the config hash
    threads: int = 1
    block_size: int = 1024

    def __post_init__(self):
        for mode in self.modes:
            if mode not in MODES:
                raise ValidationError(f"unknown mode '{mode}'")
        if not self.modes:
            raise ValidationError("at least one mode is required")
        for k in self.ks:
            if k < 1:
                raise ValidationError(f"k must be >= 1, got {k}")
        if not self.ks:
            raise ValidationError("at least one k is required")
        if self.method not in retrieval_mod.METHODS:
            raise ValidationError(f"unknown retrieval method '{self.method}'")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy '{self.strategy}'")
        if self.query_pool not in ("full", "test"):
            raise ValidationError(f"query_pool must be 'full' or 'test', got '{self.query_pool}'")
        if self.ceiling_queries not in ("test", "all"):
            raise ValidationError(
                f"ceiling_queries must be 'test' or 'all', got '{self.ceiling_queries}'"
            )
        if self.categories is not None:
            for cat in self.categories:
                if cat not in REPORT_CATEGORIES:
                    raise ValidationError(f"unknown report category '{cat}'")
            if self.table is None and tuple(self.categories) != ("all",):
                raise ValidationError("category subsets other than 'all' require a concept table")


_HASH_EXCLUDED = ("threads", "block_size")


def canonical_config_text(config: ExperimentConfig) -> str:
    """Sorted key=value lines; the basis of the config hash."""
    pairs = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        if f.name in _HASH_EXCLUDED:
            continue
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        pairs.append(f"{f.name} = {value}")
    return "\n".join(pairs) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_config_text(config).encode("utf-8")).hexdigest()


_LIST_KEYS = ("modes", "ks", "categories")
_INT_KEYS = ("csls_k", "seed", "threads", "block_size")
_PATH_KEYS = ("source", "target", "dictionary", "table", "gold")


def parse_config(path) -> ExperimentConfig:
    """Read a key = value config file ('#' starts a comment).

    Relative paths are resolved against the config file's directory.
    """
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if key in raw:
                raise ValidationError(f"{path}: line {lineno}: duplicate key '{key}'")
            raw[key] = value

    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
    for required in ("source", "target", "dictionary"):
        if required not in raw:
            raise ValidationError(f"{path}: missing required key '{required}'")

    base = os.path.dirname(os.path.abspath(path))
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _LIST_KEYS:
            items = tuple(v.strip() for v in value.split(",") if v.strip())
            if key == "ks":
                if not all(item.isdigit() for item in items):
                    raise ValidationError(f"{path}: ks must be positive integers")
                kwargs[key] = tuple(int(item) for item in items)
            else:
                kwargs[key] = items
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ValidationError(f"{path}: key '{key}' must be an integer") from None
        elif key in _PATH_KEYS:
            kwargs[key] = value if os.path.isabs(value) else os.path.join(base, value)
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def _hits_at_k(results, gold: dict[str, str], k: int) -> int:
    hits = 0
    for result in results:
        if result.query_id not in gold:
            raise ValidationError(f"no gold entry for query '{result.query_id}'")
        wanted = gold[result.query_id]
        if any(tid == wanted for tid, _ in result.ranked[:k]):
            hits += 1
    return hits


def precision_at_k(results, gold: dict[str, str], k: int) -> float:
    """Fraction of queries whose gold target appears in the top k."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    results = list(results)
    if not results:
        raise ValidationError("cannot score an empty result list")
    return _hits_at_k(results, gold, k) / len(results)


def read_gold(path) -> dict[str, str]:
    """Gold TSV override: query_id\\ttarget_id."""
    gold = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            fields_ = line.split("\t")
            if len(fields_) != 2:
                raise ValidationError(f"{path}: line {lineno}: expected 'query_id\\ttarget_id'")
            if fields_[0] in gold:
                raise ValidationError(f"{path}: line {lineno}: duplicate query '{fields_[0]}'")
            gold[fields_[0]] = fields_[1]
    return gold


def run_experiment(config: ExperimentConfig) -> EvalReport:
    source = normalize_space(load_space(config.source), config.preprocessing)
    target = normalize_space(load_space(config.target), config.preprocessing)
    dictionary = read_dictionary(config.dictionary)

    test_ids = dictionary.ids_with_roles({"test"})
    if not test_ids:
        raise ValidationError("dictionary has no test-role entries")
    for sid in test_ids:
        source.row_index(sid)

    table = read_table(config.table) if config.table else None
    if config.categories is not None:
        categories = tuple(config.categories)
    elif table is not None:
        categories = REPORT_CATEGORIES
    else:
        categories = ("all",)

    category_of: dict[str, str] = {}
    if table is not None:
        known = {r.synset_id: r for r in table.records}
        for sid in dictionary.ids_with_roles({"train", "test"}):
            if sid not in known:
                raise ValidationError(f"dictionary concept '{sid}' not present in the concept table")
            category_of[sid] = known[sid].category

    gold = read_gold(config.gold) if config.gold else {sid: sid for sid in source.ids}
    chash = config_hash(config)
    k_retrieve = min(max(config.ks), target.n)

    entries: list[EvalEntry] = []
    seen_modes = set()
    for mode in config.modes:
        if mode in seen_modes:
            continue
        seen_modes.add(mode)

        if mode == "before":
            mapped = source
        else:
            roles = {"train"} if mode == "after" else {"train", "test"}
            fitted = procrustes_fit(
                source, target, dictionary, roles=roles, preprocessing=config.preprocessing
            )
            mapped = apply_map(fitted, source)

        eval_ids = list(test_ids)
        if mode == "ceiling" and config.ceiling_queries == "all":
            eval_ids = dictionary.ids_with_roles({"train", "test"})

        pool_ids = list(mapped.ids) if config.query_pool == "full" else eval_ids
        results = retrieval_mod.retrieve(
            mapped.subset(pool_ids),
            target,
            k_retrieve,
            method=config.method,
            csls_k=config.csls_k,
            block_size=config.block_size,
            threads=config.threads,
        )
        by_query = {r.query_id: r for r in results}

        for category in categories:
            if category == "all":
                ids = eval_ids
            elif category == "physical_downsampled":
                physical = [i for i in eval_ids if category_of[i] == "physical"]
                n_abstract = sum(1 for i in eval_ids if category_of[i] == "abstract")
                sampled = downsample_category(
                    [table.record(i) for i in physical], n_abstract, config.seed
                )
                ids = [r.synset_id for r in sampled]
            else:
                ids = [i for i in eval_ids if category_of[i] == category]
            if not ids:
                raise ValidationError(f"category '{category}' has no test queries")
            subset = [by_query[i] for i in ids]
            for k in sorted(config.ks):
                hits = _hits_at_k(subset, gold, k)
                entries.append(
                    EvalEntry(
                        source_language=source.language,
                        target_language=target.language,
                        strategy=config.strategy,
                        mode=mode,
                        category=category,
                        k=k,
                        precision=hits / len(subset),
                        hits=hits,
                        n_queries=len(subset),
                        config_hash=chash,
                    )
                )
    return EvalReport(entries=tuple(entries))


def render_report(report: EvalReport, fmt: str = "json") -> str:
    if fmt == "json":
        payload = {
            "entries": [
                {f.name: getattr(e, f.name) for f in fields(EvalEntry)} for e in report.entries
            ]
        }
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = [f.name for f in fields(EvalEntry)]
        writer.writerow(names)
        for e in report.entries:
            row = [getattr(e, name) for name in names]
            row[names.index("precision")] = f"{e.precision:.6f}"
            writer.writerow(row)
        return buf.getvalue()
    if fmt == "markdown":
        return _render_markdown(report)
    raise ValidationError(f"unknown report format '{fmt}'")


def _render_markdown(report: EvalReport) -> str:
    """One table per (pair, strategy); rows are k, columns mode/category."""
    groups: dict[tuple[str, str, str], list[EvalEntry]] = {}
    for e in report.entries:
        groups.setdefault((e.source_language, e.target_language, e.strategy), []).append(e)
    lines = []
    for (src, tgt, strategy), entries in groups.items():
        lines.append(f"### {src} -> {tgt} ({strategy})")
        lines.append("")
        columns = []
        for e in entries:
            col = (e.mode, e.category)
            if col not in columns:
                columns.append(col)
        ks = sorted({e.k for e in entries})
        cell = {(e.k, e.mode, e.category): e.precision for e in entries}
        lines.append("| k | " + " | ".join(f"{m}/{c}" for m, c in columns) + " |")
        lines.append("|---" * (len(columns) + 1) + "|")
        for k in ks:
            row = [str(k)]
            for mode, cat in columns:
                value = cell.get((k, mode, cat))
                row.append("" if value is None else f"{value:.4f}")
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def with_overrides(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    return replace(config, **kwargs)
