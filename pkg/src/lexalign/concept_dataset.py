"""Parallel concept tables, seed dictionaries, and dataset analyses.

Inputs are normalized WordNet-style exports, one TSV per language:

    synset_id\\tdepth\\tcategory\\tlemma1|lemma2|...

with lemmas in frequency order and category one of abstract/physical.
A concept table keeps only synsets shared by every requested language,
deeper than the depth cutoff, and deduplicated on the English first
lemma (lowest synset id wins). Surface form per language is the first
lemma of that language's export.

Table serialization is a header TSV:

    synset_id  depth  category  sense_count  frequency  <lang1>  <lang2> ...

(sense_count/frequency empty when unknown). Seed dictionaries are
header-less "synset_id\\trole" rows with role train or test.
"""

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .rng import SplitMix64, sample_indices

CATEGORIES = ("abstract", "physical")
ROLES = ("train", "test")

# Language whose first lemma defines duplicate concepts. Tables built
# without it skip deduplication.
DEDUP_LANGUAGE = "en"


@dataclass(frozen=True)
class ExportRow:
    synset_id: str
    depth: int
    category: str
    lemmas: tuple[str, ...]

    def __post_init__(self):
        if self.depth < 0:
            raise ValidationError(f"synset '{self.synset_id}': negative depth")
        if self.category not in CATEGORIES:
            raise ValidationError(
                f"synset '{self.synset_id}': category must be abstract or physical, got '{self.category}'"
            )
        if not self.lemmas or any(lemma == "" for lemma in self.lemmas):
            raise ValidationError(f"synset '{self.synset_id}': empty lemma list or lemma")


@dataclass(frozen=True)
class ConceptRecord:
    synset_id: str
    depth: int
    category: str
    forms: Mapping[str, str]
    sense_count: int | None = None
    frequency: int | None = None

    def __post_init__(self):
        if self.depth < 0:
            raise ValidationError(f"synset '{self.synset_id}': negative depth")
        if self.category not in CATEGORIES:
            raise ValidationError(
                f"synset '{self.synset_id}': category must be abstract or physical, got '{self.category}'"
            )
        if self.sense_count is not None and self.sense_count < 1:
            raise ValidationError(f"synset '{self.synset_id}': sense_count must be positive")
        if self.frequency is not None and self.frequency < 0:
            raise ValidationError(f"synset '{self.synset_id}': frequency must be non-negative")


@dataclass(frozen=True)
class ConceptTable:
    languages: tuple[str, ...]
    records: tuple[ConceptRecord, ...]

    def __post_init__(self):
        seen = set()
        for record in self.records:
            if record.synset_id in seen:
                raise ValidationError(f"duplicate synset id '{record.synset_id}' in table")
            seen.add(record.synset_id)
            for lang in self.languages:
                if lang not in record.forms:
                    raise ValidationError(
                        f"synset '{record.synset_id}' is missing a form for language '{lang}'"
                    )

    def __len__(self) -> int:
        return len(self.records)

    def record(self, synset_id: str) -> ConceptRecord:
        for record in self.records:
            if record.synset_id == synset_id:
                return record
        raise ValidationError(f"synset '{synset_id}' not in table")

    def by_category(self, category: str) -> list[ConceptRecord]:
        if category not in CATEGORIES:
            raise ValidationError(f"unknown category '{category}'")
        return [r for r in self.records if r.category == category]


@dataclass(frozen=True)
class SeedDictionary:
    entries: tuple[tuple[str, str], ...]
    source_language: str | None = None
    target_language: str | None = None

    def __post_init__(self):
        seen = set()
        for synset_id, role in self.entries:
            if role not in ROLES:
                raise ValidationError(f"synset '{synset_id}': unknown role '{role}'")
            if synset_id in seen:
                raise ValidationError(f"duplicate synset id '{synset_id}' in dictionary")
            seen.add(synset_id)

    def ids_with_roles(self, roles: Iterable[str]) -> list[str]:
        wanted = set(roles)
        unknown = wanted - set(ROLES)
        if unknown:
            raise ValidationError(f"unknown roles {sorted(unknown)}")
        return [sid for sid, role in self.entries if role in wanted]


def read_export(path) -> list[ExportRow]:
    rows = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValidationError(f"{path}: line {lineno}: expected 4 tab-separated fields")
            synset_id, depth_s, category, lemma_block = fields
            if synset_id in seen:
                raise ValidationError(f"{path}: line {lineno}: synset '{synset_id}' listed twice")
            seen.add(synset_id)
            if not depth_s.isdigit():
                raise ValidationError(f"{path}: line {lineno}: depth must be a non-negative integer")
            rows.append(
                ExportRow(
                    synset_id=synset_id,
                    depth=int(depth_s),
                    category=category,
                    lemmas=tuple(lemma_block.split("|")),
                )
            )
    return rows


def build_table(
    exports: Mapping[str, Sequence[ExportRow]],
    languages: Sequence[str],
    max_filtered_depth: int = 5,
) -> ConceptTable:
    """Intersect per-language exports into a parallel concept table.

    Keeps synsets present in every requested language with
    depth > max_filtered_depth (depth of the root is 0), then drops
    duplicates sharing an English first lemma, keeping the lowest
    synset id. Depth and category are read from the first listed
    language's export. Output is sorted by synset id, so it does not
    depend on the order exports are supplied in.
    """
    if not languages:
        raise ValidationError("at least one language is required")
    indexed: dict[str, dict[str, ExportRow]] = {}
    for lang in languages:
        if lang not in exports:
            raise ValidationError(f"missing language export for '{lang}'")
        index = {}
        for row in exports[lang]:
            if row.synset_id in index:
                raise ValidationError(f"synset '{row.synset_id}' listed twice in '{lang}' export")
            index[row.synset_id] = row
        indexed[lang] = index

    reference = indexed[languages[0]]
    shared = set(reference)
    for lang in languages[1:]:
        shared &= set(indexed[lang])

    kept = sorted(sid for sid in shared if reference[sid].depth > max_filtered_depth)

    if DEDUP_LANGUAGE in indexed:
        seen_lemmas = set()
        deduped = []
        for sid in kept:
            lemma = indexed[DEDUP_LANGUAGE][sid].lemmas[0]
            if lemma in seen_lemmas:
                continue
            seen_lemmas.add(lemma)
            deduped.append(sid)
        kept = deduped

    records = tuple(
        ConceptRecord(
            synset_id=sid,
            depth=reference[sid].depth,
            category=reference[sid].category,
            forms={lang: indexed[lang][sid].lemmas[0] for lang in languages},
        )
        for sid in kept
    )
    return ConceptTable(languages=tuple(languages), records=records)


def attach_annotations(
    table: ConceptTable, annotations: Mapping[str, tuple[int | None, int | None]]
) -> ConceptTable:
    """Return a table with sense_count/frequency set where provided."""
    records = []
    for record in table.records:
        if record.synset_id in annotations:
            senses, freq = annotations[record.synset_id]
            record = ConceptRecord(
                synset_id=record.synset_id,
                depth=record.depth,
                category=record.category,
                forms=record.forms,
                sense_count=senses,
                frequency=freq,
            )
        records.append(record)
    return ConceptTable(languages=table.languages, records=tuple(records))


def split_table(table: ConceptTable, train_per_category: int, rng_seed: int) -> SeedDictionary:
    """Sample train_per_category records per category into the train role.

    Sampling is uniform without replacement via the seeded splitmix64
    stream (abstract drawn first, then physical); everything else is
    test. Entries keep the table's record order.
    """
    if train_per_category < 0:
        raise ValidationError("train_per_category must be non-negative")
    positions: dict[str, list[int]] = {cat: [] for cat in CATEGORIES}
    for i, record in enumerate(table.records):
        positions[record.category].append(i)
    for cat in CATEGORIES:
        if len(positions[cat]) < train_per_category:
            raise ValidationError(
                f"insufficient records in category '{cat}': "
                f"need {train_per_category}, have {len(positions[cat])}"
            )
    rng = SplitMix64(rng_seed)
    train_rows: set[int] = set()
    for cat in CATEGORIES:
        pool = positions[cat]
        for local in sample_indices(len(pool), train_per_category, rng):
            train_rows.add(pool[local])
    entries = tuple(
        (record.synset_id, "train" if i in train_rows else "test")
        for i, record in enumerate(table.records)
    )
    return SeedDictionary(entries=entries)


def downsample_category(
    records: Sequence[ConceptRecord], target_count: int, rng_seed: int
) -> list[ConceptRecord]:
    """Uniform seeded sample without replacement, survivors in original order."""
    if target_count > len(records):
        raise ValidationError(
            f"cannot down-sample {len(records)} records to {target_count}"
        )
    chosen = sample_indices(len(records), target_count, SplitMix64(rng_seed))
    return [records[i] for i in chosen]


# Heuristic lexicographer-file -> category mapping. This is an
# approximation for bootstrapping exports when no curated labels exist;
# curated abstract/physical flags in the export always take precedence.
_LEXFILE_CATEGORY = {
    "noun.act": "abstract",
    "noun.attribute": "abstract",
    "noun.cognition": "abstract",
    "noun.communication": "abstract",
    "noun.event": "abstract",
    "noun.feeling": "abstract",
    "noun.group": "abstract",
    "noun.motive": "abstract",
    "noun.phenomenon": "abstract",
    "noun.possession": "abstract",
    "noun.process": "abstract",
    "noun.quantity": "abstract",
    "noun.relation": "abstract",
    "noun.shape": "abstract",
    "noun.state": "abstract",
    "noun.time": "abstract",
    "noun.Tops": "physical",
    "noun.animal": "physical",
    "noun.artifact": "physical",
    "noun.body": "physical",
    "noun.food": "physical",
    "noun.location": "physical",
    "noun.object": "physical",
    "noun.person": "physical",
    "noun.plant": "physical",
    "noun.substance": "physical",
}


def category_from_lexfile(lexfile: str) -> str:
    """Approximate abstract/physical label from a noun lexicographer file.

    Only a convenience for preparing exports; treat the output as a rough
    guess, not a curated classification.
    """
    try:
        return _LEXFILE_CATEGORY[lexfile]
    except KeyError:
        raise ValidationError(f"unknown noun lexicographer file '{lexfile}'") from None


def _fold(form: str) -> str:
    return unicodedata.normalize("NFC", form).casefold()


def identical_form_ratio(table: ConceptTable, lang: str, reference: str) -> float:
    """Fraction of records whose `lang` form equals the `reference` form
    (exact comparison after NFC normalization + case folding)."""
    for code in (lang, reference):
        if code not in table.languages:
            raise ValidationError(f"unknown language code '{code}'")
    if not table.records:
        raise ValidationError("cannot compute a ratio over an empty table")
    same = sum(1 for r in table.records if _fold(r.forms[lang]) == _fold(r.forms[reference]))
    return same / len(table.records)


@dataclass(frozen=True)
class CategoryStats:
    n_records: int
    mean_senses: float | None
    median_senses: int | None
    excluded_senses: int
    mean_frequency: float | None
    median_frequency: int | None
    excluded_frequency: int

    @property
    def empty(self) -> bool:
        return self.n_records == 0


def _mean_median(values: list[int]) -> tuple[float | None, int | None]:
    if not values:
        return None, None
    ordered = sorted(values)
    # median = lower middle for even counts
    return sum(values) / len(values), ordered[(len(ordered) - 1) // 2]


def category_stats(table: ConceptTable) -> dict[str, CategoryStats]:
    """Per-category sense/frequency means and medians.

    Records missing a field are excluded from that statistic and counted
    in the exclusion tally; an empty category yields None statistics.
    """
    out = {}
    for cat in CATEGORIES:
        records = table.by_category(cat)
        senses = [r.sense_count for r in records if r.sense_count is not None]
        freqs = [r.frequency for r in records if r.frequency is not None]
        mean_s, median_s = _mean_median(senses)
        mean_f, median_f = _mean_median(freqs)
        out[cat] = CategoryStats(
            n_records=len(records),
            mean_senses=mean_s,
            median_senses=median_s,
            excluded_senses=len(records) - len(senses),
            mean_frequency=mean_f,
            median_frequency=median_f,
            excluded_frequency=len(records) - len(freqs),
        )
    return out


def write_table(table: ConceptTable, path) -> None:
    columns = ["synset_id", "depth", "category", "sense_count", "frequency", *table.languages]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(columns) + "\n")
        for r in table.records:
            senses = "" if r.sense_count is None else str(r.sense_count)
            freq = "" if r.frequency is None else str(r.frequency)
            forms = [r.forms[lang] for lang in table.languages]
            for value in forms:
                if "\t" in value or "\n" in value:
                    raise ValidationError(
                        f"synset '{r.synset_id}': form contains tab or newline"
                    )
            fh.write("\t".join([r.synset_id, str(r.depth), r.category, senses, freq, *forms]) + "\n")


def read_table(path) -> ConceptTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise ValidationError(f"{path}: empty table file")
    header = lines[0].split("\t")
    fixed = ["synset_id", "depth", "category", "sense_count", "frequency"]
    if header[: len(fixed)] != fixed or len(header) == len(fixed):
        raise ValidationError(f"{path}: line 1: malformed table header")
    languages = tuple(header[len(fixed) :])
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(header)} fields, found {len(fields)}"
            )
        sid, depth_s, category, senses_s, freq_s = fields[:5]
        if not depth_s.isdigit():
            raise ValidationError(f"{path}: line {lineno}: depth must be a non-negative integer")
        records.append(
            ConceptRecord(
                synset_id=sid,
                depth=int(depth_s),
                category=category,
                forms=dict(zip(languages, fields[5:])),
                sense_count=int(senses_s) if senses_s else None,
                frequency=int(freq_s) if freq_s else None,
            )
        )
    return ConceptTable(languages=languages, records=tuple(records))


def read_annotations(path) -> dict[str, tuple[int | None, int | None]]:
    """Annotation TSV: synset_id\\tsense_count\\tfrequency (fields may be empty)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValidationError(f"{path}: line {lineno}: expected 3 tab-separated fields")
            sid, senses_s, freq_s = fields
            out[sid] = (int(senses_s) if senses_s else None, int(freq_s) if freq_s else None)
    return out


def write_dictionary(dictionary: SeedDictionary, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for synset_id, role in dictionary.entries:
            fh.write(f"{synset_id}\t{role}\n")


def read_dictionary(path) -> SeedDictionary:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValidationError(f"{path}: line {lineno}: expected 'synset_id\\trole'")
            entries.append((fields[0], fields[1]))
    return SeedDictionary(entries=tuple(entries))
