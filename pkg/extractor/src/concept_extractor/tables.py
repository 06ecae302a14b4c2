"""Reader for the alignment toolkit's concept-table TSV.

Expected header: synset_id, depth, category, sense_count, frequency,
then one surface-form column per language code.
"""

from .errors import ExtractorError

_FIXED_COLUMNS = ["synset_id", "depth", "category", "sense_count", "frequency"]


def read_concepts(path, language: str) -> list[tuple[str, str]]:
    """(synset_id, surface form) pairs for one language column."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().split("\n") if line != ""]
    if not lines:
        raise ExtractorError(f"{path}: empty concept table")
    header = lines[0].split("\t")
    if header[: len(_FIXED_COLUMNS)] != _FIXED_COLUMNS:
        raise ExtractorError(f"{path}: unrecognized concept table header")
    languages = header[len(_FIXED_COLUMNS) :]
    if language not in languages:
        raise ExtractorError(
            f"{path}: no column for language '{language}' (have {', '.join(languages)})"
        )
    column = len(_FIXED_COLUMNS) + languages.index(language)
    concepts = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ExtractorError(f"{path}: line {lineno}: wrong field count")
        synset_id, form = fields[0], fields[column]
        if form == "":
            raise ExtractorError(f"{path}: line {lineno}: empty surface form for '{synset_id}'")
        concepts.append((synset_id, form))
    if not concepts:
        raise ExtractorError(f"{path}: concept table has no rows")
    return concepts
