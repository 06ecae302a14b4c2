"""Writer for the .cvec embedding text format.

Grammar: header "<n> <d>", then one "<id>\\t<form>\\t<v1> <v2> ... <vd>"
row per concept, components as the shortest decimal that round-trips the
value at 9 significant digits, trailing newline, no other whitespace.
Files are written atomically (temp file + rename) so consumers never see
a partial vocabulary.
"""

import math
import os

from .errors import ExtractorError


def format_value(x: float) -> str:
    target = float(f"{x:.9g}")
    for precision in range(1, 10):
        s = f"{x:.{precision}g}"
        if float(s) == target:
            return s
    return f"{x:.9g}"


def write_cvec(entries, path) -> None:
    """entries: iterable of (concept_id, surface_form, vector)."""
    entries = list(entries)
    if not entries:
        raise ExtractorError("refusing to write an empty embedding file")
    dim = len(entries[0][2])
    if dim < 1:
        raise ExtractorError("vectors must have at least one dimension")
    seen = set()
    for concept_id, form, vector in entries:
        if concept_id in seen:
            raise ExtractorError(f"duplicate concept id '{concept_id}'")
        seen.add(concept_id)
        if len(vector) != dim:
            raise ExtractorError(f"concept '{concept_id}': inconsistent vector length")
        if any(c in concept_id or c in form for c in ("\t", "\n", "\r")):
            raise ExtractorError(f"concept '{concept_id}': id/form contains tab or newline")
        if not all(math.isfinite(float(v)) for v in vector):
            raise ExtractorError(f"concept '{concept_id}': non-finite embedding value")

    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(entries)} {dim}\n")
        for concept_id, form, vector in entries:
            block = " ".join(format_value(float(v)) for v in vector)
            fh.write(f"{concept_id}\t{form}\t{block}\n")
    os.replace(tmp_path, path)
