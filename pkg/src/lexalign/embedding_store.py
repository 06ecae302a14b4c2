"""Concept-embedding spaces and their text serialization (.cvec).

File grammar (UTF-8, strict):

    line 1:      "<n> <d>"                          one ASCII space
    lines 2..n+1: "<id>\\t<form>\\t<v1> <v2> ... <vd>"  tabs between the three
                  fields, single spaces inside the vector block

Vector components are written as the shortest decimal string that parses
back to the value rounded at 9 significant digits, which keeps files
diffable and bounds the save/load error at <= 1e-6 for unit-scale data.
A trailing newline is required; any other whitespace is rejected with a
line-numbered error.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SCHEMES = ("unit", "center_then_unit", "none")

_HEADER_RE = re.compile(r"([0-9]+) ([0-9]+)$", re.ASCII)
_NUMBER_RE = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?$", re.ASCII)
_NONFINITE_RE = re.compile(r"[+-]?(?:nan|inf(?:inity)?)$", re.IGNORECASE | re.ASCII)


def format_value(x: float) -> str:
    """Shortest decimal string that round-trips the 9-significant-digit value."""
    target = float(f"{x:.9g}")
    for precision in range(1, 10):
        s = f"{x:.{precision}g}"
        if float(s) == target:
            return s
    return f"{x:.9g}"


@dataclass(frozen=True)
class EmbeddingSpace:
    """Immutable language-tagged vocabulary of concept vectors.

    `ids`, `forms` and the rows of `vectors` are parallel; ids are unique.
    The matrix is float64 and marked read-only so spaces can be shared
    across threads.
    """

    language: str
    ids: tuple[str, ...]
    forms: tuple[str, ...]
    vectors: np.ndarray
    normalized: bool = False
    _row_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValidationError("vectors must be a 2-D matrix")
        n, d = vectors.shape
        if n < 1 or d < 1:
            raise ValidationError(f"space must have n >= 1 and d >= 1, got {n}x{d}")
        if not (len(self.ids) == len(self.forms) == n):
            raise ValidationError(
                f"ids ({len(self.ids)}), forms ({len(self.forms)}) and rows ({n}) must agree"
            )
        if not np.isfinite(vectors).all():
            bad = int(np.argwhere(~np.isfinite(vectors).all(axis=1))[0][0])
            raise ValidationError(f"non-finite value in vector for concept '{self.ids[bad]}'")
        row_of = {}
        for i, concept_id in enumerate(self.ids):
            if concept_id in row_of:
                raise ValidationError(f"duplicate concept id '{concept_id}'")
            row_of[concept_id] = i
        if self.normalized:
            norms = np.linalg.norm(vectors, axis=1)
            if np.abs(norms - 1.0).max() > 1e-6:
                raise ValidationError("normalized flag set but rows are not unit-length")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "forms", tuple(self.forms))
        object.__setattr__(self, "_row_of", row_of)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, concept_id: str) -> bool:
        return concept_id in self._row_of

    def row_index(self, concept_id: str) -> int:
        try:
            return self._row_of[concept_id]
        except KeyError:
            raise ValidationError(
                f"concept '{concept_id}' not present in {self.language} space"
            ) from None

    def vector(self, concept_id: str) -> np.ndarray:
        return self.vectors[self.row_index(concept_id)]

    def subset(self, concept_ids) -> "EmbeddingSpace":
        """New space restricted to `concept_ids`, in the given order."""
        rows = [self.row_index(cid) for cid in concept_ids]
        if not rows:
            raise ValidationError("subset must keep at least one concept")
        return EmbeddingSpace(
            language=self.language,
            ids=tuple(self.ids[i] for i in rows),
            forms=tuple(self.forms[i] for i in rows),
            vectors=self.vectors[rows].copy(),
            normalized=self.normalized,
        )


def _parse_component(token: str, lineno: int) -> float:
    if _NUMBER_RE.match(token):
        return float(token)
    if _NONFINITE_RE.match(token):
        raise ValidationError(f"line {lineno}: non-finite value '{token}'")
    raise ValidationError(f"line {lineno}: invalid vector component '{token}'")


def load_space(path, expected_dim: int | None = None, language: str | None = None) -> EmbeddingSpace:
    """Parse a .cvec file; the language tag defaults to the file stem."""
    if language is None:
        name = str(path).rsplit("/", 1)[-1]
        language = name.rsplit(".", 1)[0]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if text == "":
        raise ValidationError(f"{path}: empty file")
    if not text.endswith("\n"):
        raise ValidationError(f"{path}: missing trailing newline")
    lines = text.split("\n")[:-1]

    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ValidationError(f"{path}: line 1: malformed header {lines[0]!r}")
    n, d = int(m.group(1)), int(m.group(2))
    if n < 1 or d < 1:
        raise ValidationError(f"{path}: line 1: n and d must be positive, got {n} {d}")
    if expected_dim is not None and d != expected_dim:
        raise ValidationError(f"{path}: dimension {d} does not match expected {expected_dim}")
    if len(lines) - 1 != n:
        raise ValidationError(f"{path}: expected {n} data rows, found {len(lines) - 1}")

    ids, forms = [], []
    matrix = np.empty((n, d), dtype=np.float64)
    seen = set()
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValidationError(
                f"{path}: line {lineno}: expected 3 tab-separated fields, found {len(fields)}"
            )
        concept_id, form, block = fields
        if concept_id == "":
            raise ValidationError(f"{path}: line {lineno}: empty concept id")
        if concept_id in seen:
            raise ValidationError(f"{path}: line {lineno}: duplicate concept id '{concept_id}'")
        seen.add(concept_id)
        tokens = block.split(" ")
        if len(tokens) != d:
            raise ValidationError(
                f"{path}: line {lineno}: expected {d} vector components, found {len(tokens)}"
            )
        for j, token in enumerate(tokens):
            value = _parse_component(token, lineno)
            if not math.isfinite(value):
                raise ValidationError(f"{path}: line {lineno}: non-finite value '{token}'")
            matrix[i, j] = value
        ids.append(concept_id)
        forms.append(form)
    return EmbeddingSpace(language=language, ids=tuple(ids), forms=tuple(forms), vectors=matrix)


def normalize_space(space: EmbeddingSpace, scheme: str = "unit") -> EmbeddingSpace:
    """Preprocess rows: unit, center_then_unit, or none (identity).

    Zero-norm rows (also after centering) are rejected with the offending
    concept id. unit normalization is idempotent to ~1e-16 per entry.
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown normalization scheme '{scheme}'")
    if scheme == "none":
        return space
    vectors = np.array(space.vectors, dtype=np.float64)
    if scheme == "center_then_unit":
        vectors -= vectors.mean(axis=0)
    norms = np.linalg.norm(vectors, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValidationError(f"zero-norm row for concept '{space.ids[int(zero[0])]}'")
    vectors /= norms[:, None]
    return EmbeddingSpace(
        language=space.language,
        ids=space.ids,
        forms=space.forms,
        vectors=vectors,
        normalized=True,
    )


def save_space(space: EmbeddingSpace, path) -> None:
    """Write a .cvec file; load_space(save_space(s)) preserves ids, forms,
    and every value to within 1e-6 absolute."""
    for i, form in enumerate(space.forms):
        if "\t" in form or "\n" in form or "\r" in form:
            raise ValidationError(f"form for concept '{space.ids[i]}' contains tab or newline")
    for concept_id in space.ids:
        if "\t" in concept_id or "\n" in concept_id or "\r" in concept_id:
            raise ValidationError(f"concept id {concept_id!r} contains tab or newline")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{space.n} {space.dim}\n")
        for concept_id, form, row in zip(space.ids, space.forms, space.vectors):
            block = " ".join(format_value(v) for v in row)
            fh.write(f"{concept_id}\t{form}\t{block}\n")
