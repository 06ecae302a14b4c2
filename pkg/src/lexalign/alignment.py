"""Orthogonal least-squares alignment between two concept spaces.

Given paired source/target vectors stacked column-wise as d x m matrices
X and Y, the best map W in the orthogonal group (minimizing ||WX - Y||_F)
is U V^T where U S V^T is the SVD of the d x d cross-covariance Y X^T.
Spaces store vectors row-wise, so the cross-covariance is computed as
Yr^T @ Xr; the fitted W acts on column vectors (rows map via x @ W^T).

The SVD backend is LAPACK through numpy. To make the factor pair
reproducible, each U column has its sign flipped so its largest-magnitude
entry is positive (the matching V column flips with it, which leaves
U V^T unchanged).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .concept_dataset import SeedDictionary
from .embedding_store import EmbeddingSpace, format_value
from .errors import ValidationError

FIT_ORTHOGONALITY_TOL = 1e-8
# 9-significant-digit serialization perturbs W^T W by O(sqrt(d) * 1e-9),
# so reloaded maps get a looser gate.
LOAD_ORTHOGONALITY_TOL = 1e-6
RANK_TOL = 1e-10


@dataclass(frozen=True)
class OrthogonalMap:
    """d x d orthogonal matrix plus provenance recorded at fit time."""

    matrix: np.ndarray
    source_language: str
    target_language: str
    seed_size: int
    preprocessing: str

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("map matrix must be square")
        if not np.isfinite(matrix).all():
            raise ValidationError("map matrix contains non-finite values")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def orthogonality_defect(matrix: np.ndarray) -> float:
    """max-norm of W^T W - I."""
    d = matrix.shape[0]
    return float(np.abs(matrix.T @ matrix - np.eye(d)).max())


def _canonical_svd(m: np.ndarray):
    try:
        u, s, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"SVD did not converge: {exc}") from exc
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]
    return u, s, vt


def procrustes_fit(
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    dictionary: SeedDictionary,
    roles: frozenset[str] | set[str] = frozenset({"train"}),
    preprocessing: str | None = None,
) -> OrthogonalMap:
    """Fit the orthogonal map sending the source space onto the target.

    Pairs are the dictionary entries with a selected role, in dictionary
    order; every selected id must exist in both spaces. Returns W with
    ||W^T W - I||_max <= 1e-8. When the cross-covariance is rank
    deficient the map is still returned but is not unique in the null
    directions; a warning reports how many singular values collapsed.
    """
    if source.dim != target.dim:
        raise ValidationError(
            f"dimension mismatch: source d={source.dim}, target d={target.dim}"
        )
    selected = dictionary.ids_with_roles(roles)
    if not selected:
        raise ValidationError("no dictionary entries match the selected roles")
    src_rows = np.stack([source.vector(sid) for sid in selected])
    tgt_rows = np.stack([target.vector(sid) for sid in selected])

    cross = tgt_rows.T @ src_rows
    u, s, vt = _canonical_svd(cross)
    collapsed = int(np.sum(s <= RANK_TOL * s[0]))
    if collapsed:
        warnings.warn(
            f"cross-covariance is rank deficient: {collapsed} of {len(s)} singular values "
            f"below {RANK_TOL:g} * sigma_max; map is not unique in those directions",
            RuntimeWarning,
            stacklevel=2,
        )
    w = u @ vt
    if orthogonality_defect(w) > FIT_ORTHOGONALITY_TOL:
        raise ValidationError("SVD backend failed the orthogonality contract")

    if preprocessing is None:
        preprocessing = "unit" if (source.normalized and target.normalized) else "none"
    return OrthogonalMap(
        matrix=w,
        source_language=source.language,
        target_language=target.language,
        seed_size=len(selected),
        preprocessing=preprocessing,
    )


def apply_map(mapping: OrthogonalMap, space: EmbeddingSpace) -> EmbeddingSpace:
    """Replace every vector x by W x; ids, forms, and norms are preserved."""
    if mapping.dim != space.dim:
        raise ValidationError(
            f"dimension mismatch: map d={mapping.dim}, space d={space.dim}"
        )
    return EmbeddingSpace(
        language=space.language,
        ids=space.ids,
        forms=space.forms,
        vectors=space.vectors @ mapping.matrix.T,
        normalized=space.normalized,
    )


def save_map(mapping: OrthogonalMap, path) -> None:
    """Text .omap format: "<d> <src> <tgt> <preprocessing>" then d rows of
    d space-separated values at 9 significant digits."""
    for tag in (mapping.source_language, mapping.target_language, mapping.preprocessing):
        if " " in tag or "\t" in tag or "\n" in tag or tag == "":
            raise ValidationError(f"map header field {tag!r} must be non-empty and contain no whitespace")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{mapping.dim} {mapping.source_language} {mapping.target_language} "
            f"{mapping.preprocessing}\n"
        )
        for row in mapping.matrix:
            fh.write(" ".join(format_value(v) for v in row) + "\n")


def load_map(path) -> OrthogonalMap:
    """Read an .omap file; seed_size is not serialized and loads as 0."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if text == "":
        raise ValidationError(f"{path}: empty file")
    if not text.endswith("\n"):
        raise ValidationError(f"{path}: missing trailing newline")
    lines = text.split("\n")[:-1]
    header = lines[0].split(" ")
    if len(header) != 4 or not header[0].isdigit():
        raise ValidationError(f"{path}: line 1: malformed header {lines[0]!r}")
    d = int(header[0])
    if d < 1:
        raise ValidationError(f"{path}: line 1: dimension must be positive")
    if len(lines) - 1 != d:
        raise ValidationError(f"{path}: expected {d} matrix rows, found {len(lines) - 1}")
    matrix = np.empty((d, d), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        tokens = line.split(" ")
        if len(tokens) != d:
            raise ValidationError(
                f"{path}: line {i + 2}: expected {d} values, found {len(tokens)}"
            )
        try:
            matrix[i] = [float(t) for t in tokens]
        except ValueError:
            raise ValidationError(f"{path}: line {i + 2}: invalid matrix value") from None
    if not np.isfinite(matrix).all():
        raise ValidationError(f"{path}: matrix contains non-finite values")
    if orthogonality_defect(matrix) > LOAD_ORTHOGONALITY_TOL:
        raise ValidationError(f"{path}: matrix is not orthogonal within {LOAD_ORTHOGONALITY_TOL:g}")
    return OrthogonalMap(
        matrix=matrix,
        source_language=header[1],
        target_language=header[2],
        seed_size=0,
        preprocessing=header[3],
    )
