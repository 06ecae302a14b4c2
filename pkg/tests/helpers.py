"""Shared fixture builders for the test suite."""

import numpy as np

from lexalign.concept_dataset import (
    ConceptRecord,
    ConceptTable,
    SeedDictionary,
    write_dictionary,
    write_table,
)
from lexalign.embedding_store import EmbeddingSpace, save_space
from lexalign.retrieval import RetrievalResult


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# independent retrieval oracles: plain loops, no blocking, no shared code
# with the library implementation
# ---------------------------------------------------------------------------

def cos(a, b):
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def oracle_cosine(queries, targets, k):
    out = []
    for qi in range(queries.n):
        scored = [(cos(queries.vectors[qi], targets.vectors[ti]), ti) for ti in range(targets.n)]
        scored.sort(key=lambda st: (-st[0], st[1]))
        out.append([(targets.ids[ti], s) for s, ti in scored[:k]])
    return out


def oracle_csls(queries, targets, k, csls_k):
    sims = [
        [cos(queries.vectors[qi], targets.vectors[ti]) for ti in range(targets.n)]
        for qi in range(queries.n)
    ]
    r_t = [sum(sorted(row, reverse=True)[:csls_k]) / csls_k for row in sims]
    r_s = []
    for ti in range(targets.n):
        column = [sims[qi][ti] for qi in range(queries.n)]
        r_s.append(sum(sorted(column, reverse=True)[:csls_k]) / csls_k)
    out = []
    for qi in range(queries.n):
        scored = [(2.0 * sims[qi][ti] - r_t[qi] - r_s[ti], ti) for ti in range(targets.n)]
        scored.sort(key=lambda st: (-st[0], st[1]))
        out.append([(targets.ids[ti], s) for s, ti in scored[:k]])
    return out


def planted_dataset(
    dirpath,
    n_concepts=40,
    d=16,
    n_train=24,
    n_distractors=30,
    seed=0,
    with_table=False,
):
    """Write a synthetic bilingual dataset under `dirpath`.

    Source vectors are random; target vectors are a planted rotation of
    them plus unrelated distractor entries, so a correctly fitted map
    sends every source concept exactly onto its gold target.
    Returns (source_path, target_path, dict_path, table_path|None).
    """
    rng = np.random.default_rng(seed)
    ids = tuple(f"{i:08d}-n" for i in range(n_concepts))
    x = rng.normal(size=(n_concepts, d))
    rotation = random_orthogonal(rng, d)
    y = x @ rotation.T
    extra_ids = tuple(f"dist{i:04d}-n" for i in range(n_distractors))
    extra = rng.normal(size=(n_distractors, d))

    source = EmbeddingSpace("src", ids, ids, x)
    target = EmbeddingSpace(
        "tgt", ids + extra_ids, ids + extra_ids, np.vstack([y, extra])
    )
    src_path = dirpath / "src.cvec"
    tgt_path = dirpath / "tgt.cvec"
    save_space(source, src_path)
    save_space(target, tgt_path)

    entries = tuple(
        (cid, "train" if i < n_train else "test") for i, cid in enumerate(ids)
    )
    dict_path = dirpath / "dict.tsv"
    write_dictionary(SeedDictionary(entries=entries), dict_path)

    table_path = None
    if with_table:
        records = tuple(
            ConceptRecord(
                synset_id=cid,
                depth=6,
                category="abstract" if i % 2 == 0 else "physical",
                forms={"src": f"s_{cid}", "tgt": f"t_{cid}"},
            )
            for i, cid in enumerate(ids)
        )
        table_path = dirpath / "table.tsv"
        write_table(ConceptTable(languages=("src", "tgt"), records=records), table_path)
    return src_path, tgt_path, dict_path, table_path


def write_config(dirpath, name="exp.cfg", **overrides):
    """Write a key = value experiment config next to the dataset files."""
    values = {
        "source": "src.cvec",
        "target": "tgt.cvec",
        "dictionary": "dict.tsv",
        "modes": "before,after,ceiling",
        "ks": "1,5,10,30",
        "method": "csls",
        "csls_k": "5",
        "preprocessing": "unit",
        "seed": "7",
    }
    values.update({k: str(v) for k, v in overrides.items() if v is not None})
    path = dirpath / name
    path.write_text(
        "".join(f"{k} = {v}\n" for k, v in values.items()), encoding="utf-8"
    )
    return path


def result_with_gold_rank(query_id, gold_id, rank, vocab_size, method="nn"):
    """Ranked list over a synthetic vocabulary with the gold id at `rank`."""
    decoys = (f"decoy{i:03d}" for i in range(vocab_size))
    ids = []
    for position in range(vocab_size):
        ids.append(gold_id if position == rank - 1 else next(decoys))
    ranked = tuple((tid, 1.0 - 0.001 * i) for i, tid in enumerate(ids))
    return RetrievalResult(query_id=query_id, ranked=ranked, method=method)
