"""Acceptance suite: every criterion prints its own pass line with timing.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own pass/fail report.
"""

import math
import warnings
import time

import numpy as np
from helpers import (
    oracle_csls,
    random_orthogonal,
    result_with_gold_rank,
    write_config,
)

from lexalign.alignment import load_map, orthogonality_defect, procrustes_fit, save_map, OrthogonalMap
from lexalign.concept_dataset import (
    ConceptRecord,
    ConceptTable,
    SeedDictionary,
    category_stats,
    identical_form_ratio,
    split_table,
    write_dictionary,
    write_table,
)
from lexalign.embedding_store import EmbeddingSpace, load_space, save_space
from lexalign.evaluation import (
    parse_config,
    precision_at_k,
    render_report,
    run_experiment,
    with_overrides,
)
from lexalign.retrieval import cosine_topk, csls_topk


def _pass(name, started):
    elapsed = time.perf_counter() - started
    print(f"PASS: {name} ({elapsed:.2f}s)", flush=True)
    return elapsed


def space_from(matrix, language="xx", prefix="c"):
    matrix = np.asarray(matrix, dtype=np.float64)
    ids = tuple(f"{prefix}{i}" for i in range(matrix.shape[0]))
    return EmbeddingSpace(language=language, ids=ids, forms=ids, vectors=matrix)


def test_procrustes_exactness():
    started = time.perf_counter()
    dims = [4, 8, 32]
    for seed in range(50):
        d = dims[seed % 3]
        m = 6 * d
        rng = np.random.default_rng(1000 + seed)
        rotation = random_orthogonal(rng, d)
        x = rng.normal(size=(m, d))
        src = space_from(x, "src")
        tgt = space_from(x @ rotation.T, "tgt")
        dictionary = SeedDictionary(entries=tuple((i, "train") for i in src.ids))
        fitted = procrustes_fit(src, tgt, dictionary)
        assert np.abs(fitted.matrix - rotation).max() <= 1e-6
        assert orthogonality_defect(fitted.matrix) <= 1e-8
    elapsed = _pass("procrustes exactness (50 planted instances, d in {4,8,32})", started)
    assert elapsed < 10.0


def test_procrustes_optimality_oracle():
    started = time.perf_counter()
    for instance in range(20):
        rng = np.random.default_rng(2000 + instance)
        d = int(rng.integers(2, 7))
        m = int(rng.integers(2, 9))
        x = rng.normal(size=(m, d))
        y = rng.normal(size=(m, d))
        src, tgt = space_from(x, "s"), space_from(y, "t")
        dictionary = SeedDictionary(entries=tuple((i, "train") for i in src.ids))
        with warnings.catch_warnings():
            # m < d instances are rank deficient by construction
            warnings.simplefilter("ignore", RuntimeWarning)
            fitted = procrustes_fit(src, tgt, dictionary)
        fit_objective = np.linalg.norm(x @ fitted.matrix.T - y)
        for _ in range(1000):
            candidate = random_orthogonal(rng, d)
            assert fit_objective <= np.linalg.norm(x @ candidate.T - y) + 1e-12
    elapsed = _pass("procrustes optimality vs 1000 random orthogonal maps x 20 instances", started)
    assert elapsed < 30.0


def test_csls_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(3000)
    for _ in range(25):
        n = int(rng.integers(2, 101))
        m = int(rng.integers(2, 201))
        d = int(rng.integers(2, 17))
        csls_k = int(rng.integers(1, min(n, m, 15) + 1))
        k = int(rng.integers(1, min(m, 25) + 1))
        block_size = int(rng.choice([7, 64, 1024]))
        threads = int(rng.choice([1, 3]))
        queries = space_from(rng.normal(size=(n, d)), "q", prefix="q")
        targets = space_from(rng.normal(size=(m, d)), "t")
        blocked = csls_topk(queries, targets, k, csls_k=csls_k, block_size=block_size, threads=threads)
        expected = oracle_csls(queries, targets, k, csls_k)
        for result, oracle_row in zip(blocked, expected):
            assert [t for t, _ in result.ranked] == [t for t, _ in oracle_row]
            for (_, got), (_, want) in zip(result.ranked, oracle_row):
                assert math.isclose(got, want, abs_tol=1e-9)
    elapsed = _pass("csls blocked implementation == brute-force oracle (25 instances)", started)
    assert elapsed < 10.0


def _hub_fixture(seed):
    """Two queries with true matches t1/t2 plus a hub target near both."""
    rng = np.random.default_rng(seed)
    jitter = 0.02 * rng.normal(size=(5, 3)) if seed else np.zeros((5, 3))
    q1 = np.array([1.0, 0.0, 0.0]) + jitter[0]
    q2 = np.array([0.0, 1.0, 0.0]) + jitter[1]
    hub = np.array([2**-0.5, 2**-0.5, 0.0]) + jitter[2]
    t1 = np.array([0.6, 0.0, 0.8]) + jitter[3]
    t2 = np.array([0.0, 0.6, 0.8]) + jitter[4]
    queries = space_from(np.stack([q1, q2]), "q", prefix="q")
    targets = space_from(np.stack([hub, t1, t2]), "t")
    gold = {"q0": "c1", "q1": "c2"}
    return queries, targets, gold


def test_hubness_check():
    started = time.perf_counter()
    strictly_better = 0
    for seed in range(10):
        queries, targets, gold = _hub_fixture(seed)
        nn_p1 = precision_at_k(cosine_topk(queries, targets, k=3), gold, 1)
        csls_p1 = precision_at_k(csls_topk(queries, targets, k=3, csls_k=2), gold, 1)
        assert csls_p1 >= nn_p1
        if csls_p1 > nn_p1:
            strictly_better += 1
    assert strictly_better >= 1
    _pass(f"hubness: CSLS P@1 >= cosine P@1 on 10 hub fixtures (strict on {strictly_better})", started)


def test_end_to_end_planted_pipeline(tmp_path):
    started = time.perf_counter()
    n, d, per_category = 500, 64, 150  # 300 train / 200 test
    rng = np.random.default_rng(4000)
    ids = tuple(f"{i:08d}-n" for i in range(n))
    x = rng.normal(size=(n, d))
    rotation = random_orthogonal(rng, d)
    distractor_ids = tuple(f"dist{i:05d}-n" for i in range(n))
    distractors = rng.normal(size=(n, d))

    save_space(EmbeddingSpace("src", ids, ids, x), tmp_path / "src.cvec")
    save_space(
        EmbeddingSpace(
            "tgt",
            ids + distractor_ids,
            ids + distractor_ids,
            np.vstack([x @ rotation.T, distractors]),
        ),
        tmp_path / "tgt.cvec",
    )
    records = tuple(
        ConceptRecord(
            synset_id=sid,
            depth=7,
            category="abstract" if i % 2 == 0 else "physical",
            forms={"src": f"s{i}", "tgt": f"t{i}"},
        )
        for i, sid in enumerate(ids)
    )
    table = ConceptTable(languages=("src", "tgt"), records=records)
    write_table(table, tmp_path / "table.tsv")
    dictionary = split_table(table, train_per_category=per_category, rng_seed=17)
    assert len(dictionary.ids_with_roles({"train"})) == 300
    assert len(dictionary.ids_with_roles({"test"})) == 200
    write_dictionary(dictionary, tmp_path / "dict.tsv")

    config = parse_config(
        write_config(tmp_path, table="table.tsv", ks="1", csls_k="10", seed="17")
    )
    report1 = run_experiment(config)
    values = {(e.mode, e.category): e.precision for e in report1.entries}
    assert values[("after", "all")] == 1.0
    assert values[("ceiling", "all")] == 1.0
    assert values[("before", "all")] <= 0.05

    report2 = run_experiment(config)
    assert render_report(report1, "json") == render_report(report2, "json")
    report4 = run_experiment(with_overrides(config, threads=4))
    assert render_report(report1, "json") == render_report(report4, "json")

    elapsed = _pass(
        "end-to-end planted pipeline: after/ceiling P@1=1.0, before<=0.05, byte-stable",
        started,
    )
    assert elapsed < 20.0


def test_precision_at_k_arithmetic():
    started = time.perf_counter()
    ranks = {"q0": 1, "q1": 3, "q2": 11, "q3": 2}
    gold = {qid: f"g_{qid}" for qid in ranks}
    results = [result_with_gold_rank(qid, gold[qid], r, vocab_size=12) for qid, r in ranks.items()]
    assert precision_at_k(results, gold, 1) == 0.25
    assert precision_at_k(results, gold, 5) == 0.75
    assert precision_at_k(results, gold, 10) == 0.75
    assert precision_at_k(results, gold, 30) == 1.0

    rng = np.random.default_rng(5000)
    for _ in range(100):
        n_queries = int(rng.integers(1, 10))
        vocab = int(rng.integers(3, 30))
        results, gold = [], {}
        for i in range(n_queries):
            gold[f"q{i}"] = f"g{i}"
            results.append(
                result_with_gold_rank(f"q{i}", f"g{i}", int(rng.integers(1, vocab + 1)), vocab)
            )
        values = [precision_at_k(results, gold, k) for k in range(1, vocab + 2)]
        assert all(a <= b for a, b in zip(values, values[1:]))
    _pass("P@k arithmetic on the {1,3,11,2} fixture + monotonicity on 100 random sets", started)


def test_dataset_arithmetic_on_reference_counts():
    started = time.perf_counter()

    def record(sid, category, fr_form=None, en_form=None, senses=None, freq=None):
        en_form = en_form or f"w_{sid}"
        return ConceptRecord(
            synset_id=sid,
            depth=7,
            category=category,
            forms={"en": en_form, "fr": fr_form or f"m_{sid}"},
            sense_count=senses,
            frequency=freq,
        )

    # reference dataset shape: 1919 abstract + 2478 physical = 4397 concepts;
    # 653 French forms identical to English; sense/frequency annotations hit
    # the reference category means
    abstract_senses = [3] * 1804 + [2] * 115  # sum 5642, mean 2.9401
    physical_senses = [2] * 2379 + [1] * 99  # sum 4857, mean 1.9600
    records = []
    for i in range(1919):
        identical = i < 327  # 327 of the abstract records share forms
        records.append(
            record(
                f"a{i:05d}",
                "abstract",
                fr_form=f"shared_a{i}" if identical else None,
                en_form=f"shared_a{i}" if identical else None,
                senses=abstract_senses[i],
                freq=103_934,
            )
        )
    for i in range(2478):
        identical = i < 653 - 327  # remaining 326 identical pairs are physical
        records.append(
            record(
                f"p{i:05d}",
                "physical",
                fr_form=f"shared_p{i}" if identical else None,
                en_form=f"shared_p{i}" if identical else None,
                senses=physical_senses[i],
                freq=28_762,
            )
        )
    table = ConceptTable(languages=("en", "fr"), records=tuple(records))
    assert len(table) == 4397

    split = split_table(table, train_per_category=1500, rng_seed=42)
    train = split.ids_with_roles({"train"})
    test = split.ids_with_roles({"test"})
    assert len(train) == 3000
    assert len(test) == 1397
    assert sum(1 for sid in test if sid.startswith("a")) == 419
    assert sum(1 for sid in test if sid.startswith("p")) == 978

    ratio = identical_form_ratio(table, "fr", "en")
    assert ratio == 653 / 4397

    stats = category_stats(table)
    assert abs(stats["abstract"].mean_senses - 2.94) / 2.94 <= 0.005
    assert abs(stats["physical"].mean_senses - 1.96) / 1.96 <= 0.005
    assert abs(stats["abstract"].mean_frequency - 103_934) / 103_934 <= 0.005
    assert abs(stats["physical"].mean_frequency - 28_762) / 28_762 <= 0.005
    _pass("dataset arithmetic: split 3000/1397 (419+978), 653/4397 ratio, category means", started)


def test_format_round_trips(tmp_path):
    started = time.perf_counter()
    rng = np.random.default_rng(6000)
    for i in range(20):
        n = int(rng.integers(1, 31))
        d = int(rng.integers(1, 13))
        ids = tuple(f"{rng.integers(0, 10**8):08d}-{i}-{j}" for j in range(n))
        forms = tuple(f"forme {j} é動物" if j % 3 == 0 else f"w{j}" for j in range(n))
        scale = 10.0 ** float(rng.integers(-3, 3))
        space = EmbeddingSpace("xx", ids, forms, rng.normal(size=(n, d)) * scale)
        path = tmp_path / f"space{i}.cvec"
        save_space(space, path)
        loaded = load_space(path)
        assert loaded.ids == space.ids
        assert loaded.forms == space.forms
        assert np.abs(loaded.vectors - space.vectors).max() <= 1e-6

        dim = int(rng.integers(1, 17))
        mapping = OrthogonalMap(
            matrix=random_orthogonal(rng, dim),
            source_language="fr",
            target_language="en",
            seed_size=n,
            preprocessing="unit",
        )
        map_path = tmp_path / f"map{i}.omap"
        save_map(mapping, map_path)
        reloaded = load_map(map_path)
        assert np.abs(reloaded.matrix - mapping.matrix).max() <= 1e-6
        assert (reloaded.source_language, reloaded.target_language) == ("fr", "en")
    _pass("format round-trips: 20 random .cvec spaces and .omap maps within 1e-6", started)
