"""Concept-space alignment toolkit.

Builds parallel concept dictionaries from aligned WordNet exports, fits
orthogonal maps between monolingual concept-embedding spaces, retrieves
translations with cosine or CSLS, and reports precision@k under
before-align / after-align / leaky-ceiling protocols.
"""

__version__ = "0.1.0"

from .alignment import OrthogonalMap, apply_map, load_map, procrustes_fit, save_map
from .concept_dataset import (
    ConceptRecord,
    ConceptTable,
    SeedDictionary,
    attach_annotations,
    build_table,
    category_from_lexfile,
    category_stats,
    downsample_category,
    identical_form_ratio,
    read_dictionary,
    read_export,
    read_table,
    split_table,
    write_dictionary,
    write_table,
)
from .embedding_store import EmbeddingSpace, load_space, normalize_space, save_space
from .errors import LexalignError, ValidationError
from .evaluation import (
    EvalEntry,
    EvalReport,
    ExperimentConfig,
    config_hash,
    parse_config,
    precision_at_k,
    render_report,
    run_experiment,
)
from .retrieval import RetrievalResult, cosine_topk, csls_topk, read_results, retrieve, write_results
