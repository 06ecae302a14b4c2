"""Concept-embedding extractor for multilingual language models."""

__version__ = "0.1.0"

from .errors import ExtractorError
from .extract import ExtractionJob, ModelRuntime, extract, load_runtime
from .prompts import LANGUAGE_NAMES, PROMPT_TEMPLATE, language_name, render_prompt
from .tables import read_concepts
from .cvec import write_cvec
