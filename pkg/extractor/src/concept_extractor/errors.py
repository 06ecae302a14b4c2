class ExtractorError(Exception):
    """Bad inputs, unloadable models, or concepts the tokenizer cannot encode."""
