"""Instruction template for prompt-based concept embeddings.

The two fill slots take the concept's surface form (in quotes, in the
source language) and the adjectival name of that language, e.g.

    Summarize concept "動物" in one Japanese word:
"""

from .errors import ExtractorError

PROMPT_TEMPLATE = "Summarize concept [text] in one [lang] word:"

# adjectival language names for the [lang] slot
LANGUAGE_NAMES = {
    "en": "English",
    "fr": "French",
    "ro": "Romanian",
    "eu": "Basque",
    "fi": "Finnish",
    "ja": "Japanese",
    "th": "Thai",
    "de": "German",
    "es": "Spanish",
    "it": "Italian",
    "pt": "Portuguese",
    "nl": "Dutch",
    "zh": "Chinese",
    "ko": "Korean",
    "ru": "Russian",
    "ar": "Arabic",
}


def language_name(code: str) -> str:
    try:
        return LANGUAGE_NAMES[code]
    except KeyError:
        raise ExtractorError(
            f"no adjectival name registered for language '{code}'; extend LANGUAGE_NAMES"
        ) from None


def render_prompt(form: str, language_code: str) -> str:
    return PROMPT_TEMPLATE.replace("[text]", f'"{form}"').replace(
        "[lang]", language_name(language_code)
    )
