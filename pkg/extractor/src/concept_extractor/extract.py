"""Pull concept embeddings out of multilingual models.

Pooling rules by (strategy, architecture):

  vanilla / decoder_only     final-layer state at the last input token of
                             the bare surface form
  vanilla / encoder_decoder  mean of the encoder's final-layer states over
                             the surface form
  prompt  / decoder_only     final-layer state at the last token of the
                             filled instruction template
  prompt  / encoder_decoder  the decoder's final-position state given the
                             filled template (prompt_state="encoder"
                             switches to the encoder's last-token state)

Inference runs in float32 with a fixed batch size, so repeated runs of
the same job agree to well under 1e-5 per entry.
"""

from dataclasses import dataclass, field

import numpy as np
import torch

from .cvec import write_cvec
from .errors import ExtractorError
from .prompts import render_prompt

STRATEGIES = ("vanilla", "prompt")
ARCHITECTURES = ("auto", "decoder_only", "encoder_decoder")


@dataclass(frozen=True)
class ExtractionJob:
    model_id: str
    strategy: str
    language: str
    concepts: tuple[tuple[str, str], ...]  # (concept_id, surface form)
    output_path: str
    architecture: str = "auto"
    prompt_state: str = "decoder"
    batch_size: int = 16
    device: str = "cpu"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ExtractorError(f"unknown strategy '{self.strategy}'")
        if self.architecture not in ARCHITECTURES:
            raise ExtractorError(f"unknown architecture '{self.architecture}'")
        if self.prompt_state not in ("decoder", "encoder"):
            raise ExtractorError("prompt_state must be decoder or encoder")
        if not self.concepts:
            raise ExtractorError("no concepts to extract")
        for concept_id, form in self.concepts:
            if not concept_id or not form:
                raise ExtractorError(f"empty concept id or form (id={concept_id!r})")
        if self.batch_size < 1:
            raise ExtractorError("batch_size must be positive")
        object.__setattr__(self, "concepts", tuple(self.concepts))


@dataclass
class ModelRuntime:
    tokenizer: object
    model: object
    architecture: str  # decoder_only | encoder_decoder
    decoder_start_id: int | None = field(default=None)


def load_runtime(model_id: str, architecture: str = "auto", device: str = "cpu") -> ModelRuntime:
    """Load tokenizer + base model; any loading problem is a job error."""
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ExtractorError(f"model load failure for '{model_id}': {exc}") from exc
    model = model.float().to(device).eval()

    is_encdec = bool(getattr(model.config, "is_encoder_decoder", False))
    if architecture == "auto":
        architecture = "encoder_decoder" if is_encdec else "decoder_only"
    elif (architecture == "encoder_decoder") != is_encdec:
        raise ExtractorError(
            f"model '{model_id}' reports is_encoder_decoder={is_encdec}, "
            f"which contradicts --architecture {architecture}"
        )

    if tokenizer.pad_token_id is None:
        if tokenizer.eos_token_id is not None:
            tokenizer.pad_token = tokenizer.eos_token
        else:
            raise ExtractorError(f"tokenizer for '{model_id}' defines no pad or eos token")

    decoder_start = None
    if architecture == "encoder_decoder":
        decoder_start = getattr(model.config, "decoder_start_token_id", None)
        if decoder_start is None:
            decoder_start = model.config.pad_token_id
        if decoder_start is None:
            raise ExtractorError(f"model '{model_id}' defines no decoder start token")
    return ModelRuntime(tokenizer, model, architecture, decoder_start)


def _last_token_states(hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    # last non-pad position per row, independent of padding side
    last = mask.cumsum(dim=1).argmax(dim=1)
    return hidden[torch.arange(hidden.shape[0]), last]


def _mean_states(hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    expanded = mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * expanded).sum(dim=1) / expanded.sum(dim=1)


def _embed_batch(runtime: ModelRuntime, texts: list[str], job: ExtractionJob) -> torch.Tensor:
    enc = runtime.tokenizer(texts, return_tensors="pt", padding=True)
    mask = enc["attention_mask"]
    empty = (mask.sum(dim=1) == 0).nonzero()
    if mask.shape[1] == 0 or empty.numel():
        index = 0 if mask.shape[1] == 0 else int(empty[0][0])
        raise ExtractorError(f"concept produced an empty tokenization: {texts[index]!r}")
    enc = {k: v.to(job.device) for k, v in enc.items()}
    mask = enc["attention_mask"]

    if runtime.architecture == "decoder_only":
        hidden = runtime.model(**enc).last_hidden_state
        return _last_token_states(hidden, mask)

    if job.strategy == "vanilla":
        encoder = runtime.model.get_encoder()
        hidden = encoder(input_ids=enc["input_ids"], attention_mask=mask).last_hidden_state
        return _mean_states(hidden, mask)

    # prompt strategy on an encoder-decoder model
    if job.prompt_state == "encoder":
        encoder = runtime.model.get_encoder()
        hidden = encoder(input_ids=enc["input_ids"], attention_mask=mask).last_hidden_state
        return _last_token_states(hidden, mask)
    start = torch.full(
        (enc["input_ids"].shape[0], 1), runtime.decoder_start_id, dtype=torch.long
    ).to(job.device)
    out = runtime.model(
        input_ids=enc["input_ids"], attention_mask=mask, decoder_input_ids=start
    )
    return out.last_hidden_state[:, -1]


def extract(job: ExtractionJob, runtime: ModelRuntime | None = None) -> str:
    """Run the job and write its .cvec file; returns the output path."""
    if runtime is None:
        runtime = load_runtime(job.model_id, job.architecture, job.device)

    if job.strategy == "vanilla":
        texts = [form for _, form in job.concepts]
    else:
        texts = [render_prompt(form, job.language) for _, form in job.concepts]

    vectors = []
    with torch.no_grad():
        for start in range(0, len(texts), job.batch_size):
            batch = texts[start : start + job.batch_size]
            states = _embed_batch(runtime, batch, job)
            vectors.append(states.to(torch.float32).cpu().numpy())
    matrix = np.vstack(vectors)

    entries = [
        (concept_id, form, matrix[i]) for i, (concept_id, form) in enumerate(job.concepts)
    ]
    write_cvec(entries, job.output_path)
    return str(job.output_path)
