"""Session fixtures: tiny random-weight multilingual models.

Byte-level tokenization (ByT5 style) handles every script without vocab
files, so these models exercise the real tokenize/pool/serialize path
offline. Weights are random; only shapes and determinism matter here.
"""

import pytest
import torch
from transformers import ByT5Tokenizer, GPT2Config, GPT2Model, T5Config, T5Model

VOCAB = 384  # 256 bytes + specials + extra ids of the byte tokenizer


@pytest.fixture(scope="session")
def tiny_encdec_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-encdec")
    torch.manual_seed(0)
    config = T5Config(
        vocab_size=VOCAB,
        d_model=32,
        d_ff=64,
        d_kv=8,
        num_layers=2,
        num_decoder_layers=2,
        num_heads=2,
        decoder_start_token_id=0,
        pad_token_id=0,
        eos_token_id=1,
    )
    T5Model(config).save_pretrained(path)
    ByT5Tokenizer().save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_decoder_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-decoder")
    torch.manual_seed(1)
    config = GPT2Config(
        vocab_size=VOCAB,
        n_positions=512,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=1,
        eos_token_id=1,
    )
    GPT2Model(config).save_pretrained(path)
    ByT5Tokenizer().save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def concept_table(tmp_path_factory):
    """Ten concepts in the alignment toolkit's table format (en + ja)."""
    path = tmp_path_factory.mktemp("data") / "table.tsv"
    rows = [
        ("02084071-n", "dog", "犬"),
        ("02121620-n", "cat", "猫"),
        ("00015388-n", "animal", "動物"),
        ("02958343-n", "car", "車"),
        ("00021265-n", "food", "食べ物"),
        ("09287968-n", "river", "川"),
        ("08591680-n", "happiness", "幸福"),
        ("05943300-n", "belief", "信念"),
        ("03309808-n", "fabric", "織物"),
        ("10287213-n", "man", "男"),
    ]
    lines = ["synset_id\tdepth\tcategory\tsense_count\tfrequency\ten\tja"]
    for i, (sid, en, ja) in enumerate(rows):
        category = "abstract" if i >= 6 else "physical"
        lines.append(f"{sid}\t7\t{category}\t\t\t{en}\t{ja}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
