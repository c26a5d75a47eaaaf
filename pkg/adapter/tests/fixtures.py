"""Build the tiny checkpoints and fixture files the test suite runs against.

The test environment has no model-hub access, so the suite trains its own
miniature checkpoints — a 2-layer causal LM and a 2-layer masked LM over a
71-token word-level vocabulary — on the corpus bundled with the
``acceptability`` package.  Training is seeded and takes roughly a minute
on a desktop CPU; every property the tests assert was calibrated against
these exact configurations.
"""

from __future__ import annotations

import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import numpy as np
import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import (BertConfig, BertForMaskedLM, GPT2Config,
                          GPT2LMHeadModel, PreTrainedTokenizerFast)

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "[BOS]", "[EOS]"]

CAUSAL_SEED = 11
MASKED_SEED = 12
CAUSAL_STEPS = 500
MASKED_STEPS = 1200


def build_tokenizer(words) -> PreTrainedTokenizerFast:
    """A word-level tokenizer over *words* plus the standard special tokens."""
    vocab = {tok: i for i, tok in enumerate(SPECIALS + sorted(set(words)))}
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return PreTrainedTokenizerFast(
        tokenizer_object=tok, pad_token="[PAD]", unk_token="[UNK]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        bos_token="[BOS]", eos_token="[EOS]")


def sentence_windows(corpus, max_sentences: int = 4) -> list[tuple[str, ...]]:
    """All runs of 1..max_sentences consecutive sentences of each document.

    Multi-sentence windows teach both models cross-sentence continuation,
    so prepended contexts influence scores the way real document context
    would.
    """
    out = []
    for doc in corpus:
        for i in range(len(doc)):
            for k in range(1, max_sentences + 1):
                if i + k <= len(doc):
                    out.append(tuple(w for s in doc[i:i + k] for w in s))
    return out


def _padded_batch(seqs: list[list[int]], pad: int):
    maxlen = max(len(s) for s in seqs)
    ids = torch.full((len(seqs), maxlen), pad, dtype=torch.long)
    att = torch.zeros((len(seqs), maxlen), dtype=torch.long)
    for r, s in enumerate(seqs):
        ids[r, :len(s)] = torch.tensor(s, dtype=torch.long)
        att[r, :len(s)] = 1
    return ids, att


def train_causal_checkpoint(corpus, out_dir, *, seed: int = CAUSAL_SEED,
                            steps: int = CAUSAL_STEPS, lr: float = 3e-3,
                            batch: int = 64) -> str:
    """Train and save a tiny left-to-right LM; returns *out_dir*."""
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    words = sorted({w for d in corpus for s in d for w in s})
    tokenizer = build_tokenizer(words)
    enc = [tokenizer.encode(" ".join(w), add_special_tokens=False)[:60]
           for w in sentence_windows(corpus)]
    bos, eos, pad = (tokenizer.bos_token_id, tokenizer.eos_token_id,
                     tokenizer.pad_token_id)
    config = GPT2Config(vocab_size=len(tokenizer), n_positions=128, n_embd=64,
                        n_layer=2, n_head=4, bos_token_id=bos,
                        eos_token_id=eos, pad_token_id=pad)
    model = GPT2LMHeadModel(config)
    model.train()
    opt = torch.optim.AdamW(model.parameters(), lr=lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=steps)
    for _ in range(steps):
        idx = rng.integers(0, len(enc), size=batch)
        seqs = [[bos] + enc[i] + [eos] for i in idx]
        ids, att = _padded_batch(seqs, pad)
        labels = ids.masked_fill(att == 0, -100)
        loss = model(input_ids=ids, attention_mask=att, labels=labels).loss
        opt.zero_grad()
        loss.backward()
        opt.step()
        sched.step()
    model.eval()
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return os.fspath(out_dir)


def train_masked_checkpoint(corpus, out_dir, *, seed: int = MASKED_SEED,
                            steps: int = MASKED_STEPS, lr: float = 3e-3,
                            batch: int = 64) -> str:
    """Train and save a tiny masked LM; returns *out_dir*.

    Training masks positions with the mask token only (no random/keep
    replacement): scoring always presents a pure mask, so the training
    distribution matches the scoring distribution exactly.
    """
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    words = sorted({w for d in corpus for s in d for w in s})
    tokenizer = build_tokenizer(words)
    enc = [tokenizer.encode(" ".join(w), add_special_tokens=False)[:60]
           for w in sentence_windows(corpus)]
    cls, sep, pad, mask = (tokenizer.cls_token_id, tokenizer.sep_token_id,
                           tokenizer.pad_token_id, tokenizer.mask_token_id)
    config = BertConfig(vocab_size=len(tokenizer), hidden_size=96,
                        num_hidden_layers=2, num_attention_heads=4,
                        intermediate_size=192, max_position_embeddings=128,
                        pad_token_id=pad)
    model = BertForMaskedLM(config)
    model.train()
    opt = torch.optim.AdamW(model.parameters(), lr=lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=steps)
    for _ in range(steps):
        idx = rng.integers(0, len(enc), size=batch)
        seqs = [[cls] + enc[i] + [sep] for i in idx]
        ids, att = _padded_batch(seqs, pad)
        labels = torch.full_like(ids, -100)
        for r, s in enumerate(seqs):
            inner = len(s) - 2
            n_mask = max(1, round(0.15 * inner))
            for p in rng.choice(inner, size=n_mask, replace=False) + 1:
                labels[r, p] = ids[r, p]
                ids[r, p] = mask
        loss = model(input_ids=ids, attention_mask=att, labels=labels).loss
        opt.zero_grad()
        loss.backward()
        opt.step()
        sched.step()
    model.eval()
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return os.fspath(out_dir)
