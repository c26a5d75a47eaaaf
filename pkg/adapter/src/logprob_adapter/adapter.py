"""Score sentences with pretrained transformer checkpoints.

Two export modes, one per scoring direction:

* ``uni`` — a causal (left-to-right) language model.  Each target token is
  scored as ``log P(w_i | w_<i)`` from a single forward pass over
  ``BOS + context + target``.
* ``bi`` — a masked language model.  Each target position is masked in turn
  and the model is run once per position; the score is
  ``log P(w_i | unmasked rest)``.  Summed over positions this is a
  pseudo-log-likelihood, not a true sentence probability — positions are
  conditioned on each other, so the terms do not factorize.

Shared rules:

* The context (three sentences, flattened) is prepended to the target and
  only target-span tokens are emitted.  Context and target are tokenized
  independently and their token id sequences concatenated, so the target
  span is known exactly and is identical across context variants.
* ``n_target_tokens`` is the target's sub-word count — consumers decide
  which length to normalize by.
* Token text is emitted exactly as the tokenizer renders it; nothing is
  lowercased here.  Cased vs uncased behaviour is the checkpoint's.
* A sequence longer than the model's position limit raises
  :class:`AdapterError` naming the sentence, the length, and the limit.
* Output order is deterministic: records are sorted by sentence id.

This module emits raw token log-probabilities only; it computes no
derived measures.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import torch
from transformers import AutoModelForCausalLM, AutoModelForMaskedLM, AutoTokenizer

from .errors import AdapterError
from .formats import (CONTEXT_VARIANTS, DIRECTIONS, SentenceLogProbs, TestItem,
                      read_testset, write_logprobs)

__all__ = ["AdapterRequest", "export_uni", "export_bi", "run_export",
           "load_checkpoint"]


@dataclass(frozen=True, slots=True)
class AdapterRequest:
    """One export job: which checkpoint, which direction, which sentences.

    ``direction="uni"`` requires a causal checkpoint; ``direction="bi"``
    requires a masked-LM checkpoint.  ``device`` is a torch device hint
    (``"cpu"``, ``"cuda"``, ...).
    """

    checkpoint: str
    direction: str                 # "uni" | "bi"
    testset: str | os.PathLike     # testset.jsonl path
    context_variant: str = "none"  # "none" | "real" | "random"
    device: str = "cpu"

    def __post_init__(self):
        if not self.checkpoint:
            raise AdapterError("checkpoint must be nonempty")
        if self.direction not in DIRECTIONS:
            raise AdapterError(f"direction must be one of {DIRECTIONS}, "
                               f"got {self.direction!r}")
        if self.context_variant not in CONTEXT_VARIANTS:
            raise AdapterError(f"context variant must be one of "
                               f"{CONTEXT_VARIANTS}, got {self.context_variant!r}")


# ---------------------------------------------------------------------------
# checkpoint loading
# ---------------------------------------------------------------------------

_KIND = {"uni": "causal", "bi": "masked-LM"}
_AUTO_CLASS = {"uni": AutoModelForCausalLM, "bi": AutoModelForMaskedLM}


def load_checkpoint(checkpoint: str, direction: str, device: str = "cpu"):
    """Load *checkpoint* for *direction*, verifying it is the right kind.

    The auto classes map some model types to heads the checkpoint was never
    trained with (e.g. a masked-LM checkpoint silently loads under a causal
    head with bidirectional weights), so after loading, the class that was
    instantiated must be one the checkpoint declares in
    ``config.architectures``.

    Returns ``(model, tokenizer)`` with the model on *device* in eval mode.
    """
    if direction not in DIRECTIONS:
        raise AdapterError(f"direction must be one of {DIRECTIONS}, "
                           f"got {direction!r}")
    kind = _KIND[direction]
    try:
        model = _AUTO_CLASS[direction].from_pretrained(checkpoint)
    except ValueError as e:
        raise AdapterError(
            f"direction {direction!r} requires a {kind} checkpoint, and "
            f"{checkpoint!r} cannot be loaded as one: {e}") from None
    except OSError as e:
        raise AdapterError(f"cannot load checkpoint {checkpoint!r}: {e}") from None
    declared = getattr(model.config, "architectures", None) or []
    if declared and type(model).__name__ not in declared:
        raise AdapterError(
            f"checkpoint {checkpoint!r} was saved as {declared[0]}, which is "
            f"not a {kind} model; direction {direction!r} requires a {kind} "
            f"checkpoint")
    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    except (OSError, ValueError) as e:
        raise AdapterError(f"cannot load the tokenizer of checkpoint "
                           f"{checkpoint!r}: {e}") from None
    if direction == "bi" and tokenizer.mask_token_id is None:
        raise AdapterError(
            f"the tokenizer of checkpoint {checkpoint!r} defines no mask "
            f"token; direction 'bi' requires a masked-LM checkpoint")
    try:
        model.to(torch.device(device))
    except (RuntimeError, ValueError) as e:
        raise AdapterError(f"cannot place the model on device "
                           f"{device!r}: {e}") from None
    model.eval()
    return model, tokenizer


def _provider_name(checkpoint: str) -> str:
    """The ``provider`` field value: the checkpoint's name, not its path."""
    if os.path.isdir(checkpoint):
        base = os.path.basename(os.path.normpath(checkpoint))
        if base:
            return base
    return checkpoint


def _max_sequence_length(config) -> int | None:
    """The model's position limit, or None when the config declares none."""
    for attr in ("n_positions", "max_position_embeddings"):
        value = getattr(config, attr, None)
        if isinstance(value, int) and value > 0:
            return value
    return None


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

def _encode(tokenizer, words: Sequence[str], sentence_id: str,
            what: str) -> tuple[list[int], list[str]]:
    """Tokenize *words* (joined by single spaces) into sub-word ids + texts."""
    text = " ".join(words)
    ids = tokenizer.encode(text, add_special_tokens=False)
    if not ids:
        raise AdapterError(f"sentence {sentence_id!r}: the tokenizer produced "
                           f"no tokens for the {what} {text!r}")
    return list(ids), tokenizer.convert_ids_to_tokens(ids)


def _check_length(length: int, cap: int | None, sentence_id: str) -> None:
    if cap is not None and length > cap:
        raise AdapterError(
            f"sentence {sentence_id!r}: sequence length {length} after "
            f"context prepending exceeds the model's maximum of {cap} tokens")


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------

def _uni_record(model, tokenizer, item: TestItem, variant: str,
                provider: str, device: torch.device,
                cap: int | None, bos: int | None) -> SentenceLogProbs:
    ctx_words = item.context_words(variant)
    ctx_ids = (_encode(tokenizer, ctx_words, item.id, "context")[0]
               if ctx_words else [])
    tgt_ids, tgt_tokens = _encode(tokenizer, item.target, item.id, "target")
    prefix = ([] if bos is None else [bos]) + ctx_ids
    if not prefix:
        raise AdapterError(
            f"sentence {item.id!r}: the checkpoint defines no BOS or EOS "
            f"token and no context was given, so the first target token has "
            f"nothing to be conditioned on")
    full = prefix + tgt_ids
    _check_length(len(full), cap, item.id)
    input_ids = torch.tensor([full], dtype=torch.long, device=device)
    logits = model(input_ids).logits[0]
    log_probs = torch.log_softmax(logits.float(), dim=-1)
    k = len(prefix)
    tokens = tuple(
        (text, min(float(log_probs[k - 1 + j, token_id]), 0.0))
        for j, (token_id, text) in enumerate(zip(tgt_ids, tgt_tokens)))
    return SentenceLogProbs(item.id, provider, "uni", variant, tokens)


def _bi_record(model, tokenizer, item: TestItem, variant: str,
               provider: str, device: torch.device,
               cap: int | None) -> SentenceLogProbs:
    ctx_words = item.context_words(variant)
    ctx_ids = (_encode(tokenizer, ctx_words, item.id, "context")[0]
               if ctx_words else [])
    tgt_ids, tgt_tokens = _encode(tokenizer, item.target, item.id, "target")
    head = [] if tokenizer.cls_token_id is None else [tokenizer.cls_token_id]
    tail = [] if tokenizer.sep_token_id is None else [tokenizer.sep_token_id]
    ids = head + ctx_ids + tgt_ids + tail
    _check_length(len(ids), cap, item.id)
    offset = len(head) + len(ctx_ids)
    base = torch.tensor([ids], dtype=torch.long, device=device)
    mask_id = tokenizer.mask_token_id
    tokens = []
    # One mask per position, one forward pass per position: every target
    # token is predicted from the fully unmasked rest of the sequence.
    # Masking several positions at once would hide each from the others.
    for j, (token_id, text) in enumerate(zip(tgt_ids, tgt_tokens)):
        masked = base.clone()
        masked[0, offset + j] = mask_id
        logits = model(masked).logits[0, offset + j]
        log_probs = torch.log_softmax(logits.float(), dim=-1)
        tokens.append((text, min(float(log_probs[token_id]), 0.0)))
    return SentenceLogProbs(item.id, provider, "bi", variant, tuple(tokens))


# ---------------------------------------------------------------------------
# export entry points
# ---------------------------------------------------------------------------

def run_export(request: AdapterRequest,
               out: str | os.PathLike | None = None) -> list[SentenceLogProbs]:
    """Score every sentence of the request's testset; return the records.

    Records are sorted by sentence id.  When *out* is given the records are
    also written there as ``logprobs.jsonl``.
    """
    items = read_testset(request.testset)
    if not items:
        raise AdapterError(f"testset {os.fspath(request.testset)!r} is empty")
    items = sorted(items, key=lambda item: item.id)
    model, tokenizer = load_checkpoint(request.checkpoint, request.direction,
                                       request.device)
    provider = _provider_name(request.checkpoint)
    device = torch.device(request.device)
    cap = _max_sequence_length(model.config)
    records: list[SentenceLogProbs] = []
    with torch.no_grad():
        if request.direction == "uni":
            bos = tokenizer.bos_token_id
            if bos is None:
                bos = tokenizer.eos_token_id
            for item in items:
                records.append(_uni_record(model, tokenizer, item,
                                           request.context_variant, provider,
                                           device, cap, bos))
        else:
            for item in items:
                records.append(_bi_record(model, tokenizer, item,
                                          request.context_variant, provider,
                                          device, cap))
    if out is not None:
        write_logprobs(records, out)
    return records


def export_uni(request: AdapterRequest,
               out: str | os.PathLike | None = None) -> list[SentenceLogProbs]:
    """Causal export: per-token ``log P(w_i | w_<i)`` for every target."""
    if request.direction != "uni":
        raise AdapterError(f"export_uni requires direction 'uni', "
                           f"got {request.direction!r}")
    return run_export(request, out)


def export_bi(request: AdapterRequest,
              out: str | os.PathLike | None = None) -> list[SentenceLogProbs]:
    """Masked export: per-token ``log P(w_i | unmasked rest)`` for every target."""
    if request.direction != "bi":
        raise AdapterError(f"export_bi requires direction 'bi', "
                           f"got {request.direction!r}")
    return run_export(request, out)
