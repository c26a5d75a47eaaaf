"""Causal export: target-span emission, conditioning, and discrimination."""

from __future__ import annotations

import json

import pytest
import torch
from transformers import AutoModelForCausalLM, AutoTokenizer

from acceptability import load_logprobs

from conftest import N_CHAIN, N_FIXTURES, _row, _write_rows
from logprob_adapter import AdapterError, AdapterRequest, export_uni, run_export


def test_validates_under_downstream_loader(uni_none, files):
    records, path = uni_none
    loaded = load_logprobs(path)
    assert len(loaded) == 100
    assert [r.sentence_id for r in loaded] == sorted(r.sentence_id
                                                     for r in loaded)
    by_id = {}
    with open(files["testset100"], encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            by_id[obj["id"]] = obj["target"].split()
    for rec in loaded:
        assert rec.provider == "tiny-causal"
        assert rec.direction == "uni"
        assert rec.context_variant.value == "none"
        assert rec.n_target_tokens == len(rec.tokens)
        # a word-level tokenizer maps one word to one sub-word token
        assert [t.t for t in rec.tokens] == by_id[rec.sentence_id]
        assert all(t.lp <= 0 for t in rec.tokens)


def test_context_variants_share_the_target_span(checkpoints, files):
    by_variant = {
        variant: run_export(AdapterRequest(checkpoints["causal"], "uni",
                                           files["testset100"], variant))
        for variant in ("none", "real", "random")
    }
    none, real, random = (by_variant[v] for v in ("none", "real", "random"))
    for a, b, c in zip(none, real, random):
        assert a.sentence_id == b.sentence_id == c.sentence_id
        assert [t for t, _ in a.tokens] == [t for t, _ in b.tokens] \
            == [t for t, _ in c.tokens]
        assert b.context_variant == "real"
        assert c.context_variant == "random"
    # the context must actually reach the model: conditioning on three real
    # sentences changes the first target token's score almost always
    changed = sum(a.tokens[0][1] != b.tokens[0][1]
                  for a, b in zip(none, real))
    assert changed >= 80, f"context changed only {changed}/100 first tokens"


def test_first_token_scored_from_bos_alone(checkpoints, files, uni_none):
    """Causality: with no context, token 0's score is conditioned on BOS only.

    An independent single-token forward pass must reproduce the exported
    first-token score, whatever follows it in the full sequence.
    """
    records, _ = uni_none
    model = AutoModelForCausalLM.from_pretrained(checkpoints["causal"]).eval()
    tokenizer = AutoTokenizer.from_pretrained(checkpoints["causal"])
    with torch.no_grad():
        logits = model(torch.tensor([[tokenizer.bos_token_id]])).logits[0, 0]
    first_lp = torch.log_softmax(logits.float(), dim=-1)
    with open(files["testset100"], encoding="utf-8") as fh:
        targets = {obj["id"]: obj["target"].split()
                   for obj in map(json.loads, fh)}
    for rec in records[:10]:
        w0 = targets[rec.sentence_id][0]
        expected = first_lp[tokenizer.convert_tokens_to_ids(w0)].item()
        assert rec.tokens[0][1] == pytest.approx(expected, abs=1e-6)


def test_per_token_scores_match_manual_forward(checkpoints, files):
    """Every emitted lp equals a hand-indexed log-softmax of one forward pass."""
    records = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                        files["with_ctx"], "real"))
    model = AutoModelForCausalLM.from_pretrained(checkpoints["causal"]).eval()
    tokenizer = AutoTokenizer.from_pretrained(checkpoints["causal"])
    with open(files["with_ctx"], encoding="utf-8") as fh:
        rows = {obj["id"]: obj for obj in map(json.loads, fh)}
    for rec in records[:5]:
        row = rows[rec.sentence_id]
        ctx_ids = tokenizer.encode(" ".join(row["real_context"]),
                                   add_special_tokens=False)
        tgt_ids = tokenizer.encode(row["target"], add_special_tokens=False)
        prefix = [tokenizer.bos_token_id] + ctx_ids
        with torch.no_grad():
            logits = model(torch.tensor([prefix + tgt_ids])).logits[0]
        log_probs = torch.log_softmax(logits.float(), dim=-1)
        for j, token_id in enumerate(tgt_ids):
            expected = log_probs[len(prefix) - 1 + j, token_id].item()
            assert rec.tokens[j][1] == pytest.approx(expected, abs=1e-9)


def test_chain_rule_consistency(checkpoints, files):
    """total(context + target) - total(context) == total(target | context)."""
    with_ctx = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                         files["with_ctx"], "real"))
    full = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                     files["full"]))
    ctx_only = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                         files["ctx_only"]))
    assert len(with_ctx) == len(full) == len(ctx_only) == N_CHAIN
    gaps = [abs((f.total_lp - c.total_lp) - w.total_lp)
            for w, f, c in zip(with_ctx, full, ctx_only)]
    assert all(c.total_lp < 0 for c in ctx_only)
    assert max(gaps) <= 1e-4, f"worst chain-rule gap {max(gaps):.3e}"


def test_natural_beats_shuffled(checkpoints, files):
    natural = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                        files["natural"]))
    shuffled = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                         files["shuffled"]))
    wins = sum(n.total_lp > s.total_lp for n, s in zip(natural, shuffled))
    assert wins >= 95, f"natural won only {wins}/{N_FIXTURES}"


def test_overflow_error_names_sentence_length_and_limit(checkpoints,
                                                        corpus_sentences,
                                                        tmp_path):
    words = tuple(corpus_sentences[0]) * 30     # far beyond 128 positions
    path = _write_rows(tmp_path / "long.jsonl",
                       [_row("too-long-000", words, corpus_sentences[:3])])
    with pytest.raises(AdapterError) as err:
        run_export(AdapterRequest(checkpoints["causal"], "uni", path))
    message = str(err.value)
    assert "too-long-000" in message
    assert str(len(words) + 1) in message       # BOS + target
    assert "128" in message
    assert "exceeds" in message


def test_deterministic_across_runs(checkpoints, files, uni_none):
    records, _ = uni_none
    again = run_export(AdapterRequest(checkpoints["causal"], "uni",
                                      files["testset100"]))
    worst = max(abs(a_lp - b_lp)
                for a, b in zip(records, again)
                for (_, a_lp), (_, b_lp) in zip(a.tokens, b.tokens))
    assert worst <= 1e-6, f"two runs differ by {worst:.3e}"


def test_export_uni_rejects_bi_request(checkpoints, files):
    request = AdapterRequest(checkpoints["masked"], "bi", files["testset100"])
    with pytest.raises(AdapterError, match="requires direction 'uni'"):
        export_uni(request)


def test_empty_testset_rejected(checkpoints, tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(AdapterError, match="is empty"):
        run_export(AdapterRequest(checkpoints["causal"], "uni", path))
