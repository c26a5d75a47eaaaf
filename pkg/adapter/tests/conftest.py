"""Shared fixtures: tiny trained checkpoints and seeded fixture files.

Heavy pieces are session-scoped: the two checkpoints are trained once
(roughly a minute of CPU time) and the exports that several tests inspect
are run once and shared.

These tests deliberately import the ``acceptability`` package — the
downstream consumer of the files this package writes — to build fixture
testsets and to prove emitted files load under its validating reader.
The adapter's runtime code never imports it; the file formats are the
only runtime coupling.
"""

from __future__ import annotations

import json
import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import numpy as np
import pytest

from acceptability import (assign_random_contexts, build_testset, load_corpus,
                           save_testset, toy_corpus_path)

import fixtures as fx
from logprob_adapter import AdapterRequest, run_export

TESTSET_SEED = 31
RANDOM_CONTEXT_SEED = 32
FIXTURE_SEED = 202
N_FIXTURES = 100
N_CHAIN = 20


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(toy_corpus_path())


@pytest.fixture(scope="session")
def corpus_sentences(corpus):
    return [s for doc in corpus for s in doc]


@pytest.fixture(scope="session")
def vocab_words(corpus):
    return sorted({w for doc in corpus for s in doc for w in s})


@pytest.fixture(scope="session")
def checkpoints(corpus, tmp_path_factory):
    """Train both tiny checkpoints once; return their directories."""
    root = tmp_path_factory.mktemp("checkpoints")
    return {
        "causal": fx.train_causal_checkpoint(corpus, root / "tiny-causal"),
        "masked": fx.train_masked_checkpoint(corpus, root / "tiny-masked"),
    }


def _row(sid: str, words, context_sentences, level: int = 0) -> dict:
    return {
        "id": sid,
        "target": " ".join(words),
        "real_context": [" ".join(s) for s in context_sentences],
        "random_context": None,
        "origin": "fixture",
        "degradation_level": level,
    }


def _write_rows(path, rows) -> str:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows),
                    encoding="utf-8")
    return os.fspath(path)


@pytest.fixture(scope="session")
def files(corpus, corpus_sentences, vocab_words, tmp_path_factory):
    """All fixture files, keyed by name.

    * ``testset100`` — 100 sentences (20 originals, 4 degradation levels)
      with real and random contexts.
    * ``natural`` / ``shuffled`` — 100 corpus sentences and, id for id,
      a shuffled-token version of each (always a different sequence).
    * ``clean`` / ``corrupted`` — 100 corpus sentences and, id for id, a
      copy with one position replaced by a different vocabulary word;
      ``positions[n]`` is the corrupted position of pair ``n``.
    * ``with_ctx`` / ``full`` / ``ctx_only`` — chain-rule triples: the
      target with a 3-sentence context, the concatenation scored as one
      target, and the context scored as one target.
    """
    root = tmp_path_factory.mktemp("fixture-files")
    sents = corpus_sentences
    out: dict[str, object] = {}

    testset = build_testset(corpus, 20, [1, 2, 3, 4], seed=TESTSET_SEED)
    testset = assign_random_contexts(testset, corpus, seed=RANDOM_CONTEXT_SEED)
    save_testset(testset, root / "testset100.jsonl")
    out["testset100"] = os.fspath(root / "testset100.jsonl")

    default_ctx = sents[:3]

    rng = np.random.default_rng(FIXTURE_SEED)
    pick = rng.choice(len(sents), size=N_FIXTURES, replace=False)
    natural, shuffled = [], []
    for n, i in enumerate(pick):
        s = sents[i]
        while True:
            perm = tuple(rng.permutation(list(s)))
            if perm != s:
                break
        natural.append(_row(f"nat-{n:03d}", s, default_ctx))
        shuffled.append(_row(f"shf-{n:03d}", perm, default_ctx, level=1))
    out["natural"] = _write_rows(root / "natural.jsonl", natural)
    out["shuffled"] = _write_rows(root / "shuffled.jsonl", shuffled)

    rng = np.random.default_rng(FIXTURE_SEED)
    pick = rng.choice(len(sents), size=N_FIXTURES, replace=False)
    words_arr = np.array(vocab_words)
    clean, corrupted, positions = [], [], []
    for n, i in enumerate(pick):
        s = sents[i]
        j = int(rng.integers(0, len(s)))
        while True:
            w = str(words_arr[rng.integers(0, len(words_arr))])
            if w != s[j]:
                break
        copy = list(s)
        copy[j] = w
        positions.append(j)
        clean.append(_row(f"cl-{n:03d}", s, default_ctx))
        corrupted.append(_row(f"co-{n:03d}", copy, default_ctx, level=1))
    out["clean"] = _write_rows(root / "clean.jsonl", clean)
    out["corrupted"] = _write_rows(root / "corrupted.jsonl", corrupted)
    out["positions"] = positions

    rng = np.random.default_rng(FIXTURE_SEED + 1)
    chain_pick = rng.choice(len(sents), size=N_CHAIN, replace=False)
    with_ctx, full, ctx_only = [], [], []
    for n, i in enumerate(chain_pick):
        s = sents[i]
        ctx = sents[3 * n:3 * n + 3]
        cat = tuple(w for c in ctx for w in c) + s
        with_ctx.append(_row(f"w-{n:02d}", s, ctx))
        full.append(_row(f"f-{n:02d}", cat, default_ctx))
        ctx_only.append(_row(f"c-{n:02d}",
                             tuple(w for c in ctx for w in c), default_ctx))
    out["with_ctx"] = _write_rows(root / "with_ctx.jsonl", with_ctx)
    out["full"] = _write_rows(root / "full.jsonl", full)
    out["ctx_only"] = _write_rows(root / "ctx_only.jsonl", ctx_only)

    out["root"] = root
    return out


@pytest.fixture(scope="session")
def uni_none(checkpoints, files, tmp_path_factory):
    """The causal export of testset100 without context: (records, path)."""
    out = tmp_path_factory.mktemp("exports") / "uni_none.jsonl"
    records = run_export(
        AdapterRequest(checkpoints["causal"], "uni", files["testset100"]),
        out=out)
    return records, os.fspath(out)


@pytest.fixture(scope="session")
def bi_none(checkpoints, files, tmp_path_factory):
    """The masked export of testset100 without context: (records, path)."""
    out = tmp_path_factory.mktemp("exports") / "bi_none.jsonl"
    records = run_export(
        AdapterRequest(checkpoints["masked"], "bi", files["testset100"]),
        out=out)
    return records, os.fspath(out)
