"""Test-set construction: graded synthetic degradations plus HIT bundling.

A test set pairs natural target sentences (drawn from corpus paragraphs
together with their three preceding sentences as context) with degraded
variants of the same sentences.  Degradation applies a chain of small
random edits -- dropping, duplicating, swapping, or substituting words --
so that higher levels carry more damage on average while every variant
stays superficially sentence-like.  Level k applies k independently
seeded edits; because the per-edit seeds are spawned from one root, the
level-(k+1) variant of a sentence extends the level-k edit chain, which
keeps corruption monotone in expectation.

For crowd studies the set is split into HITs of ten sentences: two
originals and eight degraded items whose source sentences are pairwise
distinct and different from both originals, so no rater sees a sentence
next to its own damaged copy.

Everything here is a pure function of (inputs, seed).  Sentence ids
encode provenance as ``d{doc}-s{index}-l{level}``; the HIT builder relies
on the ``-l{level}`` suffix to recover which original a variant came from.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import (
    TestSentence,
    UsageError,
    ValidationError,
    atomic_write_text,
)

Sentence = tuple[str, ...]
Document = Sequence[Sentence]

# a target needs three preceding sentences, so only paragraphs of at
# least four sentences (each substantial enough to damage gradually)
# can contribute
MIN_PARAGRAPH_SENTENCES = 4
MIN_SENTENCE_WORDS = 5
TARGET_MIN_INDEX = 3

HIT_SIZE = 10
HIT_N_ORIGINALS = 2
HIT_N_DEGRADED = 8
_HIT_MAX_ATTEMPTS = 200

_ID_PATTERN = re.compile(r"(?s)\A(.+)-l(\d+)\Z")


class NoiseOp(str, Enum):
    """One elementary edit; the four ops map length n to n-1, n+1, n, n."""

    DROP_WORD = "drop_word"
    DUPLICATE_WORD = "duplicate_word"
    SWAP_ADJACENT = "swap_adjacent"
    SUBSTITUTE_FROM_VOCAB = "substitute_from_vocab"


def apply_op(op: NoiseOp, tokens: Sequence[str], index: int,
             replacement: str | None = None) -> Sentence:
    """Apply one edit at a forced position (the deterministic core of
    :func:`degrade`, useful for worked examples and debugging).

    ``index`` addresses the edited token; for SWAP_ADJACENT it addresses
    the left element of the swapped pair.  SUBSTITUTE_FROM_VOCAB requires
    ``replacement`` and it must differ from the replaced token.
    """
    toks = tuple(tokens)
    n = len(toks)
    op = NoiseOp(op)
    limit = n - 1 if op is NoiseOp.SWAP_ADJACENT else n
    if not 0 <= index < limit:
        raise UsageError(
            f"index {index} out of range for {op.value} on {n} tokens")
    if op is NoiseOp.DROP_WORD:
        if n < 2:
            raise UsageError("drop_word needs at least 2 tokens")
        return toks[:index] + toks[index + 1:]
    if op is NoiseOp.DUPLICATE_WORD:
        return toks[:index] + (toks[index],) + toks[index:]
    if op is NoiseOp.SWAP_ADJACENT:
        return (toks[:index] + (toks[index + 1], toks[index])
                + toks[index + 2:])
    if replacement is None:
        raise UsageError("substitute_from_vocab needs a replacement token")
    if replacement == toks[index]:
        raise UsageError(
            f"replacement must differ from the replaced token {replacement!r}")
    return toks[:index] + (replacement,) + toks[index + 1:]


def _applicable_ops(tokens: Sentence, pool: Sequence[str]) -> list[NoiseOp]:
    n = len(tokens)
    ops = [NoiseOp.DUPLICATE_WORD]
    if n >= 2:
        ops += [NoiseOp.DROP_WORD, NoiseOp.SWAP_ADJACENT]
    # substitution needs some pool word that differs from some token
    if len(pool) >= 2 or (len(pool) == 1 and any(t != pool[0] for t in tokens)):
        ops.append(NoiseOp.SUBSTITUTE_FROM_VOCAB)
    return sorted(ops, key=lambda o: o.value)


def _random_op(tokens: Sentence, rng: np.random.Generator,
               pool: Sequence[str]) -> Sentence:
    ops = _applicable_ops(tokens, pool)
    op = ops[int(rng.integers(len(ops)))]
    n = len(tokens)
    if op is NoiseOp.SWAP_ADJACENT:
        return apply_op(op, tokens, int(rng.integers(n - 1)))
    index = int(rng.integers(n))
    if op is not NoiseOp.SUBSTITUTE_FROM_VOCAB:
        return apply_op(op, tokens, index)
    choices = [w for w in pool if w != tokens[index]]
    return apply_op(op, tokens, index, choices[int(rng.integers(len(choices)))])


def degrade(sentence: Sequence[str], level: int, seed: int,
            vocab: Iterable[str] | None = None) -> Sentence:
    """Apply ``level`` independently seeded random edits to a sentence.

    Deterministic given (sentence, level, seed, vocab).  Substitutions
    draw uniformly from ``vocab`` (minus the replaced word); without a
    vocabulary they draw from the sentence's own distinct words.  The
    output never shrinks below one token because drop/swap only apply
    to two or more.
    """
    toks = tuple(sentence)
    if len(toks) < 2:
        raise ValidationError(
            f"degradation needs a sentence of at least 2 tokens, got {len(toks)}")
    if not isinstance(level, int) or isinstance(level, bool) or level < 1:
        raise UsageError(f"level must be a positive integer, got {level!r}")
    pool = sorted(set(vocab)) if vocab is not None else sorted(set(toks))
    out = toks
    for step in np.random.SeedSequence(seed).spawn(level):
        out = _random_op(out, np.random.Generator(np.random.PCG64(step)), pool)
    return out


# ---------------------------------------------------------------------------
# test-set construction
# ---------------------------------------------------------------------------

def eligible_paragraphs(corpus: Sequence[Document]) -> list[int]:
    """Indices of paragraphs with >= 4 sentences, every one >= 5 words."""
    return [i for i, doc in enumerate(corpus)
            if len(doc) >= MIN_PARAGRAPH_SENTENCES
            and all(len(s) >= MIN_SENTENCE_WORDS for s in doc)]


def sentence_id(doc_index: int, sentence_index: int, level: int) -> str:
    return f"d{doc_index:03d}-s{sentence_index}-l{level}"


def source_key(sid: str) -> str:
    """Strip the ``-l{level}`` suffix: variants of one original share a key."""
    m = _ID_PATTERN.match(sid)
    if m is None:
        raise ValidationError(
            f"sentence id {sid!r} does not encode provenance "
            "(expected '<source>-l<level>')")
    return m.group(1)


def build_testset(corpus: Sequence[Document], n_targets: int,
                  levels: Sequence[int], seed: int) -> list[TestSentence]:
    """Sample targets and emit the original plus one variant per level.

    Picks ``n_targets`` distinct eligible paragraphs, one target sentence
    each (uniform over positions with three predecessors).  The real
    context is the three preceding sentences, untouched.  Output is
    sorted by id; substitutions draw from the whole corpus vocabulary.
    """
    if n_targets < 1:
        raise UsageError(f"n_targets must be >= 1, got {n_targets}")
    clean = []
    for lv in levels:
        if not isinstance(lv, int) or isinstance(lv, bool) or lv < 1:
            raise UsageError(f"degradation levels must be positive integers, "
                             f"got {lv!r}")
        if lv in clean:
            raise UsageError(f"duplicate degradation level {lv}")
        clean.append(lv)
    eligible = eligible_paragraphs(corpus)
    if len(eligible) < n_targets:
        raise ValidationError(
            f"corpus has only {len(eligible)} eligible paragraphs "
            f"(>= {MIN_PARAGRAPH_SENTENCES} sentences of >= "
            f"{MIN_SENTENCE_WORDS} words), need {n_targets}")
    vocab = sorted({w for doc in corpus for s in doc for w in s})

    root = np.random.SeedSequence(seed)
    children = root.spawn(1 + n_targets)
    rng = np.random.Generator(np.random.PCG64(children[0]))
    picked = rng.choice(len(eligible), size=n_targets, replace=False)

    out: list[TestSentence] = []
    for t, pick in enumerate(picked):
        doc_index = eligible[int(pick)]
        doc = corpus[doc_index]
        s_index = TARGET_MIN_INDEX + int(
            rng.integers(len(doc) - TARGET_MIN_INDEX))
        target = tuple(doc[s_index])
        context = tuple(tuple(s) for s in doc[s_index - 3:s_index])
        out.append(TestSentence(
            id=sentence_id(doc_index, s_index, 0), target=target,
            real_context=context, random_context=None,
            origin="original", degradation_level=0))
        level_seeds = children[1 + t].spawn(len(clean))
        for lv, lv_ss in zip(clean, level_seeds):
            out.append(TestSentence(
                id=sentence_id(doc_index, s_index, lv),
                target=degrade(target, lv, int(lv_ss.generate_state(1)[0]),
                               vocab=vocab),
                real_context=context, random_context=None,
                origin="degraded", degradation_level=lv))
    out.sort(key=lambda ts: ts.id)
    return out


def assign_random_contexts(testset: Sequence[TestSentence],
                           corpus: Sequence[Document],
                           seed: int) -> list[TestSentence]:
    """Give every sentence a random context: three consecutive sentences
    from a document other than the one its real context came from.

    A document counts as foreign when it does not contain the sentence's
    real context as a consecutive run (no reliance on the id scheme).
    Existing random contexts are overwritten.  Input order is preserved.
    """
    if len(corpus) < 2:
        raise ValidationError(
            f"random contexts need at least 2 documents, got {len(corpus)}")
    docs = [tuple(tuple(s) for s in doc) for doc in corpus]
    triples = [{doc[i:i + 3] for i in range(len(doc) - 2)} for doc in docs]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    out: list[TestSentence] = []
    for ts in testset:
        rc = tuple(tuple(s) for s in ts.real_context)
        candidates = [i for i, doc in enumerate(docs)
                      if len(doc) >= 3 and rc not in triples[i]]
        if not candidates:
            raise ValidationError(
                f"no eligible foreign document for sentence {ts.id!r}")
        doc = docs[candidates[int(rng.integers(len(candidates)))]]
        start = int(rng.integers(len(doc) - 2))
        out.append(replace(ts, random_context=doc[start:start + 3]))
    return out


# ---------------------------------------------------------------------------
# HIT bundling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hit:
    """Ten sentences for one rating assignment: 2 originals + 8 degraded."""

    hit_id: str
    sentence_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.sentence_ids) != HIT_SIZE:
            raise ValidationError(
                f"a HIT holds exactly {HIT_SIZE} sentence ids, "
                f"got {len(self.sentence_ids)}")


def validate_hits(hits: Sequence[Hit], testset: Sequence[TestSentence]) -> None:
    """Re-derive every HIT invariant from scratch; raise on any violation.

    Checks that the hits partition the testset, that each holds exactly
    2 originals and 8 degraded, and that the 8 degraded come from 8
    distinct source originals, none of them among the hit's originals.
    """
    by_id = {ts.id: ts for ts in testset}
    if len(by_id) != len(testset):
        raise ValidationError("testset contains duplicate ids")
    seen: set[str] = set()
    for hit in hits:
        originals, degraded = [], []
        for sid in hit.sentence_ids:
            if sid in seen:
                raise ValidationError(
                    f"sentence {sid!r} appears in more than one HIT")
            seen.add(sid)
            ts = by_id.get(sid)
            if ts is None:
                raise ValidationError(
                    f"HIT {hit.hit_id!r} references unknown sentence {sid!r}")
            (originals if ts.origin == "original" else degraded).append(ts)
        if len(originals) != HIT_N_ORIGINALS:
            raise ValidationError(
                f"HIT {hit.hit_id!r} has {len(originals)} originals, "
                f"expected {HIT_N_ORIGINALS}")
        original_keys = {source_key(ts.id) for ts in originals}
        degraded_keys = [source_key(ts.id) for ts in degraded]
        if len(set(degraded_keys)) != HIT_N_DEGRADED:
            raise ValidationError(
                f"HIT {hit.hit_id!r} repeats a source original among its "
                "degraded sentences")
        if set(degraded_keys) & original_keys:
            raise ValidationError(
                f"HIT {hit.hit_id!r} pairs an original with its own "
                "degraded variant")
    if len(seen) != len(testset):
        missing = sorted(set(by_id) - seen)[:3]
        raise ValidationError(
            f"HITs are not a partition: {len(testset) - len(seen)} sentences "
            f"unassigned (first missing: {missing})")


def build_hits(testset: Sequence[TestSentence], seed: int) -> list[Hit]:
    """Split a testset into HITs of 10 = 2 originals + 8 degraded.

    Within each HIT the degraded sentences come from pairwise-distinct
    originals, neither of which is shown in the same HIT.  The partition
    is found by seeded shuffling with greedy fill and bounded retries;
    an infeasible testset raises an error naming the seed and the limit.
    """
    if not testset or len(testset) % HIT_SIZE != 0:
        raise ValidationError(
            f"testset size must be a positive multiple of {HIT_SIZE}, "
            f"got {len(testset)}")
    originals = [ts for ts in testset if ts.origin == "original"]
    degraded = [ts for ts in testset if ts.origin != "original"]
    if len(degraded) != 4 * len(originals):
        raise ValidationError(
            f"expected a 1:4 original:degraded ratio, got "
            f"{len(originals)}:{len(degraded)}")
    for ts in testset:
        source_key(ts.id)  # fail fast if provenance is not recoverable
    n_hits = len(testset) // HIT_SIZE
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    for _ in range(_HIT_MAX_ATTEMPTS):
        o_perm = [originals[int(i)] for i in rng.permutation(len(originals))]
        pool = [degraded[int(i)] for i in rng.permutation(len(degraded))]
        hits: list[Hit] = []
        for h in range(n_hits):
            pair = o_perm[2 * h:2 * h + 2]
            used = {source_key(ts.id) for ts in pair}
            chosen: list[TestSentence] = []
            rest: list[TestSentence] = []
            for ts in pool:
                key = source_key(ts.id)
                if len(chosen) < HIT_N_DEGRADED and key not in used:
                    chosen.append(ts)
                    used.add(key)
                else:
                    rest.append(ts)
            if len(chosen) < HIT_N_DEGRADED:
                break
            pool = rest
            ids = [ts.id for ts in pair + chosen]
            order = rng.permutation(HIT_SIZE)  # hide which two are original
            hits.append(Hit(hit_id=f"hit{h:03d}",
                            sentence_ids=tuple(ids[int(i)] for i in order)))
        else:
            validate_hits(hits, testset)
            return hits
    raise ValidationError(
        f"could not split the testset into valid HITs after "
        f"{_HIT_MAX_ATTEMPTS} attempts (seed {seed}); the originals and "
        "degraded sentences cannot be separated from their sources")


# ---------------------------------------------------------------------------
# hits.jsonl
# ---------------------------------------------------------------------------

def dumps_hits(hits: Iterable[Hit]) -> str:
    return "".join(
        json.dumps({"hit_id": h.hit_id, "sentence_ids": list(h.sentence_ids)},
                   ensure_ascii=False) + "\n"
        for h in hits)


def save_hits(hits: Iterable[Hit], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_hits(hits))


def load_hits(path: str | os.PathLike) -> list[Hit]:
    """Load ``hits.jsonl``; errors name the file, line, and field."""
    path = os.fspath(path)
    out: list[Hit] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"invalid JSON: {e.msg}", path=path,
                                      line=lineno) from None
            if not isinstance(obj, dict):
                raise ValidationError("record must be a JSON object",
                                      path=path, line=lineno)
            for key in ("hit_id", "sentence_ids"):
                if key not in obj:
                    raise ValidationError("missing required field", path=path,
                                          line=lineno, field=key)
            sids = obj["sentence_ids"]
            if (not isinstance(sids, list)
                    or not all(isinstance(s, str) for s in sids)):
                raise ValidationError("sentence_ids must be a list of strings",
                                      path=path, line=lineno,
                                      field="sentence_ids")
            hit_id = str(obj["hit_id"])
            if hit_id in seen:
                raise ValidationError(f"duplicate hit_id {hit_id!r}",
                                      path=path, line=lineno, field="hit_id")
            seen.add(hit_id)
            try:
                out.append(Hit(hit_id=hit_id, sentence_ids=tuple(sids)))
            except ValidationError as e:
                raise e.with_context(path=path, line=lineno) from None
    return out
