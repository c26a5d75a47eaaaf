"""Synthetic data: the bundled toy corpus and simulated annotators.

The toy corpus is produced by a small template grammar with rigid word
order, so even a modest Kneser-Ney model learns it well and graded
degradations of its sentences score progressively worse.  The corpus is
generated once with a fixed seed and shipped as package data; the
generator stays here so the file can be reproduced and the tests can
hold the two in sync.

The annotator simulators turn a testset's degradation levels into
1-4 ratings under a simple generative story: every annotator carries a
constant bias; each rating is either a careless error (uniform on the
scale) with some probability, or the sentence's true mean plus bias
plus noise, rounded and clamped to the scale.  Context conditions reuse
the same story with a higher error rate (annotators who read context
sentences skim more) and, for real context, a small upward shift of the
true mean.  Regressing in-context on out-of-context means then gives a
line with slope (1 - p_err_context) / (1 - p_err_none) < 1, which is
what the context analysis is designed to detect.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ExperimentType,
    RatingRecord,
    TestSentence,
    ValidationError,
)

TOY_CORPUS_SEED = 109
TOY_CORPUS_DOCS = 240

# ---------------------------------------------------------------------------
# toy corpus
# ---------------------------------------------------------------------------

_DETS = ["the", "a"]
_ADJS = ["small", "old", "young", "quiet", "hungry", "sleepy", "curious",
         "gentle", "clever", "tired"]
_NOUNS = ["cat", "dog", "bird", "fox", "rabbit", "farmer", "child", "teacher",
          "baker", "sailor", "gardener", "painter"]
_PLACES = ["garden", "kitchen", "village", "market", "river", "meadow",
           "barn", "orchard"]
_VERBS_IN = ["slept", "waited", "wandered", "rested", "smiled", "worked",
             "sang", "listened"]
_VERBS_TR = ["watched", "followed", "greeted", "carried", "found", "helped",
             "fed", "drew"]
_ADVS = ["quietly", "slowly", "happily", "carefully", "patiently", "calmly"]
_PREPS = ["in", "near", "behind", "beside"]
_OPENERS = ["yesterday", "today", "afterwards", "eventually", "meanwhile",
            "later"]


def _np(rng: random.Random, adj_prob: float = 0.5) -> str:
    det = rng.choice(_DETS)
    if rng.random() < adj_prob:
        return f"{det} {rng.choice(_ADJS)} {rng.choice(_NOUNS)}"
    return f"{det} {rng.choice(_NOUNS)}"


def _pp(rng: random.Random) -> str:
    return f"{rng.choice(_PREPS)} the {rng.choice(_PLACES)}"


def _toy_sentence(rng: random.Random) -> str:
    kind = rng.randrange(4)
    if kind == 0:
        s = f"{_np(rng)} {rng.choice(_VERBS_IN)} {_pp(rng)}"
    elif kind == 1:
        s = f"{_np(rng)} {rng.choice(_VERBS_TR)} {_np(rng)} {rng.choice(_ADVS)}"
    elif kind == 2:
        s = (f"{rng.choice(_OPENERS)} {_np(rng)} {rng.choice(_VERBS_IN)} "
             f"{rng.choice(_ADVS)}")
    else:
        s = (f"{_np(rng)} {_pp(rng)} {rng.choice(_VERBS_TR)} "
             f"{_np(rng, adj_prob=0.3)}")
    assert len(s.split()) >= 5
    return s


def generate_toy_corpus(n_docs: int = TOY_CORPUS_DOCS,
                        seed: int = TOY_CORPUS_SEED) -> str:
    """The bundled corpus text: blank-line-separated paragraphs."""
    rng = random.Random(seed)
    docs = []
    for _ in range(n_docs):
        n_sentences = rng.randrange(5, 10)
        docs.append("\n".join(_toy_sentence(rng) for _ in range(n_sentences)))
    return "\n\n".join(docs) + "\n"


# ---------------------------------------------------------------------------
# annotator simulation
# ---------------------------------------------------------------------------

LEVEL_MEAN_TOP = 4.0
LEVEL_MEAN_STEP = 0.75


def level_mean(level: int) -> float:
    """True mean acceptability assumed for a degradation level."""
    return LEVEL_MEAN_TOP - LEVEL_MEAN_STEP * level


@dataclass(frozen=True)
class AnnotatorPool:
    """A simulated crowd: per-annotator bias plus careless errors."""

    n_annotators: int = 20
    p_error: float = 0.05       # chance a rating is uniform on the scale
    bias_sd: float = 0.35       # spread of per-annotator constant bias
    noise_sd: float = 0.55      # per-rating noise around the true mean
    n_spammers: int = 0         # annotators whose EVERY rating is uniform
    shift: float = 0.0          # added to every sentence's true mean

    def validate(self) -> None:
        if self.n_annotators < 1:
            raise ValidationError(
                f"n_annotators must be >= 1, got {self.n_annotators}")
        if not (0.0 <= self.p_error <= 1.0):
            raise ValidationError(
                f"p_error must be in [0, 1], got {self.p_error}")
        if self.n_spammers < 0 or self.n_spammers > self.n_annotators:
            raise ValidationError(
                f"n_spammers must be in [0, {self.n_annotators}], "
                f"got {self.n_spammers}")


def _worker_name(experiment: ExperimentType, i: int, spammer: bool) -> str:
    tag = "spammer" if spammer else "w"
    return f"{experiment.value}-{tag}{i:03d}"


def simulate_ratings(testset: Sequence[TestSentence], seed: int,
                     experiment: ExperimentType = ExperimentType.NONE,
                     pool: AnnotatorPool = AnnotatorPool(),
                     ) -> list[RatingRecord]:
    """Ratings for one experiment condition over the whole testset.

    Every annotator rates every sentence; annotator k of the pool is the
    same simulated person across conditions only if the caller reuses
    the seed and pool (conditions are normally drawn independently,
    matching separate crowd batches).
    """
    pool.validate()
    if not testset:
        raise ValidationError("empty testset")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    biases = rng.normal(0.0, pool.bias_sd, size=pool.n_annotators)
    records: list[RatingRecord] = []
    for k in range(pool.n_annotators):
        spammer = k < pool.n_spammers
        for sent in testset:
            if spammer or rng.random() < pool.p_error:
                rating = float(rng.integers(1, 5))
            else:
                mu = level_mean(sent.degradation_level) + pool.shift + biases[k]
                value = round(mu + rng.normal(0.0, pool.noise_sd))
                rating = float(min(4, max(1, value)))
            records.append(RatingRecord(
                worker_id=_worker_name(experiment, k, spammer),
                sentence_id=sent.id, experiment=experiment, rating=rating))
    return records


@dataclass(frozen=True)
class ContextStudy:
    """Error rates and shift for the three-condition context experiment."""

    pool: AnnotatorPool = AnnotatorPool(n_spammers=2)
    p_error_context: float = 0.25   # careless rate when context is shown
    real_shift: float = 0.3         # true-mean lift from a supportive context


def simulate_context_study(testset: Sequence[TestSentence], seed: int,
                           study: ContextStudy = ContextStudy(),
                           ) -> list[RatingRecord]:
    """Ratings for all three conditions (none / real / random).

    Conditions use disjoint simulated crowds drawn from child seeds, the
    way separate collection rounds would be.
    """
    ss = np.random.SeedSequence(seed)
    seeds = [int(c.generate_state(1)[0]) for c in ss.spawn(3)]
    base = study.pool
    in_context = replace(base, p_error=study.p_error_context)
    records = simulate_ratings(testset, seeds[0], ExperimentType.NONE, base)
    records += simulate_ratings(testset, seeds[1], ExperimentType.REAL,
                                replace(in_context, shift=study.real_shift))
    records += simulate_ratings(testset, seeds[2], ExperimentType.RANDOM,
                                in_context)
    return records


def true_mean_by_sentence(testset: Iterable[TestSentence],
                          shift: float = 0.0) -> Mapping[str, float]:
    """The generative true means, for checking recovered statistics."""
    return {s.id: level_mean(s.degradation_level) + shift for s in testset}
