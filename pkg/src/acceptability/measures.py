"""The five acceptability measures and per-variant sentence scoring.

Given a sentence's total model log-probability ``logP(s)`` (in nats), its
unigram log-probability ``logPu(s)``, and its token count ``|s|``:

    LP     = logP(s)
    MeanLP = logP(s) / |s|
    PenLP  = logP(s) / ((5 + |s|) / (5 + 1))**alpha
    NormLP = -logP(s) / logPu(s)
    SLOR   = (logP(s) - logPu(s)) / |s|

PenLP's denominator is the beam-search length penalty with alpha = 0.8 by
default.  ``|s|`` counts target tokens under the provider's own
tokenization (``n_target_tokens`` on the record): word count for the
native models, sub-word count for external providers.  The unigram term
is always computed over the target's word tokens, whatever the provider's
tokenization, so NormLP/SLOR stay comparable across providers.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable

from .core import (
    ExperimentType,
    MeasureVector,
    TestSentence,
    TokenLogProbRecord,
    ValidationError,
    atomic_write_text,
)

DEFAULT_ALPHA = 0.8


@dataclass(frozen=True, slots=True)
class MeasureInput:
    """Everything needed to compute the five measures for one sentence."""

    model_lp: float     # sum of token lps, unidirectional or bidirectional
    unigram_lp: float   # log Pu(s), strictly negative (smoothed probs < 1)
    n_tokens: int       # |s|: target tokens only, contexts never count
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not isinstance(self.n_tokens, int) or isinstance(self.n_tokens, bool):
            raise ValidationError("n_tokens must be an integer", field="n_tokens")
        if self.n_tokens < 1:
            raise ValidationError("n_tokens must be >= 1", field="n_tokens")
        if not math.isfinite(self.model_lp) or self.model_lp > 0:
            raise ValidationError(f"model_lp must be finite and <= 0, got {self.model_lp!r}",
                                  field="model_lp")
        if not math.isfinite(self.unigram_lp):
            raise ValidationError("unigram_lp must be finite", field="unigram_lp")
        if self.unigram_lp == 0:
            raise ValidationError("unigram_lp must be nonzero (NormLP undefined)",
                                  field="unigram_lp")
        if self.unigram_lp > 0:
            raise ValidationError("unigram_lp must be < 0", field="unigram_lp")
        if not math.isfinite(self.alpha):
            raise ValidationError("alpha must be finite", field="alpha")


def length_penalty(n_tokens: int, alpha: float) -> float:
    """The PenLP denominator ((5 + n) / 6)**alpha; positive for n >= 1."""
    return ((5.0 + n_tokens) / 6.0) ** alpha


def compute_measures(inp: MeasureInput) -> MeasureVector:
    """Map one MeasureInput to the five measures.

    Pure arithmetic on the inputs; every measure is strictly increasing
    in ``model_lp`` for fixed ``n_tokens`` and ``unigram_lp``.
    """
    lp = inp.model_lp
    n = inp.n_tokens
    return MeasureVector(
        lp=lp,
        mean_lp=lp / n,
        pen_lp=lp / length_penalty(n, inp.alpha),
        norm_lp=-lp / inp.unigram_lp,
        slor=(lp - inp.unigram_lp) / n,
        alpha=inp.alpha,
        n_tokens=n,
    )


def measures_from_record(record: TokenLogProbRecord, unigram_lp: float,
                         alpha: float = DEFAULT_ALPHA) -> MeasureVector:
    """Compute measures from an emitted log-prob record (native or external)."""
    return compute_measures(MeasureInput(
        model_lp=record.total_lp,
        unigram_lp=unigram_lp,
        n_tokens=record.n_target_tokens,
        alpha=alpha,
    ))


def score_variant(provider, sentence: TestSentence, variant: ExperimentType,
                  unigram, direction: str = "uni",
                  alpha: float = DEFAULT_ALPHA) -> MeasureVector:
    """Score one sentence under one context variant with one provider.

    ``provider`` is any LogProbProvider (see ``acceptability.lm``); the
    context conditions the model score but is excluded from ``n_tokens``
    and from ``unigram_lp``, which is computed over the target's word
    tokens by the supplied unigram model and is therefore identical
    across the three variants of the same sentence.
    """
    record = provider.score(sentence, variant, direction)
    return measures_from_record(record, unigram.sentence_logprob(sentence.target),
                                alpha=alpha)


# ---------------------------------------------------------------------------
# scores.csv
# ---------------------------------------------------------------------------

SCORES_HEADER = ["sentence_id", "provider", "direction", "context_variant",
                 "lp", "mean_lp", "pen_lp", "norm_lp", "slor", "n_tokens"]

MEASURE_NAMES = ("lp", "mean_lp", "pen_lp", "norm_lp", "slor")


@dataclass(frozen=True, slots=True)
class ScoreRow:
    sentence_id: str
    provider: str
    direction: str
    context_variant: ExperimentType
    measures: MeasureVector


def dumps_scores(rows: Iterable[ScoreRow]) -> str:
    lines = [",".join(SCORES_HEADER)]
    for row in rows:
        m = row.measures
        lines.append(",".join([
            row.sentence_id, row.provider, row.direction,
            row.context_variant.value,
            repr(m.lp), repr(m.mean_lp), repr(m.pen_lp),
            repr(m.norm_lp), repr(m.slor), str(m.n_tokens),
        ]))
    return "\n".join(lines) + "\n"


def save_scores(rows: Iterable[ScoreRow], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_scores(rows))


def load_scores(path: str | os.PathLike) -> list[dict]:
    """Load scores.csv into dicts (measure columns as floats)."""
    path = os.fspath(path)
    out: list[dict] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("missing header row", path=path, line=1) from None
        if header != SCORES_HEADER:
            raise ValidationError(
                f"header must be {','.join(SCORES_HEADER)}", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SCORES_HEADER):
                raise ValidationError(f"expected {len(SCORES_HEADER)} columns, "
                                      f"got {len(row)}", path=path, line=lineno)
            rec = dict(zip(SCORES_HEADER, row))
            try:
                rec["context_variant"] = ExperimentType(rec["context_variant"])
                for name in MEASURE_NAMES:
                    rec[name] = float(rec[name])
                rec["n_tokens"] = int(rec["n_tokens"])
            except ValueError as e:
                raise ValidationError(str(e), path=path, line=lineno) from None
            out.append(rec)
    return out
