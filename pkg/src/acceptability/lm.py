"""Native probability providers: smoothed unigram and Kneser-Ney n-gram.

The n-gram model is an interpolated Kneser-Ney model with a single fixed
discount D (default 0.75): the top order uses raw counts, every lower
order uses continuation counts (distinct left extensions), and the
bottom unigram level is interpolated with the uniform distribution over
the prediction vocabulary so every conditional is strictly positive.
Unseen histories back off to the next-lower order entirely.

Conventions (documented, applied consistently):

* Sentences are padded with ``order - 1`` start markers and one end
  marker.  N-grams are counted at every position whose FINAL token lies
  in the sentence proper (or is the end marker), so start markers occur
  in histories but are never predicted, and the conditional distribution
  over the prediction vocabulary (vocab + unknown + end marker) sums to
  exactly 1 for every history.
* Unidirectional scoring follows the chain rule; the end marker's
  log-probability is folded into the final token's entry, so the record
  has one entry per target token and their sum is the full sentence
  log-probability.  ``include_end=False`` scores the tokens as a prefix
  (no end term) — that is the form under which the chain-rule identity
  ``lp(target | ctx) == lp(ctx + target) - lp_prefix(ctx)`` holds.
* Bidirectional scoring averages the forward conditional with a backward
  conditional from a twin model trained on reversed sentences; the total
  is a confidence score, NOT a normalized probability.
* Tokens below the vocabulary count threshold (min_count, default 2) map
  to the unknown token for both model and unigram scoring.

Model files are JSON with a format_version field; saving is
deterministic (sorted keys), so identical training inputs produce
byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import (
    ExperimentType,
    NumericalError,
    Sentence,
    TestSentence,
    TokenLogProb,
    TokenLogProbRecord,
    UsageError,
    ValidationError,
    atomic_write_text,
)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

MODEL_FORMAT_VERSION = 1

PROVIDER_NGRAM = "ngram-kn"
PROVIDER_UNIGRAM = "unigram"


def _count_vocab(sentences: Sequence[Sentence], min_count: int) -> frozenset[str]:
    counts: dict[str, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    return frozenset(w for w, c in counts.items() if c >= min_count)


# ---------------------------------------------------------------------------
# unigram
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnigramModel:
    """Additive-delta smoothed unigram distribution over vocab + unknown."""

    counts: Mapping[str, int]     # over mapped tokens (vocab words and UNK)
    total: int                    # sum of counts
    delta: float
    vocab: frozenset[str]         # real words with count >= min_count
    min_count: int = 1

    provider_tag = PROVIDER_UNIGRAM

    def map_token(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def prediction_vocab(self) -> list[str]:
        return sorted(self.vocab) + [UNK]

    def prob(self, token: str) -> float:
        v = len(self.vocab) + 1  # + unknown
        c = self.counts.get(self.map_token(token), 0)
        return (c + self.delta) / (self.total + self.delta * v)

    def logprob(self, token: str) -> float:
        return math.log(self.prob(token))

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        """log Pu(s) = sum of token log-probabilities; no boundary markers."""
        if not tokens:
            raise ValidationError("cannot score an empty token sequence")
        return math.fsum(self.logprob(t) for t in tokens)

    def capabilities(self) -> set[str]:
        return {"uni"}

    def score(self, sentence: TestSentence, variant: ExperimentType,
              direction: str = "uni") -> TokenLogProbRecord:
        """LogProbProvider interface; a unigram has no context conditioning."""
        if direction != "uni":
            raise ValidationError(
                f"provider '{self.provider_tag}' does not support direction "
                f"{direction!r}")
        sentence.context_tokens(variant)  # enforce the variant precondition
        return TokenLogProbRecord(
            sentence_id=sentence.id, provider=self.provider_tag,
            direction="uni", context_variant=variant,
            tokens=tuple(TokenLogProb(t, self.logprob(t)) for t in sentence.target),
            n_target_tokens=len(sentence.target),
        )


def train_unigram(corpus: Sequence[Sentence], delta: float = 1.0,
                  min_count: int = 2) -> UnigramModel:
    """Count tokens (OOV mapped to the unknown token) and smooth additively."""
    sentences = [s for s in corpus if s]
    if not sentences:
        raise ValidationError("empty corpus")
    if not (delta > 0):
        raise UsageError(f"delta must be > 0, got {delta!r}")
    if min_count < 1:
        raise UsageError(f"min_count must be >= 1, got {min_count!r}")
    vocab = _count_vocab(sentences, min_count)
    counts: dict[str, int] = {}
    total = 0
    for sent in sentences:
        for tok in sent:
            w = tok if tok in vocab else UNK
            counts[w] = counts.get(w, 0) + 1
            total += 1
    return UnigramModel(counts=counts, total=total, delta=float(delta),
                        vocab=vocab, min_count=min_count)


# ---------------------------------------------------------------------------
# Kneser-Ney n-gram
# ---------------------------------------------------------------------------

class _KNTable:
    """Count tables and the interpolated KN recursion for one direction.

    Everything is derived from the top-order n-gram counts:
    raw k-gram counts are suffix marginals of the top counts, and each
    lower level's continuation counts N1+(. h w) are the number of
    distinct left extensions among the (k+1)-gram types.
    """

    def __init__(self, order: int, discount: float,
                 top: Mapping[tuple[str, ...], Mapping[str, int]],
                 prediction_vocab: Sequence[str]):
        self.order = order
        self.discount = discount
        self.top = {h: dict(ws) for h, ws in top.items()}
        self.top_totals = {h: sum(ws.values()) for h, ws in self.top.items()}
        self._pred = list(prediction_vocab)
        self._pred_set = set(self._pred)

        # raw k-gram counts for k = 2..order (k = order is `top` itself)
        raw: dict[int, dict[tuple[str, ...], int]] = {
            k: {} for k in range(2, order + 1)}
        for h, ws in self.top.items():
            for w, c in ws.items():
                gram = h + (w,)
                for k in range(2, order + 1):
                    suffix = gram[order - k:]
                    raw[k][suffix] = raw[k].get(suffix, 0) + c

        # continuation counts per level 1..order-1 from (k+1)-gram TYPES
        self.cont: dict[int, dict[tuple[str, ...], dict[str, int]]] = {}
        self.cont_totals: dict[int, dict[tuple[str, ...], int]] = {}
        for k in range(1, order):
            level: dict[tuple[str, ...], dict[str, int]] = {}
            for gram in raw[k + 1]:
                h, w = gram[1:-1], gram[-1]
                level.setdefault(h, {})
                level[h][w] = level[h].get(w, 0) + 1
            self.cont[k] = level
            self.cont_totals[k] = {h: sum(ws.values()) for h, ws in level.items()}

    def _p_floor(self, w: str) -> float:
        # uniform over the prediction vocabulary; 0 for anything else (BOS)
        return 1.0 / len(self._pred) if w in self._pred_set else 0.0

    def _p_level(self, w: str, h: tuple[str, ...], level: int) -> float:
        if level == 0:
            return self._p_floor(w)
        if level == self.order:
            followers = self.top.get(h)
            total = self.top_totals.get(h, 0)
        else:
            followers = self.cont[level].get(h)
            total = self.cont_totals[level].get(h, 0)
        if not followers or total == 0:
            return self._p_level(w, h[1:] if h else h, level - 1)
        d = self.discount
        c = followers.get(w, 0)
        lam = d * len(followers) / total
        lower = self._p_level(w, h[1:] if h else h, level - 1)
        return max(c - d, 0.0) / total + lam * lower

    def cond_prob(self, w: str, history: tuple[str, ...]) -> float:
        """P(w | history); histories shorter than order-1 start lower."""
        h = tuple(history[-(self.order - 1):]) if self.order > 1 else ()
        return self._p_level(w, h, len(h) + 1)


def _padded(sentence: tuple[str, ...], order: int) -> tuple[str, ...]:
    return (BOS,) * (order - 1) + sentence + (EOS,)


def _count_top(sentences: Iterable[tuple[str, ...]], order: int
               ) -> dict[tuple[str, ...], dict[str, int]]:
    top: dict[tuple[str, ...], dict[str, int]] = {}
    for sent in sentences:
        seq = _padded(sent, order)
        for p in range(order - 1, len(seq)):
            h, w = seq[p - order + 1:p], seq[p]
            slot = top.setdefault(h, {})
            slot[w] = slot.get(w, 0) + 1
    return top


@dataclass(frozen=True)
class NgramModel:
    """Interpolated Kneser-Ney model, orders 2-5, forward and backward tables.

    The backward table is trained on the reversed sentences of the same
    corpus and powers bidirectional pseudo-likelihood scoring.
    """

    order: int
    discount: float
    min_count: int
    vocab: frozenset[str]
    fwd: _KNTable = field(repr=False)
    bwd: _KNTable = field(repr=False)

    provider_tag = PROVIDER_NGRAM

    def map_token(self, token: str) -> str:
        if token in self.vocab or token in (BOS, EOS, UNK):
            return token
        return UNK

    def map_tokens(self, tokens: Sequence[str]) -> tuple[str, ...]:
        return tuple(self.map_token(t) for t in tokens)

    def prediction_vocab(self) -> list[str]:
        return sorted(self.vocab) + [UNK, EOS]

    def cond_prob(self, w: str, history: Sequence[str],
                  direction: str = "fwd") -> float:
        table = self.fwd if direction == "fwd" else self.bwd
        return table.cond_prob(self.map_token(w), self.map_tokens(history))

    def cond_logprob(self, w: str, history: Sequence[str],
                     direction: str = "fwd") -> float:
        return math.log(self.cond_prob(w, history, direction))

    def token_logprobs(self, tokens: Sequence[str], context: Sequence[str] = (),
                       direction: str = "fwd") -> list[float]:
        """Chain-rule log-probs of ``tokens`` given preceding ``context``."""
        table = self.fwd if direction == "fwd" else self.bwd
        history = (BOS,) * (self.order - 1) + self.map_tokens(context)
        out = []
        for tok in self.map_tokens(tokens):
            out.append(math.log(table.cond_prob(tok, history)))
            history = history + (tok,)
        return out

    def end_logprob(self, tokens: Sequence[str], context: Sequence[str] = (),
                    direction: str = "fwd") -> float:
        """log P(end marker | full token sequence)."""
        table = self.fwd if direction == "fwd" else self.bwd
        history = (BOS,) * (self.order - 1) + self.map_tokens(context) \
            + self.map_tokens(tokens)
        return math.log(table.cond_prob(EOS, history))

    def capabilities(self) -> set[str]:
        return {"uni", "bi"}

    def score(self, sentence: TestSentence, variant: ExperimentType,
              direction: str = "uni") -> TokenLogProbRecord:
        """LogProbProvider interface over TestSentence + context variant."""
        context = sentence.context_tokens(variant)
        if direction == "uni":
            return score_uni(self, sentence.target, context,
                             sentence_id=sentence.id, context_variant=variant)
        if direction == "bi":
            return score_bi(self, sentence.target, context,
                            sentence_id=sentence.id, context_variant=variant)
        raise ValidationError(f"direction must be 'uni' or 'bi', got {direction!r}")


def train_ngram(corpus: Sequence[Sentence], order: int, discount: float = 0.75,
                min_count: int = 2) -> NgramModel:
    """Count n-grams of the (unk-mapped) corpus and build both directions."""
    if not isinstance(order, int) or not (2 <= order <= 5):
        raise UsageError(f"order must be an integer in [2, 5], got {order!r}")
    if not (0 < discount < 1):
        raise UsageError(f"discount must be in (0, 1), got {discount!r}")
    if min_count < 1:
        raise UsageError(f"min_count must be >= 1, got {min_count!r}")
    sentences = [s for s in corpus if s]
    if not sentences:
        raise ValidationError("empty corpus")
    vocab = _count_vocab(sentences, min_count)
    mapped = [tuple(t if t in vocab else UNK for t in s) for s in sentences]
    pred = sorted(vocab) + [UNK, EOS]
    fwd = _KNTable(order, discount, _count_top(mapped, order), pred)
    bwd = _KNTable(order, discount,
                   _count_top([s[::-1] for s in mapped], order), pred)
    return NgramModel(order=order, discount=float(discount), min_count=min_count,
                      vocab=vocab, fwd=fwd, bwd=bwd)


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------

def score_uni(model, target: Sequence[str], context: Sequence[str] = (), *,
              include_end: bool = True, sentence_id: str = "-",
              context_variant: ExperimentType = ExperimentType.NONE
              ) -> TokenLogProbRecord:
    """Chain-rule scoring (Eq. of unidirectional models): one entry per token.

    For n-gram models the end marker's log-probability is folded into the
    final entry when ``include_end`` is true (the default), making the
    record's total the full sentence log-probability; with
    ``include_end=False`` the tokens are scored as a sentence prefix.
    Unigram models have no boundary markers, so ``include_end`` is a
    no-op for them.
    """
    target = tuple(target)
    if not target:
        raise ValidationError("cannot score an empty target")
    if isinstance(model, UnigramModel):
        lps = [model.logprob(t) for t in target]
    else:
        lps = model.token_logprobs(target, context)
        if include_end:
            lps[-1] += model.end_logprob(target, context)
    return TokenLogProbRecord(
        sentence_id=sentence_id, provider=model.provider_tag, direction="uni",
        context_variant=context_variant,
        tokens=tuple(TokenLogProb(t, lp) for t, lp in zip(target, lps)),
        n_target_tokens=len(target),
    )


def score_bi(model: NgramModel, target: Sequence[str],
             context: Sequence[str] = (), *, sentence_id: str = "-",
             context_variant: ExperimentType = ExperimentType.NONE
             ) -> TokenLogProbRecord:
    """Bidirectional pseudo-likelihood: mean of forward and backward logs.

    lp_i = 0.5 * (log P_fwd(w_i | left n-1 tokens)
                  + log P_bwd(w_i | right n-1 tokens));
    the backward term comes from the reversed-corpus table, so a prepended
    context conditions the forward component only (target tokens have no
    right context outside the sentence).  The total is a confidence
    score, not a normalized probability.
    """
    target = tuple(target)
    if not target:
        raise ValidationError("cannot score an empty target")
    fwd_lps = model.token_logprobs(target, context, direction="fwd")
    bwd_lps = model.token_logprobs(target[::-1], (), direction="bwd")[::-1]
    lps = [0.5 * (f + b) for f, b in zip(fwd_lps, bwd_lps)]
    return TokenLogProbRecord(
        sentence_id=sentence_id, provider=model.provider_tag, direction="bi",
        context_variant=context_variant,
        tokens=tuple(TokenLogProb(t, lp) for t, lp in zip(target, lps)),
        n_target_tokens=len(target),
    )


def perplexity(model, heldout: Sequence[Sentence]) -> float:
    """exp(-(sum lp)/N) over the heldout tokens.

    N counts scored events: for the n-gram model that includes one end
    marker per sentence (which it scores); the unigram model scores word
    tokens only.
    """
    sentences = [tuple(s) for s in heldout if s]
    if not sentences:
        raise ValidationError("empty heldout")
    total_lp = 0.0
    n = 0
    for sent in sentences:
        total_lp += score_uni(model, sent).total_lp
        n += len(sent) + (0 if isinstance(model, UnigramModel) else 1)
    try:
        return math.exp(-total_lp / n)
    except OverflowError:
        raise NumericalError(f"perplexity overflow (mean lp {total_lp / n})") from None


# ---------------------------------------------------------------------------
# replay provider for externally supplied log-probs
# ---------------------------------------------------------------------------

class RecordProvider:
    """LogProbProvider that replays records loaded from a logprobs.jsonl file."""

    def __init__(self, records: Iterable[TokenLogProbRecord]):
        self._by_key: dict[tuple[str, str, str], TokenLogProbRecord] = {}
        providers = set()
        for rec in records:
            key = (rec.sentence_id, rec.context_variant.value, rec.direction)
            if key in self._by_key:
                raise ValidationError(
                    f"duplicate record for sentence {rec.sentence_id!r}, "
                    f"variant {rec.context_variant.value!r}, "
                    f"direction {rec.direction!r}")
            self._by_key[key] = rec
            providers.add(rec.provider)
        self.provider_tag = providers.pop() if len(providers) == 1 else "mixed"

    def capabilities(self) -> set[str]:
        return {d for (_, _, d) in self._by_key}

    def score(self, sentence: TestSentence, variant: ExperimentType,
              direction: str = "uni") -> TokenLogProbRecord:
        key = (sentence.id, variant.value, direction)
        try:
            return self._by_key[key]
        except KeyError:
            raise ValidationError(
                f"no log-prob record for sentence {sentence.id!r} under "
                f"variant {variant.value!r}, direction {direction!r}") from None


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def _counts_to_json(table: _KNTable) -> dict:
    return {" ".join(h): dict(sorted(ws.items()))
            for h, ws in sorted(table.top.items())}


def _counts_from_json(obj: Mapping[str, Mapping[str, int]]
                      ) -> dict[tuple[str, ...], dict[str, int]]:
    out: dict[tuple[str, ...], dict[str, int]] = {}
    for h_str, ws in obj.items():
        h = tuple(h_str.split(" ")) if h_str else ()
        out[h] = {w: int(c) for w, c in ws.items()}
    return out


def model_to_json(model) -> dict:
    if isinstance(model, NgramModel):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "type": PROVIDER_NGRAM,
            "order": model.order,
            "discount": model.discount,
            "min_count": model.min_count,
            "vocab": sorted(model.vocab),
            "counts": {"fwd": _counts_to_json(model.fwd),
                       "bwd": _counts_to_json(model.bwd)},
        }
    if isinstance(model, UnigramModel):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "type": PROVIDER_UNIGRAM,
            "delta": model.delta,
            "min_count": model.min_count,
            "total": model.total,
            "vocab": sorted(model.vocab),
            "counts": dict(sorted(model.counts.items())),
        }
    raise ValidationError(f"unknown model type {type(model).__name__}")


def model_from_json(obj: Mapping):
    version = obj.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValidationError(f"unsupported model format_version {version!r} "
                              f"(expected {MODEL_FORMAT_VERSION})")
    kind = obj.get("type")
    if kind == PROVIDER_NGRAM:
        order = int(obj["order"])
        vocab = frozenset(obj["vocab"])
        pred = sorted(vocab) + [UNK, EOS]
        discount = float(obj["discount"])
        fwd = _KNTable(order, discount, _counts_from_json(obj["counts"]["fwd"]), pred)
        bwd = _KNTable(order, discount, _counts_from_json(obj["counts"]["bwd"]), pred)
        return NgramModel(order=order, discount=discount,
                          min_count=int(obj["min_count"]), vocab=vocab,
                          fwd=fwd, bwd=bwd)
    if kind == PROVIDER_UNIGRAM:
        return UnigramModel(counts={w: int(c) for w, c in obj["counts"].items()},
                            total=int(obj["total"]), delta=float(obj["delta"]),
                            vocab=frozenset(obj["vocab"]),
                            min_count=int(obj["min_count"]))
    raise ValidationError(f"unknown model type {kind!r}")


def dumps_model(model) -> str:
    return json.dumps(model_to_json(model), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")) + "\n"


def save_model(model, path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_model(model))


def load_model(path: str | os.PathLike):
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"invalid model file: {e.msg}", path=path) from None
    try:
        return model_from_json(obj)
    except ValidationError as e:
        raise e.with_context(path=path) from None
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"invalid model file: {e!r}", path=path) from None
