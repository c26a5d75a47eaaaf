"""Shared domain types, the word tokenizer, and the toolkit's file formats.

Everything downstream (test-set generation, language models, measures,
statistics, CLI) speaks in terms of the types defined here and exchanges
data through three formats:

* ``testset.jsonl``  — one JSON object per line:
  ``{"id", "target", "real_context": [3 strings], "random_context": [3 strings] | null,
  "origin", "degradation_level"}``.  Sentences are stored as single
  space-joined strings of lowercased tokens.
* ``ratings.csv``    — header ``worker_id,sentence_id,experiment,rating``;
  UTF-8, LF line endings; raw ratings are the four scale points
  1.0 / 2.0 / 3.0 / 4.0.
* ``logprobs.jsonl`` — one JSON object per line:
  ``{"sentence_id", "provider", "direction": "uni"|"bi",
  "context_variant": "none"|"real"|"random",
  "tokens": [{"t": str, "lp": float}, ...], "n_target_tokens": int}``.
  This file is the wire contract between the toolkit and external
  log-probability exporters; floats are serialized with full round-trip
  precision (Python ``repr``, >= 12 significant digits).

All types are immutable after construction and safe to share across
concurrent readers.  Loading is single-threaded per file.
"""
from __future__ import annotations

import csv
import enum
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass
from typing import Iterable, Sequence


class ValidationError(ValueError):
    """Malformed input data.  Carries path/line/field context when known."""

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, field: str | None = None):
        self.msg = message
        self.path = path
        self.line = line
        self.field = field
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)

    def with_context(self, *, path: str | None = None,
                     line: int | None = None) -> "ValidationError":
        """Return a copy of this error with file location attached."""
        return ValidationError(self.msg, path=path if path is not None else self.path,
                               line=line if line is not None else self.line,
                               field=self.field)


class UsageError(ValueError):
    """Bad invocation (unknown flag combination, missing argument...)."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced nonsense."""


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

# A word is a run of word characters, optionally chained by internal
# apostrophes or hyphens ("don't", "well-known"); every other non-space
# character is split off as a single-character token.
_TOKEN_RE = re.compile(r"\w+(?:['’-]\w+)*|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into word and punctuation tokens.

    This is the single tokenization used everywhere: corpus ingestion,
    language-model training, unigram counts, and the token count |s|.
    It is a pure function: punctuation is split off word edges into
    separate single-character tokens, word-internal apostrophes and
    hyphens are kept ("don't" stays one token), and all text is
    lowercased.

    The function is stable under re-tokenization of its own output:
    ``tokenize(" ".join(tokenize(text))) == tokenize(text)``.

    Examples
    --------
    >>> tokenize("The dog, obviously, slept.")
    ['the', 'dog', ',', 'obviously', ',', 'slept', '.']
    """
    return _TOKEN_RE.findall(text.lower())


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

class ExperimentType(str, enum.Enum):
    """The three context conditions a sentence can be judged/scored under."""

    NONE = "none"      # no context        (h0)
    REAL = "real"      # real context      (h+)
    RANDOM = "random"  # random context    (h-)

    def __str__(self) -> str:  # so f-strings print "real", not the repr
        return self.value


ORIGIN_ORIGINAL = "original"
ORIGIN_DEGRADED = "degraded"

Sentence = tuple[str, ...]  # one sentence as a tuple of lowercased tokens


def _check_sentence(tokens: Sequence[str], field: str) -> tuple[str, ...]:
    toks = tuple(tokens)
    if len(toks) < 1:
        raise ValidationError(f"{field} must have at least 1 token", field=field)
    for t in toks:
        if not isinstance(t, str) or not t:
            raise ValidationError(f"{field} contains an empty or non-string token",
                                  field=field)
        if t != t.lower():
            raise ValidationError(
                f"{field} must be lowercased (got {t!r}); "
                "all text is lowercased at ingestion", field=field)
        if any(ch.isspace() for ch in t):
            raise ValidationError(f"{field} token {t!r} contains whitespace",
                                  field=field)
    return toks


@dataclass(frozen=True, slots=True)
class TestSentence:
    """A target sentence plus its real (and optionally random) 3-sentence context."""

    __test__ = False  # not a pytest class, despite the name

    id: str
    target: Sentence
    real_context: tuple[Sentence, Sentence, Sentence]
    random_context: tuple[Sentence, Sentence, Sentence] | None
    origin: str                # "original" | "degraded"
    degradation_level: int

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("id must be a nonempty string", field="id")
        object.__setattr__(self, "target", _check_sentence(self.target, "target"))
        if len(self.real_context) != 3:
            raise ValidationError("real_context must have exactly 3 sentences",
                                  field="real_context")
        object.__setattr__(self, "real_context", tuple(
            _check_sentence(s, "real_context") for s in self.real_context))
        if self.random_context is not None:
            if len(self.random_context) != 3:
                raise ValidationError("random_context must have exactly 3 sentences",
                                      field="random_context")
            object.__setattr__(self, "random_context", tuple(
                _check_sentence(s, "random_context") for s in self.random_context))
        if self.origin not in (ORIGIN_ORIGINAL, ORIGIN_DEGRADED):
            raise ValidationError(
                f"origin must be 'original' or 'degraded', got {self.origin!r}",
                field="origin")
        if not isinstance(self.degradation_level, int) or isinstance(self.degradation_level, bool):
            raise ValidationError("degradation_level must be an integer",
                                  field="degradation_level")
        if self.degradation_level < 0:
            raise ValidationError("degradation_level must be >= 0",
                                  field="degradation_level")
        if (self.origin == ORIGIN_ORIGINAL) != (self.degradation_level == 0):
            raise ValidationError(
                "origin 'original' requires degradation_level 0 and vice versa",
                field="degradation_level")

    def context_tokens(self, variant: ExperimentType) -> tuple[str, ...]:
        """Flatten the requested context to one token stream (empty for NONE)."""
        if variant == ExperimentType.NONE:
            return ()
        if variant == ExperimentType.REAL:
            ctx = self.real_context
        else:
            if self.random_context is None:
                raise ValidationError(
                    f"sentence {self.id!r} has no random_context", field="random_context")
            ctx = self.random_context
        return tuple(t for sent in ctx for t in sent)


RAW_SCALE_POINTS = (1.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True, slots=True)
class RatingRecord:
    """One worker's rating of one sentence under one experiment condition.

    Raw ratings are the four scale points; after calibration they are
    real-valued in [0.0, 5.0] (a +-1.0 shift of the raw scale).
    """

    worker_id: str
    sentence_id: str
    experiment: ExperimentType
    rating: float

    def __post_init__(self):
        if not self.worker_id:
            raise ValidationError("worker_id must be nonempty", field="worker_id")
        if not self.sentence_id:
            raise ValidationError("sentence_id must be nonempty", field="sentence_id")
        if not isinstance(self.experiment, ExperimentType):
            raise ValidationError(f"unknown experiment {self.experiment!r}",
                                  field="experiment")
        if not math.isfinite(self.rating) or not (0.0 <= self.rating <= 5.0):
            raise ValidationError(f"rating {self.rating!r} outside [0.0, 5.0]",
                                  field="rating")

    def shifted(self, delta: float) -> "RatingRecord":
        return RatingRecord(self.worker_id, self.sentence_id,
                            self.experiment, self.rating + delta)


@dataclass(frozen=True, slots=True)
class TokenLogProb:
    """One scored token: its text and log-probability in nats."""

    t: str
    lp: float


@dataclass(frozen=True, slots=True)
class TokenLogProbRecord:
    """Per-token log-probabilities for one sentence under one provider.

    ``tokens`` covers the target sentence only — context tokens never
    appear.  Every lp is finite and <= 0 (nats).  ``n_target_tokens``
    always equals ``len(tokens)``.
    """

    sentence_id: str
    provider: str
    direction: str                 # "uni" | "bi"
    context_variant: ExperimentType
    tokens: tuple[TokenLogProb, ...]
    n_target_tokens: int

    def __post_init__(self):
        if not self.sentence_id:
            raise ValidationError("sentence_id must be nonempty", field="sentence_id")
        if not self.provider:
            raise ValidationError("provider must be nonempty", field="provider")
        if self.direction not in ("uni", "bi"):
            raise ValidationError(f"direction must be 'uni' or 'bi', got {self.direction!r}",
                                  field="direction")
        if not isinstance(self.context_variant, ExperimentType):
            raise ValidationError(f"unknown context_variant {self.context_variant!r}",
                                  field="context_variant")
        toks = tuple(self.tokens)
        object.__setattr__(self, "tokens", toks)
        if len(toks) < 1:
            raise ValidationError("tokens must be nonempty", field="tokens")
        for tok in toks:
            if not isinstance(tok.t, str) or not tok.t:
                raise ValidationError("token text must be a nonempty string",
                                      field="tokens")
            if not math.isfinite(tok.lp):
                raise ValidationError(f"log-probability must be finite, got {tok.lp!r}",
                                      field="tokens")
            if tok.lp > 0:
                raise ValidationError(f"log-probability must be <= 0, got {tok.lp!r}",
                                      field="tokens")
        if self.n_target_tokens != len(toks):
            raise ValidationError(
                f"n_target_tokens ({self.n_target_tokens}) does not match "
                f"tokens length ({len(toks)})", field="n_target_tokens")

    @property
    def total_lp(self) -> float:
        """Sum of per-token log-probabilities (log P(s) for direction=uni)."""
        return math.fsum(tok.lp for tok in self.tokens)


@dataclass(frozen=True, slots=True)
class MeasureVector:
    """The five acceptability measures for one scored sentence."""

    lp: float
    mean_lp: float
    pen_lp: float
    norm_lp: float
    slor: float
    alpha: float
    n_tokens: int

    def __post_init__(self):
        for name in ("lp", "mean_lp", "pen_lp", "norm_lp", "slor"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}", field=name)
        for name in ("lp", "mean_lp", "pen_lp"):
            if getattr(self, name) > 0:
                raise ValidationError(f"{name} must be <= 0", field=name)
        if self.n_tokens < 1:
            raise ValidationError("n_tokens must be >= 1", field="n_tokens")


# ---------------------------------------------------------------------------
# atomic file writing
# ---------------------------------------------------------------------------

def repr_float(x: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` atomically (temp file + rename), LF endings."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp.",
                               suffix="." + os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# testset.jsonl
# ---------------------------------------------------------------------------

def _require(obj: dict, key: str, lineno: int, path: str):
    if key not in obj:
        raise ValidationError(f"missing required field", path=path, line=lineno,
                              field=key)
    return obj[key]


def _parse_sentence_string(value, field: str) -> tuple[str, ...]:
    if not isinstance(value, str):
        raise ValidationError(f"{field} must be a string of space-separated tokens",
                              field=field)
    return tuple(value.split())


def load_testset(path: str | os.PathLike) -> list[TestSentence]:
    """Load ``testset.jsonl``; validate every invariant; preserve input order.

    Raises ValidationError naming the line number and field on the first
    malformed record; duplicate ids are rejected.  An empty file yields
    an empty list.
    """
    path = os.fspath(path)
    out: list[TestSentence] = []
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
                raise ValidationError("record must be a JSON object", path=path,
                                      line=lineno)
            try:
                rc_raw = _require(obj, "random_context", lineno, path)
                contexts = _require(obj, "real_context", lineno, path)
                if not isinstance(contexts, list):
                    raise ValidationError("real_context must be a list of 3 strings",
                                          field="real_context")
                if len(contexts) != 3:
                    raise ValidationError("real_context must have exactly 3 sentences",
                                          field="real_context")
                real_context = tuple(_parse_sentence_string(s, "real_context")
                                     for s in contexts)
                if rc_raw is None:
                    random_context = None
                else:
                    if not isinstance(rc_raw, list):
                        raise ValidationError("random_context must be null or a list "
                                              "of 3 strings", field="random_context")
                    if len(rc_raw) != 3:
                        raise ValidationError("random_context must have exactly 3 sentences",
                                              field="random_context")
                    random_context = tuple(_parse_sentence_string(s, "random_context")
                                           for s in rc_raw)
                level = _require(obj, "degradation_level", lineno, path)
                if not isinstance(level, int) or isinstance(level, bool):
                    raise ValidationError("degradation_level must be an integer",
                                          field="degradation_level")
                sentence = TestSentence(
                    id=str(_require(obj, "id", lineno, path)),
                    target=_parse_sentence_string(_require(obj, "target", lineno, path),
                                                  "target"),
                    real_context=real_context,
                    random_context=random_context,
                    origin=_require(obj, "origin", lineno, path),
                    degradation_level=level,
                )
            except ValidationError as e:
                raise e.with_context(path=path, line=lineno) from None
            if sentence.id in seen:
                raise ValidationError(f"duplicate id {sentence.id!r}", path=path,
                                      line=lineno, field="id")
            seen.add(sentence.id)
            out.append(sentence)
    return out


def _sentence_to_json(ts: TestSentence) -> dict:
    return {
        "id": ts.id,
        "target": " ".join(ts.target),
        "real_context": [" ".join(s) for s in ts.real_context],
        "random_context": (None if ts.random_context is None
                           else [" ".join(s) for s in ts.random_context]),
        "origin": ts.origin,
        "degradation_level": ts.degradation_level,
    }


def dumps_testset(sentences: Iterable[TestSentence]) -> str:
    return "".join(json.dumps(_sentence_to_json(ts), ensure_ascii=False) + "\n"
                   for ts in sentences)


def save_testset(sentences: Iterable[TestSentence], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_testset(sentences))


# ---------------------------------------------------------------------------
# ratings.csv
# ---------------------------------------------------------------------------

RATINGS_HEADER = ["worker_id", "sentence_id", "experiment", "rating"]


def load_ratings(path: str | os.PathLike) -> list[RatingRecord]:
    """Load ``ratings.csv``; raw ratings must be one of the four scale points."""
    path = os.fspath(path)
    out: list[RatingRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("missing header row", path=path, line=1) from None
        if header != RATINGS_HEADER:
            raise ValidationError(
                f"header must be {','.join(RATINGS_HEADER)}, got {','.join(header)}",
                path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValidationError(f"expected 4 columns, got {len(row)}",
                                      path=path, line=lineno)
            worker_id, sentence_id, experiment_s, rating_s = row
            try:
                experiment = ExperimentType(experiment_s)
            except ValueError:
                raise ValidationError(f"unknown experiment {experiment_s!r}",
                                      path=path, line=lineno,
                                      field="experiment") from None
            try:
                rating = float(rating_s)
            except ValueError:
                raise ValidationError(f"rating {rating_s!r} is not a number",
                                      path=path, line=lineno, field="rating") from None
            if rating not in RAW_SCALE_POINTS:
                raise ValidationError(
                    f"rating {rating_s} outside the scale points "
                    "{1.0, 2.0, 3.0, 4.0}", path=path, line=lineno, field="rating")
            try:
                out.append(RatingRecord(worker_id, sentence_id, experiment, rating))
            except ValidationError as e:
                raise e.with_context(path=path, line=lineno) from None
    return out


def dumps_ratings(records: Iterable[RatingRecord]) -> str:
    lines = [",".join(RATINGS_HEADER)]
    for r in records:
        lines.append(f"{r.worker_id},{r.sentence_id},{r.experiment.value},{r.rating!r}")
    return "\n".join(lines) + "\n"


def save_ratings(records: Iterable[RatingRecord], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_ratings(records))


# ---------------------------------------------------------------------------
# logprobs.jsonl
# ---------------------------------------------------------------------------

def _reject_constant(name: str):
    raise ValidationError(f"non-finite number {name!r} is not allowed")


def load_logprobs(path: str | os.PathLike) -> list[TokenLogProbRecord]:
    """Load ``logprobs.jsonl``; every lp must be finite and <= 0."""
    path = os.fspath(path)
    out: list[TokenLogProbRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line, parse_constant=_reject_constant)
            except json.JSONDecodeError as e:
                raise ValidationError(f"invalid JSON: {e.msg}", path=path,
                                      line=lineno) from None
            except ValidationError as e:
                raise e.with_context(path=path, line=lineno) from None
            if not isinstance(obj, dict):
                raise ValidationError("record must be a JSON object", path=path,
                                      line=lineno)
            try:
                variant_s = _require(obj, "context_variant", lineno, path)
                try:
                    variant = ExperimentType(variant_s)
                except ValueError:
                    raise ValidationError(f"unknown context_variant {variant_s!r}",
                                          field="context_variant") from None
                tokens_raw = _require(obj, "tokens", lineno, path)
                if not isinstance(tokens_raw, list):
                    raise ValidationError("tokens must be a list", field="tokens")
                tokens = []
                for item in tokens_raw:
                    if (not isinstance(item, dict) or "t" not in item
                            or "lp" not in item):
                        raise ValidationError(
                            'each token must be {"t": string, "lp": number}',
                            field="tokens")
                    lp = item["lp"]
                    if not isinstance(lp, (int, float)) or isinstance(lp, bool):
                        raise ValidationError("lp must be a number", field="tokens")
                    tokens.append(TokenLogProb(item["t"], float(lp)))
                n = _require(obj, "n_target_tokens", lineno, path)
                if not isinstance(n, int) or isinstance(n, bool):
                    raise ValidationError("n_target_tokens must be an integer",
                                          field="n_target_tokens")
                record = TokenLogProbRecord(
                    sentence_id=str(_require(obj, "sentence_id", lineno, path)),
                    provider=str(_require(obj, "provider", lineno, path)),
                    direction=_require(obj, "direction", lineno, path),
                    context_variant=variant,
                    tokens=tuple(tokens),
                    n_target_tokens=n,
                )
            except ValidationError as e:
                raise e.with_context(path=path, line=lineno) from None
            out.append(record)
    return out


def _record_to_json(rec: TokenLogProbRecord) -> dict:
    return {
        "sentence_id": rec.sentence_id,
        "provider": rec.provider,
        "direction": rec.direction,
        "context_variant": rec.context_variant.value,
        "tokens": [{"t": tok.t, "lp": tok.lp} for tok in rec.tokens],
        "n_target_tokens": rec.n_target_tokens,
    }


def dumps_logprobs(records: Iterable[TokenLogProbRecord]) -> str:
    # json.dumps serializes floats with repr: shortest string that round-trips,
    # which carries >= 12 significant digits whenever they matter.
    return "".join(json.dumps(_record_to_json(r), ensure_ascii=False) + "\n"
                   for r in records)


def save_logprobs(records: Iterable[TokenLogProbRecord],
                  path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_logprobs(records))


# ---------------------------------------------------------------------------
# corpus files
# ---------------------------------------------------------------------------

def load_corpus(path: str | os.PathLike) -> list[list[Sentence]]:
    """Load a plain-text corpus into documents of tokenized sentences.

    Format: documents are separated by blank lines; within a document,
    each line is one sentence.  Lines are run through :func:`tokenize`,
    so arbitrary cased/punctuated text is fine.
    """
    path = os.fspath(path)
    docs: list[list[Sentence]] = []
    current: list[Sentence] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                toks = tuple(tokenize(line))
                if toks:
                    current.append(toks)
            elif current:
                docs.append(current)
                current = []
    if current:
        docs.append(current)
    return docs


def corpus_sentences(docs: Iterable[Iterable[Sentence]]) -> list[Sentence]:
    """Flatten a document-structured corpus to a list of sentences."""
    return [s for doc in docs for s in doc]
