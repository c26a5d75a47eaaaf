"""Wire formats: the ``testset.jsonl`` reader and the ``logprobs.jsonl`` writer.

This package talks to the acceptability toolkit exclusively through these
two file formats; it never imports the toolkit itself.

``testset.jsonl`` — one JSON object per line::

    {"id": str, "target": "space separated tokens",
     "real_context": [str, str, str], "random_context": null | [str, str, str],
     "origin": str, "degradation_level": int}

``logprobs.jsonl`` — one JSON object per line::

    {"sentence_id": str, "provider": str, "direction": "uni" | "bi",
     "context_variant": "none" | "real" | "random",
     "tokens": [{"t": str, "lp": float}, ...], "n_target_tokens": int}

Every ``lp`` is a log-probability in nats: finite and <= 0.
``n_target_tokens`` always equals ``len(tokens)``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AdapterError

CONTEXT_VARIANTS = ("none", "real", "random")
DIRECTIONS = ("uni", "bi")

Sentence = tuple[str, ...]


@dataclass(frozen=True, slots=True)
class TestItem:
    """One row of ``testset.jsonl``: a target sentence plus its contexts."""

    __test__ = False        # a data type, not a pytest class

    id: str
    target: Sentence
    real_context: tuple[Sentence, Sentence, Sentence]
    random_context: tuple[Sentence, Sentence, Sentence] | None
    origin: str
    degradation_level: int

    def context_words(self, variant: str) -> tuple[str, ...]:
        """The context word sequence for *variant*, flattened in order.

        Returns an empty tuple for ``"none"``.  Raises :class:`AdapterError`
        for ``"random"`` when this item carries no random context.
        """
        if variant == "none":
            return ()
        if variant == "real":
            sentences = self.real_context
        elif variant == "random":
            if self.random_context is None:
                raise AdapterError(
                    f"sentence {self.id!r} has no random context; "
                    f"cannot export context variant 'random'")
            sentences = self.random_context
        else:
            raise AdapterError(f"unknown context variant {variant!r}; "
                               f"expected one of {CONTEXT_VARIANTS}")
        return tuple(w for sentence in sentences for w in sentence)


@dataclass(frozen=True, slots=True)
class SentenceLogProbs:
    """Per-token log-probabilities for one target sentence."""

    sentence_id: str
    provider: str
    direction: str
    context_variant: str
    tokens: tuple[tuple[str, float], ...]   # (token text, lp in nats)

    def __post_init__(self):
        if not self.sentence_id:
            raise AdapterError("sentence_id must be nonempty")
        if not self.provider:
            raise AdapterError("provider must be nonempty")
        if self.direction not in DIRECTIONS:
            raise AdapterError(f"direction must be one of {DIRECTIONS}, "
                               f"got {self.direction!r}")
        if self.context_variant not in CONTEXT_VARIANTS:
            raise AdapterError(f"context_variant must be one of "
                               f"{CONTEXT_VARIANTS}, got {self.context_variant!r}")
        if not self.tokens:
            raise AdapterError(f"sentence {self.sentence_id!r}: tokens must "
                               f"be nonempty")
        for text, lp in self.tokens:
            if not isinstance(text, str) or not text:
                raise AdapterError(f"sentence {self.sentence_id!r}: token text "
                                   f"must be a nonempty string, got {text!r}")
            if not math.isfinite(lp):
                raise AdapterError(f"sentence {self.sentence_id!r}: "
                                   f"log-probability must be finite, got {lp!r}")
            if lp > 0:
                raise AdapterError(f"sentence {self.sentence_id!r}: "
                                   f"log-probability must be <= 0, got {lp!r}")

    @property
    def n_target_tokens(self) -> int:
        return len(self.tokens)

    @property
    def total_lp(self) -> float:
        return math.fsum(lp for _, lp in self.tokens)


# ---------------------------------------------------------------------------
# testset.jsonl reader
# ---------------------------------------------------------------------------

def _field(obj: dict, key: str, path: str, lineno: int):
    if key not in obj:
        raise AdapterError(f"{path}:{lineno}: missing required field {key!r}")
    return obj[key]


def _words(value, key: str, path: str, lineno: int) -> Sentence:
    if not isinstance(value, str):
        raise AdapterError(f"{path}:{lineno}: {key} must be a string of "
                           f"space-separated tokens, got {type(value).__name__}")
    return tuple(value.split())


def _context(value, key: str, path: str, lineno: int):
    if not isinstance(value, list) or len(value) != 3:
        raise AdapterError(f"{path}:{lineno}: {key} must be a list of "
                           f"exactly 3 sentences")
    return tuple(_words(s, key, path, lineno) for s in value)


def read_testset(path: str | os.PathLike) -> list[TestItem]:
    """Read ``testset.jsonl``, preserving input order.

    Raises :class:`AdapterError` naming the file and line on the first
    malformed record; duplicate ids are rejected.
    """
    path = os.fspath(path)
    items: list[TestItem] = []
    seen: set[str] = set()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise AdapterError(f"cannot read testset {path!r}: {e}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise AdapterError(f"{path}:{lineno}: invalid JSON: "
                                   f"{e.msg}") from None
            if not isinstance(obj, dict):
                raise AdapterError(f"{path}:{lineno}: record must be a "
                                   f"JSON object")
            item_id = str(_field(obj, "id", path, lineno))
            target = _words(_field(obj, "target", path, lineno),
                            "target", path, lineno)
            if not target:
                raise AdapterError(f"{path}:{lineno}: target must be nonempty")
            rc_raw = _field(obj, "random_context", path, lineno)
            level = _field(obj, "degradation_level", path, lineno)
            if not isinstance(level, int) or isinstance(level, bool):
                raise AdapterError(f"{path}:{lineno}: degradation_level must "
                                   f"be an integer")
            item = TestItem(
                id=item_id,
                target=target,
                real_context=_context(_field(obj, "real_context", path, lineno),
                                      "real_context", path, lineno),
                random_context=(None if rc_raw is None else
                                _context(rc_raw, "random_context", path, lineno)),
                origin=str(_field(obj, "origin", path, lineno)),
                degradation_level=level,
            )
            if item.id in seen:
                raise AdapterError(f"{path}:{lineno}: duplicate id {item.id!r}")
            seen.add(item.id)
            items.append(item)
    return items


# ---------------------------------------------------------------------------
# logprobs.jsonl writer
# ---------------------------------------------------------------------------

def _record_to_json(rec: SentenceLogProbs) -> dict:
    return {
        "sentence_id": rec.sentence_id,
        "provider": rec.provider,
        "direction": rec.direction,
        "context_variant": rec.context_variant,
        "tokens": [{"t": t, "lp": lp} for t, lp in rec.tokens],
        "n_target_tokens": rec.n_target_tokens,
    }


def dumps_logprobs(records: Iterable[SentenceLogProbs]) -> str:
    """Serialize records as JSONL, one object per line.

    ``json.dumps`` writes floats with ``repr``: the shortest string that
    round-trips, which carries >= 12 significant digits whenever they matter.
    """
    return "".join(json.dumps(_record_to_json(r), ensure_ascii=False) + "\n"
                   for r in records)


def write_logprobs(records: Sequence[SentenceLogProbs],
                   path: str | os.PathLike) -> None:
    """Write ``logprobs.jsonl`` atomically (temp file + rename)."""
    path = os.fspath(path)
    text = dumps_logprobs(records)
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
