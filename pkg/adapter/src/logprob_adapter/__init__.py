"""Export per-token log-probabilities from transformer checkpoints.

This package turns pretrained neural language models — causal ones like
GPT-2 and masked ones like BERT — into ``logprobs.jsonl`` files: one record
per sentence, one ``(token, log-prob)`` pair per sub-word token of the
target sentence, optionally conditioned on a prepended context.  That file
format is the package's only coupling to downstream consumers; it computes
no acceptability measures itself.

Public API:

* :class:`AdapterRequest` — one export job (checkpoint, direction, testset,
  context variant, device).
* :func:`export_uni` / :func:`export_bi` / :func:`run_export` — score a
  testset and return (optionally write) the records.
* :func:`load_checkpoint` — load and validate a checkpoint for a direction.
* :func:`read_testset`, :func:`write_logprobs`, :func:`dumps_logprobs` —
  the wire formats.
* :class:`TestItem`, :class:`SentenceLogProbs` — the row types.
* :class:`AdapterError` — every user-facing failure.

The ``adapter`` console command wraps :func:`run_export`.
"""

from __future__ import annotations

__version__ = "1.0.0"

from .errors import AdapterError
from .formats import (CONTEXT_VARIANTS, DIRECTIONS, SentenceLogProbs,
                      TestItem, dumps_logprobs, read_testset, write_logprobs)
from .adapter import (AdapterRequest, export_bi, export_uni, load_checkpoint,
                      run_export)

__all__ = [
    "AdapterError",
    "AdapterRequest",
    "CONTEXT_VARIANTS",
    "DIRECTIONS",
    "SentenceLogProbs",
    "TestItem",
    "__version__",
    "dumps_logprobs",
    "export_bi",
    "export_uni",
    "load_checkpoint",
    "read_testset",
    "run_export",
    "write_logprobs",
]
