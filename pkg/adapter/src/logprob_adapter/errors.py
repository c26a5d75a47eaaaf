"""The error type every user-facing failure in this package raises."""

from __future__ import annotations


class AdapterError(ValueError):
    """Invalid input, unusable checkpoint, or a sequence the model cannot fit.

    The message is always self-contained: it names the offending sentence,
    file, or checkpoint and states the limit that was exceeded.
    """
