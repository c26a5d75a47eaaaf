"""The ``adapter`` command: export token log-probs from a checkpoint.

Usage::

    adapter --checkpoint NAME --direction uni|bi --testset PATH \
            --context none|real|random --out PATH [--device DEV]

Reads ``testset.jsonl``, scores every sentence with the checkpoint, and
writes ``logprobs.jsonl`` to ``--out``.  Exit codes: 0 success, 1 any
scoring or input error (message on stderr), 2 bad command line.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .adapter import AdapterRequest, run_export
from .errors import AdapterError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Export per-token log-probabilities from a pretrained "
                    "causal or masked-LM checkpoint into logprobs.jsonl.")
    parser.add_argument("--checkpoint", required=True,
                        help="model name or local checkpoint directory")
    parser.add_argument("--direction", required=True, choices=["uni", "bi"],
                        help="uni: causal left-to-right scoring; "
                             "bi: masked scoring, one mask per position")
    parser.add_argument("--testset", required=True,
                        help="testset.jsonl with the sentences to score")
    parser.add_argument("--context", default="none",
                        choices=["none", "real", "random"],
                        help="which context to prepend to each target "
                             "(default: none)")
    parser.add_argument("--out", required=True,
                        help="path of the logprobs.jsonl file to write")
    parser.add_argument("--device", default="cpu",
                        help="torch device to run on (default: cpu)")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        request = AdapterRequest(
            checkpoint=args.checkpoint,
            direction=args.direction,
            testset=args.testset,
            context_variant=args.context,
            device=args.device,
        )
        records = run_export(request, out=args.out)
    except AdapterError as e:
        print(f"adapter: error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {len(records)} records ({args.direction}, "
          f"context {args.context}) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
