"""Command-line surface: one binary, six subcommands.

    build-testset    sample targets from a corpus, degrade, bundle HITs
    aggregate        raw ratings -> filtered/calibrated mean ratings
    train-lm         fit the Kneser-Ney n-gram + smoothed unigram models
    score            compute the five acceptability measures per sentence
    evaluate         correlate measures with mean ratings
    analyze-context  compare rating conditions: regression, test, bounds

Conventions shared by every command:

* ``--out`` is a directory; outputs have fixed names inside it and a
  ``config.json`` echo of the resolved parameters is always written, so
  a run can be reproduced from its output directory alone.
* randomized commands require ``--seed``; pass ``--seed auto`` to let
  the tool pick one (the choice is recorded in the config echo).
* ``--corpus toy`` resolves to the bundled toy corpus.
* files are written atomically and ordered by sentence id.
* exit codes: 0 success, 1 usage error, 2 data validation error,
  3 numerical failure.
"""
from __future__ import annotations

import argparse
import collections
import json
import logging
import os
import secrets
import sys
from typing import Sequence

import numpy as np

from . import __version__, toy_corpus_path
from .core import (
    ExperimentType,
    NumericalError,
    UsageError,
    ValidationError,
    atomic_write_text,
    corpus_sentences,
    load_corpus,
    load_logprobs,
    load_ratings,
    load_testset,
    repr_float,
    save_logprobs,
    save_testset,
)
from .lm import (
    MODEL_FORMAT_VERSION,
    NgramModel,
    RecordProvider,
    UnigramModel,
    load_model,
    perplexity,
    save_model,
    train_ngram,
    train_unigram,
)
from .measures import (
    DEFAULT_ALPHA,
    MEASURE_NAMES,
    ScoreRow,
    load_scores,
    measures_from_record,
    save_scores,
)
from .ratings import (
    DEFAULT_MIN_FRACTION,
    DEFAULT_OUTLIER_SD,
    load_mean_ratings,
    mean_ratings_sniff,
    ratings_by_sentence,
    run_pipeline,
    save_mean_ratings,
)
from .stats import (
    compare_regression_lines,
    fit_line,
    pearson,
    ub_half_vs_half,
    ub_one_vs_rest,
    wilcoxon_one_tailed,
)
from .testgen import assign_random_contexts, build_hits, build_testset, save_hits

log = logging.getLogger("acceptability")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_FORMATS = """\
file formats (all UTF-8; floats as shortest round-tripping decimals):

  testset.jsonl   one JSON object per line: {"id", "target",
                  "real_context": [3 strings], "random_context":
                  [3 strings] | null, "origin": "original"|"degraded",
                  "degradation_level": int}; sentences are strings of
                  space-separated lowercase tokens
  hits.jsonl      {"hit_id", "sentence_ids": [10 strings]} per line;
                  2 originals + 8 degraded from distinct other sources
  ratings.csv     header worker_id,sentence_id,experiment,rating;
                  experiment is none|real|random; raw ratings are 1-4
  mean_ratings.csv  header sentence_id,experiment,mean,n_ratings
  model.json      {"format_version": %d, "model": {...}} for both the
                  n-gram ("ngram-kn") and unigram ("unigram") types
  logprobs.jsonl  {"sentence_id", "provider", "direction": "uni"|"bi",
                  "context_variant", "tokens": [{"t", "lp"}...],
                  "n_target_tokens"} per line; lp in nats; any provider
                  following it can feed `score --logprobs`
  scores.csv      header sentence_id,provider,direction,context_variant,
                  lp,mean_lp,pen_lp,norm_lp,slor,n_tokens
""" % MODEL_FORMAT_VERSION


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(message)


def _resolve_seed(value: str) -> tuple[int, bool]:
    if value == "auto":
        return secrets.randbits(32), True
    try:
        return int(value), False
    except ValueError:
        raise UsageError(
            f"--seed must be an integer or 'auto', got {value!r}") from None


def _corpus_path(value: str) -> str:
    return toy_corpus_path() if value == "toy" else value


def _write_config(out_dir: str, command: str, params: dict) -> None:
    payload = {"command": command, "package_version": __version__,
               "parameters": params}
    atomic_write_text(os.path.join(out_dir, "config.json"),
                      json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _prepare_out(args) -> str:
    out = os.fspath(args.out)
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# build-testset
# ---------------------------------------------------------------------------

def _parse_levels(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(
            f"--levels must be a comma-separated list of integers, "
            f"got {text!r}") from None


def cmd_build_testset(args) -> int:
    seed, was_auto = _resolve_seed(args.seed)
    levels = _parse_levels(args.levels)
    corpus = load_corpus(_corpus_path(args.corpus))
    testset = build_testset(corpus, args.n_targets, levels, seed)
    if len(corpus) >= 2:
        testset = assign_random_contexts(testset, corpus, seed)
    else:
        print("note: single-document corpus, no random contexts assigned")

    out = _prepare_out(args)
    save_testset(testset, os.path.join(out, "testset.jsonl"))
    n_originals = sum(1 for ts in testset if ts.origin == "original")
    hits = None
    if len(testset) % 10 == 0 and len(testset) == 5 * n_originals:
        hits = build_hits(testset, seed)
        save_hits(hits, os.path.join(out, "hits.jsonl"))
    else:
        print("note: testset shape is not 10k sentences at a 1:4 "
              "original:degraded ratio; hits.jsonl not written")

    _write_config(out, "build-testset", {
        "corpus": args.corpus, "n_targets": args.n_targets,
        "levels": levels, "seed": seed, "seed_was_auto": was_auto,
        "out": args.out,
    })
    per_level = collections.Counter(ts.degradation_level for ts in testset)
    print(f"testset: {len(testset)} sentences "
          f"({n_originals} originals) -> {out}/testset.jsonl")
    for level in sorted(per_level):
        print(f"  level {level}: {per_level[level]}")
    if hits is not None:
        print(f"hits: {len(hits)} -> {out}/hits.jsonl")
    if was_auto:
        print(f"seed (auto): {seed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# aggregate
# ---------------------------------------------------------------------------

def _original_ids(testset_path) -> set[str]:
    if testset_path is None:
        return set()
    return {ts.id for ts in load_testset(testset_path)
            if ts.origin == "original"}


def cmd_aggregate(args) -> int:
    records = load_ratings(args.ratings)
    if not records:
        raise ValidationError(f"no rating records in {args.ratings}")
    result = run_pipeline(records, _original_ids(args.testset),
                          min_fraction=args.min_fraction, k=args.outlier_sd)
    out = _prepare_out(args)
    save_mean_ratings(result.means, os.path.join(out, "mean_ratings.csv"))
    atomic_write_text(os.path.join(out, "audit.json"),
                      json.dumps(result.audit.to_json(), indent=2,
                                 sort_keys=True) + "\n")
    _write_config(out, "aggregate", {
        "ratings": args.ratings, "testset": args.testset,
        "min_fraction": args.min_fraction, "outlier_sd": args.outlier_sd,
        "out": args.out,
    })
    audit = result.audit
    kept = audit.n_raw - len(audit.removed_ratings)
    discarded = 100.0 * len(audit.removed_ratings) / kept if kept else 0.0
    print(f"ratings: {audit.n_raw} raw -> {audit.n_final} final")
    print(f"workers removed: {len(audit.removed_workers)}"
          + (" (" + ", ".join(w.worker_id for w in audit.removed_workers) + ")"
             if audit.removed_workers else ""))
    print(f"workers adjusted by +/-1.0: {len(audit.adjustments)}")
    print(f"outlier ratings removed: {len(audit.removed_ratings)} "
          f"({discarded:.2f}% of the {kept} that reached the outlier stage)")
    print(f"mean ratings: {len(result.means)} -> {out}/mean_ratings.csv")
    for warning in audit.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# train-lm
# ---------------------------------------------------------------------------

def cmd_train_lm(args) -> int:
    sentences = corpus_sentences(load_corpus(_corpus_path(args.corpus)))
    if not sentences:
        raise ValidationError(f"corpus {args.corpus!r} contains no sentences")
    model = train_ngram(sentences, order=args.order, discount=args.discount,
                        min_count=args.min_count)
    unigram = train_unigram(sentences, min_count=args.min_count)
    out = _prepare_out(args)
    save_model(model, os.path.join(out, "model.json"))
    save_model(unigram, os.path.join(out, "unigram.json"))
    _write_config(out, "train-lm", {
        "corpus": args.corpus, "order": args.order, "discount": args.discount,
        "min_count": args.min_count, "heldout": args.heldout, "out": args.out,
    })
    print(f"n-gram model: order {model.order}, vocabulary {len(model.vocab)} "
          f"-> {out}/model.json")
    print(f"unigram model: vocabulary {len(unigram.vocab)} "
          f"-> {out}/unigram.json")
    if args.heldout is not None:
        heldout = corpus_sentences(load_corpus(_corpus_path(args.heldout)))
        if not heldout:
            raise ValidationError(
                f"heldout corpus {args.heldout!r} contains no sentences")
        print(f"heldout perplexity: {repr_float(perplexity(model, heldout))}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def cmd_score(args) -> int:
    testset = sorted(load_testset(args.testset), key=lambda ts: ts.id)
    if not testset:
        raise ValidationError(f"testset {args.testset!r} is empty")
    variant = ExperimentType(args.context)
    unigram = load_model(args.unigram)
    if not isinstance(unigram, UnigramModel):
        raise ValidationError(
            f"--unigram must point to a unigram model file, "
            f"{args.unigram!r} holds {type(unigram).__name__}")
    if args.model is not None:
        provider = load_model(args.model)
    else:
        provider = RecordProvider(load_logprobs(args.logprobs))

    rows, records = [], []
    for ts in testset:
        record = provider.score(ts, variant, args.direction)
        rows.append(ScoreRow(
            sentence_id=ts.id, provider=record.provider,
            direction=record.direction, context_variant=variant,
            measures=measures_from_record(
                record, unigram.sentence_logprob(ts.target), alpha=args.alpha),
        ))
        records.append(record)

    out = _prepare_out(args)
    save_scores(rows, os.path.join(out, "scores.csv"))
    native = args.model is not None
    if native:
        # the records the measures were computed from, in the same
        # interchange format external providers use
        save_logprobs(records, os.path.join(out, "logprobs.jsonl"))
    _write_config(out, "score", {
        "model": args.model, "logprobs": args.logprobs,
        "unigram": args.unigram, "testset": args.testset,
        "context": variant.value, "direction": args.direction,
        "alpha": args.alpha, "out": args.out,
    })
    print(f"scored {len(rows)} sentences ({args.direction}, "
          f"context {variant.value}) -> {out}/scores.csv")
    if native:
        print(f"token log-probs -> {out}/logprobs.jsonl")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    score_rows = load_scores(args.scores)
    if not score_rows:
        raise ValidationError(f"no score rows in {args.scores}")
    ratings = {(m.sentence_id, m.experiment.value): m.mean
               for m in load_mean_ratings(args.mean_ratings)}

    by_variant: dict[str, dict[str, dict[str, float]]] = {}
    for row in score_rows:
        key = (row["sentence_id"], row["context_variant"])
        bucket = by_variant.setdefault(row["context_variant"], {})
        if row["sentence_id"] in bucket:
            raise ValidationError(
                f"duplicate scores for sentence {key[0]!r} under context "
                f"{key[1]!r} in {args.scores}")
        bucket[row["sentence_id"]] = row

    table: dict[str, dict[str, float]] = {}
    n_aligned: dict[str, int] = {}
    for variant in sorted(by_variant):
        bucket = by_variant[variant]
        aligned = sorted(sid for sid in bucket if (sid, variant) in ratings)
        if len(aligned) < 3:
            raise ValidationError(
                f"only {len(aligned)} sentences align between scores "
                f"(context {variant!r}) and mean ratings; need >= 3")
        human = [ratings[(sid, variant)] for sid in aligned]
        table[variant] = {
            measure: pearson([bucket[sid][measure] for sid in aligned], human)
            for measure in MEASURE_NAMES}
        n_aligned[variant] = len(aligned)

    out = _prepare_out(args)
    atomic_write_text(os.path.join(out, "evaluation.json"), json.dumps(
        {"pearson_r": table, "n_aligned": n_aligned},
        indent=2, sort_keys=True) + "\n")
    _write_config(out, "evaluate", {
        "scores": args.scores, "mean_ratings": args.mean_ratings,
        "out": args.out,
    })
    variants = sorted(table)
    print("Pearson r against mean ratings "
          f"({', '.join(f'{v}: n={n_aligned[v]}' for v in variants)})")
    print(f"{'measure':<10}" + "".join(f"{v:>10}" for v in variants))
    for measure in MEASURE_NAMES:
        print(f"{measure:<10}"
              + "".join(f"{table[v][measure]:>10.4f}" for v in variants))
    print(f"table -> {out}/evaluation.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze-context
# ---------------------------------------------------------------------------

def _load_condition(path, original_ids):
    """One condition's ratings: means per sentence + raw pools if available.

    Accepts either a raw ratings.csv (the full aggregation pipeline runs
    and the per-sentence rating pools support the upper bounds) or a
    mean_ratings.csv (upper bounds are unavailable).  Returns
    (means: {sid: mean}, pools: {sid: [ratings]} | None,
    pre_outlier_pools | None, audit | None).
    """
    if mean_ratings_sniff(path):
        rows = load_mean_ratings(path)
        means: dict[str, float] = {}
        for row in rows:
            if row.sentence_id in means:
                raise ValidationError(
                    f"sentence {row.sentence_id!r} appears more than once in "
                    f"{path}; pass one condition per file")
            means[row.sentence_id] = row.mean
        if not means:
            raise ValidationError(f"no mean ratings in {path}")
        return means, None, None, None

    records = load_ratings(path)
    if not records:
        raise ValidationError(f"no rating records in {path}")
    experiments = {rec.experiment for rec in records}
    if len(experiments) > 1:
        raise ValidationError(
            f"{path} mixes experiments "
            f"{sorted(e.value for e in experiments)}; pass one condition "
            "per file")
    experiment = experiments.pop()
    result = run_pipeline(records, original_ids)
    means = {m.sentence_id: m.mean for m in result.means}
    pools = ratings_by_sentence(result.ratings, experiment)
    pre_outlier = ratings_by_sentence(result.calibrated, experiment)
    return means, pools, pre_outlier, result.audit


def _line_to_json(fit) -> dict:
    return {"slope": fit.slope, "intercept": fit.intercept,
            "slope_se": fit.slope_se, "intercept_se": fit.intercept_se,
            "r": fit.r, "n": fit.n}


def _ub_to_json(ub) -> dict:
    return {"value": ub.value, "n_trials": ub.n_trials,
            "n_sentences": ub.n_sentences, "excluded": list(ub.excluded)}


def cmd_analyze_context(args) -> int:
    seed, was_auto = _resolve_seed(args.seed)
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    original_ids = _original_ids(args.testset)
    paths = {"none": args.ratings_none, "real": args.ratings_real,
             "random": args.ratings_random}
    conditions = {}
    for name in ("none", "real", "random"):
        conditions[name] = _load_condition(paths[name], original_ids)

    id_sets = {name: set(cond[0]) for name, cond in conditions.items()}
    common = id_sets["none"] & id_sets["real"] & id_sets["random"]
    union = id_sets["none"] | id_sets["real"] | id_sets["random"]
    if common != union:
        missing = sorted(union - common)[:5]
        raise ValidationError(
            "the three conditions do not cover the same sentences; "
            f"{len(union - common)} ids are not in all three "
            f"(first few: {missing})")
    ids = sorted(common)

    means = {name: cond[0] for name, cond in conditions.items()}
    x = [means["none"][sid] for sid in ids]
    y_real = [means["real"][sid] for sid in ids]
    y_random = [means["random"][sid] for sid in ids]

    warnings: list[dict] = []
    report: dict = {"n_sentences": len(ids), "seed": seed,
                    "trials": args.trials}

    report["pearson"] = {
        "none_real": pearson(x, y_real),
        "none_random": pearson(x, y_random),
        "real_random": pearson(y_real, y_random),
    }

    try:
        w = wilcoxon_one_tailed(y_real, y_random)
        report["wilcoxon_real_gt_random"] = {
            "statistic": w.statistic, "p_value": w.p_value,
            "n_pairs": w.n_pairs, "method": w.method}
    except ValidationError as e:
        report["wilcoxon_real_gt_random"] = None
        warnings.append({"code": "wilcoxon_degenerate", "detail": str(e)})

    # base = random so the reported offset/slope differences read as
    # real minus random: positive offset = supportive context rated higher
    cmp = compare_regression_lines(x, y_random, y_real)
    report["regression_on_no_context"] = {
        "real": _line_to_json(fit_line(x, y_real)),
        "random": _line_to_json(fit_line(x, y_random)),
        "offset_real_minus_random": cmp.offset,
        "offset_se": cmp.offset_se,
        "offset_t": cmp.offset_t,
        "offset_p": cmp.offset_p,
        "slope_diff_real_minus_random": cmp.slope_diff,
        "slope_diff_se": cmp.slope_diff_se,
        "slope_diff_t": cmp.slope_diff_t,
        "slope_diff_p": cmp.slope_diff_p,
        "df": cmp.df,
    }

    ub_seeds = iter(int(ss.generate_state(1)[0])
                    for ss in np.random.SeedSequence(seed).spawn(12))
    upper_bounds: dict = {}
    audits: dict = {}
    for name in ("none", "real", "random"):
        _, pools, pre_outlier, audit = conditions[name]
        if pools is None:
            upper_bounds[name] = None
            warnings.append({
                "code": "upper_bounds_unavailable",
                "detail": f"condition {name!r} was given as mean ratings; "
                          "upper bounds need raw per-worker ratings"})
            continue
        upper_bounds[name] = {
            "ub_one_vs_rest": _ub_to_json(
                ub_one_vs_rest(pools, args.trials, next(ub_seeds))),
            "ub_half_vs_half": _ub_to_json(
                ub_half_vs_half(pools, args.trials, next(ub_seeds))),
            "pre_outlier_ub_one_vs_rest": _ub_to_json(
                ub_one_vs_rest(pre_outlier, args.trials, next(ub_seeds))),
            "pre_outlier_ub_half_vs_half": _ub_to_json(
                ub_half_vs_half(pre_outlier, args.trials, next(ub_seeds))),
        }
        audits[name] = audit.to_json()
    report["upper_bounds"] = upper_bounds
    if audits:
        report["pipeline_audits"] = audits
    report["warnings"] = warnings

    out = _prepare_out(args)
    atomic_write_text(os.path.join(out, "report.json"),
                      json.dumps(report, indent=2, sort_keys=True) + "\n")
    for cond, ys in (("real", y_real), ("random", y_random)):
        lines = ["sentence_id,mean_none,mean_" + cond]
        lines += [f"{sid},{repr_float(xv)},{repr_float(yv)}"
                  for sid, xv, yv in zip(ids, x, ys)]
        atomic_write_text(os.path.join(out, f"scatter_{cond}.csv"),
                          "\n".join(lines) + "\n")
    _write_config(out, "analyze-context", {
        "ratings_none": args.ratings_none, "ratings_real": args.ratings_real,
        "ratings_random": args.ratings_random, "testset": args.testset,
        "trials": args.trials, "seed": seed, "seed_was_auto": was_auto,
        "out": args.out,
    })

    reg = report["regression_on_no_context"]
    print(f"sentences: {len(ids)}")
    print(f"slope real: {reg['real']['slope']:.4f}   "
          f"slope random: {reg['random']['slope']:.4f}")
    print(f"offset real-random: {reg['offset_real_minus_random']:.4f} "
          f"(p = {reg['offset_p']:.3g})")
    print(f"slope difference: {reg['slope_diff_real_minus_random']:.4f} "
          f"(p = {reg['slope_diff_p']:.3g})")
    wrep = report["wilcoxon_real_gt_random"]
    if wrep is None:
        print("wilcoxon real > random: unavailable (see warnings)")
    else:
        print(f"wilcoxon real > random: W = {wrep['statistic']}, "
              f"p = {wrep['p_value']:.3g} ({wrep['method']})")
    for name in ("none", "real", "random"):
        ub = upper_bounds[name]
        if ub is not None:
            print(f"upper bounds ({name}): one-vs-rest "
                  f"{ub['ub_one_vs_rest']['value']:.4f}, half-vs-half "
                  f"{ub['ub_half_vs_half']['value']:.4f}")
    for warning in warnings:
        print(f"warning [{warning['code']}]: {warning['detail']}",
              file=sys.stderr)
    print(f"report -> {out}/report.json")
    if was_auto:
        print(f"seed (auto): {seed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(
        prog="acceptability",
        description=__doc__.split("\n\nConventions")[0],
        epilog=_FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"],
                        help="logging verbosity (default: warning)")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")

    p = sub.add_parser("build-testset",
                       help="sample targets, degrade, assign random "
                            "contexts, bundle HITs")
    p.add_argument("--corpus", required=True,
                   help="corpus file (blank-line-separated paragraphs) or "
                        "'toy' for the bundled corpus")
    p.add_argument("--n-targets", type=int, default=50,
                   help="number of original sentences to sample (default 50)")
    p.add_argument("--levels", default="1,2,3,4",
                   help="comma-separated degradation levels; '' for "
                        "originals only (default 1,2,3,4)")
    p.add_argument("--seed", required=True,
                   help="integer seed, or 'auto' to pick and record one")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_build_testset)

    p = sub.add_parser("aggregate",
                       help="run the ratings pipeline: worker filter, "
                            "calibration, outliers, means")
    p.add_argument("--ratings", required=True, help="raw ratings.csv")
    p.add_argument("--testset", default=None,
                   help="testset.jsonl naming the original sentences (the "
                        "worker filter retains everyone without it)")
    p.add_argument("--min-fraction", type=float, default=DEFAULT_MIN_FRACTION,
                   help="minimum fraction of a worker's original-sentence "
                        "ratings at >= 3 (default %(default)s)")
    p.add_argument("--outlier-sd", type=float, default=DEFAULT_OUTLIER_SD,
                   help="remove ratings farther than this many SDs from "
                        "their sentence mean (default %(default)s)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("train-lm",
                       help="train the Kneser-Ney n-gram and unigram models")
    p.add_argument("--corpus", required=True,
                   help="training corpus file or 'toy'")
    p.add_argument("--order", type=int, default=3,
                   help="n-gram order, 2-5 (default 3)")
    p.add_argument("--discount", type=float, default=0.75,
                   help="absolute discount in (0, 1) (default 0.75)")
    p.add_argument("--min-count", type=int, default=2,
                   help="words below this count become <unk> (default 2)")
    p.add_argument("--heldout", default=None,
                   help="corpus file to report perplexity on")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("score",
                       help="compute LP, MeanLP, PenLP, NormLP, SLOR per "
                            "sentence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", default=None,
                     help="model.json from train-lm (native scoring)")
    src.add_argument("--logprobs", default=None,
                     help="logprobs.jsonl from an external provider")
    p.add_argument("--testset", required=True, help="testset.jsonl")
    p.add_argument("--context", choices=["none", "real", "random"],
                   default="none",
                   help="context variant to condition on (default none)")
    p.add_argument("--direction", choices=["uni", "bi"], default="uni",
                   help="unidirectional or bidirectional scoring "
                        "(default uni)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="PenLP length-penalty exponent (default %(default)s)")
    p.add_argument("--unigram", required=True,
                   help="unigram.json from train-lm (for NormLP and SLOR)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate",
                       help="Pearson r of each measure against mean ratings")
    p.add_argument("--scores", required=True, help="scores.csv from score")
    p.add_argument("--mean-ratings", required=True,
                   help="mean_ratings.csv from aggregate")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-context",
                       help="compare the none/real/random rating conditions")
    p.add_argument("--ratings-none", required=True,
                   help="ratings.csv or mean_ratings.csv for the "
                        "no-context condition")
    p.add_argument("--ratings-real", required=True,
                   help="ratings for the real-context condition")
    p.add_argument("--ratings-random", required=True,
                   help="ratings for the random-context condition")
    p.add_argument("--testset", default=None,
                   help="testset.jsonl naming originals (for the worker "
                        "filter on raw ratings)")
    p.add_argument("--trials", type=int, default=1000,
                   help="trials for the annotator upper bounds "
                        "(default 1000)")
    p.add_argument("--seed", required=True,
                   help="integer seed for the upper-bound resampling, or "
                        "'auto'")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze_context)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "--version":
        print(json.dumps({"name": "acceptability", "version": __version__,
                          "model_format_version": MODEL_FORMAT_VERSION},
                         sort_keys=True))
        return EXIT_OK
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=getattr(logging, args.log_level.upper()))
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
