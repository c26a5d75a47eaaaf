"""Sentence acceptability from language-model probabilities.

A small numpy-based toolkit with four parts:

* test-set generation: graded synthetic degradations of natural sentences,
  HIT bundling, and random-context pairing (``acceptability.testgen``);
* a human-ratings pipeline: worker filtering, per-user calibration,
  outlier removal, mean aggregation (``acceptability.ratings``);
* native probability providers (Kneser-Ney n-gram + smoothed unigram) and
  the five acceptability measures LP / MeanLP / PenLP / NormLP / SLOR
  (``acceptability.lm``, ``acceptability.measures``);
* the analysis statistics: Pearson r, one-tailed Wilcoxon signed-rank,
  regression-line comparison, and annotator upper bounds
  (``acceptability.stats``).

The ``acceptability`` console script ties everything together; see the
README for a walkthrough.
"""
from .core import (
    ExperimentType,
    MeasureVector,
    NumericalError,
    RatingRecord,
    TestSentence,
    TokenLogProb,
    TokenLogProbRecord,
    UsageError,
    ValidationError,
    corpus_sentences,
    load_corpus,
    load_logprobs,
    load_ratings,
    load_testset,
    save_logprobs,
    save_ratings,
    save_testset,
    tokenize,
)
from .lm import (
    BOS,
    EOS,
    UNK,
    NgramModel,
    RecordProvider,
    UnigramModel,
    load_model,
    dumps_model,
    perplexity,
    save_model,
    score_bi,
    score_uni,
    train_ngram,
    train_unigram,
)
from .measures import (
    DEFAULT_ALPHA,
    MeasureInput,
    ScoreRow,
    compute_measures,
    length_penalty,
    load_scores,
    measures_from_record,
    save_scores,
    score_variant,
)
from .ratings import (
    MeanRating,
    PipelineAudit,
    PipelineResult,
    Provenance,
    RatingSet,
    aggregate,
    calibrate,
    filter_workers,
    load_mean_ratings,
    ratings_by_sentence,
    remove_outliers,
    run_pipeline,
    save_mean_ratings,
)
from .simulate import (
    AnnotatorPool,
    ContextStudy,
    generate_toy_corpus,
    level_mean,
    simulate_context_study,
    simulate_ratings,
    true_mean_by_sentence,
)
from .testgen import (
    Hit,
    NoiseOp,
    apply_op,
    assign_random_contexts,
    build_hits,
    build_testset,
    degrade,
    eligible_paragraphs,
    load_hits,
    save_hits,
    source_key,
    validate_hits,
)
from .stats import (
    LineFit,
    RegressionComparison,
    UpperBoundResult,
    WilcoxonResult,
    compare_regression_lines,
    fit_line,
    normal_cdf,
    pearson,
    regularized_incomplete_beta,
    student_t_two_sided_p,
    ub_half_vs_half,
    ub_one_vs_rest,
    wilcoxon_one_tailed,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatorPool",
    "BOS",
    "ContextStudy",
    "DEFAULT_ALPHA",
    "EOS",
    "ExperimentType",
    "Hit",
    "LineFit",
    "MeanRating",
    "NoiseOp",
    "MeasureInput",
    "MeasureVector",
    "NgramModel",
    "NumericalError",
    "PipelineAudit",
    "PipelineResult",
    "Provenance",
    "RatingRecord",
    "RatingSet",
    "RecordProvider",
    "RegressionComparison",
    "ScoreRow",
    "TestSentence",
    "TokenLogProb",
    "TokenLogProbRecord",
    "UNK",
    "UnigramModel",
    "UpperBoundResult",
    "UsageError",
    "ValidationError",
    "WilcoxonResult",
    "aggregate",
    "apply_op",
    "assign_random_contexts",
    "build_hits",
    "build_testset",
    "calibrate",
    "compare_regression_lines",
    "compute_measures",
    "corpus_sentences",
    "degrade",
    "dumps_model",
    "eligible_paragraphs",
    "filter_workers",
    "fit_line",
    "generate_toy_corpus",
    "length_penalty",
    "level_mean",
    "load_corpus",
    "load_hits",
    "load_logprobs",
    "load_mean_ratings",
    "load_model",
    "load_ratings",
    "load_scores",
    "load_testset",
    "measures_from_record",
    "normal_cdf",
    "pearson",
    "perplexity",
    "ratings_by_sentence",
    "regularized_incomplete_beta",
    "remove_outliers",
    "run_pipeline",
    "save_hits",
    "save_logprobs",
    "save_mean_ratings",
    "save_model",
    "save_ratings",
    "save_scores",
    "save_testset",
    "score_bi",
    "score_uni",
    "score_variant",
    "simulate_context_study",
    "simulate_ratings",
    "source_key",
    "student_t_two_sided_p",
    "tokenize",
    "validate_hits",
    "toy_corpus_path",
    "train_ngram",
    "train_unigram",
    "true_mean_by_sentence",
    "ub_half_vs_half",
    "ub_one_vs_rest",
    "wilcoxon_one_tailed",
]


def toy_corpus_path() -> str:
    """Path of the bundled toy corpus (plain text, blank-line-separated docs)."""
    import os

    return os.path.join(os.path.dirname(__file__), "data", "toy_corpus.txt")
